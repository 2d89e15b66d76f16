// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "flowstitch/flowstitch.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "bench.hpp"
#include "model.hpp"
#include "schedule.hpp"
#include "setcover.hpp"
#include "stitch.hpp"
#include "subsolver.hpp"

struct fst_instance {
  flowstitch::Instance inst;
};

struct fst_schedule {
  flowstitch::Schedule sched;
};

struct fst_report {
  flowstitch::StitchReport report;
  std::string r2c;
};

namespace {

thread_local std::string g_last_error;

fst_status fail(fst_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

fst_status map_code(flowstitch::ErrorCode code) {
  switch (code) {
    case flowstitch::ErrorCode::kParse: return FST_ERR_PARSE;
    case flowstitch::ErrorCode::kInvalidArgument: return FST_ERR_INVALID_ARGUMENT;
    case flowstitch::ErrorCode::kTooLarge: return FST_ERR_TOO_LARGE;
    case flowstitch::ErrorCode::kStructural: return FST_ERR_STRUCTURAL;
    case flowstitch::ErrorCode::kInternal: return FST_ERR_INTERNAL;
    case flowstitch::ErrorCode::kIo: return FST_ERR_IO;
  }
  return FST_ERR_INTERNAL;
}

template <typename F>
fst_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const flowstitch::Error& e) {
    return fail(map_code(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(FST_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(FST_ERR_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string read_file(const char* path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw flowstitch::Error(flowstitch::ErrorCode::kIo, std::string("cannot read ") + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

flowstitch::Rational rational_or(const char* text, const flowstitch::Rational& fallback) {
  return text == nullptr ? fallback : flowstitch::parse_rational(text);
}

}  // namespace

extern "C" {

const char* fst_last_error(void) { return g_last_error.c_str(); }

const char* fst_status_name(fst_status status) {
  switch (status) {
    case FST_OK: return "ok";
    case FST_ERR_PARSE: return "parse error";
    case FST_ERR_INVALID_ARGUMENT: return "invalid argument";
    case FST_ERR_TOO_LARGE: return "too large";
    case FST_ERR_STRUCTURAL: return "structural error";
    case FST_ERR_INTERNAL: return "internal error";
    case FST_ERR_IO: return "i/o error";
    case FST_ERR_VALIDATION: return "validation failed";
    case FST_ERR_NULL: return "null argument";
  }
  return "unknown status";
}

void fst_string_free(char* s) { std::free(s); }

fst_status fst_instance_parse(const char* text, fst_instance** out) {
  if (text == nullptr || out == nullptr) return fail(FST_ERR_NULL, "null argument");
  return guarded([&] {
    *out = new fst_instance{flowstitch::parse_instance(text)};
    return FST_OK;
  });
}

fst_status fst_instance_load(const char* path, fst_instance** out) {
  if (path == nullptr || out == nullptr) return fail(FST_ERR_NULL, "null argument");
  return guarded([&] {
    *out = new fst_instance{flowstitch::parse_instance(read_file(path))};
    return FST_OK;
  });
}

fst_status fst_instance_to_text(const fst_instance* inst, char** out) {
  if (inst == nullptr || out == nullptr) return fail(FST_ERR_NULL, "null argument");
  return guarded([&] {
    *out = dup_string(flowstitch::format_instance(inst->inst));
    return FST_OK;
  });
}

size_t fst_instance_size(const fst_instance* inst) { return inst == nullptr ? 0 : inst->inst.size(); }

void fst_instance_free(fst_instance* inst) { delete inst; }

void fst_gen_options_init(fst_gen_options* opts) {
  if (opts == nullptr) return;
  flowstitch::GenSpec d;
  opts->n = d.n;
  opts->classes = d.classes;
  opts->max_weight = d.max_weight;
  opts->density = nullptr;
  opts->seed = d.seed;
}

fst_status fst_instance_generate(const fst_gen_options* opts, fst_instance** out) {
  if (opts == nullptr || out == nullptr) return fail(FST_ERR_NULL, "null argument");
  return guarded([&] {
    flowstitch::GenSpec spec;
    spec.n = opts->n;
    spec.classes = opts->classes;
    spec.max_weight = opts->max_weight;
    spec.density = rational_or(opts->density, spec.density);
    spec.seed = opts->seed;
    *out = new fst_instance{flowstitch::gen_random(spec)};
    return FST_OK;
  });
}

void fst_solve_options_init(fst_solve_options* opts) {
  if (opts == nullptr) return;
  opts->alg = "hdf";
  opts->stitch = "standard";
  opts->eps = nullptr;
  opts->gamma = flowstitch::StitchConfig{}.gamma;
  opts->window = 0;
  opts->prune_eps = nullptr;
  opts->exact_limit = flowstitch::kDefaultExactLimit;
  opts->parallel = 1;
  opts->collect_r2c = 0;
}

fst_status fst_solve(const fst_instance* inst, const fst_solve_options* opts, fst_schedule** out,
                     fst_report** report) {
  if (inst == nullptr || opts == nullptr || out == nullptr) return fail(FST_ERR_NULL, "null argument");
  return guarded([&] {
    using namespace flowstitch;
    std::string stitch = opts->stitch == nullptr ? "standard" : opts->stitch;
    if (opts->window < 0) throw Error(ErrorCode::kInvalidArgument, "window must be nonnegative");
    auto alg = make_subsolver(opts->alg == nullptr ? "hdf" : opts->alg, opts->exact_limit);

    StitchConfig cfg;
    cfg.eps = rational_or(opts->eps, cfg.eps);
    cfg.gamma = opts->gamma;
    cfg.window = opts->window;
    cfg.parallel = opts->parallel != 0;

    const Instance* target = &inst->inst;
    PruneResult pruned;
    if (opts->prune_eps != nullptr) {
      pruned = prune_light_jobs(inst->inst, parse_rational(opts->prune_eps));
      target = &pruned.core;
    }

    std::string dump;
    StepObserver observe;
    if (opts->collect_r2c != 0) {
      observe = [&dump](const StepTrace& tr) {
        dump += "step " + std::to_string(tr.k) + "\n" + format_r2c(tr.r2c, &tr.cover);
      };
    }

    StitchResult res;
    if (stitch == "none") {
      res.schedule = alg->solve(*target);
      res.report.alg = alg->name();
      res.report.n = target->size();
    } else if (stitch == "standard" || stitch == "windowed") {
      cfg.mode = stitch == "standard" ? StitchMode::kStandard : StitchMode::kWindowed;
      res = run_stitch(*target, *alg, cfg, observe);
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown stitch mode '" + stitch + "'");
    }
    if (opts->prune_eps != nullptr) res.schedule = reinsert_pruned(res.schedule, pruned.pruned);

    if (auto v = validate_schedule(res.schedule, inst->inst.jobs()); !v.ok) {
      return fail(FST_ERR_VALIDATION, "solver produced an invalid schedule: " + v.message);
    }
    res.report.wf_total = weighted_flow(res.schedule, inst->inst.jobs()).total;
    *out = new fst_schedule{std::move(res.schedule)};
    if (report != nullptr) *report = new fst_report{std::move(res.report), std::move(dump)};
    return FST_OK;
  });
}

fst_status fst_schedule_parse(const char* text, fst_schedule** out) {
  if (text == nullptr || out == nullptr) return fail(FST_ERR_NULL, "null argument");
  return guarded([&] {
    *out = new fst_schedule{flowstitch::parse_schedule(text)};
    return FST_OK;
  });
}

fst_status fst_schedule_load(const char* path, fst_schedule** out) {
  if (path == nullptr || out == nullptr) return fail(FST_ERR_NULL, "null argument");
  return guarded([&] {
    *out = new fst_schedule{flowstitch::parse_schedule(read_file(path))};
    return FST_OK;
  });
}

fst_status fst_schedule_to_text(const fst_schedule* sched, char** out) {
  if (sched == nullptr || out == nullptr) return fail(FST_ERR_NULL, "null argument");
  return guarded([&] {
    *out = dup_string(flowstitch::format_schedule(sched->sched));
    return FST_OK;
  });
}

void fst_schedule_free(fst_schedule* sched) { delete sched; }

fst_status fst_schedule_cost(const fst_schedule* sched, const fst_instance* inst, char** out) {
  if (sched == nullptr || inst == nullptr || out == nullptr) return fail(FST_ERR_NULL, "null argument");
  return guarded([&] {
    if (auto v = flowstitch::validate_schedule(sched->sched, inst->inst.jobs()); !v.ok) {
      return fail(FST_ERR_VALIDATION, v.message);
    }
    *out = dup_string(flowstitch::to_string(flowstitch::weighted_flow(sched->sched, inst->inst.jobs()).total));
    return FST_OK;
  });
}

fst_status fst_verify(const fst_instance* inst, const fst_schedule* sched, char** message) {
  if (inst == nullptr || sched == nullptr) return fail(FST_ERR_NULL, "null argument");
  return guarded([&] {
    using namespace flowstitch;
    ScheduleVerdict v = validate_schedule(sched->sched, inst->inst.jobs());
    std::string text = v.ok ? "valid, weighted flow-time " + to_string(weighted_flow(sched->sched, inst->inst.jobs()).total)
                            : v.message;
    if (message != nullptr) *message = dup_string(text);
    return v.ok ? FST_OK : fail(FST_ERR_VALIDATION, text);
  });
}

fst_status fst_verify_r2c(const char* text, char** message) {
  if (text == nullptr) return fail(FST_ERR_NULL, "null argument");
  return guarded([&] {
    using namespace flowstitch;
    std::vector<ParsedR2C> blocks = parse_r2c(text);
    std::ostringstream report;
    bool ok = true;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const ParsedR2C& blk = blocks[b];
      report << "block " << b + 1 << ": " << blk.instance.points.size() << " points, " << blk.instance.rects.size()
             << " rects";
      if (auto bad = uncoverable_points(blk.instance); !bad.empty()) {
        ok = false;
        report << ", " << bad.size() << " uncoverable";
      }
      if (blk.has_selection) {
        CoverVerdict v = verify_cover(blk.instance, blk.selection);
        ok = ok && v.ok;
        report << ", cover " << (v.ok ? "ok" : v.message);
      }
      if (!blk.instance.points.empty()) {
        FractionalSolution x = build_fractional(blk.instance);
        FractionalVerdict fv = verify_fractional_cover(blk.instance, x);
        ok = ok && fv.ok;
        report << ", fractional " << (fv.ok ? "ok" : std::to_string(fv.shortfalls.size()) + " shortfalls");
      }
      report << '\n';
    }
    if (message != nullptr) *message = dup_string(report.str());
    return ok ? FST_OK : fail(FST_ERR_VALIDATION, report.str());
  });
}

fst_status fst_report_csv(const fst_report* report, char** out) {
  if (report == nullptr || out == nullptr) return fail(FST_ERR_NULL, "null argument");
  return guarded([&] {
    *out = dup_string(flowstitch::report_csv(report->report));
    return FST_OK;
  });
}

fst_status fst_report_summary(const fst_report* report, char** out) {
  if (report == nullptr || out == nullptr) return fail(FST_ERR_NULL, "null argument");
  return guarded([&] {
    *out = dup_string(flowstitch::report_summary(report->report));
    return FST_OK;
  });
}

fst_status fst_report_r2c(const fst_report* report, char** out) {
  if (report == nullptr || out == nullptr) return fail(FST_ERR_NULL, "null argument");
  return guarded([&] {
    *out = dup_string(report->r2c);
    return FST_OK;
  });
}

void fst_report_free(fst_report* report) { delete report; }

void fst_bench_options_init(fst_bench_options* opts) {
  if (opts == nullptr) return;
  opts->algs = "hdf,standard:hdf";
  opts->eps = nullptr;
  opts->gamma = flowstitch::StitchConfig{}.gamma;
  opts->window = 0;
  opts->exact_limit = flowstitch::kDefaultExactLimit;
  opts->trivial_bound = 0;
  opts->parallel = 1;
}

fst_status fst_bench(const char* corpus_dir, const fst_bench_options* opts, char** csv, char** summary,
                     size_t* failures) {
  if (corpus_dir == nullptr || opts == nullptr || csv == nullptr) return fail(FST_ERR_NULL, "null argument");
  return guarded([&] {
    using namespace flowstitch;
    std::vector<std::string> tokens;
    std::stringstream list(opts->algs == nullptr ? "" : opts->algs);
    for (std::string tok; std::getline(list, tok, ',');) {
      if (!tok.empty()) tokens.push_back(tok);
    }
    if (tokens.empty()) throw Error(ErrorCode::kInvalidArgument, "no solvers given");
    BenchOptions bo;
    bo.solve.stitch.eps = rational_or(opts->eps, bo.solve.stitch.eps);
    bo.solve.stitch.gamma = opts->gamma;
    bo.solve.stitch.window = opts->window;
    bo.solve.exact_limit = opts->exact_limit;
    bo.bound = opts->trivial_bound != 0 ? BoundKind::kTrivial : BoundKind::kAuto;
    bo.parallel = opts->parallel != 0;
    std::vector<BenchRow> rows = run_bench(load_corpus(corpus_dir), tokens, bo);
    std::size_t failed = 0;
    for (const BenchRow& r : rows) failed += r.ok ? 0 : 1;
    *csv = dup_string(bench_csv(rows));
    if (summary != nullptr) *summary = dup_string(bench_summary(rows));
    if (failures != nullptr) *failures = failed;
    return FST_OK;
  });
}

}  // extern "C"
