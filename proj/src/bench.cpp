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

#include "bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "subsolver.hpp"

namespace flowstitch {

void check_gen_spec(const GenSpec& spec) {
  if (spec.n == 0) throw Error(ErrorCode::kInvalidArgument, "n must be positive");
  if (spec.classes < 1 || static_cast<std::size_t>(spec.classes) > spec.n) {
    throw Error(ErrorCode::kInvalidArgument, "classes must lie in [1, n]");
  }
  if (spec.n == 1 && spec.classes != 1) throw Error(ErrorCode::kInvalidArgument, "one job has one class");
  if (spec.max_weight < 1) throw Error(ErrorCode::kInvalidArgument, "max weight must be at least 1");
  if (spec.density < 0) throw Error(ErrorCode::kInvalidArgument, "density must be nonnegative");
}

Int uniform_below(const Int& bound, std::mt19937_64& rng) {
  if (bound <= 0) throw Error(ErrorCode::kInvalidArgument, "empty range");
  const std::size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
  const std::size_t words = (bits + 63) / 64;
  const std::size_t spare = words * 64 - bits;
  // Rejection on the smallest power of two above bound.
  for (;;) {
    Int v = 0;
    for (std::size_t i = 0; i < words; ++i) {
      std::uint64_t w = rng();
      if (i == 0 && spare > 0) w >>= spare;
      v <<= 64;
      v += Int(static_cast<unsigned long>(w));
    }
    if (v < bound) return v;
  }
}

namespace {

Int uniform_between(const Int& lo, const Int& hi, std::mt19937_64& rng) {
  return lo + uniform_below(hi - lo + 1, rng);
}

Int class_size(int k, std::size_t n, std::mt19937_64& rng) {
  if (n == 1) return uniform_between(1, 8, rng);
  const Int nn = static_cast<unsigned long>(n);
  const Int lo = pow_int(nn, 3UL * static_cast<unsigned long>(k - 1));
  const Int hi = pow_int(nn, 3UL * static_cast<unsigned long>(k)) - 1;
  const unsigned long b_lo = floor_log2(lo) + 1;
  const unsigned long b_hi = floor_log2(hi) + 1;
  const unsigned long b = b_lo + uniform_below(Int(b_hi - b_lo + 1), rng).get_ui();
  Int from = pow_int(2, b - 1);
  Int to = pow_int(2, b) - 1;
  if (from < lo) from = lo;
  if (to > hi) to = hi;
  return uniform_between(from, to, rng);
}

}  // namespace

Instance gen_random(const GenSpec& spec) {
  check_gen_spec(spec);
  std::mt19937_64 rng(spec.seed);
  std::vector<Job> jobs(spec.n);
  Int total = 0;
  for (std::size_t i = 0; i < spec.n; ++i) {
    int k = i < static_cast<std::size_t>(spec.classes)
                ? static_cast<int>(i) + 1
                : 1 + static_cast<int>(uniform_below(Int(spec.classes), rng).get_si());
    jobs[i].size = class_size(k, spec.n, rng);
    jobs[i].weight = uniform_between(1, Int(spec.max_weight), rng);
    total += jobs[i].size;
  }
  Rational span_q = spec.density * Rational(total);
  Int span = span_q.get_num() / span_q.get_den();
  for (Job& j : jobs) j.release = uniform_between(0, span, rng);
  std::stable_sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) { return a.release < b.release; });
  for (std::size_t i = 0; i < jobs.size(); ++i) jobs[i].id = static_cast<JobId>(i);
  return Instance(std::move(jobs));
}

Int lower_bound_trivial(const Instance& inst) {
  Int lb = 0;
  for (const Job& j : inst.jobs()) lb += j.weight * j.size;
  return lb;
}

SolverSpec parse_solver_token(const std::string& token) {
  SolverSpec spec;
  spec.token = token;
  auto colon = token.find(':');
  if (colon == std::string::npos) {
    spec.alg = token;
  } else {
    std::string mode = token.substr(0, colon);
    spec.alg = token.substr(colon + 1);
    if (mode == "standard") {
      spec.mode = StitchMode::kStandard;
    } else if (mode == "windowed") {
      spec.mode = StitchMode::kWindowed;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown stitch mode '" + mode + "' in '" + token + "'");
    }
  }
  if (spec.alg != "exact" && spec.alg != "hdf" && spec.alg != "unitslot") {
    throw Error(ErrorCode::kInvalidArgument, "unknown solver '" + spec.alg + "' in '" + token + "'");
  }
  return spec;
}

StitchResult solve_with(const SolverSpec& spec, const Instance& inst, const SolveOptions& opts) {
  auto alg = make_subsolver(spec.alg, opts.exact_limit);
  StitchResult res;
  if (spec.mode) {
    StitchConfig cfg = opts.stitch;
    cfg.mode = *spec.mode;
    res = run_stitch(inst, *alg, cfg);
  } else {
    res.schedule = alg->solve(inst);
    res.report.alg = alg->name();
    res.report.n = inst.size();
    res.report.wf_total = weighted_flow(res.schedule, inst.jobs()).total;
  }
  if (auto v = validate_schedule(res.schedule, inst.jobs()); !v.ok) {
    throw Error(ErrorCode::kInternal, spec.token + " produced an invalid schedule: " + v.message);
  }
  return res;
}

namespace {

std::vector<BenchRow> bench_instance(const NamedInstance& ni, const std::vector<SolverSpec>& specs,
                                     const BenchOptions& opts) {
  Int lb = lower_bound_trivial(ni.inst);
  std::string bound = "trivial";
  if (opts.bound == BoundKind::kAuto && ni.inst.size() <= opts.solve.exact_limit) {
    lb = weighted_flow(exact_oracle(ni.inst, opts.solve.exact_limit), ni.inst.jobs()).total;
    bound = "opt";
  }
  std::vector<BenchRow> rows;
  for (const SolverSpec& spec : specs) {
    BenchRow row;
    row.instance = ni.id;
    row.solver = spec.token;
    row.lower_bound = lb;
    row.bound = bound;
    auto start = std::chrono::steady_clock::now();
    try {
      StitchResult res = solve_with(spec, ni.inst, opts.solve);
      row.wf = res.report.wf_total;
      row.ok = true;
      row.ratio = lb > 0 ? Rational(row.wf, lb) : Rational(1);
      row.ratio.canonicalize();
      if (row.ratio < 1) {
        row.ok = false;
        row.message = "cost " + to_string(row.wf) + " is below the " + bound + " bound " + to_string(lb);
      }
    } catch (const std::exception& e) {
      row.message = e.what();
    }
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

std::vector<BenchRow> run_bench(const std::vector<NamedInstance>& instances,
                                const std::vector<std::string>& solvers, const BenchOptions& opts) {
  std::vector<SolverSpec> specs;
  for (const std::string& s : solvers) specs.push_back(parse_solver_token(s));
  BenchOptions inner = opts;
  if (opts.parallel) inner.solve.stitch.parallel = false;  // rows already run concurrently

  std::vector<std::vector<BenchRow>> per(instances.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < instances.size(); i = next++) {
      try {
        per[i] = bench_instance(instances[i], specs, inner);
      } catch (const std::exception& e) {
        // The bound itself failed; keep one row per solver so nothing is silently dropped.
        for (const SolverSpec& spec : specs) {
          BenchRow row;
          row.instance = instances[i].id;
          row.solver = spec.token;
          row.message = std::string("lower bound failed: ") + e.what();
          per[i].push_back(std::move(row));
        }
      }
    }
  };
  std::size_t threads = opts.parallel ? std::max(1U, std::thread::hardware_concurrency()) : 1;
  threads = std::min(threads, std::max<std::size_t>(1, instances.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  std::vector<BenchRow> rows;
  for (auto& r : per) {
    for (auto& row : r) rows.push_back(std::move(row));
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "instance,solver,status,wF,lower_bound,bound,ratio,ratio_decimal,wall_ms,message\n";
  for (const BenchRow& r : rows) {
    out << csv_field(r.instance) << ',' << csv_field(r.solver) << ',' << (r.ok ? "ok" : "error") << ',';
    if (r.ok) {
      out << r.wf << ',' << r.lower_bound << ',' << r.bound << ',' << to_string(r.ratio) << ','
          << to_decimal(r.ratio, 4);
    } else {
      out << ",,,,";
    }
    out << ',' << static_cast<long long>(r.wall_ms + 0.5) << ',' << csv_field(r.message) << '\n';
  }
  return out.str();
}

std::string bench_summary(const std::vector<BenchRow>& rows) {
  std::map<std::string, std::vector<const BenchRow*>> by;
  std::vector<std::string> order;
  for (const BenchRow& r : rows) {
    if (!by.count(r.solver)) order.push_back(r.solver);
    by[r.solver].push_back(&r);
  }
  std::ostringstream out;
  for (const std::string& s : order) {
    std::vector<Rational> ratios;
    std::size_t failures = 0;
    for (const BenchRow* r : by[s]) {
      if (r->ok) {
        ratios.push_back(r->ratio);
      } else {
        ++failures;
      }
    }
    out << s << ": rows " << by[s].size() << ", failures " << failures;
    if (!ratios.empty()) {
      std::sort(ratios.begin(), ratios.end());
      out << ", ratio min " << to_decimal(ratios.front(), 4) << " median "
          << to_decimal(ratios[ratios.size() / 2], 4) << " max " << to_decimal(ratios.back(), 4);
    }
    out << '\n';
  }
  return out.str();
}

std::vector<NamedInstance> load_corpus(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::kIo, "not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<NamedInstance> out;
  for (const fs::path& p : files) {
    std::ifstream in(p);
    if (!in) throw Error(ErrorCode::kIo, "cannot read " + p.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      out.push_back({p.stem().string(), parse_instance(buf.str())});
    } catch (const Error& e) {
      throw Error(e.code(), p.filename().string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace flowstitch
