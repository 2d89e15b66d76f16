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

// Command-line front end. Talks to the library only through the C API.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "flowstitch/flowstitch.h"

namespace {

struct Failure {
  int code;
  std::string message;
};

void check(fst_status s, const std::string& context) {
  if (s != FST_OK) throw Failure{static_cast<int>(s), context + ": " + fst_last_error()};
}

struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { fst_string_free(p); }
  std::string str() const { return p == nullptr ? std::string() : std::string(p); }
};

using InstancePtr = std::unique_ptr<fst_instance, decltype(&fst_instance_free)>;
using SchedulePtr = std::unique_ptr<fst_schedule, decltype(&fst_schedule_free)>;
using ReportPtr = std::unique_ptr<fst_report, decltype(&fst_report_free)>;

InstancePtr load_instance(const std::string& path) {
  fst_instance* raw = nullptr;
  check(fst_instance_load(path.c_str(), &raw), path);
  return {raw, fst_instance_free};
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Failure{FST_ERR_IO, "cannot write " + path};
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{FST_ERR_IO, "cannot read " + path};
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct SolveArgs {
  std::string alg = "hdf";
  std::string stitch = "standard";
  std::string eps;
  unsigned long gamma = 4;
  int window = 0;
  std::string prune;
  std::size_t exact_limit = 8;
  bool serial = false;
  std::string in;
  std::string out;
  std::string report;
  std::string summary;
  std::string dump_r2c;
};

void run_solve(const SolveArgs& a) {
  InstancePtr inst = load_instance(a.in);
  fst_solve_options opts;
  fst_solve_options_init(&opts);
  opts.alg = a.alg.c_str();
  opts.stitch = a.stitch.c_str();
  opts.eps = a.eps.empty() ? nullptr : a.eps.c_str();
  opts.gamma = a.gamma;
  opts.window = a.window;
  opts.prune_eps = a.prune.empty() ? nullptr : a.prune.c_str();
  opts.exact_limit = a.exact_limit;
  opts.parallel = a.serial ? 0 : 1;
  opts.collect_r2c = a.dump_r2c.empty() ? 0 : 1;

  fst_schedule* sraw = nullptr;
  fst_report* rraw = nullptr;
  check(fst_solve(inst.get(), &opts, &sraw, &rraw), "solve");
  SchedulePtr sched(sraw, fst_schedule_free);
  ReportPtr report(rraw, fst_report_free);

  OwnedString text;
  check(fst_schedule_to_text(sched.get(), &text.p), "format");
  write_text(a.out, text.str());
  if (!a.report.empty()) {
    OwnedString csv;
    check(fst_report_csv(report.get(), &csv.p), "report");
    write_text(a.report, csv.str());
  }
  if (!a.dump_r2c.empty()) {
    OwnedString dump;
    check(fst_report_r2c(report.get(), &dump.p), "r2c dump");
    write_text(a.dump_r2c, dump.str());
  }
  OwnedString summary;
  check(fst_report_summary(report.get(), &summary.p), "summary");
  if (!a.summary.empty()) {
    write_text(a.summary, summary.str());
  } else if (!a.out.empty() && a.out != "-") {
    std::cerr << summary.str();
  }
}

struct GenArgs {
  std::size_t n = 16;
  int classes = 3;
  unsigned long wmax = 10;
  std::string density;
  std::uint64_t seed = 1;
  std::string out;
};

void run_gen(const GenArgs& a) {
  fst_gen_options opts;
  fst_gen_options_init(&opts);
  opts.n = a.n;
  opts.classes = a.classes;
  opts.max_weight = a.wmax;
  opts.density = a.density.empty() ? nullptr : a.density.c_str();
  opts.seed = a.seed;
  fst_instance* raw = nullptr;
  check(fst_instance_generate(&opts, &raw), "gen");
  InstancePtr inst(raw, fst_instance_free);
  OwnedString text;
  check(fst_instance_to_text(inst.get(), &text.p), "format");
  write_text(a.out, text.str());
}

struct VerifyArgs {
  std::string in;
  std::string schedule;
  std::string r2c;
};

void run_verify(const VerifyArgs& a) {
  if (a.schedule.empty() && a.r2c.empty()) throw Failure{FST_ERR_INVALID_ARGUMENT, "nothing to verify"};
  if (!a.schedule.empty()) {
    if (a.in.empty()) throw Failure{FST_ERR_INVALID_ARGUMENT, "--schedule needs --in"};
    InstancePtr inst = load_instance(a.in);
    fst_schedule* raw = nullptr;
    check(fst_schedule_load(a.schedule.c_str(), &raw), a.schedule);
    SchedulePtr sched(raw, fst_schedule_free);
    OwnedString msg;
    fst_status s = fst_verify(inst.get(), sched.get(), &msg.p);
    if (s != FST_OK) throw Failure{static_cast<int>(s), "schedule invalid: " + msg.str()};
    std::cout << "schedule: " << msg.str() << '\n';
  }
  if (!a.r2c.empty()) {
    std::string text = read_text(a.r2c);
    OwnedString msg;
    fst_status s = fst_verify_r2c(text.c_str(), &msg.p);
    std::cout << msg.str();
    if (s != FST_OK) throw Failure{static_cast<int>(s), std::string("cover check failed: ") + fst_last_error()};
    std::cout << "cover instances: ok\n";
  }
}

struct BenchArgs {
  std::string corpus;
  std::string algs = "hdf,standard:hdf";
  std::string eps;
  unsigned long gamma = 4;
  int window = 0;
  std::size_t exact_limit = 8;
  bool trivial = false;
  bool serial = false;
  std::string csv;
};

void run_bench(const BenchArgs& a) {
  fst_bench_options opts;
  fst_bench_options_init(&opts);
  opts.algs = a.algs.c_str();
  opts.eps = a.eps.empty() ? nullptr : a.eps.c_str();
  opts.gamma = a.gamma;
  opts.window = a.window;
  opts.exact_limit = a.exact_limit;
  opts.trivial_bound = a.trivial ? 1 : 0;
  opts.parallel = a.serial ? 0 : 1;
  OwnedString csv;
  OwnedString summary;
  std::size_t failures = 0;
  check(fst_bench(a.corpus.c_str(), &opts, &csv.p, &summary.p, &failures), "bench");
  write_text(a.csv, csv.str());
  std::cerr << summary.str();
  if (failures > 0) throw Failure{FST_ERR_VALIDATION, std::to_string(failures) + " bench row(s) failed"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preemptive single-machine weighted flow-time solver"};
  app.require_subcommand(1);

  SolveArgs solve;
  CLI::App* s = app.add_subcommand("solve", "Schedule an instance");
  s->add_option("--alg", solve.alg, "Sub-solver: exact, hdf, unitslot")->capture_default_str();
  s->add_option("--stitch", solve.stitch, "standard, windowed or none")
      ->check(CLI::IsMember({"standard", "windowed", "none"}))
      ->capture_default_str();
  s->add_option("--eps", solve.eps, "Windowed accuracy, rational in (0, 1/2); default 1/4");
  s->add_option("--gamma", solve.gamma, "Windowed constant")->capture_default_str();
  s->add_option("--window", solve.window, "Windowed width b; 0 derives it from eps and gamma")
      ->check(CLI::NonNegativeNumber);
  s->add_option("--prune", solve.prune, "Drop light jobs below this threshold and reinsert them last");
  s->add_option("--exact-limit", solve.exact_limit, "Job limit of the exact solver")->capture_default_str();
  s->add_flag("--serial", solve.serial, "Solve class windows one at a time");
  s->add_option("--in", solve.in, "Instance file")->required();
  s->add_option("--out", solve.out, "Schedule file (default stdout)");
  s->add_option("--report", solve.report, "Per-step CSV");
  s->add_option("--summary", solve.summary, "Run summary file");
  s->add_option("--dump-r2c", solve.dump_r2c, "Cover instances of every step");

  GenArgs gen;
  CLI::App* g = app.add_subcommand("gen", "Generate a random instance");
  g->add_option("--n", gen.n, "Jobs")->required();
  g->add_option("--classes", gen.classes, "Size classes to populate")->required();
  g->add_option("--seed", gen.seed, "Seed")->required();
  g->add_option("--wmax", gen.wmax, "Largest weight")->capture_default_str();
  g->add_option("--density", gen.density, "Release span as a fraction of total size; default 1/2");
  g->add_option("--out", gen.out, "Instance file (default stdout)");

  VerifyArgs verify;
  CLI::App* v = app.add_subcommand("verify", "Check a schedule or a cover dump");
  v->add_option("--in", verify.in, "Instance file");
  v->add_option("--schedule", verify.schedule, "Schedule file");
  v->add_option("--r2c", verify.r2c, "Cover dump written by solve --dump-r2c");

  BenchArgs bench;
  CLI::App* b = app.add_subcommand("bench", "Run solvers over a corpus");
  b->add_option("--corpus", bench.corpus, "Directory of .txt instances")->required();
  b->add_option("--algs", bench.algs, "Comma-separated: ALG, standard:ALG, windowed:ALG")->capture_default_str();
  b->add_option("--eps", bench.eps, "Windowed accuracy");
  b->add_option("--gamma", bench.gamma, "Windowed constant")->capture_default_str();
  b->add_option("--window", bench.window, "Windowed width b")->check(CLI::NonNegativeNumber);
  b->add_option("--exact-limit", bench.exact_limit, "Job limit of the exact solver and the optimum bound")
      ->capture_default_str();
  b->add_flag("--trivial-bound", bench.trivial, "Always compare against sum w p");
  b->add_flag("--serial", bench.serial, "One instance at a time");
  b->add_option("--csv", bench.csv, "CSV output (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*s) run_solve(solve);
    if (*g) run_gen(gen);
    if (*v) run_verify(verify);
    if (*b) run_bench(bench);
  } catch (const Failure& f) {
    std::cerr << "flowstitch: " << f.message << '\n';
    return f.code == 0 ? 1 : f.code;
  }
  return 0;
}
