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

#include <filesystem>
#include <fstream>

#include "bench.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "subsolver.hpp"

using namespace flowstitch;
using oracle::big;
using oracle::job;

namespace {

GenSpec spec(std::size_t n, int classes, std::uint64_t seed) {
  GenSpec g;
  g.n = n;
  g.classes = classes;
  g.seed = seed;
  return g;
}

}  // namespace

TEST_CASE("gen_random is deterministic per seed") {
  Instance a = gen_random(spec(20, 4, 42));
  Instance b = gen_random(spec(20, 4, 42));
  CHECK(format_instance(a) == format_instance(b));
  CHECK(format_instance(a) != format_instance(gen_random(spec(20, 4, 43))));
}

TEST_CASE("gen_random populates every requested class") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::size_t n = 3 + seed % 20;
    int classes = 1 + static_cast<int>(seed % std::min<std::size_t>(n, 6));
    Instance inst = gen_random(spec(n, classes, seed));
    std::set<int> seen;
    for (const Job& j : inst.jobs()) seen.insert(oracle::scan_class(big(j.size), static_cast<unsigned>(n)));
    CHECK(seen.size() == static_cast<std::size_t>(classes));
    CHECK(*seen.rbegin() == classes);
    CHECK(partition_classes(inst).max_class() == classes);
  }
  Instance twelve = gen_random(spec(12, 3, 1));
  ClassPartition p = partition_classes(twelve);
  for (int k = 1; k <= 3; ++k) CHECK_FALSE(p.members(k).empty());
}

TEST_CASE("density zero puts every release at 0") {
  GenSpec g = spec(15, 3, 9);
  g.density = 0;
  Instance flat = gen_random(g);
  for (const Job& j : flat.jobs()) CHECK(j.release == 0);
  g.density = 1;
  Instance wide = gen_random(g);
  for (const Job& j : wide.jobs()) CHECK(j.release <= wide.total_size());
}

TEST_CASE("gen spec validation") {
  CHECK_THROWS_AS(gen_random(spec(0, 1, 1)), Error);
  CHECK_THROWS_AS(gen_random(spec(3, 4, 1)), Error);
  CHECK_THROWS_AS(gen_random(spec(3, 0, 1)), Error);
  GenSpec w = spec(3, 1, 1);
  w.max_weight = 0;
  CHECK_THROWS_AS(gen_random(w), Error);
  CHECK(gen_random(spec(1, 1, 1)).size() == 1);
}

TEST_CASE("uniform_below stays in range") {
  std::mt19937_64 rng(1);
  Int bound = pow_int(2, 130) + 7;
  bool high = false;
  for (int i = 0; i < 2000; ++i) {
    Int v = uniform_below(bound, rng);
    CHECK(v >= 0);
    CHECK(v < bound);
    high = high || v > pow_int(2, 129);
  }
  CHECK(high);
  for (int i = 0; i < 100; ++i) CHECK(uniform_below(1, rng) == 0);
}

TEST_CASE("lower_bound_trivial") {
  CHECK(lower_bound_trivial(Instance({job(0, 4, 3, 5)})) == 15);
  Instance ab({job(0, 0, 2, 1), job(1, 1, 1, 3)});
  CHECK(lower_bound_trivial(ab) == 5);
  CHECK(weighted_flow(exact_oracle(ab), ab.jobs()).total == 6);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    Instance inst(oracle::random_jobs(rng, 1 + static_cast<int>(rng() % 7), 20, 9, 9));
    CHECK(lower_bound_trivial(inst) <= weighted_flow(exact_oracle(inst), inst.jobs()).total);
  }
}

TEST_CASE("solver tokens") {
  CHECK_FALSE(parse_solver_token("hdf").mode.has_value());
  CHECK(parse_solver_token("standard:exact").mode == StitchMode::kStandard);
  CHECK(parse_solver_token("windowed:hdf").alg == "hdf");
  CHECK_THROWS_AS(parse_solver_token("fancy:hdf"), Error);
  CHECK_THROWS_AS(parse_solver_token("standard:srpt"), Error);
}

TEST_CASE("run_bench rows") {
  std::vector<NamedInstance> corpus;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    GenSpec g = spec(6 + seed % 3, 2, seed);
    g.density = Rational(1, 8);
    corpus.push_back({"i" + std::to_string(seed), gen_random(g)});
  }
  corpus.push_back({"big", gen_random(spec(12, 3, 5))});
  std::vector<BenchRow> rows = run_bench(corpus, {"exact", "hdf", "standard:exact"});
  REQUIRE(rows.size() == corpus.size() * 3);
  for (const BenchRow& r : rows) {
    if (r.instance == "big") {
      CHECK(r.bound == "trivial");
      if (r.solver == "exact") CHECK_FALSE(r.ok);  // above the oracle limit: recorded, not fatal
      continue;
    }
    REQUIRE(r.ok);
    CHECK(r.bound == "opt");
    CHECK(r.ratio >= 1);
    if (r.solver == "exact") CHECK(r.ratio == 1);
  }
  std::string csv = bench_csv(rows);
  CHECK(csv.rfind("instance,solver,status,wF,lower_bound,bound,ratio,ratio_decimal,wall_ms,message\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(rows.size()) + 1);
  std::string summary = bench_summary(rows);
  CHECK(summary.find("exact: rows 13, failures 1") != std::string::npos);
  CHECK(summary.find("standard:exact") != std::string::npos);

  BenchOptions serial;
  serial.parallel = false;
  serial.bound = BoundKind::kTrivial;
  std::vector<BenchRow> again = run_bench(corpus, {"hdf"}, serial);
  for (const BenchRow& r : again) {
    CHECK(r.bound == "trivial");
    CHECK(r.ratio >= 1);
  }
}

TEST_CASE("load_corpus") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "flowstitch_corpus_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "b.txt") << "0 1 1\n";
  std::ofstream(dir / "a.txt") << "0 2 1\n1 1 3\n";
  std::ofstream(dir / "notes.md") << "ignored\n";
  std::vector<NamedInstance> c = load_corpus(dir.string());
  REQUIRE(c.size() == 2);
  CHECK(c[0].id == "a");
  CHECK(c[0].inst.size() == 2);
  std::ofstream(dir / "c.txt") << "0 0 1\n";
  CHECK_THROWS_AS(load_corpus(dir.string()), Error);
  CHECK_THROWS_AS(load_corpus((dir / "missing").string()), Error);
  fs::remove_all(dir);
}
