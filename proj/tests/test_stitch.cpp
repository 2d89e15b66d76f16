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

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "bench.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "stitch.hpp"

using namespace flowstitch;
using oracle::BigInt;
using oracle::big;
using oracle::job;

namespace {

// Free slots in (t1, t2] outside `busy`, summed in cpp_int.
BigInt free_big(std::span<const Interval> busy, const BigInt& t1, const BigInt& t2) {
  if (t2 <= t1) return 0;
  BigInt taken = 0;
  for (const Interval& b : busy) {
    BigInt lo = std::max(t1, big(b.start));
    BigInt hi = std::min(t2, big(b.end));
    if (hi > lo) taken += hi - lo;
  }
  return (t2 - t1) - taken;
}

// Brute-force dangerous set over every (r_i, d_j] pair.
std::set<std::pair<BigInt, BigInt>> dangerous_brute(std::span<const Job> jobs, const std::map<JobId, Int>& d,
                                                    std::span<const Interval> busy) {
  std::set<std::pair<BigInt, BigInt>> out;
  for (const Job& a : jobs) {
    for (const Job& b : jobs) {
      BigInt t1 = big(a.release), t2 = big(d.at(b.id));
      if (t1 >= t2) continue;
      BigInt demand = 0;
      for (const Job& j : jobs) {
        if (big(j.release) >= t1 && big(d.at(j.id)) <= t2) demand += big(j.size);
      }
      if (demand > free_big(busy, t1, t2)) out.insert({t1, t2});
    }
  }
  return out;
}

Instance clustered(std::size_t n, int classes, std::uint64_t seed, Rational density = Rational(1, 64)) {
  GenSpec g;
  g.n = n;
  g.classes = classes;
  g.seed = seed;
  g.density = density;
  return gen_random(g);
}

}  // namespace

TEST_CASE("build_subinstances windows") {
  // n = 4: classes [1,64), [64,4096), [4096, 262144)
  Instance two({job(0, 0, 1, 1), job(1, 0, 100, 1), job(2, 0, 3, 1), job(3, 0, 70, 1)});
  ClassPartition p2 = partition_classes(two);
  auto s2 = build_subinstances(two, p2, 2, p2.max_class());
  REQUIRE(s2.size() == 1);
  CHECK(s2[0].k == 2);
  CHECK(s2[0].inst.size() == 4);

  Instance three({job(0, 0, 1, 1), job(1, 0, 100, 1), job(2, 0, 5000, 1), job(3, 0, 7000, 1)});
  ClassPartition p3 = partition_classes(three);
  auto s3 = build_subinstances(three, p3, 2, p3.max_class());
  REQUIRE(s3.size() == 2);
  std::map<JobId, int> appearances;
  for (const auto& s : s3) {
    for (const Job& j : s.inst.jobs()) {
      ++appearances[j.id];
      int c = p3.class_of(j.id);
      CHECK((c == s.k || c == s.k - 1));
    }
  }
  CHECK(appearances[1] == 2);  // the middle class sits in both windows
  CHECK(appearances[0] == 1);
  CHECK(appearances[2] == 1);

  Instance gap({job(0, 0, 1, 1), job(1, 0, 2, 1), job(2, 0, 5000, 1), job(3, 0, 9, 1)});
  ClassPartition pg = partition_classes(gap);
  REQUIRE(pg.max_class() == 3);
  CHECK(pg.members(2).empty());
  auto sg = build_subinstances(gap, pg, 2, pg.max_class());
  REQUIRE(sg.size() == 2);
  CHECK(sg[0].inst.size() == 3);  // J_1 only
  CHECK(sg[1].inst.size() == 1);  // J_3 only
  CHECK_THROWS_AS(build_subinstances(gap, pg, 1, 3), Error);
}

TEST_CASE("tentative_deadlines") {
  Schedule prev({{5, 0, 10}});
  Schedule sub({{5, 0, 7}, {6, 7, 12}});
  std::vector<JobId> carry = {5}, fresh = {6};
  auto d = tentative_deadlines(prev, sub, carry, fresh);
  CHECK(d.at(5) == 10);
  CHECK(d.at(6) == 12);
  Schedule same({{5, 0, 10}, {6, 10, 12}});
  CHECK(tentative_deadlines(prev, same, carry, fresh).at(5) == 10);
  std::vector<JobId> missing = {9};
  CHECK_THROWS_AS(tentative_deadlines(prev, sub, missing, fresh), Error);
  CHECK_THROWS_AS(tentative_deadlines(prev, sub, carry, missing), Error);
}

TEST_CASE("occupied_volume") {
  Instance inst({job(0, 0, 3, 1), job(1, 0, 5, 1), job(2, 0, 100, 1), job(3, 0, 5000, 1)});
  ClassPartition p = partition_classes(inst);
  CHECK(occupied_volume(inst, p, 1) == 0);
  CHECK(occupied_volume(inst, p, 2) == 8);
  CHECK(occupied_volume(inst, p, 3) == 108);

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    Instance g = clustered(12, 3, rng());
    ClassPartition pg = partition_classes(g);
    for (int below = 1; below <= pg.max_class() + 1; ++below) {
      BigInt sum = 0;
      for (const Job& j : g.jobs()) {
        if (oracle::scan_class(big(j.size), 12) < below) sum += big(j.size);
      }
      CHECK(big(occupied_volume(g, pg, below)) == sum);
    }
  }
}

TEST_CASE("find_dangerous") {
  std::vector<Job> apart = {job(0, 0, 2, 1), job(1, 5, 2, 1)};
  std::map<JobId, Int> tent = {{0, 3}, {1, 8}};
  CHECK(find_dangerous(apart, tent, {}).empty());

  std::vector<Job> shared = {job(0, 0, 3, 1), job(1, 1, 2, 1)};
  std::map<JobId, Int> d2 = {{0, 5}, {1, 5}};
  Availability busy({{2, 4}});
  auto pts = find_dangerous(shared, d2, busy);
  // (0,5]: demand 5 > free 3. (1,5]: demand 2 = free 2, safe.
  REQUIRE(pts.size() == 1);
  CHECK(pts[0] == CoverPoint{0, 5});
}

TEST_CASE("find_dangerous agrees with a pairwise brute force") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<Job> jobs = oracle::random_jobs(rng, 1 + static_cast<int>(rng() % 6), 15, 5, 3);
    std::map<JobId, Int> d;
    for (const Job& j : jobs) d[j.id] = j.release + j.size + static_cast<unsigned long>(rng() % 6);
    std::vector<Interval> busy = oracle::random_busy(rng, 30, 4);
    Availability av(busy);
    std::set<std::pair<BigInt, BigInt>> got;
    for (const CoverPoint& p : find_dangerous(jobs, d, av)) got.insert({big(p.t1), big(p.t2)});
    CHECK(got == dangerous_brute(jobs, d, av.busy()));
  }
}

TEST_CASE("max_level and fixed_extension") {
  CHECK(max_level(16) == 28);
  CHECK(max_level(2) == 7);
  CHECK(max_level(3) == 12);  // 2^12 = 4096 >= 2187 > 2^11
  for (std::size_t n = 2; n < 300; ++n) {
    BigInt target = pow(BigInt(n), 7);
    int l = max_level(n);
    CHECK((BigInt(1) << l) >= target);
    CHECK((BigInt(1) << (l - 1)) < target);
  }
  CHECK(fixed_extension(100, 16) == 25);
  CHECK(fixed_extension(101, 16) == 26);
  CHECK(fixed_extension(100, 17) == 20);  // ceil(sqrt 17) = 5
}

TEST_CASE("build_cover_instance") {
  std::vector<Job> big_jobs = {job(0, 2, 10, 3)};
  std::map<JobId, Int> tent = {{0, 20}, {1, 30}};
  R2CInstance empty = build_cover_instance({}, big_jobs, {}, tent, 16, StitchMode::kStandard);
  CHECK(empty.points.empty());
  REQUIRE(empty.rects.size() == 29);
  CHECK(empty.rects[3].y_max == 20 + 80);
  CHECK(empty.rects[3].cost == 240);
  CHECK(empty.scale == 4);

  std::vector<Job> fixed = {job(1, 4, 100, 2)};
  R2CInstance w = build_cover_instance({{2, 25}}, big_jobs, fixed, tent, 16, StitchMode::kWindowed);
  CHECK(w.scale == 8);
  CHECK(w.rects.back().fixed);
  CHECK(w.rects.back().y_max == 55);
  CHECK(w.rects.back().cost == 50);

  CHECK_THROWS_AS(build_cover_instance({{5, 25}}, big_jobs, {}, tent, 16, StitchMode::kStandard), Error);
}

TEST_CASE("extend_deadlines") {
  std::vector<Job> jobs = {job(0, 2, 10, 3), job(1, 0, 1, 1)};
  std::map<JobId, Int> tent = {{0, 20}, {1, 4}};
  R2CInstance r2c = build_cover_instance({}, std::vector<Job>{jobs[0]}, {}, tent, 16, StitchMode::kStandard);
  std::vector<JobId> must = {0};

  DeadlineRecords only0 = extend_deadlines(r2c, CoverSolution{{0}, 30}, jobs, tent, 8, must);
  CHECK(only0.at(0).extended == 30);
  CHECK(only0.at(0).final == 38);  // d + p + Q
  CHECK(only0.at(1).final == 4);
  CHECK(only0.at(1).extended == 4);

  DeadlineRecords lv2 = extend_deadlines(r2c, CoverSolution{{0, 2}, 150}, jobs, tent, 8, must);
  CHECK(lv2.at(0).extended == 60);
  CHECK(lv2.at(0).final == 68);

  CHECK_THROWS_AS(extend_deadlines(r2c, CoverSolution{}, jobs, tent, 8, must), Error);
}

TEST_CASE("insert_jobs") {
  Schedule lower({{0, 0, 3}});
  CHECK(insert_jobs(lower, {}, {}).segments().size() == 1);
  std::vector<Job> one = {job(1, 1, 2, 1)};
  DeadlineRecords rec = {{1, {5, 5, 5}}};
  Schedule s = insert_jobs(lower, one, rec);
  CHECK(s.completion(1) == 5);
  CHECK(s.segments_of(1).front().start == 3);
  DeadlineRecords tight = {{1, {4, 4, 4}}};
  CHECK_THROWS_AS(insert_jobs(lower, one, tight), Error);
}

TEST_CASE("verify_final_safety rejects mutated deadlines with valid witnesses") {
  int steps = 0, caught_none = 0, caught_level0 = 0;
  auto alg = make_subsolver("hdf");
  auto check_witness = [](const StepTrace& tr, const DeadlineRecords& rec, const FeasibilityVerdict& v) {
    BigInt demand = 0;
    for (const Job& j : tr.window_jobs) {
      if (big(j.release) >= big(v.t1) && big(rec.at(j.id).final) <= big(v.t2)) demand += big(j.size);
    }
    CHECK(demand == big(v.demand));
    CHECK(demand > free_big(tr.avail.busy(), big(v.t1), big(v.t2)));
  };
  for (std::uint64_t seed = 1000; seed < 1060; ++seed) {
    Instance inst = clustered(16, 3, seed);
    run_standard(inst, *alg, {}, [&](const StepTrace& tr) {
      if (tr.dangerous.empty()) return;
      ++steps;
      std::map<JobId, Int> tent = tentative_deadlines(tr.prev, tr.sub, tr.carry, tr.fresh);
      // No extension at all: every dangerous interval stays dangerous.
      DeadlineRecords none;
      for (const auto& [id, d] : tent) none[id] = {d, d, d};
      FeasibilityVerdict v = verify_final_safety(tr.window_jobs, none, tr.avail);
      CHECK_FALSE(v.feasible);
      if (!v.feasible) {
        ++caught_none;
        check_witness(tr, none, v);
      }
      // Level 0 only, without the Q slack.
      CoverSolution cut;
      for (std::size_t i : tr.cover.selected) {
        if (tr.r2c.rects[i].level == 0) cut.selected.push_back(i);
      }
      DeadlineRecords rec = extend_deadlines(tr.r2c, cut, tr.window_jobs, tent, 0, tr.big);
      FeasibilityVerdict w = verify_final_safety(tr.window_jobs, rec, tr.avail);
      if (!w.feasible) {
        ++caught_level0;
        check_witness(tr, rec, w);
      }
    });
  }
  CHECK(steps > 0);
  CHECK(caught_none == steps);
  MESSAGE("steps with dangerous intervals: " << steps << ", level-0 cover without Q rejected in " << caught_level0);
}

TEST_CASE("run_standard base cases") {
  auto exact = make_subsolver("exact");
  Instance single({job(0, 0, 3, 1), job(1, 1, 2, 4), job(2, 2, 1, 2)});
  StitchResult r1 = run_standard(single, *exact);
  CHECK(r1.report.steps.empty());
  CHECK(r1.report.wf_total == weighted_flow(exact_oracle(single), single.jobs()).total);

  Instance two({job(0, 0, 3, 1), job(1, 1, 100, 4), job(2, 2, 1, 2), job(3, 0, 2, 1)});
  REQUIRE(partition_classes(two).max_class() == 2);
  StitchResult r2 = run_standard(two, *exact);
  Schedule direct = exact_oracle(two);
  CHECK(std::equal(r2.schedule.segments().begin(), r2.schedule.segments().end(), direct.segments().begin(),
                   direct.segments().end()));

  Instance lone({job(0, 5, 3, 2)});
  CHECK(run_standard(lone, *exact).report.wf_total == 6);
}

TEST_CASE("run_standard with the exact oracle on 3-class instances") {
  auto exact = make_subsolver("exact");
  int dangerous = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Instance inst = clustered(12, 3, seed, Rational(1, 16));
    ClassPartition part = partition_classes(inst);
    bool fits = true;
    for (int k = 2; k <= part.max_class(); ++k) {
      fits = fits && part.members_between(k - 1, k).size() <= kDefaultExactLimit;
    }
    if (!fits) continue;
    std::map<int, Schedule> frozen_seen;
    StitchResult res = run_standard(inst, *exact, {}, [&](const StepTrace& tr) {
      dangerous += static_cast<int>(tr.dangerous.size());
      // Dangerous set, recomputed pairwise.
      std::set<std::pair<BigInt, BigInt>> got;
      for (const CoverPoint& p : tr.dangerous) got.insert({big(p.t1), big(p.t2)});
      CHECK(got == dangerous_brute(tr.window_jobs, tentative_deadlines(tr.prev, tr.sub, tr.carry, tr.fresh),
                                   tr.avail.busy()));
      // Record invariants.
      std::set<JobId> extended;
      for (std::size_t i : tr.cover.selected) extended.insert(tr.r2c.rects[i].owner);
      for (const Job& j : tr.window_jobs) {
        const DeadlineRecord& d = tr.records.at(j.id);
        CHECK(d.tentative <= d.extended);
        CHECK(d.extended <= d.final);
        CHECK(d.tentative >= j.release + j.size);
        if (extended.count(j.id)) {
          CHECK(d.final == d.extended + tr.q);
        } else {
          CHECK(d.final == d.tentative);
        }
        CHECK(tr.result.completion(j.id) <= d.final);
      }
      for (JobId id : tr.big) CHECK(inst.job(id).size >= tr.q);
    });
    CHECK(validate_schedule(res.schedule, inst.jobs()).ok);
    oracle::BigInt sum_sub = 0, sum_ext = 0;
    for (const StepReport& s : res.report.steps) {
      sum_sub += big(s.wf_sub);
      sum_ext += big(s.ext_cost);
    }
    // S_2 joins the sum as the base case.
    ClassPartition pp = partition_classes(inst);
    Instance pi2 = inst.subset(pp.members_between(1, 2));
    sum_sub += oracle::flow_of(exact_oracle(pi2), pi2.jobs());
    CHECK(oracle::flow_of(res.schedule, inst.jobs()) <= sum_sub + sum_ext);
  }
  MESSAGE("dangerous intervals seen: " << dangerous);
  CHECK(dangerous > 0);
}

TEST_CASE("window_for") {
  CHECK(window_for(Rational(1, 4), 4, 1024) == 74);   // 16 / (1/4 - 1/32) = 73.14
  CHECK(window_for(Rational(1, 4), 4, 64) == 128);    // 16 / (1/8), exact
  CHECK(window_for(Rational(1, 4), 1, 64) == 32);
  CHECK_THROWS_AS(window_for(Rational(1, 4), 4, 16), Error);  // eps = 1/sqrt n
  CHECK_THROWS_AS(window_for(Rational(1, 2), 4, 1000), Error);
  using Float = boost::multiprecision::cpp_bin_float_100;
  for (std::size_t n : {17, 20, 30, 50, 99, 1000, 4097}) {
    for (int den : {3, 4, 5, 7}) {
      for (unsigned long gamma : {1UL, 2UL, 4UL}) {
        Float eps = Float(1) / den;
        if (eps * eps * n <= 1) continue;
        Float x = Float(4 * gamma) / (eps - 1 / sqrt(Float(n)));
        CHECK(window_for(Rational(1, den), gamma, n) == static_cast<int>(ceil(x)));
      }
    }
  }
}

TEST_CASE("run_windowed") {
  auto hdf = make_subsolver("hdf");
  StitchConfig cfg;
  cfg.mode = StitchMode::kWindowed;
  cfg.window = 4;
  Instance small = clustered(16, 3, 5);
  StitchResult base = run_windowed(small, *hdf, cfg);
  CHECK(base.report.steps.empty());
  CHECK(base.report.wf_total == weighted_flow(hdf_heuristic(small), small.jobs()).total);

  cfg.window = 0;
  CHECK_THROWS_AS(run_windowed(small, *hdf, cfg), Error);  // eps = 1/4 = 1/sqrt 16

  cfg.window = 2;
  int steps = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Instance inst = clustered(20, 5, seed);
    StitchResult res = run_windowed(inst, *hdf, cfg, [&](const StepTrace& tr) {
      ++steps;
      // Fresh jobs: deterministic extension plus Q; carry jobs: leveled only if big.
      for (JobId id : tr.fresh) {
        const Job& j = inst.job(id);
        CHECK(tr.records.at(id).extended >= tr.records.at(id).tentative + fixed_extension(j.size, inst.size()));
        CHECK(tr.records.at(id).final == tr.records.at(id).extended + tr.q);
      }
      for (JobId id : tr.big) CHECK(std::find(tr.carry.begin(), tr.carry.end(), id) != tr.carry.end());
    });
    CHECK(validate_schedule(res.schedule, inst.jobs()).ok);
    REQUIRE(res.report.candidates.size() == 2);
    Int worst = std::max(res.report.candidates[0].second, res.report.candidates[1].second);
    CHECK(res.report.wf_total <= worst);
    CHECK(res.report.wf_total == std::min(res.report.candidates[0].second, res.report.candidates[1].second));
    // Unit weights let the deterministic terms meet the n-slack form directly.
    for (const StepReport& s : res.report.steps) CHECK(s.ext_cost <= s.cover_cost + s.big_wp + s.fixed_ext_cost);
  }
  CHECK(steps > 0);
}

TEST_CASE("windowed deterministic extensions with unit weights fit ceil(sum p / ceil sqrt n) + n") {
  auto hdf = make_subsolver("hdf");
  StitchConfig cfg;
  cfg.mode = StitchMode::kWindowed;
  cfg.window = 2;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    GenSpec g;
    g.n = 20;
    g.classes = 4;
    g.max_weight = 1;
    g.seed = seed;
    g.density = Rational(1, 32);
    Instance inst = gen_random(g);
    run_windowed(inst, *hdf, cfg, [&](const StepTrace& tr) {
      BigInt lhs = 0, sum_p = 0;
      BigInt root = big(ceil_sqrt(20));
      for (JobId id : tr.fresh) {
        BigInt p = big(inst.job(id).size);
        lhs += (p + root - 1) / root;
        sum_p += p;
      }
      CHECK(lhs <= (sum_p + root - 1) / root + 20);
    });
  }
}

TEST_CASE("stitch reports") {
  auto hdf = make_subsolver("hdf");
  StitchResult res = run_standard(clustered(16, 4, 3), *hdf);
  std::string csv = report_csv(res.report);
  CHECK(csv.rfind("k,n_k,Q,dangerous,frac_cost,cover_cost,ext_cost,wF_Sk,wF_bold\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(res.report.steps.size()) + 1);
  CHECK(report_summary(res.report).find("weighted flow-time: " + to_string(res.report.wf_total)) !=
        std::string::npos);
}

TEST_CASE("serial and parallel window solves agree") {
  auto hdf = make_subsolver("hdf");
  Instance inst = clustered(24, 5, 9);
  StitchConfig serial;
  serial.parallel = false;
  StitchResult a = run_standard(inst, *hdf, serial);
  StitchResult b = run_standard(inst, *hdf);
  CHECK(std::equal(a.schedule.segments().begin(), a.schedule.segments().end(), b.schedule.segments().begin(),
                   b.schedule.segments().end()));
}
