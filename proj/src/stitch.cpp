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

#include "stitch.hpp"

#include <algorithm>
#include <future>
#include <set>
#include <sstream>

namespace flowstitch {

std::vector<SubInstance> build_subinstances(const Instance& inst, const ClassPartition& part, int width,
                                            int last_k) {
  if (width < 2) throw Error(ErrorCode::kInvalidArgument, "window width must be at least 2");
  std::vector<SubInstance> out;
  for (int k = width; k <= last_k; ++k) {
    std::vector<JobId> ids = part.members_between(k - width + 1, k);
    out.push_back({k, inst.subset(ids)});
  }
  return out;
}

std::map<JobId, Int> tentative_deadlines(const Schedule& prev, const Schedule& sub,
                                         std::span<const JobId> carry, std::span<const JobId> fresh) {
  std::map<JobId, Int> tent;
  for (JobId id : carry) {
    if (!prev.contains(id) || !sub.contains(id)) {
      throw Error(ErrorCode::kStructural, "carry job " + std::to_string(id) + " missing from an input schedule");
    }
    tent[id] = std::max(prev.completion(id), sub.completion(id));
  }
  for (JobId id : fresh) {
    if (!sub.contains(id)) {
      throw Error(ErrorCode::kStructural, "job " + std::to_string(id) + " missing from the window schedule");
    }
    tent[id] = sub.completion(id);
  }
  return tent;
}

Int occupied_volume(const Instance& inst, const ClassPartition& part, int below) {
  Int q = 0;
  for (JobId id : part.members_between(1, below - 1)) q += inst.job(id).size;
  return q;
}

std::vector<CoverPoint> find_dangerous(std::span<const Job> jobs, const std::map<JobId, Int>& tent,
                                       const Availability& avail) {
  std::vector<CoverPoint> out;
  for_each_relevant_interval(
      jobs, [&](const Job& j) -> const Int& { return tent.at(j.id); },
      [&](const Int& t1, const Int& t2, const Int& demand) {
        if (demand > free_length(avail, t1, t2)) out.push_back({t1, t2});
        return true;
      });
  return out;
}

int max_level(std::size_t n) {
  const Int target = pow_int(Int(static_cast<unsigned long>(n)), 7);
  int level = 0;
  Int reach = 1;
  while (reach < target) {
    reach *= 2;
    ++level;
  }
  return level;
}

Int fixed_extension(const Int& size, std::size_t n) {
  return ceil_div(size, ceil_sqrt(Int(static_cast<unsigned long>(n))));
}

R2CInstance build_cover_instance(std::vector<CoverPoint> dangerous, std::span<const Job> leveled,
                                 std::span<const Job> fixed, const std::map<JobId, Int>& tent, std::size_t n,
                                 StitchMode mode) {
  R2CInstance r2c;
  r2c.points = std::move(dangerous);
  r2c.n = n;
  r2c.scale = mode == StitchMode::kStandard ? 4 : 8;
  const int top = max_level(n);
  for (const Job& j : leveled) {
    const Int& d = tent.at(j.id);
    Int stretch = j.size;
    Int price = j.weight * j.size;
    for (int level = 0; level <= top; ++level) {
      r2c.rects.push_back({j.id, level, j.release, d, d + stretch, price, false});
      stretch *= 2;
      price *= 2;
    }
  }
  for (const Job& j : fixed) {
    const Int& d = tent.at(j.id);
    Int ext = fixed_extension(j.size, n);
    r2c.rects.push_back({j.id, 0, j.release, d, d + ext, j.weight * ext, true});
  }
  if (auto bad = uncoverable_points(r2c); !bad.empty()) {
    const CoverPoint& p = r2c.points[bad.front()];
    throw Error(ErrorCode::kStructural, std::to_string(bad.size()) + " dangerous interval(s) cannot be covered, first (" +
                                            to_string(p.t1) + ", " + to_string(p.t2) + "]");
  }
  return r2c;
}

DeadlineRecords extend_deadlines(const R2CInstance& r2c, const CoverSolution& sol, std::span<const Job> jobs,
                                 const std::map<JobId, Int>& tent, const Int& q,
                                 std::span<const JobId> must_extend) {
  std::map<JobId, Int> reach;
  for (std::size_t i : sol.selected) {
    const CoverRect& r = r2c.rects.at(i);
    auto [it, inserted] = reach.emplace(r.owner, r.y_max);
    if (!inserted && it->second < r.y_max) it->second = r.y_max;
  }
  for (JobId id : must_extend) {
    if (!reach.count(id)) {
      throw Error(ErrorCode::kStructural, "big job " + std::to_string(id) + " has no selected level");
    }
  }
  DeadlineRecords rec;
  for (const Job& j : jobs) {
    const Int& d = tent.at(j.id);
    if (auto it = reach.find(j.id); it != reach.end()) {
      rec[j.id] = {d, it->second, it->second + q};
    } else {
      rec[j.id] = {d, d, d};
    }
  }
  return rec;
}

FeasibilityVerdict verify_final_safety(std::span<const Job> jobs, const DeadlineRecords& rec,
                                       const Availability& avail) {
  FeasibilityVerdict verdict;
  for_each_relevant_interval(
      jobs, [&](const Job& j) -> const Int& { return rec.at(j.id).final; },
      [&](const Int& t1, const Int& t2, const Int& demand) {
        Int room = free_length(avail, t1, t2);
        if (demand <= room) return true;
        verdict = {false, t1, t2, demand, room};
        return false;
      });
  return verdict;
}

Schedule insert_jobs(const Schedule& lower, std::span<const Job> jobs, const DeadlineRecords& rec) {
  if (jobs.empty()) return lower;
  std::map<JobId, Int> finals;
  for (const Job& j : jobs) finals[j.id] = rec.at(j.id).final;
  Schedule placed = edf_schedule(jobs, DeadlineMap(jobs, std::move(finals)), Availability::from_schedule(lower));
  return lower.merged_with(placed);
}

namespace {

[[noreturn]] void ledger_failure(int k, const std::string& what) {
  throw Error(ErrorCode::kInternal, "step " + std::to_string(k) + ": " + what);
}

std::vector<Job> jobs_of(const Instance& inst, std::span<const JobId> ids) {
  std::vector<Job> out;
  out.reserve(ids.size());
  for (JobId id : ids) out.push_back(inst.job(id));
  return out;
}

// Solves every window, concurrently when allowed, and checks each result.
std::map<int, Schedule> solve_windows(const std::vector<SubInstance>& subs, const SubSolver& alg, bool parallel) {
  std::map<int, Schedule> out;
  std::vector<std::future<Schedule>> pending;
  pending.reserve(subs.size());
  for (const SubInstance& s : subs) {
    auto task = [&alg, &s]() { return s.inst.empty() ? Schedule{} : alg.solve(s.inst); };
    pending.push_back(std::async(parallel ? std::launch::async : std::launch::deferred, task));
  }
  for (std::size_t i = 0; i < subs.size(); ++i) {
    Schedule sched = pending[i].get();
    ScheduleVerdict v = validate_schedule(sched, subs[i].inst.jobs());
    if (!v.ok) {
      throw Error(ErrorCode::kInternal, alg.name() + " returned an invalid schedule for window " +
                                            std::to_string(subs[i].k) + ": " + v.message);
    }
    out.emplace(subs[i].k, std::move(sched));
  }
  return out;
}

struct StepInput {
  const Instance* inst;
  const ClassPartition* part;
  StitchMode mode;
  int k;
  int width;
  const Schedule* prev;
  const Schedule* sub;
};

// One inductive step: the schedule of classes 1..k from the one of classes
// 1..k-width+1 and the window schedule of classes k-width+1..k.
Schedule stitch_step(const StepInput& in, StepReport& row, const StepObserver& observe) {
  const Instance& inst = *in.inst;
  const ClassPartition& part = *in.part;
  const std::size_t n = inst.size();
  const int carry_class = in.k - in.width + 1;

  StepTrace tr;
  tr.k = in.k;
  tr.mode = in.mode;
  tr.frozen = part.members_between(1, carry_class - 1);
  tr.carry = part.members_between(carry_class, carry_class);
  tr.fresh = part.members_between(carry_class + 1, in.k);
  std::vector<JobId> window_ids = tr.carry;
  window_ids.insert(window_ids.end(), tr.fresh.begin(), tr.fresh.end());
  tr.window_jobs = jobs_of(inst, window_ids);
  tr.prev = *in.prev;
  tr.sub = *in.sub;

  Schedule lower = in.prev->restricted_to(tr.frozen);
  tr.avail = Availability::from_schedule(lower);
  tr.q = occupied_volume(inst, part, carry_class);

  row.k = in.k;
  row.window_jobs = tr.window_jobs.size();
  row.q = tr.q;
  std::vector<Job> frozen_jobs = jobs_of(inst, tr.frozen);
  std::vector<Job> prev_jobs = jobs_of(inst, part.members_between(1, carry_class));
  row.wf_prev = weighted_flow(*in.prev, prev_jobs).total;
  row.wf_sub = weighted_flow(*in.sub, tr.window_jobs).total;

  if (tr.window_jobs.empty()) {
    tr.result = *in.prev;
    row.wf_bold = row.wf_prev;
    if (observe) observe(tr);
    return tr.result;
  }

  std::map<JobId, Int> tent = tentative_deadlines(*in.prev, *in.sub, tr.carry, tr.fresh);
  tr.dangerous = find_dangerous(tr.window_jobs, tent, tr.avail);

  std::vector<Job> leveled;
  std::vector<Job> fixed;
  if (in.mode == StitchMode::kStandard) {
    for (const Job& j : tr.window_jobs) {
      if (j.size >= tr.q) leveled.push_back(j);
    }
  } else {
    for (JobId id : tr.carry) {
      const Job& j = inst.job(id);
      if (j.size >= tr.q) leveled.push_back(j);
    }
    fixed = jobs_of(inst, tr.fresh);
  }
  for (const Job& j : leveled) tr.big.push_back(j.id);

  tr.r2c = build_cover_instance(tr.dangerous, leveled, fixed, tent, n, in.mode);
  tr.fractional = build_fractional(tr.r2c);
  tr.cover = greedy_cover(tr.r2c);
  if (auto v = verify_cover(tr.r2c, tr.cover); !v.ok) ledger_failure(in.k, "cover check failed: " + v.message);

  std::vector<JobId> must_extend = tr.big;
  for (const Job& j : fixed) must_extend.push_back(j.id);
  tr.records = extend_deadlines(tr.r2c, tr.cover, tr.window_jobs, tent, tr.q, must_extend);

  if (auto v = verify_final_safety(tr.window_jobs, tr.records, tr.avail); !v.feasible) {
    ledger_failure(in.k, "final deadlines unsafe on (" + to_string(v.t1) + ", " + to_string(v.t2) + "]: demand " +
                             to_string(v.demand) + " > free " + to_string(v.free));
  }
  tr.result = insert_jobs(lower, tr.window_jobs, tr.records);

  // Ledger.
  FractionalVerdict fv = verify_fractional_cover(tr.r2c, tr.fractional);
  row.dangerous = tr.dangerous.size();
  row.big_jobs = tr.big.size();
  row.frac_cost = tr.fractional.cost;
  row.cover_cost = tr.cover.cost;
  row.shortfalls = fv.shortfalls.size();
  row.cover_within_harmonic = Rational(tr.cover.cost) <= harmonic(tr.dangerous.size()) * tr.fractional.cost;
  for (const Job& j : tr.window_jobs) {
    const DeadlineRecord& d = tr.records.at(j.id);
    row.ext_cost += j.weight * (d.final - d.tentative);
  }
  for (const Job& j : leveled) row.big_wp += j.weight * j.size;
  Int fixed_wp = 0;
  Int fixed_w = 0;
  for (const Job& j : fixed) {
    Int ext = fixed_extension(j.size, n);
    if (ext < tr.q) ledger_failure(in.k, "fixed extension of job " + std::to_string(j.id) + " is below Q");
    row.fixed_ext_cost += j.weight * ext;
    fixed_wp += j.weight * j.size;
    fixed_w += j.weight;
  }
  if (row.ext_cost > row.cover_cost + row.big_wp + row.fixed_ext_cost) {
    ledger_failure(in.k, "extension cost " + to_string(row.ext_cost) + " exceeds cover cost + sum w p");
  }
  if (Rational(row.fixed_ext_cost) >
      Rational(fixed_wp, ceil_sqrt(Int(static_cast<unsigned long>(n)))) + Rational(fixed_w)) {
    ledger_failure(in.k, "fixed extensions exceed their rounding allowance");
  }

  std::vector<JobId> all_ids = part.members_between(1, in.k);
  std::vector<Job> all_jobs = jobs_of(inst, all_ids);
  if (auto v = validate_schedule(tr.result, all_jobs); !v.ok) ledger_failure(in.k, "invalid schedule: " + v.message);
  for (const Job& j : tr.window_jobs) {
    if (tr.result.completion(j.id) > tr.records.at(j.id).final) {
      ledger_failure(in.k, "job " + std::to_string(j.id) + " misses its final deadline");
    }
  }
  std::span<const Segment> kept = lower.segments();
  Schedule again = tr.result.restricted_to(tr.frozen);
  if (!std::equal(kept.begin(), kept.end(), again.segments().begin(), again.segments().end())) {
    ledger_failure(in.k, "frozen segments changed");
  }
  row.wf_bold = weighted_flow(tr.result, all_jobs).total;
  if (row.wf_bold > row.wf_prev + row.wf_sub + row.ext_cost) {
    ledger_failure(in.k, "cost chain violated");
  }
  if (observe) observe(tr);
  return tr.result;
}

StitchReport base_report(const Instance& inst, const SubSolver& alg, StitchMode mode) {
  StitchReport rep;
  rep.mode = mode;
  rep.alg = alg.name();
  rep.n = inst.size();
  return rep;
}

StitchResult direct(const Instance& inst, const SubSolver& alg, StitchReport rep) {
  Schedule s = alg.solve(inst);
  if (auto v = validate_schedule(s, inst.jobs()); !v.ok) {
    throw Error(ErrorCode::kInternal, alg.name() + " returned an invalid schedule: " + v.message);
  }
  rep.wf_total = weighted_flow(s, inst.jobs()).total;
  rep.wf_sub_sum = rep.wf_total;
  return {std::move(s), std::move(rep)};
}

}  // namespace

StitchResult run_standard(const Instance& inst, const SubSolver& alg, const StitchConfig& cfg,
                          const StepObserver& observe) {
  StitchReport rep = base_report(inst, alg, StitchMode::kStandard);
  rep.window = 1;
  if (inst.size() < 2) {
    rep.classes = inst.empty() ? 0 : 1;
    return direct(inst, alg, std::move(rep));
  }
  ClassPartition part = partition_classes(inst);
  const int top = part.max_class();
  rep.classes = top;
  if (top <= 2) return direct(inst, alg, std::move(rep));

  std::vector<SubInstance> subs = build_subinstances(inst, part, 2, top);
  std::map<int, Schedule> windows = solve_windows(subs, alg, cfg.parallel);

  Schedule bold = windows.at(2);
  rep.wf_sub_sum = weighted_flow(bold, subs.front().inst.jobs()).total;
  for (int k = 3; k <= top; ++k) {
    StepReport row;
    StepInput in{&inst, &part, StitchMode::kStandard, k, 2, &bold, &windows.at(k)};
    bold = stitch_step(in, row, observe);
    rep.wf_sub_sum += row.wf_sub;
    rep.ext_sum += row.ext_cost;
    rep.steps.push_back(std::move(row));
  }
  rep.wf_total = weighted_flow(bold, inst.jobs()).total;
  if (rep.wf_total > rep.wf_sub_sum + rep.ext_sum) {
    throw Error(ErrorCode::kInternal, "telescoped cost bound violated");
  }
  return {std::move(bold), std::move(rep)};
}

int window_for(const Rational& eps, unsigned long gamma, std::size_t n) {
  if (eps <= 0 || eps >= Rational(1, 2)) throw Error(ErrorCode::kInvalidArgument, "eps must lie in (0, 1/2)");
  const Int nn = static_cast<unsigned long>(n);
  // eps > 1/sqrt(n)  <=>  eps^2 n > 1
  if (eps * eps * Rational(nn) <= 1) {
    throw Error(ErrorCode::kInvalidArgument, "eps must exceed 1/sqrt(n) so that (eps - 1/sqrt n) / 2 > 0");
  }
  const Rational four_gamma = Rational(Int(4) * Int(gamma));
  // b (eps - 1/sqrt n) >= 4 gamma  <=>  b eps - 4 gamma >= 0 and n (b eps - 4 gamma)^2 >= b^2
  auto fits = [&](const Int& b) {
    Rational slack = Rational(b) * eps - four_gamma;
    return slack >= 0 && Rational(nn) * slack * slack >= Rational(b * b);
  };
  Int lo = ceil_div(Int(4) * Int(gamma) * eps.get_den(), eps.get_num());
  if (lo < 1) lo = 1;
  Int hi = lo;
  while (!fits(hi)) hi *= 2;
  while (lo < hi) {
    Int mid = (lo + hi) / 2;
    if (fits(mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  if (!hi.fits_sint_p()) throw Error(ErrorCode::kInvalidArgument, "window width overflows");
  return static_cast<int>(hi.get_si());
}

StitchResult run_windowed(const Instance& inst, const SubSolver& alg, const StitchConfig& cfg,
                          const StepObserver& observe) {
  StitchReport rep = base_report(inst, alg, StitchMode::kWindowed);
  rep.eps = cfg.eps;
  rep.gamma = cfg.gamma;
  const int b = cfg.window > 0 ? cfg.window : window_for(cfg.eps, cfg.gamma, inst.size());
  rep.window = b;
  if (inst.size() < 2) {
    rep.classes = inst.empty() ? 0 : 1;
    return direct(inst, alg, std::move(rep));
  }
  ClassPartition part = partition_classes(inst);
  const int top = part.max_class();
  rep.classes = top;
  if (top <= b) return direct(inst, alg, std::move(rep));

  // Bases 𝐒_1..𝐒_b come straight from the sub-solver on classes 1..k; the
  // windows k = b+1..K+b-1 span classes k-b..k.
  std::vector<SubInstance> subs;
  for (int k = 1; k <= b; ++k) subs.push_back({k, inst.subset(part.members_between(1, k))});
  std::vector<SubInstance> windows = build_subinstances(inst, part, b + 1, top + b - 1);
  subs.insert(subs.end(), windows.begin(), windows.end());
  std::map<int, Schedule> solved = solve_windows(subs, alg, cfg.parallel);

  std::map<int, Schedule> bold;
  std::map<int, Int> chain_bound;  // sum of sub-solver costs and extension costs along 𝐒_k's chain
  for (int k = 1; k <= b; ++k) {
    bold[k] = solved.at(k);
    chain_bound[k] = weighted_flow(bold[k], subs[static_cast<std::size_t>(k - 1)].inst.jobs()).total;
  }
  for (int k = b + 1; k <= top + b - 1; ++k) {
    StepReport row;
    StepInput in{&inst, &part, StitchMode::kWindowed, k, b + 1, &bold.at(k - b), &solved.at(k)};
    bold[k] = stitch_step(in, row, observe);
    chain_bound[k] = chain_bound.at(k - b) + row.wf_sub + row.ext_cost;
    rep.wf_sub_sum += row.wf_sub;
    rep.ext_sum += row.ext_cost;
    rep.steps.push_back(std::move(row));
  }

  int best = top;
  for (int z = top; z <= top + b - 1; ++z) {
    const Schedule& s = bold.at(z);
    if (auto v = validate_schedule(s, inst.jobs()); !v.ok) {
      throw Error(ErrorCode::kInternal, "candidate " + std::to_string(z) + " invalid: " + v.message);
    }
    Int wf = weighted_flow(s, inst.jobs()).total;
    if (wf > chain_bound.at(z)) {
      throw Error(ErrorCode::kInternal, "telescoped cost bound violated for candidate " + std::to_string(z));
    }
    rep.candidates.emplace_back(z, wf);
    if (wf < rep.candidates[static_cast<std::size_t>(best - top)].second) best = z;
  }
  rep.chosen = best;
  rep.wf_total = rep.candidates[static_cast<std::size_t>(best - top)].second;
  return {bold.at(best), std::move(rep)};
}

StitchResult run_stitch(const Instance& inst, const SubSolver& alg, const StitchConfig& cfg,
                        const StepObserver& observe) {
  return cfg.mode == StitchMode::kStandard ? run_standard(inst, alg, cfg, observe)
                                           : run_windowed(inst, alg, cfg, observe);
}

std::string report_csv(const StitchReport& report) {
  std::ostringstream out;
  out << "k,n_k,Q,dangerous,frac_cost,cover_cost,ext_cost,wF_Sk,wF_bold\n";
  for (const StepReport& s : report.steps) {
    out << s.k << ',' << s.window_jobs << ',' << s.q << ',' << s.dangerous << ',' << to_string(s.frac_cost) << ','
        << s.cover_cost << ',' << s.ext_cost << ',' << s.wf_sub << ',' << s.wf_bold << '\n';
  }
  return out.str();
}

std::string report_summary(const StitchReport& report) {
  std::ostringstream out;
  out << "mode: " << (report.mode == StitchMode::kStandard ? "standard" : "windowed") << '\n'
      << "solver: " << report.alg << '\n'
      << "jobs: " << report.n << ", classes: " << report.classes << '\n';
  if (report.mode == StitchMode::kWindowed) {
    out << "window b: " << report.window << ", gamma: " << report.gamma << ", eps: " << to_string(report.eps) << '\n';
  }
  out << "steps: " << report.steps.size() << '\n';
  std::size_t dangerous = 0;
  std::size_t shortfalls = 0;
  for (const StepReport& s : report.steps) {
    dangerous += s.dangerous;
    shortfalls += s.shortfalls;
  }
  out << "dangerous intervals: " << dangerous << ", fractional shortfalls: " << shortfalls << '\n'
      << "sum wF(sub-solver): " << report.wf_sub_sum << '\n'
      << "sum extension cost: " << report.ext_sum << '\n'
      << "weighted flow-time: " << report.wf_total << '\n';
  if (!report.candidates.empty()) {
    out << "candidates:";
    for (const auto& [z, wf] : report.candidates) out << ' ' << z << '=' << wf;
    out << "\nchosen: " << report.chosen << '\n';
  }
  return out.str();
}

}  // namespace flowstitch
