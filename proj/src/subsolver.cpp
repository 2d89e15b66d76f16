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

#include "subsolver.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <unordered_map>

namespace flowstitch {

Schedule priority_simulate(const Instance& inst, std::span<const JobId> order) {
  if (order.size() != inst.size()) {
    throw Error(ErrorCode::kInvalidArgument, "priority order does not cover the instance");
  }
  std::unordered_map<JobId, std::size_t> rank;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (!inst.contains(order[i]) || !rank.emplace(order[i], i).second) {
      throw Error(ErrorCode::kInvalidArgument, "priority order is not a permutation of the job ids");
    }
  }
  std::vector<std::size_t> priority;
  priority.reserve(inst.size());
  for (const Job& j : inst.jobs()) priority.push_back(rank.at(j.id));
  return priority_run(inst.jobs(), priority, Availability{});
}

namespace {

// Branch and bound over priority orders. Fixing the highest priorities first
// is exact: a job never affects the ones ranked above it, so adding the next
// job to a prefix only fills the earliest free slots after its release.
class OrderSearch {
 public:
  explicit OrderSearch(std::span<const Job> jobs) : jobs_(jobs), used_(jobs.size(), false) {
    for (const Job& j : jobs_) tail_bound_ += j.weight * j.size;
  }

  std::vector<std::size_t> run() {
    std::vector<Interval> busy;
    Int cost = 0;
    descend(busy, cost, tail_bound_);
    return best_order_;
  }

 private:
  // Occupies p slots in the earliest free time after r; returns completion.
  static Int place(std::vector<Interval>& busy, const Int& release, Int need) {
    std::vector<Interval> added;
    Int t = release;
    std::size_t i = 0;
    while (i < busy.size() && busy[i].end <= t) ++i;
    while (need > 0) {
      if (i < busy.size() && busy[i].start <= t) {
        t = busy[i].end;
        ++i;
        continue;
      }
      Int stop = t + need;
      if (i < busy.size() && busy[i].start < stop) stop = busy[i].start;
      added.push_back({t, stop});
      need -= stop - t;
      t = stop;
    }
    busy.insert(busy.end(), added.begin(), added.end());
    std::sort(busy.begin(), busy.end(), [](const Interval& a, const Interval& b) { return a.start < b.start; });
    return t;
  }

  void descend(const std::vector<Interval>& busy, const Int& cost, const Int& remaining_floor) {
    if (have_best_ && cost + remaining_floor >= best_cost_) return;
    if (order_.size() == jobs_.size()) {
      best_cost_ = cost;
      best_order_ = order_;
      have_best_ = true;
      return;
    }
    for (std::size_t i = 0; i < jobs_.size(); ++i) {
      if (used_[i]) continue;
      const Job& j = jobs_[i];
      std::vector<Interval> next = busy;
      Int c = place(next, j.release, j.size);
      used_[i] = true;
      order_.push_back(i);
      descend(next, cost + j.weight * (c - j.release), remaining_floor - j.weight * j.size);
      order_.pop_back();
      used_[i] = false;
    }
  }

  std::span<const Job> jobs_;
  std::vector<bool> used_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> best_order_;
  Int best_cost_;
  Int tail_bound_ = 0;
  bool have_best_ = false;
};

}  // namespace

Schedule exact_oracle(const Instance& inst, std::size_t max_jobs) {
  if (inst.size() > max_jobs) {
    throw Error(ErrorCode::kTooLarge, "exact oracle limited to " + std::to_string(max_jobs) + " jobs, got " +
                                          std::to_string(inst.size()));
  }
  if (inst.empty()) return {};
  std::vector<std::size_t> best = OrderSearch(inst.jobs()).run();
  std::vector<JobId> order;
  order.reserve(best.size());
  for (std::size_t i : best) order.push_back(inst.jobs()[i].id);
  return priority_simulate(inst, order);
}

Schedule unitslot_oracle(const Instance& inst, long max_total_size) {
  if (inst.total_size() > max_total_size) {
    throw Error(ErrorCode::kTooLarge, "unit-slot oracle limited to total size " + std::to_string(max_total_size));
  }
  if (inst.empty()) return {};
  constexpr long kMaxHorizon = 256;
  const std::span<const Job> jobs = inst.jobs();
  const std::size_t n = jobs.size();
  long max_release = 0;
  for (const Job& j : jobs) {
    if (j.release > kMaxHorizon) throw Error(ErrorCode::kTooLarge, "unit-slot oracle horizon too long");
    max_release = std::max(max_release, j.release.get_si());
  }
  const long horizon = max_release + inst.total_size().get_si();
  const std::uint64_t base = static_cast<std::uint64_t>(max_total_size) + 1;

  std::vector<long> release(n), size(n);
  std::vector<Int> weight(n);
  for (std::size_t i = 0; i < n; ++i) {
    release[i] = jobs[i].release.get_si();
    size[i] = jobs[i].size.get_si();
    weight[i] = jobs[i].weight;
  }

  // State: remaining units per job, packed in base (limit + 1), plus time.
  auto encode = [&](const std::vector<long>& rem) {
    std::uint64_t code = 0;
    for (std::size_t i = 0; i < n; ++i) code = code * base + static_cast<std::uint64_t>(rem[i]);
    return code;
  };
  struct Entry {
    std::optional<Int> cost;  // nullopt: cannot finish by the horizon
    int choice = -1;          // job index run in slot (t, t+1], -1 for idle
  };
  std::unordered_map<std::uint64_t, Entry> memo;
  const std::uint64_t stride = static_cast<std::uint64_t>(horizon) + 1;

  std::vector<long> rem(size);
  std::function<const Entry&(long)> best = [&](long t) -> const Entry& {
    std::uint64_t key = encode(rem) * stride + static_cast<std::uint64_t>(t);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    Entry e;
    bool done = std::all_of(rem.begin(), rem.end(), [](long r) { return r == 0; });
    if (done) {
      e.cost = Int(0);
    } else if (t < horizon) {
      const Entry& idle = best(t + 1);
      if (idle.cost) {
        e.cost = idle.cost;
        e.choice = -1;
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (rem[i] == 0 || release[i] > t) continue;
        --rem[i];
        Int here = rem[i] == 0 ? Int(weight[i] * (t + 1 - release[i])) : Int(0);
        const Entry& sub = best(t + 1);
        if (sub.cost) {
          Int total = here + *sub.cost;
          if (!e.cost || total < *e.cost) {
            e.cost = total;
            e.choice = static_cast<int>(i);
          }
        }
        ++rem[i];
      }
    }
    return memo.emplace(key, std::move(e)).first->second;
  };

  if (!best(0).cost) throw Error(ErrorCode::kInternal, "unit-slot oracle found no schedule");
  std::vector<Segment> segs;
  rem = size;
  for (long t = 0; t < horizon; ++t) {
    if (std::all_of(rem.begin(), rem.end(), [](long r) { return r == 0; })) break;
    int c = best(t).choice;
    if (c < 0) continue;
    JobId id = jobs[static_cast<std::size_t>(c)].id;
    if (!segs.empty() && segs.back().job == id && segs.back().end == t) {
      segs.back().end = t + 1;
    } else {
      segs.push_back({id, Int(t), Int(t + 1)});
    }
    --rem[static_cast<std::size_t>(c)];
  }
  return Schedule(std::move(segs));
}

Schedule hdf_heuristic(const Instance& inst) {
  std::vector<const Job*> order;
  for (const Job& j : inst.jobs()) order.push_back(&j);
  std::sort(order.begin(), order.end(), [](const Job* a, const Job* b) {
    Int lhs = a->weight * b->size;
    Int rhs = b->weight * a->size;
    if (lhs != rhs) return lhs > rhs;
    if (a->size != b->size) return a->size < b->size;
    return a->id < b->id;
  });
  std::vector<JobId> ids;
  for (const Job* j : order) ids.push_back(j->id);
  return priority_simulate(inst, ids);
}

std::unique_ptr<SubSolver> make_subsolver(const std::string& name, std::size_t exact_limit) {
  if (name == "exact") return std::make_unique<ExactSolver>(exact_limit);
  if (name == "hdf") return std::make_unique<HdfSolver>();
  if (name == "unitslot") return std::make_unique<UnitSlotSolver>();
  throw Error(ErrorCode::kInvalidArgument, "unknown solver '" + name + "' (expected exact, hdf or unitslot)");
}

}  // namespace flowstitch
