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

// Schedules, machine availability, EDF and the interval feasibility test.
//
// Every interval in this library is half-open on the left: (start, end]
// covers the unit slots start+1, ..., end. A job released at r may run in
// slot (r, r+1] at the earliest and a job with deadline d must finish its
// last slot (d-1, d].

#ifndef FLOWSTITCH_SCHEDULE_HPP
#define FLOWSTITCH_SCHEDULE_HPP

#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "common.hpp"
#include "model.hpp"

namespace flowstitch {

struct Interval {
  Int start;
  Int end;
  Int length() const { return end - start; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct Segment {
  JobId job = 0;
  Int start;
  Int end;
  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Processing segments sorted by start, with per-job completion times. The
/// constructor sorts and records completions; it does not validate against an
/// instance (see validate_schedule).
class Schedule {
 public:
  Schedule() = default;
  explicit Schedule(std::vector<Segment> segments);

  std::span<const Segment> segments() const { return segments_; }
  const std::map<JobId, Int>& completions() const { return completions_; }
  bool contains(JobId id) const { return completions_.count(id) != 0; }
  const Int& completion(JobId id) const;
  bool empty() const { return segments_.empty(); }

  /// Segments of the listed jobs only, in order.
  Schedule restricted_to(std::span<const JobId> ids) const;
  Schedule merged_with(const Schedule& other) const;
  /// Segments of one job, in order.
  std::vector<Segment> segments_of(JobId id) const;

 private:
  std::vector<Segment> segments_;
  std::map<JobId, Int> completions_;
};

Schedule parse_schedule(std::string_view text);
std::string format_schedule(const Schedule& sched);

/// Time occupied by frozen segments; every other slot is free.
class Availability {
 public:
  Availability() = default;
  /// Overlapping or touching intervals are coalesced.
  explicit Availability(std::vector<Interval> busy);
  static Availability from_schedule(const Schedule& sched);

  std::span<const Interval> busy() const { return busy_; }
  bool all_free() const { return busy_.empty(); }
  Int busy_length(const Int& start, const Int& end) const;

 private:
  std::vector<Interval> busy_;
  std::vector<Int> prefix_;  // prefix_[i] = total length of busy_[0..i)
};

/// Number of free unit slots in (start, end]; 0 when end <= start.
Int free_length(const Availability& avail, const Int& start, const Int& end);

/// Per-job deadlines. Construction rejects d_j < r_j + p_j.
class DeadlineMap {
 public:
  DeadlineMap() = default;
  DeadlineMap(std::span<const Job> jobs, std::map<JobId, Int> deadlines);

  const Int& at(JobId id) const;
  const std::map<JobId, Int>& values() const { return deadlines_; }

 private:
  std::map<JobId, Int> deadlines_;
};

struct FeasibilityVerdict {
  bool feasible = true;
  // Witness (t1, t2] when infeasible.
  Int t1;
  Int t2;
  Int demand;
  Int free;
};

/// Visits every relevant interval (r_i, d_j] with r_i < d_j over distinct
/// endpoints, ordered by t1 then t2, with the total size of the jobs whose
/// window (r, d] lies inside it. Returning false from the visitor stops.
void for_each_relevant_interval(
    std::span<const Job> jobs, const std::function<const Int&(const Job&)>& deadline_of,
    const std::function<bool(const Int& t1, const Int& t2, const Int& demand)>& visit);

/// Interval test: feasible iff every relevant interval's contained demand fits
/// its free length. Returns the first violating interval otherwise.
FeasibilityVerdict edf_feasible(std::span<const Job> jobs, const DeadlineMap& dl,
                                const Availability& avail);

/// Preemptive list scheduling over free time. At every instant the released
/// unfinished job with the smallest `priority` value runs; `priority` is
/// indexed like `jobs` and must be a total order (distinct values). Segments
/// of one job that touch are merged.
Schedule priority_run(std::span<const Job> jobs, std::span<const std::size_t> priority,
                      const Availability& avail);

/// EDF without the deadline check: smallest deadline first, ties by id.
Schedule edf_simulate(std::span<const Job> jobs, const DeadlineMap& dl, const Availability& avail);

/// EDF that throws kInternal if any job misses its deadline.
Schedule edf_schedule(std::span<const Job> jobs, const DeadlineMap& dl, const Availability& avail);

struct WeightedFlow {
  Int total = 0;
  std::map<JobId, Int> per_job;
};

/// sum of w_j (C_j - r_j) over `jobs`; every job must be in the schedule.
WeightedFlow weighted_flow(const Schedule& sched, std::span<const Job> jobs);

struct ScheduleVerdict {
  bool ok = true;
  std::string message;
};

/// Checks segment shape and disjointness, that no segment touches busy time,
/// that nothing runs before its release, and that every job of `jobs` (and
/// only those) receives exactly p_j units.
ScheduleVerdict validate_schedule(const Schedule& sched, std::span<const Job> jobs,
                                  const Availability& avail = {});

}  // namespace flowstitch

#endif  // FLOWSTITCH_SCHEDULE_HPP
