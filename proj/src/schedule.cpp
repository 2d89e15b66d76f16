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

#include "schedule.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace flowstitch {

Schedule::Schedule(std::vector<Segment> segments) : segments_(std::move(segments)) {
  std::stable_sort(segments_.begin(), segments_.end(),
                   [](const Segment& a, const Segment& b) { return a.start < b.start; });
  for (const Segment& s : segments_) {
    auto [it, inserted] = completions_.emplace(s.job, s.end);
    if (!inserted && it->second < s.end) it->second = s.end;
  }
}

const Int& Schedule::completion(JobId id) const {
  auto it = completions_.find(id);
  if (it == completions_.end()) {
    throw Error(ErrorCode::kStructural, "job " + std::to_string(id) + " is not in the schedule");
  }
  return it->second;
}

Schedule Schedule::restricted_to(std::span<const JobId> ids) const {
  std::unordered_set<JobId> keep(ids.begin(), ids.end());
  std::vector<Segment> out;
  for (const Segment& s : segments_) {
    if (keep.count(s.job)) out.push_back(s);
  }
  return Schedule(std::move(out));
}

Schedule Schedule::merged_with(const Schedule& other) const {
  std::vector<Segment> all(segments_.begin(), segments_.end());
  all.insert(all.end(), other.segments_.begin(), other.segments_.end());
  return Schedule(std::move(all));
}

std::vector<Segment> Schedule::segments_of(JobId id) const {
  std::vector<Segment> out;
  for (const Segment& s : segments_) {
    if (s.job == id) out.push_back(s);
  }
  return out;
}

Schedule parse_schedule(std::string_view text) {
  std::vector<Segment> segs;
  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    std::istringstream tokens(line);
    std::vector<std::string> fields;
    for (std::string tok; tokens >> tok;) fields.push_back(tok);
    if (fields.empty() || fields.front().front() == '#') continue;
    if (fields.size() != 3) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": expected 'job_id start end'");
    }
    try {
      Int id = parse_int(fields[0]);
      if (!id.fits_slong_p()) throw Error(ErrorCode::kParse, "job id out of range");
      Segment s{id.get_si(), parse_int(fields[1]), parse_int(fields[2])};
      if (s.end <= s.start) throw Error(ErrorCode::kParse, "segment end must exceed start");
      segs.push_back(std::move(s));
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return Schedule(std::move(segs));
}

std::string format_schedule(const Schedule& sched) {
  std::ostringstream out;
  for (const Segment& s : sched.segments()) out << s.job << ' ' << s.start << ' ' << s.end << '\n';
  return out.str();
}

Availability::Availability(std::vector<Interval> busy) {
  std::sort(busy.begin(), busy.end(), [](const Interval& a, const Interval& b) { return a.start < b.start; });
  for (Interval& iv : busy) {
    if (iv.end <= iv.start) continue;
    if (!busy_.empty() && iv.start <= busy_.back().end) {
      if (busy_.back().end < iv.end) busy_.back().end = iv.end;
    } else {
      busy_.push_back(std::move(iv));
    }
  }
  prefix_.reserve(busy_.size() + 1);
  prefix_.emplace_back(0);
  for (const Interval& iv : busy_) prefix_.push_back(prefix_.back() + iv.length());
}

Availability Availability::from_schedule(const Schedule& sched) {
  std::vector<Interval> busy;
  busy.reserve(sched.segments().size());
  for (const Segment& s : sched.segments()) busy.push_back({s.start, s.end});
  return Availability(std::move(busy));
}

Int Availability::busy_length(const Int& start, const Int& end) const {
  if (end <= start || busy_.empty()) return 0;
  // Intervals entirely inside (start, end] are summed from the prefix table;
  // the two boundary intervals are clipped.
  auto first = std::upper_bound(busy_.begin(), busy_.end(), start,
                                [](const Int& t, const Interval& iv) { return t < iv.end; });
  auto last = std::lower_bound(busy_.begin(), busy_.end(), end,
                               [](const Interval& iv, const Int& t) { return iv.start < t; });
  if (first >= last) return 0;
  std::size_t i = static_cast<std::size_t>(first - busy_.begin());
  std::size_t j = static_cast<std::size_t>(last - busy_.begin());
  Int total = prefix_[j] - prefix_[i];
  if (busy_[i].start < start) total -= start - busy_[i].start;
  if (busy_[j - 1].end > end) total -= busy_[j - 1].end - end;
  return total;
}

Int free_length(const Availability& avail, const Int& start, const Int& end) {
  if (end <= start) return 0;
  return (end - start) - avail.busy_length(start, end);
}

DeadlineMap::DeadlineMap(std::span<const Job> jobs, std::map<JobId, Int> deadlines)
    : deadlines_(std::move(deadlines)) {
  for (const Job& j : jobs) {
    auto it = deadlines_.find(j.id);
    if (it == deadlines_.end()) {
      throw Error(ErrorCode::kInvalidArgument, "no deadline for job " + std::to_string(j.id));
    }
    if (it->second < j.release + j.size) {
      throw Error(ErrorCode::kInvalidArgument,
                  "deadline of job " + std::to_string(j.id) + " precedes release + size");
    }
  }
}

const Int& DeadlineMap::at(JobId id) const {
  auto it = deadlines_.find(id);
  if (it == deadlines_.end()) throw Error(ErrorCode::kStructural, "no deadline for job " + std::to_string(id));
  return it->second;
}

void for_each_relevant_interval(
    std::span<const Job> jobs, const std::function<const Int&(const Job&)>& deadline_of,
    const std::function<bool(const Int& t1, const Int& t2, const Int& demand)>& visit) {
  std::vector<const Job*> by_deadline;
  by_deadline.reserve(jobs.size());
  for (const Job& j : jobs) by_deadline.push_back(&j);
  std::sort(by_deadline.begin(), by_deadline.end(),
            [&](const Job* a, const Job* b) { return deadline_of(*a) < deadline_of(*b); });

  std::vector<Int> releases;
  for (const Job& j : jobs) releases.push_back(j.release);
  std::sort(releases.begin(), releases.end());
  releases.erase(std::unique(releases.begin(), releases.end()), releases.end());

  std::vector<Int> deadlines;
  for (const Job* j : by_deadline) deadlines.push_back(deadline_of(*j));
  deadlines.erase(std::unique(deadlines.begin(), deadlines.end()), deadlines.end());

  for (const Int& t1 : releases) {
    Int demand = 0;
    std::size_t next = 0;
    for (const Int& t2 : deadlines) {
      while (next < by_deadline.size() && deadline_of(*by_deadline[next]) <= t2) {
        if (by_deadline[next]->release >= t1) demand += by_deadline[next]->size;
        ++next;
      }
      if (t2 <= t1) continue;
      if (!visit(t1, t2, demand)) return;
    }
  }
}

FeasibilityVerdict edf_feasible(std::span<const Job> jobs, const DeadlineMap& dl,
                                const Availability& avail) {
  FeasibilityVerdict verdict;
  for_each_relevant_interval(
      jobs, [&](const Job& j) -> const Int& { return dl.at(j.id); },
      [&](const Int& t1, const Int& t2, const Int& demand) {
        Int room = free_length(avail, t1, t2);
        if (demand <= room) return true;
        verdict = {false, t1, t2, demand, room};
        return false;
      });
  return verdict;
}

Schedule priority_run(std::span<const Job> jobs, std::span<const std::size_t> priority,
                      const Availability& avail) {
  if (priority.size() != jobs.size()) {
    throw Error(ErrorCode::kInvalidArgument, "priority vector does not match job count");
  }
  std::vector<std::size_t> by_release(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) by_release[i] = i;
  std::stable_sort(by_release.begin(), by_release.end(),
                   [&](std::size_t a, std::size_t b) { return jobs[a].release < jobs[b].release; });

  std::vector<Int> remaining(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) remaining[i] = jobs[i].size;

  std::set<std::pair<std::size_t, std::size_t>> ready;
  std::vector<Segment> out;
  std::span<const Interval> busy = avail.busy();
  std::size_t next_release = 0;
  std::size_t next_busy = 0;
  std::size_t unfinished = jobs.size();
  Int t = jobs.empty() ? Int(0) : jobs[by_release.front()].release;

  while (unfinished > 0) {
    while (next_release < by_release.size() && jobs[by_release[next_release]].release <= t) {
      std::size_t i = by_release[next_release++];
      ready.emplace(priority[i], i);
    }
    if (ready.empty()) {
      t = jobs[by_release[next_release]].release;
      continue;
    }
    while (next_busy < busy.size() && busy[next_busy].end <= t) ++next_busy;
    if (next_busy < busy.size() && busy[next_busy].start <= t) {
      t = busy[next_busy].end;
      continue;
    }
    std::size_t i = ready.begin()->second;
    Int stop = t + remaining[i];
    if (next_release < by_release.size() && jobs[by_release[next_release]].release < stop) {
      stop = jobs[by_release[next_release]].release;
    }
    if (next_busy < busy.size() && busy[next_busy].start < stop) stop = busy[next_busy].start;

    if (!out.empty() && out.back().job == jobs[i].id && out.back().end == t) {
      out.back().end = stop;
    } else {
      out.push_back({jobs[i].id, t, stop});
    }
    remaining[i] -= stop - t;
    if (remaining[i] == 0) {
      ready.erase(ready.begin());
      --unfinished;
    }
    t = stop;
  }
  return Schedule(std::move(out));
}

namespace {

std::vector<std::size_t> edf_priority(std::span<const Job> jobs, const DeadlineMap& dl) {
  std::vector<std::size_t> order(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Int& da = dl.at(jobs[a].id);
    const Int& db = dl.at(jobs[b].id);
    if (da != db) return da < db;
    return jobs[a].id < jobs[b].id;
  });
  std::vector<std::size_t> priority(jobs.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) priority[order[rank]] = rank;
  return priority;
}

}  // namespace

Schedule edf_simulate(std::span<const Job> jobs, const DeadlineMap& dl, const Availability& avail) {
  return priority_run(jobs, edf_priority(jobs, dl), avail);
}

Schedule edf_schedule(std::span<const Job> jobs, const DeadlineMap& dl, const Availability& avail) {
  Schedule s = edf_simulate(jobs, dl, avail);
  for (const Job& j : jobs) {
    if (s.completion(j.id) > dl.at(j.id)) {
      throw Error(ErrorCode::kInternal, "EDF missed the deadline of job " + std::to_string(j.id) +
                                            " (completion " + to_string(s.completion(j.id)) +
                                            ", deadline " + to_string(dl.at(j.id)) + ")");
    }
  }
  return s;
}

WeightedFlow weighted_flow(const Schedule& sched, std::span<const Job> jobs) {
  WeightedFlow wf;
  for (const Job& j : jobs) {
    Int f = j.weight * (sched.completion(j.id) - j.release);
    wf.total += f;
    wf.per_job.emplace(j.id, std::move(f));
  }
  return wf;
}

ScheduleVerdict validate_schedule(const Schedule& sched, std::span<const Job> jobs,
                                  const Availability& avail) {
  auto fail = [](std::string msg) { return ScheduleVerdict{false, std::move(msg)}; };
  std::unordered_map<JobId, const Job*> by_id;
  for (const Job& j : jobs) by_id.emplace(j.id, &j);
  std::unordered_map<JobId, Int> volume;

  std::span<const Segment> segs = sched.segments();
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const Segment& s = segs[i];
    std::string where = "segment " + std::to_string(s.job) + " (" + to_string(s.start) + ", " +
                        to_string(s.end) + "]";
    if (s.end <= s.start) return fail(where + ": empty or reversed");
    if (i > 0 && segs[i - 1].end > s.start) return fail(where + ": overlaps the previous segment");
    auto it = by_id.find(s.job);
    if (it == by_id.end()) return fail(where + ": unknown job");
    if (s.start < it->second->release) return fail(where + ": starts before release " + to_string(it->second->release));
    if (avail.busy_length(s.start, s.end) != 0) return fail(where + ": uses occupied time");
    volume[s.job] += s.end - s.start;
  }
  for (const Job& j : jobs) {
    auto it = volume.find(j.id);
    Int got = it == volume.end() ? Int(0) : it->second;
    if (got != j.size) {
      return fail("job " + std::to_string(j.id) + ": processed " + to_string(got) + " of " + to_string(j.size));
    }
  }
  return {};
}

}  // namespace flowstitch
