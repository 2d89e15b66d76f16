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

#include "model.hpp"

#include <algorithm>
#include <sstream>

#include "schedule.hpp"

namespace flowstitch {

Instance::Instance(std::vector<Job> jobs) : jobs_(std::move(jobs)) {
  index_.reserve(jobs_.size());
  for (std::size_t i = 0; i < jobs_.size(); ++i) {
    const Job& j = jobs_[i];
    if (j.release < 0) {
      throw Error(ErrorCode::kInvalidArgument, "job " + std::to_string(j.id) + ": negative release");
    }
    if (j.size < 1) {
      throw Error(ErrorCode::kInvalidArgument, "job " + std::to_string(j.id) + ": non-positive size");
    }
    if (j.weight < 1) {
      throw Error(ErrorCode::kInvalidArgument, "job " + std::to_string(j.id) + ": non-positive weight");
    }
    if (!index_.emplace(j.id, i).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate job id " + std::to_string(j.id));
    }
    total_size_ += j.size;
    total_weight_ += j.weight;
  }
}

Rational Instance::spread() const {
  if (jobs_.empty()) throw Error(ErrorCode::kInvalidArgument, "spread of an empty instance");
  auto [lo, hi] = std::minmax_element(jobs_.begin(), jobs_.end(),
                                      [](const Job& a, const Job& b) { return a.size < b.size; });
  Rational q(hi->size, lo->size);
  q.canonicalize();
  return q;
}

Int Instance::max_weight() const {
  Int best = 0;
  for (const Job& j : jobs_) best = std::max(best, j.weight);
  return best;
}

const Job& Instance::job(JobId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorCode::kStructural, "unknown job id " + std::to_string(id));
  return jobs_[it->second];
}

Instance Instance::subset(std::span<const JobId> ids) const {
  std::vector<char> keep(jobs_.size(), 0);
  for (JobId id : ids) {
    auto it = index_.find(id);
    if (it == index_.end()) throw Error(ErrorCode::kStructural, "unknown job id " + std::to_string(id));
    keep[it->second] = 1;
  }
  std::vector<Job> out;
  for (std::size_t i = 0; i < jobs_.size(); ++i) {
    if (keep[i]) out.push_back(jobs_[i]);
  }
  return Instance(std::move(out));
}

Instance parse_instance(std::string_view text) {
  std::vector<Job> jobs;
  std::unordered_map<JobId, std::size_t> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string line(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    auto fail = [&](const std::string& msg) -> Error {
      return Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": " + msg);
    };

    std::istringstream tokens(line);
    std::vector<std::string> fields;
    for (std::string tok; tokens >> tok;) fields.push_back(tok);
    if (fields.empty() || fields.front().front() == '#') {
      if (eol == text.size()) break;
      continue;
    }
    if (fields.size() != 3 && fields.size() != 4) {
      throw fail("expected 'r p w' or 'id r p w', got " + std::to_string(fields.size()) + " fields");
    }
    Job job;
    std::size_t first = 0;
    try {
      if (fields.size() == 4) {
        Int id = parse_int(fields[0]);
        if (!id.fits_slong_p()) throw fail("job id out of range");
        job.id = id.get_si();
        first = 1;
      } else {
        job.id = static_cast<JobId>(jobs.size());
      }
      job.release = parse_int(fields[first]);
      job.size = parse_int(fields[first + 1]);
      job.weight = parse_int(fields[first + 2]);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kParse && std::string(e.what()).rfind("line ", 0) != 0) throw fail(e.what());
      throw;
    }
    if (job.release < 0) throw fail("negative release");
    if (job.size < 1) throw fail("non-positive size");
    if (job.weight < 1) throw fail("non-positive weight");
    if (!seen.emplace(job.id, line_no).second) throw fail("duplicate job id " + std::to_string(job.id));
    jobs.push_back(std::move(job));
    if (eol == text.size()) break;
  }
  if (jobs.empty()) throw Error(ErrorCode::kParse, "instance has no jobs");
  return Instance(std::move(jobs));
}

std::string format_instance(const Instance& inst) {
  std::ostringstream out;
  out << "# id release size weight\n";
  for (const Job& j : inst.jobs()) {
    out << j.id << ' ' << j.release << ' ' << j.size << ' ' << j.weight << '\n';
  }
  return out.str();
}

ClassPartition::ClassPartition(std::size_t n, std::map<int, std::vector<JobId>> classes,
                               std::unordered_map<JobId, int> class_of)
    : n_(n), classes_(std::move(classes)), class_of_(std::move(class_of)) {
  for (const auto& [k, ids] : classes_) {
    if (!ids.empty()) max_class_ = std::max(max_class_, k);
  }
}

std::span<const JobId> ClassPartition::members(int k) const {
  auto it = classes_.find(k);
  if (it == classes_.end()) return {};
  return it->second;
}

int ClassPartition::class_of(JobId id) const {
  auto it = class_of_.find(id);
  if (it == class_of_.end()) throw Error(ErrorCode::kStructural, "job " + std::to_string(id) + " has no class");
  return it->second;
}

std::vector<JobId> ClassPartition::members_between(int lo, int hi) const {
  std::vector<JobId> out;
  for (int k = std::max(lo, 1); k <= std::min(hi, max_class_); ++k) {
    auto m = members(k);
    out.insert(out.end(), m.begin(), m.end());
  }
  return out;
}

int size_class(const Int& size, std::size_t n) {
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "class partition needs n >= 2");
  if (size < 1) throw Error(ErrorCode::kInvalidArgument, "class of non-positive size");
  const Int step = pow_int(Int(static_cast<unsigned long>(n)), 3);
  Int upper = step;
  int k = 1;
  while (size >= upper) {
    upper *= step;
    ++k;
  }
  return k;
}

ClassPartition partition_classes(const Instance& inst) {
  const std::size_t n = inst.size();
  std::map<int, std::vector<JobId>> classes;
  std::unordered_map<JobId, int> class_of;
  for (const Job& j : inst.jobs()) {
    int k = size_class(j.size, n);
    classes[k].push_back(j.id);
    class_of.emplace(j.id, k);
  }
  if (!classes.empty()) {
    for (int k = 1; k < classes.rbegin()->first; ++k) classes[k];
  }
  return ClassPartition(n, std::move(classes), std::move(class_of));
}

PruneResult prune_light_jobs(const Instance& inst, const Rational& eps) {
  if (eps <= 0 || eps >= 1) throw Error(ErrorCode::kInvalidArgument, "prune epsilon must lie in (0, 1)");
  const Int n = static_cast<unsigned long>(inst.size());
  const Rational threshold = eps / (Rational(n * n) * inst.spread()) * Rational(inst.max_weight());
  std::vector<Job> keep;
  PruneResult out;
  for (const Job& j : inst.jobs()) {
    if (Rational(j.weight) < threshold) {
      out.pruned.push_back(j);
    } else {
      keep.push_back(j);
    }
  }
  out.core = Instance(std::move(keep));
  return out;
}

Schedule reinsert_pruned(const Schedule& sched, std::span<const Job> pruned) {
  if (pruned.empty()) return sched;
  Availability occupied = Availability::from_schedule(sched);
  std::vector<Job> jobs(pruned.begin(), pruned.end());
  std::vector<std::size_t> by_release(jobs.size());
  for (std::size_t i = 0; i < by_release.size(); ++i) by_release[i] = i;
  std::sort(by_release.begin(), by_release.end(), [&](std::size_t a, std::size_t b) {
    if (jobs[a].release != jobs[b].release) return jobs[a].release < jobs[b].release;
    return jobs[a].id < jobs[b].id;
  });
  std::vector<std::size_t> priority(jobs.size());
  for (std::size_t i = 0; i < by_release.size(); ++i) priority[by_release[i]] = i;
  Schedule low = priority_run(jobs, priority, occupied);
  return sched.merged_with(low);
}

}  // namespace flowstitch
