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

// Jobs, instances, the size-class partition and light-job pruning.

#ifndef FLOWSTITCH_MODEL_HPP
#define FLOWSTITCH_MODEL_HPP

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "common.hpp"

namespace flowstitch {

struct Job {
  JobId id = 0;
  Int release;
  Int size;
  Int weight;
};

/// An immutable set of jobs with unique ids. Releases are nonnegative, sizes
/// and weights positive; the constructor throws kInvalidArgument otherwise.
/// An empty instance is allowed so that empty class windows have a value, but
/// parse_instance never produces one.
class Instance {
 public:
  Instance() = default;
  explicit Instance(std::vector<Job> jobs);

  std::span<const Job> jobs() const { return jobs_; }
  std::size_t size() const { return jobs_.size(); }
  bool empty() const { return jobs_.empty(); }

  const Int& total_size() const { return total_size_; }
  const Int& total_weight() const { return total_weight_; }
  /// max p / min p. Throws on an empty instance.
  Rational spread() const;
  Int max_weight() const;

  bool contains(JobId id) const { return index_.count(id) != 0; }
  const Job& job(JobId id) const;

  /// Jobs whose id is in `ids`, in this instance's order.
  Instance subset(std::span<const JobId> ids) const;

 private:
  std::vector<Job> jobs_;
  std::unordered_map<JobId, std::size_t> index_;
  Int total_size_ = 0;
  Int total_weight_ = 0;
};

/// Parses the text instance format: one job per line as `r p w` (ids follow
/// line order) or `id r p w`, `#` comment lines, blank lines ignored. Errors
/// name the 1-based line.
Instance parse_instance(std::string_view text);
std::string format_instance(const Instance& inst);

/// Class k holds the jobs with n^(3k-3) <= p < n^(3k), where n is the number
/// of jobs in the ambient instance.
class ClassPartition {
 public:
  ClassPartition() = default;
  ClassPartition(std::size_t n, std::map<int, std::vector<JobId>> classes,
                 std::unordered_map<JobId, int> class_of);

  std::size_t n() const { return n_; }
  /// Largest nonempty class index.
  int max_class() const { return max_class_; }
  /// Job ids of class k, empty for k outside [1, max_class()].
  std::span<const JobId> members(int k) const;
  int class_of(JobId id) const;
  /// Union of classes lo..hi (clamped to the populated range).
  std::vector<JobId> members_between(int lo, int hi) const;

 private:
  std::size_t n_ = 0;
  int max_class_ = 0;
  std::map<int, std::vector<JobId>> classes_;
  std::unordered_map<JobId, int> class_of_;
};

/// 1-based class index of size p for ambient job count n >= 2, by exact
/// comparison against successive powers of n^3.
int size_class(const Int& size, std::size_t n);

ClassPartition partition_classes(const Instance& inst);

struct PruneResult {
  Instance core;
  std::vector<Job> pruned;
};

/// Drops jobs with w_j < eps / (n^2 * spread) * max w. The max-weight job is
/// always kept. `eps` must lie in (0, 1).
PruneResult prune_light_jobs(const Instance& inst, const Rational& eps);

class Schedule;

/// Places the pruned jobs at strictly lowest priority: every slot the core
/// schedule uses stays with its core job, and the pruned jobs run in the
/// remaining idle time in (release, id) order.
Schedule reinsert_pruned(const Schedule& sched, std::span<const Job> pruned);

}  // namespace flowstitch

#endif  // FLOWSTITCH_MODEL_HPP
