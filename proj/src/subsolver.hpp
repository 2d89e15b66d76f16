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

// Bounded-spread solvers plugged into the stitching driver.

#ifndef FLOWSTITCH_SUBSOLVER_HPP
#define FLOWSTITCH_SUBSOLVER_HPP

#include <memory>
#include <span>
#include <string>

#include "model.hpp"
#include "schedule.hpp"

namespace flowstitch {

/// A solver for min weighted flow-time on one machine with preemption. The
/// returned schedule must be valid for `inst` with every slot available.
/// Implementations are stateless; solve() may be called concurrently.
class SubSolver {
 public:
  virtual ~SubSolver() = default;
  virtual Schedule solve(const Instance& inst) const = 0;
  virtual std::string name() const = 0;
  virtual bool is_exact() const = 0;
};

/// Runs the released unfinished job that comes first in `order` (job ids).
Schedule priority_simulate(const Instance& inst, std::span<const JobId> order);

inline constexpr std::size_t kDefaultExactLimit = 8;
inline constexpr long kDefaultUnitSlotLimit = 12;

/// Minimum over all n! priority orders. Some priority order is optimal: EDF
/// with deadlines set to the optimal completion times meets them.
/// Throws kTooLarge above `max_jobs`.
Schedule exact_oracle(const Instance& inst, std::size_t max_jobs = kDefaultExactLimit);

/// Exhaustive search over unit slots up to max r + P, idling allowed.
/// Independent of the priority argument. Throws kTooLarge when P exceeds
/// `max_total_size`.
Schedule unitslot_oracle(const Instance& inst, long max_total_size = kDefaultUnitSlotLimit);

/// Highest density w/p first, ties by smaller p then smaller id.
Schedule hdf_heuristic(const Instance& inst);

class ExactSolver final : public SubSolver {
 public:
  explicit ExactSolver(std::size_t max_jobs = kDefaultExactLimit) : max_jobs_(max_jobs) {}
  Schedule solve(const Instance& inst) const override { return exact_oracle(inst, max_jobs_); }
  std::string name() const override { return "exact"; }
  bool is_exact() const override { return true; }

 private:
  std::size_t max_jobs_;
};

class UnitSlotSolver final : public SubSolver {
 public:
  explicit UnitSlotSolver(long max_total = kDefaultUnitSlotLimit) : max_total_(max_total) {}
  Schedule solve(const Instance& inst) const override { return unitslot_oracle(inst, max_total_); }
  std::string name() const override { return "unitslot"; }
  bool is_exact() const override { return true; }

 private:
  long max_total_;
};

class HdfSolver final : public SubSolver {
 public:
  Schedule solve(const Instance& inst) const override { return hdf_heuristic(inst); }
  std::string name() const override { return "hdf"; }
  bool is_exact() const override { return false; }
};

/// "exact", "unitslot" or "hdf"; throws kInvalidArgument otherwise.
std::unique_ptr<SubSolver> make_subsolver(const std::string& name,
                                          std::size_t exact_limit = kDefaultExactLimit);

}  // namespace flowstitch

#endif  // FLOWSTITCH_SUBSOLVER_HPP
