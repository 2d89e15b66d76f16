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

// Spread reduction by stitching.
//
// Jobs are split into size classes J_1..J_K (see partition_classes). A
// sub-solver schedules each window of consecutive classes on its own; those
// window schedules have bounded spread. The driver then builds the schedule
// for classes 1..k from the one for lower classes and the window schedule
// S_k:
//
//   * lower-class segments are frozen and become busy time,
//   * every window job gets a tentative deadline from its completion times,
//   * intervals (r, d] whose contained demand exceeds their free time are
//     "dangerous"; they become points of a rectangle cover instance,
//   * the cover decides how far to push the deadlines of big jobs, plus a
//     slack of Q (the frozen volume) on every pushed deadline,
//   * EDF over the free time then meets every final deadline.
//
// Standard mode uses windows of two classes; windowed mode uses b + 1 classes,
// stitches 𝐒_k from 𝐒_{k-b}, and returns the cheapest of the b full
// schedules it ends with.

#ifndef FLOWSTITCH_STITCH_HPP
#define FLOWSTITCH_STITCH_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "model.hpp"
#include "schedule.hpp"
#include "setcover.hpp"
#include "subsolver.hpp"

namespace flowstitch {

enum class StitchMode { kStandard, kWindowed };

struct DeadlineRecord {
  Int tentative;
  Int extended;
  Int final;
};

using DeadlineRecords = std::map<JobId, DeadlineRecord>;

struct StitchConfig {
  // Standard mode ignores the remaining fields.
  StitchMode mode = StitchMode::kStandard;
  Rational eps = Rational(1, 4);
  unsigned long gamma = 4;
  // Explicit window b for windowed mode; 0 derives it from eps and gamma.
  int window = 0;
  bool parallel = true;
};

struct StepReport {
  int k = 0;
  std::size_t window_jobs = 0;
  Int q = 0;
  std::size_t dangerous = 0;
  std::size_t big_jobs = 0;
  Rational frac_cost = 0;
  Int cover_cost = 0;
  Int ext_cost = 0;
  Int big_wp = 0;             // sum over big jobs of w p
  Int fixed_ext_cost = 0;     // windowed: sum of w * ceil(p / ceil(sqrt n))
  Int wf_prev = 0;            // wF of the schedule this step extends
  Int wf_sub = 0;             // wF(S_k)
  Int wf_bold = 0;            // wF of the result
  std::size_t shortfalls = 0; // points the fractional solution covers < 1
  bool cover_within_harmonic = true;
};

struct StitchReport {
  StitchMode mode = StitchMode::kStandard;
  std::string alg;
  std::size_t n = 0;
  int classes = 0;
  int window = 1;
  unsigned long gamma = 0;
  Rational eps = 0;
  std::vector<StepReport> steps;
  Int wf_total = 0;
  Int wf_sub_sum = 0;   // sum of wF over the sub-solver schedules used
  Int ext_sum = 0;
  // Windowed: wF of each final candidate 𝐒_z, z = K..K+b-1, and the pick.
  std::vector<std::pair<int, Int>> candidates;
  int chosen = 0;
};

/// Everything one stitch step produced, for tests and diagnostics.
struct StepTrace {
  int k = 0;
  StitchMode mode = StitchMode::kStandard;
  std::vector<JobId> frozen;
  std::vector<JobId> carry;
  std::vector<JobId> fresh;
  std::vector<Job> window_jobs;
  Availability avail;
  Int q;
  std::vector<JobId> big;
  std::vector<CoverPoint> dangerous;
  R2CInstance r2c;
  FractionalSolution fractional;
  CoverSolution cover;
  DeadlineRecords records;
  Schedule prev;
  Schedule sub;
  Schedule result;
};

using StepObserver = std::function<void(const StepTrace&)>;

struct StitchResult {
  Schedule schedule;
  StitchReport report;
};

struct SubInstance {
  int k = 0;
  Instance inst;
};

/// Window k holds classes k-width+1..k; k runs from width to last_k, and
/// windows past K are truncated.
std::vector<SubInstance> build_subinstances(const Instance& inst, const ClassPartition& part, int width,
                                            int last_k);

/// Carry jobs: max of both completion times; fresh jobs: completion in S_k.
std::map<JobId, Int> tentative_deadlines(const Schedule& prev, const Schedule& sub,
                                         std::span<const JobId> carry, std::span<const JobId> fresh);

/// Total size of the jobs in classes below `below`.
Int occupied_volume(const Instance& inst, const ClassPartition& part, int below);

/// Relevant intervals over tentative deadlines whose contained demand
/// exceeds their free time.
std::vector<CoverPoint> find_dangerous(std::span<const Job> jobs, const std::map<JobId, Int>& tent,
                                       const Availability& avail);

/// Smallest L with 2^L >= n^7, i.e. ceil(7 log2 n).
int max_level(std::size_t n);

/// ceil(p / ceil(sqrt n)).
Int fixed_extension(const Int& size, std::size_t n);

/// Rectangles for `leveled` jobs at levels 0..max_level(n) with cost
/// 2^l w p, and one fixed level-0 rectangle per `fixed` job extending its
/// deadline by fixed_extension. Throws kStructural if a point is left
/// uncoverable.
R2CInstance build_cover_instance(std::vector<CoverPoint> dangerous, std::span<const Job> leveled,
                                 std::span<const Job> fixed, const std::map<JobId, Int>& tent, std::size_t n,
                                 StitchMode mode);

/// Extended deadline of a job with selected rectangles is the largest
/// selected y_max; its final deadline adds Q. Other jobs keep the tentative
/// deadline. Throws kStructural if a job in `must_extend` has no selection.
DeadlineRecords extend_deadlines(const R2CInstance& r2c, const CoverSolution& sol, std::span<const Job> jobs,
                                 const std::map<JobId, Int>& tent, const Int& q,
                                 std::span<const JobId> must_extend);

FeasibilityVerdict verify_final_safety(std::span<const Job> jobs, const DeadlineRecords& rec,
                                       const Availability& avail);

/// EDF of `jobs` by final deadline in the time `lower` leaves free, merged
/// with `lower`. Throws kInternal on a missed deadline.
Schedule insert_jobs(const Schedule& lower, std::span<const Job> jobs, const DeadlineRecords& rec);

StitchResult run_standard(const Instance& inst, const SubSolver& alg, const StitchConfig& cfg = {},
                          const StepObserver& observe = {});

/// Window width from eps and gamma: the least b with b (eps - 1/sqrt n) >=
/// 4 gamma. Throws kInvalidArgument when eps <= 1/sqrt n.
int window_for(const Rational& eps, unsigned long gamma, std::size_t n);

StitchResult run_windowed(const Instance& inst, const SubSolver& alg, const StitchConfig& cfg,
                          const StepObserver& observe = {});

/// Dispatches on cfg.mode.
StitchResult run_stitch(const Instance& inst, const SubSolver& alg, const StitchConfig& cfg,
                        const StepObserver& observe = {});

/// One row per step: k,n_k,Q,dangerous,frac_cost,cover_cost,ext_cost,wF_Sk,wF_bold
std::string report_csv(const StitchReport& report);
std::string report_summary(const StitchReport& report);

}  // namespace flowstitch

#endif  // FLOWSTITCH_STITCH_HPP
