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

// Random instances, lower bounds and ratio sweeps.

#ifndef FLOWSTITCH_BENCH_HPP
#define FLOWSTITCH_BENCH_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "model.hpp"
#include "schedule.hpp"
#include "stitch.hpp"

namespace flowstitch {

struct GenSpec {
  std::size_t n = 16;
  int classes = 3;              // size classes to populate, 1..classes
  unsigned long max_weight = 10;
  // Releases are uniform on [0, floor(density * P)]; 0 puts every release at 0.
  Rational density = Rational(1, 2);
  std::uint64_t seed = 1;
};

/// Throws kInvalidArgument unless 1 <= classes <= n and max_weight >= 1.
void check_gen_spec(const GenSpec& spec);

/// Each of the first `classes` jobs lands in its own class; the rest pick a
/// class uniformly. Within a class the bit length is uniform, so sizes are
/// log-uniform. Ids are 0..n-1 in release order.
Instance gen_random(const GenSpec& spec);

/// Uniform on [0, bound) using whole 64-bit draws.
Int uniform_below(const Int& bound, std::mt19937_64& rng);

/// Sum of w p.
Int lower_bound_trivial(const Instance& inst);

/// How a bench token maps onto a solver: `ALG` runs the sub-solver directly,
/// `standard:ALG` and `windowed:ALG` stitch it.
struct SolverSpec {
  std::string token;
  std::optional<StitchMode> mode;
  std::string alg;
};

SolverSpec parse_solver_token(const std::string& token);

struct SolveOptions {
  StitchConfig stitch;          // eps, gamma, window for windowed tokens
  std::size_t exact_limit = kDefaultExactLimit;
};

/// Runs one token on one instance and validates the schedule; throws on an
/// invalid schedule.
StitchResult solve_with(const SolverSpec& spec, const Instance& inst, const SolveOptions& opts);

enum class BoundKind { kAuto, kTrivial };

struct BenchOptions {
  SolveOptions solve;
  BoundKind bound = BoundKind::kAuto;  // auto: exact optimum when n <= exact_limit
  bool parallel = true;
};

struct NamedInstance {
  std::string id;
  Instance inst;
};

struct BenchRow {
  std::string instance;
  std::string solver;
  bool ok = false;
  std::string message;  // error text when !ok
  Int wf = 0;
  Int lower_bound = 0;
  std::string bound;    // "opt" or "trivial"
  Rational ratio = 0;
  double wall_ms = 0;
};

std::vector<BenchRow> run_bench(const std::vector<NamedInstance>& instances,
                                const std::vector<std::string>& solvers, const BenchOptions& opts = {});

std::string bench_csv(const std::vector<BenchRow>& rows);

/// Per solver: rows, failures, min / median / max ratio.
std::string bench_summary(const std::vector<BenchRow>& rows);

/// Every regular file in `dir` ending in .txt, sorted by name, id = stem.
std::vector<NamedInstance> load_corpus(const std::string& dir);

}  // namespace flowstitch

#endif  // FLOWSTITCH_BENCH_HPP
