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

// Weighted cover of points by rectangles abutting the y-axis.
//
// A point (t1, t2) stands for the dangerous interval (t1, t2]. The rectangle
// of job j at level l is (0, r_j] x [d_j, d_j + 2^l p_j): it covers exactly
// the intervals that contain j's window under its current deadline d_j but
// would no longer contain it once the deadline moves to d_j + 2^l p_j.

#ifndef FLOWSTITCH_SETCOVER_HPP
#define FLOWSTITCH_SETCOVER_HPP

#include <string>
#include <string_view>
#include <vector>

#include "common.hpp"

namespace flowstitch {

struct CoverPoint {
  Int t1;
  Int t2;
  friend bool operator==(const CoverPoint&, const CoverPoint&) = default;
};

struct CoverRect {
  JobId owner = 0;
  int level = 0;
  Int x_max;  // r_j
  Int y_min;  // tentative deadline
  Int y_max;  // tentative deadline + extension
  Int cost;
  // Deterministic extensions carry fractional weight 1 regardless of level.
  bool fixed = false;
};

struct R2CInstance {
  std::vector<CoverPoint> points;
  std::vector<CoverRect> rects;
  std::size_t n = 0;          // job count of the ambient instance
  unsigned long scale = 4;    // numerator of the level weights scale / (2^l log n)
};

bool covers(const CoverRect& rect, const CoverPoint& pt);

/// 1 at level 0, else min(1, scale / (2^level * lg n)) where lg n is log2 n
/// when n is a power of two and floor(log2 n) otherwise.
Rational fractional_weight(int level, std::size_t n, unsigned long scale = 4);

struct FractionalSolution {
  std::vector<Rational> weights;  // aligned with R2CInstance::rects
  Rational cost;
};

FractionalSolution build_fractional(const R2CInstance& r2c);

struct Shortfall {
  std::size_t point = 0;
  Rational mass;
};

struct FractionalVerdict {
  bool ok = true;
  std::vector<Shortfall> shortfalls;
};

/// Every point must receive total weight >= 1 from the rectangles covering it.
FractionalVerdict verify_fractional_cover(const R2CInstance& r2c, const FractionalSolution& x);

struct CoverSolution {
  std::vector<std::size_t> selected;  // indices into R2CInstance::rects, ascending
  Int cost = 0;
};

/// Selects every level-0 rectangle, then repeatedly the rectangle of least
/// cost per newly covered point. Throws kStructural if a point cannot be
/// covered by any rectangle.
CoverSolution greedy_cover(const R2CInstance& r2c);

struct CoverVerdict {
  bool ok = true;
  std::string message;
};

/// Every point covered by a selected rectangle and the recorded cost matches.
CoverVerdict verify_cover(const R2CInstance& r2c, const CoverSolution& sol);

/// Indices of points no rectangle covers.
std::vector<std::size_t> uncoverable_points(const R2CInstance& r2c);

/// H_m = 1 + 1/2 + ... + 1/m, with H_0 taken as 1.
Rational harmonic(std::size_t m);

/// Text form: `n N`, `scale S`, then `point t1 t2`, `rect j l x_max y_min
/// y_max cost [fixed]` and optional `select j l` lines.
std::string format_r2c(const R2CInstance& r2c, const CoverSolution* sol = nullptr);

struct ParsedR2C {
  R2CInstance instance;
  bool has_selection = false;
  CoverSolution selection;
};

/// Parses one or more instances; a line `step K` starts a new one.
std::vector<ParsedR2C> parse_r2c(std::string_view text);

}  // namespace flowstitch

#endif  // FLOWSTITCH_SETCOVER_HPP
