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

#include "setcover.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <sstream>

namespace flowstitch {

bool covers(const CoverRect& rect, const CoverPoint& pt) {
  return pt.t1 <= rect.x_max && rect.y_min <= pt.t2 && pt.t2 < rect.y_max;
}

Rational fractional_weight(int level, std::size_t n, unsigned long scale) {
  if (level < 0) throw Error(ErrorCode::kInvalidArgument, "negative level");
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "fractional weights need n >= 2");
  if (level == 0) return Rational(1);
  // floor(log2 n) is exact for powers of two and rounds down otherwise, which
  // only raises the weight.
  const Int lg = static_cast<unsigned long>(floor_log2(Int(static_cast<unsigned long>(n))));
  Rational w(Int(scale), pow_int(2, static_cast<unsigned long>(level)) * lg);
  w.canonicalize();
  return w > 1 ? Rational(1) : w;
}

FractionalSolution build_fractional(const R2CInstance& r2c) {
  FractionalSolution x;
  x.weights.reserve(r2c.rects.size());
  x.cost = 0;
  for (const CoverRect& r : r2c.rects) {
    Rational w = r.fixed ? Rational(1) : fractional_weight(r.level, r2c.n, r2c.scale);
    x.cost += w * r.cost;
    x.weights.push_back(std::move(w));
  }
  return x;
}

FractionalVerdict verify_fractional_cover(const R2CInstance& r2c, const FractionalSolution& x) {
  if (x.weights.size() != r2c.rects.size()) {
    throw Error(ErrorCode::kInvalidArgument, "fractional solution does not match the rectangles");
  }
  FractionalVerdict verdict;
  for (std::size_t p = 0; p < r2c.points.size(); ++p) {
    Rational mass = 0;
    for (std::size_t r = 0; r < r2c.rects.size(); ++r) {
      if (covers(r2c.rects[r], r2c.points[p])) mass += x.weights[r];
      if (mass >= 1) break;
    }
    if (mass < 1) {
      verdict.ok = false;
      verdict.shortfalls.push_back({p, mass});
    }
  }
  return verdict;
}

std::vector<std::size_t> uncoverable_points(const R2CInstance& r2c) {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < r2c.points.size(); ++p) {
    bool hit = std::any_of(r2c.rects.begin(), r2c.rects.end(),
                           [&](const CoverRect& r) { return covers(r, r2c.points[p]); });
    if (!hit) out.push_back(p);
  }
  return out;
}

CoverSolution greedy_cover(const R2CInstance& r2c) {
  const std::size_t m = r2c.points.size();
  const std::size_t nr = r2c.rects.size();
  std::vector<std::vector<std::size_t>> hits(nr);
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t p = 0; p < m; ++p) {
      if (covers(r2c.rects[r], r2c.points[p])) hits[r].push_back(p);
    }
  }

  CoverSolution sol;
  std::vector<bool> covered(m, false);
  std::vector<bool> chosen(nr, false);
  std::size_t open = m;
  auto take = [&](std::size_t r) {
    chosen[r] = true;
    sol.selected.push_back(r);
    sol.cost += r2c.rects[r].cost;
    for (std::size_t p : hits[r]) {
      if (!covered[p]) {
        covered[p] = true;
        --open;
      }
    }
  };
  for (std::size_t r = 0; r < nr; ++r) {
    if (r2c.rects[r].level == 0) take(r);
  }

  auto fresh = [&](std::size_t r) {
    std::size_t c = 0;
    for (std::size_t p : hits[r]) c += covered[p] ? 0 : 1;
    return c;
  };
  // Lazy evaluation: a rectangle's count of uncovered points only decreases,
  // so a stale heap entry is an optimistic estimate and is refreshed on pop.
  struct Entry {
    std::size_t rect;
    std::size_t count;
  };
  auto worse = [&](const Entry& a, const Entry& b) {
    Int lhs = r2c.rects[a.rect].cost * static_cast<unsigned long>(b.count);
    Int rhs = r2c.rects[b.rect].cost * static_cast<unsigned long>(a.count);
    if (lhs != rhs) return lhs > rhs;
    return a.rect > b.rect;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
  for (std::size_t r = 0; r < nr; ++r) {
    if (chosen[r]) continue;
    if (std::size_t c = fresh(r); c > 0) heap.push({r, c});
  }
  while (open > 0 && !heap.empty()) {
    Entry top = heap.top();
    heap.pop();
    std::size_t c = fresh(top.rect);
    if (c == 0) continue;
    if (c != top.count) {
      heap.push({top.rect, c});
      continue;
    }
    take(top.rect);
  }
  if (open > 0) {
    std::size_t p = static_cast<std::size_t>(std::find(covered.begin(), covered.end(), false) - covered.begin());
    throw Error(ErrorCode::kStructural, "point (" + to_string(r2c.points[p].t1) + ", " +
                                            to_string(r2c.points[p].t2) + ") cannot be covered");
  }
  std::sort(sol.selected.begin(), sol.selected.end());
  return sol;
}

CoverVerdict verify_cover(const R2CInstance& r2c, const CoverSolution& sol) {
  Int cost = 0;
  for (std::size_t r : sol.selected) {
    if (r >= r2c.rects.size()) return {false, "selected rectangle " + std::to_string(r) + " does not exist"};
    cost += r2c.rects[r].cost;
  }
  for (std::size_t p = 0; p < r2c.points.size(); ++p) {
    bool hit = std::any_of(sol.selected.begin(), sol.selected.end(),
                           [&](std::size_t r) { return covers(r2c.rects[r], r2c.points[p]); });
    if (!hit) {
      return {false, "point " + std::to_string(p) + " (" + to_string(r2c.points[p].t1) + ", " +
                         to_string(r2c.points[p].t2) + ") is not covered"};
    }
  }
  if (cost != sol.cost) {
    return {false, "recorded cost " + to_string(sol.cost) + " differs from recomputed " + to_string(cost)};
  }
  return {};
}

Rational harmonic(std::size_t m) {
  if (m == 0) return Rational(1);
  Rational h = 0;
  for (std::size_t i = 1; i <= m; ++i) h += Rational(1, static_cast<unsigned long>(i));
  return h;
}

std::string format_r2c(const R2CInstance& r2c, const CoverSolution* sol) {
  std::ostringstream out;
  out << "n " << r2c.n << '\n' << "scale " << r2c.scale << '\n';
  for (const CoverPoint& p : r2c.points) out << "point " << p.t1 << ' ' << p.t2 << '\n';
  for (const CoverRect& r : r2c.rects) {
    out << "rect " << r.owner << ' ' << r.level << ' ' << r.x_max << ' ' << r.y_min << ' ' << r.y_max << ' '
        << r.cost << (r.fixed ? " fixed" : "") << '\n';
  }
  if (sol != nullptr) {
    for (std::size_t i : sol->selected) out << "select " << r2c.rects[i].owner << ' ' << r2c.rects[i].level << '\n';
    out << "cover_cost " << sol->cost << '\n';
  }
  return out.str();
}

std::vector<ParsedR2C> parse_r2c(std::string_view text) {
  std::vector<ParsedR2C> out;
  std::vector<std::pair<JobId, int>> pending;
  bool have_cost = false;
  std::size_t line_no = 0;

  auto finish = [&]() {
    if (out.empty()) return;
    ParsedR2C& cur = out.back();
    std::map<std::pair<JobId, int>, std::size_t> where;
    for (std::size_t i = 0; i < cur.instance.rects.size(); ++i) {
      where.emplace(std::make_pair(cur.instance.rects[i].owner, cur.instance.rects[i].level), i);
    }
    Int sum = 0;
    for (const auto& key : pending) {
      auto it = where.find(key);
      if (it == where.end()) {
        throw Error(ErrorCode::kParse, "selection names missing rectangle (" + std::to_string(key.first) + ", " +
                                           std::to_string(key.second) + ")");
      }
      cur.selection.selected.push_back(it->second);
      sum += cur.instance.rects[it->second].cost;
    }
    std::sort(cur.selection.selected.begin(), cur.selection.selected.end());
    if (!have_cost) cur.selection.cost = sum;
    pending.clear();
    have_cost = false;
  };
  auto current = [&]() -> ParsedR2C& {
    if (out.empty()) out.emplace_back();
    return out.back();
  };

  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    std::istringstream tok(line);
    std::vector<std::string> f;
    for (std::string s; tok >> s;) f.push_back(s);
    if (f.empty() || f[0].front() == '#') continue;
    auto fail = [&](const std::string& msg) {
      return Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": " + msg);
    };
    auto need = [&](std::size_t k) {
      if (f.size() != k) throw fail("expected " + std::to_string(k - 1) + " values after '" + f[0] + "'");
    };
    try {
      if (f[0] == "step") {
        finish();
        out.emplace_back();
      } else if (f[0] == "n") {
        need(2);
        current().instance.n = parse_int(f[1]).get_ui();
      } else if (f[0] == "scale") {
        need(2);
        current().instance.scale = parse_int(f[1]).get_ui();
      } else if (f[0] == "point") {
        need(3);
        current().instance.points.push_back({parse_int(f[1]), parse_int(f[2])});
      } else if (f[0] == "rect") {
        if (f.size() != 7 && !(f.size() == 8 && f[7] == "fixed")) throw fail("malformed rect");
        CoverRect r{parse_int(f[1]).get_si(), static_cast<int>(parse_int(f[2]).get_si()),
                    parse_int(f[3]), parse_int(f[4]), parse_int(f[5]), parse_int(f[6]), f.size() == 8};
        current().instance.rects.push_back(std::move(r));
      } else if (f[0] == "select") {
        need(3);
        current().has_selection = true;
        pending.emplace_back(parse_int(f[1]).get_si(), static_cast<int>(parse_int(f[2]).get_si()));
      } else if (f[0] == "cover_cost") {
        need(2);
        current().selection.cost = parse_int(f[1]);
        current().has_selection = true;
        have_cost = true;
      } else {
        throw fail("unknown record '" + f[0] + "'");
      }
    } catch (const Error& e) {
      if (std::string(e.what()).rfind("line ", 0) == 0) throw;
      throw fail(e.what());
    }
  }
  finish();
  return out;
}

}  // namespace flowstitch
