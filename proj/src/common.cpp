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

#include "common.hpp"

#include <cctype>

namespace flowstitch {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

std::string to_string(const Rational& v) {
  if (v.get_den() == 1) return v.get_num().get_str();
  return v.get_num().get_str() + "/" + v.get_den().get_str();
}

Int parse_int(std::string_view text) {
  std::string_view body = text;
  bool negative = false;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  if (!all_digits(body)) {
    throw Error(ErrorCode::kParse, "not an integer: '" + std::string(text) + "'");
  }
  Int v(std::string(body), 10);
  return negative ? Int(-v) : v;
}

Rational parse_rational(std::string_view text) {
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Int num = parse_int(text.substr(0, slash));
    Int den = parse_int(text.substr(slash + 1));
    if (den == 0) throw Error(ErrorCode::kParse, "zero denominator in '" + std::string(text) + "'");
    Rational q(num, den);
    q.canonicalize();
    return q;
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = text.substr(dot + 1);
    bool negative = !whole.empty() && whole.front() == '-';
    if (negative || (!whole.empty() && whole.front() == '+')) whole.remove_prefix(1);
    if (whole.empty()) whole = "0";
    if (frac.empty() || !all_digits(frac) || !all_digits(whole)) {
      throw Error(ErrorCode::kParse, "not a decimal: '" + std::string(text) + "'");
    }
    Int scale = pow_int(10, frac.size());
    Rational q(Int(std::string(whole), 10) * scale + Int(std::string(frac), 10), scale);
    q.canonicalize();
    return negative ? Rational(-q) : q;
  }
  return Rational(parse_int(text));
}

Int ceil_div(const Int& a, const Int& b) {
  Int q;
  mpz_cdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

Int pow_int(const Int& base, unsigned long exp) {
  Int r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), exp);
  return r;
}

unsigned long floor_log2(const Int& v) {
  if (v < 1) throw Error(ErrorCode::kInvalidArgument, "floor_log2 of non-positive value");
  return mpz_sizeinbase(v.get_mpz_t(), 2) - 1;
}

Int ceil_sqrt(const Int& v) {
  Int r;
  mpz_sqrt(r.get_mpz_t(), v.get_mpz_t());
  if (r * r < v) ++r;
  return r;
}

std::string to_decimal(const Rational& v, int digits) {
  Int scale = pow_int(10, static_cast<unsigned long>(digits));
  Int scaled;
  Int num = v.get_num() * scale;
  mpz_tdiv_q(scaled.get_mpz_t(), num.get_mpz_t(), v.get_den().get_mpz_t());
  bool negative = scaled < 0;
  if (negative) scaled = -scaled;
  std::string s = scaled.get_str();
  if (static_cast<int>(s.size()) <= digits) s.insert(0, digits + 1 - s.size(), '0');
  if (digits > 0) s.insert(s.size() - digits, ".");
  return negative ? "-" + s : s;
}

}  // namespace flowstitch
