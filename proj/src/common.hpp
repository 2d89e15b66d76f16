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

#ifndef FLOWSTITCH_COMMON_HPP
#define FLOWSTITCH_COMMON_HPP

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace flowstitch {

// Times, sizes, weights and costs. Instances may carry sizes around 2^n, so
// nothing in the library is fixed-width.
using Int = mpz_class;
using Rational = mpq_class;

using JobId = std::int64_t;

enum class ErrorCode {
  kParse = 1,
  kInvalidArgument,
  kTooLarge,
  kStructural,
  kInternal,
  kIo,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string to_string(const Int& v) { return v.get_str(); }
std::string to_string(const Rational& v);

// Decimal digits, optional leading '-'. Throws kParse on anything else.
Int parse_int(std::string_view text);

// Accepts "a", "a/b" or a decimal "x.yz"; the result is exact.
Rational parse_rational(std::string_view text);

// ceil(a / b) for b > 0.
Int ceil_div(const Int& a, const Int& b);

Int pow_int(const Int& base, unsigned long exp);

// floor(log2 v) for v >= 1.
unsigned long floor_log2(const Int& v);

// Smallest s with s*s >= v, v >= 0.
Int ceil_sqrt(const Int& v);

// Decimal rendering with `digits` fractional digits, truncated.
std::string to_decimal(const Rational& v, int digits = 6);

}  // namespace flowstitch

#endif  // FLOWSTITCH_COMMON_HPP
