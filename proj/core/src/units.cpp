#include "otamm/units.hpp"

#include <charconv>
#include <cmath>

#include "otamm/errors.hpp"

namespace otamm {

namespace {

double suffix_scale(std::string_view s) {
  if (s.empty()) return 1.0;
  if (s == "\xC2\xB5" || s == "\xCE\xBC") return 1e-6;  // micro sign, greek mu
  if (s.size() != 1) return 0.0;
  switch (s[0]) {
    case 'f': return 1e-15;
    case 'p': return 1e-12;
    case 'n': return 1e-9;
    case 'u': return 1e-6;
    case 'm': return 1e-3;
    case 'k': return 1e3;
    case 'M': return 1e6;
    case 'G': return 1e9;
    default: return 0.0;
  }
}

}  // namespace

double parse_eng(std::string_view text) {
  auto fail = [&] { throw ParseError("invalid value '" + std::string(text) + "'"); };
  if (text.empty()) fail();
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr == first) fail();
  // "1e" without exponent digits is consumed as far as from_chars goes; reject
  // anything left that is not a known suffix.
  double k = suffix_scale(std::string_view(ptr, last - ptr));
  if (k == 0.0) fail();
  v *= k;
  if (!std::isfinite(v)) fail();
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace otamm
