#include "atm/format.hpp"

#include <charconv>
#include <cmath>

namespace atm {

std::string fixed(double value, int decimals) {
  if (value == 0.0) value = 0.0;  // folds -0.0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, decimals);
  std::string out(buf, res.ptr);
  if (out.front() == '-' && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);
  return out;
}

double round_significant(double value, int digits) {
  if (value == 0.0 || !std::isfinite(value)) return value;
  char buf[64];
  const auto res =
      std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific, digits - 1);
  double out = value;
  std::from_chars(buf, res.ptr, out);
  return out;
}

}  // namespace atm
