#pragma once

#include <string>

namespace atm {

/// Fixed-point text with exactly `decimals` digits after the point,
/// independent of the C locale.
std::string fixed(double value, int decimals);

/// value rounded to `digits` significant decimal digits.
double round_significant(double value, int digits);

}  // namespace atm
