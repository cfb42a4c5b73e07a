#pragma once

#include <string>

namespace districtsim {

/// Shortest decimal text that parses back to exactly `v`. Throws
/// InvalidParameter for NaN and infinities.
std::string format_double(double v);

/// Same digits as format_double, appended to `out`.
void append_double(std::string& out, double v);

/// Fixed-point text with `digits` decimals, for human-readable reports.
std::string format_fixed(double v, int digits);

}  // namespace districtsim
