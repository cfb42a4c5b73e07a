#include "districtsim/numfmt.hpp"

#include "districtsim/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace districtsim {

void append_double(std::string& out, double v) {
  if (!std::isfinite(v)) throw InvalidParameter("cannot format a non-finite number");
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw InvalidParameter("number formatting failed");
  out.append(buf.data(), end);
}

std::string format_double(double v) {
  std::string s;
  append_double(s, v);
  return s;
}

std::string format_fixed(double v, int digits) {
  if (!std::isfinite(v)) throw InvalidParameter("cannot format a non-finite number");
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, digits);
  if (ec != std::errc{}) throw InvalidParameter("number formatting failed");
  return std::string(buf.data(), end);
}

}  // namespace districtsim
