#pragma once

// Physical constants and unit conversions. Everything inside the library is
// SI (kelvin, seconds, watts, kilograms); degrees Celsius and kWh only appear
// at file and report boundaries.

namespace districtsim {

inline constexpr double kZeroCelsius = 273.15;      // K
inline constexpr double kCpWater = 4186.0;          // J/(kg K)
inline constexpr double kRhoWater = 1000.0;         // kg/m3
inline constexpr double kCpAir = 1012.0;            // J/(kg K)
inline constexpr double kRhoAir = 1.2;              // kg/m3
inline constexpr double kSecondsPerHour = 3600.0;
inline constexpr double kSecondsPerDay = 86400.0;
inline constexpr double kJoulesPerKwh = 3.6e6;
inline constexpr int kDaysPerYear = 365;

constexpr double to_kelvin(double celsius) { return celsius + kZeroCelsius; }
constexpr double to_celsius(double kelvin) { return kelvin - kZeroCelsius; }
constexpr double joules_to_kwh(double joules) { return joules / kJoulesPerKwh; }

}  // namespace districtsim
