#pragma once

#include <numbers>

// Internal unit system: angular frequencies in rad/us, times in us, powers in
// mW. A cyclic frequency of 1 MHz is therefore 2*pi rad/us.
namespace dicke::units {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

constexpr double Hz(double f) { return two_pi * f * 1e-6; }
constexpr double kHz(double f) { return two_pi * f * 1e-3; }
constexpr double MHz(double f) { return two_pi * f; }
constexpr double GHz(double f) { return two_pi * f * 1e3; }

// Inverse of MHz(): angular rad/us back to cyclic MHz, for reporting.
constexpr double to_MHz(double w) { return w / two_pi; }

constexpr double us(double t) { return t; }
constexpr double ms(double t) { return t * 1e3; }

constexpr double per_us_to_per_ms(double r) { return r * 1e3; }

} // namespace dicke::units
