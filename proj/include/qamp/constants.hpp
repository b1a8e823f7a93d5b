#pragma once

#include <complex>
#include <numbers>

namespace qamp {

using cd = std::complex<double>;

inline constexpr double c_light = 299792458.0;
inline constexpr double hbar = 1.054571817e-34;
inline constexpr double k_B = 1.380649e-23;
inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr cd I{0.0, 1.0};

}  // namespace qamp
