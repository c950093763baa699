#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace trnglab {

/// Complementary error function.
[[nodiscard]] inline double erfc(double x) noexcept { return std::erfc(x); }

/// Regularised upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
[[nodiscard]] inline double igamc(double a, double x) {
    if (!(a > 0.0)) throw std::domain_error("igamc: a must be positive");
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::gamma_q(a, x);
}

/// Standard normal CDF.
[[nodiscard]] inline double normal_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

} // namespace trnglab
