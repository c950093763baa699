#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace trnglab {

/// Distribution of the per-master-clock counter increment of the degraded
/// (Trojan-triggered) TRNG, in counter LSB units.
///
/// `probs[i]` is P(increment == min_increment + i). The support is contiguous.
struct IncrementPmf {
    double mu_lsb = 0.0;
    double sigma_lsb = 1.0;
    std::int64_t min_increment = 0;
    std::vector<double> probs;

    [[nodiscard]] std::int64_t max_increment() const noexcept {
        return min_increment + static_cast<std::int64_t>(probs.size()) - 1;
    }

    [[nodiscard]] double at(std::int64_t k) const noexcept {
        if (k < min_increment || k > max_increment()) return 0.0;
        return probs[static_cast<std::size_t>(k - min_increment)];
    }

    [[nodiscard]] double mean() const noexcept {
        double m = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i)
            m += probs[i] * static_cast<double>(min_increment + static_cast<std::int64_t>(i));
        return m;
    }

    [[nodiscard]] double total() const noexcept {
        double s = 0.0;
        for (double p : probs) s += p;
        return s;
    }
};

namespace detail {

// Mass of N(mu, sigma^2) on [lo, hi]. Evaluated on the tail nearer to the bin so
// that far-tail bins keep relative precision.
inline double normal_interval_mass(double lo, double hi, double mu, double sigma) {
    const double a = (lo - mu) / sigma;
    const double b = (hi - mu) / sigma;
    constexpr double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    if (a >= 0.0) return 0.5 * (std::erfc(a * inv_sqrt2) - std::erfc(b * inv_sqrt2));
    if (b <= 0.0) return 0.5 * (std::erfc(-b * inv_sqrt2) - std::erfc(-a * inv_sqrt2));
    return 1.0 - 0.5 * std::erfc(-a * inv_sqrt2) - 0.5 * std::erfc(b * inv_sqrt2);
}

} // namespace detail

/// Unit-bin discretisation of N(mu, sigma^2): P(k) = Phi((k+.5-mu)/sigma) - Phi((k-.5-mu)/sigma),
/// keeping every integer k with mass >= 1e-12 and renormalising the kept bins to sum to 1.
inline IncrementPmf build_increment_pmf(double mu_lsb, double sigma_lsb) {
    if (!(sigma_lsb > 0.0) || !std::isfinite(sigma_lsb) || !std::isfinite(mu_lsb))
        throw std::invalid_argument("build_increment_pmf: sigma must be positive and finite");

    constexpr double min_mass = 1e-12;
    // 8 sigma on each side is far below min_mass; the +1 covers the bin half-width.
    const auto lo = static_cast<std::int64_t>(std::floor(mu_lsb - 8.0 * sigma_lsb)) - 1;
    const auto hi = static_cast<std::int64_t>(std::ceil(mu_lsb + 8.0 * sigma_lsb)) + 1;

    std::vector<double> mass;
    mass.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t k = lo; k <= hi; ++k) {
        const double kd = static_cast<double>(k);
        mass.push_back(detail::normal_interval_mass(kd - 0.5, kd + 0.5, mu_lsb, sigma_lsb));
    }

    std::size_t first = 0;
    while (first < mass.size() && mass[first] < min_mass) ++first;
    std::size_t last = mass.size();
    while (last > first && mass[last - 1] < min_mass) --last;
    if (first == last) throw std::invalid_argument("build_increment_pmf: empty support");

    IncrementPmf pmf;
    pmf.mu_lsb = mu_lsb;
    pmf.sigma_lsb = sigma_lsb;
    pmf.min_increment = lo + static_cast<std::int64_t>(first);
    pmf.probs.assign(mass.begin() + static_cast<std::ptrdiff_t>(first),
                     mass.begin() + static_cast<std::ptrdiff_t>(last));
    const double total = pmf.total();
    for (double& p : pmf.probs) p /= total;
    return pmf;
}

} // namespace trnglab
