#pragma once

// Summary statistics and distribution fits for collapse-count samples.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/inverse_gaussian.hpp>

#include "ro_sim.hpp"

namespace trnglab {

struct CollapseSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;   // unbiased
    double censor_rate = 0.0;
};

/// Mean and variance over all counts; censored samples enter at the saturated value.
[[nodiscard]] inline CollapseSummary summarize(std::span<const CollapseSample> samples) {
    CollapseSummary s;
    s.n = samples.size();
    if (s.n == 0) return s;
    std::size_t censored = 0;
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t k = 0;
    for (const auto& x : samples) {
        censored += x.censored;
        const double v = x.count;
        ++k;
        const double d = v - mean;
        mean += d / static_cast<double>(k);
        m2 += d * (v - mean);
    }
    s.mean = mean;
    s.variance = s.n > 1 ? m2 / static_cast<double>(s.n - 1) : 0.0;
    s.censor_rate = static_cast<double>(censored) / static_cast<double>(s.n);
    return s;
}

struct InverseGaussianFit {
    double mean = 0.0;
    double shape = 0.0;   // lambda

    [[nodiscard]] double cdf(double x) const {
        if (x <= 0.0) return 0.0;
        return boost::math::cdf(boost::math::inverse_gaussian_distribution<double>(mean, shape), x);
    }
};

/// Maximum-likelihood fit: mean = sample mean, 1/lambda = mean(1/x - 1/mean).
[[nodiscard]] inline InverseGaussianFit fit_inverse_gaussian(std::span<const double> xs) {
    if (xs.size() < 2) throw std::invalid_argument("fit_inverse_gaussian: need >= 2 samples");
    double sum = 0.0;
    for (double x : xs) {
        if (!(x > 0.0)) throw std::invalid_argument("fit_inverse_gaussian: samples must be positive");
        sum += x;
    }
    const double mean = sum / static_cast<double>(xs.size());
    double inv = 0.0;
    for (double x : xs) inv += 1.0 / x - 1.0 / mean;
    inv /= static_cast<double>(xs.size());
    if (!(inv > 0.0)) throw std::invalid_argument("fit_inverse_gaussian: degenerate sample");
    return InverseGaussianFit{mean, 1.0 / inv};
}

/// One-sample Kolmogorov-Smirnov statistic sup |F_n(x) - F(x)|.
[[nodiscard]] inline double ks_statistic(std::vector<double> xs,
                                         const std::function<double(double)>& cdf) {
    if (xs.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

} // namespace trnglab
