#pragma once

// Stochastic model of the collapse-time 3-edge ring oscillator.
//
// The three racing edges are represented by the three phase gaps between
// neighbours. Every ring traversal each gap picks up Gaussian timing noise; the
// perturbations are mean-centred so the gaps always sum to the traversal period.
// The ring collapses (and the 14-bit cycle counter stops) once any gap reaches
// the minimum pulse width.
//
// Temperature enters through a single delay factor f(T) = 1 + k (T - 25) that
// scales stage delay, jitter, drift and minimum pulse width alike, so a
// Trojan-free ring behaves identically at every temperature. The Trojan adds an
// injection delay to one edge that is not scaled and grows with temperature.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/random/discrete_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "increment_pmf.hpp"
#include "rng.hpp"

namespace trnglab {

inline constexpr int kCounterBits = 14;
inline constexpr std::uint32_t kCounterModulus = 1u << kCounterBits;
inline constexpr std::uint32_t kCounterMax = kCounterModulus - 1;
inline constexpr double kReferenceTempDegC = 25.0;

struct ThermalPoint {
    double temperature_degC = kReferenceTempDegC;

    static constexpr double kMinDegC = -40.0;
    static constexpr double kMaxDegC = 150.0;

    void validate() const {
        if (!std::isfinite(temperature_degC) || temperature_degC < kMinDegC ||
            temperature_degC > kMaxDegC)
            throw std::invalid_argument("temperature " + std::to_string(temperature_degC) +
                                        " degC outside [-40, 150]");
    }
};

struct RingConfig {
    int stage_count = 15;
    double stage_delay_ps = 20.0;
    double jitter_sigma_ps = 0.44;
    double drift_ps_per_cycle = 0.01;
    double min_gap_ps = 20.0;
    double temp_coeff_per_degC = 0.001;

    /// Single-edge oscillation period at the reference temperature.
    [[nodiscard]] double period_ps() const noexcept {
        return 2.0 * stage_count * stage_delay_ps;
    }

    void validate() const {
        if (stage_count <= 0 || stage_count % 3 != 0 || stage_count % 2 == 0)
            throw std::invalid_argument("ring.stage_count must be an odd positive multiple of 3");
        if (!(stage_delay_ps > 0.0) || !std::isfinite(stage_delay_ps))
            throw std::invalid_argument("ring.stage_delay_ps must be positive");
        if (!(jitter_sigma_ps >= 0.0) || !std::isfinite(jitter_sigma_ps))
            throw std::invalid_argument("ring.jitter_sigma_ps must be nonnegative");
        if (!std::isfinite(drift_ps_per_cycle))
            throw std::invalid_argument("ring.drift_ps_per_cycle must be finite");
        if (!(min_gap_ps > 0.0) || !std::isfinite(min_gap_ps))
            throw std::invalid_argument("ring.min_gap_ps must be positive");
        if (!std::isfinite(temp_coeff_per_degC))
            throw std::invalid_argument("ring.temp_coeff_per_degC must be finite");
        for (double t : {ThermalPoint::kMinDegC, ThermalPoint::kMaxDegC})
            if (1.0 + temp_coeff_per_degC * (t - kReferenceTempDegC) <= 0.0)
                throw std::invalid_argument("ring.temp_coeff_per_degC makes the stage delay non-positive");
        if (period_ps() <= 3.0 * min_gap_ps)
            throw std::invalid_argument("ring period must exceed 3 * ring.min_gap_ps");
    }
};

struct TrojanConfig {
    bool enabled = false;
    double base_offset_ps = 0.0;
    double offset_slope_ps_per_degC = 0.0;
    int target_edge = 1;

    void validate() const {
        if (!(base_offset_ps >= 0.0) || !std::isfinite(base_offset_ps))
            throw std::invalid_argument("trojan.base_offset_ps must be nonnegative");
        if (!(offset_slope_ps_per_degC >= 0.0) || !std::isfinite(offset_slope_ps_per_degC))
            throw std::invalid_argument("trojan.offset_slope_ps_per_degC must be nonnegative");
        if (target_edge < 0 || target_edge > 2)
            throw std::invalid_argument("trojan.target_edge must be 0, 1 or 2");
    }
};

/// Calibrated Trojan-infected device: indistinguishable at 25 degC, collapses
/// immediately at 120 degC.
inline TrojanConfig infected_trojan_config() {
    return TrojanConfig{.enabled = true,
                        .base_offset_ps = 2.0,
                        .offset_slope_ps_per_degC = 2.2,
                        .target_edge = 1};
}

struct RingState {
    /// gaps_ps[i] separates edge i from edge (i + 1) % 3, the edge ahead of it.
    std::array<double, 3> gaps_ps{};
    std::uint64_t cycle_index = 0;

    [[nodiscard]] double total_ps() const noexcept {
        return gaps_ps[0] + gaps_ps[1] + gaps_ps[2];
    }
};

struct CollapseSample {
    std::uint32_t count = 0;
    bool censored = false;

    friend bool operator==(const CollapseSample&, const CollapseSample&) = default;
};

[[nodiscard]] inline double thermal_delay_factor(const RingConfig& cfg, ThermalPoint t) noexcept {
    return 1.0 + cfg.temp_coeff_per_degC * (t.temperature_degC - kReferenceTempDegC);
}

[[nodiscard]] inline double stage_delay_at(const RingConfig& cfg, ThermalPoint t) noexcept {
    return cfg.stage_delay_ps * thermal_delay_factor(cfg, t);
}

[[nodiscard]] inline double trojan_offset_at(const TrojanConfig& tc, ThermalPoint t) noexcept {
    if (!tc.enabled) return 0.0;
    return tc.base_offset_ps +
           tc.offset_slope_ps_per_degC * std::max(0.0, t.temperature_degC - kReferenceTempDegC);
}

/// Per-cycle parameters of the gap walk at one temperature.
struct RingDynamics {
    double period_ps;      // single-edge period, 2 * stages * delay
    double min_gap_ps;
    double gap_sigma_ps;   // sd of each raw per-gap perturbation, before centring
    double drift_ps;       // added to the widest gap before centring

    [[nodiscard]] bool is_terminal(const RingState& s) const noexcept {
        return std::min({s.gaps_ps[0], s.gaps_ps[1], s.gaps_ps[2]}) <= min_gap_ps;
    }
};

[[nodiscard]] inline RingDynamics ring_dynamics(const RingConfig& cfg, ThermalPoint t) {
    const double f = thermal_delay_factor(cfg, t);
    return RingDynamics{
        .period_ps = 2.0 * cfg.stage_count * stage_delay_at(cfg, t),
        .min_gap_ps = cfg.min_gap_ps * f,
        .gap_sigma_ps = cfg.jitter_sigma_ps * f * std::sqrt(2.0 * cfg.stage_count),
        .drift_ps = cfg.drift_ps_per_cycle * f,
    };
}

[[nodiscard]] inline RingState init_ring(const RingConfig& cfg, const TrojanConfig& tc,
                                         ThermalPoint t) {
    cfg.validate();
    tc.validate();
    t.validate();
    const RingDynamics dyn = ring_dynamics(cfg, t);
    if (dyn.period_ps <= 3.0 * dyn.min_gap_ps)
        throw std::invalid_argument("ring period must exceed 3 * min gap");

    const double third = dyn.period_ps / 3.0;
    RingState s;
    s.gaps_ps = {third, third, third};
    const double offset = trojan_offset_at(tc, t);
    if (offset > 0.0) {
        const auto edge = static_cast<std::size_t>(tc.target_edge);
        double& behind = s.gaps_ps[(edge + 2) % 3];
        double& ahead = s.gaps_ps[edge];
        if (offset >= third - dyn.min_gap_ps) {
            behind = dyn.min_gap_ps;
            ahead = dyn.period_ps - dyn.min_gap_ps - third;
        } else {
            behind -= offset;
            ahead += offset;
        }
    }
    return s;
}

namespace detail {

// Three i.i.d. N(0, s^2) perturbations, mean-centred, are jointly
// N(0, s^2 (I - J/3)); that is exactly s (z1 u + z2 w) for two independent
// standard normals and the orthonormal basis u, w of the zero-sum plane.
// Drift on the widest gap centres to (+2d/3, -d/3, -d/3).
template <class Rng>
void advance_gaps(RingState& s, const RingDynamics& dyn, Rng& rng) {
    constexpr double u0 = 0.70710678118654752440;    // (1, -1, 0) / sqrt(2)
    constexpr double w0 = 0.40824829046386301637;    // (1, 1, -2) / sqrt(6)
    constexpr double w2 = -0.81649658092772603273;
    boost::random::normal_distribution<double> noise(0.0, dyn.gap_sigma_ps);
    const double z1 = noise(rng);
    const double z2 = noise(rng);
    auto& g = s.gaps_ps;
    // Widest gap, first index on ties. Selected arithmetically: which gap is
    // widest changes at random, so a branch here mispredicts constantly.
    const bool first = g[0] >= g[1] && g[0] >= g[2];
    const bool second = !first && g[1] >= g[2];
    const bool third = !first && !second;
    const double centre = dyn.drift_ps / 3.0;
    g[0] += z1 * u0 + z2 * w0 + dyn.drift_ps * static_cast<double>(first) - centre;
    g[1] += -z1 * u0 + z2 * w0 + dyn.drift_ps * static_cast<double>(second) - centre;
    g[2] += z2 * w2 + dyn.drift_ps * static_cast<double>(third) - centre;
    ++s.cycle_index;
}

} // namespace detail

/// One ring traversal. Calling this on a collapsed state is a contract violation.
template <class Rng>
[[nodiscard]] RingState advance_cycle(RingState state, const RingConfig& cfg, ThermalPoint t,
                                      Rng& rng) {
    const RingDynamics dyn = ring_dynamics(cfg, t);
    if (dyn.is_terminal(state)) throw std::logic_error("advance_cycle: ring already collapsed");
    detail::advance_gaps(state, dyn, rng);
    return state;
}

template <class Rng>
[[nodiscard]] CollapseSample simulate_collapse(const RingConfig& cfg, const TrojanConfig& tc,
                                               ThermalPoint t, Rng& rng) {
    RingState s = init_ring(cfg, tc, t);
    const RingDynamics dyn = ring_dynamics(cfg, t);
    if (dyn.is_terminal(s)) return {0, false};
    for (std::uint32_t c = 1; c <= kCounterMax; ++c) {
        detail::advance_gaps(s, dyn, rng);
        if (dyn.is_terminal(s)) return {c, false};
    }
    return {kCounterMax, true};
}

/// Sample `index` of the batch identified by `seed`.
[[nodiscard]] inline CollapseSample simulate_collapse_at(const RingConfig& cfg,
                                                         const TrojanConfig& tc, ThermalPoint t,
                                                         std::uint64_t seed, std::uint64_t index) {
    Engine rng = make_engine(seed, index);
    return simulate_collapse(cfg, tc, t, rng);
}

[[nodiscard]] inline std::vector<CollapseSample> sample_collapse_counts(const RingConfig& cfg,
                                                                        const TrojanConfig& tc,
                                                                        ThermalPoint t,
                                                                        std::size_t n,
                                                                        std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("sample_collapse_counts: n must be >= 1");
    cfg.validate();
    tc.validate();
    t.validate();
    std::vector<CollapseSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(simulate_collapse_at(cfg, tc, t, seed, i));
    return out;
}

/// Counter values of the triggered TRNG, which degenerates to a free-running
/// counter sampled once per master clock. The first value is uniform on the
/// 7-bit states with the upper counter bits clear.
[[nodiscard]] inline std::vector<std::uint32_t> infected_counter_trace(const IncrementPmf& pmf,
                                                                       std::size_t n,
                                                                       std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("infected_counter_trace: n must be >= 1");
    if (pmf.probs.empty()) throw std::invalid_argument("infected_counter_trace: empty pmf");
    Engine rng = make_engine(seed, 0, /*stream=*/1);
    boost::random::uniform_int_distribution<std::uint32_t> start(0, 127);
    boost::random::discrete_distribution<std::size_t, double> step(pmf.probs.begin(),
                                                                  pmf.probs.end());

    std::vector<std::uint32_t> out;
    out.reserve(n);
    std::int64_t c = start(rng);
    out.push_back(static_cast<std::uint32_t>(c));
    const auto modulus = static_cast<std::int64_t>(kCounterModulus);
    for (std::size_t i = 1; i < n; ++i) {
        const std::int64_t delta = pmf.min_increment + static_cast<std::int64_t>(step(rng));
        c = ((c + delta) % modulus + modulus) % modulus;
        out.push_back(static_cast<std::uint32_t>(c));
    }
    return out;
}

} // namespace trnglab
