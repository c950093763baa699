#pragma once

// End-to-end bitstream generation: simulator or degraded counter -> COUNT[6:4]
// symbols -> bits.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "extract.hpp"
#include "increment_pmf.hpp"
#include "ro_sim.hpp"

namespace trnglab {

class CensoringError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bits from the ring simulator. Censored samples are skipped; if more than
/// half of the attempted samples are censored the run is aborted.
[[nodiscard]] inline Bitstream generate_ring_bitstream(const RingConfig& cfg,
                                                       const TrojanConfig& tc, ThermalPoint t,
                                                       std::size_t n_bits, std::uint64_t seed,
                                                       std::string config_digest = {}) {
    cfg.validate();
    tc.validate();
    t.validate();
    const std::size_t need = (n_bits + 2) / 3;
    Bitstream bs;
    bs.origin = BitstreamOrigin{std::move(config_digest), t.temperature_degC, seed, "ring"};
    bs.bits.reserve(3 * need);
    std::size_t censored = 0;
    for (std::uint64_t i = 0; bs.length() < 3 * need; ++i) {
        const CollapseSample s = simulate_collapse_at(cfg, tc, t, seed, i);
        if (s.censored) {
            // collected <= need at the end, so the final rate exceeds 1/2 iff censored > need
            if (++censored > need)
                throw CensoringError("more than 50% of collapse samples hit the counter limit (" +
                                     std::to_string(censored) + " censored)");
            continue;
        }
        bs.append_symbol(count_to_symbol(s.count));
    }
    bs.bits.resize(n_bits);
    return bs;
}

/// Bits from the triggered TRNG modelled as a noisy free-running counter.
[[nodiscard]] inline Bitstream generate_degraded_bitstream(const IncrementPmf& pmf,
                                                           std::size_t n_bits,
                                                           std::uint64_t seed,
                                                           double temperature_degC = 120.0,
                                                           std::string config_digest = {}) {
    Bitstream bs;
    bs.origin = BitstreamOrigin{std::move(config_digest), temperature_degC, seed, "degraded"};
    const std::size_t need = (n_bits + 2) / 3;
    if (need == 0) return bs;
    bs.bits.reserve(3 * need);
    for (auto c : infected_counter_trace(pmf, need, seed)) bs.append_symbol(count_to_symbol(c));
    bs.bits.resize(n_bits);
    return bs;
}

} // namespace trnglab
