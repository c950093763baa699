#pragma once

// Key-value run configuration.
//
//   # comment
//   ring.stage_count = 15
//   ring.jitter_sigma_ps = 0.44
//   trojan.enabled = true
//   thermal.temperatures = 25, 60, 120
//   seed = 42
//
// Unknown keys are rejected so typos do not silently fall back to defaults.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ro_sim.hpp"

namespace trnglab {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LabConfig {
    RingConfig ring;
    TrojanConfig trojan;
    std::vector<double> temperatures{25.0, 60.0, 120.0};
    std::optional<std::uint64_t> seed;

    void validate() const {
        ring.validate();
        trojan.validate();
        for (double t : temperatures) ThermalPoint{t}.validate();
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view key, std::string_view v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ConfigError("bad number for " + std::string(key) + ": '" + std::string(v) + "'");
    return out;
}

template <class Int>
Int parse_int(std::string_view key, std::string_view v) {
    Int out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ConfigError("bad integer for " + std::string(key) + ": '" + std::string(v) + "'");
    return out;
}

inline bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("bad boolean for " + std::string(key) + ": '" + std::string(v) + "'");
}

inline std::vector<double> parse_double_list(std::string_view key, std::string_view v) {
    std::vector<double> out;
    while (!v.empty()) {
        const auto comma = v.find(',');
        const auto item = trim(v.substr(0, comma));
        if (item.empty()) throw ConfigError("empty list item in " + std::string(key));
        out.push_back(parse_double(key, item));
        if (comma == std::string_view::npos) break;
        v.remove_prefix(comma + 1);
    }
    if (out.empty()) throw ConfigError("empty list for " + std::string(key));
    return out;
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

inline void apply_config_entry(LabConfig& cfg, std::string_view key, std::string_view value) {
    using namespace detail;
    if (key == "ring.stage_count") cfg.ring.stage_count = parse_int<int>(key, value);
    else if (key == "ring.stage_delay_ps") cfg.ring.stage_delay_ps = parse_double(key, value);
    else if (key == "ring.jitter_sigma_ps") cfg.ring.jitter_sigma_ps = parse_double(key, value);
    else if (key == "ring.drift_ps_per_cycle") cfg.ring.drift_ps_per_cycle = parse_double(key, value);
    else if (key == "ring.min_gap_ps") cfg.ring.min_gap_ps = parse_double(key, value);
    else if (key == "ring.temp_coeff_per_degC") cfg.ring.temp_coeff_per_degC = parse_double(key, value);
    else if (key == "trojan.enabled") cfg.trojan.enabled = parse_bool(key, value);
    else if (key == "trojan.base_offset_ps") cfg.trojan.base_offset_ps = parse_double(key, value);
    else if (key == "trojan.offset_slope_ps_per_degC") cfg.trojan.offset_slope_ps_per_degC = parse_double(key, value);
    else if (key == "trojan.target_edge") cfg.trojan.target_edge = parse_int<int>(key, value);
    else if (key == "thermal.temperatures") cfg.temperatures = parse_double_list(key, value);
    else if (key == "seed") cfg.seed = parse_int<std::uint64_t>(key, value);
    else throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

[[nodiscard]] inline LabConfig parse_config(std::istream& in) {
    LabConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view s = line;
        if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = detail::trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const auto key = detail::trim(s.substr(0, eq));
        const auto value = detail::trim(s.substr(eq + 1));
        try {
            apply_config_entry(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

[[nodiscard]] inline LabConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    return parse_config(in);
}

/// Canonical text form; every field is written, so two configs are equal iff
/// their canonical texts are equal.
[[nodiscard]] inline std::string canonical_config_text(const LabConfig& cfg) {
    using detail::format_double;
    std::ostringstream os;
    os << "ring.stage_count = " << cfg.ring.stage_count << '\n'
       << "ring.stage_delay_ps = " << format_double(cfg.ring.stage_delay_ps) << '\n'
       << "ring.jitter_sigma_ps = " << format_double(cfg.ring.jitter_sigma_ps) << '\n'
       << "ring.drift_ps_per_cycle = " << format_double(cfg.ring.drift_ps_per_cycle) << '\n'
       << "ring.min_gap_ps = " << format_double(cfg.ring.min_gap_ps) << '\n'
       << "ring.temp_coeff_per_degC = " << format_double(cfg.ring.temp_coeff_per_degC) << '\n'
       << "trojan.enabled = " << (cfg.trojan.enabled ? "true" : "false") << '\n'
       << "trojan.base_offset_ps = " << format_double(cfg.trojan.base_offset_ps) << '\n'
       << "trojan.offset_slope_ps_per_degC = " << format_double(cfg.trojan.offset_slope_ps_per_degC) << '\n'
       << "trojan.target_edge = " << cfg.trojan.target_edge << '\n'
       << "thermal.temperatures = ";
    for (std::size_t i = 0; i < cfg.temperatures.size(); ++i)
        os << (i ? ", " : "") << format_double(cfg.temperatures[i]);
    os << '\n';
    if (cfg.seed) os << "seed = " << *cfg.seed << '\n';
    return os.str();
}

/// FNV-1a 64 of a byte string, as 16 hex digits.
[[nodiscard]] inline std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

[[nodiscard]] inline std::string config_digest(const LabConfig& cfg) {
    return fnv1a_hex(canonical_config_text(cfg));
}

} // namespace trnglab
