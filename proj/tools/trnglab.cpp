// trnglab: simulate the collapse-time TRNG, extract bitstreams, run the
// statistical battery and the Markov prediction attack.
//
// Exit status: 0 success, 1 usage or configuration error, 2 statistical
// battery failure, 3 runtime error.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include <trnglab/trnglab.hpp>

namespace fs = std::filesystem;
using namespace trnglab;

namespace {

constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kUsage = 1, kBatteryFail = 2, kRuntime = 3 };

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string format_prob(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", p);
    return buf;
}

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

/// Writes `text` to `path` via a temporary file and rename.
void write_atomically(const fs::path& path, const std::string& text) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << text;
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::uint64_t parse_u64(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        if (s.empty() || s[0] == '-') throw std::invalid_argument(s);
        const auto v = std::stoull(s, &pos, 0);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError(std::string("invalid ") + what + ": '" + s + "'");
    }
}

/// Accepts plain integers and powers written as "2^15".
std::uint64_t parse_budget(const std::string& s) {
    if (const auto caret = s.find('^'); caret != std::string::npos) {
        const auto base = parse_u64(s.substr(0, caret), "budget");
        const auto exp = parse_u64(s.substr(caret + 1), "budget");
        std::uint64_t v = 1;
        for (std::uint64_t i = 0; i < exp; ++i) {
            if (base != 0 && v > UINT64_MAX / base) throw UsageError("budget overflows: " + s);
            v *= base;
        }
        return v;
    }
    return parse_u64(s, "budget");
}

struct SeedSource {
    std::optional<std::string> flag;

    std::uint64_t resolve(const LabConfig* cfg) const {
        if (flag) return parse_u64(*flag, "--seed");
        if (const char* env = std::getenv("TRNGLAB_SEED"); env && *env)
            return parse_u64(env, "TRNGLAB_SEED");
        if (cfg && cfg->seed) return *cfg->seed;
        throw UsageError("no seed: pass --seed, set TRNGLAB_SEED or put 'seed' in the config");
    }
};

struct Manifest {
    nlohmann::ordered_json j;

    Manifest(const std::string& subcommand, const std::vector<std::string>& argv) {
        j["tool"] = "trnglab";
        j["tool_version"] = kToolVersion;
        j["subcommand"] = subcommand;
        j["argv"] = argv;
    }

    void set_config(const LabConfig& cfg) {
        j["config_digest"] = config_digest(cfg);
        j["config"] = canonical_config_text(cfg);
    }

    void write(const fs::path& dir) const { write_atomically(dir / "manifest.json", j.dump(2) + "\n"); }
};

LabConfig load_config_or_throw(const std::string& path) {
    try {
        return load_config(path);
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
}

ThermalPoint checked_temperature(double t) {
    ThermalPoint tp{t};
    try {
        tp.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return tp;
}

// --- subcommands -----------------------------------------------------------

struct SimulateArgs {
    std::string config;
    double temp = 25.0;
    std::size_t n = 1000;
    SeedSource seed;
    std::string out;
};

int cmd_simulate(const SimulateArgs& a, const std::vector<std::string>& argv) {
    const LabConfig cfg = load_config_or_throw(a.config);
    const ThermalPoint t = checked_temperature(a.temp);
    const std::uint64_t seed = a.seed.resolve(&cfg);
    const fs::path dir = a.out;
    ensure_dir(dir);

    std::ostringstream csv;
    csv << "index,count,censored\n";
    if (a.n > 0) {
        const auto samples = sample_collapse_counts(cfg.ring, cfg.trojan, t, a.n, seed);
        for (std::size_t i = 0; i < samples.size(); ++i)
            csv << i << ',' << samples[i].count << ',' << (samples[i].censored ? 1 : 0) << '\n';
    }
    write_atomically(dir / "collapse.csv", csv.str());

    Manifest m("simulate", argv);
    m.set_config(cfg);
    m.j["seed"] = seed;
    m.j["temperatures_degC"] = {a.temp};
    m.j["n"] = a.n;
    m.j["outputs"] = {"collapse.csv"};
    m.write(dir);
    return kOk;
}

struct BitsArgs {
    std::string config;
    double temp = 25.0;
    std::size_t n = 100000;
    SeedSource seed;
    std::string out;
    bool degraded = false;
    double mu = 129.5;
    double sigma = 1.0;
};

int cmd_bits(const BitsArgs& a, const std::vector<std::string>& argv) {
    std::optional<LabConfig> cfg;
    if (!a.config.empty()) cfg = load_config_or_throw(a.config);
    if (!a.degraded && !cfg) throw UsageError("bits: --config is required unless --degraded-model is set");
    const ThermalPoint t = checked_temperature(a.temp);
    const std::uint64_t seed = a.seed.resolve(cfg ? &*cfg : nullptr);
    const fs::path dir = a.out;
    ensure_dir(dir);

    const std::string digest = cfg ? config_digest(*cfg) : std::string{};
    Bitstream bs;
    if (a.degraded) {
        IncrementPmf pmf;
        try {
            pmf = build_increment_pmf(a.mu, a.sigma);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        bs = generate_degraded_bitstream(pmf, a.n, seed, a.temp, digest);
    } else {
        bs = generate_ring_bitstream(cfg->ring, cfg->trojan, t, a.n, seed, digest);
    }
    write_bitstream(bs, dir / "bitstream.bin");

    Manifest m("bits", argv);
    if (cfg) m.set_config(*cfg);
    m.j["seed"] = seed;
    m.j["temperatures_degC"] = {a.temp};
    m.j["n_bits"] = a.n;
    m.j["degraded_model"] = a.degraded;
    if (a.degraded) {
        m.j["mu_lsb"] = a.mu;
        m.j["sigma_lsb"] = a.sigma;
    }
    m.j["outputs"] = {"bitstream.bin", "bitstream.bin.json"};
    m.write(dir);
    return kOk;
}

struct NistArgs {
    std::string input;
    std::string out;
};

int cmd_nist(const NistArgs& a, const std::vector<std::string>& argv) {
    Bitstream bs;
    try {
        bs = read_bitstream(a.input);
    } catch (const BitstreamFormatError& e) {
        throw UsageError(e.what());
    }
    BatteryReport rep;
    try {
        rep = run_battery(bs.bits, {}, a.input);
    } catch (const InsufficientDataError& e) {
        throw UsageError(e.what());
    }
    write_report_text(rep, std::cout);
    if (!a.out.empty()) {
        const fs::path dir = a.out;
        ensure_dir(dir);
        std::ostringstream txt;
        write_report_text(rep, txt);
        write_atomically(dir / "report.txt", txt.str());
        write_atomically(dir / "report.json", report_to_json(rep).dump(2) + "\n");
        Manifest m("nist", argv);
        m.j["input"] = a.input;
        m.j["input_length"] = bs.length();
        m.j["input_config_digest"] = bs.origin.config_digest;
        m.j["input_seed"] = bs.origin.seed;
        m.j["outputs"] = {"report.txt", "report.json"};
        m.write(dir);
    }
    return rep.all_passed() ? kOk : kBatteryFail;
}

struct AttackArgs {
    double mu = 129.5;
    double sigma = 1.0;
    int key_bits = 15;
    std::vector<std::string> budgets{"8"};
    std::uint64_t top_k = 8;
    std::string out;
};

int cmd_attack(const AttackArgs& a, const std::vector<std::string>& argv) {
    if (a.key_bits < 3) throw UsageError("--key-bits must be >= 3");
    if (a.top_k == 0) throw UsageError("--top-k must be >= 1");
    std::vector<std::uint64_t> budgets;
    for (const auto& b : a.budgets) {
        budgets.push_back(parse_budget(b));
        if (budgets.back() == 0) throw UsageError("budgets must be >= 1");
    }
    TransitionMatrix p;
    try {
        p = build_transition_matrix(a.mu, a.sigma);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const std::size_t length = outputs_for_key(a.key_bits);
    const fs::path dir = a.out;
    ensure_dir(dir);

    std::ostringstream patterns;
    patterns << "rank,sequence,probability,cumulative\n";
    double cumulative = 0.0;
    const auto top = top_k_sequences(p, length, a.top_k);
    for (std::size_t i = 0; i < top.size(); ++i) {
        cumulative += top[i].probability;
        patterns << (i + 1) << ',' << sequence_to_bits(top[i].symbols) << ','
                 << format_prob(top[i].probability) << ',' << format_prob(cumulative) << '\n';
    }
    write_atomically(dir / "patterns.csv", patterns.str());

    const AttackCurve curve = attack_success_curve(p, a.key_bits, budgets);
    std::ostringstream csv;
    csv << "budget,success_probability\n";
    for (const auto& pt : curve.points) csv << pt.guess_budget << ',' << format_prob(pt.success_probability) << '\n';
    write_atomically(dir / "curve.csv", csv.str());

    Manifest m("attack", argv);
    m.j["mu_lsb"] = a.mu;
    m.j["sigma_lsb"] = a.sigma;
    m.j["key_bits"] = a.key_bits;
    m.j["sequence_length"] = length;
    m.j["budgets"] = budgets;
    m.j["top_k"] = a.top_k;
    m.j["outputs"] = {"patterns.csv", "curve.csv"};
    m.write(dir);
    std::cout << patterns.str() << csv.str();
    return kOk;
}

struct SweepArgs {
    std::string config;
    std::vector<double> temps;
    std::size_t n = 1000;
    SeedSource seed;
    std::string out;
};

int cmd_sweep(const SweepArgs& a, const std::vector<std::string>& argv) {
    const LabConfig cfg = load_config_or_throw(a.config);
    const std::vector<double> temps = a.temps.empty() ? cfg.temperatures : a.temps;
    for (double t : temps) checked_temperature(t);
    if (a.n == 0) throw UsageError("sweep: --n must be >= 1");
    const std::uint64_t seed = a.seed.resolve(&cfg);
    const fs::path dir = a.out;
    ensure_dir(dir);

    std::ostringstream csv;
    csv << "temperature_degC,n,mean,variance,censor_rate\n";
    for (double t : temps) {
        // Same seed at every temperature: paired samples across the sweep.
        const auto samples = sample_collapse_counts(cfg.ring, cfg.trojan, ThermalPoint{t}, a.n, seed);
        const auto s = summarize(samples);
        csv << format_real(t) << ',' << s.n << ',' << format_real(s.mean) << ','
            << format_real(s.variance) << ',' << format_real(s.censor_rate) << '\n';
    }
    write_atomically(dir / "sweep.csv", csv.str());

    Manifest m("sweep", argv);
    m.set_config(cfg);
    m.j["seed"] = seed;
    m.j["temperatures_degC"] = temps;
    m.j["n"] = a.n;
    m.j["outputs"] = {"sweep.csv"};
    m.write(dir);
    std::cout << csv.str();
    return kOk;
}

struct RenderArgs {
    std::string input;
    std::size_t width = 256;
    std::string scan = "row";
    bool plain = false;
    std::string out;
};

int cmd_render(const RenderArgs& a, const std::vector<std::string>& argv) {
    if (a.width == 0) throw UsageError("--width must be >= 1");
    Bitstream bs;
    try {
        bs = read_bitstream(a.input);
    } catch (const BitstreamFormatError& e) {
        throw UsageError(e.what());
    }
    const ScanOrder order = a.scan == "col" ? ScanOrder::ColumnMajor : ScanOrder::RowMajor;
    const Bitmap img = render_raster(bs, a.width, order);
    const fs::path dir = a.out;
    ensure_dir(dir);
    std::ostringstream pbm;
    write_pbm(img, pbm, a.plain);
    write_atomically(dir / "raster.pbm", pbm.str());

    Manifest m("render", argv);
    m.j["input"] = a.input;
    m.j["width"] = a.width;
    m.j["scan"] = a.scan;
    m.j["plain"] = a.plain;
    m.j["outputs"] = {"raster.pbm"};
    m.write(dir);
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv, argv + argc);
    CLI::App app{"trnglab - collapse-time TRNG Trojan laboratory"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Sample cycles-to-collapse counts to CSV");
    simulate->add_option("--config", sim.config, "Configuration file")->required();
    simulate->add_option("--temp", sim.temp, "Temperature in degC");
    simulate->add_option("--n", sim.n, "Number of samples");
    simulate->add_option("--seed", sim.seed.flag, "Seed (u64)");
    simulate->add_option("--out", sim.out, "Output directory")->required();

    BitsArgs bits;
    auto* bits_cmd = app.add_subcommand("bits", "Generate a TRNG bitstream");
    bits_cmd->add_option("--config", bits.config, "Configuration file");
    bits_cmd->add_option("--temp", bits.temp, "Temperature in degC");
    bits_cmd->add_option("--n", bits.n, "Number of bits");
    bits_cmd->add_option("--seed", bits.seed.flag, "Seed (u64)");
    bits_cmd->add_option("--out", bits.out, "Output directory")->required();
    bits_cmd->add_flag("--degraded-model", bits.degraded,
                       "Use the triggered-Trojan counter model instead of the ring simulator");
    bits_cmd->add_option("--mu", bits.mu, "Mean counter increment per master clock (LSB)");
    bits_cmd->add_option("--sigma", bits.sigma, "Increment standard deviation (LSB)");

    NistArgs nist;
    auto* nist_cmd = app.add_subcommand("nist", "Run the statistical test battery on a bitstream");
    nist_cmd->add_option("bitstream", nist.input, "Bitstream payload path")->required();
    nist_cmd->add_option("--out", nist.out, "Directory for report files");

    AttackArgs attack;
    auto* attack_cmd = app.add_subcommand("attack", "Rank likely output patterns and success curve");
    attack_cmd->add_option("--mu", attack.mu, "Mean counter increment per master clock (LSB)");
    attack_cmd->add_option("--sigma", attack.sigma, "Increment standard deviation (LSB)");
    attack_cmd->add_option("--key-bits", attack.key_bits, "Key size in bits");
    attack_cmd->add_option("--budgets", attack.budgets, "Guess budgets, e.g. 8,2^15")->delimiter(',');
    attack_cmd->add_option("--top-k", attack.top_k, "Number of ranked patterns to list");
    attack_cmd->add_option("--out", attack.out, "Output directory")->required();

    SweepArgs sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Collapse-count summary across temperatures");
    sweep_cmd->add_option("--config", sweep.config, "Configuration file")->required();
    sweep_cmd->add_option("--temp", sweep.temps, "Temperatures in degC, comma separated")->delimiter(',');
    sweep_cmd->add_option("--n", sweep.n, "Samples per temperature");
    sweep_cmd->add_option("--seed", sweep.seed.flag, "Seed (u64)");
    sweep_cmd->add_option("--out", sweep.out, "Output directory")->required();

    RenderArgs render;
    auto* render_cmd = app.add_subcommand("render", "Render a bitstream as a PBM raster");
    render_cmd->add_option("bitstream", render.input, "Bitstream payload path")->required();
    render_cmd->add_option("--width", render.width, "Raster width in pixels");
    render_cmd->add_option("--scan", render.scan, "Scan order")->check(CLI::IsMember({"row", "col"}));
    render_cmd->add_flag("--plain", render.plain, "Write plain (P1) instead of binary (P4) PBM");
    render_cmd->add_option("--out", render.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*simulate) return cmd_simulate(sim, args);
        if (*bits_cmd) return cmd_bits(bits, args);
        if (*nist_cmd) return cmd_nist(nist, args);
        if (*attack_cmd) return cmd_attack(attack, args);
        if (*sweep_cmd) return cmd_sweep(sweep, args);
        if (*render_cmd) return cmd_render(render, args);
    } catch (const UsageError& e) {
        std::cerr << "trnglab: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "trnglab: error: " << e.what() << '\n';
        return kRuntime;
    }
    return kUsage;
}
