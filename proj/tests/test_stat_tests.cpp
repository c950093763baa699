#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include <trnglab/special_functions.hpp>
#include <trnglab/stat_tests.hpp>

#include "test_support.hpp"

using namespace trnglab;
using trnglab::testing::splitmix_bits;

namespace {

struct OracleRow {
    std::uint64_t seed;
    std::array<double, 7> p;   // battery order
};

// Produced by tests/oracle/make_oracles.py (numpy/scipy), 100000-bit streams.
constexpr std::array<OracleRow, 3> kOracle = {{
    {1, {0.11098353945523146, 0.56260790900230995, 0.19248036331872684, 0.10359791420902635,
         0.77669608386692857, 0.97684939728531395, 0.34757756334172596}},
    {2, {0.29087651345766619, 0.741632934733917, 0.51382254753061551, 0.28285436063198555,
         0.63225805429647974, 0.38398816339805664, 0.9831093691960916}},
    {3, {0.4403538927781715, 0.48696576507853545, 0.62410395552550213, 0.38291252708340728,
         0.76766532922466768, 0.74956761560263696, 0.88019178836990841}},
}};

std::vector<std::uint8_t> alternating(std::size_t n) {
    std::vector<std::uint8_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i % 2;
    return v;
}

std::vector<std::uint8_t> complement(std::vector<std::uint8_t> v) {
    for (auto& b : v) b ^= 1;
    return v;
}

} // namespace

TEST(SpecialFunctions, TrivialValues) {
    EXPECT_EQ(trnglab::erfc(0.0), 1.0);
    EXPECT_EQ(igamc(2.5, 0.0), 1.0);
    EXPECT_EQ(igamc(2.5, std::numeric_limits<double>::infinity()), 0.0);
    EXPECT_THROW((void)igamc(0.0, 1.0), std::domain_error);
}

TEST(SpecialFunctions, ErfcMatchesHighPrecision) {
    const std::array<std::pair<double, double>, 7> ref = {{
        {0.1, 8.875370839817151016e-1},
        {0.5, 4.7950012218695346232e-1},
        {1.0, 1.5729920705028513066e-1},
        {2.5, 4.0695201744495893956e-4},
        {5.0, 1.5374597944280348502e-12},
        {10.0, 2.088487583762544757e-45},
        {26.0, 5.6631924088561428465e-296},
    }};
    for (auto [x, v] : ref) {
        EXPECT_NEAR(trnglab::erfc(x), v, 1e-10) << "x=" << x;
        EXPECT_NEAR(trnglab::erfc(x) / v, 1.0, 1e-13) << "x=" << x;
    }
}

TEST(SpecialFunctions, IgamcMatchesHighPrecision) {
    const std::array<std::array<double, 3>, 7> ref = {{
        {0.5, 0.3, 0.43857802608099986352},
        {1.5, 2.0, 0.2614641299491106222},
        {2.0, 7.5, 0.0047012171462565854564},
        {24.5, 30.0, 0.13486434652532072838},
        {390.5, 420.0, 0.070297080896475447867},
        {512.0, 560.0, 0.019083627716396485403},
        {3.0, 0.01, 0.99999983457834719251},
    }};
    for (const auto& r : ref) EXPECT_NEAR(igamc(r[0], r[1]) / r[2], 1.0, 1e-8) << "a=" << r[0] << " x=" << r[1];
}

TEST(Frequency, Examples) {
    std::vector<std::uint8_t> balanced(100, 0);
    std::fill(balanced.begin(), balanced.begin() + 50, 1);
    const auto r = frequency_test(balanced);
    EXPECT_EQ(r.statistic, 0.0);
    EXPECT_DOUBLE_EQ(r.p_value(), 1.0);
    EXPECT_TRUE(r.passed);

    const auto ones = frequency_test(std::vector<std::uint8_t>(100, 1));
    EXPECT_NEAR(ones.p_value(), std::erfc(std::sqrt(50.0)), 1e-30);
    EXPECT_FALSE(ones.passed);
}

TEST(Frequency, MinimumLength) {
    const std::vector<std::uint8_t> short_stream(99, 1);
    EXPECT_THROW((void)frequency_test(short_stream), InsufficientDataError);
    TestOptions waive;
    waive.enforce_min_length = false;
    EXPECT_NO_THROW((void)frequency_test(short_stream, waive));
}

TEST(BlockFrequency, Examples) {
    const auto alt = block_frequency_test(alternating(1280));
    EXPECT_EQ(alt.statistic, 0.0);
    EXPECT_DOUBLE_EQ(alt.p_value(), 1.0);
    EXPECT_TRUE(alt.passed);
    const auto zeros = block_frequency_test(std::vector<std::uint8_t>(1280, 0));
    EXPECT_LT(zeros.p_value(), 1e-100);
    EXPECT_FALSE(zeros.passed);
    EXPECT_THROW((void)block_frequency_test(std::vector<std::uint8_t>(127, 0)), InsufficientDataError);
}

TEST(CumulativeSums, Examples) {
    for (auto mode : {CusumMode::Forward, CusumMode::Reverse}) {
        const auto alt = cumulative_sums_test(alternating(1000), mode);
        EXPECT_EQ(alt.statistic, 1.0);
        EXPECT_GT(alt.p_value(), 0.99);
        EXPECT_TRUE(alt.passed);
        const auto ones = cumulative_sums_test(std::vector<std::uint8_t>(1000, 1), mode);
        EXPECT_EQ(ones.statistic, 1000.0);
        EXPECT_LT(ones.p_value(), 1e-10);
        EXPECT_FALSE(ones.passed);
    }
}

TEST(CumulativeSums, ReversalDuality) {
    for (std::uint64_t seed : {4, 5, 6}) {
        auto bits = splitmix_bits(seed, 5000);
        const auto rev = cumulative_sums_test(bits, CusumMode::Reverse);
        std::reverse(bits.begin(), bits.end());
        const auto fwd = cumulative_sums_test(bits, CusumMode::Forward);
        EXPECT_EQ(rev.statistic, fwd.statistic);
        EXPECT_EQ(rev.p_value(), fwd.p_value());
    }
}

TEST(LongestRun, Examples) {
    const auto zeros = longest_run_test(std::vector<std::uint8_t>(6272, 0));
    EXPECT_LT(zeros.p_value(), 1e-50);
    EXPECT_FALSE(zeros.passed);
    EXPECT_THROW((void)longest_run_test(std::vector<std::uint8_t>(127, 0)), InsufficientDataError);
    EXPECT_NO_THROW((void)longest_run_test(std::vector<std::uint8_t>(128, 0)));
}

TEST(SpectralFft, MagnitudesMatchDirectSum) {
    const auto bits = splitmix_bits(77, 1000);
    const auto mag = dft_magnitudes(bits);
    ASSERT_EQ(mag.size(), 500u);
    for (std::size_t k = 0; k < mag.size(); k += 7) {
        std::complex<double> acc = 0.0;
        for (std::size_t j = 0; j < bits.size(); ++j)
            acc += (bits[j] ? 1.0 : -1.0) *
                   std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * j) / 1000.0);
        EXPECT_NEAR(mag[k], std::abs(acc), 1e-9) << "k=" << k;
    }
}

TEST(SpectralFft, ConstantSymbolStreamFails) {
    // A stream of one repeated 3-bit symbol has period 3 in bits; a run of
    // symbols that repeats every 8 outputs gives period 24. Both are strongly
    // periodic and must fail.
    std::vector<std::uint8_t> period3, period24;
    for (std::size_t i = 0; i < 100000; ++i) {
        period3.push_back(i % 3 == 0);
        const std::size_t sym = (i / 3) % 8;
        period24.push_back((sym >> (2 - i % 3)) & 1);
    }
    EXPECT_FALSE(spectral_fft_test(period3).passed);
    EXPECT_FALSE(spectral_fft_test(period24).passed);
    EXPECT_THROW((void)spectral_fft_test(std::vector<std::uint8_t>(999, 0)), InsufficientDataError);
}

TEST(SpectralFft, PValuesRoughlyUniformOnRandomStreams) {
    int rejections = 0;
    for (std::uint64_t seed = 1000; seed < 1100; ++seed)
        rejections += !spectral_fft_test(splitmix_bits(seed, 10000), TestOptions{.alpha = 0.05}).passed;
    // Binomial(100, 0.05): mean 5, P(X > 15) < 1e-4.
    EXPECT_LE(rejections, 15);
}

TEST(ApproximateEntropy, ConstantStream) {
    TestOptions opt;
    opt.apen_block_len = 2;
    const std::size_t n = 1000;
    const auto r = approximate_entropy_test(std::vector<std::uint8_t>(n, 0), opt);
    EXPECT_NEAR(r.statistic, 0.0, 1e-15);
    EXPECT_LT(r.p_value(), 1e-100);
    EXPECT_FALSE(r.passed);
}

TEST(ApproximateEntropy, BlockLengthRule) {
    EXPECT_EQ(approximate_entropy_block_len(100), 2);
    EXPECT_EQ(approximate_entropy_block_len(1024), 4);
    EXPECT_EQ(approximate_entropy_block_len(100000), 10);
    EXPECT_EQ(approximate_entropy_block_len(std::size_t{1} << 30), 10);
}

TEST(ApproximateEntropy, HandExample) {
    // Ten-bit example from the reference suite documentation: 0100110101, m = 3.
    const std::vector<std::uint8_t> bits = {0, 1, 0, 0, 1, 1, 0, 1, 0, 1};
    TestOptions opt;
    opt.apen_block_len = 3;
    opt.enforce_min_length = false;
    const auto r = approximate_entropy_test(bits, opt);
    EXPECT_NEAR(r.p_value(), 0.261961, 1e-6);
}

TEST(Battery, MatchesIndependentOracle) {
    for (const auto& row : kOracle) {
        const auto bits = splitmix_bits(row.seed, 100000);
        const BatteryReport rep = run_battery(bits);
        ASSERT_EQ(rep.rows.size(), 7u);
        for (std::size_t i = 0; i < 7; ++i) {
            EXPECT_EQ(rep.rows[i].test_name, kBatteryTestNames[i]);
            EXPECT_NEAR(rep.rows[i].p_value(), row.p[i], 1e-6)
                << rep.rows[i].test_name << " seed " << row.seed;
        }
        EXPECT_TRUE(rep.all_passed());
    }
}

TEST(Battery, ComplementInvariance) {
    const auto bits = splitmix_bits(9, 20000);
    const auto a = run_battery(bits);
    const auto b = run_battery(complement(bits));
    for (const char* name : {"Frequency", "Block frequency", "Cumulative sums (forward)",
                             "Cumulative sums (reverse)", "FFT", "Approximate entropy"})
        EXPECT_NEAR(a.row(name).p_value(), b.row(name).p_value(), 1e-12) << name;
}

TEST(Battery, PValuesInUnitIntervalAndPassRule) {
    std::vector<std::vector<std::uint8_t>> inputs = {std::vector<std::uint8_t>(4096, 0),
                                                     std::vector<std::uint8_t>(4096, 1),
                                                     alternating(4096), splitmix_bits(1, 4096)};
    for (const auto& bits : inputs)
        for (const auto& r : run_battery(bits).rows) {
            for (double p : r.p_values) {
                EXPECT_GE(p, 0.0);
                EXPECT_LE(p, 1.0);
            }
            EXPECT_EQ(r.passed, r.p_value() >= 0.01);
        }
}

TEST(Battery, Deterministic) {
    const auto bits = splitmix_bits(21, 30000);
    std::ostringstream a, b;
    write_report_text(run_battery(bits, {}, "x"), a);
    write_report_text(run_battery(bits, {}, "x"), b);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(report_to_json(run_battery(bits)).dump(), report_to_json(run_battery(bits)).dump());
}

TEST(Battery, ReportFormat) {
    const auto rep = run_battery(std::vector<std::uint8_t>(4096, 0), {}, "zeros");
    std::ostringstream os;
    write_report_text(rep, os);
    const std::string s = os.str();
    EXPECT_NE(s.find("# zeros"), std::string::npos);
    EXPECT_NE(s.find("Frequency\t"), std::string::npos);
    EXPECT_NE(s.find("overall\t\tfail"), std::string::npos);
    const auto j = report_to_json(rep);
    EXPECT_EQ(j.at("tests").size(), 7u);
    EXPECT_FALSE(j.at("passed").get<bool>());
    EXPECT_THROW((void)rep.row("Serial"), std::out_of_range);
}
