#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <trnglab/extract.hpp>
#include <trnglab/increment_pmf.hpp>
#include <trnglab/pipeline.hpp>

using namespace trnglab;
namespace fs = std::filesystem;

namespace {

std::vector<OutputSymbol> syms(std::initializer_list<int> v) {
    std::vector<OutputSymbol> out;
    for (int x : v) out.push_back(OutputSymbol{static_cast<std::uint8_t>(x)});
    return out;
}

std::string bit_string(const Bitstream& bs) {
    std::string s;
    for (auto b : bs.bits) s.push_back(b ? '1' : '0');
    return s;
}

class TempDir : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("trnglab_extract_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    fs::path dir_;
};

} // namespace

TEST(CountToSymbol, Examples) {
    EXPECT_EQ(count_to_symbol(0).value, 0b000);
    EXPECT_EQ(count_to_symbol(112).value, 0b111);
    EXPECT_EQ(count_to_symbol(130).value, 0b000);
    EXPECT_EQ(count_to_symbol(80).value, 0b101);
}

TEST(CountToSymbol, RejectsOutOfRange) {
    EXPECT_THROW((void)count_to_symbol(-1), std::out_of_range);
    EXPECT_THROW((void)count_to_symbol(kCounterModulus), std::out_of_range);
    EXPECT_NO_THROW((void)count_to_symbol(kCounterMax));
}

TEST(CountToSymbol, IgnoresBitsOutsideSixToFour) {
    for (std::int64_t c = 0; c < kCounterModulus; ++c) {
        const auto base = count_to_symbol(c & 0x70).value;
        EXPECT_EQ(count_to_symbol(c).value, base);
        EXPECT_LE(base, 7);
    }
}

TEST(SymbolsToBitstream, Examples) {
    EXPECT_EQ(symbols_to_bitstream({}).length(), 0u);
    EXPECT_EQ(bit_string(symbols_to_bitstream(syms({0b101, 0b010}))), "101010");
    EXPECT_EQ(bit_string(symbols_to_bitstream(syms({7, 7, 7, 7, 7}))), "111111111111111");
}

TEST(SymbolsToBitstream, ChunkingRoundTrip) {
    std::vector<OutputSymbol> all;
    for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b) all.push_back({static_cast<std::uint8_t>(a)}), all.push_back({static_cast<std::uint8_t>(b)});
    const Bitstream bs = symbols_to_bitstream(all);
    EXPECT_EQ(bs.length(), 3 * all.size());
    EXPECT_EQ(bitstream_to_symbols(bs), all);
}

TEST(PackBits, MsbFirst) {
    const std::vector<std::uint8_t> bits = {1, 0, 1, 0, 0, 0, 0, 0, 1};
    const auto bytes = pack_bits(bits);
    ASSERT_EQ(bytes.size(), 2u);
    EXPECT_EQ(bytes[0], 0xA0);
    EXPECT_EQ(bytes[1], 0x80);
    EXPECT_EQ(unpack_bits(bytes, bits.size()), bits);
    EXPECT_THROW((void)unpack_bits(bytes, 17), std::invalid_argument);
}

TEST_F(TempDir, FifteenBitStreamPacksIntoTwoBytes) {
    const Bitstream bs = symbols_to_bitstream(syms({7, 7, 7, 7, 7}));
    const auto path = dir_ / "s.bin";
    write_bitstream(bs, path);
    ASSERT_EQ(fs::file_size(path), 2u);
    std::ifstream in(path, std::ios::binary);
    unsigned char b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    EXPECT_EQ(b[0], 0xFF);
    EXPECT_EQ(b[1], 0xFE);
    EXPECT_EQ(read_bitstream(path), bs);
}

TEST_F(TempDir, EmptyStream) {
    const auto path = dir_ / "empty.bin";
    write_bitstream(Bitstream{}, path);
    EXPECT_EQ(fs::file_size(path), 0u);
    std::ifstream side(sidecar_path(path));
    const auto meta = nlohmann::json::parse(side);
    EXPECT_EQ(meta.at("length").get<int>(), 0);
    EXPECT_EQ(read_bitstream(path).length(), 0u);
}

TEST_F(TempDir, RoundTripAllSmallLengths) {
    for (std::size_t len = 0; len <= 64; ++len) {
        for (std::uint64_t pattern : {0ULL, ~0ULL, 0x9e3779b97f4a7c15ULL, 0x5555555555555555ULL}) {
            Bitstream bs;
            bs.origin = {"abc123", 60.0, len * 31 + 7, "ring"};
            for (std::size_t i = 0; i < len; ++i) bs.bits.push_back((pattern >> (63 - i)) & 1);
            const auto path = dir_ / ("rt_" + std::to_string(len) + ".bin");
            write_bitstream(bs, path);
            EXPECT_EQ(read_bitstream(path), bs) << "length " << len;
        }
    }
}

TEST_F(TempDir, DetectsCorruptFiles) {
    Bitstream bs;
    bs.bits.assign(20, 1);
    const auto path = dir_ / "c.bin";
    write_bitstream(bs, path);

    // Truncated payload.
    fs::resize_file(path, 2);
    EXPECT_THROW((void)read_bitstream(path), BitstreamFormatError);

    // Extra payload bytes.
    write_bitstream(bs, path);
    {
        std::ofstream out(path, std::ios::binary | std::ios::app);
        out.put('\0');
    }
    EXPECT_THROW((void)read_bitstream(path), BitstreamFormatError);

    // Sidecar shorter than payload: set bits fall into what should be padding.
    write_bitstream(bs, path);
    {
        std::ifstream side(sidecar_path(path));
        auto meta = nlohmann::json::parse(side);
        meta["length"] = 17;
        std::ofstream(sidecar_path(path)) << meta.dump();
    }
    EXPECT_THROW((void)read_bitstream(path), BitstreamFormatError);

    // Missing or malformed sidecar.
    write_bitstream(bs, path);
    std::ofstream(sidecar_path(path)) << "{ not json";
    EXPECT_THROW((void)read_bitstream(path), BitstreamFormatError);
    fs::remove(sidecar_path(path));
    EXPECT_THROW((void)read_bitstream(path), BitstreamFormatError);
}

TEST(RenderRaster, AllZerosIsWhite) {
    Bitstream bs;
    bs.bits.assign(100, 0);
    const Bitmap img = render_raster(bs, 10);
    EXPECT_EQ(img.width, 10u);
    EXPECT_EQ(img.height, 10u);
    for (auto p : img.pixels) EXPECT_EQ(p, 0);
}

TEST(RenderRaster, PeriodEqualToWidthGivesVerticalStripes) {
    const std::size_t width = 12;
    Bitstream bs;
    for (std::size_t i = 0; i < width * 9; ++i) bs.bits.push_back((i % width) < 5 ? 1 : 0);
    const Bitmap img = render_raster(bs, width, ScanOrder::RowMajor);
    for (std::size_t c = 0; c < width; ++c)
        for (std::size_t r = 1; r < img.height; ++r) EXPECT_EQ(img.at(r, c), img.at(0, c));
}

TEST(RenderRaster, ColumnMajorTransposesFill) {
    Bitstream bs;
    for (int i = 0; i < 6; ++i) bs.bits.push_back(i == 1 ? 1 : 0);
    const Bitmap img = render_raster(bs, 2, ScanOrder::ColumnMajor);   // height 3
    EXPECT_EQ(img.height, 3u);
    EXPECT_EQ(img.at(1, 0), 1);
    EXPECT_EQ(img.at(0, 1), 0);
    EXPECT_THROW((void)render_raster(bs, 0), std::invalid_argument);
}

TEST(RenderRaster, PartialLastRowIsWhite) {
    Bitstream bs;
    bs.bits.assign(7, 1);
    const Bitmap img = render_raster(bs, 4);
    EXPECT_EQ(img.height, 2u);
    EXPECT_EQ(img.at(1, 3), 0);
    EXPECT_EQ(img.at(1, 2), 1);
}

TEST(RenderRaster, DegradedStreamShowsPeriodicBanding) {
    // The degraded counter gains about 1.5 mod 128 per sample, so the symbol
    // sequence repeats roughly every 85 outputs. At a width of 85 symbols
    // adjacent rows line up; a random stream's rows agree only half the time.
    const auto pmf = build_increment_pmf(129.5, 1.0);
    const Bitstream infected = generate_degraded_bitstream(pmf, 100000, 4);
    Bitstream uniform;
    std::uint64_t x = 12345;
    for (std::size_t i = 0; i < infected.length(); ++i) {
        x = x * 6364136223846793005ULL + 1442695040888963407ULL;
        uniform.bits.push_back((x >> 63) & 1);
    }
    auto row_agreement = [](const Bitmap& img) {
        double same = 0, total = 0;
        for (std::size_t r = 1; r < img.height; ++r)
            for (std::size_t c = 0; c < img.width; ++c) {
                same += img.at(r, c) == img.at(r - 1, c);
                total += 1;
            }
        return same / total;
    };
    const double a_inf = row_agreement(render_raster(infected, 255));
    const double a_uni = row_agreement(render_raster(uniform, 255));
    EXPECT_NEAR(a_uni, 0.5, 0.02);
    EXPECT_GT(a_inf, 0.65);
}

TEST(WritePbm, PlainAndBinaryHeaders) {
    Bitstream bs;
    bs.bits = {1, 0, 1, 1, 0, 0, 0, 0, 1, 1};
    const Bitmap img = render_raster(bs, 10);

    std::ostringstream plain;
    write_pbm(img, plain, true);
    EXPECT_EQ(plain.str(), "P1\n10 1\n1011000011\n");

    std::ostringstream binary;
    write_pbm(img, binary, false);
    const std::string s = binary.str();
    ASSERT_EQ(s.substr(0, 8), "P4\n10 1\n");
    ASSERT_EQ(s.size(), 10u);
    EXPECT_EQ(static_cast<unsigned char>(s[8]), 0xB0);
    EXPECT_EQ(static_cast<unsigned char>(s[9]), 0xC0);
}

TEST(WritePbm, PlainLinesStayShort) {
    Bitstream bs;
    bs.bits.assign(300, 1);
    std::ostringstream os;
    write_pbm(render_raster(bs, 150), os, true);
    std::istringstream in(os.str());
    std::string line;
    while (std::getline(in, line)) EXPECT_LE(line.size(), 70u);
}
