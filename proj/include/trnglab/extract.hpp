#pragma once

// TRNG output extraction (COUNT[6:4]), bitstream container and raster rendering.
//
// Bit order is MSB-first everywhere: a symbol contributes bit 6, 5, 4 of the
// count in that order, and the first bit of a stream lands in bit 7 of the first
// payload byte.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ro_sim.hpp"

namespace trnglab {

struct OutputSymbol {
    std::uint8_t value = 0;

    friend bool operator==(OutputSymbol, OutputSymbol) = default;
};

[[nodiscard]] inline OutputSymbol count_to_symbol(std::int64_t count) {
    if (count < 0 || count > static_cast<std::int64_t>(kCounterMax))
        throw std::out_of_range("count_to_symbol: count outside the 14-bit counter range");
    return OutputSymbol{static_cast<std::uint8_t>((count >> 4) & 0x7)};
}

struct BitstreamOrigin {
    std::string config_digest;
    double temperature_degC = kReferenceTempDegC;
    std::uint64_t seed = 0;
    std::string source;   // "ring" or "degraded"

    friend bool operator==(const BitstreamOrigin&, const BitstreamOrigin&) = default;
};

struct Bitstream {
    std::vector<std::uint8_t> bits;   // one 0/1 value per element
    BitstreamOrigin origin;

    [[nodiscard]] std::size_t length() const noexcept { return bits.size(); }

    void append_symbol(OutputSymbol s) {
        bits.push_back((s.value >> 2) & 1);
        bits.push_back((s.value >> 1) & 1);
        bits.push_back(s.value & 1);
    }

    friend bool operator==(const Bitstream&, const Bitstream&) = default;
};

[[nodiscard]] inline Bitstream symbols_to_bitstream(std::span<const OutputSymbol> symbols,
                                                    BitstreamOrigin origin = {}) {
    Bitstream bs;
    bs.origin = std::move(origin);
    bs.bits.reserve(3 * symbols.size());
    for (OutputSymbol s : symbols) bs.append_symbol(s);
    return bs;
}

/// Inverse of symbols_to_bitstream; a trailing partial symbol is dropped.
[[nodiscard]] inline std::vector<OutputSymbol> bitstream_to_symbols(const Bitstream& bs) {
    std::vector<OutputSymbol> out;
    out.reserve(bs.length() / 3);
    for (std::size_t i = 0; i + 3 <= bs.length(); i += 3)
        out.push_back(OutputSymbol{static_cast<std::uint8_t>((bs.bits[i] << 2) |
                                                             (bs.bits[i + 1] << 1) |
                                                             bs.bits[i + 2])});
    return out;
}

[[nodiscard]] inline std::vector<std::uint8_t> pack_bits(std::span<const std::uint8_t> bits) {
    std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) bytes[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    return bytes;
}

[[nodiscard]] inline std::vector<std::uint8_t> unpack_bits(std::span<const std::uint8_t> bytes,
                                                           std::size_t length) {
    if (bytes.size() * 8 < length) throw std::invalid_argument("unpack_bits: not enough bytes");
    std::vector<std::uint8_t> bits(length);
    for (std::size_t i = 0; i < length; ++i) bits[i] = (bytes[i / 8] >> (7 - i % 8)) & 1;
    return bits;
}

[[nodiscard]] inline std::filesystem::path sidecar_path(const std::filesystem::path& payload) {
    auto p = payload;
    p += ".json";
    return p;
}

class BitstreamFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Writes the packed payload to `path` and the metadata sidecar to `path`.json.
inline void write_bitstream(const Bitstream& bs, const std::filesystem::path& path) {
    const auto bytes = pack_bits(bs.bits);
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("write failed: " + path.string());
    }
    nlohmann::ordered_json meta;
    meta["format"] = "trnglab-bitstream";
    meta["version"] = 1;
    meta["length"] = bs.length();
    meta["bit_order"] = "msb-first";
    meta["origin"] = {{"config_digest", bs.origin.config_digest},
                      {"temperature_degC", bs.origin.temperature_degC},
                      {"seed", bs.origin.seed},
                      {"source", bs.origin.source}};
    std::ofstream side(sidecar_path(path), std::ios::trunc);
    if (!side) throw std::runtime_error("cannot open sidecar for " + path.string());
    side << meta.dump(2) << '\n';
    if (!side) throw std::runtime_error("sidecar write failed: " + path.string());
}

[[nodiscard]] inline Bitstream read_bitstream(const std::filesystem::path& path) {
    std::ifstream side(sidecar_path(path));
    if (!side) throw BitstreamFormatError("missing sidecar " + sidecar_path(path).string());
    nlohmann::json meta;
    try {
        side >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw BitstreamFormatError("malformed sidecar: " + std::string(e.what()));
    }
    if (meta.value("format", "") != "trnglab-bitstream")
        throw BitstreamFormatError("sidecar is not a trnglab bitstream record");

    Bitstream bs;
    std::size_t length = 0;
    try {
        length = meta.at("length").get<std::size_t>();
        const auto& o = meta.at("origin");
        bs.origin.config_digest = o.value("config_digest", "");
        bs.origin.temperature_degC = o.value("temperature_degC", kReferenceTempDegC);
        bs.origin.seed = o.value("seed", std::uint64_t{0});
        bs.origin.source = o.value("source", "");
    } catch (const nlohmann::json::exception& e) {
        throw BitstreamFormatError("malformed sidecar: " + std::string(e.what()));
    }

    std::ifstream in(path, std::ios::binary);
    if (!in) throw BitstreamFormatError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    const std::size_t expected = (length + 7) / 8;
    if (bytes.size() < expected)
        throw BitstreamFormatError("truncated payload: " + std::to_string(bytes.size()) +
                                   " bytes, sidecar length needs " + std::to_string(expected));
    if (bytes.size() > expected)
        throw BitstreamFormatError("payload has " + std::to_string(bytes.size()) +
                                   " bytes but sidecar length needs " + std::to_string(expected));
    if (length % 8 != 0 && (bytes.back() & (0xFFu >> (length % 8))) != 0)
        throw BitstreamFormatError("nonzero padding bits; length mismatch with sidecar");
    bs.bits = unpack_bits(bytes, length);
    return bs;
}

enum class ScanOrder { RowMajor, ColumnMajor };

/// Monochrome image, row-major pixels, 1 = black.
struct Bitmap {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;

    [[nodiscard]] std::uint8_t at(std::size_t row, std::size_t col) const {
        return pixels[row * width + col];
    }
};

/// Row-major fills left-to-right then top-to-bottom; column-major fills
/// top-to-bottom then left-to-right. Pixels past the end of the stream are white.
[[nodiscard]] inline Bitmap render_raster(const Bitstream& bs, std::size_t width,
                                          ScanOrder order = ScanOrder::RowMajor) {
    if (width == 0) throw std::invalid_argument("render_raster: width must be >= 1");
    Bitmap img;
    img.width = width;
    img.height = (bs.length() + width - 1) / width;
    img.pixels.assign(img.width * img.height, 0);
    for (std::size_t i = 0; i < bs.length(); ++i) {
        const std::size_t row = order == ScanOrder::RowMajor ? i / width : i % img.height;
        const std::size_t col = order == ScanOrder::RowMajor ? i % width : i / img.height;
        img.pixels[row * width + col] = bs.bits[i];
    }
    return img;
}

inline void write_pbm(const Bitmap& img, std::ostream& os, bool plain = false) {
    if (plain) {
        os << "P1\n" << img.width << ' ' << img.height << '\n';
        for (std::size_t r = 0; r < img.height; ++r) {
            // Plain PBM lines should stay under 70 characters.
            for (std::size_t c = 0; c < img.width; ++c)
                os << (img.at(r, c) ? '1' : '0') << ((c + 1) % 64 == 0 || c + 1 == img.width ? "\n" : "");
        }
        return;
    }
    os << "P4\n" << img.width << ' ' << img.height << '\n';
    std::vector<std::uint8_t> row_bytes;
    for (std::size_t r = 0; r < img.height; ++r) {
        row_bytes = pack_bits(std::span(img.pixels).subspan(r * img.width, img.width));
        os.write(reinterpret_cast<const char*>(row_bytes.data()),
                 static_cast<std::streamsize>(row_bytes.size()));
    }
}

} // namespace trnglab
