#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include <zlib.h>

#include "pet/error.hpp"
#include "pet/image.hpp"

namespace pet {

namespace detail {

inline void png_append_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>((v >> 24) & 0xFF));
    out.push_back(static_cast<uint8_t>((v >> 16) & 0xFF));
    out.push_back(static_cast<uint8_t>((v >> 8) & 0xFF));
    out.push_back(static_cast<uint8_t>(v & 0xFF));
}

inline void png_append_chunk(std::vector<uint8_t>& out, const char type[4],
                             const std::vector<uint8_t>& payload) {
    png_append_u32(out, static_cast<uint32_t>(payload.size()));
    size_t crc_begin = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    uint32_t crc = static_cast<uint32_t>(
        ::crc32(0, out.data() + crc_begin, static_cast<uInt>(out.size() - crc_begin)));
    png_append_u32(out, crc);
}

}  // namespace detail

/// Encodes an 8-bit RGB PNG (color type 2, filter 0 per scanline). The
/// deflate level is fixed so identical pixels give identical bytes.
inline std::vector<uint8_t> encode_png_rgb8(const RgbImage& img) {
    require(img.width > 0 && img.height > 0, Errc::invalid_argument, "empty image");
    require(img.rgb.size() == static_cast<size_t>(img.width) * img.height * 3,
            Errc::dimension_mismatch, "rgb buffer size mismatch");

    // raw scanlines with filter byte 0
    std::vector<uint8_t> raw;
    raw.reserve(static_cast<size_t>(img.height) * (1 + 3 * img.width));
    for (int y = 0; y < img.height; ++y) {
        raw.push_back(0);
        const uint8_t* row = img.rgb.data() + static_cast<size_t>(y) * img.width * 3;
        raw.insert(raw.end(), row, row + static_cast<size_t>(img.width) * 3);
    }

    uLongf bound = ::compressBound(static_cast<uLong>(raw.size()));
    std::vector<uint8_t> compressed(bound);
    int rc = ::compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6);
    require(rc == Z_OK, Errc::io_failure, "zlib compression failed");
    compressed.resize(bound);

    std::vector<uint8_t> out = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    std::vector<uint8_t> ihdr;
    detail::png_append_u32(ihdr, static_cast<uint32_t>(img.width));
    detail::png_append_u32(ihdr, static_cast<uint32_t>(img.height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // color type: truecolor
    ihdr.push_back(0);  // compression
    ihdr.push_back(0);  // filter
    ihdr.push_back(0);  // interlace
    detail::png_append_chunk(out, "IHDR", ihdr);
    detail::png_append_chunk(out, "IDAT", compressed);
    detail::png_append_chunk(out, "IEND", {});
    return out;
}

inline void write_png_rgb8(const RgbImage& img, const std::filesystem::path& path) {
    std::vector<uint8_t> bytes = encode_png_rgb8(img);
    std::ofstream out(path, std::ios::binary);
    require(out.good(), Errc::io_failure, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    require(out.good(), Errc::io_failure, "write failed: " + path.string());
}

/// Grayscale helper: clamps to [0,1] and replicates into RGB.
inline RgbImage gray_to_rgb(const PlaneD& plane) {
    RgbImage img(plane.width(), plane.height());
    for (int y = 0; y < plane.height(); ++y)
        for (int x = 0; x < plane.width(); ++x) {
            double v = std::clamp(plane.at(x, y), 0.0, 1.0);
            uint8_t g = static_cast<uint8_t>(std::lround(255.0 * v));
            uint8_t* px = img.pixel(x, y);
            px[0] = px[1] = px[2] = g;
        }
    return img;
}

}  // namespace pet
