#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pet/error.hpp"
#include "pet/image.hpp"

namespace pet {

// ---------------------------------------------------------------------------
// Superpixel layout
// ---------------------------------------------------------------------------

/// Polarizer angle (degrees) at each position of the repeating 2x2 cell.
/// angle_at[row][col]; the four angles are a permutation of {0,45,90,135}.
struct SuperpixelLayout {
    std::array<std::array<int, 2>, 2> angle_at{{{90, 45}, {135, 0}}};

    /// Commercial wire-grid PFA ordering (row-major in the cell): 90,45 / 135,0.
    static SuperpixelLayout standard() { return SuperpixelLayout{}; }

    bool valid() const {
        bool seen[4] = {false, false, false, false};
        for (const auto& row : angle_at) {
            for (int a : row) {
                int idx = -1;
                if (a == 0) idx = 0;
                else if (a == 45) idx = 1;
                else if (a == 90) idx = 2;
                else if (a == 135) idx = 3;
                if (idx < 0 || seen[idx]) return false;
                seen[idx] = true;
            }
        }
        return true;
    }

    /// (row, col) of the given angle within the 2x2 cell.
    std::pair<int, int> position_of(int angle_deg) const {
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c)
                if (angle_at[r][c] == angle_deg) return {r, c};
        fail(Errc::invalid_argument, "angle not present in layout");
    }

    bool operator==(const SuperpixelLayout&) const = default;
};

// ---------------------------------------------------------------------------
// Raw mosaic frames ( .pfaraw + .pfaraw.json sidecar )
// ---------------------------------------------------------------------------

/// One 16-bit PFA capture. Samples are digital numbers, row-major,
/// all < 2^bit_depth; width and height are even.
struct RawMosaicFrame {
    int width = 0;
    int height = 0;
    int bit_depth = 16;
    SuperpixelLayout layout;
    std::vector<uint16_t> data;

    uint16_t at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
    uint16_t& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }

    void validate() const {
        require(width > 0 && height > 0, Errc::invalid_argument, "frame dimensions must be positive");
        require(width % 2 == 0 && height % 2 == 0, Errc::odd_dimensions,
                "mosaic frame dimensions must be even");
        require(bit_depth >= 1 && bit_depth <= 16, Errc::invalid_argument,
                "bit_depth must be in [1,16]");
        require(layout.valid(), Errc::invalid_argument,
                "layout angles must be a permutation of {0,45,90,135}");
        require(data.size() == static_cast<size_t>(width) * static_cast<size_t>(height),
                Errc::dimension_mismatch, "data length does not match width*height");
        const uint32_t limit = 1u << bit_depth;
        for (uint16_t v : data)
            require(v < limit, Errc::range_error, "sample exceeds 2^bit_depth - 1");
    }

    bool operator==(const RawMosaicFrame&) const = default;
};

namespace detail {

inline nlohmann::json layout_to_json(const SuperpixelLayout& layout) {
    return nlohmann::json::array({
        nlohmann::json::array({layout.angle_at[0][0], layout.angle_at[0][1]}),
        nlohmann::json::array({layout.angle_at[1][0], layout.angle_at[1][1]}),
    });
}

inline SuperpixelLayout layout_from_json(const nlohmann::json& j) {
    SuperpixelLayout layout;
    require(j.is_array() && j.size() == 2 && j[0].size() == 2 && j[1].size() == 2,
            Errc::parse_error, "layout must be a 2x2 array");
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) layout.angle_at[r][c] = j[r][c].get<int>();
    require(layout.valid(), Errc::parse_error, "layout angles must be a permutation of {0,45,90,135}");
    return layout;
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), Errc::missing_file, "cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::parse_error, path.string() + ": " + e.what());
    }
    return j;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), Errc::io_failure, "cannot open " + path.string() + " for writing");
    out << text;
    require(out.good(), Errc::io_failure, "write failed: " + path.string());
}

}  // namespace detail

inline constexpr const char* kRawMagic = "PFA1";
inline constexpr const char* kTensorMagic = "PFT1";

/// Writes `<path>` (little-endian u16 payload) and `<path>.json` (header).
inline void write_raw_frame(const RawMosaicFrame& frame, const std::filesystem::path& path) {
    frame.validate();
    nlohmann::json header = {
        {"magic", kRawMagic},
        {"width", frame.width},
        {"height", frame.height},
        {"bit_depth", frame.bit_depth},
        {"layout", detail::layout_to_json(frame.layout)},
    };
    detail::write_text_file(path.string() + ".json", header.dump(2) + "\n");

    std::ofstream out(path, std::ios::binary);
    require(out.good(), Errc::io_failure, "cannot open " + path.string() + " for writing");
    std::vector<uint8_t> bytes(frame.data.size() * 2);
    for (size_t i = 0; i < frame.data.size(); ++i) {
        bytes[2 * i] = static_cast<uint8_t>(frame.data[i] & 0xFF);
        bytes[2 * i + 1] = static_cast<uint8_t>(frame.data[i] >> 8);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    require(out.good(), Errc::io_failure, "write failed: " + path.string());
}

/// Reads a frame written by write_raw_frame. Sample values are returned
/// exactly as stored; no scaling is applied.
inline RawMosaicFrame read_raw_frame(const std::filesystem::path& path) {
    require(std::filesystem::exists(path), Errc::missing_file, path.string());
    require(std::filesystem::exists(path.string() + ".json"), Errc::missing_file,
            path.string() + ".json");
    nlohmann::json header = detail::read_json_file(path.string() + ".json");
    require(header.value("magic", std::string{}) == kRawMagic, Errc::bad_magic,
            "expected magic PFA1 in " + path.string() + ".json");

    RawMosaicFrame frame;
    try {
        frame.width = header.at("width").get<int>();
        frame.height = header.at("height").get<int>();
        frame.bit_depth = header.at("bit_depth").get<int>();
        frame.layout = detail::layout_from_json(header.at("layout"));
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::parse_error, path.string() + ".json: " + e.what());
    }
    require(frame.width > 0 && frame.height > 0, Errc::parse_error, "non-positive dimensions");
    require(frame.width % 2 == 0 && frame.height % 2 == 0, Errc::odd_dimensions,
            "mosaic frame dimensions must be even");

    std::ifstream in(path, std::ios::binary);
    require(in.good(), Errc::missing_file, path.string());
    in.seekg(0, std::ios::end);
    const auto file_size = static_cast<size_t>(in.tellg());
    in.seekg(0, std::ios::beg);
    const size_t expected = static_cast<size_t>(frame.width) * frame.height * 2;
    require(file_size == expected, Errc::dimension_mismatch,
            "payload size does not match header dimensions: " + path.string());

    std::vector<uint8_t> bytes(expected);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(expected));
    require(in.good(), Errc::io_failure, "read failed: " + path.string());
    frame.data.resize(expected / 2);
    for (size_t i = 0; i < frame.data.size(); ++i) {
        frame.data[i] = static_cast<uint16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8));
    }
    frame.validate();
    return frame;
}

// ---------------------------------------------------------------------------
// Real-valued tensor files ( .pft + .pft.json sidecar, magic PFT1 )
// ---------------------------------------------------------------------------

/// Named stack of equally-sized real planes; the interchange format for
/// channels, products and model inputs. Stored as little-endian float32.
struct TensorFile {
    std::vector<std::string> names;
    std::vector<PlaneD> planes;

    void validate() const {
        require(!planes.empty(), Errc::invalid_argument, "tensor must contain at least one plane");
        require(names.size() == planes.size(), Errc::dimension_mismatch,
                "tensor names/planes length mismatch");
        for (const auto& p : planes)
            require(p.same_shape(planes.front()), Errc::dimension_mismatch,
                    "tensor planes must share dimensions");
    }
};

inline void write_tensor(const TensorFile& tensor, const std::filesystem::path& path) {
    tensor.validate();
    nlohmann::json header = {
        {"magic", kTensorMagic},
        {"width", tensor.planes.front().width()},
        {"height", tensor.planes.front().height()},
        {"planes", tensor.planes.size()},
        {"names", tensor.names},
    };
    detail::write_text_file(path.string() + ".json", header.dump(2) + "\n");

    std::ofstream out(path, std::ios::binary);
    require(out.good(), Errc::io_failure, "cannot open " + path.string() + " for writing");
    for (const auto& plane : tensor.planes) {
        std::vector<uint8_t> bytes(plane.size() * 4);
        for (size_t i = 0; i < plane.size(); ++i) {
            float f = static_cast<float>(plane.data()[i]);
            uint32_t u;
            static_assert(sizeof(u) == sizeof(f));
            std::memcpy(&u, &f, 4);
            bytes[4 * i] = static_cast<uint8_t>(u & 0xFF);
            bytes[4 * i + 1] = static_cast<uint8_t>((u >> 8) & 0xFF);
            bytes[4 * i + 2] = static_cast<uint8_t>((u >> 16) & 0xFF);
            bytes[4 * i + 3] = static_cast<uint8_t>((u >> 24) & 0xFF);
        }
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
    }
    require(out.good(), Errc::io_failure, "write failed: " + path.string());
}

inline TensorFile read_tensor(const std::filesystem::path& path) {
    require(std::filesystem::exists(path), Errc::missing_file, path.string());
    nlohmann::json header = detail::read_json_file(path.string() + ".json");
    require(header.value("magic", std::string{}) == kTensorMagic, Errc::bad_magic,
            "expected magic PFT1 in " + path.string() + ".json");
    int width = 0, height = 0;
    size_t n_planes = 0;
    TensorFile tensor;
    try {
        width = header.at("width").get<int>();
        height = header.at("height").get<int>();
        n_planes = header.at("planes").get<size_t>();
        tensor.names = header.at("names").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::parse_error, path.string() + ".json: " + e.what());
    }
    require(width > 0 && height > 0 && n_planes > 0, Errc::parse_error, "bad tensor header");
    require(tensor.names.size() == n_planes, Errc::parse_error, "names length mismatch");

    std::ifstream in(path, std::ios::binary);
    require(in.good(), Errc::missing_file, path.string());
    in.seekg(0, std::ios::end);
    const auto file_size = static_cast<size_t>(in.tellg());
    in.seekg(0, std::ios::beg);
    const size_t per_plane = static_cast<size_t>(width) * height;
    require(file_size == per_plane * n_planes * 4, Errc::dimension_mismatch,
            "payload size does not match header: " + path.string());

    std::vector<uint8_t> bytes(per_plane * 4);
    for (size_t p = 0; p < n_planes; ++p) {
        in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        require(in.good(), Errc::io_failure, "read failed: " + path.string());
        PlaneD plane(width, height);
        for (size_t i = 0; i < per_plane; ++i) {
            uint32_t u = static_cast<uint32_t>(bytes[4 * i]) |
                         (static_cast<uint32_t>(bytes[4 * i + 1]) << 8) |
                         (static_cast<uint32_t>(bytes[4 * i + 2]) << 16) |
                         (static_cast<uint32_t>(bytes[4 * i + 3]) << 24);
            float f;
            std::memcpy(&f, &u, 4);
            plane.data()[i] = static_cast<double>(f);
        }
        tensor.planes.push_back(std::move(plane));
    }
    return tensor;
}

}  // namespace pet
