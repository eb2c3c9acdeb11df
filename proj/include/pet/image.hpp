#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pet/error.hpp"

namespace pet {

/// Row-major 2D array. The workhorse container for mosaics, channel planes,
/// product maps and masks.
template <typename T>
class Plane {
public:
    Plane() = default;
    Plane(int width, int height, T fill = T{})
        : width_(width), height_(height),
          data_(static_cast<size_t>(width) * static_cast<size_t>(height), fill) {
        require(width > 0 && height > 0, Errc::invalid_argument, "plane dimensions must be positive");
    }
    Plane(int width, int height, std::vector<T> data)
        : width_(width), height_(height), data_(std::move(data)) {
        require(width > 0 && height > 0, Errc::invalid_argument, "plane dimensions must be positive");
        require(data_.size() == static_cast<size_t>(width) * static_cast<size_t>(height),
                Errc::dimension_mismatch, "data length does not match width*height");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& at(int x, int y) { return data_[static_cast<size_t>(y) * width_ + x]; }
    const T& at(int x, int y) const { return data_[static_cast<size_t>(y) * width_ + x]; }

    T* row(int y) { return data_.data() + static_cast<size_t>(y) * width_; }
    const T* row(int y) const { return data_.data() + static_cast<size_t>(y) * width_; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& storage() { return data_; }
    const std::vector<T>& storage() const { return data_; }

    auto begin() { return data_.begin(); }
    auto end() { return data_.end(); }
    auto begin() const { return data_.begin(); }
    auto end() const { return data_.end(); }

    bool same_shape(const Plane& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    bool operator==(const Plane& other) const {
        return width_ == other.width_ && height_ == other.height_ && data_ == other.data_;
    }

    template <typename F>
    Plane<std::invoke_result_t<F, T>> map(F&& f) const {
        Plane<std::invoke_result_t<F, T>> out(width_, height_);
        for (size_t i = 0; i < data_.size(); ++i) out.data()[i] = f(data_[i]);
        return out;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

using PlaneD = Plane<double>;
using PlaneU16 = Plane<uint16_t>;
using PlaneU8 = Plane<uint8_t>;
using MaskPlane = Plane<uint8_t>;  // 1 = valid

/// 8-bit interleaved RGB image, used by the composite renderer and PNG writer.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> rgb;  // 3 bytes per pixel, row-major

    RgbImage() = default;
    RgbImage(int w, int h) : width(w), height(h), rgb(static_cast<size_t>(w) * h * 3, 0) {}

    uint8_t* pixel(int x, int y) { return rgb.data() + 3 * (static_cast<size_t>(y) * width + x); }
    const uint8_t* pixel(int x, int y) const {
        return rgb.data() + 3 * (static_cast<size_t>(y) * width + x);
    }
};

}  // namespace pet
