#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "pet/error.hpp"
#include "pet/image.hpp"

namespace pet {

// One percentile definition for the whole toolkit: sort ascending, fractional
// index h = (n-1)*p/100, linear interpolation between the bracketing order
// statistics.

/// Percentile of an already-sorted ascending vector.
inline double percentile_sorted(const std::vector<double>& sorted, double p) {
    require(!sorted.empty(), Errc::empty_input, "percentile of empty list");
    const size_t n = sorted.size();
    if (n == 1) return sorted[0];
    double h = static_cast<double>(n - 1) * p / 100.0;
    if (h <= 0.0) return sorted.front();
    if (h >= static_cast<double>(n - 1)) return sorted.back();
    size_t lo = static_cast<size_t>(h);
    double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double percentile(std::vector<double> values, double p) {
    require(!values.empty(), Errc::empty_input, "percentile of empty list");
    std::sort(values.begin(), values.end());
    return percentile_sorted(values, p);
}

inline double median(std::vector<double> values) { return percentile(std::move(values), 50.0); }

/// Median absolute deviation (not scaled to sigma).
inline double mad(const std::vector<double>& values) {
    double m = median(values);
    std::vector<double> dev(values.size());
    for (size_t i = 0; i < values.size(); ++i) dev[i] = std::abs(values[i] - m);
    return median(std::move(dev));
}

/// Same order statistics as percentile() but via selection instead of a full
/// sort; used on multi-megapixel planes. Mutates its scratch argument.
inline double percentile_select(std::vector<double>& scratch, double p) {
    require(!scratch.empty(), Errc::empty_input, "percentile of empty list");
    const size_t n = scratch.size();
    if (n == 1) return scratch[0];
    double h = static_cast<double>(n - 1) * p / 100.0;
    if (h <= 0.0) return *std::min_element(scratch.begin(), scratch.end());
    if (h >= static_cast<double>(n - 1)) return *std::max_element(scratch.begin(), scratch.end());
    size_t lo = static_cast<size_t>(h);
    double frac = h - static_cast<double>(lo);
    std::nth_element(scratch.begin(), scratch.begin() + lo, scratch.end());
    double v_lo = scratch[lo];
    double v_hi = *std::min_element(scratch.begin() + lo + 1, scratch.end());
    return v_lo + frac * (v_hi - v_lo);
}

inline double plane_percentile(const PlaneD& plane, double p) {
    std::vector<double> scratch(plane.begin(), plane.end());
    return percentile_select(scratch, p);
}

struct MeanVar {
    double mean = 0.0;
    double variance = 0.0;  // population (1/N)
};

inline MeanVar mean_variance(const PlaneD& plane) {
    MeanVar mv;
    double sum = 0.0;
    for (double v : plane) sum += v;
    mv.mean = sum / static_cast<double>(plane.size());
    double ss = 0.0;
    for (double v : plane) {
        double d = v - mv.mean;
        ss += d * d;
    }
    mv.variance = ss / static_cast<double>(plane.size());
    return mv;
}

}  // namespace pet
