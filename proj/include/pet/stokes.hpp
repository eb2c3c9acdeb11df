#pragma once

#include <algorithm>
#include <cmath>

#include "pet/demosaic.hpp"
#include "pet/error.hpp"
#include "pet/image.hpp"
#include "pet/parallel.hpp"
#include "pet/stats.hpp"

namespace pet {

/// Linear Stokes maps in digital-number units. s0 is the four-channel sum,
/// so it equals twice the physical S0 under ideal polarizer sampling.
struct StokesMaps {
    PlaneD s0, s1, s2;

    int width() const { return s0.width(); }
    int height() const { return s0.height(); }
};

enum class DolpConvention {
    paper_literal,  // sqrt(s1^2+s2^2)/(s0+eps) with the four-sample-sum s0; caps at 0.5
    physical_x2,    // doubled, so fully polarized light reads 1.0
};

struct ProductConfig {
    double epsilon = 1e-6 * 65536.0;  // relative to 16-bit full scale
    double mask_threshold_rel = 0.01; // fraction of s0's 99th percentile
    DolpConvention dolp_convention = DolpConvention::paper_literal;

    static ProductConfig for_bit_depth(int bit_depth) {
        ProductConfig cfg;
        cfg.epsilon = 1e-6 * std::pow(2.0, bit_depth);
        return cfg;
    }
};

/// Intensity, DoLP, AoLP and the low-s0 validity mask. Masked-out pixels
/// carry dolp = 0 and aolp = 0.
struct PolarizationProducts {
    PlaneD intensity;
    PlaneD dolp;  // in [0, 1]
    PlaneD aolp;  // radians, principal range (-pi/2, pi/2]
    MaskPlane mask;

    int width() const { return intensity.width(); }
    int height() const { return intensity.height(); }
};

/// s0 = i0+i45+i90+i135, s1 = i0-i90, s2 = i45-i135, per pixel.
inline StokesMaps compute_stokes(const PolarizationChannels& ch, int n_threads = 1) {
    const int w = ch.width();
    const int h = ch.height();
    StokesMaps maps{PlaneD(w, h), PlaneD(w, h), PlaneD(w, h)};
    parallel_blocks(h, n_threads, [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            const double* p0 = ch.i0.row(y);
            const double* p45 = ch.i45.row(y);
            const double* p90 = ch.i90.row(y);
            const double* p135 = ch.i135.row(y);
            double* s0 = maps.s0.row(y);
            double* s1 = maps.s1.row(y);
            double* s2 = maps.s2.row(y);
            for (int x = 0; x < w; ++x) {
                s0[x] = p0[x] + p45[x] + p90[x] + p135[x];
                s1[x] = p0[x] - p90[x];
                s2[x] = p45[x] - p135[x];
            }
        }
    });
    return maps;
}

/// intensity = s0/4; dolp per the stabilized ratio, clamped to [0,1];
/// aolp = 0.5*atan2(s2, s1) with atan2(0,0) := 0; pixels with s0 below
/// mask_threshold_rel * p99(s0) are masked and zeroed in dolp/aolp.
inline PolarizationProducts compute_products(const StokesMaps& maps, const ProductConfig& cfg,
                                             int n_threads = 1) {
    require(cfg.epsilon > 0.0, Errc::invalid_argument, "epsilon must be > 0");
    const int w = maps.width();
    const int h = maps.height();
    PolarizationProducts out{PlaneD(w, h), PlaneD(w, h), PlaneD(w, h), MaskPlane(w, h, 1)};

    const double p99 = plane_percentile(maps.s0, 99.0);
    const double threshold = cfg.mask_threshold_rel * p99;
    const double dolp_scale = cfg.dolp_convention == DolpConvention::physical_x2 ? 2.0 : 1.0;

    parallel_blocks(h, n_threads, [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            const double* s0 = maps.s0.row(y);
            const double* s1 = maps.s1.row(y);
            const double* s2 = maps.s2.row(y);
            double* intensity = out.intensity.row(y);
            double* dolp = out.dolp.row(y);
            double* aolp = out.aolp.row(y);
            uint8_t* mask = out.mask.row(y);
            for (int x = 0; x < w; ++x) {
                intensity[x] = 0.25 * s0[x];
                if (s0[x] < threshold) {
                    mask[x] = 0;
                    dolp[x] = 0.0;
                    aolp[x] = 0.0;
                    continue;
                }
                double amplitude = std::sqrt(s1[x] * s1[x] + s2[x] * s2[x]);
                double d = dolp_scale * amplitude / (s0[x] + cfg.epsilon);
                dolp[x] = std::clamp(d, 0.0, 1.0);
                double a = (s1[x] == 0.0 && s2[x] == 0.0) ? 0.0 : std::atan2(s2[x], s1[x]);
                aolp[x] = 0.5 * a;
            }
        }
    });
    return out;
}

/// clamp(plane / p99(plane), 0, 1); all zeros when p99 <= 0.
inline PlaneD normalize_intensity(const PlaneD& intensity) {
    require(!intensity.empty(), Errc::empty_input, "empty intensity plane");
    const double p99 = plane_percentile(intensity, 99.0);
    PlaneD out(intensity.width(), intensity.height());
    if (p99 <= 0.0) return out;
    const double inv = 1.0 / p99;
    for (size_t i = 0; i < intensity.size(); ++i)
        out.data()[i] = std::clamp(intensity.data()[i] * inv, 0.0, 1.0);
    return out;
}

// ---------------------------------------------------------------------------
// Composite rendering
// ---------------------------------------------------------------------------

enum class CompositeMode {
    methods_hsv,  // H from AoLP, S = 1, V = DoLP
    figure_hsv,   // H from AoLP, S = DoLP, V = gamma-corrected normalized intensity
};

/// Standard HSV -> RGB, h/s/v in [0,1].
inline void hsv_to_rgb(double hue, double sat, double val, double& r, double& g, double& b) {
    hue = hue - std::floor(hue);  // wrap into [0,1)
    double h6 = hue * 6.0;
    int sector = static_cast<int>(h6) % 6;
    double f = h6 - std::floor(h6);
    double p = val * (1.0 - sat);
    double q = val * (1.0 - sat * f);
    double t = val * (1.0 - sat * (1.0 - f));
    switch (sector) {
        case 0: r = val; g = t; b = p; break;
        case 1: r = q; g = val; b = p; break;
        case 2: r = p; g = val; b = t; break;
        case 3: r = p; g = q; b = val; break;
        case 4: r = t; g = p; b = val; break;
        default: r = val; g = p; b = q; break;
    }
}

inline uint8_t quantize8(double v) {
    return static_cast<uint8_t>(std::clamp(std::lround(255.0 * v), 0L, 255L));
}

/// AoLP/DoLP composite. Masked pixels render black in both modes.
inline RgbImage render_composite(const PolarizationProducts& products, CompositeMode mode,
                                 double gamma = 2.2) {
    require(gamma > 0.0, Errc::non_positive_gamma, "gamma must be > 0");
    const int w = products.width();
    const int h = products.height();
    RgbImage img(w, h);

    PlaneD value_plane;
    if (mode == CompositeMode::figure_hsv) {
        value_plane = normalize_intensity(products.intensity);
        const double inv_gamma = 1.0 / gamma;
        for (double& v : value_plane) v = std::pow(v, inv_gamma);
    }

    constexpr double kPi = 3.14159265358979323846;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            uint8_t* px = img.pixel(x, y);
            if (!products.mask.at(x, y)) {
                px[0] = px[1] = px[2] = 0;
                continue;
            }
            double hue = (products.aolp.at(x, y) + kPi / 2.0) / kPi;
            double sat = 1.0, val = 0.0;
            if (mode == CompositeMode::methods_hsv) {
                sat = 1.0;
                val = products.dolp.at(x, y);
            } else {
                sat = products.dolp.at(x, y);
                val = value_plane.at(x, y);
            }
            double r, g, b;
            hsv_to_rgb(hue, sat, val, r, g, b);
            px[0] = quantize8(r);
            px[1] = quantize8(g);
            px[2] = quantize8(b);
        }
    }
    return img;
}

}  // namespace pet
