#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "pet/error.hpp"
#include "pet/image.hpp"
#include "pet/mosaic.hpp"
#include "pet/parallel.hpp"

namespace pet {

enum class ChannelProvenance { full_res_interpolated, superpixel_half_res };

/// Four co-registered planes at 0/45/90/135 degrees.
struct PolarizationChannels {
    PlaneD i0, i45, i90, i135;
    ChannelProvenance provenance = ChannelProvenance::full_res_interpolated;

    int width() const { return i0.width(); }
    int height() const { return i0.height(); }

    PlaneD& plane(int angle_deg) {
        switch (angle_deg) {
            case 0: return i0;
            case 45: return i45;
            case 90: return i90;
            case 135: return i135;
        }
        fail(Errc::invalid_argument, "angle must be one of 0,45,90,135");
    }
    const PlaneD& plane(int angle_deg) const {
        return const_cast<PolarizationChannels*>(this)->plane(angle_deg);
    }
};

/// Real-valued mosaic: same sample geometry as RawMosaicFrame but without
/// quantization. The demosaic kernels below run on this representation; the
/// integer frame is converted on entry so both paths share one code path.
struct RealMosaic {
    PlaneD samples;
    SuperpixelLayout layout;
};

inline RealMosaic to_real_mosaic(const RawMosaicFrame& frame) {
    frame.validate();
    PlaneD samples(frame.width, frame.height);
    for (size_t i = 0; i < frame.data.size(); ++i)
        samples.data()[i] = static_cast<double>(frame.data[i]);
    return RealMosaic{std::move(samples), frame.layout};
}

/// Half-resolution pathway: one output pixel per 2x2 superpixel, each plane
/// taking the single sample of its angle inside the cell. No interpolation.
inline PolarizationChannels split_superpixels(const RealMosaic& mosaic) {
    const PlaneD& m = mosaic.samples;
    require(m.width() % 2 == 0 && m.height() % 2 == 0, Errc::odd_dimensions,
            "mosaic dimensions must be even");
    const int ow = m.width() / 2;
    const int oh = m.height() / 2;
    PolarizationChannels ch{PlaneD(ow, oh), PlaneD(ow, oh), PlaneD(ow, oh), PlaneD(ow, oh),
                            ChannelProvenance::superpixel_half_res};
    for (int angle : {0, 45, 90, 135}) {
        auto [r, c] = mosaic.layout.position_of(angle);
        PlaneD& out = ch.plane(angle);
        for (int y = 0; y < oh; ++y) {
            const double* src = m.row(2 * y + r);
            double* dst = out.row(y);
            for (int x = 0; x < ow; ++x) dst[x] = src[2 * x + c];
        }
    }
    return ch;
}

inline PolarizationChannels split_superpixels(const RawMosaicFrame& frame) {
    return split_superpixels(to_real_mosaic(frame));
}

namespace detail {

// Interpolates one angle's rectangular subgrid (carriers at x ≡ cx (mod 2),
// y ≡ cy (mod 2)) to full resolution. Carrier pixels are copied bit-exactly;
// others average the nearest same-angle carriers with edge replication.
inline void interpolate_subgrid(const PlaneD& m, int cx, int cy, PlaneD& out, int y0, int y1) {
    const int w = m.width();
    const int h = m.height();
    auto clamp_carrier_x = [&](int x) {
        if (x < cx) return cx;
        int max_cx = cx + ((w - 1 - cx) / 2) * 2;
        return x > max_cx ? max_cx : x;
    };
    auto clamp_carrier_y = [&](int y) {
        if (y < cy) return cy;
        int max_cy = cy + ((h - 1 - cy) / 2) * 2;
        return y > max_cy ? max_cy : y;
    };

    for (int y = y0; y < y1; ++y) {
        const bool on_row = ((y - cy) & 1) == 0;
        double* dst = out.row(y);
        if (on_row) {
            const double* src = m.row(y);
            for (int x = 0; x < w; ++x) {
                if (((x - cx) & 1) == 0) {
                    dst[x] = src[x];  // carrier: exact
                } else {
                    int xl = clamp_carrier_x(x - 1);
                    int xr = clamp_carrier_x(x + 1);
                    dst[x] = 0.5 * (src[xl] + src[xr]);
                }
            }
        } else {
            int yu = clamp_carrier_y(y - 1);
            int yd = clamp_carrier_y(y + 1);
            const double* up = m.row(yu);
            const double* dn = m.row(yd);
            for (int x = 0; x < w; ++x) {
                if (((x - cx) & 1) == 0) {
                    dst[x] = 0.5 * (up[x] + dn[x]);
                } else {
                    int xl = clamp_carrier_x(x - 1);
                    int xr = clamp_carrier_x(x + 1);
                    dst[x] = 0.25 * (up[xl] + up[xr] + dn[xl] + dn[xr]);
                }
            }
        }
    }
}

}  // namespace detail

/// Full-resolution bilinear demosaic. Exact at carrier pixels of each angle;
/// reproduces affine sample fields at interior pixels.
inline PolarizationChannels demosaic_bilinear(const RealMosaic& mosaic, int n_threads = 1) {
    const PlaneD& m = mosaic.samples;
    require(m.width() % 2 == 0 && m.height() % 2 == 0, Errc::odd_dimensions,
            "mosaic dimensions must be even");
    PolarizationChannels ch{PlaneD(m.width(), m.height()), PlaneD(m.width(), m.height()),
                            PlaneD(m.width(), m.height()), PlaneD(m.width(), m.height()),
                            ChannelProvenance::full_res_interpolated};
    for (int angle : {0, 45, 90, 135}) {
        auto [r, c] = mosaic.layout.position_of(angle);
        PlaneD& out = ch.plane(angle);
        parallel_blocks(m.height(), n_threads, [&](int y0, int y1) {
            detail::interpolate_subgrid(m, c, r, out, y0, y1);
        });
    }
    return ch;
}

inline PolarizationChannels demosaic_bilinear(const RawMosaicFrame& frame, int n_threads = 1) {
    return demosaic_bilinear(to_real_mosaic(frame), n_threads);
}

/// Truncated, renormalized Gaussian taps: radius ceil(3*sigma), sum 1.
inline std::vector<double> gaussian_kernel(double sigma) {
    require(sigma > 0.0, Errc::non_positive_sigma, "sigma must be > 0");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> taps(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        double v = std::exp(-0.5 * (static_cast<double>(i) * i) / (sigma * sigma));
        taps[i + radius] = v;
        sum += v;
    }
    for (double& v : taps) v /= sum;
    return taps;
}

/// Separable Gaussian smoothing with replicated borders.
inline PlaneD gaussian_smooth(const PlaneD& plane, double sigma, int n_threads = 1) {
    const std::vector<double> taps = gaussian_kernel(sigma);
    const int radius = static_cast<int>(taps.size() / 2);
    const int w = plane.width();
    const int h = plane.height();

    PlaneD horizontal(w, h);
    parallel_blocks(h, n_threads, [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            const double* src = plane.row(y);
            double* dst = horizontal.row(y);
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k) {
                    int xx = std::clamp(x + k, 0, w - 1);
                    acc += taps[k + radius] * src[xx];
                }
                dst[x] = acc;
            }
        }
    });

    PlaneD out(w, h);
    parallel_blocks(h, n_threads, [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            double* dst = out.row(y);
            for (int k = -radius; k <= radius; ++k) {
                int yy = std::clamp(y + k, 0, h - 1);
                const double* src = horizontal.row(yy);
                const double tap = taps[k + radius];
                if (k == -radius) {
                    for (int x = 0; x < w; ++x) dst[x] = tap * src[x];
                } else {
                    for (int x = 0; x < w; ++x) dst[x] += tap * src[x];
                }
            }
        }
    });
    return out;
}

inline PolarizationChannels gaussian_smooth(const PolarizationChannels& channels, double sigma,
                                            int n_threads = 1) {
    PolarizationChannels out;
    out.provenance = channels.provenance;
    out.i0 = gaussian_smooth(channels.i0, sigma, n_threads);
    out.i45 = gaussian_smooth(channels.i45, sigma, n_threads);
    out.i90 = gaussian_smooth(channels.i90, sigma, n_threads);
    out.i135 = gaussian_smooth(channels.i135, sigma, n_threads);
    return out;
}

}  // namespace pet
