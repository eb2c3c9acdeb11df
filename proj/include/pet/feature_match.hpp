#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "pet/demosaic.hpp"
#include "pet/error.hpp"
#include "pet/image.hpp"
#include "pet/rng.hpp"

namespace pet {

// ---------------------------------------------------------------------------
// Scale-space keypoints and descriptors (difference-of-Gaussians detector,
// 4x4x8 gradient-histogram descriptor)
// ---------------------------------------------------------------------------

struct Keypoint {
    double x = 0.0;
    double y = 0.0;
    double scale = 0.0;        // sigma in input-image pixels
    double orientation = 0.0;  // radians
    double response = 0.0;     // |DoG| at the refined extremum
};

struct Descriptor {
    std::array<float, 128> v{};

    double dot(const Descriptor& other) const {
        double s = 0.0;
        for (int i = 0; i < 128; ++i) s += static_cast<double>(v[i]) * other.v[i];
        return s;
    }
    double dist2(const Descriptor& other) const {
        double s = 0.0;
        for (int i = 0; i < 128; ++i) {
            double d = static_cast<double>(v[i]) - other.v[i];
            s += d * d;
        }
        return s;
    }
};

struct Feature {
    Keypoint keypoint;
    Descriptor descriptor;
};

struct DetectParams {
    int n_octaves = 4;
    int scales_per_octave = 3;
    double contrast_threshold = 0.03;  // on [0,1]-scaled images
    double edge_threshold = 10.0;      // principal-curvature ratio limit
    double base_sigma = 1.6;
};

namespace fm_detail {

constexpr double kPi = 3.14159265358979323846;

inline PlaneD downsample2(const PlaneD& src) {
    PlaneD out(std::max(1, src.width() / 2), std::max(1, src.height() / 2));
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) out.at(x, y) = src.at(2 * x, 2 * y);
    return out;
}

struct ScaleSpace {
    // gauss[o][i]: octave o, level i (scales_per_octave + 3 levels)
    std::vector<std::vector<PlaneD>> gauss;
    std::vector<std::vector<PlaneD>> dog;
    double base_sigma = 1.6;
    int scales_per_octave = 3;
};

inline ScaleSpace build_scale_space(const PlaneD& image, const DetectParams& p) {
    ScaleSpace ss;
    ss.base_sigma = p.base_sigma;
    ss.scales_per_octave = p.scales_per_octave;
    const int levels = p.scales_per_octave + 3;
    const double k = std::pow(2.0, 1.0 / p.scales_per_octave);

    // assume the input carries sigma=0.5; lift the base level to base_sigma
    const double assumed = 0.5;
    double lift = std::sqrt(std::max(0.01, p.base_sigma * p.base_sigma - assumed * assumed));
    PlaneD base = gaussian_smooth(image, lift);

    int octaves = p.n_octaves;
    for (int o = 0; o < octaves; ++o) {
        if (base.width() < 16 || base.height() < 16) break;
        std::vector<PlaneD> levels_g;
        levels_g.push_back(base);
        double sigma_prev = p.base_sigma;
        for (int i = 1; i < levels; ++i) {
            double sigma_total = p.base_sigma * std::pow(k, i);
            double delta = std::sqrt(sigma_total * sigma_total - sigma_prev * sigma_prev);
            levels_g.push_back(gaussian_smooth(levels_g.back(), delta));
            sigma_prev = sigma_total;
        }
        std::vector<PlaneD> levels_d;
        for (int i = 0; i + 1 < levels; ++i) {
            PlaneD d(levels_g[i].width(), levels_g[i].height());
            for (size_t j = 0; j < d.size(); ++j)
                d.data()[j] = levels_g[i + 1].data()[j] - levels_g[i].data()[j];
            levels_d.push_back(std::move(d));
        }
        // next octave starts from the level with doubled sigma
        base = downsample2(levels_g[p.scales_per_octave]);
        ss.gauss.push_back(std::move(levels_g));
        ss.dog.push_back(std::move(levels_d));
    }
    return ss;
}

struct RefinedExtremum {
    double x, y, level;  // in-octave coordinates
    double value;        // interpolated |DoG|
    bool ok = false;
};

/// One clamped Newton step on the 3D quadratic fit around a DoG extremum.
inline RefinedExtremum refine_extremum(const std::vector<PlaneD>& dog, int level, int x, int y) {
    RefinedExtremum r{static_cast<double>(x), static_cast<double>(y), static_cast<double>(level),
                      0.0, false};
    const PlaneD& d0 = dog[level - 1];
    const PlaneD& d1 = dog[level];
    const PlaneD& d2 = dog[level + 1];

    double dx = 0.5 * (d1.at(x + 1, y) - d1.at(x - 1, y));
    double dy = 0.5 * (d1.at(x, y + 1) - d1.at(x, y - 1));
    double ds = 0.5 * (d2.at(x, y) - d0.at(x, y));
    double dxx = d1.at(x + 1, y) - 2.0 * d1.at(x, y) + d1.at(x - 1, y);
    double dyy = d1.at(x, y + 1) - 2.0 * d1.at(x, y) + d1.at(x, y - 1);
    double dss = d2.at(x, y) - 2.0 * d1.at(x, y) + d0.at(x, y);
    double dxy = 0.25 * (d1.at(x + 1, y + 1) - d1.at(x - 1, y + 1) - d1.at(x + 1, y - 1) +
                         d1.at(x - 1, y - 1));
    double dxs = 0.25 * (d2.at(x + 1, y) - d2.at(x - 1, y) - d0.at(x + 1, y) + d0.at(x - 1, y));
    double dys = 0.25 * (d2.at(x, y + 1) - d2.at(x, y - 1) - d0.at(x, y + 1) + d0.at(x, y - 1));

    // solve H * offset = -grad via Cramer on the 3x3 Hessian
    double h[9] = {dxx, dxy, dxs, dxy, dyy, dys, dxs, dys, dss};
    double det = h[0] * (h[4] * h[8] - h[5] * h[7]) - h[1] * (h[3] * h[8] - h[5] * h[6]) +
                 h[2] * (h[3] * h[7] - h[4] * h[6]);
    if (std::abs(det) < 1e-30) return r;
    double g[3] = {-dx, -dy, -ds};
    auto solve3 = [&](int col) {
        double m[9];
        std::copy(h, h + 9, m);
        m[col] = g[0];
        m[col + 3] = g[1];
        m[col + 6] = g[2];
        return (m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
                m[2] * (m[3] * m[7] - m[4] * m[6])) /
               det;
    };
    double ox = solve3(0), oy = solve3(1), os = solve3(2);
    if (std::abs(ox) > 1.5 || std::abs(oy) > 1.5 || std::abs(os) > 1.5) {
        ox = std::clamp(ox, -1.5, 1.5);
        oy = std::clamp(oy, -1.5, 1.5);
        os = std::clamp(os, -1.5, 1.5);
    }
    r.x = x + ox;
    r.y = y + oy;
    r.level = level + os;
    r.value = d1.at(x, y) + 0.5 * (dx * ox + dy * oy + ds * os);
    r.ok = true;
    return r;
}

inline bool passes_edge_test(const PlaneD& d, int x, int y, double edge_threshold) {
    double dxx = d.at(x + 1, y) - 2.0 * d.at(x, y) + d.at(x - 1, y);
    double dyy = d.at(x, y + 1) - 2.0 * d.at(x, y) + d.at(x, y - 1);
    double dxy = 0.25 * (d.at(x + 1, y + 1) - d.at(x - 1, y + 1) - d.at(x + 1, y - 1) +
                         d.at(x - 1, y - 1));
    double trace = dxx + dyy;
    double det = dxx * dyy - dxy * dxy;
    if (det <= 0.0) return false;  // saddle: curvatures of opposite sign
    double r = edge_threshold;
    return trace * trace / det < (r + 1.0) * (r + 1.0) / r;
}

/// Gradient orientation histogram around (x, y); returns up to 4 dominant
/// orientations (peaks >= 0.8 * max, parabolic interpolation).
inline std::vector<double> dominant_orientations(const PlaneD& gauss, double x, double y,
                                                 double sigma_rel) {
    constexpr int kBins = 36;
    double hist[kBins] = {0.0};
    const double win_sigma = 1.5 * sigma_rel;
    const int radius = static_cast<int>(std::lround(3.0 * win_sigma));
    const int cx = static_cast<int>(std::lround(x));
    const int cy = static_cast<int>(std::lround(y));
    const int w = gauss.width();
    const int h = gauss.height();

    for (int j = -radius; j <= radius; ++j) {
        for (int i = -radius; i <= radius; ++i) {
            int px = cx + i;
            int py = cy + j;
            if (px < 1 || px >= w - 1 || py < 1 || py >= h - 1) continue;
            double gx = 0.5 * (gauss.at(px + 1, py) - gauss.at(px - 1, py));
            double gy = 0.5 * (gauss.at(px, py + 1) - gauss.at(px, py - 1));
            double mag = std::hypot(gx, gy);
            if (mag == 0.0) continue;
            double weight = std::exp(-0.5 * (i * i + j * j) / (win_sigma * win_sigma));
            double angle = std::atan2(gy, gx);  // (-pi, pi]
            int bin = static_cast<int>(std::floor((angle + kPi) / (2.0 * kPi) * kBins)) % kBins;
            if (bin < 0) bin += kBins;
            hist[bin] += weight * mag;
        }
    }
    // two smoothing passes with a [1 1 1]/3 circular kernel
    for (int pass = 0; pass < 2; ++pass) {
        double tmp[kBins];
        for (int b = 0; b < kBins; ++b)
            tmp[b] = (hist[(b + kBins - 1) % kBins] + hist[b] + hist[(b + 1) % kBins]) / 3.0;
        std::copy(tmp, tmp + kBins, hist);
    }
    double peak = *std::max_element(hist, hist + kBins);
    std::vector<double> orientations;
    if (peak <= 0.0) return orientations;
    for (int b = 0; b < kBins && orientations.size() < 4; ++b) {
        double prev = hist[(b + kBins - 1) % kBins];
        double next = hist[(b + 1) % kBins];
        if (hist[b] >= 0.8 * peak && hist[b] > prev && hist[b] > next) {
            double denom = prev - 2.0 * hist[b] + next;
            double offset = denom != 0.0 ? 0.5 * (prev - next) / denom : 0.0;
            double angle = (b + 0.5 + offset) / kBins * 2.0 * kPi - kPi;
            orientations.push_back(angle);
        }
    }
    return orientations;
}

/// 4x4 spatial cells x 8 orientation bins with trilinear interpolation,
/// L2-normalized, clipped at 0.2, renormalized.
inline bool build_descriptor(const PlaneD& gauss, double x, double y, double sigma_rel,
                             double orientation, Descriptor& out) {
    constexpr int kCells = 4;
    constexpr int kOri = 8;
    const double bin_size = 3.0 * sigma_rel;  // pixels per spatial cell
    const double radius = bin_size * (kCells + 1) * 0.5 * std::sqrt(2.0);
    const int r = static_cast<int>(std::lround(radius));
    const double cos_t = std::cos(-orientation);
    const double sin_t = std::sin(-orientation);
    const int w = gauss.width();
    const int h = gauss.height();

    double hist[kCells][kCells][kOri] = {};
    const int cx = static_cast<int>(std::lround(x));
    const int cy = static_cast<int>(std::lround(y));

    for (int j = -r; j <= r; ++j) {
        for (int i = -r; i <= r; ++i) {
            int px = cx + i;
            int py = cy + j;
            if (px < 1 || px >= w - 1 || py < 1 || py >= h - 1) continue;
            // rotate into the keypoint frame
            double rx = (cos_t * i - sin_t * j) / bin_size;
            double ry = (sin_t * i + cos_t * j) / bin_size;
            double cbin = rx + kCells / 2.0 - 0.5;
            double rbin = ry + kCells / 2.0 - 0.5;
            if (cbin <= -1.0 || cbin >= kCells || rbin <= -1.0 || rbin >= kCells) continue;

            double gx = 0.5 * (gauss.at(px + 1, py) - gauss.at(px - 1, py));
            double gy = 0.5 * (gauss.at(px, py + 1) - gauss.at(px, py - 1));
            double mag = std::hypot(gx, gy);
            if (mag == 0.0) continue;
            double angle = std::atan2(gy, gx) - orientation;
            while (angle < 0.0) angle += 2.0 * kPi;
            while (angle >= 2.0 * kPi) angle -= 2.0 * kPi;
            double obin = angle / (2.0 * kPi) * kOri;
            double weight = mag * std::exp(-(rx * rx + ry * ry) / (0.5 * kCells * kCells));

            int r0 = static_cast<int>(std::floor(rbin));
            int c0 = static_cast<int>(std::floor(cbin));
            int o0 = static_cast<int>(std::floor(obin)) % kOri;
            double fr = rbin - r0;
            double fc = cbin - c0;
            double fo = obin - std::floor(obin);
            for (int dr = 0; dr <= 1; ++dr) {
                int rr = r0 + dr;
                if (rr < 0 || rr >= kCells) continue;
                double wr = weight * (dr ? fr : 1.0 - fr);
                for (int dc = 0; dc <= 1; ++dc) {
                    int cc = c0 + dc;
                    if (cc < 0 || cc >= kCells) continue;
                    double wc = wr * (dc ? fc : 1.0 - fc);
                    for (int dd = 0; dd <= 1; ++dd) {
                        int oo = (o0 + dd) % kOri;
                        hist[rr][cc][oo] += wc * (dd ? fo : 1.0 - fo);
                    }
                }
            }
        }
    }

    double norm = 0.0;
    int idx = 0;
    for (int rr = 0; rr < kCells; ++rr)
        for (int cc = 0; cc < kCells; ++cc)
            for (int oo = 0; oo < kOri; ++oo) {
                out.v[idx++] = static_cast<float>(hist[rr][cc][oo]);
                norm += hist[rr][cc][oo] * hist[rr][cc][oo];
            }
    if (norm <= 1e-20) return false;
    norm = 1.0 / std::sqrt(norm);
    double norm2 = 0.0;
    for (auto& f : out.v) {
        f = static_cast<float>(std::min(0.2, static_cast<double>(f) * norm));
        norm2 += static_cast<double>(f) * f;
    }
    if (norm2 <= 1e-20) return false;
    const float inv = static_cast<float>(1.0 / std::sqrt(norm2));
    for (auto& f : out.v) f *= inv;
    return true;
}

}  // namespace fm_detail

/// Difference-of-Gaussians keypoints with contrast and edge-response
/// rejection, dominant orientation per keypoint, and 128-d gradient
/// histogram descriptors.
inline std::vector<Feature> detect_and_describe(const PlaneD& image,
                                                const DetectParams& params = {}) {
    require(image.width() >= 32 && image.height() >= 32, Errc::image_too_small,
            "detector needs at least 32x32 pixels");
    using namespace fm_detail;
    ScaleSpace ss = build_scale_space(image, params);
    const int s = params.scales_per_octave;
    const double k = std::pow(2.0, 1.0 / s);

    std::vector<Feature> features;
    for (size_t o = 0; o < ss.dog.size(); ++o) {
        const auto& dog = ss.dog[o];
        const double octave_scale = std::pow(2.0, static_cast<double>(o));
        for (int level = 1; level <= s; ++level) {
            const PlaneD& d1 = dog[level];
            const int w = d1.width();
            const int h = d1.height();
            for (int y = 1; y < h - 1; ++y) {
                for (int x = 1; x < w - 1; ++x) {
                    double v = d1.at(x, y);
                    if (std::abs(v) < 0.5 * params.contrast_threshold) continue;
                    bool is_max = true, is_min = true;
                    for (int dl = -1; dl <= 1 && (is_max || is_min); ++dl) {
                        const PlaneD& dn = dog[level + dl];
                        for (int dy = -1; dy <= 1; ++dy)
                            for (int dx = -1; dx <= 1; ++dx) {
                                if (dl == 0 && dx == 0 && dy == 0) continue;
                                double nv = dn.at(x + dx, y + dy);
                                if (nv >= v) is_max = false;
                                if (nv <= v) is_min = false;
                            }
                    }
                    if (!is_max && !is_min) continue;
                    if (!passes_edge_test(d1, x, y, params.edge_threshold)) continue;
                    RefinedExtremum ref = refine_extremum(dog, level, x, y);
                    if (!ref.ok) continue;
                    if (std::abs(ref.value) < params.contrast_threshold) continue;

                    double sigma_rel = params.base_sigma * std::pow(k, ref.level);
                    const PlaneD& gauss = ss.gauss[o][level];
                    auto orientations = dominant_orientations(gauss, ref.x, ref.y, sigma_rel);
                    for (double orientation : orientations) {
                        Feature f;
                        f.keypoint.x = ref.x * octave_scale;
                        f.keypoint.y = ref.y * octave_scale;
                        f.keypoint.scale = sigma_rel * octave_scale;
                        f.keypoint.orientation = orientation;
                        f.keypoint.response = std::abs(ref.value);
                        if (build_descriptor(gauss, ref.x, ref.y, sigma_rel, orientation,
                                             f.descriptor))
                            features.push_back(std::move(f));
                    }
                }
            }
        }
    }
    return features;
}

// ---------------------------------------------------------------------------
// Descriptor matching (ratio test + mutual best)
// ---------------------------------------------------------------------------

/// Pairs (i, j) where b[j] is a[i]'s nearest neighbor, the Lowe ratio test
/// passes, and the match is mutual-best.
inline std::vector<std::pair<int, int>> match_descriptors(const std::vector<Descriptor>& a,
                                                          const std::vector<Descriptor>& b,
                                                          double ratio = 0.75) {
    require(ratio > 0.0 && ratio < 1.0, Errc::invalid_argument, "ratio must lie in (0,1)");
    std::vector<std::pair<int, int>> out;
    if (a.empty() || b.empty()) return out;

    auto nearest = [](const Descriptor& q, const std::vector<Descriptor>& set, double& d1,
                      double& d2) {
        int best = -1;
        d1 = d2 = std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < set.size(); ++j) {
            double d = q.dist2(set[j]);
            if (d < d1) {
                d2 = d1;
                d1 = d;
                best = static_cast<int>(j);
            } else if (d < d2) {
                d2 = d;
            }
        }
        return best;
    };

    std::vector<int> best_in_a(b.size(), -1);
    {
        std::vector<double> best_d(b.size(), std::numeric_limits<double>::infinity());
        for (size_t i = 0; i < a.size(); ++i)
            for (size_t j = 0; j < b.size(); ++j) {
                double d = a[i].dist2(b[j]);
                if (d < best_d[j]) {
                    best_d[j] = d;
                    best_in_a[j] = static_cast<int>(i);
                }
            }
    }

    for (size_t i = 0; i < a.size(); ++i) {
        double d1, d2;
        int j = nearest(a[i], b, d1, d2);
        if (j < 0) continue;
        // ratio test on squared distances: d1/d2 < ratio^2
        if (std::isfinite(d2) && d2 > 0.0 && d1 / d2 >= ratio * ratio) continue;
        if (best_in_a[j] != static_cast<int>(i)) continue;  // not mutual best
        out.emplace_back(static_cast<int>(i), j);
    }
    return out;
}

// ---------------------------------------------------------------------------
// RANSAC geometric verification
// ---------------------------------------------------------------------------

enum class TransformModel { similarity, affine };

struct PointPair {
    double x1, y1;  // baseline
    double x2, y2;  // session
};

struct MatchReport {
    int n_putative = 0;
    int n_inliers = 0;
    std::array<double, 6> transform{1, 0, 0, 0, 1, 0};  // row-major 2x3, maps image1 -> image2
    double inlier_rms_px = 0.0;
    uint64_t seed = 0;
    std::vector<int> inlier_indices;
};

namespace fm_detail {

using Affine = std::array<double, 6>;

inline void apply(const Affine& t, double x, double y, double& ox, double& oy) {
    ox = t[0] * x + t[1] * y + t[2];
    oy = t[3] * x + t[4] * y + t[5];
}

inline bool similarity_from_two(const PointPair& p, const PointPair& q, Affine& t) {
    // complex formulation: z' = alpha z + beta
    double dx = q.x1 - p.x1, dy = q.y1 - p.y1;
    double norm = dx * dx + dy * dy;
    if (norm < 1e-12) return false;
    double ux = q.x2 - p.x2, uy = q.y2 - p.y2;
    double ar = (ux * dx + uy * dy) / norm;
    double ai = (uy * dx - ux * dy) / norm;
    t = {ar, -ai, 0.0, ai, ar, 0.0};
    t[2] = p.x2 - (ar * p.x1 - ai * p.y1);
    t[5] = p.y2 - (ai * p.x1 + ar * p.y1);
    return true;
}

inline bool affine_from_three(const PointPair& a, const PointPair& b, const PointPair& c,
                              Affine& t) {
    double det = (b.x1 - a.x1) * (c.y1 - a.y1) - (c.x1 - a.x1) * (b.y1 - a.y1);
    if (std::abs(det) < 1e-9) return false;  // collinear sample
    auto solve_row = [&](double va, double vb, double vc, double& m0, double& m1, double& m2) {
        // solve [x1 y1 1] * [m0 m1 m2]^T = v for the three samples
        double d1 = (vb - va) * (c.y1 - a.y1) - (vc - va) * (b.y1 - a.y1);
        double d2 = (b.x1 - a.x1) * (vc - va) - (c.x1 - a.x1) * (vb - va);
        m0 = d1 / det;
        m1 = d2 / det;
        m2 = va - m0 * a.x1 - m1 * a.y1;
    };
    solve_row(a.x2, b.x2, c.x2, t[0], t[1], t[2]);
    solve_row(a.y2, b.y2, c.y2, t[3], t[4], t[5]);
    return true;
}

inline bool similarity_least_squares(const std::vector<PointPair>& pairs,
                                     const std::vector<int>& idx, Affine& t) {
    double mx1 = 0, my1 = 0, mx2 = 0, my2 = 0;
    for (int i : idx) {
        mx1 += pairs[i].x1;
        my1 += pairs[i].y1;
        mx2 += pairs[i].x2;
        my2 += pairs[i].y2;
    }
    double n = static_cast<double>(idx.size());
    mx1 /= n;
    my1 /= n;
    mx2 /= n;
    my2 /= n;
    double sxx = 0, num_r = 0, num_i = 0;
    for (int i : idx) {
        double ax = pairs[i].x1 - mx1, ay = pairs[i].y1 - my1;
        double bx = pairs[i].x2 - mx2, by = pairs[i].y2 - my2;
        sxx += ax * ax + ay * ay;
        num_r += ax * bx + ay * by;
        num_i += ax * by - ay * bx;
    }
    if (sxx < 1e-12) return false;
    double ar = num_r / sxx, ai = num_i / sxx;
    t = {ar, -ai, mx2 - (ar * mx1 - ai * my1), ai, ar, my2 - (ai * mx1 + ar * my1)};
    return true;
}

inline bool affine_least_squares(const std::vector<PointPair>& pairs, const std::vector<int>& idx,
                                 Affine& t) {
    // normal equations for [x1 y1 1] -> x2 and -> y2
    double sxx = 0, sxy = 0, sx = 0, syy = 0, sy = 0, s1 = 0;
    double bx[3] = {0, 0, 0}, by[3] = {0, 0, 0};
    for (int i : idx) {
        const auto& p = pairs[i];
        sxx += p.x1 * p.x1;
        sxy += p.x1 * p.y1;
        sx += p.x1;
        syy += p.y1 * p.y1;
        sy += p.y1;
        s1 += 1.0;
        bx[0] += p.x1 * p.x2;
        bx[1] += p.y1 * p.x2;
        bx[2] += p.x2;
        by[0] += p.x1 * p.y2;
        by[1] += p.y1 * p.y2;
        by[2] += p.y2;
    }
    double m[9] = {sxx, sxy, sx, sxy, syy, sy, sx, sy, s1};
    double det = m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
                 m[2] * (m[3] * m[7] - m[4] * m[6]);
    if (std::abs(det) < 1e-9) return false;
    auto cramer = [&](const double* b, double* out) {
        for (int col = 0; col < 3; ++col) {
            double mm[9];
            std::copy(m, m + 9, mm);
            mm[col] = b[0];
            mm[col + 3] = b[1];
            mm[col + 6] = b[2];
            out[col] = (mm[0] * (mm[4] * mm[8] - mm[5] * mm[7]) -
                        mm[1] * (mm[3] * mm[8] - mm[5] * mm[6]) +
                        mm[2] * (mm[3] * mm[7] - mm[4] * mm[6])) /
                       det;
        }
    };
    double rx[3], ry[3];
    cramer(bx, rx);
    cramer(by, ry);
    t = {rx[0], rx[1], rx[2], ry[0], ry[1], ry[2]};
    return true;
}

}  // namespace fm_detail

/// Standard RANSAC: minimal-sample hypotheses, inlier voting at
/// threshold_px, then a least-squares refit on the best inlier set.
/// Deterministic for a fixed seed.
inline MatchReport ransac_verify(const std::vector<PointPair>& matches, TransformModel model,
                                 double threshold_px, int max_iters, uint64_t seed) {
    using namespace fm_detail;
    const int sample_size = model == TransformModel::similarity ? 2 : 3;
    require(static_cast<int>(matches.size()) >= sample_size, Errc::too_few_matches,
            "need at least " + std::to_string(sample_size) + " matches");
    require(threshold_px > 0.0, Errc::invalid_argument, "threshold must be > 0");
    require(max_iters >= 1, Errc::invalid_argument, "max_iters must be >= 1");

    Rng rng(hash_combine(seed, 0x72616E73ULL));
    const size_t n = matches.size();
    std::vector<int> best_inliers;
    double best_sse = std::numeric_limits<double>::infinity();
    bool any_valid_sample = false;

    std::vector<int> inliers;
    for (int iter = 0; iter < max_iters; ++iter) {
        int s0 = static_cast<int>(rng.next_below(n));
        int s1 = static_cast<int>(rng.next_below(n));
        int s2 = static_cast<int>(rng.next_below(n));
        if (s1 == s0 || (sample_size == 3 && (s2 == s0 || s2 == s1))) continue;

        Affine t;
        bool ok = model == TransformModel::similarity
                      ? similarity_from_two(matches[s0], matches[s1], t)
                      : affine_from_three(matches[s0], matches[s1], matches[s2], t);
        if (!ok) continue;
        any_valid_sample = true;

        inliers.clear();
        double sse = 0.0;
        const double thr2 = threshold_px * threshold_px;
        for (size_t i = 0; i < n; ++i) {
            double px, py;
            apply(t, matches[i].x1, matches[i].y1, px, py);
            double ex = px - matches[i].x2;
            double ey = py - matches[i].y2;
            double e2 = ex * ex + ey * ey;
            if (e2 < thr2) {
                inliers.push_back(static_cast<int>(i));
                sse += e2;
            }
        }
        if (inliers.size() > best_inliers.size() ||
            (inliers.size() == best_inliers.size() && sse < best_sse)) {
            best_inliers = inliers;
            best_sse = sse;
        }
    }
    require(any_valid_sample, Errc::degenerate_sample,
            "all sampled minimal sets were degenerate");

    MatchReport report;
    report.n_putative = static_cast<int>(n);
    report.seed = seed;
    if (best_inliers.size() < static_cast<size_t>(sample_size)) {
        report.n_inliers = 0;
        return report;
    }

    Affine refined;
    bool ok = model == TransformModel::similarity
                  ? similarity_least_squares(matches, best_inliers, refined)
                  : affine_least_squares(matches, best_inliers, refined);
    if (!ok) {
        // refit degenerate (e.g. coincident inliers); keep zero-inlier report
        report.n_inliers = 0;
        return report;
    }
    double sse = 0.0;
    for (int i : best_inliers) {
        double px, py;
        apply(refined, matches[i].x1, matches[i].y1, px, py);
        double ex = px - matches[i].x2;
        double ey = py - matches[i].y2;
        sse += ex * ex + ey * ey;
    }
    report.n_inliers = static_cast<int>(best_inliers.size());
    report.transform = refined;
    report.inlier_rms_px = std::sqrt(sse / static_cast<double>(best_inliers.size()));
    report.inlier_indices = std::move(best_inliers);
    return report;
}

// ---------------------------------------------------------------------------
// Session stability pipeline
// ---------------------------------------------------------------------------

struct StabilityParams {
    DetectParams detect;
    double match_ratio = 0.75;
    TransformModel model = TransformModel::similarity;
    double ransac_threshold_px = 3.0;
    int ransac_iters = 2000;
    uint64_t seed = 0;
};

/// Matches each session image against the baseline:
/// detect -> ratio/mutual matching -> RANSAC verification.
inline std::vector<MatchReport> stability_report(const PlaneD& baseline,
                                                 const std::vector<PlaneD>& sessions,
                                                 const StabilityParams& params = {}) {
    require(!sessions.empty(), Errc::empty_input, "need at least one session image");
    auto base_features = detect_and_describe(baseline, params.detect);
    std::vector<Descriptor> base_desc;
    base_desc.reserve(base_features.size());
    for (const auto& f : base_features) base_desc.push_back(f.descriptor);

    std::vector<MatchReport> reports;
    for (size_t s = 0; s < sessions.size(); ++s) {
        auto session_features = detect_and_describe(sessions[s], params.detect);
        std::vector<Descriptor> session_desc;
        session_desc.reserve(session_features.size());
        for (const auto& f : session_features) session_desc.push_back(f.descriptor);

        auto matches = match_descriptors(base_desc, session_desc, params.match_ratio);
        std::vector<PointPair> pairs;
        pairs.reserve(matches.size());
        for (auto [i, j] : matches) {
            pairs.push_back({base_features[i].keypoint.x, base_features[i].keypoint.y,
                             session_features[j].keypoint.x, session_features[j].keypoint.y});
        }
        MatchReport report;
        const int min_pairs = params.model == TransformModel::similarity ? 2 : 3;
        if (static_cast<int>(pairs.size()) >= min_pairs) {
            report = ransac_verify(pairs, params.model, params.ransac_threshold_px,
                                   params.ransac_iters, hash_combine(params.seed, s));
        } else {
            report.n_putative = static_cast<int>(pairs.size());
            report.n_inliers = 0;
            report.seed = hash_combine(params.seed, s);
        }
        reports.push_back(std::move(report));
    }
    return reports;
}

}  // namespace pet
