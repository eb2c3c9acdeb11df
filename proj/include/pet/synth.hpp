#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pet/dataset.hpp"
#include "pet/error.hpp"
#include "pet/image.hpp"
#include "pet/mosaic.hpp"
#include "pet/rng.hpp"

namespace pet {

// ---------------------------------------------------------------------------
// Scene description
// ---------------------------------------------------------------------------

enum class Region : uint8_t { background = 0, sclera = 1, iris = 2, pupil = 3, cornea_highlight = 4 };

struct SceneParams {
    int width = 512;
    int height = 512;
    GazeAngles gaze;
    double pupil_radius = 24.0;       // eye-space pixels
    double eye_relief_scale = 1.0;    // image magnification proxy, [0.7, 1.3]
    uint64_t subject_seed = 1;        // procedural texture identity
    double background_level = 0.05;   // s0 of the background, [0, 1]

    // Fraction of the gaze offset applied to the intensity (s0) pass.
    // 1 = intensity geometry follows the eye; 0 = s0 is identical for every
    // gaze, so all gaze-informative structure lives in the polarization
    // fields. Polarization is always eyeball-attached.
    double s0_gaze_gain = 1.0;

    // When set, every field is sampled once per 2x2 mosaic cell, making the
    // truth constant within each superpixel. Used by the analytic
    // forward/inverse round-trip checks.
    bool mosaic_aligned = false;

    void validate() const {
        require(width > 0 && height > 0 && width % 2 == 0 && height % 2 == 0,
                Errc::odd_dimensions, "scene dimensions must be positive and even");
        require(pupil_radius > 0.0, Errc::invalid_argument, "pupil_radius must be > 0");
        require(eye_relief_scale >= 0.7 && eye_relief_scale <= 1.3, Errc::invalid_argument,
                "eye_relief_scale must lie in [0.7, 1.3]");
        require(background_level >= 0.0 && background_level <= 1.0, Errc::invalid_argument,
                "background_level must lie in [0, 1]");
        require(s0_gaze_gain >= 0.0 && s0_gaze_gain <= 1.0, Errc::invalid_argument,
                "s0_gaze_gain must lie in [0, 1]");
    }
};

/// Per-pixel ground truth. dolp_true uses the physical convention (fully
/// polarized = 1); s0_true is normalized radiance in [0, 1].
struct GroundTruthScene {
    PlaneD s0_true;
    PlaneD dolp_true;
    PlaneD aolp_true;  // radians, principal range (-pi/2, pi/2]
    Plane<uint8_t> region_map;
    GazeAngles gaze;
    double px_per_deg = 0.0;  // image-space pixels per degree of gaze shift
};

/// Eye-space pixels per degree of gaze, before eye-relief magnification.
inline double scene_px_per_deg(const SceneParams& p) {
    return std::min(p.width, p.height) / 100.0;
}

namespace detail {

constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle into the AoLP principal range (-pi/2, pi/2].
inline double wrap_aolp(double a) {
    double r = std::fmod(a + kPi / 2.0, kPi);
    if (r <= 0.0) r += kPi;
    return r - kPi / 2.0;
}

inline double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

/// Hash-based lattice value noise in [0, 1), bilinear with smoothstep.
inline double value_noise(double x, double y, uint64_t seed) {
    double fx = std::floor(x);
    double fy = std::floor(y);
    int64_t ix = static_cast<int64_t>(fx);
    int64_t iy = static_cast<int64_t>(fy);
    auto corner = [&](int64_t cx, int64_t cy) {
        uint64_t h = hash_combine(seed, static_cast<uint64_t>(cx) * 0x8DA6B343ULL,
                                  static_cast<uint64_t>(cy) * 0xD8163841ULL);
        return static_cast<double>(h >> 11) * 0x1.0p-53;
    };
    double tx = smoothstep(x - fx);
    double ty = smoothstep(y - fy);
    double v00 = corner(ix, iy), v10 = corner(ix + 1, iy);
    double v01 = corner(ix, iy + 1), v11 = corner(ix + 1, iy + 1);
    double a = v00 + tx * (v10 - v00);
    double b = v01 + tx * (v11 - v01);
    return a + ty * (b - a);
}

/// Three-octave band-limited value noise in [0, 1); base_scale is the
/// wavelength of the coarsest octave in pixels.
inline double band_noise(double x, double y, uint64_t seed, double base_scale) {
    double v = 0.5 * value_noise(x / base_scale, y / base_scale, hash_combine(seed, 1)) +
               0.3 * value_noise(x / (base_scale * 0.5), y / (base_scale * 0.5), hash_combine(seed, 2)) +
               0.2 * value_noise(x / (base_scale * 0.25), y / (base_scale * 0.25), hash_combine(seed, 3));
    return v;
}

}  // namespace detail

/// Deterministic procedural eye scene. The sclera carries fine band-limited
/// DoLP texture and a smooth AoLP field, both attached to the eyeball (they
/// displace with gaze); the cornea carries a smooth AoLP rotation pattern
/// whose center tracks gaze at px_per_deg pixels per degree. eye_relief_scale
/// magnifies the image about its center.
inline GroundTruthScene generate_scene(const SceneParams& params) {
    params.validate();
    const int w = params.width;
    const int h = params.height;
    const double dim = static_cast<double>(std::min(w, h));
    const double cx = 0.5 * (w - 1);
    const double cy = 0.5 * (h - 1);
    const double ppd = scene_px_per_deg(params);

    // gaze offset in eye-space pixels; +pitch moves the eye upward (-y)
    const double off_x = ppd * params.gaze.yaw;
    const double off_y = -ppd * params.gaze.pitch;
    const double s0_off_x = params.s0_gaze_gain * off_x;
    const double s0_off_y = params.s0_gaze_gain * off_y;

    const double r_eye = 0.46 * dim;
    const double r_iris = 0.18 * dim;
    const double r_cornea = 0.10 * dim;
    const double cornea_dx = 0.05 * dim;  // fixed glint displacement from the iris center
    const double cornea_dy = -0.04 * dim;

    const uint64_t seed = params.subject_seed;
    const uint64_t kS0Tex = hash_combine(seed, 11);
    const uint64_t kDolpTex = hash_combine(seed, 12);
    const uint64_t kAolpTex = hash_combine(seed, 13);
    const uint64_t kIrisTex = hash_combine(seed, 14);

    GroundTruthScene scene{PlaneD(w, h), PlaneD(w, h), PlaneD(w, h), Plane<uint8_t>(w, h, 0),
                           params.gaze, ppd * params.eye_relief_scale};

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double px = static_cast<double>(x);
            double py = static_cast<double>(y);
            if (params.mosaic_aligned) {
                px = static_cast<double>(x & ~1);
                py = static_cast<double>(y & ~1);
            }
            // eye-space coordinates (undo the eye-relief magnification)
            const double qx = (px - cx) / params.eye_relief_scale;
            const double qy = (py - cy) / params.eye_relief_scale;

            const double r_center = std::hypot(qx, qy);
            const double rel_x = qx - off_x;  // eyeball-attached coordinates
            const double rel_y = qy - off_y;
            const double r_iris_c = std::hypot(rel_x, rel_y);
            const double glint_x = rel_x - cornea_dx;
            const double glint_y = rel_y - cornea_dy;
            const double r_glint = std::hypot(glint_x, glint_y);

            // --- region (polarization geometry, always eyeball-attached)
            Region region = Region::background;
            if (r_center <= r_eye) {
                region = Region::sclera;
                if (r_iris_c <= r_iris) region = Region::iris;
                if (r_glint <= r_cornea) region = Region::cornea_highlight;
                if (r_iris_c <= params.pupil_radius) region = Region::pupil;
            }

            // --- s0 (its own geometry so gaze coupling can be dialed out)
            const double s0_rel_x = qx - s0_off_x;
            const double s0_rel_y = qy - s0_off_y;
            const double s0_r_iris = std::hypot(s0_rel_x, s0_rel_y);
            const double s0_r_glint = std::hypot(s0_rel_x - cornea_dx, s0_rel_y - cornea_dy);
            double s0 = params.background_level;
            if (r_center <= r_eye) {
                s0 = 0.72 + 0.16 * detail::band_noise(s0_rel_x, s0_rel_y, kS0Tex, 24.0);
                if (s0_r_iris <= r_iris)
                    s0 = 0.42 + 0.10 * detail::band_noise(s0_rel_x, s0_rel_y, kIrisTex, 16.0);
                if (s0_r_glint <= r_cornea) {
                    double bump = std::exp(-0.5 * (s0_r_glint * s0_r_glint) /
                                           ((0.5 * r_cornea) * (0.5 * r_cornea)));
                    s0 = std::min(1.0, s0 + 0.5 * bump);
                }
                if (s0_r_iris <= params.pupil_radius) s0 = 0.02;
            }

            // --- dolp / aolp
            double dolp = 0.02;
            double aolp = 0.0;
            switch (region) {
                case Region::background:
                    dolp = 0.02;
                    aolp = 0.0;
                    break;
                case Region::sclera:
                    dolp = 0.05 + 0.55 * detail::band_noise(rel_x, rel_y, kDolpTex, 18.0);
                    aolp = detail::wrap_aolp(
                        detail::kPi * (detail::band_noise(rel_x, rel_y, kAolpTex, 90.0) - 0.5));
                    break;
                case Region::iris:
                    dolp = 0.020 + 0.025 * detail::band_noise(rel_x, rel_y, kIrisTex, 30.0);
                    aolp = detail::wrap_aolp(
                        0.5 * detail::kPi * (detail::band_noise(rel_x, rel_y, kAolpTex, 120.0) - 0.5));
                    break;
                case Region::cornea_highlight: {
                    double bump =
                        std::exp(-0.5 * (r_glint * r_glint) / ((0.5 * r_cornea) * (0.5 * r_cornea)));
                    dolp = 0.10 + 0.50 * bump;
                    aolp = detail::wrap_aolp(0.5 * std::atan2(glint_y, glint_x));
                    break;
                }
                case Region::pupil:
                    dolp = 0.0;
                    aolp = 0.0;
                    break;
            }

            scene.region_map.at(x, y) = static_cast<uint8_t>(region);
            scene.s0_true.at(x, y) = s0;
            scene.dolp_true.at(x, y) = dolp;
            scene.aolp_true.at(x, y) = aolp;
        }
    }
    return scene;
}

// ---------------------------------------------------------------------------
// PFA capture simulation
// ---------------------------------------------------------------------------

struct NoiseModel {
    double read_noise_dn = 0.0;
    bool shot_noise = false;
    double polarizer_extinction = 1.0;  // 1 = ideal; < 1 mixes in the orthogonal state
    uint64_t rng_seed = 0;

    void validate() const {
        require(read_noise_dn >= 0.0, Errc::invalid_argument, "read_noise_dn must be >= 0");
        require(polarizer_extinction > 0.0 && polarizer_extinction <= 1.0, Errc::invalid_argument,
                "polarizer_extinction must lie in (0, 1]");
    }

    bool noiseless() const { return read_noise_dn == 0.0 && !shot_noise; }
};

/// Ideal measured value at polarizer angle theta for physical Stokes
/// (sigma0, sigma1, sigma2): 0.5*(s0 + s1 cos 2t + s2 sin 2t). Extinction < 1
/// blends the orthogonal state.
inline double polarizer_sample(double sigma0, double dolp, double aolp, double theta_rad,
                               double extinction) {
    double modulation = dolp * std::cos(2.0 * (aolp - theta_rad));
    return 0.5 * sigma0 * (1.0 + (2.0 * extinction - 1.0) * modulation);
}

/// Pre-quantization capture: real-valued mosaic samples in DN. Noise (when
/// enabled) uses per-pixel streams derived from (rng_seed, pixel index), so
/// results do not depend on traversal order.
inline RealMosaic simulate_pfa_capture_real(const GroundTruthScene& scene,
                                            const SuperpixelLayout& layout,
                                            const NoiseModel& noise, int bit_depth = 16) {
    noise.validate();
    require(layout.valid(), Errc::invalid_argument, "invalid superpixel layout");
    const int w = scene.s0_true.width();
    const int h = scene.s0_true.height();
    require(w % 2 == 0 && h % 2 == 0, Errc::odd_dimensions, "scene dimensions must be even");

    const double dn_full = 0.92 * (std::pow(2.0, bit_depth) - 1.0);
    RealMosaic mosaic{PlaneD(w, h), layout};
    constexpr double kDeg = detail::kPi / 180.0;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int angle = layout.angle_at[y & 1][x & 1];
            const double sigma0_dn = dn_full * scene.s0_true.at(x, y);
            double v = polarizer_sample(sigma0_dn, scene.dolp_true.at(x, y),
                                        scene.aolp_true.at(x, y), angle * kDeg,
                                        noise.polarizer_extinction);
            if (noise.shot_noise || noise.read_noise_dn > 0.0) {
                Rng rng(hash_combine(noise.rng_seed, 0x706978ULL,
                                     static_cast<uint64_t>(y) * static_cast<uint64_t>(w) + x));
                if (noise.shot_noise) v = rng.next_poisson(v);
                if (noise.read_noise_dn > 0.0) v += noise.read_noise_dn * rng.next_normal();
            }
            mosaic.samples.at(x, y) = v;
        }
    }
    return mosaic;
}

/// Quantized capture: rounds to integers and clamps to [0, 2^bit_depth - 1].
inline RawMosaicFrame simulate_pfa_capture(const GroundTruthScene& scene,
                                           const SuperpixelLayout& layout, const NoiseModel& noise,
                                           int bit_depth = 16) {
    RealMosaic real = simulate_pfa_capture_real(scene, layout, noise, bit_depth);
    RawMosaicFrame frame;
    frame.width = real.samples.width();
    frame.height = real.samples.height();
    frame.bit_depth = bit_depth;
    frame.layout = layout;
    frame.data.resize(real.samples.size());
    const double max_dn = std::pow(2.0, bit_depth) - 1.0;
    for (size_t i = 0; i < real.samples.size(); ++i) {
        double v = std::floor(real.samples.data()[i] + 0.5);
        v = std::clamp(v, 0.0, max_dn);
        frame.data[i] = static_cast<uint16_t>(v);
    }
    return frame;
}

// ---------------------------------------------------------------------------
// Target protocols and dataset generation
// ---------------------------------------------------------------------------

enum class TargetPattern { ring20, random_saccade, fp18 };

struct ProtocolConfig {
    TargetPattern pattern = TargetPattern::ring20;
    double fov_yaw_deg = 30.0;   // full horizontal extent
    double fov_pitch_deg = 20.0; // full vertical extent
    int n_targets = 0;           // 0 = pattern default (9 / 20 / 18)
    uint64_t seed = 0;
};

/// Target list for a protocol. ring20: 9 points on a 20-degree circle;
/// fp18: 12 points on the 30x20-degree oval plus 6 on a 10-degree circle;
/// random_saccade: n uniform draws within the FOV.
inline std::vector<GazeAngles> protocol_targets(const ProtocolConfig& protocol) {
    std::vector<GazeAngles> targets;
    switch (protocol.pattern) {
        case TargetPattern::ring20: {
            int n = protocol.n_targets > 0 ? protocol.n_targets : 9;
            require(n == 9, Errc::invalid_argument, "ring20 uses 9 targets");
            for (int i = 0; i < n; ++i) {
                double phi = 2.0 * detail::kPi * i / n;
                targets.push_back({20.0 * std::cos(phi), 20.0 * std::sin(phi)});
            }
            break;
        }
        case TargetPattern::fp18: {
            int n = protocol.n_targets > 0 ? protocol.n_targets : 18;
            require(n == 18, Errc::invalid_argument, "fp18 uses 18 targets");
            const double a = protocol.fov_yaw_deg / 2.0;
            const double b = protocol.fov_pitch_deg / 2.0;
            for (int i = 0; i < 12; ++i) {
                double phi = 2.0 * detail::kPi * i / 12;
                targets.push_back({a * std::cos(phi), b * std::sin(phi)});
            }
            for (int i = 0; i < 6; ++i) {
                double phi = 2.0 * detail::kPi * i / 6;
                targets.push_back({10.0 * std::cos(phi), 10.0 * std::sin(phi)});
            }
            break;
        }
        case TargetPattern::random_saccade: {
            int n = protocol.n_targets > 0 ? protocol.n_targets : 20;
            require(n >= 1, Errc::invalid_argument, "need at least one target");
            Rng rng(hash_combine(protocol.seed, 0x74677473ULL));
            for (int i = 0; i < n; ++i) {
                double yaw = rng.uniform(-protocol.fov_yaw_deg / 2.0, protocol.fov_yaw_deg / 2.0);
                double pitch = rng.uniform(-protocol.fov_pitch_deg / 2.0, protocol.fov_pitch_deg / 2.0);
                targets.push_back({yaw, pitch});
            }
            break;
        }
    }
    return targets;
}

inline const char* pattern_name(TargetPattern p) {
    switch (p) {
        case TargetPattern::ring20: return "RING20";
        case TargetPattern::random_saccade: return "RS";
        case TargetPattern::fp18: return "FP18";
    }
    return "?";
}

/// A named variation of the base scene (pupil size / eye relief overrides).
struct ConditionSpec {
    std::string tag = "nominal";
    double pupil_radius = 0.0;     // 0 = keep base
    double eye_relief_scale = 0.0; // 0 = keep base
};

/// Renders one frame per target per condition into out_dir and returns the
/// corresponding single-participant dataset (not yet saved to disk).
inline GazeDataset generate_dataset(const ProtocolConfig& protocol, const SceneParams& scene_base,
                                    const std::vector<ConditionSpec>& conditions,
                                    const NoiseModel& noise, const SuperpixelLayout& layout,
                                    const std::filesystem::path& out_dir,
                                    const std::string& participant_id, int bit_depth = 12) {
    scene_base.validate();
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    require(!ec, Errc::io_failure, "cannot create " + out_dir.string());

    const std::vector<ConditionSpec> conds =
        conditions.empty() ? std::vector<ConditionSpec>{ConditionSpec{}} : conditions;
    const auto targets = protocol_targets(protocol);

    GazeDataset dataset;
    dataset.root = out_dir;
    ParticipantEntry part;
    part.participant_id = participant_id;

    for (size_t ci = 0; ci < conds.size(); ++ci) {
        const ConditionSpec& cond = conds[ci];
        SceneParams params = scene_base;
        if (cond.pupil_radius > 0.0) params.pupil_radius = cond.pupil_radius;
        if (cond.eye_relief_scale > 0.0) params.eye_relief_scale = cond.eye_relief_scale;
        for (size_t t = 0; t < targets.size(); ++t) {
            params.gaze = targets[t];
            GroundTruthScene scene = generate_scene(params);
            NoiseModel frame_noise = noise;
            frame_noise.rng_seed = hash_combine(noise.rng_seed,
                                                hash_combine(scene_base.subject_seed, ci),
                                                static_cast<uint64_t>(t));
            RawMosaicFrame frame = simulate_pfa_capture(scene, layout, frame_noise, bit_depth);

            std::string name = participant_id + "--" + cond.tag + "--" +
                               pattern_name(protocol.pattern) + "--t" + std::to_string(t) + ".pfaraw";
            write_raw_frame(frame, out_dir / name);

            GazeRecord rec;
            rec.frame_path = name;
            rec.gaze_gt = targets[t];
            rec.condition_tag = cond.tag;
            rec.sequence_name = pattern_name(protocol.pattern);
            part.records.push_back(std::move(rec));
        }
    }
    dataset.participants.push_back(std::move(part));
    return dataset;
}

}  // namespace pet
