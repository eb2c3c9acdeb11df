#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "pet/dataset.hpp"
#include "pet/error.hpp"
#include "pet/rng.hpp"
#include "pet/stats.hpp"

namespace pet {

enum class AngularMetric {
    vector_3d,         // angle between gaze unit vectors (default)
    euclidean_per_axis // sqrt(dyaw^2 + dpitch^2), for sensitivity analysis
};

/// Absolute gaze error in degrees between predicted and ground-truth angles.
inline double angular_error(const GazeAngles& pred, const GazeAngles& gt,
                            AngularMetric metric = AngularMetric::vector_3d) {
    if (metric == AngularMetric::euclidean_per_axis) {
        double dy = pred.yaw - gt.yaw;
        double dp = pred.pitch - gt.pitch;
        return std::sqrt(dy * dy + dp * dp);
    }
    constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
    auto unit = [](const GazeAngles& g) {
        double y = g.yaw * kDegToRad;
        double p = g.pitch * kDegToRad;
        return std::array<double, 3>{std::cos(p) * std::sin(y), std::sin(p),
                                     std::cos(p) * std::cos(y)};
    };
    auto u = unit(pred);
    auto v = unit(gt);
    double dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    dot = std::clamp(dot, -1.0, 1.0);
    return std::acos(dot) / kDegToRad;
}

/// Per-frame absolute angular errors for one participant.
struct ParticipantErrors {
    std::string participant_id;
    std::vector<double> errors;  // degrees, all >= 0
};

/// 95th percentile of a participant's per-frame error.
inline double participant_e95(const ParticipantErrors& pe) {
    require(!pe.errors.empty(), Errc::empty_input,
            "participant has no frames: " + pe.participant_id);
    return percentile(pe.errors, 95.0);
}

/// Median of per-participant E95 across the cohort.
inline double u50_e95(const std::vector<ParticipantErrors>& participants) {
    require(!participants.empty(), Errc::empty_input, "no participants");
    std::vector<double> e95s;
    e95s.reserve(participants.size());
    for (const auto& pe : participants) e95s.push_back(participant_e95(pe));
    return percentile(std::move(e95s), 50.0);
}

struct BootstrapResult {
    double point = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    int n_resamples = 0;
    uint64_t seed = 0;
};

namespace detail {

/// Resample indices for bootstrap draw b. Derived from (seed, b) only, so
/// resamples are reproducible and independent of evaluation order.
inline std::vector<size_t> resample_indices(size_t n, uint64_t seed, int b) {
    Rng rng(hash_combine(seed, 0x626F6F74ULL, static_cast<uint64_t>(b)));
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = static_cast<size_t>(rng.next_below(n));
    return idx;
}

inline BootstrapResult percentile_ci(double point, std::vector<double> stats, double level,
                                     uint64_t seed) {
    BootstrapResult out;
    out.point = point;
    out.n_resamples = static_cast<int>(stats.size());
    out.seed = seed;
    const double alpha = (1.0 - level) / 2.0;  // 0.05 for level 0.90
    std::sort(stats.begin(), stats.end());
    out.ci_low = percentile_sorted(stats, 100.0 * alpha);
    out.ci_high = percentile_sorted(stats, 100.0 * (1.0 - alpha));
    return out;
}

}  // namespace detail

/// Participant-level bootstrap of U50E95: whole participants are resampled
/// with replacement, each keeping its frames intact.
inline BootstrapResult bootstrap_u50_e95(const std::vector<ParticipantErrors>& participants,
                                         int n_resamples, double level, uint64_t seed) {
    require(n_resamples >= 1, Errc::invalid_argument, "need at least one resample");
    require(!participants.empty(), Errc::empty_input, "no participants");
    const double point = u50_e95(participants);

    std::vector<double> stats(n_resamples);
    std::vector<ParticipantErrors> resampled;
    for (int b = 0; b < n_resamples; ++b) {
        auto idx = detail::resample_indices(participants.size(), seed, b);
        resampled.clear();
        for (size_t i : idx) resampled.push_back(participants[i]);
        stats[b] = u50_e95(resampled);
    }
    return detail::percentile_ci(point, std::move(stats), level, seed);
}

namespace detail {

/// Median over participants of the paired per-participant percentile
/// difference (first minus second arm) at percentile p. Index vector selects
/// the (shared) participant resample.
inline double median_paired_percentile_diff(const std::vector<ParticipantErrors>& a,
                                            const std::vector<ParticipantErrors>& b, double p,
                                            const std::vector<size_t>& idx) {
    std::vector<double> diffs;
    diffs.reserve(idx.size());
    for (size_t i : idx)
        diffs.push_back(percentile(a[i].errors, p) - percentile(b[i].errors, p));
    return percentile(std::move(diffs), 50.0);
}

inline std::vector<size_t> identity_indices(size_t n) {
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

/// Participants must appear in both arms; returns (a_aligned, b_aligned)
/// with matching order.
inline void align_paired(const std::vector<ParticipantErrors>& a,
                         const std::vector<ParticipantErrors>& b,
                         std::vector<ParticipantErrors>& a_out,
                         std::vector<ParticipantErrors>& b_out) {
    require(a.size() == b.size(), Errc::unpaired_participants,
            "arms have different participant counts");
    std::map<std::string, const ParticipantErrors*> b_by_id;
    for (const auto& pe : b) b_by_id[pe.participant_id] = &pe;
    require(b_by_id.size() == b.size(), Errc::unpaired_participants,
            "duplicate participant ids in second arm");
    a_out.clear();
    b_out.clear();
    for (const auto& pe : a) {
        auto it = b_by_id.find(pe.participant_id);
        require(it != b_by_id.end(), Errc::unpaired_participants,
                "participant missing from second arm: " + pe.participant_id);
        a_out.push_back(pe);
        b_out.push_back(*it->second);
    }
}

}  // namespace detail

/// Bootstrap of the median paired percentile difference (arm a minus arm b)
/// at percentile p. Both arms use the same resample indices (paired design).
inline BootstrapResult bootstrap_median_diff(const std::vector<ParticipantErrors>& arm_a,
                                             const std::vector<ParticipantErrors>& arm_b, double p,
                                             int n_resamples, double level, uint64_t seed) {
    require(n_resamples >= 1, Errc::invalid_argument, "need at least one resample");
    std::vector<ParticipantErrors> a, b;
    detail::align_paired(arm_a, arm_b, a, b);
    require(!a.empty(), Errc::empty_input, "no participants");

    const double point =
        detail::median_paired_percentile_diff(a, b, p, detail::identity_indices(a.size()));
    std::vector<double> stats(n_resamples);
    for (int i = 0; i < n_resamples; ++i) {
        auto idx = detail::resample_indices(a.size(), seed, i);
        stats[i] = detail::median_paired_percentile_diff(a, b, p, idx);
    }
    return detail::percentile_ci(point, std::move(stats), level, seed);
}

/// Per-percentile median PET-minus-intensity difference with a bootstrap
/// envelope. Percentiles must be strictly increasing in (0, 100).
struct DifferenceCurve {
    std::vector<double> percentiles;
    std::vector<double> median_diff;
    std::vector<double> envelope_low;
    std::vector<double> envelope_high;
};

inline DifferenceCurve percentile_difference_curve(const std::vector<ParticipantErrors>& pet_arm,
                                                   const std::vector<ParticipantErrors>& intensity_arm,
                                                   const std::vector<double>& percentiles,
                                                   int n_resamples, double level, uint64_t seed) {
    require(!percentiles.empty(), Errc::empty_input, "no percentiles requested");
    for (size_t i = 0; i < percentiles.size(); ++i) {
        require(percentiles[i] > 0.0 && percentiles[i] < 100.0, Errc::invalid_argument,
                "percentiles must lie in (0, 100)");
        if (i > 0)
            require(percentiles[i] > percentiles[i - 1], Errc::invalid_argument,
                    "percentiles must be strictly increasing");
    }
    DifferenceCurve curve;
    curve.percentiles = percentiles;
    for (double p : percentiles) {
        BootstrapResult r = bootstrap_median_diff(pet_arm, intensity_arm, p, n_resamples, level, seed);
        curve.median_diff.push_back(r.point);
        curve.envelope_low.push_back(r.ci_low);
        curve.envelope_high.push_back(r.ci_high);
    }
    return curve;
}

}  // namespace pet
