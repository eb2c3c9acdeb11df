#pragma once

#include <array>
#include <cmath>
#include <string>

#include "pet/demosaic.hpp"
#include "pet/image.hpp"
#include "pet/stats.hpp"

namespace pet {

enum class InputModality { pet, pseudo_intensity };
enum class InputNormalize { per_channel_standardize, none };

/// Capacity-matched four-plane model input. For pseudo_intensity all four
/// planes are the same channel average, duplicated to match dimensionality.
struct ModelInput {
    std::array<PlaneD, 4> planes;
    InputModality modality = InputModality::pet;
    std::string source_frame_id;

    int width() const { return planes[0].width(); }
    int height() const { return planes[0].height(); }
};

/// Zero-mean unit-variance transform; degenerate (zero-variance) planes map
/// to all zeros.
inline PlaneD standardize_plane(const PlaneD& plane) {
    MeanVar mv = mean_variance(plane);
    PlaneD out(plane.width(), plane.height());
    if (mv.variance <= 0.0) return out;
    const double inv_sd = 1.0 / std::sqrt(mv.variance);
    for (size_t i = 0; i < plane.size(); ++i)
        out.data()[i] = (plane.data()[i] - mv.mean) * inv_sd;
    return out;
}

/// Stacks the four polarization channels in 0/45/90/135 order.
inline ModelInput form_pet_input(const PolarizationChannels& ch,
                                 InputNormalize normalize = InputNormalize::per_channel_standardize,
                                 std::string source_frame_id = {}) {
    ModelInput input;
    input.modality = InputModality::pet;
    input.source_frame_id = std::move(source_frame_id);
    if (normalize == InputNormalize::per_channel_standardize) {
        input.planes = {standardize_plane(ch.i0), standardize_plane(ch.i45),
                        standardize_plane(ch.i90), standardize_plane(ch.i135)};
    } else {
        input.planes = {ch.i0, ch.i45, ch.i90, ch.i135};
    }
    return input;
}

/// Average of the four channels (a polarization-insensitive camera stand-in),
/// normalized once, then duplicated across the four planes.
inline ModelInput form_pseudo_intensity_input(
    const PolarizationChannels& ch,
    InputNormalize normalize = InputNormalize::per_channel_standardize,
    std::string source_frame_id = {}) {
    PlaneD mean(ch.width(), ch.height());
    for (size_t i = 0; i < mean.size(); ++i) {
        mean.data()[i] = 0.25 * (ch.i0.data()[i] + ch.i45.data()[i] + ch.i90.data()[i] +
                                 ch.i135.data()[i]);
    }
    if (normalize == InputNormalize::per_channel_standardize) mean = standardize_plane(mean);

    ModelInput input;
    input.modality = InputModality::pseudo_intensity;
    input.source_frame_id = std::move(source_frame_id);
    input.planes = {mean, mean, mean, mean};
    return input;
}

}  // namespace pet
