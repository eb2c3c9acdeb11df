#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "pet/error.hpp"
#include "pet/gaze_metrics.hpp"
#include "pet/model_input.hpp"
#include "pet/stats.hpp"

namespace pet {

// ---------------------------------------------------------------------------
// 9-point affine user calibration (per-axis scale and bias)
// ---------------------------------------------------------------------------

struct CalibrationParams {
    double scale_yaw = 1.0;
    double scale_pitch = 1.0;
    double bias_yaw = 0.0;
    double bias_pitch = 0.0;
};

namespace detail {

inline std::pair<double, double> fit_axis(const std::vector<double>& pred,
                                          const std::vector<double>& gt) {
    const size_t n = pred.size();
    double mean_p = 0.0, mean_g = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mean_p += pred[i];
        mean_g += gt[i];
    }
    mean_p /= static_cast<double>(n);
    mean_g /= static_cast<double>(n);
    double cov = 0.0, var = 0.0;
    for (size_t i = 0; i < n; ++i) {
        cov += (pred[i] - mean_p) * (gt[i] - mean_g);
        var += (pred[i] - mean_p) * (pred[i] - mean_p);
    }
    require(var > 0.0, Errc::degenerate_axis, "zero variance in predictions on an axis");
    double a = cov / var;
    double b = mean_g - a * mean_p;
    return {a, b};
}

}  // namespace detail

/// Independent per-axis least squares gt = a*pred + b.
inline CalibrationParams fit_affine_calibration(const std::vector<GazeAngles>& preds,
                                                const std::vector<GazeAngles>& gts) {
    require(preds.size() == gts.size(), Errc::dimension_mismatch,
            "preds and gts must have equal length");
    require(preds.size() >= 2, Errc::too_few_samples, "affine calibration needs >= 2 points");
    std::vector<double> py, pp, gy, gp;
    py.reserve(preds.size());
    for (size_t i = 0; i < preds.size(); ++i) {
        py.push_back(preds[i].yaw);
        pp.push_back(preds[i].pitch);
        gy.push_back(gts[i].yaw);
        gp.push_back(gts[i].pitch);
    }
    auto [ay, by] = detail::fit_axis(py, gy);
    auto [ap, bp] = detail::fit_axis(pp, gp);
    return CalibrationParams{ay, ap, by, bp};
}

inline GazeAngles apply_calibration(const CalibrationParams& params, const GazeAngles& pred) {
    return GazeAngles{params.scale_yaw * pred.yaw + params.bias_yaw,
                      params.scale_pitch * pred.pitch + params.bias_pitch};
}

// ---------------------------------------------------------------------------
// Grid-pooled features
// ---------------------------------------------------------------------------

/// Per-cell means of each input plane over a g x g grid, concatenated
/// plane-major then row-major. Length 4*g*g.
inline std::vector<double> extract_features(const ModelInput& input, int g) {
    require(g >= 1, Errc::invalid_argument, "grid size must be >= 1");
    require(input.width() >= g && input.height() >= g, Errc::grid_too_fine,
            "grid finer than plane dimensions");
    std::vector<double> features;
    features.reserve(4 * static_cast<size_t>(g) * g);
    const int w = input.width();
    const int h = input.height();
    for (const PlaneD& plane : input.planes) {
        for (int gy = 0; gy < g; ++gy) {
            int y_begin = gy * h / g;
            int y_end = (gy + 1) * h / g;
            for (int gx = 0; gx < g; ++gx) {
                int x_begin = gx * w / g;
                int x_end = (gx + 1) * w / g;
                double sum = 0.0;
                for (int y = y_begin; y < y_end; ++y) {
                    const double* row = plane.row(y);
                    for (int x = x_begin; x < x_end; ++x) sum += row[x];
                }
                features.push_back(sum / (static_cast<double>(y_end - y_begin) * (x_end - x_begin)));
            }
        }
    }
    return features;
}

// ---------------------------------------------------------------------------
// Huber loss
// ---------------------------------------------------------------------------

/// 0.5 r^2 inside |r| <= delta, linear tail outside.
inline double huber_loss(double residual, double delta) {
    require(delta > 0.0, Errc::non_positive_delta, "delta must be > 0");
    double a = std::abs(residual);
    if (a <= delta) return 0.5 * residual * residual;
    return delta * (a - 0.5 * delta);
}

// ---------------------------------------------------------------------------
// Stand-in gaze regressor: ridge on standardized grid features, refined by
// Huber IRLS with MAD-based outlier rejection
// ---------------------------------------------------------------------------

struct RegressorModel {
    std::vector<double> weights_yaw;    // length = feature_len
    std::vector<double> weights_pitch;  // length = feature_len
    double intercept_yaw = 0.0;
    double intercept_pitch = 0.0;
    double ridge_lambda = 1e-3;
    double huber_delta = 1.0;  // degrees
    InputModality trained_modality = InputModality::pet;
    int grid = 8;

    size_t feature_len() const { return weights_yaw.size(); }
};

inline GazeAngles predict_gaze(const RegressorModel& model, const std::vector<double>& features) {
    require(features.size() == model.feature_len(), Errc::dimension_mismatch,
            "feature length does not match model");
    double yaw = model.intercept_yaw;
    double pitch = model.intercept_pitch;
    for (size_t i = 0; i < features.size(); ++i) {
        yaw += model.weights_yaw[i] * features[i];
        pitch += model.weights_pitch[i] * features[i];
    }
    return GazeAngles{yaw, pitch};
}

struct RegressorFitReport {
    std::vector<uint8_t> outlier_mask;  // 1 = rejected by the MAD rule
    int irls_rounds = 0;
    double final_mean_error_deg = 0.0;  // over non-outliers
};

namespace detail {

/// Solves A x = rhs for SPD A via Cholesky, in place. Throws SingularSystem
/// when a pivot collapses (possible only with ridge_lambda = 0 and
/// rank-deficient features).
inline std::vector<double> cholesky_solve(std::vector<double> a, std::vector<double> rhs, size_t n) {
    for (size_t j = 0; j < n; ++j) {
        double diag = a[j * n + j];
        for (size_t k = 0; k < j; ++k) diag -= a[j * n + k] * a[j * n + k];
        require(diag > 1e-300, Errc::singular_system, "rank-deficient normal equations");
        diag = std::sqrt(diag);
        a[j * n + j] = diag;
        for (size_t i = j + 1; i < n; ++i) {
            double v = a[i * n + j];
            for (size_t k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = v / diag;
        }
    }
    // forward then backward substitution
    for (size_t i = 0; i < n; ++i) {
        double v = rhs[i];
        for (size_t k = 0; k < i; ++k) v -= a[i * n + k] * rhs[k];
        rhs[i] = v / a[i * n + i];
    }
    for (size_t ii = n; ii-- > 0;) {
        double v = rhs[ii];
        for (size_t k = ii + 1; k < n; ++k) v -= a[k * n + ii] * rhs[k];
        rhs[ii] = v / a[ii * n + ii];
    }
    return rhs;
}

struct Standardizer {
    std::vector<double> mean;
    std::vector<double> inv_sd;
};

inline Standardizer fit_standardizer(const std::vector<std::vector<double>>& x) {
    const size_t n = x.size();
    const size_t d = x.front().size();
    Standardizer s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
    for (const auto& row : x)
        for (size_t j = 0; j < d; ++j) s.mean[j] += row[j];
    for (size_t j = 0; j < d; ++j) s.mean[j] /= static_cast<double>(n);
    std::vector<double> var(d, 0.0);
    for (const auto& row : x)
        for (size_t j = 0; j < d; ++j) {
            double diff = row[j] - s.mean[j];
            var[j] += diff * diff;
        }
    for (size_t j = 0; j < d; ++j) {
        var[j] /= static_cast<double>(n);
        s.inv_sd[j] = var[j] > 0.0 ? 1.0 / std::sqrt(var[j]) : 0.0;  // constant dims drop out
    }
    return s;
}

/// Weighted ridge on standardized, centered data, mapped back to raw feature
/// space. Returns (weights, intercept) for one target axis.
inline std::pair<std::vector<double>, double> weighted_ridge(
    const std::vector<std::vector<double>>& x, const std::vector<double>& y,
    const std::vector<double>& sample_weight, const Standardizer& s, double lambda) {
    const size_t n = x.size();
    const size_t d = x.front().size();

    double wsum = 0.0, y_mean = 0.0;
    for (size_t i = 0; i < n; ++i) {
        wsum += sample_weight[i];
        y_mean += sample_weight[i] * y[i];
    }
    require(wsum > 0.0, Errc::too_few_samples, "all samples rejected");
    y_mean /= wsum;

    // normal equations on standardized features
    std::vector<double> gram(d * d, 0.0);
    std::vector<double> rhs(d, 0.0);
    std::vector<double> z(d);
    for (size_t i = 0; i < n; ++i) {
        if (sample_weight[i] == 0.0) continue;
        for (size_t j = 0; j < d; ++j) z[j] = (x[i][j] - s.mean[j]) * s.inv_sd[j];
        const double wy = sample_weight[i] * (y[i] - y_mean);
        for (size_t j = 0; j < d; ++j) {
            rhs[j] += wy * z[j];
            const double wz = sample_weight[i] * z[j];
            for (size_t k = j; k < d; ++k) gram[j * d + k] += wz * z[k];
        }
    }
    for (size_t j = 0; j < d; ++j) {
        for (size_t k = 0; k < j; ++k) gram[j * d + k] = gram[k * d + j];
        gram[j * d + j] += lambda;
    }
    std::vector<double> beta = cholesky_solve(std::move(gram), std::move(rhs), d);

    // map back: w_raw[j] = beta[j] * inv_sd[j]; intercept absorbs the means
    std::vector<double> weights(d);
    double intercept = y_mean;
    for (size_t j = 0; j < d; ++j) {
        weights[j] = beta[j] * s.inv_sd[j];
        intercept -= weights[j] * s.mean[j];
    }
    return {std::move(weights), intercept};
}

}  // namespace detail

/// Fits the stand-in regressor. Initial closed-form ridge, then up to 10
/// rounds of: angular-error residuals -> MAD outlier mask
/// (error > median + outlier_k * MAD) -> Huber IRLS reweighting
/// (weight 1 for r <= delta, else delta/r) on non-outliers. Stops when the
/// weight vector is stable.
inline RegressorModel fit_standin_regressor(const std::vector<std::vector<double>>& features,
                                            const std::vector<GazeAngles>& targets,
                                            double ridge_lambda = 1e-3, double huber_delta = 1.0,
                                            double outlier_k = 5.0,
                                            RegressorFitReport* report = nullptr) {
    require(features.size() == targets.size(), Errc::dimension_mismatch,
            "features and targets must have equal length");
    require(features.size() >= 2, Errc::too_few_samples, "need at least 2 samples");
    require(ridge_lambda >= 0.0, Errc::invalid_argument, "ridge_lambda must be >= 0");
    require(huber_delta > 0.0, Errc::non_positive_delta, "huber_delta must be > 0");
    const size_t n = features.size();
    const size_t d = features.front().size();
    for (const auto& f : features)
        require(f.size() == d, Errc::dimension_mismatch, "ragged feature matrix");

    std::vector<double> y_yaw(n), y_pitch(n);
    for (size_t i = 0; i < n; ++i) {
        y_yaw[i] = targets[i].yaw;
        y_pitch[i] = targets[i].pitch;
    }

    const detail::Standardizer standardizer = detail::fit_standardizer(features);
    RegressorModel model;
    model.ridge_lambda = ridge_lambda;
    model.huber_delta = huber_delta;

    std::vector<double> weight(n, 1.0);
    std::vector<uint8_t> outlier(n, 0);
    int rounds = 0;

    auto solve_both = [&]() {
        auto [wy, by] = detail::weighted_ridge(features, y_yaw, weight, standardizer, ridge_lambda);
        auto [wp, bp] = detail::weighted_ridge(features, y_pitch, weight, standardizer, ridge_lambda);
        model.weights_yaw = std::move(wy);
        model.weights_pitch = std::move(wp);
        model.intercept_yaw = by;
        model.intercept_pitch = bp;
    };
    solve_both();

    std::vector<double> errors(n);
    for (int round = 0; round < 10; ++round) {
        for (size_t i = 0; i < n; ++i)
            errors[i] = angular_error(predict_gaze(model, features[i]), targets[i]);

        const double med = median(errors);
        const double dev = mad(errors);
        const double cutoff = med + outlier_k * dev;

        std::vector<double> new_weight(n);
        for (size_t i = 0; i < n; ++i) {
            if (errors[i] > cutoff && dev > 0.0) {
                outlier[i] = 1;
                new_weight[i] = 0.0;
            } else {
                outlier[i] = 0;
                new_weight[i] = errors[i] <= huber_delta ? 1.0 : huber_delta / errors[i];
            }
        }
        double max_change = 0.0;
        for (size_t i = 0; i < n; ++i)
            max_change = std::max(max_change, std::abs(new_weight[i] - weight[i]));
        weight = std::move(new_weight);
        rounds = round + 1;
        if (max_change < 1e-9) break;
        solve_both();
    }

    if (report) {
        report->outlier_mask = outlier;
        report->irls_rounds = rounds;
        double sum = 0.0;
        size_t kept = 0;
        for (size_t i = 0; i < n; ++i) {
            if (!outlier[i]) {
                sum += angular_error(predict_gaze(model, features[i]), targets[i]);
                ++kept;
            }
        }
        report->final_mean_error_deg = kept ? sum / static_cast<double>(kept) : 0.0;
    }
    return model;
}

// ---------------------------------------------------------------------------
// Model (de)serialization
// ---------------------------------------------------------------------------

inline nlohmann::json regressor_to_json(const RegressorModel& model) {
    return nlohmann::json{
        {"weights_yaw", model.weights_yaw},
        {"weights_pitch", model.weights_pitch},
        {"intercept_yaw", model.intercept_yaw},
        {"intercept_pitch", model.intercept_pitch},
        {"ridge_lambda", model.ridge_lambda},
        {"huber_delta", model.huber_delta},
        {"modality", model.trained_modality == InputModality::pet ? "pet" : "pseudo_intensity"},
        {"grid", model.grid},
    };
}

inline RegressorModel regressor_from_json(const nlohmann::json& j) {
    RegressorModel model;
    try {
        model.weights_yaw = j.at("weights_yaw").get<std::vector<double>>();
        model.weights_pitch = j.at("weights_pitch").get<std::vector<double>>();
        model.intercept_yaw = j.at("intercept_yaw").get<double>();
        model.intercept_pitch = j.at("intercept_pitch").get<double>();
        model.ridge_lambda = j.at("ridge_lambda").get<double>();
        model.huber_delta = j.at("huber_delta").get<double>();
        model.trained_modality = j.at("modality").get<std::string>() == "pet"
                                     ? InputModality::pet
                                     : InputModality::pseudo_intensity;
        model.grid = j.at("grid").get<int>();
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::parse_error, std::string("model json: ") + e.what());
    }
    require(model.weights_yaw.size() == model.weights_pitch.size(), Errc::parse_error,
            "model weight vectors differ in length");
    return model;
}

inline nlohmann::json calibration_to_json(const CalibrationParams& params) {
    return nlohmann::json{
        {"scale", {params.scale_yaw, params.scale_pitch}},
        {"bias", {params.bias_yaw, params.bias_pitch}},
    };
}

inline CalibrationParams calibration_from_json(const nlohmann::json& j) {
    CalibrationParams params;
    try {
        params.scale_yaw = j.at("scale")[0].get<double>();
        params.scale_pitch = j.at("scale")[1].get<double>();
        params.bias_yaw = j.at("bias")[0].get<double>();
        params.bias_pitch = j.at("bias")[1].get<double>();
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::parse_error, std::string("calibration json: ") + e.what());
    }
    return params;
}

}  // namespace pet
