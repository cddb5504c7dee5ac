#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "glassform/features.hpp"
#include "glassform/forming.hpp"

namespace glassform {

/// Six inputs, eight rectifier hidden layers, one linear output.
inline const std::vector<std::size_t> kStandardLayers{6, 12, 12, 12, 12, 10, 10, 8, 8, 1};

enum class SurfaceTag { Upper, Lower };

std::string to_string(SurfaceTag tag);
SurfaceTag surface_tag_from_string(const std::string& s);

struct Network {
    std::vector<std::size_t> layers = kStandardLayers;
    /// weights[l] is layers[l+1] x layers[l], row-major.
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    std::vector<double> input_mean;
    std::vector<double> input_std;
    double output_mean = 0.0;
    double output_std = 1.0;
    SurfaceTag surface = SurfaceTag::Upper;
    std::uint64_t seed = 0;

    void validate() const;
    std::size_t parameter_count() const;
    /// Target column of a row for this network's surface.
    double target_of(const FeatureRow& row) const {
        return surface == SurfaceTag::Upper ? row.fec_u_bar : row.fec_l_bar;
    }
};

/// He-normal weights (std sqrt(2 / fan_in)), zero biases, identity
/// normalization. Deterministic in the seed.
Network init_network(std::uint64_t seed, SurfaceTag surface, const std::vector<std::size_t>& layers = kStandardLayers);

struct Prediction {
    double normalized = 0.0;
    double value = 0.0;  ///< normalized * output_std + output_mean
};

/// Throws DomainError on non-finite input.
Prediction forward(const Network& net, std::span<const double> features);

/// Parameter-shaped storage, also used for gradients and optimizer moments.
struct Parameters {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

/// Gradient of the squared error (prediction - target)^2 on the normalized
/// scale for one sample.
Parameters analytic_gradient(const Network& net, const FeatureRow& row);
/// Central differences of the same loss, perturbing every parameter.
Parameters numeric_gradient(const Network& net, const FeatureRow& row, double epsilon);
/// max |a - n| / max(|a|, |n|, 1e-6) over all parameters.
double max_relative_error(const Parameters& a, const Parameters& n);
/// epsilon must lie in [1e-7, 1e-4].
double gradient_check(const Network& net, const FeatureRow& row, double epsilon = 1e-5);

struct TrainConfig {
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    int max_epochs = 20000;
    std::size_t batch_size = 32;
    int early_stop_patience = 500;
    std::uint64_t seed = 1;

    void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct TrainReport {
    double train_mse = 0.0;  ///< normalized scale
    double test_mse = 0.0;
    double train_mse_raw = 0.0;  ///< FEC_bar scale
    double test_mse_raw = 0.0;
    std::optional<double> train_r2;
    std::optional<double> test_r2;
    int epochs_run = 0;
    int best_epoch = 0;
    std::vector<double> train_curve;
    std::vector<double> test_curve;
};

/// Mini-batch Adam on the normalized MSE. Normalization comes from the train
/// rows; the parameters with the lowest test MSE (train MSE when there are
/// no test rows) are restored at the end.
TrainReport train(Network& net, std::span<const FeatureRow> train_rows, std::span<const FeatureRow> test_rows,
                  const TrainConfig& cfg);

struct Evaluation {
    double mse = 0.0;      ///< normalized scale
    double mse_raw = 0.0;  ///< FEC_bar scale
    std::optional<double> r2;  ///< empty when the targets have zero variance
    std::vector<double> abs_errors;  ///< |predicted - target| FEC_bar per row
};

Evaluation evaluate(const Network& net, std::span<const FeatureRow> rows);

/// R^2 = 1 - SS_res / SS_tot; empty when SS_tot is 0.
std::optional<double> r_squared(std::span<const double> target, std::span<const double> predicted);

struct FecPrediction {
    Profile fec_upper;  ///< mm, on the case's target grid
    Profile fec_lower;
    std::vector<std::string> warnings;
};

/// Runs both networks along the case grid and scales FEC_bar by r_max.
/// Inputs more than 6 std from the training mean are reported in warnings.
FecPrediction predict_fec(const Network& upper, const Network& lower, const FormingCase& c);

nlohmann::json model_to_json(const Network& net);
Network model_from_json(const nlohmann::json& j);
void save_model(const Network& net, const std::filesystem::path& path);
/// Throws LoadError on unreadable/truncated files, schema or layer mismatch,
/// and when `expected` is given and the surface tag differs.
Network load_model(const std::filesystem::path& path, std::optional<SurfaceTag> expected = std::nullopt);

}  // namespace glassform
