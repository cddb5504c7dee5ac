#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "glassform/forming.hpp"

namespace glassform {

inline constexpr double kDefaultCorrelationLengthMm = 2.0;

/// Smooth bounded height error on a mold grid.
struct ErrorProfile {
    std::vector<double> xs;  ///< mold abscissae [mm]
    std::vector<double> e;   ///< height error [mm]
    double tolerance_um = 0.0;
    std::uint64_t seed = 0;
    double correlation_length_mm = kDefaultCorrelationLengthMm;
};

/// Control points every correlation length, each uniform in [-tol, +tol],
/// joined by a shape-preserving cubic. The interpolant never leaves the range
/// of its control values, so |e| < tol holds without rescaling in practice;
/// the bound is still enforced.
ErrorProfile generate_error_profile(std::span<const double> grid, double tolerance_um,
                                    double correlation_length_mm, std::uint64_t seed);

/// y^ma = y + e on each mold independently.
MoldPair perturb_molds(const MoldPair& molds, const ErrorProfile& upper_err, const ErrorProfile& lower_err);

struct TrialResult {
    double tolerance_um = 0.0;
    int trial = 0;
    std::uint64_t seed = 0;
    double max_dev_inner_um = 0.0;
    double max_dev_outer_um = 0.0;
    /// |deviation at its argmax| / |machining error at the same node|, on the
    /// surface carrying the larger deviation.
    double peak_ratio = 0.0;
    /// max|deviation| / max|error| over both surfaces.
    double global_ratio = 0.0;
    /// Mean over both surfaces of Pearson(error, formed - target).
    double correlation = 0.0;
    bool peak_below_two() const { return peak_ratio < 2.0; }
};

struct ToleranceSummary {
    double tolerance_um = 0.0;
    double mean_max_dev_um = 0.0;  ///< mean over trials of max(inner, outer)
    double max_max_dev_um = 0.0;
    double mean_peak_ratio = 0.0;
    double max_peak_ratio = 0.0;
    double mean_global_ratio = 0.0;
    double mean_correlation = 0.0;
    int trials_below_two = 0;
};

struct AmplificationReport {
    std::vector<ToleranceSummary> levels;
    std::vector<TrialResult> trials;
    int trials_per_level = 0;
    std::uint64_t base_seed = 0;
    double correlation_length_mm = kDefaultCorrelationLengthMm;
    double precision_residual_um = 0.0;  ///< max surface deviation of the unperturbed molds
};

struct StudyOptions {
    std::vector<double> tolerances_um{10.0, 20.0, 30.0};
    int trials = 20;
    std::uint64_t base_seed = 1;
    double correlation_length_mm = kDefaultCorrelationLengthMm;
    unsigned jobs = 1;
};

/// Trial k of every level uses seed base_seed + k for the upper mold and
/// mix_seed(base_seed + k) for the lower one, so levels share error shapes
/// and differ only in amplitude.
AmplificationReport amplification_study(const FormingCase& c, const MoldPair& precision_molds,
                                        const StudyOptions& options = {});

nlohmann::json report_to_json(const AmplificationReport& r);
void write_trials_csv(const std::filesystem::path& path, const AmplificationReport& r);

}  // namespace glassform
