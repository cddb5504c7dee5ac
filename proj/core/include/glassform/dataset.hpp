#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "glassform/compensation.hpp"
#include "glassform/features.hpp"
#include "glassform/materials.hpp"

namespace glassform {

inline constexpr const char* kGeneratorVersion = "glassform-dataset/1";
/// Largest r_max allowed in a training design space.
inline constexpr double kTrainingRmaxLimitMm = 20.0;

struct Range {
    double lo = 0.0;
    double hi = 0.0;
    double at(double u) const { return lo + (hi - lo) * u; }
};

struct DesignSpace {
    Range curvature_c{0.01, 0.06};       ///< 1/mm
    Range conic_k{-3.0, 0.0};
    Range a4{0.0, 2e-5};                 ///< coefficient of x^4, 1/mm^3
    Range r_max_mm{8.0, 20.0};
    Range thickness_mm{0.5, 1.1};
    Range t_mold_c{650.0, 750.0};
    Range anneal_rate_c_per_s{0.5, 5.0};
    /// Cases steeper than this anywhere on [0, r_max] are rejected.
    double max_inclination_deg = 75.0;
    std::string glass = "GG";
    std::string mold = "glassy_carbon";
    std::size_t rows_per_case = 7;
    /// Rows are stratified over X in [x_lo, x_hi].
    Range x_range{0.0, 1.0};
    ThermalSchedule base_schedule;  ///< hold, anneal end, cooling and room temperature
    FormingConfig forming;

    void validate() const;
};

void to_json(nlohmann::json& j, const DesignSpace& s);
/// Missing keys keep their defaults; ranges are [lo, hi] arrays.
void from_json(const nlohmann::json& j, DesignSpace& s);

struct DesignCase {
    long id = 0;
    FormingCase c;
};

/// Latin-hypercube sample of the seven ranges. Rejected draws (negative
/// radicand, slope above the cap, molds that cannot be built) are replaced
/// from further hypercube batches. Throws ValidationError when more than
/// 90 % of the draws are rejected.
std::vector<DesignCase> sample_design_space(const DesignSpace& space, std::size_t n_cases, std::uint64_t seed,
                                            const MaterialCatalog& catalog = MaterialCatalog::builtin());

struct CaseRecord {
    long id = 0;
    FormingCase c;
    bool converged = false;
    int iterations = 0;
    double final_max_dev_um = 0.0;
    std::string error;  ///< non-empty when the case failed outright
};

struct Dataset {
    std::vector<FeatureRow> rows;  ///< sorted by (case_id, X)
    std::vector<CaseRecord> cases;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
};

struct GenerateOptions {
    std::size_t rows_per_case = 7;
    Range x_range{0.0, 1.0};
    CompensationOptions compensation;
    std::uint64_t seed = 1;  ///< positions of the rows inside their X strata
    unsigned jobs = 1;
};

/// Compensation loop per case, then rows_per_case rows at stratified X with
/// the case's FEC interpolated to each row. Non-converged cases are excluded
/// and kept in `cases` for audit. Throws Error when no case converges.
Dataset generate_dataset(std::span<const DesignCase> cases, const GenerateOptions& options);

/// Case-level shuffle; the first round(train_fraction * cases) cases go to
/// train. Row order inside each side follows the input.
std::pair<std::vector<FeatureRow>, std::vector<FeatureRow>> split_dataset(std::span<const FeatureRow> rows,
                                                                          double train_fraction,
                                                                          std::uint64_t seed);

void write_dataset_csv(const std::filesystem::path& path, std::span<const FeatureRow> rows);
std::vector<FeatureRow> read_dataset_csv(const std::filesystem::path& path);
nlohmann::json manifest_to_json(const Dataset& d);

}  // namespace glassform
