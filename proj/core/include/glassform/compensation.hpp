#pragma once

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "glassform/forming.hpp"

namespace glassform {

struct IterationRecord {
    double max_inner_um = 0.0;
    double max_outer_um = 0.0;
    double max_thickness_um = 0.0;

    double max_surface_um() const { return std::max(max_inner_um, max_outer_um); }
};

struct CompensationResult {
    MoldPair initial_molds;
    MoldPair precision_molds;
    Profile fec_upper;  ///< precision - initial upper mold, on the target grid [mm]
    Profile fec_lower;
    int iterations = 0;  ///< number of mold updates applied
    std::vector<IterationRecord> history;  ///< one entry per forward simulation
    bool converged = false;
    DeviationReport final_report;
};

struct CompensationOptions {
    double tolerance_um = 2.0;
    int max_iters = 10;
    /// Gain applied to each deviation before it is added to the molds, in (0, 1].
    double relaxation = 1.0;
};

/// y_mold^(i+1)(x) = y_mold^i(x) + gain * dev(x / m), deviations taken from the
/// target grid. Throws RangeError when a mold abscissa maps outside the report.
MoldPair compensate_once(const MoldPair& molds, const DeviationReport& report, double gain = 1.0);

/// Alternates forward simulation and mold updates until both surface
/// deviations drop below tolerance or max_iters updates were applied.
/// Non-convergence is reported through the result, not thrown.
CompensationResult run_compensation(const FormingCase& c, const CompensationOptions& options = {});

/// Adds an FEC pair (on the target grid) to the initial molds of a case.
MoldPair apply_fec(const MoldPair& initial, const Profile& fec_upper, const Profile& fec_lower);

nlohmann::json history_to_json(const CompensationResult& r);
void write_mold_csv(const std::filesystem::path& path, const MoldPair& molds);
void write_fec_csv(const std::filesystem::path& path, const Profile& fec_upper, const Profile& fec_lower);

}  // namespace glassform
