#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "glassform/geometry.hpp"
#include "glassform/materials.hpp"

namespace glassform {

/// Designed glass product: inner (upper) surface plus a uniform normal
/// thickness. The outer surface is the inner surface offset by the thickness
/// toward -y.
struct GlassTarget {
    std::variant<AsphericSurface, Profile> surface;
    double thickness_mm = 0.7;
    MaterialProperties glass;
    double r_max_mm = 15.0;

    void validate() const;
    /// thickness / r_max above this is reported as a warning by callers.
    static constexpr double kThinShellRatio = 0.2;
    bool thin_shell() const { return thickness_mm <= kThinShellRatio * r_max_mm; }

    Profile inner(std::span<const double> grid) const;
    Profile outer(std::span<const double> grid) const;
    /// Local geometry of the inner surface (analytic for aspheric targets).
    LocalGeometry geometry(std::span<const double> grid) const;
    /// Same product with all lengths multiplied by lambda.
    GlassTarget scaled(double lambda) const;
};

/// Knobs of the reduced-order forming model.
struct FormingConfig {
    double springback_beta = 4.5;
    double springback_gamma = 3.0;
    double thinning_eta = 0.010;
    std::size_t grid_points = kDefaultGridPoints;
    double reduced_time_step_s = kDefaultReducedTimeStepS;

    void validate() const;
    /// beta = gamma = eta = 0: the forward model only moves geometry thermally.
    static FormingConfig identity();
};

struct MoldPair {
    Profile upper;  ///< forms the glass inner surface
    Profile lower;  ///< forms the glass outer surface
    double scale_m = 1.0;
    MoldMaterial mold_material;

    void validate() const;
};

struct FormedGlass {
    Profile inner;
    Profile outer;
    std::vector<double> thickness_mm_at;  ///< normal thickness, aligned with the shared grid
};

/// Differences target - formed (surfaces) and formed - target (thickness), in um.
struct DeviationReport {
    std::vector<double> xs;
    std::vector<double> inner_dev_um;
    std::vector<double> outer_dev_um;
    std::vector<double> thickness_dev_um;
    double max_abs_inner_um = 0.0;
    double max_abs_outer_um = 0.0;
    double max_abs_thickness_um = 0.0;

    double max_abs_surface_um() const { return std::max(max_abs_inner_um, max_abs_outer_um); }
};

/// Everything needed to run one design: the product, mold material, thermal
/// schedule and forward-model configuration.
struct FormingCase {
    std::string name = "case";
    GlassTarget target;
    MoldMaterial mold;
    ThermalSchedule schedule;
    FormingConfig config;

    void validate() const;
    std::vector<double> target_grid() const;
    FormingCase scaled(double lambda) const;
};

/// Thermal strain of the glass between room and molding temperature divided
/// by the span: CTEs weighted by the temperature range on each side of Tg.
double effective_glass_cte(const MaterialProperties& glass, const ThermalSchedule& schedule);

/// m = (1 + a_glass dT) / (1 + a_mold dT).
double mold_scale_factor(const MaterialProperties& glass, const MoldMaterial& mold,
                         const ThermalSchedule& schedule);

/// Room-temperature molds: the target inner/outer surfaces scaled by m in both
/// coordinates, on the grid m * target_grid.
MoldPair design_initial_molds(const GlassTarget& target, const MoldMaterial& mold,
                              const ThermalSchedule& schedule, const FormingConfig& config);
MoldPair design_initial_molds(const FormingCase& c);

struct BlankThickness {
    double thickness_mm = 0.0;
    bool within_limit = true;  ///< t0 <= 1.1 * product thickness
};

/// Flat blank of radius r_max with the product's volume.
BlankThickness blank_thickness(const GlassTarget& target);

/// Forward model: conform to the hot cavity, thin, relax, spring back, shrink,
/// and rebuild the room-temperature surfaces on the target grid.
///
/// Both surfaces are rebuilt from the vertical midsurface and vertical gap so
/// the purely geometric part of the pipeline is an exact inverse of the
/// cavity conformation.
FormedGlass simulate_forming(const MoldPair& molds, const GlassTarget& target,
                             const ThermalSchedule& schedule, const FormingConfig& config);
FormedGlass simulate_forming(const MoldPair& molds, const FormingCase& c);

/// Normal thickness measured along the outer-surface normals at outer.xs.
std::vector<double> normal_thickness(const Profile& inner, const Profile& outer);

DeviationReport compute_deviations(const FormedGlass& formed, const GlassTarget& target);

void to_json(nlohmann::json& j, const FormingConfig& c);
/// Missing keys keep their current values.
void merge_json(const nlohmann::json& j, FormingConfig& c);

/// Case file: {"name", "surface" | "profile_csv", "r_max_mm", "thickness_mm", "glass",
/// "mold", "schedule": {...}, "forming": {...}}. Material names are resolved
/// through `catalog`.
/// A relative "profile_csv" path is resolved against `base_dir`.
FormingCase parse_case(const nlohmann::json& doc, const MaterialCatalog& catalog,
                       const FormingConfig& defaults = {},
                       const std::filesystem::path& base_dir = {});
nlohmann::json case_to_json(const FormingCase& c);

void write_deviation_csv(const std::filesystem::path& path, const DeviationReport& report);

}  // namespace glassform
