#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace glassform {

/// One generalized-Maxwell branch of the normalized shear relaxation modulus.
struct PronyTerm {
    double g = 0.0;    ///< shear modulus ratio
    double k = 0.0;    ///< bulk modulus ratio (always 0 here)
    double tau = 1.0;  ///< relaxation time at the reference temperature [s]
};

struct PronySeries {
    std::vector<PronyTerm> terms;
    double reference_temperature_c = 0.0;

    /// Throws ValidationError unless g_i in (0,1], sum g_i <= 1, tau_i > 0, k_i == 0.
    void validate() const;
    double total_g() const;
};

struct WlfParams {
    double c1 = 0.0;
    double c2 = 0.0;  ///< [degC]
    double reference_temperature_c = 0.0;

    void validate() const;
    /// Temperature at which the WLF denominator vanishes: T0 - C2.
    double singular_temperature_c() const { return reference_temperature_c - c2; }
};

struct MaterialProperties {
    std::string name;
    double density_g_cm3 = 0.0;
    double youngs_modulus_gpa = 0.0;
    double poisson_ratio = 0.0;
    double cte_below_tg_per_c = 0.0;
    double cte_above_tg_per_c = 0.0;
    double tg_c = 0.0;
    PronySeries prony;
    WlfParams wlf;

    void validate() const;
};

struct MoldMaterial {
    std::string name;
    double cte_per_c = 0.0;

    void validate() const;
};

/// Piecewise-linear temperature history: hold at the molding temperature,
/// anneal linearly to anneal_end_c, then cool linearly to room temperature.
struct ThermalSchedule {
    double molding_temperature_c = 700.0;
    double hold_seconds = 60.0;
    double annealing_rate_c_per_s = 1.0;
    double anneal_end_c = 500.0;
    double cooling_rate_c_per_s = 5.0;
    double room_temperature_c = 20.0;

    void validate() const;
    /// Molding minus room temperature.
    double delta_t() const { return molding_temperature_c - room_temperature_c; }
};

/// Linear temperature ramp from start_c to end_c over duration_s (hold when equal).
struct TemperatureSegment {
    double start_c = 0.0;
    double end_c = 0.0;
    double duration_s = 0.0;
};

std::vector<TemperatureSegment> segments_of(const ThermalSchedule& schedule);

inline constexpr double kDefaultWlfGuardMarginC = 5.0;
inline constexpr double kDefaultReducedTimeStepS = 1.0;

/// Normalized relaxation modulus g(t) = 1 - sum g_i (1 - exp(-t/tau_i)).
double prony_g(double t_seconds, const PronySeries& series);

/// WLF shift factor A (linear scale). Throws DomainError at or below
/// T0 - C2 + margin_c.
double wlf_shift(double temperature_c, const WlfParams& params,
                 double margin_c = kDefaultWlfGuardMarginC);

/// Reduced time xi = sum dt / A(T_mid). Sub-steps whose midpoint temperature is
/// inside the WLF guard band contribute nothing (frozen).
double reduced_time(std::span<const TemperatureSegment> segments, const WlfParams& params,
                    double step_seconds = kDefaultReducedTimeStepS,
                    double margin_c = kDefaultWlfGuardMarginC);
double reduced_time(const ThermalSchedule& schedule, const WlfParams& params,
                    double step_seconds = kDefaultReducedTimeStepS);

/// Unrelaxed stress fraction left after the full schedule: g(xi).
double residual_fraction(std::span<const TemperatureSegment> segments, const PronySeries& prony,
                         const WlfParams& wlf, double step_seconds = kDefaultReducedTimeStepS);
double residual_fraction(const ThermalSchedule& schedule, const PronySeries& prony,
                         const WlfParams& wlf, double step_seconds = kDefaultReducedTimeStepS);

using CatalogEntry = std::variant<MaterialProperties, MoldMaterial>;

/// Glass and mold constants. Built-in entries are GG, BK7, graphite, glassy_carbon.
class MaterialCatalog {
public:
    static MaterialCatalog builtin();
    /// Built-in entries overlaid with the contents of a JSON file
    /// ({"glasses": [...], "molds": [...]}).
    static MaterialCatalog from_json_file(const std::filesystem::path& path);
    static MaterialCatalog from_json(const nlohmann::json& doc);

    /// Throws LookupError listing the available names.
    CatalogEntry lookup(std::string_view name) const;
    MaterialProperties glass(std::string_view name) const;
    MoldMaterial mold(std::string_view name) const;

    std::vector<std::string> names() const;
    const std::vector<MaterialProperties>& glasses() const { return glasses_; }
    const std::vector<MoldMaterial>& molds() const { return molds_; }

    void add(MaterialProperties glass);
    void add(MoldMaterial mold);

private:
    std::vector<MaterialProperties> glasses_;
    std::vector<MoldMaterial> molds_;
};

CatalogEntry material_catalog(std::string_view name);

void to_json(nlohmann::json& j, const PronySeries& p);
void from_json(const nlohmann::json& j, PronySeries& p);
void to_json(nlohmann::json& j, const WlfParams& w);
void from_json(const nlohmann::json& j, WlfParams& w);
void to_json(nlohmann::json& j, const MaterialProperties& m);
void from_json(const nlohmann::json& j, MaterialProperties& m);
void to_json(nlohmann::json& j, const MoldMaterial& m);
void from_json(const nlohmann::json& j, MoldMaterial& m);
void to_json(nlohmann::json& j, const ThermalSchedule& s);
void from_json(const nlohmann::json& j, ThermalSchedule& s);

}  // namespace glassform
