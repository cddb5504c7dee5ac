#include "glassform/materials.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "glassform/error.hpp"

namespace glassform {

void PronySeries::validate() const {
    if (terms.empty()) throw ValidationError("prony series has no terms");
    double sum = 0.0;
    for (const auto& t : terms) {
        if (!(t.g > 0.0 && t.g <= 1.0))
            throw ValidationError("prony g_i must lie in (0, 1]");
        if (!(t.tau > 0.0)) throw ValidationError("prony tau_i must be positive");
        if (t.k != 0.0) throw ValidationError("prony k_i must be 0 (bulk relaxation is not modeled)");
        sum += t.g;
    }
    if (sum > 1.0 + 1e-12) throw ValidationError("prony sum of g_i exceeds 1");
}

double PronySeries::total_g() const {
    double sum = 0.0;
    for (const auto& t : terms) sum += t.g;
    return sum;
}

void WlfParams::validate() const {
    if (!(c1 > 0.0) || !(c2 > 0.0)) throw ValidationError("WLF constants C1 and C2 must be positive");
}

void MaterialProperties::validate() const {
    if (!(cte_below_tg_per_c > 0.0) || !(cte_above_tg_per_c > 0.0))
        throw ValidationError("glass '" + name + "': CTEs must be positive");
    if (cte_above_tg_per_c < cte_below_tg_per_c)
        throw ValidationError("glass '" + name + "': CTE above Tg must not be below CTE under Tg");
    prony.validate();
    wlf.validate();
}

void MoldMaterial::validate() const {
    if (!(cte_per_c > 0.0)) throw ValidationError("mold '" + name + "': CTE must be positive");
}

void ThermalSchedule::validate() const {
    if (!(molding_temperature_c > anneal_end_c && anneal_end_c > room_temperature_c))
        throw ValidationError(
            "schedule must satisfy molding temperature > anneal end > room temperature");
    if (!(annealing_rate_c_per_s > 0.0) || !(cooling_rate_c_per_s > 0.0))
        throw ValidationError("schedule rates must be positive");
    if (!(hold_seconds >= 0.0)) throw ValidationError("schedule hold time must be non-negative");
}

std::vector<TemperatureSegment> segments_of(const ThermalSchedule& s) {
    s.validate();
    return {
        {s.molding_temperature_c, s.molding_temperature_c, s.hold_seconds},
        {s.molding_temperature_c, s.anneal_end_c,
         (s.molding_temperature_c - s.anneal_end_c) / s.annealing_rate_c_per_s},
        {s.anneal_end_c, s.room_temperature_c,
         (s.anneal_end_c - s.room_temperature_c) / s.cooling_rate_c_per_s},
    };
}

double prony_g(double t, const PronySeries& series) {
    if (!(t >= 0.0)) throw DomainError("prony_g: time must be non-negative");
    double g = 1.0;
    for (const auto& term : series.terms) g -= term.g * -std::expm1(-t / term.tau);
    return g;
}

double wlf_shift(double temperature_c, const WlfParams& p, double margin_c) {
    const double singular = p.singular_temperature_c();
    if (!(temperature_c > singular + margin_c)) {
        std::ostringstream msg;
        msg << "wlf_shift: temperature " << temperature_c
            << " degC is at or below the WLF singularity " << singular << " degC (+" << margin_c
            << " degC guard)";
        throw DomainError(msg.str());
    }
    const double dt = temperature_c - p.reference_temperature_c;
    return std::pow(10.0, -p.c1 * dt / (p.c2 + dt));
}

double reduced_time(std::span<const TemperatureSegment> segments, const WlfParams& params,
                    double step_seconds, double margin_c) {
    if (!(step_seconds > 0.0)) throw ValidationError("reduced_time: step must be positive");
    const double guard = params.singular_temperature_c() + margin_c;
    double xi = 0.0;
    for (const auto& seg : segments) {
        if (!(seg.duration_s >= 0.0)) throw ValidationError("reduced_time: negative segment duration");
        if (seg.duration_s == 0.0) continue;
        const auto n = static_cast<long>(std::ceil(seg.duration_s / step_seconds));
        const double dt = seg.duration_s / static_cast<double>(n);
        const double slope = (seg.end_c - seg.start_c) / seg.duration_s;
        for (long k = 0; k < n; ++k) {
            const double t_mid = seg.start_c + slope * (static_cast<double>(k) + 0.5) * dt;
            if (t_mid <= guard) continue;  // frozen: 1/A treated as 0
            xi += dt / wlf_shift(t_mid, params, margin_c);
        }
    }
    return xi;
}

double reduced_time(const ThermalSchedule& schedule, const WlfParams& params, double step_seconds) {
    const auto segs = segments_of(schedule);
    return reduced_time(segs, params, step_seconds);
}

double residual_fraction(std::span<const TemperatureSegment> segments, const PronySeries& prony,
                         const WlfParams& wlf, double step_seconds) {
    return prony_g(reduced_time(segments, wlf, step_seconds), prony);
}

double residual_fraction(const ThermalSchedule& schedule, const PronySeries& prony,
                         const WlfParams& wlf, double step_seconds) {
    const auto segs = segments_of(schedule);
    return residual_fraction(segs, prony, wlf, step_seconds);
}

// ---------------------------------------------------------------------------
// catalog

namespace {

MaterialProperties gorilla_glass() {
    MaterialProperties m;
    m.name = "GG";
    m.density_g_cm3 = 2.5;
    m.youngs_modulus_gpa = 76.7;
    m.poisson_ratio = 0.275;
    m.cte_below_tg_per_c = 8.1e-6;
    m.cte_above_tg_per_c = 12e-6;
    m.tg_c = 570.0;  // Tg taken as the WLF reference temperature
    m.prony = {{{0.999, 0.0, 37.143}}, 570.0};
    m.wlf = {36.84842, 1204.485, 570.0};
    return m;
}

MaterialProperties bk7() {
    MaterialProperties m;
    m.name = "BK7";
    m.density_g_cm3 = 2.5;
    m.youngs_modulus_gpa = 82.0;
    m.poisson_ratio = 0.206;
    m.cte_below_tg_per_c = 8.3e-6;
    m.cte_above_tg_per_c = 18.6e-6;
    m.tg_c = 685.0;
    m.prony = {{{0.999, 0.0, 0.00012}}, 685.0};
    m.wlf = {5.01, 179.4, 685.0};
    return m;
}

}  // namespace

MaterialCatalog MaterialCatalog::builtin() {
    MaterialCatalog cat;
    cat.glasses_ = {gorilla_glass(), bk7()};
    cat.molds_ = {{"graphite", 4.5e-6}, {"glassy_carbon", 2.5e-6}};
    return cat;
}

MaterialCatalog MaterialCatalog::from_json(const nlohmann::json& doc) {
    MaterialCatalog cat = builtin();
    try {
        if (doc.contains("glasses"))
            for (const auto& g : doc.at("glasses")) cat.add(g.get<MaterialProperties>());
        if (doc.contains("molds"))
            for (const auto& m : doc.at("molds")) cat.add(m.get<MoldMaterial>());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("material catalog: ") + e.what());
    }
    return cat;
}

MaterialCatalog MaterialCatalog::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open material file " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("material file " + path.string() + ": " + e.what());
    }
    return from_json(doc);
}

void MaterialCatalog::add(MaterialProperties glass) {
    glass.validate();
    auto it = std::find_if(glasses_.begin(), glasses_.end(),
                           [&](const auto& g) { return g.name == glass.name; });
    if (it != glasses_.end())
        *it = std::move(glass);
    else
        glasses_.push_back(std::move(glass));
}

void MaterialCatalog::add(MoldMaterial mold) {
    mold.validate();
    auto it = std::find_if(molds_.begin(), molds_.end(),
                           [&](const auto& m) { return m.name == mold.name; });
    if (it != molds_.end())
        *it = std::move(mold);
    else
        molds_.push_back(std::move(mold));
}

std::vector<std::string> MaterialCatalog::names() const {
    std::vector<std::string> out;
    for (const auto& g : glasses_) out.push_back(g.name);
    for (const auto& m : molds_) out.push_back(m.name);
    return out;
}

CatalogEntry MaterialCatalog::lookup(std::string_view name) const {
    for (const auto& g : glasses_)
        if (g.name == name) return g;
    for (const auto& m : molds_)
        if (m.name == name) return m;
    std::string msg = "unknown material '" + std::string(name) + "'; available:";
    for (const auto& n : names()) msg += " " + n;
    throw LookupError(msg);
}

MaterialProperties MaterialCatalog::glass(std::string_view name) const {
    auto entry = lookup(name);
    if (auto* g = std::get_if<MaterialProperties>(&entry)) return *g;
    throw LookupError("'" + std::string(name) + "' is a mold material, not a glass");
}

MoldMaterial MaterialCatalog::mold(std::string_view name) const {
    auto entry = lookup(name);
    if (auto* m = std::get_if<MoldMaterial>(&entry)) return *m;
    throw LookupError("'" + std::string(name) + "' is a glass, not a mold material");
}

CatalogEntry material_catalog(std::string_view name) { return MaterialCatalog::builtin().lookup(name); }

// ---------------------------------------------------------------------------
// json

void to_json(nlohmann::json& j, const PronySeries& p) {
    j = nlohmann::json::object();
    auto& terms = j["terms"] = nlohmann::json::array();
    for (const auto& t : p.terms) terms.push_back({{"g", t.g}, {"k", t.k}, {"tau", t.tau}});
    j["reference_temperature_c"] = p.reference_temperature_c;
}

void from_json(const nlohmann::json& j, PronySeries& p) {
    p.terms.clear();
    for (const auto& t : j.at("terms"))
        p.terms.push_back({t.at("g").get<double>(), t.value("k", 0.0), t.at("tau").get<double>()});
    p.reference_temperature_c = j.at("reference_temperature_c").get<double>();
}

void to_json(nlohmann::json& j, const WlfParams& w) {
    j = {{"c1", w.c1}, {"c2", w.c2}, {"reference_temperature_c", w.reference_temperature_c}};
}

void from_json(const nlohmann::json& j, WlfParams& w) {
    w.c1 = j.at("c1").get<double>();
    w.c2 = j.at("c2").get<double>();
    w.reference_temperature_c = j.at("reference_temperature_c").get<double>();
}

void to_json(nlohmann::json& j, const MaterialProperties& m) {
    j = {{"name", m.name},
         {"density_g_cm3", m.density_g_cm3},
         {"youngs_modulus_gpa", m.youngs_modulus_gpa},
         {"poisson_ratio", m.poisson_ratio},
         {"cte_below_tg_per_c", m.cte_below_tg_per_c},
         {"cte_above_tg_per_c", m.cte_above_tg_per_c},
         {"tg_c", m.tg_c},
         {"prony", m.prony},
         {"wlf", m.wlf}};
}

void from_json(const nlohmann::json& j, MaterialProperties& m) {
    m.name = j.at("name").get<std::string>();
    m.density_g_cm3 = j.value("density_g_cm3", 0.0);
    m.youngs_modulus_gpa = j.value("youngs_modulus_gpa", 0.0);
    m.poisson_ratio = j.value("poisson_ratio", 0.0);
    m.cte_below_tg_per_c = j.at("cte_below_tg_per_c").get<double>();
    m.cte_above_tg_per_c = j.at("cte_above_tg_per_c").get<double>();
    m.prony = j.at("prony").get<PronySeries>();
    m.wlf = j.at("wlf").get<WlfParams>();
    m.tg_c = j.value("tg_c", m.wlf.reference_temperature_c);
}

void to_json(nlohmann::json& j, const MoldMaterial& m) {
    j = {{"name", m.name}, {"cte_per_c", m.cte_per_c}};
}

void from_json(const nlohmann::json& j, MoldMaterial& m) {
    m.name = j.at("name").get<std::string>();
    m.cte_per_c = j.at("cte_per_c").get<double>();
}

void to_json(nlohmann::json& j, const ThermalSchedule& s) {
    j = {{"t_mold_c", s.molding_temperature_c},     {"hold_s", s.hold_seconds},
         {"anneal_rate_c_per_s", s.annealing_rate_c_per_s}, {"anneal_end_c", s.anneal_end_c},
         {"cool_rate_c_per_s", s.cooling_rate_c_per_s},    {"room_c", s.room_temperature_c}};
}

void from_json(const nlohmann::json& j, ThermalSchedule& s) {
    ThermalSchedule d;
    s.molding_temperature_c = j.value("t_mold_c", d.molding_temperature_c);
    s.hold_seconds = j.value("hold_s", d.hold_seconds);
    s.annealing_rate_c_per_s = j.value("anneal_rate_c_per_s", d.annealing_rate_c_per_s);
    s.anneal_end_c = j.value("anneal_end_c", d.anneal_end_c);
    s.cooling_rate_c_per_s = j.value("cool_rate_c_per_s", d.cooling_rate_c_per_s);
    s.room_temperature_c = j.value("room_c", d.room_temperature_c);
}

}  // namespace glassform
