#include "glassform/forming.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "glassform/error.hpp"
#include "glassform/io.hpp"
#include "glassform/numerics.hpp"

namespace glassform {

// ---------------------------------------------------------------------------
// value types

void GlassTarget::validate() const {
    if (!(thickness_mm > 0.0)) throw ValidationError("target: thickness must be positive");
    if (!(r_max_mm > 0.0)) throw ValidationError("target: r_max must be positive");
    if (const auto* s = std::get_if<AsphericSurface>(&surface)) {
        s->validate();
        if (std::abs(s->r_max_mm - r_max_mm) > 1e-12 * r_max_mm)
            throw ValidationError("target: surface r_max differs from target r_max");
    } else {
        const auto& p = std::get<Profile>(surface);
        p.validate();
        if (p.x_max() < r_max_mm * (1.0 - 1e-12))
            throw ValidationError("target: profile ends before r_max");
    }
    glass.validate();
}

Profile GlassTarget::inner(std::span<const double> grid) const {
    if (const auto* s = std::get_if<AsphericSurface>(&surface)) return sample(*s, grid);
    return resample(std::get<Profile>(surface), grid);
}

Profile GlassTarget::outer(std::span<const double> grid) const {
    if (const auto* s = std::get_if<AsphericSurface>(&surface))
        return normal_offset(*s, grid, thickness_mm, OffsetSide::NegativeY);
    // offset on the profile's own samples, then move onto the grid
    const auto off = normal_offset(std::get<Profile>(surface), thickness_mm, OffsetSide::NegativeY);
    return resample(off, grid);
}

LocalGeometry GlassTarget::geometry(std::span<const double> grid) const {
    if (const auto* s = std::get_if<AsphericSurface>(&surface)) return local_geometry(*s, grid);
    return local_geometry(inner(grid));
}

GlassTarget GlassTarget::scaled(double lambda) const {
    GlassTarget t = *this;
    t.thickness_mm *= lambda;
    t.r_max_mm *= lambda;
    if (const auto* s = std::get_if<AsphericSurface>(&surface)) {
        t.surface = s->scaled(lambda);
    } else {
        Profile p = std::get<Profile>(surface);
        for (auto& x : p.xs) x *= lambda;
        for (auto& y : p.ys) y *= lambda;
        t.surface = std::move(p);
    }
    return t;
}

void FormingConfig::validate() const {
    if (!(springback_beta >= 0.0 && springback_gamma >= 0.0 && thinning_eta >= 0.0))
        throw ValidationError("forming config: coefficients must be non-negative");
    if (grid_points < kMinProfilePoints)
        throw ValidationError("forming config: grid_points must be >= " + std::to_string(kMinProfilePoints));
    if (!(reduced_time_step_s > 0.0)) throw ValidationError("forming config: reduced_time_step_s must be positive");
}

FormingConfig FormingConfig::identity() {
    FormingConfig c;
    c.springback_beta = 0.0;
    c.springback_gamma = 0.0;
    c.thinning_eta = 0.0;
    return c;
}

void MoldPair::validate() const {
    upper.validate();
    lower.validate();
    if (upper.xs != lower.xs) throw ValidationError("mold pair: upper and lower grids differ");
    for (std::size_t i = 0; i < upper.size(); ++i)
        if (!(upper.ys[i] > lower.ys[i])) throw ValidationError("mold pair: cavity gap must be positive");
}

void FormingCase::validate() const {
    target.validate();
    mold.validate();
    schedule.validate();
    config.validate();
}

std::vector<double> FormingCase::target_grid() const { return uniform_grid(target.r_max_mm, config.grid_points); }

FormingCase FormingCase::scaled(double lambda) const {
    FormingCase c = *this;
    c.target = target.scaled(lambda);
    return c;
}

// ---------------------------------------------------------------------------
// thermal scaling

double effective_glass_cte(const MaterialProperties& glass, const ThermalSchedule& s) {
    const double span = s.delta_t();
    if (!(span > 0.0)) throw DomainError("molding temperature must exceed room temperature");
    const double above = std::max(0.0, s.molding_temperature_c - std::max(glass.tg_c, s.room_temperature_c));
    const double below = span - above;
    return (glass.cte_above_tg_per_c * above + glass.cte_below_tg_per_c * below) / span;
}

double mold_scale_factor(const MaterialProperties& glass, const MoldMaterial& mold, const ThermalSchedule& s) {
    const double dt = s.delta_t();
    if (!(dt > 0.0)) throw DomainError("mold_scale_factor: molding temperature must exceed room temperature");
    return (1.0 + effective_glass_cte(glass, s) * dt) / (1.0 + mold.cte_per_c * dt);
}

// ---------------------------------------------------------------------------
// initial molds and blank

MoldPair design_initial_molds(const GlassTarget& target, const MoldMaterial& mold,
                              const ThermalSchedule& schedule, const FormingConfig& config) {
    target.validate();
    config.validate();
    const double m = mold_scale_factor(target.glass, mold, schedule);
    const auto grid = uniform_grid(target.r_max_mm, config.grid_points);
    const Profile inner = target.inner(grid);
    const Profile outer = target.outer(grid);
    MoldPair pair;
    pair.scale_m = m;
    pair.mold_material = mold;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double xm = m * grid[i];
        pair.upper.xs.push_back(xm);
        pair.lower.xs.push_back(xm);
        pair.upper.ys.push_back(m * inner.ys[i]);
        pair.lower.ys.push_back(m * outer.ys[i]);
    }
    return pair;
}

MoldPair design_initial_molds(const FormingCase& c) {
    return design_initial_molds(c.target, c.mold, c.schedule, c.config);
}

BlankThickness blank_thickness(const GlassTarget& target) {
    target.validate();
    const double t = target.thickness_mm;
    const double r = target.r_max_mm;
    // slope of the midsurface (inner offset by t/2 toward -y) at abscissa x
    double integral = 0.0;
    if (const auto* s = std::get_if<AsphericSurface>(&target.surface)) {
        const double half = 0.5 * t;
        auto mid_slope = [&](double x) {
            double u = x;  // solve u + half * sin(theta(u)) = x
            for (int it = 0; it < 60; ++it) {
                const auto p = s->eval_unchecked(u);
                const double w = 1.0 + p.dy * p.dy;
                const double f = u + half * p.dy / std::sqrt(w) - x;
                const double df = 1.0 + half * p.d2y / (w * std::sqrt(w));
                const double step = f / df;
                u = std::clamp(u - step, 0.0, s->r_max_mm);
                if (std::abs(step) < 1e-15 * std::max(1.0, x)) break;
            }
            return s->eval_unchecked(u).dy;
        };
        integral = integrate(
            [&](double x) {
                const double d = mid_slope(x);
                return x * std::sqrt(1.0 + d * d);
            },
            0.0, r, 400);
    } else {
        const auto mid = normal_offset(std::get<Profile>(target.surface), 0.5 * t, OffsetSide::NegativeY);
        const MonotoneCubic curve(mid.xs, mid.ys);
        integral = integrate(
            [&](double x) {
                const double d = curve.derivative(x);
                return x * std::sqrt(1.0 + d * d);
            },
            0.0, r, 400);
    }
    BlankThickness b;
    b.thickness_mm = 2.0 * t * integral / (r * r);
    b.within_limit = b.thickness_mm <= 1.1 * t;
    return b;
}

// ---------------------------------------------------------------------------
// forward model

namespace {

// Distance from (px, py) along the unit direction (dx, dy) to the curve.
double chord_to_curve(const MonotoneCubic& curve, double px, double py, double dx, double dy) {
    double s = (curve(px) - py) * dy;
    for (int it = 0; it < 100; ++it) {
        const double qx = px + s * dx;
        const double f = (py + s * dy) - curve(qx);
        const double df = dy - curve.derivative(qx) * dx;
        if (df == 0.0) break;
        const double step = f / df;
        s -= step;
        if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(s))) return s;
    }
    std::ostringstream msg;
    msg << "normal thickness: chord from x = " << px << " does not reach the opposite surface";
    throw GeometryError(msg.str());
}

}  // namespace

std::vector<double> normal_thickness(const Profile& inner, const Profile& outer) {
    if (inner.xs != outer.xs) throw RangeError("normal_thickness: surfaces are not on a common grid");
    const auto d = finite_differences(outer.xs, outer.ys);
    const MonotoneCubic upper(inner.xs, inner.ys);
    std::vector<double> t(outer.size());
    for (std::size_t i = 0; i < outer.size(); ++i) {
        const double th = std::atan(d.first[i]);
        t[i] = chord_to_curve(upper, outer.xs[i], outer.ys[i], -std::sin(th), std::cos(th));
    }
    return t;
}

FormedGlass simulate_forming(const MoldPair& molds, const GlassTarget& target, const ThermalSchedule& schedule,
                             const FormingConfig& config) {
    molds.validate();
    target.validate();
    config.validate();
    const auto& glass = target.glass;
    const double dt = schedule.delta_t();
    if (!(dt > 0.0)) throw DomainError("simulate_forming: molding temperature must exceed room temperature");

    // (1) conform: the glass fills the cavity of the molds expanded to the molding temperature
    const double expand = 1.0 + molds.mold_material.cte_per_c * dt;
    const std::size_t n = molds.upper.size();
    std::vector<double> hx(n), mid(n), vgap(n);
    for (std::size_t i = 0; i < n; ++i) {
        hx[i] = expand * molds.upper.xs[i];
        mid[i] = 0.5 * expand * (molds.upper.ys[i] + molds.lower.ys[i]);
        vgap[i] = expand * (molds.upper.ys[i] - molds.lower.ys[i]);
    }
    const auto dm = finite_differences(hx, mid);

    // (3) unrelaxed stress fraction after the thermal history
    const double r = residual_fraction(schedule, glass.prony, glass.wlf, config.reduced_time_step_s);
    const double shrink = 1.0 / (1.0 + effective_glass_cte(glass, schedule) * dt);

    std::vector<double> angle(n), kappa(n);
    for (std::size_t i = 0; i < n; ++i) {
        double gauss = 0.0;
        differential_geometry(hx[i], dm.first[i], dm.second[i], angle[i], kappa[i], gauss);
    }

    Profile inner, outer;
    inner.xs.resize(n);
    inner.ys.resize(n);
    outer.ys.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s2 = std::sin(angle[i]) * std::sin(angle[i]);
        // (2) thinning, applied symmetrically about the midsurface
        const double thin = 1.0 - config.thinning_eta * s2;
        const double v_formed = vgap[i] * thin;
        const double t_formed = v_formed * std::cos(angle[i]);
        // (4) springback of the midsurface
        const double y_sb = (1.0 - config.springback_beta * r) * mid[i] -
                            config.springback_gamma * r * t_formed * t_formed * (kappa[i] - kappa[0]);
        // (5) shrink to room temperature, (6) rebuild both surfaces
        inner.xs[i] = shrink * hx[i];
        inner.ys[i] = shrink * (y_sb + 0.5 * v_formed);
        outer.ys[i] = shrink * (y_sb - 0.5 * v_formed);
    }
    outer.xs = inner.xs;

    const auto grid = uniform_grid(target.r_max_mm, config.grid_points);
    FormedGlass out;
    out.inner = resample(inner, grid, Extrapolation::Tangent);
    out.outer = resample(outer, grid, Extrapolation::Tangent);
    out.thickness_mm_at = normal_thickness(out.inner, out.outer);
    return out;
}

FormedGlass simulate_forming(const MoldPair& molds, const FormingCase& c) {
    return simulate_forming(molds, c.target, c.schedule, c.config);
}

DeviationReport compute_deviations(const FormedGlass& formed, const GlassTarget& target) {
    const auto& xs = formed.inner.xs;
    if (formed.outer.xs != xs || formed.thickness_mm_at.size() != xs.size())
        throw RangeError("compute_deviations: formed surfaces are not on a common grid");
    if (std::abs(xs.back() - target.r_max_mm) > 1e-9 * target.r_max_mm || xs.front() != 0.0)
        throw RangeError("compute_deviations: formed glass does not span [0, r_max] of the target");
    const Profile inner = target.inner(xs);
    const Profile outer = target.outer(xs);
    DeviationReport rep;
    rep.xs = xs;
    const std::size_t n = xs.size();
    rep.inner_dev_um.resize(n);
    rep.outer_dev_um.resize(n);
    rep.thickness_dev_um.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        rep.inner_dev_um[i] = 1e3 * (inner.ys[i] - formed.inner.ys[i]);
        rep.outer_dev_um[i] = 1e3 * (outer.ys[i] - formed.outer.ys[i]);
        rep.thickness_dev_um[i] = 1e3 * (formed.thickness_mm_at[i] - target.thickness_mm);
    }
    rep.max_abs_inner_um = max_abs(rep.inner_dev_um);
    rep.max_abs_outer_um = max_abs(rep.outer_dev_um);
    rep.max_abs_thickness_um = max_abs(rep.thickness_dev_um);
    return rep;
}

// ---------------------------------------------------------------------------
// case files

void to_json(nlohmann::json& j, const FormingConfig& c) {
    j = {{"springback_beta", c.springback_beta},
         {"springback_gamma", c.springback_gamma},
         {"thinning_eta", c.thinning_eta},
         {"grid_points", c.grid_points},
         {"reduced_time_step_s", c.reduced_time_step_s}};
}

void merge_json(const nlohmann::json& j, FormingConfig& c) {
    c.springback_beta = j.value("springback_beta", c.springback_beta);
    c.springback_gamma = j.value("springback_gamma", c.springback_gamma);
    c.thinning_eta = j.value("thinning_eta", c.thinning_eta);
    c.grid_points = j.value("grid_points", c.grid_points);
    c.reduced_time_step_s = j.value("reduced_time_step_s", c.reduced_time_step_s);
}

FormingCase parse_case(const nlohmann::json& doc, const MaterialCatalog& catalog, const FormingConfig& defaults,
                       const std::filesystem::path& base_dir) {
    FormingCase c;
    c.config = defaults;
    try {
        c.name = doc.value("name", std::string("case"));
        if (doc.contains("surface")) {
            auto s = doc.at("surface").get<AsphericSurface>();
            c.target.r_max_mm = doc.value("r_max_mm", s.r_max_mm);
            s.r_max_mm = c.target.r_max_mm;
            c.target.surface = s;
        } else if (doc.contains("profile_csv")) {
            std::filesystem::path p = doc.at("profile_csv").get<std::string>();
            if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
            auto prof = read_profile_csv(p);
            c.target.r_max_mm = doc.value("r_max_mm", prof.x_max());
            c.target.surface = std::move(prof);
        } else {
            throw ValidationError("case: needs \"surface\" or \"profile_csv\"");
        }
        c.target.thickness_mm = doc.at("thickness_mm").get<double>();
        c.target.glass = catalog.glass(doc.value("glass", std::string("GG")));
        c.mold = catalog.mold(doc.value("mold", std::string("glassy_carbon")));
        if (doc.contains("schedule")) c.schedule = doc.at("schedule").get<ThermalSchedule>();
        if (doc.contains("forming")) merge_json(doc.at("forming"), c.config);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("case: ") + e.what());
    }
    c.validate();
    return c;
}

nlohmann::json case_to_json(const FormingCase& c) {
    nlohmann::json j;
    j["name"] = c.name;
    if (const auto* s = std::get_if<AsphericSurface>(&c.target.surface)) j["surface"] = *s;
    j["r_max_mm"] = c.target.r_max_mm;
    j["thickness_mm"] = c.target.thickness_mm;
    j["glass"] = c.target.glass.name;
    j["mold"] = c.mold.name;
    j["schedule"] = c.schedule;
    j["forming"] = c.config;
    return j;
}

void write_deviation_csv(const std::filesystem::path& path, const DeviationReport& r) {
    io::write_csv(path, {{"x_mm", "dev_inner_um", "dev_outer_um", "dev_thickness_um"},
                         {r.xs, r.inner_dev_um, r.outer_dev_um, r.thickness_dev_um}});
}

}  // namespace glassform
