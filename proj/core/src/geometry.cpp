#include "glassform/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "glassform/error.hpp"
#include "glassform/io.hpp"
#include "glassform/numerics.hpp"

namespace glassform {

// ---------------------------------------------------------------------------
// aspheric surface

double AsphericSurface::radicand(double x) const {
    return 1.0 - (conic_k + 1.0) * curvature_c * curvature_c * x * x;
}

double AsphericSurface::limiting_x() const {
    const double q = (conic_k + 1.0) * curvature_c * curvature_c;
    return q > 0.0 ? 1.0 / std::sqrt(q) : std::numeric_limits<double>::infinity();
}

void AsphericSurface::validate() const {
    if (!(r_max_mm > 0.0)) throw ValidationError("aspheric surface: r_max_mm must be positive");
    if (!(radicand(r_max_mm) > 0.0)) {
        std::ostringstream msg;
        msg << "aspheric surface: conic radicand vanishes at x = " << limiting_x()
            << " mm, inside [0, r_max = " << r_max_mm << "]";
        throw ValidationError(msg.str());
    }
}

SagPoint AsphericSurface::eval_unchecked(double x) const {
    const double s = std::sqrt(radicand(x));
    const double c = curvature_c;
    SagPoint p;
    p.y = c * x * x / (1.0 + s);
    p.dy = c * x / s;
    p.d2y = c / (s * s * s);
    // even polynomial, a_i on x^(2i)
    const double x2 = x * x;
    double pow_lo = 1.0;  // x^(2i-2)
    for (std::size_t i = 0; i < aspheric_coeffs.size(); ++i) {
        const double a = aspheric_coeffs[i];
        const double n = 2.0 * static_cast<double>(i + 1);
        p.d2y += a * n * (n - 1.0) * pow_lo;
        p.dy += a * n * pow_lo * x;
        p.y += a * pow_lo * x2;
        pow_lo *= x2;
    }
    return p;
}

SagPoint AsphericSurface::eval_extended(double x) const {
    if (x <= r_max_mm) return eval_unchecked(x);
    const SagPoint end = eval_unchecked(r_max_mm);
    return {end.y + end.dy * (x - r_max_mm), end.dy, 0.0};
}

AsphericSurface AsphericSurface::scaled(double lambda) const {
    AsphericSurface s = *this;
    s.curvature_c = curvature_c / lambda;
    s.r_max_mm = r_max_mm * lambda;
    // a_i x^(2i) -> lambda a_i (x/lambda)^(2i)
    double factor = 1.0 / lambda;  // lambda^(1-2i) for i = 1
    for (auto& a : s.aspheric_coeffs) {
        a *= factor;
        factor /= lambda * lambda;
    }
    return s;
}

SagPoint aspheric_eval(const AsphericSurface& surface, double x) {
    const double slack = 1e-12 * std::max(1.0, surface.r_max_mm);
    if (x < -slack || x > surface.r_max_mm + slack) {
        std::ostringstream msg;
        msg << "aspheric_eval: x = " << x << " outside [0, " << surface.r_max_mm << "]";
        throw DomainError(msg.str());
    }
    if (surface.radicand(x) < 0.0) {
        std::ostringstream msg;
        msg << "aspheric_eval: negative radicand at x = " << x << "; conic term limited to x <= "
            << surface.limiting_x();
        throw DomainError(msg.str());
    }
    return surface.eval_unchecked(std::clamp(x, 0.0, surface.r_max_mm));
}

// ---------------------------------------------------------------------------
// profiles

void Profile::validate() const {
    if (xs.size() != ys.size()) throw ValidationError("profile: xs and ys differ in length");
    if (xs.size() < kMinProfilePoints)
        throw ValidationError("profile: needs at least " + std::to_string(kMinProfilePoints) + " points");
    if (xs.front() != 0.0) throw ValidationError("profile: first abscissa must be 0");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1])) throw ValidationError("profile: abscissae must be strictly increasing");
}

std::vector<double> uniform_grid(double x_max, std::size_t n) {
    if (n < 2) throw ValidationError("grid needs at least 2 points");
    std::vector<double> g(n);
    const double denom = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) g[i] = x_max * (static_cast<double>(i) / denom);
    g.back() = x_max;
    return g;
}

Profile sample(const AsphericSurface& surface, std::span<const double> grid) {
    Profile p;
    p.xs.assign(grid.begin(), grid.end());
    p.ys.reserve(grid.size());
    for (double x : grid) p.ys.push_back(aspheric_eval(surface, x).y);
    return p;
}

void differential_geometry(double x, double dy, double d2y, double& angle, double& kappa,
                           double& gaussian) {
    const double w = 1.0 + dy * dy;
    angle = std::atan(dy);
    kappa = d2y / (w * std::sqrt(w));
    gaussian = x == 0.0 ? d2y * d2y / (w * w) : dy * d2y / (x * w * w);
}

namespace {

LocalGeometry from_derivatives(std::span<const double> xs, std::span<const double> dy,
                               std::span<const double> d2y) {
    LocalGeometry g;
    const std::size_t n = xs.size();
    g.inclination_rad.resize(n);
    g.plane_curvature_per_mm.resize(n);
    g.gaussian_curvature_per_mm2.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        differential_geometry(xs[i], dy[i], d2y[i], g.inclination_rad[i], g.plane_curvature_per_mm[i],
                              g.gaussian_curvature_per_mm2[i]);
    return g;
}

}  // namespace

LocalGeometry local_geometry(const Profile& profile) {
    profile.validate();
    const auto d = finite_differences(profile.xs, profile.ys);
    return from_derivatives(profile.xs, d.first, d.second);
}

LocalGeometry local_geometry(const AsphericSurface& surface, std::span<const double> xs) {
    std::vector<double> dy, d2y;
    dy.reserve(xs.size());
    d2y.reserve(xs.size());
    for (double x : xs) {
        const auto p = aspheric_eval(surface, x);
        dy.push_back(p.dy);
        d2y.push_back(p.d2y);
    }
    return from_derivatives(xs, dy, d2y);
}

// ---------------------------------------------------------------------------
// offsets and resampling

namespace {

double side_sign(OffsetSide side) { return side == OffsetSide::PositiveY ? 1.0 : -1.0; }

void check_curvature_reach(double signed_distance, double kappa, double x) {
    if (signed_distance * kappa >= 1.0) {
        std::ostringstream msg;
        msg << "normal_offset: offset " << std::abs(signed_distance)
            << " mm reaches the centre of curvature (radius " << 1.0 / std::abs(kappa)
            << " mm) near x = " << x;
        throw GeometryError(msg.str());
    }
}

}  // namespace

Profile normal_offset(const Profile& profile, double distance, OffsetSide side) {
    profile.validate();
    const double sd = side_sign(side) * distance;
    if (sd == 0.0) return profile;
    const auto d = finite_differences(profile.xs, profile.ys);
    const std::size_t n = profile.size();
    std::vector<double> ox(n), oy(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = 1.0 + d.first[i] * d.first[i];
        check_curvature_reach(sd, d.second[i] / (w * std::sqrt(w)), profile.xs[i]);
        const double theta = std::atan(d.first[i]);
        ox[i] = profile.xs[i] - sd * std::sin(theta);
        oy[i] = profile.ys[i] + sd * std::cos(theta);
        if (i > 0 && !(ox[i] > ox[i - 1]))
            throw GeometryError("normal_offset: offset curve folds back (self-intersection)");
    }
    const MonotoneCubic curve(ox, oy);
    Profile out;
    out.xs = profile.xs;
    out.ys.reserve(n);
    for (double x : out.xs) out.ys.push_back(curve(x));
    return out;
}

Profile normal_offset(const AsphericSurface& surface, std::span<const double> grid, double distance,
                      OffsetSide side) {
    surface.validate();
    const double sd = side_sign(side) * distance;
    Profile out;
    out.xs.assign(grid.begin(), grid.end());
    out.ys.reserve(grid.size());
    for (double x : grid) {
        if (x <= surface.r_max_mm) {
            const auto p = surface.eval_unchecked(x);
            const double w = 1.0 + p.dy * p.dy;
            check_curvature_reach(sd, p.d2y / (w * std::sqrt(w)), x);
        }
    }
    if (sd == 0.0) {
        for (double x : grid) out.ys.push_back(surface.eval_extended(x).y);
        return out;
    }
    for (double x : grid) {
        // solve s - sd * sin(theta(s)) = x
        double s = x;
        for (int it = 0; it < 60; ++it) {
            const auto p = surface.eval_extended(s);
            const double w = 1.0 + p.dy * p.dy;
            const double sin_t = p.dy / std::sqrt(w);
            const double f = s - sd * sin_t - x;
            const double df = 1.0 - sd * p.d2y / (w * std::sqrt(w));
            if (!(df > 0.0)) throw GeometryError("normal_offset: offset curve folds back");
            const double step = f / df;
            s -= step;
            if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(s))) break;
        }
        const auto p = surface.eval_extended(s);
        const double cos_t = 1.0 / std::sqrt(1.0 + p.dy * p.dy);
        out.ys.push_back(p.y + sd * cos_t);
    }
    return out;
}

Profile resample(const Profile& profile, std::span<const double> grid, Extrapolation mode) {
    const MonotoneCubic curve(profile.xs, profile.ys);
    const double slack = 1e-9 * std::max(1.0, std::abs(profile.xs.back()));
    Profile out;
    out.xs.assign(grid.begin(), grid.end());
    out.ys.reserve(grid.size());
    for (double x : grid) {
        if (mode == Extrapolation::Forbid) {
            if (x < profile.xs.front() - slack || x > profile.xs.back() + slack) {
                std::ostringstream msg;
                msg << "resample: x = " << x << " outside profile range [" << profile.xs.front() << ", "
                    << profile.xs.back() << "]";
                throw RangeError(msg.str());
            }
            x = std::clamp(x, profile.xs.front(), profile.xs.back());
        }
        out.ys.push_back(curve(x));
    }
    return out;
}

// ---------------------------------------------------------------------------
// dimensionless features

DimensionlessPoint nondimensionalize(double x, double thickness, double gaussian_k, double fec,
                                     double r_max) {
    if (!(r_max > 0.0)) throw DomainError("nondimensionalize: r_max must be positive");
    return {x / r_max, thickness / r_max, gaussian_k * r_max * r_max, fec / r_max};
}

DimensionalPoint dimensionalize(const DimensionlessPoint& p, double r_max) {
    if (!(r_max > 0.0)) throw DomainError("dimensionalize: r_max must be positive");
    return {p.X * r_max, p.thickness_bar * r_max, p.gaussian_bar / (r_max * r_max), p.fec_bar * r_max};
}

// ---------------------------------------------------------------------------
// serialization

void to_json(nlohmann::json& j, const AsphericSurface& s) {
    j = {{"c", s.curvature_c}, {"k", s.conic_k}, {"a", s.aspheric_coeffs}, {"r_max_mm", s.r_max_mm}};
}

void from_json(const nlohmann::json& j, AsphericSurface& s) {
    s.curvature_c = j.at("c").get<double>();
    s.conic_k = j.value("k", 0.0);
    s.aspheric_coeffs = j.value("a", std::vector<double>{});
    s.r_max_mm = j.at("r_max_mm").get<double>();
}

void write_profile_csv(const std::filesystem::path& path, const Profile& profile) {
    io::write_csv(path, {{"x_mm", "y_mm"}, {profile.xs, profile.ys}});
}

Profile read_profile_csv(const std::filesystem::path& path) {
    const auto t = io::read_csv(path, {"x_mm", "y_mm"});
    Profile p{t.columns[0], t.columns[1]};
    p.validate();
    return p;
}

}  // namespace glassform
