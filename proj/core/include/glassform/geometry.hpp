#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace glassform {

/// Value and exact derivatives of a generatrix at one radial position.
struct SagPoint {
    double y = 0.0;
    double dy = 0.0;
    double d2y = 0.0;
};

/// Even asphere y = c x^2 / (1 + sqrt(1 - (K+1) c^2 x^2)) + sum_i a_i x^(2i), i >= 1.
/// aspheric_coeffs[0] multiplies x^2, [1] multiplies x^4, and so on.
struct AsphericSurface {
    double curvature_c = 0.0;
    double conic_k = 0.0;
    std::vector<double> aspheric_coeffs;
    double r_max_mm = 1.0;

    /// Throws ValidationError if r_max <= 0 or the radicand is not strictly
    /// positive on [0, r_max].
    void validate() const;

    double radicand(double x) const;
    /// Largest x with a real conic term (infinity when (K+1) c^2 <= 0).
    double limiting_x() const;
    /// Closed-form evaluation with no range check (radicand must be positive).
    SagPoint eval_unchecked(double x) const;
    /// Exact inside [0, r_max]; continued along the end tangent beyond r_max.
    SagPoint eval_extended(double x) const;

    /// Same shape with every length multiplied by lambda.
    AsphericSurface scaled(double lambda) const;
};

/// Checked evaluation: 0 <= x <= r_max, radicand >= 0 (DomainError otherwise).
SagPoint aspheric_eval(const AsphericSurface& surface, double x);

/// Sampled generatrix. xs strictly increasing from 0, at least 16 samples.
struct Profile {
    std::vector<double> xs;
    std::vector<double> ys;

    void validate() const;
    std::size_t size() const { return xs.size(); }
    double x_max() const { return xs.back(); }
};

inline constexpr std::size_t kMinProfilePoints = 16;
inline constexpr std::size_t kDefaultGridPoints = 201;

/// n uniform samples on [0, x_max], last sample exactly x_max.
std::vector<double> uniform_grid(double x_max, std::size_t n = kDefaultGridPoints);

Profile sample(const AsphericSurface& surface, std::span<const double> grid);

struct LocalGeometry {
    std::vector<double> inclination_rad;
    std::vector<double> plane_curvature_per_mm;
    std::vector<double> gaussian_curvature_per_mm2;
};

/// Inclination, plane curvature and Gaussian curvature of the revolved
/// surface from slope/second derivative at radius x. Handles x = 0 by its limit.
void differential_geometry(double x, double dy, double d2y, double& angle, double& kappa,
                           double& gaussian);

LocalGeometry local_geometry(const Profile& profile);
LocalGeometry local_geometry(const AsphericSurface& surface, std::span<const double> xs);

enum class OffsetSide { PositiveY, NegativeY };

/// Moves every point by +/- distance along the unit normal (-sin t, cos t) and
/// re-samples the result on the input grid. Grid points past the end of the
/// offset curve continue along its end tangent. Throws GeometryError when the
/// offset reaches a centre of curvature.
Profile normal_offset(const Profile& profile, double distance, OffsetSide side);
/// Same with exact normals: each grid abscissa is solved for on the surface.
Profile normal_offset(const AsphericSurface& surface, std::span<const double> grid,
                      double distance, OffsetSide side);

enum class Extrapolation { Forbid, Tangent };

/// Monotone-cubic resampling. Forbid throws RangeError for grid points outside
/// the profile (up to a 1e-9 relative rounding slack).
Profile resample(const Profile& profile, std::span<const double> grid,
                 Extrapolation mode = Extrapolation::Forbid);

struct DimensionlessPoint {
    double X = 0.0;
    double thickness_bar = 0.0;
    double gaussian_bar = 0.0;
    double fec_bar = 0.0;
};

/// X = x/R, T = t/R, K = K R^2, FEC = FEC/R. Throws DomainError for r_max <= 0.
DimensionlessPoint nondimensionalize(double x, double thickness, double gaussian_k, double fec,
                                     double r_max);

struct DimensionalPoint {
    double x = 0.0;
    double thickness = 0.0;
    double gaussian_k = 0.0;
    double fec = 0.0;
};

DimensionalPoint dimensionalize(const DimensionlessPoint& p, double r_max);

void to_json(nlohmann::json& j, const AsphericSurface& s);
void from_json(const nlohmann::json& j, AsphericSurface& s);

void write_profile_csv(const std::filesystem::path& path, const Profile& profile);
Profile read_profile_csv(const std::filesystem::path& path);

}  // namespace glassform
