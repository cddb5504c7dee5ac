#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "glassform/error.hpp"
#include "glassform/geometry.hpp"

using namespace glassform;

namespace {

AsphericSurface cover() { return {0.04, -2.0, {0.0, 1.1e-5, 3.9e-7, 7.3e-10}, 15.0}; }
AsphericSurface paraboloid() { return {16.0 / 225.0, -1.0, {}, 15.0}; }
AsphericSurface sphere(double r, double r_max) { return {1.0 / r, 0.0, {}, r_max}; }

}  // namespace

TEST(Asphere, FrozenSagValues) {
    EXPECT_NEAR(aspheric_eval(cover(), 10.0).y, 2.49882403567252016, 1e-13);
    EXPECT_NEAR(aspheric_eval(cover(), 15.0).y, 11.0248883804765024, 1e-12);
    EXPECT_EQ(aspheric_eval(cover(), 0.0).y, 0.0);
}

TEST(Asphere, ParaboloidGeometryAtSevenAndAHalf) {
    const std::vector<double> x{7.5};
    const auto g = local_geometry(paraboloid(), x);
    EXPECT_NEAR(g.inclination_rad[0], 0.489957326253728308, 1e-15);
    EXPECT_NEAR(g.plane_curvature_per_mm[0], 0.0488499898229187869, 1e-15);
}

TEST(Asphere, EllipseMatchesItsClosedForm) {
    // y = 12 - sqrt(144 - 9/25 x^2)
    const AsphericSurface s{0.03, 16.0 / 9.0, {}, 15.0};
    for (double x = 0.0; x <= 15.0; x += 0.75)
        EXPECT_NEAR(aspheric_eval(s, x).y, 12.0 - std::sqrt(144.0 - 0.36 * x * x), 1e-12);
}

TEST(Asphere, DerivativesMatchDifferences) {
    const auto s = cover();
    for (double x = 0.5; x < 14.5; x += 0.7) {
        const double h = 1e-5;
        const auto p = s.eval_unchecked(x);
        const double d1 = (s.eval_unchecked(x + h).y - s.eval_unchecked(x - h).y) / (2 * h);
        const double d2 = (s.eval_unchecked(x + h).dy - s.eval_unchecked(x - h).dy) / (2 * h);
        EXPECT_NEAR(p.dy, d1, 1e-7 * std::max(1.0, std::abs(d1)));
        EXPECT_NEAR(p.d2y, d2, 1e-6 * std::max(1.0, std::abs(d2)));
    }
}

TEST(Asphere, RadicandFailureIsReported) {
    const AsphericSurface s{0.1, 0.0, {}, 12.0};  // sphere of radius 10
    EXPECT_THROW(s.validate(), ValidationError);
    EXPECT_THROW(aspheric_eval(s, 11.0), DomainError);
    EXPECT_NO_THROW(aspheric_eval(s, 9.0));
    EXPECT_THROW(aspheric_eval(cover(), 15.5), DomainError);
    EXPECT_THROW(aspheric_eval(cover(), -0.1), DomainError);
}

TEST(Asphere, ScalingIsExactUpToRounding) {
    const auto s = cover();
    for (double lambda : {0.5, 2.0, 4.533}) {
        const auto t = s.scaled(lambda);
        EXPECT_NEAR(t.r_max_mm, lambda * 15.0, 1e-12);
        for (double x = 0.0; x <= 15.0; x += 1.5) {
            const auto a = s.eval_unchecked(x);
            const auto b = t.eval_unchecked(lambda * x);
            EXPECT_NEAR(b.y, lambda * a.y, 1e-12 * lambda * (1 + std::abs(a.y)));
            EXPECT_NEAR(b.dy, a.dy, 1e-12 * (1 + std::abs(a.dy)));
        }
    }
}

TEST(LocalGeometry, GaussianCurvatureOfASphere) {
    // both principal curvatures are 1/R everywhere
    const auto s = sphere(20.0, 15.0);
    const auto grid = uniform_grid(15.0, 31);
    const auto g = local_geometry(s, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_NEAR(g.gaussian_curvature_per_mm2[i], 1.0 / 400.0, 1e-14);
        EXPECT_NEAR(g.plane_curvature_per_mm[i], 1.0 / 20.0, 1e-14);
    }
}

TEST(LocalGeometry, SampledProfileAgreesWithAnalytic) {
    const auto grid = uniform_grid(15.0, 401);
    const auto a = local_geometry(cover(), grid);
    const auto b = local_geometry(sample(cover(), grid));
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        EXPECT_NEAR(a.inclination_rad[i], b.inclination_rad[i], 1e-4);
        EXPECT_NEAR(a.plane_curvature_per_mm[i], b.plane_curvature_per_mm[i], 2e-3);
    }
}

TEST(NormalOffset, CircleOffsetsToConcentricCircle) {
    const double r = 20.0, d = 0.7;
    const auto s = sphere(r, 15.0);
    const auto grid = uniform_grid(15.0);
    const auto exact = normal_offset(s, grid, d, OffsetSide::NegativeY);
    const auto sampled = normal_offset(sample(s, grid), d, OffsetSide::NegativeY);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double want = r - std::sqrt((r + d) * (r + d) - grid[i] * grid[i]);
        EXPECT_NEAR(exact.ys[i], want, 1e-12);
        EXPECT_NEAR(sampled.ys[i], want, 5e-5);
    }
}

TEST(NormalOffset, ThroughTheCentreOfCurvatureIsAnError) {
    const auto s = sphere(5.0, 4.0);
    const auto grid = uniform_grid(4.0, 41);
    EXPECT_THROW(normal_offset(s, grid, 6.0, OffsetSide::PositiveY), GeometryError);
    EXPECT_THROW(normal_offset(sample(s, grid), 6.0, OffsetSide::PositiveY), GeometryError);
}

TEST(NormalOffset, ZeroDistanceIsIdentity) {
    const auto grid = uniform_grid(15.0);
    const auto p = sample(cover(), grid);
    EXPECT_EQ(normal_offset(p, 0.0, OffsetSide::NegativeY).ys, p.ys);
}

TEST(Resample, ForbidAndTangentModes) {
    const auto p = sample(cover(), uniform_grid(15.0));
    const auto longer = uniform_grid(16.0, 33);
    EXPECT_THROW(resample(p, longer, Extrapolation::Forbid), RangeError);
    const auto t = resample(p, longer, Extrapolation::Tangent);
    const auto end = cover().eval_unchecked(15.0);
    EXPECT_GT(t.ys.back(), end.y);
}

TEST(Profile, ValidationRules) {
    Profile p{uniform_grid(1.0, 10), std::vector<double>(10, 0.0)};
    EXPECT_THROW(p.validate(), ValidationError);
    Profile q{uniform_grid(1.0, 20), std::vector<double>(20, 0.0)};
    EXPECT_NO_THROW(q.validate());
    q.xs[0] = 0.01;
    EXPECT_THROW(q.validate(), ValidationError);
    Profile r{uniform_grid(1.0, 20), std::vector<double>(20, 0.0)};
    std::swap(r.xs[4], r.xs[5]);
    EXPECT_THROW(r.validate(), ValidationError);
}

TEST(Dimensionless, RoundTrip) {
    const auto d = nondimensionalize(7.5, 0.7, 0.0025, 0.012, 15.0);
    EXPECT_DOUBLE_EQ(d.X, 0.5);
    EXPECT_DOUBLE_EQ(d.gaussian_bar, 0.0025 * 225.0);
    const auto back = dimensionalize(d, 15.0);
    EXPECT_DOUBLE_EQ(back.x, 7.5);
    EXPECT_DOUBLE_EQ(back.thickness, 0.7);
    EXPECT_DOUBLE_EQ(back.gaussian_k, 0.0025);
    EXPECT_DOUBLE_EQ(back.fec, 0.012);
    EXPECT_THROW(nondimensionalize(1.0, 1.0, 1.0, 1.0, 0.0), DomainError);
}

TEST(Dimensionless, InvariantUnderScaling) {
    const auto s = cover();
    const auto t = s.scaled(68.0 / 15.0);
    const std::vector<double> xa{9.0};
    const std::vector<double> xb{9.0 * 68.0 / 15.0};
    const auto ga = local_geometry(s, xa);
    const auto gb = local_geometry(t, xb);
    EXPECT_NEAR(ga.inclination_rad[0], gb.inclination_rad[0], 1e-14);
    EXPECT_NEAR(ga.gaussian_curvature_per_mm2[0] * 225.0, gb.gaussian_curvature_per_mm2[0] * 68.0 * 68.0, 1e-13);
}

TEST(Profile, CsvRoundTripIsExact) {
    const auto path = std::filesystem::temp_directory_path() / "glassform_profile_test.csv";
    const auto p = sample(cover(), uniform_grid(15.0));
    write_profile_csv(path, p);
    const auto q = read_profile_csv(path);
    EXPECT_EQ(q.xs, p.xs);
    EXPECT_EQ(q.ys, p.ys);
    std::filesystem::remove(path);
}

TEST(Surface, JsonRoundTrip) {
    const nlohmann::json j = cover();
    const auto s = j.get<AsphericSurface>();
    EXPECT_EQ(s.aspheric_coeffs, cover().aspheric_coeffs);
    EXPECT_EQ(s.curvature_c, 0.04);
}
