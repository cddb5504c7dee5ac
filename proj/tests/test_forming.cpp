#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "glassform/error.hpp"
#include "glassform/forming.hpp"

using namespace glassform;

namespace {

const MaterialCatalog& catalog() {
    static const auto c = MaterialCatalog::builtin();
    return c;
}

FormingCase make_case(AsphericSurface s, double t, const std::string& mold = "glassy_carbon") {
    FormingCase c;
    c.name = "test";
    c.target.surface = s;
    c.target.r_max_mm = s.r_max_mm;
    c.target.thickness_mm = t;
    c.target.glass = catalog().glass("GG");
    c.mold = catalog().mold(mold);
    return c;
}

FormingCase cover_case() { return make_case({0.04, -2.0, {0.0, 1.1e-5, 3.9e-7, 7.3e-10}, 15.0}, 0.7); }

DeviationReport run(const FormingCase& c) {
    const auto molds = design_initial_molds(c);
    return compute_deviations(simulate_forming(molds, c), c.target);
}

}  // namespace

TEST(Thermal, FrozenEffectiveCte) {
    const ThermalSchedule s;
    EXPECT_NEAR(effective_glass_cte(catalog().glass("GG"), s), 8.84558823529411765e-6, 1e-20);
    EXPECT_NEAR(mold_scale_factor(catalog().glass("GG"), catalog().mold("graphite"), s), 1.00294598528502781,
                1e-15);
}

TEST(Thermal, SingleRegimeWhenMoldingBelowTg) {
    ThermalSchedule s;
    auto g = catalog().glass("GG");
    g.cte_above_tg_per_c = g.cte_below_tg_per_c;
    EXPECT_DOUBLE_EQ(effective_glass_cte(g, s), g.cte_below_tg_per_c);
    // 1 + 680 * 8.1e-6 over 1 + 680 * 2.5e-6
    EXPECT_NEAR(mold_scale_factor(g, catalog().mold("glassy_carbon"), s), 1.00380153738644305, 1e-15);
}

TEST(InitialMolds, AreTheTargetScaledByM) {
    const auto c = cover_case();
    const auto molds = design_initial_molds(c);
    const auto grid = c.target_grid();
    const auto inner = c.target.inner(grid);
    const double m = molds.scale_m;
    ASSERT_EQ(molds.upper.size(), grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_NEAR(molds.upper.xs[i], m * grid[i], 1e-12);
        EXPECT_NEAR(molds.upper.ys[i], m * inner.ys[i], 1e-12);
    }
}

class IdentityForming : public ::testing::TestWithParam<AsphericSurface> {};

TEST_P(IdentityForming, ReproducesTheTarget) {
    auto c = make_case(GetParam(), 0.7);
    c.config = FormingConfig::identity();
    c.mold.cte_per_c = effective_glass_cte(c.target.glass, c.schedule);
    const auto r = run(c);
    EXPECT_LT(r.max_abs_inner_um, 0.1);
    EXPECT_LT(r.max_abs_outer_um, 0.1);
    EXPECT_LT(r.max_abs_thickness_um, 0.1);
}

INSTANTIATE_TEST_SUITE_P(Targets, IdentityForming,
                         ::testing::Values(AsphericSurface{0.04, -2.0, {0.0, 1.1e-5, 3.9e-7, 7.3e-10}, 15.0},
                                           AsphericSurface{0.03, 16.0 / 9.0, {}, 15.0},
                                           AsphericSurface{16.0 / 225.0, -1.0, {}, 15.0},
                                           AsphericSurface{0.0, 0.0, {}, 10.0},
                                           AsphericSurface{0.05, -1.2, {0.0, 1e-5}, 8.0}));

TEST(Forming, FlatMoldsGiveFlatGlass) {
    const auto c = make_case({0.0, 0.0, {}, 12.0}, 0.8);
    const auto f = simulate_forming(design_initial_molds(c), c);
    // springback of the lowered midsurface lifts the plate without bending it
    for (std::size_t i = 0; i < f.inner.size(); ++i) {
        EXPECT_NEAR(f.inner.ys[i], f.inner.ys[0], 1e-12);
        EXPECT_NEAR(f.outer.ys[i], f.inner.ys[0] - 0.8, 1e-12);
        EXPECT_NEAR(f.thickness_mm_at[i], 0.8, 1e-12);
    }
}

TEST(Forming, CalibrationBand) {
    const auto r = run(cover_case());
    EXPECT_GE(r.max_abs_inner_um, 20.0);
    EXPECT_LE(r.max_abs_inner_um, 100.0);
    EXPECT_GE(r.max_abs_thickness_um, 1.0);
    EXPECT_LE(r.max_abs_thickness_um, 10.0);
}

TEST(Forming, Deterministic) {
    const auto c = cover_case();
    const auto molds = design_initial_molds(c);
    const auto a = simulate_forming(molds, c);
    const auto b = simulate_forming(molds, c);
    EXPECT_EQ(a.inner.ys, b.inner.ys);
    EXPECT_EQ(a.outer.ys, b.outer.ys);
    EXPECT_EQ(a.thickness_mm_at, b.thickness_mm_at);
}

TEST(Forming, GridRefinementIsStable) {
    auto c = cover_case();
    const auto coarse = run(c);
    c.config.grid_points = 401;
    const auto fine = run(c);
    EXPECT_NEAR(coarse.max_abs_inner_um, fine.max_abs_inner_um, 0.5);
    EXPECT_NEAR(coarse.max_abs_outer_um, fine.max_abs_outer_um, 0.5);
    EXPECT_NEAR(coarse.max_abs_thickness_um, fine.max_abs_thickness_um, 0.5);
}

TEST(Forming, HalvingBetaRoughlyHalvesInnerDeviation) {
    auto c = cover_case();
    const double full = run(c).max_abs_inner_um;
    c.config.springback_beta *= 0.5;
    const double half = run(c).max_abs_inner_um;
    EXPECT_NEAR(half / full, 0.5, 0.1);
}

TEST(Forming, SlowerAnnealingNeverIncreasesDeviation) {
    auto c = cover_case();
    c.schedule.annealing_rate_c_per_s = 5.0;
    const double fast = run(c).max_abs_inner_um;
    c.schedule.annealing_rate_c_per_s = 0.5;
    const double slow = run(c).max_abs_inner_um;
    EXPECT_LE(slow, fast + 1e-9);
}

TEST(Forming, ScalingByLambdaScalesDeviations) {
    const auto c = cover_case();
    const auto a = run(c);
    const auto b = run(c.scaled(4.0));
    EXPECT_NEAR(b.max_abs_inner_um, 4.0 * a.max_abs_inner_um, 1e-6 * b.max_abs_inner_um);
    EXPECT_NEAR(b.max_abs_thickness_um, 4.0 * a.max_abs_thickness_um, 1e-6 * b.max_abs_thickness_um + 1e-9);
}

TEST(Deviations, ConstantInnerOffsetHasNegativeSign) {
    const auto c = cover_case();
    const auto grid = c.target_grid();
    FormedGlass f{c.target.inner(grid), c.target.outer(grid), std::vector<double>(grid.size(), 0.7)};
    for (double& y : f.inner.ys) y += 0.005;
    const auto r = compute_deviations(f, c.target);
    for (double d : r.inner_dev_um) EXPECT_NEAR(d, -5.0, 1e-9);
    for (double d : r.outer_dev_um) EXPECT_NEAR(d, 0.0, 1e-9);
    for (double d : r.thickness_dev_um) EXPECT_NEAR(d, 0.0, 1e-9);
}

TEST(NormalThickness, ConcentricCircles) {
    const double r = 20.0, t = 0.7;
    const auto grid = uniform_grid(15.0);
    const auto inner = sample(AsphericSurface{1.0 / r, 0.0, {}, 15.0}, grid);
    const auto outer = normal_offset(AsphericSurface{1.0 / r, 0.0, {}, 15.0}, grid, t, OffsetSide::NegativeY);
    const auto th = normal_thickness(inner, outer);
    for (std::size_t i = 0; i + 1 < th.size(); ++i) EXPECT_NEAR(th[i], t, 1e-5);
}

TEST(Blank, FlatTargetNeedsItsOwnThickness) {
    const auto c = make_case({0.0, 0.0, {}, 10.0}, 0.8);
    const auto b = blank_thickness(c.target);
    EXPECT_NEAR(b.thickness_mm, 0.8, 1e-9);
    EXPECT_TRUE(b.within_limit);
}

TEST(Blank, CurvedTargetNeedsMoreGlass) {
    const auto b = blank_thickness(cover_case().target);
    EXPECT_GT(b.thickness_mm, 0.7);
}

TEST(Config, ValidationRejectsNonsense) {
    FormingConfig c;
    c.grid_points = 8;
    EXPECT_THROW(c.validate(), ValidationError);
    c = {};
    c.thinning_eta = -0.1;
    EXPECT_THROW(c.validate(), ValidationError);
    EXPECT_NO_THROW(FormingConfig::identity().validate());
}

TEST(CaseFile, ParsesAndRoundTrips) {
    const std::filesystem::path path = std::filesystem::path(GLASSFORM_SOURCE_DIR) / "cases" / "cover_glass.json";
    std::ifstream in(path);
    const auto doc = nlohmann::json::parse(in);
    const auto c = parse_case(doc, catalog());
    EXPECT_EQ(c.name, "cover_glass");
    EXPECT_DOUBLE_EQ(c.target.thickness_mm, 0.7);
    EXPECT_EQ(c.mold.name, "glassy_carbon");
    const auto again = parse_case(case_to_json(c), catalog());
    EXPECT_EQ(case_to_json(again), case_to_json(c));
}

TEST(CaseFile, ErrorsAreValidationErrors) {
    nlohmann::json doc = {{"name", "x"}, {"thickness_mm", 0.7}};
    EXPECT_THROW(parse_case(doc, catalog()), ValidationError);
    doc["surface"] = {{"c", 0.04}, {"k", -2.0}, {"a", nlohmann::json::array()}, {"r_max_mm", 15.0}};
    EXPECT_NO_THROW(parse_case(doc, catalog()));
    doc["mold"] = "cardboard";
    EXPECT_THROW(parse_case(doc, catalog()), LookupError);
    doc.erase("mold");
    doc["thickness_mm"] = -1.0;
    EXPECT_THROW(parse_case(doc, catalog()), ValidationError);
    doc["thickness_mm"] = "thick";
    EXPECT_THROW(parse_case(doc, catalog()), ValidationError);
}

TEST(CaseFile, FormingOverridesMerge) {
    nlohmann::json doc = {{"surface", {{"c", 0.04}, {"k", -2.0}, {"a", nlohmann::json::array()}, {"r_max_mm", 15.0}}},
                          {"thickness_mm", 0.7},
                          {"forming", {{"springback_beta", 1.5}}}};
    const auto c = parse_case(doc, catalog());
    EXPECT_DOUBLE_EQ(c.config.springback_beta, 1.5);
    EXPECT_DOUBLE_EQ(c.config.springback_gamma, 3.0);
}

TEST(CaseFile, ProfileTargetsResolveRelativePaths) {
    const auto dir = std::filesystem::temp_directory_path() / "glassform_profile_case";
    std::filesystem::create_directories(dir);
    const AsphericSurface s{0.04, -2.0, {}, 15.0};
    write_profile_csv(dir / "p.csv", sample(s, uniform_grid(15.0)));
    const nlohmann::json doc = {{"profile_csv", "p.csv"}, {"thickness_mm", 0.7}};
    const auto c = parse_case(doc, catalog(), {}, dir);
    EXPECT_DOUBLE_EQ(c.target.r_max_mm, 15.0);
    auto analytic = make_case(s, 0.7);
    EXPECT_NEAR(run(c).max_abs_inner_um, run(analytic).max_abs_inner_um, 0.5);
    std::filesystem::remove_all(dir);
}
