#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "glassform/error.hpp"
#include "glassform/materials.hpp"

using namespace glassform;

namespace {

const MaterialProperties& gg() {
    static const auto g = MaterialCatalog::builtin().glass("GG");
    return g;
}

const MaterialProperties& bk7() {
    static const auto g = MaterialCatalog::builtin().glass("BK7");
    return g;
}

}  // namespace

TEST(Prony, EndpointsOfGG) {
    EXPECT_EQ(prony_g(0.0, gg().prony), 1.0);
    EXPECT_NEAR(prony_g(1e9, gg().prony), 0.001, 1e-12);
}

TEST(Prony, OneRelaxationTime) {
    // 1 - 0.999 (1 - 1/e), evaluated in extended precision
    EXPECT_NEAR(prony_g(37.143, gg().prony), 0.368511561730270879, 1e-15);
}

TEST(Prony, NegativeTimeIsRejected) { EXPECT_THROW(prony_g(-1.0, gg().prony), DomainError); }

TEST(Prony, MonotoneDecreasing) {
    double prev = 2.0;
    for (double t = 0.0; t < 500.0; t += 3.7) {
        const double g = prony_g(t, gg().prony);
        EXPECT_LT(g, prev);
        EXPECT_GT(g, 0.0);
        prev = g;
    }
}

TEST(Prony, ValidationCatchesBadTerms) {
    PronySeries s{{{0.6, 0.0, 1.0}, {0.6, 0.0, 1.0}}, 500.0};
    EXPECT_THROW(s.validate(), ValidationError);
    PronySeries t{{{0.5, 0.0, -1.0}}, 500.0};
    EXPECT_THROW(t.validate(), ValidationError);
}

TEST(Wlf, UnityAtReference) {
    EXPECT_EQ(wlf_shift(gg().wlf.reference_temperature_c, gg().wlf), 1.0);
    EXPECT_EQ(wlf_shift(bk7().wlf.reference_temperature_c, bk7().wlf), 1.0);
}

TEST(Wlf, FrozenSpotValues) {
    EXPECT_NEAR(wlf_shift(600.0, gg().wlf), 0.127210588788967904, 1e-15);
    EXPECT_NEAR(wlf_shift(695.0, bk7().wlf), 0.543851667709007832, 1e-15);
    EXPECT_NEAR(std::log10(wlf_shift(600.0, gg().wlf)), -0.895476737262907, 1e-13);
}

TEST(Wlf, HotterMeansFasterRelaxation) {
    double prev = INFINITY;
    for (double t = 560.0; t <= 760.0; t += 10.0) {
        const double a = wlf_shift(t, gg().wlf);
        EXPECT_LT(a, prev);
        prev = a;
    }
}

TEST(Wlf, SingularityGuardNamesTheTemperature) {
    const auto& w = bk7().wlf;  // singular at 685 - 179.4 = 505.6 C
    try {
        wlf_shift(505.0, w);
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("505.6"), std::string::npos) << e.what();
    }
    EXPECT_THROW(wlf_shift(w.singular_temperature_c() + 4.0, w), DomainError);
    EXPECT_NO_THROW(wlf_shift(w.singular_temperature_c() + 6.0, w));
}

TEST(ReducedTime, IsothermalHoldIsTimeOverShift) {
    const std::vector<TemperatureSegment> hold{{600.0, 600.0, 60.0}};
    EXPECT_NEAR(reduced_time(hold, gg().wlf), 471.658849874008172, 1e-9);
    EXPECT_NEAR(residual_fraction(hold, gg().prony, gg().wlf), 0.0010030527761851285, 1e-15);
}

TEST(ReducedTime, StepRefinementConverges) {
    const ThermalSchedule s;
    const double coarse = reduced_time(s, gg().wlf, 1.0);
    const double fine = reduced_time(s, gg().wlf, 0.25);
    EXPECT_NEAR(coarse, fine, 1e-3 * fine);
}

TEST(ReducedTime, FrozenBelowTheGuardBand) {
    // BK7 cooling to room temperature crosses T0 - C2: those sub-steps add nothing
    const ThermalSchedule s;
    const auto segs = segments_of(s);
    ASSERT_EQ(segs.size(), 3u);
    const std::vector<TemperatureSegment> cold{{400.0, 20.0, 76.0}};
    EXPECT_EQ(reduced_time(cold, bk7().wlf), 0.0);
    EXPECT_GT(reduced_time(s, bk7().wlf), 0.0);
}

TEST(ResidualFraction, SaturatesForTheDefaultSchedule) {
    const ThermalSchedule s;
    EXPECT_NEAR(residual_fraction(s, gg().prony, gg().wlf), 0.001, 1e-9);
    EXPECT_NEAR(residual_fraction(s, bk7().prony, bk7().wlf), 0.001, 1e-9);
}

TEST(Schedule, SegmentsFollowTheRates) {
    ThermalSchedule s;
    const auto segs = segments_of(s);
    EXPECT_DOUBLE_EQ(segs[0].duration_s, 60.0);
    EXPECT_DOUBLE_EQ(segs[1].duration_s, 200.0);
    EXPECT_DOUBLE_EQ(segs[2].duration_s, 96.0);
    s.annealing_rate_c_per_s = 0.0;
    EXPECT_THROW(s.validate(), ValidationError);
}

TEST(Catalog, LookupListsNames) {
    const auto cat = MaterialCatalog::builtin();
    try {
        cat.glass("unobtainium");
        FAIL();
    } catch (const LookupError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("GG"), std::string::npos);
        EXPECT_NE(msg.find("glassy_carbon"), std::string::npos);
    }
    EXPECT_DOUBLE_EQ(cat.mold("glassy_carbon").cte_per_c, 2.5e-6);
    EXPECT_DOUBLE_EQ(cat.mold("graphite").cte_per_c, 4.5e-6);
    EXPECT_THROW(cat.mold("GG"), LookupError);
}

TEST(Catalog, JsonOverlayAddsAndReplaces) {
    nlohmann::json doc = {{"molds", {{{"name", "tungsten_carbide"}, {"cte_per_c", 4.9e-6}}}},
                          {"glasses", {gg()}}};
    doc["glasses"][0]["tg_c"] = 571.0;
    const auto cat = MaterialCatalog::from_json(doc);
    EXPECT_DOUBLE_EQ(cat.mold("tungsten_carbide").cte_per_c, 4.9e-6);
    EXPECT_DOUBLE_EQ(cat.glass("GG").tg_c, 571.0);
    EXPECT_DOUBLE_EQ(cat.glass("BK7").tg_c, 685.0);
}

TEST(Catalog, MaterialJsonRoundTrip) {
    const nlohmann::json j = bk7();
    const auto back = j.get<MaterialProperties>();
    EXPECT_EQ(nlohmann::json(back), j);
    const nlohmann::json s = ThermalSchedule{};
    EXPECT_EQ(s.at("t_mold_c"), 700.0);
    EXPECT_EQ(nlohmann::json(s.get<ThermalSchedule>()), s);
}
