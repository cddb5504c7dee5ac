#pragma once

#include <array>
#include <span>
#include <vector>

#include "glassform/forming.hpp"

namespace glassform {

inline constexpr std::size_t kFeatureCount = 6;

/// One dimensionless training/inference sample: four geometric features of
/// the product, two process parameters, and the FEC of both molds / r_max.
struct FeatureRow {
    long case_id = 0;
    double x_mm = 0.0;
    double X = 0.0;
    double T_bar = 0.0;
    double K_bar = 0.0;
    double angle_rad = 0.0;
    double anneal_rate_c_per_s = 0.0;
    double t_mold_c = 0.0;
    double fec_u_bar = 0.0;
    double fec_l_bar = 0.0;

    std::array<double, kFeatureCount> features() const {
        return {X, T_bar, K_bar, angle_rad, anneal_rate_c_per_s, t_mold_c};
    }
};

inline constexpr std::array<const char*, kFeatureCount> kFeatureNames{
    "X", "T_bar", "K_bar", "angle_rad", "anneal_rate_c_per_s", "t_mold_c"};

/// Feature rows of a case at abscissae xs (targets left at 0). Geometry is
/// analytic for aspheric targets and interpolated from grid differences for
/// sampled profiles.
std::vector<FeatureRow> case_features(const FormingCase& c, std::span<const double> xs, long case_id = 0);

}  // namespace glassform
