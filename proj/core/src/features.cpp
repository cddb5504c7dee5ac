#include "glassform/features.hpp"

#include "glassform/numerics.hpp"

namespace glassform {

std::vector<FeatureRow> case_features(const FormingCase& c, std::span<const double> xs, long case_id) {
    const double r = c.target.r_max_mm;
    LocalGeometry g;
    if (const auto* s = std::get_if<AsphericSurface>(&c.target.surface)) {
        g = local_geometry(*s, xs);
    } else {
        const auto grid = c.target_grid();
        const auto on_grid = local_geometry(c.target.inner(grid));
        const MonotoneCubic angle(grid, on_grid.inclination_rad);
        const MonotoneCubic gauss(grid, on_grid.gaussian_curvature_per_mm2);
        for (double x : xs) {
            g.inclination_rad.push_back(angle(x));
            g.gaussian_curvature_per_mm2.push_back(gauss(x));
        }
    }
    std::vector<FeatureRow> rows(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto d = nondimensionalize(xs[i], c.target.thickness_mm, g.gaussian_curvature_per_mm2[i], 0.0, r);
        auto& row = rows[i];
        row.case_id = case_id;
        row.x_mm = xs[i];
        row.X = d.X;
        row.T_bar = d.thickness_bar;
        row.K_bar = d.gaussian_bar;
        row.angle_rad = g.inclination_rad[i];
        row.anneal_rate_c_per_s = c.schedule.annealing_rate_c_per_s;
        row.t_mold_c = c.schedule.molding_temperature_c;
    }
    return rows;
}

}  // namespace glassform
