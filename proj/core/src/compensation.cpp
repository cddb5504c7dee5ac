#include "glassform/compensation.hpp"

#include <cmath>

#include "glassform/error.hpp"
#include "glassform/io.hpp"
#include "glassform/numerics.hpp"

namespace glassform {

namespace {

// Deviation profile (mm) sampled at mold abscissae mapped back by 1/m.
std::vector<double> mold_update(const std::vector<double>& mold_xs, double m, const std::vector<double>& xs,
                                const std::vector<double>& dev_um) {
    std::vector<double> dev_mm(dev_um.size());
    for (std::size_t i = 0; i < dev_um.size(); ++i) dev_mm[i] = 1e-3 * dev_um[i];
    std::vector<double> at(mold_xs.size());
    for (std::size_t i = 0; i < mold_xs.size(); ++i) at[i] = mold_xs[i] / m;
    return resample(Profile{xs, dev_mm}, at).ys;
}

}  // namespace

MoldPair compensate_once(const MoldPair& molds, const DeviationReport& report, double gain) {
    if (!(gain > 0.0 && gain <= 1.0)) throw ValidationError("compensate_once: gain must lie in (0, 1]");
    MoldPair next = molds;
    const auto du = mold_update(molds.upper.xs, molds.scale_m, report.xs, report.inner_dev_um);
    const auto dl = mold_update(molds.lower.xs, molds.scale_m, report.xs, report.outer_dev_um);
    for (std::size_t i = 0; i < next.upper.size(); ++i) {
        next.upper.ys[i] += gain * du[i];
        next.lower.ys[i] += gain * dl[i];
    }
    return next;
}

MoldPair apply_fec(const MoldPair& initial, const Profile& fec_upper, const Profile& fec_lower) {
    MoldPair out = initial;
    std::vector<double> at(initial.upper.size());
    for (std::size_t i = 0; i < at.size(); ++i) at[i] = initial.upper.xs[i] / initial.scale_m;
    const auto du = resample(fec_upper, at).ys;
    const auto dl = resample(fec_lower, at).ys;
    for (std::size_t i = 0; i < at.size(); ++i) {
        out.upper.ys[i] += du[i];
        out.lower.ys[i] += dl[i];
    }
    return out;
}

CompensationResult run_compensation(const FormingCase& c, const CompensationOptions& opt) {
    c.validate();
    if (!(opt.tolerance_um > 0.0)) throw ValidationError("run_compensation: tolerance must be positive");
    if (opt.max_iters < 0) throw ValidationError("run_compensation: max_iters must be non-negative");

    CompensationResult res;
    res.initial_molds = design_initial_molds(c);
    MoldPair molds = res.initial_molds;
    for (;;) {
        const auto formed = simulate_forming(molds, c);
        res.final_report = compute_deviations(formed, c.target);
        const auto& rep = res.final_report;
        res.history.push_back({rep.max_abs_inner_um, rep.max_abs_outer_um, rep.max_abs_thickness_um});
        if (rep.max_abs_surface_um() < opt.tolerance_um) {
            res.converged = true;
            break;
        }
        if (res.iterations >= opt.max_iters) break;
        molds = compensate_once(molds, rep, opt.relaxation);
        ++res.iterations;
    }
    res.precision_molds = molds;

    // FEC on the target grid: mold node i sits at m * x_i
    const auto grid = c.target_grid();
    res.fec_upper.xs = grid;
    res.fec_lower.xs = grid;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        res.fec_upper.ys.push_back(molds.upper.ys[i] - res.initial_molds.upper.ys[i]);
        res.fec_lower.ys.push_back(molds.lower.ys[i] - res.initial_molds.lower.ys[i]);
    }
    return res;
}

nlohmann::json history_to_json(const CompensationResult& r) {
    nlohmann::json h = nlohmann::json::array();
    for (std::size_t i = 0; i < r.history.size(); ++i) {
        const auto& e = r.history[i];
        h.push_back({{"iteration", i},
                     {"max_dev_inner_um", e.max_inner_um},
                     {"max_dev_outer_um", e.max_outer_um},
                     {"max_dev_thickness_um", e.max_thickness_um}});
    }
    return {{"converged", r.converged},
            {"iterations", r.iterations},
            {"scale_m", r.precision_molds.scale_m},
            {"history", h}};
}

void write_mold_csv(const std::filesystem::path& path, const MoldPair& molds) {
    io::write_csv(path, {{"x_mm", "y_upper_mm", "y_lower_mm"}, {molds.upper.xs, molds.upper.ys, molds.lower.ys}});
}

void write_fec_csv(const std::filesystem::path& path, const Profile& fec_upper, const Profile& fec_lower) {
    io::write_csv(path, {{"x_mm", "fec_upper_mm", "fec_lower_mm"}, {fec_upper.xs, fec_upper.ys, fec_lower.ys}});
}

}  // namespace glassform
