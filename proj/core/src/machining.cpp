#include "glassform/machining.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "glassform/error.hpp"
#include "glassform/io.hpp"
#include "glassform/numerics.hpp"

namespace glassform {

ErrorProfile generate_error_profile(std::span<const double> grid, double tolerance_um,
                                    double correlation_length_mm, std::uint64_t seed) {
    if (grid.size() < 2) throw ValidationError("error profile: grid needs at least 2 points");
    if (!(tolerance_um >= 0.0)) throw ValidationError("error profile: tolerance must be non-negative");
    const double x0 = grid.front();
    const double span = grid.back() - x0;
    if (!(correlation_length_mm > 0.0) || correlation_length_mm >= span) {
        std::ostringstream msg;
        msg << "error profile: correlation length " << correlation_length_mm << " mm must lie in (0, "
            << span << ") mm";
        throw ValidationError(msg.str());
    }
    ErrorProfile p;
    p.xs.assign(grid.begin(), grid.end());
    p.tolerance_um = tolerance_um;
    p.seed = seed;
    p.correlation_length_mm = correlation_length_mm;
    p.e.assign(grid.size(), 0.0);
    if (tolerance_um == 0.0) return p;

    const double tol = 1e-3 * tolerance_um;
    std::vector<double> cx, cy;
    Rng rng(seed);
    for (double x = x0; x < grid.back(); x += correlation_length_mm) {
        cx.push_back(x);
        cy.push_back(rng.uniform(-tol, tol));
    }
    if (grid.back() - cx.back() < 0.25 * correlation_length_mm) cx.back() = grid.back();
    else cx.push_back(grid.back());
    if (cy.size() < cx.size()) cy.push_back(rng.uniform(-tol, tol));

    const MonotoneCubic curve(cx, cy);
    for (std::size_t i = 0; i < grid.size(); ++i) p.e[i] = curve(grid[i]);
    const double peak = max_abs(p.e);
    if (peak >= tol) {
        const double k = std::nextafter(tol, 0.0) / peak;
        for (auto& v : p.e) v *= k;
    }
    return p;
}

MoldPair perturb_molds(const MoldPair& molds, const ErrorProfile& upper_err, const ErrorProfile& lower_err) {
    if (upper_err.xs != molds.upper.xs || lower_err.xs != molds.lower.xs)
        throw RangeError("perturb_molds: error profile grid differs from the mold grid");
    MoldPair out = molds;
    for (std::size_t i = 0; i < out.upper.size(); ++i) {
        out.upper.ys[i] += upper_err.e[i];
        out.lower.ys[i] += lower_err.e[i];
    }
    return out;
}

namespace {

struct SurfaceStats {
    double max_dev_um = 0.0;
    std::size_t argmax = 0;
    double correlation = 0.0;
};

// deviation is target - formed; the glass follows the mold, so the error is
// correlated against formed - target
SurfaceStats surface_stats(const std::vector<double>& dev_um, const std::vector<double>& err_mm) {
    SurfaceStats s;
    std::vector<double> disp(dev_um.size()), err(err_mm.size());
    for (std::size_t i = 0; i < dev_um.size(); ++i) {
        disp[i] = -dev_um[i];
        err[i] = 1e3 * err_mm[i];
        if (std::abs(dev_um[i]) > s.max_dev_um) {
            s.max_dev_um = std::abs(dev_um[i]);
            s.argmax = i;
        }
    }
    s.correlation = pearson(err, disp);
    return s;
}

TrialResult run_trial(const FormingCase& c, const MoldPair& precision, double tol_um, int trial,
                      const StudyOptions& opt) {
    TrialResult t;
    t.tolerance_um = tol_um;
    t.trial = trial;
    t.seed = opt.base_seed + static_cast<std::uint64_t>(trial);
    const auto eu = generate_error_profile(precision.upper.xs, tol_um, opt.correlation_length_mm, t.seed);
    const auto el = generate_error_profile(precision.lower.xs, tol_um, opt.correlation_length_mm, mix_seed(t.seed));
    const auto formed = simulate_forming(perturb_molds(precision, eu, el), c);
    const auto rep = compute_deviations(formed, c.target);
    if (rep.xs.size() != eu.e.size())
        throw RangeError("amplification_study: mold and target grids have different sizes");

    const auto si = surface_stats(rep.inner_dev_um, eu.e);
    const auto so = surface_stats(rep.outer_dev_um, el.e);
    t.max_dev_inner_um = si.max_dev_um;
    t.max_dev_outer_um = so.max_dev_um;
    // mold node i forms glass node i
    const bool inner_wins = si.max_dev_um >= so.max_dev_um;
    const double err_at_peak = 1e3 * std::abs(inner_wins ? eu.e[si.argmax] : el.e[so.argmax]);
    const double peak_dev = std::max(si.max_dev_um, so.max_dev_um);
    t.peak_ratio = err_at_peak > 0.0 ? peak_dev / err_at_peak : 0.0;
    const double max_err = 1e3 * std::max(max_abs(eu.e), max_abs(el.e));
    t.global_ratio = max_err > 0.0 ? peak_dev / max_err : 0.0;
    t.correlation = 0.5 * (si.correlation + so.correlation);
    return t;
}

}  // namespace

AmplificationReport amplification_study(const FormingCase& c, const MoldPair& precision_molds,
                                        const StudyOptions& opt) {
    c.validate();
    if (opt.trials < 1) throw ValidationError("amplification_study: trials must be >= 1");
    if (opt.tolerances_um.empty()) throw ValidationError("amplification_study: no tolerance levels");
    AmplificationReport r;
    r.trials_per_level = opt.trials;
    r.base_seed = opt.base_seed;
    r.correlation_length_mm = opt.correlation_length_mm;
    r.precision_residual_um =
        compute_deviations(simulate_forming(precision_molds, c), c.target).max_abs_surface_um();

    const std::size_t per = static_cast<std::size_t>(opt.trials);
    r.trials.resize(opt.tolerances_um.size() * per);
    parallel_for(r.trials.size(), opt.jobs, [&](std::size_t k) {
        r.trials[k] = run_trial(c, precision_molds, opt.tolerances_um[k / per], static_cast<int>(k % per), opt);
    });

    for (std::size_t l = 0; l < opt.tolerances_um.size(); ++l) {
        ToleranceSummary s;
        s.tolerance_um = opt.tolerances_um[l];
        for (std::size_t k = l * per; k < (l + 1) * per; ++k) {
            const auto& t = r.trials[k];
            const double dev = std::max(t.max_dev_inner_um, t.max_dev_outer_um);
            s.mean_max_dev_um += dev;
            s.max_max_dev_um = std::max(s.max_max_dev_um, dev);
            s.mean_peak_ratio += t.peak_ratio;
            s.max_peak_ratio = std::max(s.max_peak_ratio, t.peak_ratio);
            s.mean_global_ratio += t.global_ratio;
            s.mean_correlation += t.correlation;
            s.trials_below_two += t.peak_below_two() ? 1 : 0;
        }
        const double n = static_cast<double>(per);
        s.mean_max_dev_um /= n;
        s.mean_peak_ratio /= n;
        s.mean_global_ratio /= n;
        s.mean_correlation /= n;
        r.levels.push_back(s);
    }
    return r;
}

nlohmann::json report_to_json(const AmplificationReport& r) {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& s : r.levels) {
        levels.push_back({{"tolerance_um", s.tolerance_um},
                          {"mean_max_dev_um", s.mean_max_dev_um},
                          {"max_max_dev_um", s.max_max_dev_um},
                          {"mean_peak_ratio", s.mean_peak_ratio},
                          {"max_peak_ratio", s.max_peak_ratio},
                          {"mean_global_ratio", s.mean_global_ratio},
                          {"mean_correlation", s.mean_correlation},
                          {"trials_peak_below_2", s.trials_below_two}});
    }
    return {{"trials_per_level", r.trials_per_level},
            {"base_seed", r.base_seed},
            {"correlation_length_mm", r.correlation_length_mm},
            {"precision_residual_um", r.precision_residual_um},
            {"levels", levels}};
}

void write_trials_csv(const std::filesystem::path& path, const AmplificationReport& r) {
    io::Table t;
    t.header = {"tolerance_um", "trial", "max_dev_inner_um", "max_dev_outer_um", "peak_ratio", "global_ratio",
                "correlation"};
    t.columns.resize(t.header.size());
    for (const auto& tr : r.trials) {
        t.columns[0].push_back(tr.tolerance_um);
        t.columns[1].push_back(tr.trial);
        t.columns[2].push_back(tr.max_dev_inner_um);
        t.columns[3].push_back(tr.max_dev_outer_um);
        t.columns[4].push_back(tr.peak_ratio);
        t.columns[5].push_back(tr.global_ratio);
        t.columns[6].push_back(tr.correlation);
    }
    io::write_csv(path, t);
}

}  // namespace glassform
