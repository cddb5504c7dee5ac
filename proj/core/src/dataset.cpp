#include "glassform/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "glassform/error.hpp"
#include "glassform/io.hpp"
#include "glassform/numerics.hpp"

namespace glassform {

namespace {

void check_range(const Range& r, const char* name) {
    if (!(std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi))
        throw ValidationError(std::string("design space: ") + name + " needs lo <= hi");
}

nlohmann::json range_json(const Range& r) { return nlohmann::json::array({r.lo, r.hi}); }

void read_range(const nlohmann::json& j, const char* key, Range& r) {
    if (!j.contains(key)) return;
    const auto v = j.at(key).get<std::vector<double>>();
    if (v.size() != 2) throw ValidationError(std::string("design space: ") + key + " must be [lo, hi]");
    r = {v[0], v[1]};
}

const std::vector<std::string> kCsvHeader{"case_id", "x_mm",      "X",       "T_bar",     "K_bar",
                                          "angle_rad", "anneal_rate_c_per_s", "t_mold_c", "fec_u_bar",
                                          "fec_l_bar"};

}  // namespace

void DesignSpace::validate() const {
    check_range(curvature_c, "curvature_c");
    check_range(conic_k, "conic_k");
    check_range(a4, "a4");
    check_range(r_max_mm, "r_max_mm");
    check_range(thickness_mm, "thickness_mm");
    check_range(t_mold_c, "t_mold_c");
    check_range(anneal_rate_c_per_s, "anneal_rate_c_per_s");
    check_range(x_range, "x_range");
    if (!(r_max_mm.lo > 0.0)) throw ValidationError("design space: r_max_mm must be positive");
    if (r_max_mm.hi > kTrainingRmaxLimitMm)
        throw ValidationError("design space: training r_max must not exceed 20 mm");
    if (!(thickness_mm.lo > 0.0)) throw ValidationError("design space: thickness must be positive");
    if (!(anneal_rate_c_per_s.lo > 0.0)) throw ValidationError("design space: anneal rate must be positive");
    if (!(x_range.lo >= 0.0 && x_range.hi <= 1.0)) throw ValidationError("design space: x_range must lie in [0, 1]");
    if (!(max_inclination_deg > 0.0 && max_inclination_deg < 90.0))
        throw ValidationError("design space: max_inclination_deg must lie in (0, 90)");
    if (rows_per_case < 1) throw ValidationError("design space: rows_per_case must be >= 1");
    forming.validate();
}

void to_json(nlohmann::json& j, const DesignSpace& s) {
    j = {{"curvature_c", range_json(s.curvature_c)},
         {"conic_k", range_json(s.conic_k)},
         {"a4", range_json(s.a4)},
         {"r_max_mm", range_json(s.r_max_mm)},
         {"thickness_mm", range_json(s.thickness_mm)},
         {"t_mold_c", range_json(s.t_mold_c)},
         {"anneal_rate_c_per_s", range_json(s.anneal_rate_c_per_s)},
         {"x_range", range_json(s.x_range)},
         {"max_inclination_deg", s.max_inclination_deg},
         {"glass", s.glass},
         {"mold", s.mold},
         {"rows_per_case", s.rows_per_case},
         {"schedule", s.base_schedule},
         {"forming", s.forming}};
}

void from_json(const nlohmann::json& j, DesignSpace& s) {
    try {
        read_range(j, "curvature_c", s.curvature_c);
        read_range(j, "conic_k", s.conic_k);
        read_range(j, "a4", s.a4);
        read_range(j, "r_max_mm", s.r_max_mm);
        read_range(j, "thickness_mm", s.thickness_mm);
        read_range(j, "t_mold_c", s.t_mold_c);
        read_range(j, "anneal_rate_c_per_s", s.anneal_rate_c_per_s);
        read_range(j, "x_range", s.x_range);
        s.max_inclination_deg = j.value("max_inclination_deg", s.max_inclination_deg);
        s.glass = j.value("glass", s.glass);
        s.mold = j.value("mold", s.mold);
        s.rows_per_case = j.value("rows_per_case", s.rows_per_case);
        if (j.contains("schedule")) s.base_schedule = j.at("schedule").get<ThermalSchedule>();
        if (j.contains("forming")) merge_json(j.at("forming"), s.forming);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("design space: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// sampling

namespace {

constexpr std::size_t kDims = 7;

// n points of a Latin hypercube in [0, 1)^7
std::vector<std::array<double, kDims>> latin_hypercube(std::size_t n, Rng& rng) {
    std::vector<std::array<double, kDims>> pts(n);
    std::vector<std::size_t> perm(n);
    for (std::size_t d = 0; d < kDims; ++d) {
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        rng.shuffle(perm);
        for (std::size_t i = 0; i < n; ++i)
            pts[i][d] = (static_cast<double>(perm[i]) + rng.uniform()) / static_cast<double>(n);
    }
    return pts;
}

bool too_steep(const AsphericSurface& s, double max_deg) {
    const double limit = std::tan(max_deg * std::numbers::pi / 180.0);
    for (double x : uniform_grid(s.r_max_mm, 401))
        if (std::abs(s.eval_unchecked(x).dy) > limit) return true;
    return false;
}

}  // namespace

std::vector<DesignCase> sample_design_space(const DesignSpace& space, std::size_t n_cases, std::uint64_t seed,
                                            const MaterialCatalog& catalog) {
    space.validate();
    if (n_cases < 1) throw ValidationError("sample_design_space: n_cases must be >= 1");
    const auto glass = catalog.glass(space.glass);
    const auto mold = catalog.mold(space.mold);

    Rng rng(seed);
    std::vector<DesignCase> out;
    std::size_t attempts = 0, rejected = 0;
    const std::size_t max_attempts = 20 * n_cases + 100;
    while (out.size() < n_cases && attempts < max_attempts) {
        for (const auto& u : latin_hypercube(n_cases, rng)) {
            if (out.size() == n_cases || attempts == max_attempts) break;
            ++attempts;
            FormingCase c;
            AsphericSurface s;
            s.curvature_c = space.curvature_c.at(u[0]);
            s.conic_k = space.conic_k.at(u[1]);
            s.aspheric_coeffs = {0.0, space.a4.at(u[2])};
            s.r_max_mm = space.r_max_mm.at(u[3]);
            c.target.surface = s;
            c.target.r_max_mm = s.r_max_mm;
            c.target.thickness_mm = space.thickness_mm.at(u[4]);
            c.target.glass = glass;
            c.mold = mold;
            c.schedule = space.base_schedule;
            c.schedule.molding_temperature_c = space.t_mold_c.at(u[5]);
            c.schedule.annealing_rate_c_per_s = space.anneal_rate_c_per_s.at(u[6]);
            c.config = space.forming;
            try {
                c.validate();
                if (too_steep(s, space.max_inclination_deg)) throw GeometryError("too steep");
                design_initial_molds(c);
            } catch (const Error&) {
                ++rejected;
                continue;
            }
            const long id = static_cast<long>(out.size());
            std::ostringstream name;
            name << "case_" << id;
            c.name = name.str();
            out.push_back({id, std::move(c)});
        }
    }
    if (out.size() < n_cases || static_cast<double>(rejected) > 0.9 * static_cast<double>(attempts)) {
        std::ostringstream msg;
        msg << "sample_design_space: " << rejected << " of " << attempts
            << " draws rejected (negative radicand, slope cap or offset failure); the ranges are inconsistent";
        throw ValidationError(msg.str());
    }
    return out;
}

// ---------------------------------------------------------------------------
// generation

namespace {

struct CaseOutput {
    CaseRecord record;
    std::vector<FeatureRow> rows;
};

CaseOutput run_case(const DesignCase& dc, const GenerateOptions& opt) {
    CaseOutput out;
    out.record.id = dc.id;
    out.record.c = dc.c;
    try {
        const auto res = run_compensation(dc.c, opt.compensation);
        out.record.converged = res.converged;
        out.record.iterations = res.iterations;
        out.record.final_max_dev_um = res.history.back().max_surface_um();
        if (!res.converged) return out;

        const double r = dc.c.target.r_max_mm;
        Rng rng(mix_seed(opt.seed ^ mix_seed(static_cast<std::uint64_t>(dc.id))));
        std::vector<double> xs(opt.rows_per_case);
        const double n = static_cast<double>(opt.rows_per_case);
        for (std::size_t j = 0; j < xs.size(); ++j)
            xs[j] = opt.x_range.at((static_cast<double>(j) + rng.uniform()) / n) * r;
        out.rows = case_features(dc.c, xs, dc.id);
        const MonotoneCubic fu(res.fec_upper.xs, res.fec_upper.ys);
        const MonotoneCubic fl(res.fec_lower.xs, res.fec_lower.ys);
        for (auto& row : out.rows) {
            row.fec_u_bar = fu(row.x_mm) / r;
            row.fec_l_bar = fl(row.x_mm) / r;
        }
    } catch (const Error& e) {
        out.record.error = e.what();
        out.rows.clear();
    }
    return out;
}

}  // namespace

Dataset generate_dataset(std::span<const DesignCase> cases, const GenerateOptions& opt) {
    if (cases.empty()) throw ValidationError("generate_dataset: no cases");
    if (opt.rows_per_case < 1) throw ValidationError("generate_dataset: rows_per_case must be >= 1");
    std::vector<CaseOutput> outs(cases.size());
    parallel_for(cases.size(), opt.jobs, [&](std::size_t i) { outs[i] = run_case(cases[i], opt); });

    Dataset d;
    d.seed = opt.seed;
    nlohmann::json fingerprint = {{"generator", kGeneratorVersion},
                                  {"rows_per_case", opt.rows_per_case},
                                  {"x_range", range_json(opt.x_range)},
                                  {"tolerance_um", opt.compensation.tolerance_um},
                                  {"max_iters", opt.compensation.max_iters},
                                  {"relaxation", opt.compensation.relaxation},
                                  {"seed", opt.seed}};
    std::size_t converged = 0;
    for (auto& o : outs) {
        fingerprint["cases"].push_back(case_to_json(o.record.c));
        converged += o.record.converged ? 1 : 0;
        d.rows.insert(d.rows.end(), o.rows.begin(), o.rows.end());
        d.cases.push_back(std::move(o.record));
    }
    const std::string text = fingerprint.dump();
    d.config_hash = fnv1a(text);
    if (converged == 0) throw Error("generate_dataset: no case converged");
    std::stable_sort(d.rows.begin(), d.rows.end(), [](const FeatureRow& a, const FeatureRow& b) {
        return a.case_id != b.case_id ? a.case_id < b.case_id : a.X < b.X;
    });
    return d;
}

std::pair<std::vector<FeatureRow>, std::vector<FeatureRow>> split_dataset(std::span<const FeatureRow> rows,
                                                                          double train_fraction,
                                                                          std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ValidationError("split_dataset: train fraction must lie in (0, 1)");
    std::vector<long> ids;
    for (const auto& r : rows) ids.push_back(r.case_id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (ids.size() < 2) throw ValidationError("split_dataset: needs at least 2 cases");
    Rng rng(seed);
    rng.shuffle(ids);
    const auto n = static_cast<double>(ids.size());
    const auto n_train = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(train_fraction * n)), 1,
                                                 ids.size() - 1);
    std::map<long, bool> is_train;
    for (std::size_t i = 0; i < ids.size(); ++i) is_train[ids[i]] = i < n_train;
    std::pair<std::vector<FeatureRow>, std::vector<FeatureRow>> out;
    for (const auto& r : rows) (is_train[r.case_id] ? out.first : out.second).push_back(r);
    return out;
}

// ---------------------------------------------------------------------------
// persistence

void write_dataset_csv(const std::filesystem::path& path, std::span<const FeatureRow> rows) {
    io::Table t;
    t.header = kCsvHeader;
    t.columns.resize(t.header.size());
    for (const auto& r : rows) {
        const double v[] = {static_cast<double>(r.case_id), r.x_mm, r.X, r.T_bar, r.K_bar, r.angle_rad,
                            r.anneal_rate_c_per_s, r.t_mold_c, r.fec_u_bar, r.fec_l_bar};
        for (std::size_t k = 0; k < t.columns.size(); ++k) t.columns[k].push_back(v[k]);
    }
    io::write_csv(path, t);
}

std::vector<FeatureRow> read_dataset_csv(const std::filesystem::path& path) {
    const auto t = io::read_csv(path, kCsvHeader);
    std::vector<FeatureRow> rows(t.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto& r = rows[i];
        const double id = t.columns[0][i];
        if (id != std::floor(id)) throw ValidationError("dataset: case_id must be an integer");
        r.case_id = static_cast<long>(id);
        r.x_mm = t.columns[1][i];
        r.X = t.columns[2][i];
        r.T_bar = t.columns[3][i];
        r.K_bar = t.columns[4][i];
        r.angle_rad = t.columns[5][i];
        r.anneal_rate_c_per_s = t.columns[6][i];
        r.t_mold_c = t.columns[7][i];
        r.fec_u_bar = t.columns[8][i];
        r.fec_l_bar = t.columns[9][i];
    }
    return rows;
}

nlohmann::json manifest_to_json(const Dataset& d) {
    nlohmann::json cases = nlohmann::json::array();
    for (const auto& c : d.cases) {
        nlohmann::json e = {{"case_id", c.id},
                            {"converged", c.converged},
                            {"iterations", c.iterations},
                            {"final_max_dev_um", c.final_max_dev_um},
                            {"case", case_to_json(c.c)}};
        if (!c.error.empty()) e["error"] = c.error;
        cases.push_back(std::move(e));
    }
    std::ostringstream hash;
    hash << std::hex << d.config_hash;
    return {{"generator_version", kGeneratorVersion},
            {"seed", d.seed},
            {"config_hash", hash.str()},
            {"rows", d.rows.size()},
            {"cases", cases}};
}

}  // namespace glassform
