#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "glassform/compensation.hpp"
#include "glassform/dataset.hpp"
#include "glassform/error.hpp"
#include "glassform/io.hpp"
#include "glassform/machining.hpp"
#include "glassform/numerics.hpp"
#include "glassform/surrogate.hpp"

namespace glassform::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kInteriorLimitX = 0.95;
constexpr double kFecBarTolerance = 1e-4;

// Built-in defaults overlaid with the file named by GLASSFORM_CONFIG.
struct Defaults {
    FormingConfig forming;
    CompensationOptions compensation;
    TrainConfig train;
    std::string materials;
    std::string source = "built-in";
};

Defaults load_defaults() {
    Defaults d;
    const char* path = std::getenv("GLASSFORM_CONFIG");
    if (path == nullptr || *path == '\0') return d;
    const json j = io::read_json(path);
    try {
        if (j.contains("forming")) merge_json(j.at("forming"), d.forming);
        if (j.contains("compensation")) {
            const auto& c = j.at("compensation");
            d.compensation.tolerance_um = c.value("tolerance_um", d.compensation.tolerance_um);
            d.compensation.max_iters = c.value("max_iters", d.compensation.max_iters);
            d.compensation.relaxation = c.value("relaxation", d.compensation.relaxation);
        }
        if (j.contains("train")) from_json(j.at("train"), d.train);
        d.materials = j.value("materials", std::string());
    } catch (const json::exception& e) {
        throw ValidationError(std::string(path) + ": " + e.what());
    }
    d.source = path;
    return d;
}

// Everything a run records about itself.
class Manifest {
public:
    Manifest(std::string command, const std::vector<std::string>& args) : start_(std::chrono::steady_clock::now()) {
        doc_["command"] = std::move(command);
        doc_["args"] = args;
        doc_["version"] = kVersion;
        doc_["inputs"] = json::array();
        doc_["outputs"] = json::array();
        doc_["seeds"] = json::object();
    }
    void input(const fs::path& p) { doc_["inputs"].push_back(p.string()); }
    void output(const fs::path& p) { doc_["outputs"].push_back(p.string()); }
    void seed(const std::string& name, std::uint64_t s) { doc_["seeds"][name] = s; }
    void config(const json& cfg) {
        doc_["config"] = cfg;
        std::ostringstream h;
        h << std::hex << fnv1a(cfg.dump());
        doc_["config_hash"] = h.str();
    }
    json& extra() { return doc_; }
    void write(const fs::path& path) {
        doc_["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        io::write_json(path, doc_);
    }

private:
    json doc_;
    std::chrono::steady_clock::time_point start_;
};

MaterialCatalog catalog_for(const std::string& flag, const Defaults& d) {
    const std::string path = flag.empty() ? d.materials : flag;
    return path.empty() ? MaterialCatalog::builtin() : MaterialCatalog::from_json_file(path);
}

FormingCase load_case(const fs::path& path, const MaterialCatalog& catalog, const Defaults& d) {
    return parse_case(io::read_json(path), catalog, d.forming, path.parent_path());
}

// Lambda-scales a case so its r_max becomes `r_max` (no-op when r_max <= 0).
FormingCase rescaled(const FormingCase& c, double r_max) {
    if (!(r_max > 0.0)) return c;
    return c.scaled(r_max / c.target.r_max_mm);
}

void write_formed_csv(const fs::path& path, const FormedGlass& f) {
    io::write_csv(path, {{"x_mm", "y_inner_mm", "y_outer_mm", "thickness_mm"},
                         {f.inner.xs, f.inner.ys, f.outer.ys, f.thickness_mm_at}});
}

json deviation_summary(const DeviationReport& r) {
    return {{"max_dev_inner_um", r.max_abs_inner_um},
            {"max_dev_outer_um", r.max_abs_outer_um},
            {"max_dev_thickness_um", r.max_abs_thickness_um}};
}

std::pair<Network, Network> load_models(const fs::path& dir, Manifest& m) {
    m.input(dir / "upper.json");
    m.input(dir / "lower.json");
    return {load_model(dir / "upper.json", SurfaceTag::Upper), load_model(dir / "lower.json", SurfaceTag::Lower)};
}

// ---------------------------------------------------------------------------
// commands

struct CommonCaseArgs {
    std::string case_path;
    std::string out;
    std::string materials;
};

int cmd_materials(const CommonCaseArgs& a, const Defaults& d, std::ostream& out) {
    const auto cat = catalog_for(a.materials, d);
    out << "glasses:\n";
    for (const auto& g : cat.glasses()) {
        out << "  " << g.name << "  Tg " << g.tg_c << " C  CTE " << g.cte_below_tg_per_c << " / "
            << g.cte_above_tg_per_c << " 1/C  E " << g.youngs_modulus_gpa << " GPa  nu " << g.poisson_ratio
            << "  WLF c1 " << g.wlf.c1 << " c2 " << g.wlf.c2 << " T0 " << g.wlf.reference_temperature_c
            << "  g(inf) " << 1.0 - g.prony.total_g() << "\n";
    }
    out << "molds:\n";
    for (const auto& m : cat.molds()) out << "  " << m.name << "  CTE " << m.cte_per_c << " 1/C\n";
    return kOk;
}

int cmd_simulate(const CommonCaseArgs& a, const Defaults& d, const std::vector<std::string>& args,
                 std::ostream& out) {
    Manifest man("simulate", args);
    const auto c = load_case(a.case_path, catalog_for(a.materials, d), d);
    man.input(a.case_path);
    man.config(case_to_json(c));
    const fs::path dir = a.out;
    const auto molds = design_initial_molds(c);
    const auto formed = simulate_forming(molds, c);
    const auto rep = compute_deviations(formed, c.target);
    const auto blank = blank_thickness(c.target);

    write_deviation_csv(dir / "deviations.csv", rep);
    write_formed_csv(dir / "formed.csv", formed);
    write_mold_csv(dir / "initial_molds.csv", molds);
    json summary = deviation_summary(rep);
    summary["scale_m"] = molds.scale_m;
    summary["residual_fraction"] =
        residual_fraction(c.schedule, c.target.glass.prony, c.target.glass.wlf, c.config.reduced_time_step_s);
    summary["blank_thickness_mm"] = blank.thickness_mm;
    summary["blank_within_limit"] = blank.within_limit;
    io::write_json(dir / "summary.json", summary);
    for (const char* f : {"deviations.csv", "formed.csv", "initial_molds.csv", "summary.json"}) man.output(dir / f);
    man.write(dir / "run_manifest.json");

    out << "max deviation: inner " << rep.max_abs_inner_um << " um, outer " << rep.max_abs_outer_um
        << " um, thickness " << rep.max_abs_thickness_um << " um\n";
    if (!blank.within_limit)
        out << "warning: blank thickness " << blank.thickness_mm << " mm exceeds 1.1 x product thickness\n";
    if (!c.target.thin_shell()) out << "warning: thickness / r_max above the thin-shell range\n";
    return kOk;
}

int cmd_design(const CommonCaseArgs& a, const Defaults& d, CompensationOptions opt,
               const std::vector<std::string>& args, std::ostream& out) {
    Manifest man("design", args);
    const auto c = load_case(a.case_path, catalog_for(a.materials, d), d);
    man.input(a.case_path);
    man.config({{"case", case_to_json(c)},
                {"tolerance_um", opt.tolerance_um},
                {"max_iters", opt.max_iters},
                {"relaxation", opt.relaxation}});
    const fs::path dir = a.out;
    const auto res = run_compensation(c, opt);

    write_mold_csv(dir / "initial_molds.csv", res.initial_molds);
    write_mold_csv(dir / "precision_molds.csv", res.precision_molds);
    write_fec_csv(dir / "fec.csv", res.fec_upper, res.fec_lower);
    write_deviation_csv(dir / "deviations.csv", res.final_report);
    io::write_json(dir / "history.json", history_to_json(res));
    for (const char* f : {"initial_molds.csv", "precision_molds.csv", "fec.csv", "deviations.csv", "history.json"})
        man.output(dir / f);
    man.extra()["converged"] = res.converged;
    man.write(dir / "run_manifest.json");

    for (std::size_t i = 0; i < res.history.size(); ++i) {
        const auto& h = res.history[i];
        out << "iteration " << i << ": inner " << h.max_inner_um << " um, outer " << h.max_outer_um
            << " um, thickness " << h.max_thickness_um << " um\n";
    }
    if (!res.converged) {
        out << "not converged after " << res.iterations << " updates\n";
        return kNotConverged;
    }
    out << "converged after " << res.iterations << " update(s)\n";
    return kOk;
}

int cmd_tolerance(const CommonCaseArgs& a, const Defaults& d, const CompensationOptions& copt, StudyOptions sopt,
                  const std::vector<std::string>& args, std::ostream& out) {
    Manifest man("tolerance-study", args);
    const auto c = load_case(a.case_path, catalog_for(a.materials, d), d);
    man.input(a.case_path);
    man.seed("base_seed", sopt.base_seed);
    man.config({{"case", case_to_json(c)},
                {"tolerances_um", sopt.tolerances_um},
                {"trials", sopt.trials},
                {"correlation_length_mm", sopt.correlation_length_mm},
                {"tolerance_um", copt.tolerance_um}});
    const auto res = run_compensation(c, copt);
    if (!res.converged) {
        out << "precision molds did not converge; no study run\n";
        return kNotConverged;
    }
    const auto rep = amplification_study(c, res.precision_molds, sopt);
    const fs::path dir = a.out;
    io::write_json(dir / "amplification.json", report_to_json(rep));
    write_trials_csv(dir / "trials.csv", rep);
    man.output(dir / "amplification.json");
    man.output(dir / "trials.csv");
    man.write(dir / "run_manifest.json");
    for (const auto& l : rep.levels) {
        out << "+-" << l.tolerance_um << " um: mean max dev " << l.mean_max_dev_um << " um, peak ratio "
            << l.mean_peak_ratio << " (max " << l.max_peak_ratio << "), correlation " << l.mean_correlation << ", "
            << l.trials_below_two << "/" << rep.trials_per_level << " trials below 2\n";
    }
    return kOk;
}

struct DatasetArgs {
    std::string space;
    std::size_t cases = 40;
    std::size_t rows_per_case = 0;
    std::uint64_t seed = 1;
    unsigned jobs = 1;
    std::string out;
    std::string materials;
};

int cmd_dataset(const DatasetArgs& a, const Defaults& d, const std::vector<std::string>& args, std::ostream& out) {
    Manifest man("dataset gen", args);
    DesignSpace space;
    space.forming = d.forming;
    if (!a.space.empty()) {
        from_json(io::read_json(a.space), space);
        man.input(a.space);
    }
    if (a.rows_per_case > 0) space.rows_per_case = a.rows_per_case;
    const auto cases = sample_design_space(space, a.cases, a.seed, catalog_for(a.materials, d));
    GenerateOptions g;
    g.rows_per_case = space.rows_per_case;
    g.x_range = space.x_range;
    g.compensation = d.compensation;
    g.seed = a.seed;
    g.jobs = a.jobs;
    const auto ds = generate_dataset(cases, g);

    const fs::path path = a.out;
    fs::path manifest_path = path;
    manifest_path.replace_extension(".manifest.json");
    fs::path run_path = path;
    run_path.replace_extension(".run.json");
    write_dataset_csv(path, ds.rows);
    json dm = manifest_to_json(ds);
    dm["design_space"] = space;
    io::write_json(manifest_path, dm);
    man.seed("seed", a.seed);
    man.config({{"design_space", space}, {"cases", a.cases}, {"tolerance_um", g.compensation.tolerance_um}});
    man.output(path);
    man.output(manifest_path);
    man.write(run_path);

    std::size_t converged = 0;
    for (const auto& c : ds.cases) converged += c.converged ? 1 : 0;
    out << ds.rows.size() << " rows from " << converged << " of " << ds.cases.size() << " converged cases\n";
    return kOk;
}

struct TrainArgs {
    std::string data;
    double split = 0.7;
    std::uint64_t seed = 1;
    std::string out;
    unsigned jobs = 1;
};

json report_json(const TrainReport& r, const Evaluation& test, std::span<const FeatureRow> test_rows) {
    std::size_t n = 0, ok = 0;
    for (std::size_t i = 0; i < test_rows.size(); ++i) {
        if (test_rows[i].X > kInteriorLimitX) continue;
        ++n;
        ok += test.abs_errors[i] <= kFecBarTolerance ? 1 : 0;
    }
    json j = {{"epochs_run", r.epochs_run},       {"best_epoch", r.best_epoch},
              {"train_mse", r.train_mse},         {"test_mse", r.test_mse},
              {"train_mse_raw", r.train_mse_raw}, {"test_mse_raw", r.test_mse_raw},
              {"train_r2", r.train_r2 ? json(*r.train_r2) : json(nullptr)},
              {"test_r2", r.test_r2 ? json(*r.test_r2) : json(nullptr)},
              {"test_interior_rows", n},
              {"test_interior_within_1e-4", n ? static_cast<double>(ok) / static_cast<double>(n) : 0.0}};
    return j;
}

int cmd_train(const TrainArgs& a, TrainConfig cfg, const std::vector<std::string>& args, std::ostream& out) {
    Manifest man("train", args);
    const auto rows = read_dataset_csv(a.data);
    man.input(a.data);
    const auto [train_rows, test_rows] = split_dataset(rows, a.split, a.seed);
    cfg.seed = a.seed;
    man.seed("seed", a.seed);
    man.config({{"train", cfg}, {"split", a.split}});

    auto fit = [&](SurfaceTag tag, std::uint64_t init_seed) {
        Network net = init_network(init_seed, tag);
        TrainReport rep = train(net, train_rows, test_rows, cfg);
        return std::make_pair(std::move(net), std::move(rep));
    };
    std::pair<Network, TrainReport> up, lo;
    if (a.jobs >= 2) {
        auto fu = std::async(std::launch::async, fit, SurfaceTag::Upper, a.seed);
        lo = fit(SurfaceTag::Lower, a.seed + 1);
        up = fu.get();
    } else {
        up = fit(SurfaceTag::Upper, a.seed);
        lo = fit(SurfaceTag::Lower, a.seed + 1);
    }

    const fs::path dir = a.out;
    save_model(up.first, dir / "upper.json");
    save_model(lo.first, dir / "lower.json");
    json report = {{"train_rows", train_rows.size()}, {"test_rows", test_rows.size()}};
    for (auto* p : {&up, &lo}) {
        const auto& [net, rep] = *p;
        const std::string tag = to_string(net.surface);
        const auto ev = test_rows.empty() ? Evaluation{} : evaluate(net, test_rows);
        report[tag] = report_json(rep, ev, test_rows);
        std::vector<double> epoch(rep.train_curve.size());
        for (std::size_t i = 0; i < epoch.size(); ++i) epoch[i] = static_cast<double>(i + 1);
        io::write_csv(dir / ("loss_" + tag + ".csv"), {{"epoch", "train_mse", "test_mse"},
                                                       {epoch, rep.train_curve, rep.test_curve}});
        man.output(dir / ("loss_" + tag + ".csv"));
        out << tag << ": " << rep.epochs_run << " epochs (best " << rep.best_epoch << "), test R2 "
            << (rep.test_r2 ? std::to_string(*rep.test_r2) : "n/a") << ", interior within 1e-4: "
            << report[tag]["test_interior_within_1e-4"].get<double>() << "\n";
    }
    io::write_json(dir / "train_report.json", report);
    man.output(dir / "upper.json");
    man.output(dir / "lower.json");
    man.output(dir / "train_report.json");
    man.write(dir / "run_manifest.json");
    return kOk;
}

struct ModelArgs {
    CommonCaseArgs common;
    std::string models;
    double r_max = 0.0;
};

int cmd_predict(const ModelArgs& a, const Defaults& d, const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err) {
    Manifest man("predict", args);
    const auto c = rescaled(load_case(a.common.case_path, catalog_for(a.common.materials, d), d), a.r_max);
    man.input(a.common.case_path);
    man.config(case_to_json(c));
    const auto [up, lo] = load_models(a.models, man);
    const auto pred = predict_fec(up, lo, c);
    for (const auto& w : pred.warnings) err << "warning: " << w << "\n";

    const fs::path dir = a.common.out;
    write_fec_csv(dir / "fec_pred.csv", pred.fec_upper, pred.fec_lower);
    write_mold_csv(dir / "predicted_molds.csv", apply_fec(design_initial_molds(c), pred.fec_upper, pred.fec_lower));
    man.output(dir / "fec_pred.csv");
    man.output(dir / "predicted_molds.csv");
    man.extra()["warnings"] = pred.warnings;
    man.write(dir / "run_manifest.json");
    out << "predicted FEC for " << c.name << " (r_max " << c.target.r_max_mm << " mm) written to " << dir.string()
        << "\n";
    return kOk;
}

int cmd_validate(const ModelArgs& a, const Defaults& d, const CompensationOptions& copt,
                 const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Manifest man("validate", args);
    const auto c = rescaled(load_case(a.common.case_path, catalog_for(a.common.materials, d), d), a.r_max);
    man.input(a.common.case_path);
    man.config({{"case", case_to_json(c)}, {"tolerance_um", copt.tolerance_um}});
    const auto [up, lo] = load_models(a.models, man);
    const auto pred = predict_fec(up, lo, c);
    for (const auto& w : pred.warnings) err << "warning: " << w << "\n";
    const auto oracle = run_compensation(c, copt);

    const double r = c.target.r_max_mm;
    const auto& xs = pred.fec_upper.xs;
    std::vector<double> X(xs.size()), eu(xs.size()), el(xs.size());
    std::size_t n = 0, ok = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        X[i] = xs[i] / r;
        eu[i] = (pred.fec_upper.ys[i] - oracle.fec_upper.ys[i]) / r;
        el[i] = (pred.fec_lower.ys[i] - oracle.fec_lower.ys[i]) / r;
        if (X[i] > kInteriorLimitX) continue;
        n += 2;
        ok += (std::abs(eu[i]) <= kFecBarTolerance ? 1 : 0) + (std::abs(el[i]) <= kFecBarTolerance ? 1 : 0);
    }
    const auto closed = compute_deviations(
        simulate_forming(apply_fec(oracle.initial_molds, pred.fec_upper, pred.fec_lower), c), c.target);

    const fs::path dir = a.common.out;
    io::write_csv(dir / "comparison.csv",
                  {{"x_mm", "X", "fec_upper_oracle_mm", "fec_upper_pred_mm", "fec_lower_oracle_mm",
                    "fec_lower_pred_mm", "err_upper_bar", "err_lower_bar"},
                   {xs, X, oracle.fec_upper.ys, pred.fec_upper.ys, oracle.fec_lower.ys, pred.fec_lower.ys, eu, el}});
    const double frac = static_cast<double>(ok) / static_cast<double>(n);
    json summary = {{"r_max_mm", r},
                    {"oracle_converged", oracle.converged},
                    {"oracle_iterations", oracle.iterations},
                    {"interior_points", n},
                    {"interior_within_1e-4", frac},
                    {"max_abs_err_upper_bar", max_abs(eu)},
                    {"max_abs_err_lower_bar", max_abs(el)},
                    {"closed_loop", deviation_summary(closed)},
                    {"warnings", pred.warnings}};
    io::write_json(dir / "validation.json", summary);
    man.output(dir / "comparison.csv");
    man.output(dir / "validation.json");
    man.write(dir / "run_manifest.json");

    out << "interior points within 1e-4: " << frac * 100.0 << " %; closed-loop max surface deviation "
        << closed.max_abs_surface_um() << " um\n";
    return oracle.converged ? kOk : kNotConverged;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Precision glass molding: forming simulation, mold compensation and FEC surrogate", "glassform"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    CommonCaseArgs common;
    app.add_option("--materials", common.materials, "Material catalog JSON overlaid on the built-ins");

    auto* materials = app.add_subcommand("materials", "Material catalog");
    auto* materials_list = materials->add_subcommand("list", "List glasses and mold materials");
    materials->require_subcommand(1);

    auto* simulate = app.add_subcommand("simulate", "Form a case with its initial molds; write deviations");
    simulate->add_option("case", common.case_path, "Case JSON")->required();
    simulate->add_option("--out", common.out, "Output directory")->required();

    double tol_um = -1.0;
    int max_iters = -1;
    double relaxation = -1.0;
    auto* design = app.add_subcommand("design", "Run the compensation loop; write precision molds and FEC");
    design->add_option("case", common.case_path, "Case JSON")->required();
    design->add_option("--tol-um", tol_um, "Surface deviation tolerance [um]");
    design->add_option("--max-iters", max_iters, "Maximum mold updates");
    design->add_option("--relaxation", relaxation, "Gain applied to each update, in (0, 1]");
    design->add_option("--out", common.out, "Output directory")->required();

    StudyOptions sopt;
    auto* tolerance = app.add_subcommand("tolerance-study", "Machining-error amplification study");
    tolerance->add_option("case", common.case_path, "Case JSON")->required();
    tolerance->add_option("--tols", sopt.tolerances_um, "Tolerance levels [um]")->delimiter(',');
    tolerance->add_option("--trials", sopt.trials, "Trials per tolerance level");
    tolerance->add_option("--seed", sopt.base_seed, "Base seed");
    tolerance->add_option("--corr-mm", sopt.correlation_length_mm, "Error correlation length [mm]");
    tolerance->add_option("--jobs", sopt.jobs, "Worker threads");
    tolerance->add_option("--tol-um", tol_um, "Tolerance of the precision-mold design [um]");
    tolerance->add_option("--out", common.out, "Output directory")->required();

    DatasetArgs dargs;
    auto* dataset = app.add_subcommand("dataset", "Training data");
    dataset->require_subcommand(1);
    auto* dataset_gen = dataset->add_subcommand("gen", "Sample designs, compensate each, write feature rows");
    dataset_gen->add_option("--space", dargs.space, "Design space JSON");
    dataset_gen->add_option("--cases", dargs.cases, "Number of design cases");
    dataset_gen->add_option("--rows-per-case", dargs.rows_per_case, "Rows per case (overrides the space file)");
    dataset_gen->add_option("--seed", dargs.seed, "Sampling seed");
    dataset_gen->add_option("--jobs", dargs.jobs, "Worker threads");
    dataset_gen->add_option("--out", dargs.out, "Dataset CSV")->required();

    TrainArgs targs;
    int epochs = -1, patience = -1;
    double lr = -1.0;
    std::size_t batch = 0;
    auto* train_cmd = app.add_subcommand("train", "Train the upper and lower FEC networks");
    train_cmd->add_option("--data", targs.data, "Dataset CSV")->required();
    train_cmd->add_option("--split", targs.split, "Train fraction (by case)");
    train_cmd->add_option("--seed", targs.seed, "Split, initialization and shuffling seed");
    train_cmd->add_option("--epochs", epochs, "Maximum epochs");
    train_cmd->add_option("--lr", lr, "Adam learning rate");
    train_cmd->add_option("--batch", batch, "Mini-batch size");
    train_cmd->add_option("--patience", patience, "Early-stop patience [epochs]");
    train_cmd->add_option("--jobs", targs.jobs, "Train both networks concurrently when >= 2");
    train_cmd->add_option("--out", targs.out, "Model directory")->required();

    ModelArgs margs;
    auto* predict = app.add_subcommand("predict", "Predict FEC profiles with trained networks");
    predict->add_option("case", common.case_path, "Case JSON")->required();
    predict->add_option("--models", margs.models, "Model directory")->required();
    predict->add_option("--r-max", margs.r_max, "Scale the case to this r_max [mm]");
    predict->add_option("--out", common.out, "Output directory")->required();

    auto* validate = app.add_subcommand("validate", "Compare predicted FEC with the compensation loop");
    validate->add_option("case", common.case_path, "Case JSON")->required();
    validate->add_option("--models", margs.models, "Model directory")->required();
    validate->add_option("--r-max", margs.r_max, "Scale the case to this r_max [mm]");
    validate->add_option("--tol-um", tol_um, "Oracle tolerance [um]");
    validate->add_option("--out", common.out, "Output directory")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        const Defaults defaults = load_defaults();
        CompensationOptions copt = defaults.compensation;
        if (tol_um >= 0.0) copt.tolerance_um = tol_um;
        if (max_iters >= 0) copt.max_iters = max_iters;
        if (relaxation >= 0.0) copt.relaxation = relaxation;

        if (materials_list->parsed()) return cmd_materials(common, defaults, out);
        if (simulate->parsed()) return cmd_simulate(common, defaults, args, out);
        if (design->parsed()) return cmd_design(common, defaults, copt, args, out);
        if (tolerance->parsed()) return cmd_tolerance(common, defaults, copt, sopt, args, out);
        if (dataset_gen->parsed()) {
            dargs.materials = common.materials;
            return cmd_dataset(dargs, defaults, args, out);
        }
        if (train_cmd->parsed()) {
            TrainConfig cfg = defaults.train;
            if (epochs > 0) cfg.max_epochs = epochs;
            if (patience > 0) cfg.early_stop_patience = patience;
            if (lr > 0.0) cfg.learning_rate = lr;
            if (batch > 0) cfg.batch_size = batch;
            return cmd_train(targs, cfg, args, out);
        }
        margs.common = common;
        if (predict->parsed()) return cmd_predict(margs, defaults, args, out, err);
        if (validate->parsed()) return cmd_validate(margs, defaults, copt, args, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    }
    err << app.help();
    return kUsage;
}

}  // namespace glassform::cli
