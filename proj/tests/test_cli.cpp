#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "glassform/compensation.hpp"
#include "glassform/surrogate.hpp"

namespace fs = std::filesystem;
using namespace glassform;

namespace {

const fs::path kSource = GLASSFORM_SOURCE_DIR;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

fs::path scratch(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("glassform_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string case_file(const std::string& name) { return (kSource / "cases" / name).string(); }

class EnvGuard {
public:
    explicit EnvGuard(const std::string& value) { setenv("GLASSFORM_CONFIG", value.c_str(), 1); }
    ~EnvGuard() { unsetenv("GLASSFORM_CONFIG"); }
};

}  // namespace

TEST(Cli, MaterialsList) {
    const auto r = run({"materials", "list"});
    EXPECT_EQ(r.code, cli::kOk);
    EXPECT_NE(r.out.find("GG"), std::string::npos);
    EXPECT_NE(r.out.find("glassy_carbon"), std::string::npos);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run({}).code, cli::kUsage);
    EXPECT_EQ(run({"design"}).code, cli::kUsage);
    EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
    EXPECT_EQ(run({"--version"}).code, cli::kOk);
}

TEST(Cli, MissingCaseFileNamesThePath) {
    const auto dir = scratch("missing");
    const auto r = run({"design", (dir / "nope.json").string(), "--out", dir.string()});
    EXPECT_EQ(r.code, cli::kValidation);
    EXPECT_NE(r.err.find("nope.json"), std::string::npos) << r.err;
}

TEST(Cli, InvalidCaseIsAValidationError) {
    const auto dir = scratch("invalid");
    std::ofstream(dir / "bad.json") << R"({"surface": {"c": 0.1, "k": 0, "a": [], "r_max_mm": 15}, "thickness_mm": 0.7})";
    const auto r = run({"simulate", (dir / "bad.json").string(), "--out", dir.string()});
    EXPECT_EQ(r.code, cli::kValidation);
}

TEST(Cli, SimulateWritesDeviations) {
    const auto dir = scratch("simulate");
    const auto r = run({"simulate", case_file("cover_glass.json"), "--out", dir.string()});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_EQ(slurp(dir / "deviations.csv").substr(0, 48), "x_mm,dev_inner_um,dev_outer_um,dev_thickness_um\n");
    const auto summary = read_json(dir / "summary.json");
    EXPECT_GT(summary.at("max_dev_inner_um").get<double>(), 20.0);
    EXPECT_TRUE(fs::exists(dir / "run_manifest.json"));
}

TEST(Cli, DesignConvergesAndIsDeterministic) {
    const auto a = scratch("design_a");
    const auto b = scratch("design_b");
    const auto ra = run({"design", case_file("cover_glass.json"), "--out", a.string()});
    const auto rb = run({"design", case_file("cover_glass.json"), "--out", b.string()});
    ASSERT_EQ(ra.code, cli::kOk) << ra.err;
    ASSERT_EQ(rb.code, cli::kOk);
    const auto h = read_json(a / "history.json");
    EXPECT_LT(h.at("history").back().at("max_dev_inner_um").get<double>(), 2.0);
    for (const char* f : {"initial_molds.csv", "precision_molds.csv", "fec.csv", "deviations.csv", "history.json"})
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    const auto man = read_json(a / "run_manifest.json");
    EXPECT_EQ(man.at("command"), "design");
    EXPECT_EQ(man.at("config_hash"), read_json(b / "run_manifest.json").at("config_hash"));
}

TEST(Cli, DesignReportsNonConvergence) {
    const auto dir = scratch("design_nc");
    const auto r = run({"design", case_file("cover_glass.json"), "--max-iters", "0", "--out", dir.string()});
    EXPECT_EQ(r.code, cli::kNotConverged);
    EXPECT_FALSE(read_json(dir / "history.json").at("converged").get<bool>());
}

TEST(Cli, ToleranceStudy) {
    const auto dir = scratch("tolerance");
    const auto r = run({"tolerance-study", case_file("cover_glass.json"), "--trials", "3", "--seed", "4", "--out",
                        dir.string()});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    const auto j = read_json(dir / "amplification.json");
    EXPECT_EQ(j.at("levels").size(), 3u);
    EXPECT_EQ(slurp(dir / "trials.csv").substr(0, 12), "tolerance_um");
}

TEST(Cli, DatasetTrainPredictValidate) {
    const auto dir = scratch("pipeline");
    const auto data = (dir / "rows.csv").string();
    auto r = run({"dataset", "gen", "--cases", "12", "--rows-per-case", "5", "--seed", "2", "--out", data});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_TRUE(fs::exists(dir / "rows.manifest.json"));
    const auto models = (dir / "models").string();
    r = run({"train", "--data", data, "--epochs", "30", "--seed", "3", "--out", models});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_NO_THROW(load_model(dir / "models" / "upper.json", SurfaceTag::Upper));
    EXPECT_NO_THROW(load_model(dir / "models" / "lower.json", SurfaceTag::Lower));

    const auto models2 = (dir / "models2").string();
    ASSERT_EQ(run({"train", "--data", data, "--epochs", "30", "--seed", "3", "--out", models2}).code, cli::kOk);
    EXPECT_EQ(slurp(dir / "models" / "upper.json"), slurp(dir / "models2" / "upper.json"));
    EXPECT_EQ(slurp(dir / "models" / "lower.json"), slurp(dir / "models2" / "lower.json"));

    r = run({"predict", case_file("midrange.json"), "--models", models, "--r-max", "40", "--out",
             (dir / "pred").string()});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_TRUE(fs::exists(dir / "pred" / "fec_pred.csv"));

    r = run({"validate", case_file("midrange.json"), "--models", models, "--out", (dir / "val").string()});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    const auto v = read_json(dir / "val" / "validation.json");
    EXPECT_GT(v.at("interior_points").get<int>(), 0);

    r = run({"predict", case_file("midrange.json"), "--models", (dir / "nowhere").string(), "--out",
             (dir / "pred").string()});
    EXPECT_EQ(r.code, cli::kValidation);
}

TEST(Cli, ShippedDefaultsMatchBuiltIns) {
    const auto j = read_json(kSource / "config" / "default.json");
    EXPECT_EQ(j.at("forming"), nlohmann::json(FormingConfig{}));
    const CompensationOptions c;
    EXPECT_EQ(j.at("compensation").at("tolerance_um").get<double>(), c.tolerance_um);
    EXPECT_EQ(j.at("compensation").at("max_iters").get<int>(), c.max_iters);
    EXPECT_EQ(j.at("compensation").at("relaxation").get<double>(), c.relaxation);
    auto train = j.at("train").get<TrainConfig>();
    EXPECT_EQ(nlohmann::json(train), nlohmann::json(TrainConfig{}));
}

TEST(Cli, EnvironmentDefaultsAndPrecedence) {
    const auto dir = scratch("env");
    std::ofstream(dir / "cfg.json") << R"({"forming": {"springback_beta": 0.0, "springback_gamma": 0.0, "thinning_eta": 0.0},
                                           "compensation": {"tolerance_um": 0.001, "max_iters": 0}})";
    {
        EnvGuard env((dir / "cfg.json").string());
        // the env file switches springback off
        ASSERT_EQ(run({"simulate", case_file("cover_glass.json"), "--out", (dir / "sim").string()}).code, cli::kOk);
        EXPECT_LT(read_json(dir / "sim" / "summary.json").at("max_dev_inner_um").get<double>(), 0.1);

        // a case-level override wins over the env file
        auto doc = read_json(case_file("cover_glass.json"));
        doc["forming"] = {{"springback_beta", 4.5}, {"springback_gamma", 3.0}};
        std::ofstream(dir / "case.json") << doc.dump();
        ASSERT_EQ(run({"simulate", (dir / "case.json").string(), "--out", (dir / "sim2").string()}).code, cli::kOk);
        EXPECT_GT(read_json(dir / "sim2" / "summary.json").at("max_dev_inner_um").get<double>(), 20.0);

        // flags win over both
        EXPECT_EQ(run({"design", (dir / "case.json").string(), "--out", (dir / "d1").string()}).code,
                  cli::kNotConverged);
        EXPECT_EQ(run({"design", (dir / "case.json").string(), "--max-iters", "5", "--tol-um", "2", "--out",
                       (dir / "d2").string()})
                      .code,
                  cli::kOk);
    }
    {
        EnvGuard env((dir / "absent.json").string());
        const auto r = run({"materials", "list"});
        EXPECT_EQ(r.code, cli::kValidation);
        EXPECT_NE(r.err.find("absent.json"), std::string::npos);
    }
}
