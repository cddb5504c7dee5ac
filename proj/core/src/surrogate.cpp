#include "glassform/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "glassform/error.hpp"
#include "glassform/io.hpp"
#include "glassform/numerics.hpp"

namespace glassform {

std::string to_string(SurfaceTag tag) { return tag == SurfaceTag::Upper ? "upper" : "lower"; }

SurfaceTag surface_tag_from_string(const std::string& s) {
    if (s == "upper") return SurfaceTag::Upper;
    if (s == "lower") return SurfaceTag::Lower;
    throw ValidationError("surface tag must be \"upper\" or \"lower\", got \"" + s + "\"");
}

// ---------------------------------------------------------------------------
// network

void Network::validate() const {
    if (layers.size() < 2) throw ValidationError("network: needs at least an input and an output layer");
    if (layers.back() != 1) throw ValidationError("network: output layer must have one neuron");
    for (auto n : layers)
        if (n == 0) throw ValidationError("network: empty layer");
    const std::size_t L = layers.size() - 1;
    if (weights.size() != L || biases.size() != L) throw ValidationError("network: parameter count mismatch");
    for (std::size_t l = 0; l < L; ++l)
        if (weights[l].size() != layers[l] * layers[l + 1] || biases[l].size() != layers[l + 1])
            throw ValidationError("network: layer " + std::to_string(l) + " has the wrong shape");
    if (input_mean.size() != layers[0] || input_std.size() != layers[0])
        throw ValidationError("network: input normalization has the wrong size");
    for (double s : input_std)
        if (!(s > 0.0)) throw ValidationError("network: input std must be positive");
    if (!(output_std > 0.0)) throw ValidationError("network: output std must be positive");
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < layers.size(); ++l) n += layers[l] * layers[l + 1] + layers[l + 1];
    return n;
}

Network init_network(std::uint64_t seed, SurfaceTag surface, const std::vector<std::size_t>& layers) {
    Network net;
    net.layers = layers;
    net.surface = surface;
    net.seed = seed;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
        const double scale = std::sqrt(2.0 / static_cast<double>(layers[l]));
        std::vector<double> w(layers[l] * layers[l + 1]);
        for (auto& v : w) v = scale * rng.normal();
        net.weights.push_back(std::move(w));
        net.biases.emplace_back(layers[l + 1], 0.0);
    }
    net.input_mean.assign(layers.front(), 0.0);
    net.input_std.assign(layers.front(), 1.0);
    net.validate();
    return net;
}

namespace {

// Activations of one pass, kept for backpropagation.
struct Workspace {
    std::vector<std::vector<double>> act;  // act[0] = normalized input
    std::vector<std::vector<double>> pre;

    explicit Workspace(const Network& net) {
        for (auto n : net.layers) {
            act.emplace_back(n, 0.0);
            pre.emplace_back(n, 0.0);
        }
    }
};

template <class Features>
void load_input(const Network& net, const Features& x, Workspace& ws) {
    for (std::size_t i = 0; i < net.layers[0]; ++i) ws.act[0][i] = (x[i] - net.input_mean[i]) / net.input_std[i];
}

double run(const Network& net, Workspace& ws) {
    const std::size_t L = net.layers.size() - 1;
    for (std::size_t l = 0; l < L; ++l) {
        const std::size_t in = net.layers[l];
        const std::size_t out = net.layers[l + 1];
        const double* w = net.weights[l].data();
        const double* a = ws.act[l].data();
        for (std::size_t j = 0; j < out; ++j) {
            double s = net.biases[l][j];
            for (std::size_t i = 0; i < in; ++i) s += w[j * in + i] * a[i];
            ws.pre[l + 1][j] = s;
            ws.act[l + 1][j] = (l + 1 < L) ? std::max(0.0, s) : s;
        }
    }
    return ws.act[L][0];
}

// Adds d(loss)/d(params) to g given d(loss)/d(output).
void backprop(const Network& net, Workspace& ws, double dout, Parameters& g, std::vector<double>& delta,
              std::vector<double>& next) {
    const std::size_t L = net.layers.size() - 1;
    delta.assign(1, dout);
    for (std::size_t l = L; l-- > 0;) {
        const std::size_t in = net.layers[l];
        const std::size_t out = net.layers[l + 1];
        const double* w = net.weights[l].data();
        const double* a = ws.act[l].data();
        double* gw = g.weights[l].data();
        for (std::size_t j = 0; j < out; ++j) {
            const double d = delta[j];
            g.biases[l][j] += d;
            for (std::size_t i = 0; i < in; ++i) gw[j * in + i] += d * a[i];
        }
        if (l == 0) break;
        next.assign(in, 0.0);
        for (std::size_t j = 0; j < out; ++j) {
            const double d = delta[j];
            for (std::size_t i = 0; i < in; ++i) next[i] += w[j * in + i] * d;
        }
        for (std::size_t i = 0; i < in; ++i)
            if (!(ws.pre[l][i] > 0.0)) next[i] = 0.0;
        delta.swap(next);
    }
}

Parameters zeros_like(const Network& net) {
    Parameters p;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        p.weights.emplace_back(net.weights[l].size(), 0.0);
        p.biases.emplace_back(net.biases[l].size(), 0.0);
    }
    return p;
}

double normalized_target(const Network& net, const FeatureRow& row) {
    return (net.target_of(row) - net.output_mean) / net.output_std;
}

double sample_loss(const Network& net, const FeatureRow& row, Workspace& ws) {
    load_input(net, row.features(), ws);
    const double e = run(net, ws) - normalized_target(net, row);
    return e * e;
}

}  // namespace

Prediction forward(const Network& net, std::span<const double> features) {
    if (features.size() != net.layers.front())
        throw ValidationError("forward: expected " + std::to_string(net.layers.front()) + " features");
    for (double f : features)
        if (!std::isfinite(f)) throw DomainError("forward: non-finite feature");
    Workspace ws(net);
    load_input(net, features, ws);
    Prediction p;
    p.normalized = run(net, ws);
    p.value = p.normalized * net.output_std + net.output_mean;
    return p;
}

// ---------------------------------------------------------------------------
// gradients

Parameters analytic_gradient(const Network& net, const FeatureRow& row) {
    Workspace ws(net);
    load_input(net, row.features(), ws);
    const double e = run(net, ws) - normalized_target(net, row);
    Parameters g = zeros_like(net);
    std::vector<double> delta, next;
    backprop(net, ws, 2.0 * e, g, delta, next);
    return g;
}

namespace {

// The finite-difference oracle runs in extended precision: the loss is
// piecewise quadratic in any single parameter, so the only error left in a
// central difference is cancellation, and 64-bit mantissas push it well below
// the check threshold.
struct WideParameters {
    std::vector<std::vector<long double>> weights;
    std::vector<std::vector<long double>> biases;
};

long double wide_loss(const Network& net, const WideParameters& p, const FeatureRow& row) {
    const auto x = row.features();
    std::vector<long double> act(net.layers[0]), next;
    for (std::size_t i = 0; i < act.size(); ++i)
        act[i] = (static_cast<long double>(x[i]) - net.input_mean[i]) / net.input_std[i];
    const std::size_t L = net.layers.size() - 1;
    for (std::size_t l = 0; l < L; ++l) {
        const std::size_t in = net.layers[l];
        next.assign(net.layers[l + 1], 0.0L);
        for (std::size_t j = 0; j < next.size(); ++j) {
            long double s = p.biases[l][j];
            for (std::size_t i = 0; i < in; ++i) s += p.weights[l][j * in + i] * act[i];
            next[j] = (l + 1 < L) ? std::max(0.0L, s) : s;
        }
        act.swap(next);
    }
    const long double t =
        (static_cast<long double>(net.target_of(row)) - net.output_mean) / static_cast<long double>(net.output_std);
    const long double e = act[0] - t;
    return e * e;
}

}  // namespace

Parameters numeric_gradient(const Network& net, const FeatureRow& row, double epsilon) {
    WideParameters p;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        p.weights.emplace_back(net.weights[l].begin(), net.weights[l].end());
        p.biases.emplace_back(net.biases[l].begin(), net.biases[l].end());
    }
    const long double eps = epsilon;
    auto central = [&](long double& param) {
        const long double saved = param;
        param = saved + eps;
        const long double up = wide_loss(net, p, row);
        param = saved - eps;
        const long double down = wide_loss(net, p, row);
        param = saved;
        return static_cast<double>((up - down) / (2.0L * eps));
    };
    Parameters g = zeros_like(net);
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        for (std::size_t k = 0; k < p.weights[l].size(); ++k) g.weights[l][k] = central(p.weights[l][k]);
        for (std::size_t k = 0; k < p.biases[l].size(); ++k) g.biases[l][k] = central(p.biases[l][k]);
    }
    return g;
}

double max_relative_error(const Parameters& a, const Parameters& n) {
    double worst = 0.0;
    auto cmp = [&](const std::vector<double>& x, const std::vector<double>& y) {
        if (x.size() != y.size()) throw ValidationError("max_relative_error: shape mismatch");
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double scale = std::max({std::abs(x[k]), std::abs(y[k]), 1e-6});
            worst = std::max(worst, std::abs(x[k] - y[k]) / scale);
        }
    };
    if (a.weights.size() != n.weights.size()) throw ValidationError("max_relative_error: shape mismatch");
    for (std::size_t l = 0; l < a.weights.size(); ++l) {
        cmp(a.weights[l], n.weights[l]);
        cmp(a.biases[l], n.biases[l]);
    }
    return worst;
}

double gradient_check(const Network& net, const FeatureRow& row, double epsilon) {
    if (!(epsilon >= 1e-7 && epsilon <= 1e-4)) throw ValidationError("gradient_check: epsilon must lie in [1e-7, 1e-4]");
    net.validate();
    return max_relative_error(analytic_gradient(net, row), numeric_gradient(net, row, epsilon));
}

// ---------------------------------------------------------------------------
// training

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ValidationError("train config: learning_rate must be positive");
    if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0 && adam_beta2 > 0.0 && adam_beta2 < 1.0))
        throw ValidationError("train config: Adam betas must lie in (0, 1)");
    if (!(adam_epsilon > 0.0)) throw ValidationError("train config: adam_epsilon must be positive");
    if (max_epochs < 1) throw ValidationError("train config: max_epochs must be >= 1");
    if (batch_size < 1) throw ValidationError("train config: batch_size must be >= 1");
    if (early_stop_patience < 1) throw ValidationError("train config: early_stop_patience must be >= 1");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
    j = {{"learning_rate", c.learning_rate}, {"adam_beta1", c.adam_beta1},
         {"adam_beta2", c.adam_beta2},       {"adam_epsilon", c.adam_epsilon},
         {"max_epochs", c.max_epochs},       {"batch_size", c.batch_size},
         {"early_stop_patience", c.early_stop_patience}, {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
    c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
    c.adam_epsilon = j.value("adam_epsilon", c.adam_epsilon);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.early_stop_patience = j.value("early_stop_patience", c.early_stop_patience);
    c.seed = j.value("seed", c.seed);
}

namespace {

void fit_normalization(Network& net, std::span<const FeatureRow> rows) {
    const std::size_t nf = net.layers.front();
    if (nf != kFeatureCount) throw ValidationError("train: input layer must have 6 neurons");
    const double n = static_cast<double>(rows.size());
    for (std::size_t f = 0; f < nf; ++f) {
        double mean = 0.0;
        for (const auto& r : rows) mean += r.features()[f];
        mean /= n;
        double var = 0.0;
        for (const auto& r : rows) {
            const double d = r.features()[f] - mean;
            var += d * d;
        }
        const double sd = std::sqrt(var / n);
        if (!(sd > 1e-12 * std::max(1.0, std::abs(mean))))
            throw ValidationError(std::string("train: feature ") + kFeatureNames[f] +
                                  " has zero spread in the training rows");
        net.input_mean[f] = mean;
        net.input_std[f] = sd;
    }
    double mean = 0.0;
    for (const auto& r : rows) mean += net.target_of(r);
    mean /= n;
    double var = 0.0;
    for (const auto& r : rows) {
        const double d = net.target_of(r) - mean;
        var += d * d;
    }
    const auto [lo, hi] = std::minmax_element(rows.begin(), rows.end(), [&](const auto& a, const auto& b) {
        return net.target_of(a) < net.target_of(b);
    });
    // a constant target needs no scaling; its mean is taken verbatim so the
    // normalized targets are exactly zero
    if (net.target_of(*lo) == net.target_of(*hi)) {
        net.output_mean = net.target_of(*lo);
        net.output_std = 1.0;
    } else {
        net.output_mean = mean;
        net.output_std = std::sqrt(var / n);
    }
}

double mean_loss(const Network& net, std::span<const FeatureRow> rows, Workspace& ws) {
    double s = 0.0;
    for (const auto& r : rows) s += sample_loss(net, r, ws);
    return s / static_cast<double>(rows.size());
}

}  // namespace

TrainReport train(Network& net, std::span<const FeatureRow> train_rows, std::span<const FeatureRow> test_rows,
                  const TrainConfig& cfg) {
    cfg.validate();
    net.validate();
    if (train_rows.empty()) throw ValidationError("train: no training rows");
    fit_normalization(net, train_rows);

    Workspace ws(net);
    Parameters grad = zeros_like(net), m = zeros_like(net), v = zeros_like(net);
    std::vector<double> delta, next;
    std::vector<std::size_t> order(train_rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(cfg.seed));

    TrainReport rep;
    Network best = net;
    double best_loss = std::numeric_limits<double>::infinity();
    int since_best = 0;
    long step = 0;
    double pow1 = 1.0, pow2 = 1.0;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            for (std::size_t l = 0; l < grad.weights.size(); ++l) {
                std::fill(grad.weights[l].begin(), grad.weights[l].end(), 0.0);
                std::fill(grad.biases[l].begin(), grad.biases[l].end(), 0.0);
            }
            for (std::size_t k = start; k < stop; ++k) {
                const auto& row = train_rows[order[k]];
                load_input(net, row.features(), ws);
                const double e = run(net, ws) - normalized_target(net, row);
                backprop(net, ws, 2.0 * e, grad, delta, next);
            }
            ++step;
            pow1 *= cfg.adam_beta1;
            pow2 *= cfg.adam_beta2;
            const double inv_batch = 1.0 / static_cast<double>(stop - start);
            const double c1 = 1.0 / (1.0 - pow1);
            const double c2 = 1.0 / (1.0 - pow2);
            auto update = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& mm,
                              std::vector<double>& vv) {
                for (std::size_t k = 0; k < p.size(); ++k) {
                    const double gk = g[k] * inv_batch;
                    mm[k] = cfg.adam_beta1 * mm[k] + (1.0 - cfg.adam_beta1) * gk;
                    vv[k] = cfg.adam_beta2 * vv[k] + (1.0 - cfg.adam_beta2) * gk * gk;
                    p[k] -= cfg.learning_rate * (mm[k] * c1) / (std::sqrt(vv[k] * c2) + cfg.adam_epsilon);
                }
            };
            for (std::size_t l = 0; l < grad.weights.size(); ++l) {
                update(net.weights[l], grad.weights[l], m.weights[l], v.weights[l]);
                update(net.biases[l], grad.biases[l], m.biases[l], v.biases[l]);
            }
        }
        const double tr = mean_loss(net, train_rows, ws);
        const double te = test_rows.empty() ? tr : mean_loss(net, test_rows, ws);
        rep.train_curve.push_back(tr);
        rep.test_curve.push_back(te);
        rep.epochs_run = epoch;
        if (!std::isfinite(tr)) throw ValidationError("train: loss diverged; lower the learning rate");
        if (te < best_loss) {
            best_loss = te;
            best = net;
            rep.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= cfg.early_stop_patience) {
            break;
        }
    }
    net = std::move(best);

    const auto tr = evaluate(net, train_rows);
    rep.train_mse = tr.mse;
    rep.train_mse_raw = tr.mse_raw;
    rep.train_r2 = tr.r2;
    if (!test_rows.empty()) {
        const auto te = evaluate(net, test_rows);
        rep.test_mse = te.mse;
        rep.test_mse_raw = te.mse_raw;
        rep.test_r2 = te.r2;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// evaluation and inference

std::optional<double> r_squared(std::span<const double> target, std::span<const double> predicted) {
    if (target.size() != predicted.size() || target.empty())
        throw ValidationError("r_squared: needs matching, non-empty series");
    const auto [lo, hi] = std::minmax_element(target.begin(), target.end());
    if (*lo == *hi) return std::nullopt;
    const double mean = std::accumulate(target.begin(), target.end(), 0.0) / static_cast<double>(target.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        ss_res += (target[i] - predicted[i]) * (target[i] - predicted[i]);
        ss_tot += (target[i] - mean) * (target[i] - mean);
    }
    return 1.0 - ss_res / ss_tot;
}

Evaluation evaluate(const Network& net, std::span<const FeatureRow> rows) {
    if (rows.empty()) throw ValidationError("evaluate: no rows");
    net.validate();
    Workspace ws(net);
    Evaluation ev;
    std::vector<double> target, predicted;
    for (const auto& row : rows) {
        load_input(net, row.features(), ws);
        const double z = run(net, ws);
        const double zt = normalized_target(net, row);
        ev.mse += (z - zt) * (z - zt);
        const double p = z * net.output_std + net.output_mean;
        const double t = net.target_of(row);
        ev.mse_raw += (p - t) * (p - t);
        ev.abs_errors.push_back(std::abs(p - t));
        target.push_back(t);
        predicted.push_back(p);
    }
    const double n = static_cast<double>(rows.size());
    ev.mse /= n;
    ev.mse_raw /= n;
    ev.r2 = r_squared(target, predicted);
    return ev;
}

FecPrediction predict_fec(const Network& upper, const Network& lower, const FormingCase& c) {
    if (upper.surface != SurfaceTag::Upper || lower.surface != SurfaceTag::Lower)
        throw ValidationError("predict_fec: networks must be tagged upper and lower");
    upper.validate();
    lower.validate();
    c.validate();
    const auto grid = c.target_grid();
    const auto rows = case_features(c, grid);
    const double r = c.target.r_max_mm;
    FecPrediction out;
    out.fec_upper.xs = grid;
    out.fec_lower.xs = grid;
    std::array<bool, kFeatureCount> flagged{};
    for (const auto& row : rows) {
        const auto f = row.features();
        for (std::size_t k = 0; k < kFeatureCount; ++k) {
            const double zu = std::abs(f[k] - upper.input_mean[k]) / upper.input_std[k];
            const double zl = std::abs(f[k] - lower.input_mean[k]) / lower.input_std[k];
            if (!flagged[k] && std::max(zu, zl) > 6.0) {
                flagged[k] = true;
                std::ostringstream msg;
                msg << "feature " << kFeatureNames[k] << " = " << f[k] << " at x = " << row.x_mm
                    << " mm lies more than 6 std from the training data (extrapolation)";
                out.warnings.push_back(msg.str());
            }
        }
        out.fec_upper.ys.push_back(forward(upper, f).value * r);
        out.fec_lower.ys.push_back(forward(lower, f).value * r);
    }
    return out;
}

// ---------------------------------------------------------------------------
// persistence

nlohmann::json model_to_json(const Network& net) {
    return {{"layers", net.layers},
            {"activation", "relu"},
            {"weights", net.weights},
            {"biases", net.biases},
            {"input_mean", net.input_mean},
            {"input_std", net.input_std},
            {"output_mean", net.output_mean},
            {"output_std", net.output_std},
            {"surface", to_string(net.surface)},
            {"seed", net.seed},
            {"schema_version", 1}};
}

Network model_from_json(const nlohmann::json& j) {
    Network net;
    try {
        if (j.at("schema_version").get<int>() != 1) throw LoadError("model: unsupported schema_version");
        if (j.at("activation").get<std::string>() != "relu") throw LoadError("model: activation must be relu");
        net.layers = j.at("layers").get<std::vector<std::size_t>>();
        if (net.layers != kStandardLayers) throw LoadError("model: layer sizes differ from the fixed architecture");
        net.weights = j.at("weights").get<std::vector<std::vector<double>>>();
        net.biases = j.at("biases").get<std::vector<std::vector<double>>>();
        net.input_mean = j.at("input_mean").get<std::vector<double>>();
        net.input_std = j.at("input_std").get<std::vector<double>>();
        net.output_mean = j.at("output_mean").get<double>();
        net.output_std = j.at("output_std").get<double>();
        net.surface = surface_tag_from_string(j.at("surface").get<std::string>());
        net.seed = j.at("seed").get<std::uint64_t>();
        net.validate();
    } catch (const LoadError&) {
        throw;
    } catch (const std::exception& e) {
        throw LoadError(std::string("model: ") + e.what());
    }
    return net;
}

void save_model(const Network& net, const std::filesystem::path& path) {
    net.validate();
    io::write_text(path, model_to_json(net).dump() + "\n");
}

Network load_model(const std::filesystem::path& path, std::optional<SurfaceTag> expected) {
    std::ifstream in(path);
    if (!in) throw LoadError("model: cannot open " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw LoadError("model: " + path.string() + " is not valid JSON (" + e.what() + ")");
    }
    Network net = model_from_json(j);
    if (expected && net.surface != *expected)
        throw LoadError("model: " + path.string() + " is tagged " + to_string(net.surface) + ", expected " +
                        to_string(*expected));
    return net;
}

}  // namespace glassform
