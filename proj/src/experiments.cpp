#include "dsopt/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <stdexcept>

#include "dsopt/loss.hpp"
#include "dsopt/text.hpp"

namespace dsopt {

std::string experiment_kind_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::regress1d: return "regress1d";
        case ExperimentKind::mnist_cosine: return "mnist-cosine";
        case ExperimentKind::oracle_verify: return "oracle-verify";
    }
    return "regress1d";
}

ExperimentKind experiment_kind_from_name(const std::string& name) {
    if (name == "regress1d") return ExperimentKind::regress1d;
    if (name == "mnist-cosine") return ExperimentKind::mnist_cosine;
    if (name == "oracle-verify") return ExperimentKind::oracle_verify;
    throw std::invalid_argument("unknown experiment '" + name + "' (expected regress1d, mnist-cosine or oracle-verify)");
}

MixtureBasis BasisSpec::build(std::size_t input_dim) const {
    if (kind == "angle-triangle") return make_angle_basis(n);
    if (kind == "gauss-uniform") {
        const std::vector<double> grid = lambdas.empty() ? lambda_grid(lambda_min, lambda_max, n, geometric) : lambdas;
        return make_gauss_uniform_basis(grid, input_dim);
    }
    throw std::invalid_argument("unknown basis kind '" + kind + "'");
}

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "experiment", "seed", "output_dir",
        "basis.kind", "basis.n", "basis.lambda_min", "basis.lambda_max", "basis.spacing", "basis.lambdas",
        "train.R", "train.S", "train.k_max", "train.lr", "train.tol", "train.mode", "train.node_count",
        "train.threads", "train.predict_R",
        "target.K", "target.t", "target.seed",
        "data.train_size", "data.test_size", "data.train_seed", "data.test_seed", "data.train_images",
        "data.train_labels", "data.test_images", "data.test_labels", "data.subset_seed",
        "inner.ridge", "inner.epochs", "inner.lr", "inner.batch",
        "baseline.sigma_a", "baseline.lr_a", "baseline.lr_theta", "baseline.batch", "baseline.max_steps",
        "baseline.leaky_slope", "baseline.log_every", "baseline.scale", "baseline.epochs", "baseline.lr",
        "sweep.results", "sweep.",
        "verify.fixtures", "verify.random_instances", "verify.convexity_trials", "verify.linear_trials",
        "verify.mc_repeats",
    };
    return keys;
}

std::size_t get_size(const Config& c, const std::string& key, std::size_t fallback) {
    return static_cast<std::size_t>(c.get_uint(key, fallback));
}

std::vector<std::filesystem::path> expand_fixtures(const Config& c, const std::vector<std::string>& entries) {
    std::vector<std::filesystem::path> out;
    for (const auto& e : entries) {
        const auto p = c.resolve_path(e);
        if (std::filesystem::is_directory(p)) {
            std::vector<std::filesystem::path> found;
            for (const auto& f : std::filesystem::directory_iterator(p)) {
                if (f.path().extension() == ".inst") found.push_back(f.path());
            }
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else {
            out.push_back(p);
        }
    }
    return out;
}

}  // namespace

ExperimentConfig experiment_from_config(const Config& c) {
    c.reject_unknown(known_keys());
    ExperimentConfig e;
    auto wrap = [&c](const std::string& key, auto&& fn) {
        try {
            fn();
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& ex) {
            c.fail(key, ex.what());
        }
    };
    wrap("experiment", [&] { e.kind = experiment_kind_from_name(c.get_string("experiment", "regress1d")); });
    const bool mnist = e.kind == ExperimentKind::mnist_cosine;
    e.seed = c.get_uint("seed", 0);
    e.output_dir = c.resolve_path(c.get_string("output_dir", "out"));
    e.config_hash = c.hash();

    e.basis.kind = c.get_string("basis.kind", mnist ? "gauss-uniform" : "angle-triangle");
    e.basis.n = get_size(c, "basis.n", mnist ? 5 : 10);
    e.basis.lambda_min = c.get_real("basis.lambda_min", 1.0);
    e.basis.lambda_max = c.get_real("basis.lambda_max", 20.0);
    const auto spacing = c.get_string("basis.spacing", "geometric");
    if (spacing != "geometric" && spacing != "linear") {
        c.fail("basis.spacing", "expected geometric or linear");
    }
    e.basis.geometric = spacing == "geometric";
    e.basis.lambdas = c.get_reals("basis.lambdas", {});
    if (!e.basis.lambdas.empty()) {
        if (c.has("basis.n") && e.basis.n != e.basis.lambdas.size()) {
            c.fail("basis.n", "disagrees with the length of 'basis.lambdas'");
        }
        e.basis.n = e.basis.lambdas.size();
    }
    if (e.basis.kind != "angle-triangle" && e.basis.kind != "gauss-uniform") {
        c.fail("basis.kind", "expected angle-triangle or gauss-uniform");
    }

    e.train.R = get_size(c, "train.R", 20);
    e.train.S = get_size(c, "train.S", 1);
    e.train.k_max = get_size(c, "train.k_max", 100);
    e.train.lr = c.get_real("train.lr", 0.1);
    e.train.tol = c.get_real("train.tol", 0.0);
    wrap("train.mode", [&] { e.train.mode = draw_mode_from_name(c.get_string("train.mode", mnist ? "joint" : "product")); });
    e.train.node_count = get_size(c, "train.node_count", mnist ? 100 : 50);
    e.train.threads = get_size(c, "train.threads", 1);
    e.train.seed = e.seed;
    e.predict_R = get_size(c, "train.predict_R", 20);
    if (e.train.R == 0) c.fail("train.R", "must be at least 1");
    if (e.train.S == 0) c.fail("train.S", "must be at least 1");
    if (!(e.train.lr > 0.0) || !std::isfinite(e.train.lr)) c.fail("train.lr", "must be positive");
    if (!(e.train.tol >= 0.0)) c.fail("train.tol", "must be >= 0");
    if (e.train.node_count == 0) c.fail("train.node_count", "must be at least 1");
    wrap("train", [&] { e.train.validate(); });
    if (e.predict_R == 0) c.fail("train.predict_R", "must be positive");

    e.target.K = get_size(c, "target.K", 10);
    e.target.t = c.get_real("target.t", 5.0);
    e.target.seed = c.get_uint("target.seed", 0);
    if (e.target.K == 0) c.fail("target.K", "must be at least 1");

    e.regression.train_size = get_size(c, "data.train_size", mnist ? 5000 : 1000);
    e.regression.test_size = get_size(c, "data.test_size", 1000);
    e.regression.train_seed = c.get_uint("data.train_seed", 1);
    e.regression.test_seed = c.get_uint("data.test_seed", 2);
    e.mnist.train_size = e.regression.train_size;
    e.mnist.test_size = e.regression.test_size;
    if (c.has("data.subset_seed")) e.mnist.subset_seed = c.get_uint("data.subset_seed", 0);
    if (c.has("data.train_images")) e.mnist.train_images = c.resolve_path(c.get_string("data.train_images", ""));
    if (c.has("data.train_labels")) e.mnist.train_labels = c.resolve_path(c.get_string("data.train_labels", ""));
    if (c.has("data.test_images")) e.mnist.test_images = c.resolve_path(c.get_string("data.test_images", ""));
    if (c.has("data.test_labels")) e.mnist.test_labels = c.resolve_path(c.get_string("data.test_labels", ""));
    if (e.regression.train_size == 0) c.fail("data.train_size", "must be positive");

    e.ridge = c.get_real("inner.ridge", kDefaultRidge);
    if (!(e.ridge >= 0.0)) c.fail("inner.ridge", "must be >= 0");
    e.inner.epochs = get_size(c, "inner.epochs", 2);
    e.inner.lr = c.get_real("inner.lr", 1e-3);
    e.inner.batch = get_size(c, "inner.batch", 100);
    if (e.inner.batch == 0) c.fail("inner.batch", "must be positive");

    e.baseline1d.sigma_a = c.get_real("baseline.sigma_a", 1.0);
    e.baseline1d.lr_a = c.get_real("baseline.lr_a", 1e-3);
    e.baseline1d.lr_theta = c.get_real("baseline.lr_theta", 1e-3);
    e.baseline1d.batch = get_size(c, "baseline.batch", mnist ? 100 : 200);
    e.baseline1d.max_steps = get_size(c, "baseline.max_steps", e.baseline1d.max_steps);
    e.baseline1d.leaky_slope = c.get_real("baseline.leaky_slope", 0.01);
    e.baseline1d.log_every = get_size(c, "baseline.log_every", 1000);
    e.baseline1d.seed = e.seed;
    e.baseline_mnist.scale = c.get_real("baseline.scale", 1.0);
    e.baseline_mnist.epochs = get_size(c, "baseline.epochs", 30);
    e.baseline_mnist.lr = c.get_real("baseline.lr", 1e-3);
    e.baseline_mnist.batch = e.baseline1d.batch;
    e.baseline_mnist.seed = e.seed;
    wrap("baseline", [&] {
        if (mnist) {
            e.baseline_mnist.validate();
        } else {
            e.baseline1d.validate();
        }
    });

    e.sweep_results = c.get_string("sweep.results", "sweep.csv");
    for (const auto& key : c.keys()) {
        if (!key.starts_with("sweep.") || key == "sweep.results") continue;
        SweepAxis axis{key.substr(6), c.get_reals(key, {})};
        if (axis.values.empty()) c.fail(key, "empty grid");
        wrap(key, [&] {
            if (mnist) {
                BaselineConfigMnist probe = e.baseline_mnist;
                apply_axis_mnist(probe, axis.name, axis.values.front());
            } else {
                BaselineConfig1D probe = e.baseline1d;
                apply_axis_1d(probe, axis.name, axis.values.front());
            }
        });
        e.sweep_axes.push_back(std::move(axis));
    }

    e.verify.fixtures = expand_fixtures(c, c.get_strings("verify.fixtures", {}));
    e.verify.random_instances = get_size(c, "verify.random_instances", 20);
    e.verify.convexity_trials = get_size(c, "verify.convexity_trials", 500);
    e.verify.linear_trials = get_size(c, "verify.linear_trials", 100);
    e.verify.mc_repeats = get_size(c, "verify.mc_repeats", 10000);
    e.verify.seed = e.seed;
    return e;
}

void check_input_paths(const ExperimentConfig& config) {
    auto need = [](const std::filesystem::path& p, const std::string& key) {
        if (p.empty()) throw ConfigError("<config>", 0, "missing required key '" + key + "'");
        if (!std::filesystem::exists(p)) throw ConfigError("<config>", 0, "'" + key + "': no such file " + p.string());
    };
    if (config.kind == ExperimentKind::mnist_cosine) {
        need(config.mnist.train_images, "data.train_images");
        need(config.mnist.train_labels, "data.train_labels");
        need(config.mnist.test_images, "data.test_images");
        need(config.mnist.test_labels, "data.test_labels");
    }
    for (const auto& f : config.verify.fixtures) need(f, "verify.fixtures");
}

RegressionSplits make_regression_splits(const TargetSpec& target, const RegressionDataSpec& spec) {
    RegressionSplits s;
    s.target = gen_target(target.K, target.t, target.seed);
    s.train = sample_regression(s.target, spec.train_size, spec.train_seed);
    s.test = sample_regression(s.target, spec.test_size, spec.test_seed);
    return s;
}

ClassificationSplits load_mnist_splits(const MnistDataSpec& spec) {
    ClassificationSplits s;
    s.train = subset(load_mnist_idx(spec.train_images, spec.train_labels), spec.train_size, spec.subset_seed);
    s.test = subset(load_mnist_idx(spec.test_images, spec.test_labels), spec.test_size, spec.subset_seed);
    return s;
}

namespace {

Evaluation evaluate(const ModelSampler& sampler, const TrainOutput& out, const ExperimentConfig& config,
                    const Eigen::MatrixXd& inputs, const Eigen::VectorXd& labels, const LossFunctional& loss) {
    const Prediction p = predict(sampler, out.mixture.alpha, out.mixture.mode, inputs, config.predict_R, config.seed,
                                 config.train.threads);
    Evaluation e;
    e.loss = loss.value(p.mean, labels);
    if (p.mean.cols() > 1) e.accuracy = classification_accuracy(p.mean, labels);
    return e;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

DistRun run_regress1d_dist(const ExperimentConfig& config, const RegressionSplits& splits,
                           std::optional<SimplexVector> alpha0) {
    const auto start = std::chrono::steady_clock::now();
    const AngleNetSampler sampler(config.basis.build(1), config.train.node_count, splits.train, config.ridge);
    const EmpiricalL2 loss;
    DistRun run{train(config.train, sampler, loss, std::move(alpha0)), {}, {}, 0.0};
    run.output.mixture.provenance = mixture_provenance(config);
    run.train_eval = evaluate(sampler, run.output, config, splits.train.input_matrix(), splits.train.labels, loss);
    run.test_eval = evaluate(sampler, run.output, config, splits.test.input_matrix(), splits.test.labels, loss);
    run.wall_seconds = seconds_since(start);
    return run;
}

DistRun run_mnist_dist(const ExperimentConfig& config, const ClassificationSplits& splits,
                       std::optional<SimplexVector> alpha0) {
    const auto start = std::chrono::steady_clock::now();
    const CosineNetSampler sampler(config.basis.build(static_cast<std::size_t>(splits.train.inputs.cols())),
                                   config.train.node_count, splits.train, config.inner);
    const SoftmaxCrossEntropy loss(splits.train.class_count);
    DistRun run{train(config.train, sampler, loss, std::move(alpha0)), {}, {}, 0.0};
    run.output.mixture.provenance = mixture_provenance(config);
    run.train_eval = evaluate(sampler, run.output, config, splits.train.inputs, splits.train.labels, loss);
    run.test_eval = evaluate(sampler, run.output, config, splits.test.inputs, splits.test.labels, loss);
    run.wall_seconds = seconds_since(start);
    return run;
}

std::map<std::string, std::string> mixture_provenance(const ExperimentConfig& config) {
    std::map<std::string, std::string> m;
    m["experiment"] = experiment_kind_name(config.kind);
    m["config_hash"] = config.config_hash;
    m["data.train_size"] = std::to_string(config.regression.train_size);
    if (config.kind == ExperimentKind::mnist_cosine) {
        m["data.train_images"] = std::filesystem::absolute(config.mnist.train_images).string();
        m["data.train_labels"] = std::filesystem::absolute(config.mnist.train_labels).string();
        if (config.mnist.subset_seed) m["data.subset_seed"] = std::to_string(*config.mnist.subset_seed);
        m["inner.epochs"] = std::to_string(config.inner.epochs);
        m["inner.lr"] = format_real(config.inner.lr);
        m["inner.batch"] = std::to_string(config.inner.batch);
    } else {
        m["target.K"] = std::to_string(config.target.K);
        m["target.t"] = format_real(config.target.t);
        m["target.seed"] = std::to_string(config.target.seed);
        m["data.train_seed"] = std::to_string(config.regression.train_seed);
        m["inner.ridge"] = format_real(config.ridge);
    }
    return m;
}

std::unique_ptr<ModelSampler> sampler_for_mixture(const TrainedMixture& mixture) {
    auto get = [&mixture](const std::string& key) -> const std::string& {
        const auto it = mixture.provenance.find(key);
        if (it == mixture.provenance.end()) throw std::runtime_error("mixture file lacks metadata '" + key + "'");
        return it->second;
    };
    if (mixture.model_kind == "angle-relu") {
        const TargetSpec target{static_cast<std::size_t>(parse_uint(get("target.K"))), parse_real(get("target.t")),
                                parse_uint(get("target.seed"))};
        RegressionDataSpec spec;
        spec.train_size = static_cast<std::size_t>(parse_uint(get("data.train_size")));
        spec.train_seed = parse_uint(get("data.train_seed"));
        const auto data = sample_regression(gen_target(target.K, target.t, target.seed), spec.train_size, spec.train_seed);
        return std::make_unique<AngleNetSampler>(mixture.basis, mixture.node_count, data, parse_real(get("inner.ridge")));
    }
    if (mixture.model_kind == "cosine-feature") {
        std::optional<std::uint64_t> subset_seed;
        if (mixture.provenance.contains("data.subset_seed")) subset_seed = parse_uint(get("data.subset_seed"));
        const auto data = subset(load_mnist_idx(get("data.train_images"), get("data.train_labels")),
                                 static_cast<std::size_t>(parse_uint(get("data.train_size"))), subset_seed);
        AdamConfig inner;
        inner.epochs = static_cast<std::size_t>(parse_uint(get("inner.epochs")));
        inner.lr = parse_real(get("inner.lr"));
        inner.batch = static_cast<std::size_t>(parse_uint(get("inner.batch")));
        return std::make_unique<CosineNetSampler>(mixture.basis, mixture.node_count, data, inner);
    }
    throw std::runtime_error("unsupported model kind '" + mixture.model_kind + "' in mixture file");
}

void apply_axis_1d(BaselineConfig1D& config, const std::string& axis, double value) {
    auto as_size = [&] {
        if (!(value >= 0.0) || std::floor(value) != value) throw std::invalid_argument(axis + " must be a whole number");
        return static_cast<std::size_t>(value);
    };
    if (axis == "sigma_a") config.sigma_a = value;
    else if (axis == "lr_a") config.lr_a = value;
    else if (axis == "lr_theta") config.lr_theta = value;
    else if (axis == "batch") config.batch = as_size();
    else if (axis == "max_steps") config.max_steps = as_size();
    else if (axis == "seed") config.seed = as_size();
    else throw std::invalid_argument("unknown sweep axis '" + axis + "' for regress1d");
    config.validate();
}

void apply_axis_mnist(BaselineConfigMnist& config, const std::string& axis, double value) {
    auto as_size = [&] {
        if (!(value >= 0.0) || std::floor(value) != value) throw std::invalid_argument(axis + " must be a whole number");
        return static_cast<std::size_t>(value);
    };
    if (axis == "scale") config.scale = value;
    else if (axis == "lr") config.lr = value;
    else if (axis == "epochs") config.epochs = as_size();
    else if (axis == "seed") config.seed = as_size();
    else throw std::invalid_argument("unknown sweep axis '" + axis + "' for mnist-cosine");
    config.validate();
}

SweepOutcome run_regress1d_baseline(const BaselineConfig1D& config, const RegressionSplits& splits, std::size_t N) {
    const auto result = train_sgd_angle_net(config, splits.train, N);
    SweepOutcome o;
    o.status = result.status;
    o.final_train_loss = result.final_train_loss;
    const Eigen::VectorXd pred = eval_angle_net(result.net(), splits.test.inputs);
    o.final_test_loss = EmpiricalL2().value(pred, splits.test.labels);
    if (!std::isfinite(o.final_test_loss)) o.status = RunStatus::diverged;
    return o;
}

SweepOutcome run_mnist_baseline(const BaselineConfigMnist& config, const ClassificationSplits& splits, std::size_t N) {
    const auto result = train_adam_cosine_net(config, splits.train, N);
    SweepOutcome o;
    o.status = result.status;
    o.final_train_loss = result.final_train_loss;
    const Eigen::MatrixXd logits = eval_cosine_net(result.net(), splits.test.inputs);
    o.final_test_loss = SoftmaxCrossEntropy(splits.test.class_count).value(logits, splits.test.labels);
    o.accuracy = classification_accuracy(logits, splits.test.labels);
    return o;
}

}  // namespace dsopt
