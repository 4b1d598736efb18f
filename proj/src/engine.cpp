#include "dsopt/engine.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "dsopt/parallel.hpp"

namespace dsopt {

std::string draw_mode_name(DrawMode mode) { return mode == DrawMode::joint ? "joint" : "product"; }

DrawMode draw_mode_from_name(const std::string& name) {
    if (name == "joint") return DrawMode::joint;
    if (name == "product") return DrawMode::product;
    throw std::invalid_argument("unknown draw mode '" + name + "' (expected joint or product)");
}

std::string train_status_name(TrainStatus status) {
    switch (status) {
        case TrainStatus::max_iterations:
            return "max_iterations";
        case TrainStatus::converged:
            return "converged";
        case TrainStatus::stationary:
            return "stationary";
        case TrainStatus::non_finite:
            return "non_finite";
    }
    return "?";
}

DrawnModel ModelSampler::draw_product(const SimplexVector&, Rng&) const {
    throw std::logic_error(model_kind() + " sampler does not support product mode");
}

// ---------------------------------------------------------------------------

AngleNetSampler::AngleNetSampler(MixtureBasis basis, std::size_t node_count, RegressionDataset data, double ridge)
    : basis_(std::move(basis)), node_count_(node_count), data_(std::move(data)), ridge_(ridge) {
    if (basis_.dimension() != 1) throw std::invalid_argument("AngleNetSampler: basis must be one-dimensional");
    if (node_count_ == 0) throw std::invalid_argument("AngleNetSampler: node_count must be positive");
    if (data_.size() == 0) throw std::invalid_argument("AngleNetSampler: empty dataset");
}

DrawnModel AngleNetSampler::complete(Eigen::VectorXd thetas) const {
    LsqSolution sol = solve_outer_lsq(thetas, data_, ridge_);
    DrawnModel out;
    out.train_predictions = std::move(sol.fitted);
    out.model = std::make_shared<AngleReluNet>(std::move(thetas), std::move(sol.outer));
    return out;
}

DrawnModel AngleNetSampler::draw_from_component(std::size_t i, Rng& rng) const {
    if (i >= basis_.size()) throw std::out_of_range("AngleNetSampler: component index out of range");
    Eigen::VectorXd thetas(static_cast<Eigen::Index>(node_count_));
    for (Eigen::Index j = 0; j < thetas.size(); ++j) {
        basis_[i].sample_into(rng, std::span<double>(&thetas[j], 1));
    }
    return complete(std::move(thetas));
}

DrawnModel AngleNetSampler::draw_product(const SimplexVector& alpha, Rng& rng) const {
    const auto thetas = sample_product(basis_, alpha, node_count_, rng);
    return complete(Eigen::Map<const Eigen::VectorXd>(thetas.data(), static_cast<Eigen::Index>(thetas.size())));
}

// ---------------------------------------------------------------------------

CosineNetSampler::CosineNetSampler(MixtureBasis basis, std::size_t node_count, ClassificationDataset data,
                                   AdamConfig inner)
    : basis_(std::move(basis)), node_count_(node_count), data_(std::move(data)), inner_(inner) {
    if (node_count_ == 0) throw std::invalid_argument("CosineNetSampler: node_count must be positive");
    if (data_.size() == 0) throw std::invalid_argument("CosineNetSampler: empty dataset");
    if (basis_.dimension() != static_cast<std::size_t>(data_.inputs.cols()) + 1) {
        throw std::invalid_argument("CosineNetSampler: basis dimension must be feature count + 1");
    }
}

DrawnModel CosineNetSampler::complete(Eigen::MatrixXd freq, Eigen::VectorXd phase, Rng& rng) const {
    const Eigen::MatrixXd features = cosine_feature_matrix(freq, phase, data_.inputs);
    AdamSolution sol = solve_outer_adam_features(features, data_, inner_, rng);
    DrawnModel out;
    out.train_predictions = std::move(sol.fitted);
    out.model = std::make_shared<CosineFeatureNet>(std::move(freq), std::move(phase), std::move(sol.outer),
                                                   std::move(sol.bias));
    return out;
}

DrawnModel CosineNetSampler::draw_from_component(std::size_t i, Rng& rng) const {
    if (i >= basis_.size()) throw std::out_of_range("CosineNetSampler: component index out of range");
    const auto d = static_cast<Eigen::Index>(basis_.dimension());
    const auto nodes = static_cast<Eigen::Index>(node_count_);
    Eigen::MatrixXd freq(nodes, d - 1);
    Eigen::VectorXd phase(nodes);
    std::vector<double> w(static_cast<std::size_t>(d));
    for (Eigen::Index j = 0; j < nodes; ++j) {
        basis_[i].sample_into(rng, w);
        for (Eigen::Index k = 0; k + 1 < d; ++k) freq(j, k) = w[static_cast<std::size_t>(k)];
        phase[j] = w.back();
    }
    return complete(std::move(freq), std::move(phase), rng);
}

DrawnModel CosineNetSampler::draw_product(const SimplexVector& alpha, Rng& rng) const {
    if (alpha.size() != basis_.size()) throw std::invalid_argument("CosineNetSampler: alpha length mismatch");
    const auto d = static_cast<Eigen::Index>(basis_.dimension());
    const auto nodes = static_cast<Eigen::Index>(node_count_);
    Eigen::MatrixXd freq(nodes, d - 1);
    Eigen::VectorXd phase(nodes);
    std::vector<double> w(static_cast<std::size_t>(d));
    for (Eigen::Index j = 0; j < nodes; ++j) {
        basis_[sample_categorical(alpha, rng)].sample_into(rng, w);
        for (Eigen::Index k = 0; k + 1 < d; ++k) freq(j, k) = w[static_cast<std::size_t>(k)];
        phase[j] = w.back();
    }
    return complete(std::move(freq), std::move(phase), rng);
}

// ---------------------------------------------------------------------------

DrawnModel draw_model(const ModelSampler& sampler, const SimplexVector& alpha, DrawMode mode, Rng& rng) {
    if (alpha.size() != sampler.component_count()) throw std::invalid_argument("draw_model: alpha length mismatch");
    if (mode == DrawMode::joint) return sampler.draw_from_component(sample_categorical(alpha, rng), rng);
    return sampler.draw_product(alpha, rng);
}

Eigen::MatrixXd estimate_ensemble(const ModelSampler& sampler, const SimplexVector& alpha, std::size_t R,
                                  DrawMode mode, std::uint64_t seed, std::uint64_t step, std::size_t threads) {
    if (R == 0) throw std::invalid_argument("estimate_ensemble: R must be at least 1");
    std::vector<Eigen::MatrixXd> draws(R);
    parallel_for(R, threads, [&](std::size_t r) {
        Rng rng = derive_stream(seed, step, StreamPurpose::ensemble, r);
        draws[r] = draw_model(sampler, alpha, mode, rng).train_predictions;
    });
    Eigen::MatrixXd sum = draws[0];
    for (std::size_t r = 1; r < R; ++r) sum += draws[r];
    return sum / static_cast<double>(R);
}

Eigen::VectorXd estimate_gradient(const Eigen::MatrixXd& ubar, const ModelSampler& sampler, std::size_t S,
                                  const LossFunctional& loss, std::uint64_t seed, std::uint64_t step,
                                  std::size_t threads) {
    if (S == 0) throw std::invalid_argument("estimate_gradient: S must be at least 1");
    const std::size_t n = sampler.component_count();
    const Eigen::MatrixXd dj = loss.functional_gradient(ubar, sampler.labels());
    std::vector<double> inner(n * S);
    parallel_for(n * S, threads, [&](std::size_t idx) {
        Rng rng = derive_stream(seed, step, StreamPurpose::gradient, idx);
        const Eigen::MatrixXd pred = sampler.draw_from_component(idx / S, rng).train_predictions;
        if (pred.rows() != dj.rows() || pred.cols() != dj.cols()) {
            throw std::logic_error("estimate_gradient: prediction shape does not match ubar");
        }
        inner[idx] = (dj.array() * pred.array()).sum();
    });
    Eigen::VectorXd g(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t s = 0; s < S; ++s) acc += inner[i * S + s];
        g[static_cast<Eigen::Index>(i)] = acc / static_cast<double>(S);
    }
    return g;
}

NormalizedGradient normalize_gradient(const Eigen::VectorXd& g) {
    const Eigen::Index n = g.size();
    if (n == 0) throw std::invalid_argument("normalize_gradient: empty gradient");
    NormalizedGradient out;
    const double mean = g.mean();
    const Eigen::VectorXd centered = g.array() - mean;
    const double std = std::sqrt(centered.squaredNorm() / static_cast<double>(n));
    if (!(std >= kStationaryStd)) {
        out.direction = Eigen::VectorXd::Zero(n);
        out.stationary = true;
        return out;
    }
    out.direction = centered / (std * static_cast<double>(n));
    return out;
}

void TrainConfig::validate() const {
    if (R < 1) throw std::invalid_argument("TrainConfig: R must be >= 1");
    if (S < 1) throw std::invalid_argument("TrainConfig: S must be >= 1");
    if (!(lr > 0.0) || !std::isfinite(lr)) throw std::invalid_argument("TrainConfig: lr must be > 0");
    if (!(tol >= 0.0)) throw std::invalid_argument("TrainConfig: tol must be >= 0");
    if (node_count < 1) throw std::invalid_argument("TrainConfig: node_count must be >= 1");
}

MonteCarloGradient::MonteCarloGradient(const ModelSampler& sampler, const LossFunctional& loss,
                                       const TrainConfig& config)
    : sampler_(sampler), loss_(loss), config_(config) {}

GradientEstimate MonteCarloGradient::evaluate(const SimplexVector& alpha, std::size_t step) {
    const Eigen::MatrixXd ubar =
        estimate_ensemble(sampler_, alpha, config_.R, config_.mode, config_.seed, step, config_.threads);
    GradientEstimate est;
    est.loss = loss_.value(ubar, sampler_.labels());
    est.gradient = estimate_gradient(ubar, sampler_, config_.S, loss_, config_.seed, step, config_.threads);
    return est;
}

SimplexVector random_initial_alpha(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("random_initial_alpha: n must be positive");
    Rng rng = Rng::derive(seed, {static_cast<std::uint64_t>(StreamPurpose::init)});
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform();
    if (v.sum() <= 0.0) v.setOnes();
    return SimplexVector(v / v.sum());
}

TrainResult train_alpha(const TrainConfig& config, GradientSource& source, std::size_t n,
                        std::optional<SimplexVector> alpha0) {
    config.validate();
    TrainResult result{alpha0 ? *alpha0 : random_initial_alpha(n, config.seed), {}, TrainStatus::max_iterations, 0};
    if (result.alpha.size() != n) throw std::invalid_argument("train: alpha0 length does not match basis size");

    const auto start = std::chrono::steady_clock::now();
    for (std::size_t k = 0; k < config.k_max; ++k) {
        GradientEstimate est = source.evaluate(result.alpha, k);
        StepRecord rec;
        rec.step = k;
        rec.loss_estimate = est.loss;
        rec.raw_gradient = std::move(est.gradient);

        if (!std::isfinite(rec.loss_estimate) || !rec.raw_gradient.allFinite()) {
            rec.alpha = result.alpha.weights();
            rec.grad_norm = std::nan("");
            rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            result.history.push_back(std::move(rec));
            result.status = TrainStatus::non_finite;
            return result;
        }

        const NormalizedGradient ng = normalize_gradient(rec.raw_gradient);
        rec.grad_norm = ng.direction.norm();
        if (!ng.stationary) {
            result.alpha = project_to_simplex(result.alpha.weights() - config.lr * ng.direction);
        }
        rec.alpha = result.alpha.weights();
        rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result.history.push_back(std::move(rec));
        result.steps = k + 1;

        if (ng.stationary) {
            result.status = TrainStatus::stationary;
            return result;
        }
        if (result.history.back().grad_norm < config.tol) {
            result.status = TrainStatus::converged;
            return result;
        }
    }
    return result;
}

TrainOutput train(const TrainConfig& config, const ModelSampler& sampler, const LossFunctional& loss,
                  std::optional<SimplexVector> alpha0) {
    const MixtureBasis* basis = sampler.basis();
    if (basis == nullptr) throw std::invalid_argument("train: sampler has no basis");
    MonteCarloGradient source(sampler, loss, config);
    TrainResult result = train_alpha(config, source, basis->size(), std::move(alpha0));
    TrainedMixture mixture{*basis, result.alpha, config.mode, config.node_count, config.seed,
                           sampler.model_kind(), {}};
    return TrainOutput{std::move(mixture), std::move(result)};
}

Prediction predict(const ModelSampler& sampler, const SimplexVector& alpha, DrawMode mode,
                   const Eigen::MatrixXd& inputs, std::size_t R, std::uint64_t seed, std::size_t threads) {
    if (R == 0) throw std::invalid_argument("predict: R must be at least 1");
    std::vector<Eigen::MatrixXd> outputs(R);
    parallel_for(R, threads, [&](std::size_t r) {
        Rng rng = derive_stream(seed, 0, StreamPurpose::predict, r);
        outputs[r] = draw_model(sampler, alpha, mode, rng).model->evaluate(inputs);
    });
    Prediction p;
    p.mean = outputs[0];
    for (std::size_t r = 1; r < R; ++r) p.mean += outputs[r];
    p.mean /= static_cast<double>(R);
    p.stddev = Eigen::MatrixXd::Zero(p.mean.rows(), p.mean.cols());
    if (R > 1) {
        for (std::size_t r = 0; r < R; ++r) p.stddev += (outputs[r] - p.mean).cwiseAbs2();
        p.stddev = (p.stddev / static_cast<double>(R - 1)).cwiseSqrt();
    }
    return p;
}

}  // namespace dsopt
