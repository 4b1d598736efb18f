#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsopt/basis.hpp"
#include "dsopt/data.hpp"
#include "dsopt/inner.hpp"
#include "dsopt/loss.hpp"
#include "dsopt/model.hpp"
#include "dsopt/simplex.hpp"

namespace dsopt {

/// joint: one component per model, every parameter drawn from it (the mixture
/// over whole parameter vectors). product: each node drawn independently from
/// the one-node mixture.
enum class DrawMode { joint, product };

std::string draw_mode_name(DrawMode mode);
DrawMode draw_mode_from_name(const std::string& name);

struct DrawnModel {
    ModelPtr model;
    Eigen::MatrixXd train_predictions;  // model outputs at the training inputs
};

/// Draws parameters from basis components and completes them into a model
/// (inner solve included), reporting its training-set predictions.
class ModelSampler {
public:
    virtual ~ModelSampler() = default;
    virtual std::string model_kind() const = 0;
    virtual std::size_t component_count() const = 0;
    virtual const Eigen::VectorXd& labels() const = 0;
    /// Basis the draws come from, if the sampler has one.
    virtual const MixtureBasis* basis() const { return nullptr; }

    /// Model whose parameters are all drawn from component i.
    virtual DrawnModel draw_from_component(std::size_t i, Rng& rng) const = 0;
    /// Model whose nodes are drawn independently from the mixture alpha.
    virtual DrawnModel draw_product(const SimplexVector& alpha, Rng& rng) const;
};

/// AngleReluNet with N nodes; outer weights by ridge least squares on the training data.
class AngleNetSampler final : public ModelSampler {
public:
    AngleNetSampler(MixtureBasis basis, std::size_t node_count, RegressionDataset data,
                    double ridge = kDefaultRidge);

    std::string model_kind() const override { return "angle-relu"; }
    std::size_t component_count() const override { return basis_.size(); }
    const Eigen::VectorXd& labels() const override { return data_.labels; }
    const MixtureBasis* basis() const override { return &basis_; }
    DrawnModel draw_from_component(std::size_t i, Rng& rng) const override;
    DrawnModel draw_product(const SimplexVector& alpha, Rng& rng) const override;

    const RegressionDataset& data() const { return data_; }
    std::size_t node_count() const { return node_count_; }

private:
    DrawnModel complete(Eigen::VectorXd thetas) const;

    MixtureBasis basis_;
    std::size_t node_count_;
    RegressionDataset data_;
    double ridge_;
};

/// CosineFeatureNet with N nodes; (a, c) by a short Adam solve on the training data.
class CosineNetSampler final : public ModelSampler {
public:
    CosineNetSampler(MixtureBasis basis, std::size_t node_count, ClassificationDataset data, AdamConfig inner);

    std::string model_kind() const override { return "cosine-feature"; }
    std::size_t component_count() const override { return basis_.size(); }
    const Eigen::VectorXd& labels() const override { return data_.labels; }
    const MixtureBasis* basis() const override { return &basis_; }
    DrawnModel draw_from_component(std::size_t i, Rng& rng) const override;
    DrawnModel draw_product(const SimplexVector& alpha, Rng& rng) const override;

    const ClassificationDataset& data() const { return data_; }

private:
    DrawnModel complete(Eigen::MatrixXd freq, Eigen::VectorXd phase, Rng& rng) const;

    MixtureBasis basis_;
    std::size_t node_count_;
    ClassificationDataset data_;
    AdamConfig inner_;
};

DrawnModel draw_model(const ModelSampler& sampler, const SimplexVector& alpha, DrawMode mode, Rng& rng);

/// Mean training-set predictions of R models drawn from alpha. Draw r uses the
/// stream (seed, step, ensemble, r); draws may run on `threads` workers and are
/// reduced in index order.
Eigen::MatrixXd estimate_ensemble(const ModelSampler& sampler, const SimplexVector& alpha, std::size_t R,
                                  DrawMode mode, std::uint64_t seed, std::uint64_t step,
                                  std::size_t threads = 1);

/// g_i = < dJ/du(ubar), mean of S models drawn entirely from component i >,
/// summed over samples and outputs. Draw (i, s) uses stream (seed, step, gradient, i*S+s).
Eigen::VectorXd estimate_gradient(const Eigen::MatrixXd& ubar, const ModelSampler& sampler, std::size_t S,
                                  const LossFunctional& loss, std::uint64_t seed, std::uint64_t step,
                                  std::size_t threads = 1);

struct NormalizedGradient {
    Eigen::VectorXd direction;
    bool stationary = false;
};

constexpr double kStationaryStd = 1e-12;

/// (1/n)(g - mean g)/std g with the population standard deviation; a zero
/// vector flagged stationary when std < kStationaryStd.
NormalizedGradient normalize_gradient(const Eigen::VectorXd& g);

struct TrainConfig {
    std::size_t R = 20;
    std::size_t S = 1;
    std::size_t k_max = 100;
    double lr = 0.1;
    double tol = 0.0;
    std::uint64_t seed = 0;
    DrawMode mode = DrawMode::joint;
    std::size_t node_count = 1;
    std::size_t threads = 1;

    void validate() const;
};

struct GradientEstimate {
    double loss = 0.0;
    Eigen::VectorXd gradient;
};

/// Supplies a loss value and raw gradient at alpha for a given iteration.
class GradientSource {
public:
    virtual ~GradientSource() = default;
    virtual GradientEstimate evaluate(const SimplexVector& alpha, std::size_t step) = 0;
};

/// Monte-Carlo estimates: J[ubar] from R mixture draws and g from S draws per component.
class MonteCarloGradient final : public GradientSource {
public:
    MonteCarloGradient(const ModelSampler& sampler, const LossFunctional& loss, const TrainConfig& config);
    GradientEstimate evaluate(const SimplexVector& alpha, std::size_t step) override;

private:
    const ModelSampler& sampler_;
    const LossFunctional& loss_;
    TrainConfig config_;
};

struct StepRecord {
    std::size_t step = 0;
    double loss_estimate = 0.0;
    Eigen::VectorXd raw_gradient;
    double grad_norm = 0.0;   // norm of the normalized gradient
    Eigen::VectorXd alpha;    // coefficients after this step's update
    double wall_seconds = 0.0;
};

enum class TrainStatus { max_iterations, converged, stationary, non_finite };
std::string train_status_name(TrainStatus status);

struct TrainResult {
    SimplexVector alpha;
    std::vector<StepRecord> history;
    TrainStatus status = TrainStatus::max_iterations;
    std::size_t steps = 0;
};

/// Alpha drawn uniform on [0,1]^n then normalized.
SimplexVector random_initial_alpha(std::size_t n, std::uint64_t seed);

/// Projected gradient descent over mixture coefficients:
///   alpha <- Proj(alpha - lr * normalize(g)),
/// until k_max steps or |normalized g| < tol. alpha0 defaults to random_initial_alpha.
TrainResult train_alpha(const TrainConfig& config, GradientSource& source, std::size_t n,
                        std::optional<SimplexVector> alpha0 = std::nullopt);

/// Trained distribution over parameters and what is needed to resample it.
struct TrainedMixture {
    MixtureBasis basis;
    SimplexVector alpha;
    DrawMode mode = DrawMode::joint;
    std::size_t node_count = 1;
    std::uint64_t seed = 0;
    std::string model_kind;
    /// Free-form key=value pairs (data description, config hash, ...).
    std::map<std::string, std::string> provenance;

    friend bool operator==(const TrainedMixture&, const TrainedMixture&) = default;
};

struct TrainOutput {
    TrainedMixture mixture;
    TrainResult result;
};

/// Runs Monte-Carlo projected gradient descent on a sampler with a basis.
TrainOutput train(const TrainConfig& config, const ModelSampler& sampler, const LossFunctional& loss,
                  std::optional<SimplexVector> alpha0 = std::nullopt);

struct Prediction {
    Eigen::MatrixXd mean;    // m x output_dim
    Eigen::MatrixXd stddev;  // per-entry sample standard deviation across the R draws
};

/// Ensemble inference: average of R sampled models evaluated at `inputs`.
/// Draw r uses stream (seed, 0, predict, r).
Prediction predict(const ModelSampler& sampler, const SimplexVector& alpha, DrawMode mode,
                   const Eigen::MatrixXd& inputs, std::size_t R, std::uint64_t seed, std::size_t threads = 1);

}  // namespace dsopt
