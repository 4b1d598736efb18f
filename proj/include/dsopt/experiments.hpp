#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dsopt/baseline.hpp"
#include "dsopt/basis.hpp"
#include "dsopt/config.hpp"
#include "dsopt/data.hpp"
#include "dsopt/engine.hpp"
#include "dsopt/inner.hpp"
#include "dsopt/oracle.hpp"

namespace dsopt {

enum class ExperimentKind { regress1d, mnist_cosine, oracle_verify };
std::string experiment_kind_name(ExperimentKind kind);
ExperimentKind experiment_kind_from_name(const std::string& name);

struct BasisSpec {
    std::string kind = "angle-triangle";  // or "gauss-uniform"
    std::size_t n = 10;
    double lambda_min = 1.0;
    double lambda_max = 20.0;
    bool geometric = true;
    std::vector<double> lambdas;  // explicit grid; overrides min/max/spacing

    MixtureBasis build(std::size_t input_dim) const;
};

struct TargetSpec {
    std::size_t K = 10;
    double t = 5.0;
    std::uint64_t seed = 0;
};

struct RegressionDataSpec {
    std::size_t train_size = 1000;
    std::size_t test_size = 1000;
    std::uint64_t train_seed = 1;
    std::uint64_t test_seed = 2;
};

struct MnistDataSpec {
    std::filesystem::path train_images, train_labels, test_images, test_labels;
    std::size_t train_size = 5000;
    std::size_t test_size = 1000;
    std::optional<std::uint64_t> subset_seed;  // prefix subsets when absent
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::regress1d;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "out";
    BasisSpec basis;
    TrainConfig train;
    std::size_t predict_R = 20;
    TargetSpec target;
    RegressionDataSpec regression;
    MnistDataSpec mnist;
    double ridge = kDefaultRidge;
    AdamConfig inner;
    BaselineConfig1D baseline1d;
    BaselineConfigMnist baseline_mnist;
    std::vector<SweepAxis> sweep_axes;
    std::string sweep_results = "sweep.csv";
    OracleSuiteOptions verify;
    std::string config_hash;
};

/// Typed view of a flat config; throws ConfigError with the offending line.
ExperimentConfig experiment_from_config(const Config& config);
/// Referenced input files must exist; throws ConfigError otherwise.
void check_input_paths(const ExperimentConfig& config);

struct RegressionSplits {
    FourierJumpTarget target;
    RegressionDataset train;
    RegressionDataset test;
};
RegressionSplits make_regression_splits(const TargetSpec& target, const RegressionDataSpec& spec);

struct ClassificationSplits {
    ClassificationDataset train;
    ClassificationDataset test;
};
ClassificationSplits load_mnist_splits(const MnistDataSpec& spec);

/// Loss and accuracy (classification only, else NaN) of ensemble predictions.
struct Evaluation {
    double loss = 0.0;
    double accuracy = std::numeric_limits<double>::quiet_NaN();
};

struct DistRun {
    TrainOutput output;
    Evaluation train_eval;
    Evaluation test_eval;
    double wall_seconds = 0.0;
};

/// Distribution-space training on the 1D task followed by ensemble evaluation
/// with predict_R draws on both splits.
DistRun run_regress1d_dist(const ExperimentConfig& config, const RegressionSplits& splits,
                           std::optional<SimplexVector> alpha0 = std::nullopt);
DistRun run_mnist_dist(const ExperimentConfig& config, const ClassificationSplits& splits,
                       std::optional<SimplexVector> alpha0 = std::nullopt);

/// Metadata stored with a trained mixture so inference can rebuild its sampler.
std::map<std::string, std::string> mixture_provenance(const ExperimentConfig& config);
/// Sampler matching a saved mixture (recreates the training data it was fitted on).
std::unique_ptr<ModelSampler> sampler_for_mixture(const TrainedMixture& mixture);

/// Applies a named sweep axis value ("sigma_a", "lr_a", "lr_theta", "batch",
/// "max_steps", "seed" for 1D; "scale", "lr", "epochs", "seed" for MNIST).
void apply_axis_1d(BaselineConfig1D& config, const std::string& axis, double value);
void apply_axis_mnist(BaselineConfigMnist& config, const std::string& axis, double value);

SweepOutcome run_regress1d_baseline(const BaselineConfig1D& config, const RegressionSplits& splits, std::size_t N);
SweepOutcome run_mnist_baseline(const BaselineConfigMnist& config, const ClassificationSplits& splits, std::size_t N);

}  // namespace dsopt
