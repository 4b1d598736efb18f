#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "dsopt/data.hpp"
#include "dsopt/random.hpp"

namespace dsopt {

struct InnerSolveReport {
    double residual_loss = 0.0;  // training loss at the returned coefficients
    std::size_t iterations = 0;
    bool condition_warning = false;
};

constexpr double kDefaultRidge = 1e-8;

struct LsqSolution {
    Eigen::VectorXd outer;
    Eigen::VectorXd fitted;  // Phi * outer at the training inputs
    InnerSolveReport report;
};

/// argmin_a |Phi a - y|^2 + ridge |a|^2, via Householder QR of the stacked
/// system [Phi; sqrt(ridge) I] a = [y; 0]. Residual loss is the mean squared error.
LsqSolution solve_ridge_lsq(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                            double ridge = kDefaultRidge);

/// Outer weights of an AngleReluNet with fixed angles fitted to `data`.
LsqSolution solve_outer_lsq(const Eigen::VectorXd& thetas, const RegressionDataset& data,
                            double ridge = kDefaultRidge);

struct AdamConfig {
    std::size_t epochs = 2;
    double lr = 1e-3;
    std::size_t batch = 100;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamSolution {
    Eigen::MatrixXd outer;      // N x classes
    Eigen::VectorXd bias;       // classes
    Eigen::MatrixXd fitted;     // logits at the training inputs
    InnerSolveReport report;
};

/// Fits (a, c) of a CosineFeatureNet with fixed (v, b) by Adam on softmax
/// cross-entropy, starting from zeros. Mini-batches are reshuffled each epoch
/// from `rng`.
AdamSolution solve_outer_adam(const Eigen::MatrixXd& freq, const Eigen::VectorXd& phase,
                              const ClassificationDataset& data, const AdamConfig& config, Rng& rng);

/// Same solve on a precomputed m x N feature matrix.
AdamSolution solve_outer_adam_features(const Eigen::MatrixXd& features, const ClassificationDataset& data,
                                       const AdamConfig& config, Rng& rng);

}  // namespace dsopt
