#pragma once

#include <cstddef>
#include <memory>
#include <span>

#include <Eigen/Dense>

namespace dsopt {

/// An evaluator x -> u_w(x). Inputs are rows of an m x input_dim matrix;
/// outputs are rows of an m x output_dim matrix.
class ModelFunction {
public:
    virtual ~ModelFunction() = default;
    virtual std::size_t input_dim() const = 0;
    virtual std::size_t output_dim() const = 0;
    virtual Eigen::MatrixXd evaluate(const Eigen::MatrixXd& inputs) const = 0;
};

using ModelPtr = std::shared_ptr<const ModelFunction>;

/// One-hidden-layer ReLU network in angle form:
/// u(x) = sum_j a_j act(cos(theta_j) x + sin(theta_j)).
/// A non-zero `leaky_slope` turns the activation into a leaky ReLU.
class AngleReluNet final : public ModelFunction {
public:
    AngleReluNet(Eigen::VectorXd thetas, Eigen::VectorXd outer, double leaky_slope = 0.0);

    std::size_t input_dim() const override { return 1; }
    std::size_t output_dim() const override { return 1; }
    Eigen::MatrixXd evaluate(const Eigen::MatrixXd& inputs) const override;

    const Eigen::VectorXd& thetas() const { return thetas_; }
    const Eigen::VectorXd& outer() const { return outer_; }
    double leaky_slope() const { return leaky_slope_; }
    std::size_t node_count() const { return static_cast<std::size_t>(thetas_.size()); }

private:
    Eigen::VectorXd thetas_;
    Eigen::VectorXd outer_;
    double leaky_slope_;
};

/// Random-feature style network: u(x) = sum_j a_j cos(v_j . x + b_j) + c.
class CosineFeatureNet final : public ModelFunction {
public:
    /// freq: N x v_dim, phase: N, outer: N x classes, bias: classes.
    CosineFeatureNet(Eigen::MatrixXd freq, Eigen::VectorXd phase, Eigen::MatrixXd outer, Eigen::VectorXd bias);

    std::size_t input_dim() const override { return static_cast<std::size_t>(freq_.cols()); }
    std::size_t output_dim() const override { return static_cast<std::size_t>(outer_.cols()); }
    Eigen::MatrixXd evaluate(const Eigen::MatrixXd& inputs) const override;

    const Eigen::MatrixXd& freq() const { return freq_; }
    const Eigen::VectorXd& phase() const { return phase_; }
    const Eigen::MatrixXd& outer() const { return outer_; }
    const Eigen::VectorXd& bias() const { return bias_; }

private:
    Eigen::MatrixXd freq_;
    Eigen::VectorXd phase_;
    Eigen::MatrixXd outer_;
    Eigen::VectorXd bias_;
};

/// m x N matrix with entry (j, k) = act(cos(theta_k) x_j + sin(theta_k)).
/// relu(0) = 0.
Eigen::MatrixXd angle_feature_matrix(const Eigen::VectorXd& thetas, const Eigen::VectorXd& inputs,
                                     double leaky_slope = 0.0);

Eigen::VectorXd eval_angle_net(const AngleReluNet& net, const Eigen::VectorXd& inputs);

/// m x N matrix cos(x_j . v_k + b_k).
Eigen::MatrixXd cosine_feature_matrix(const Eigen::MatrixXd& freq, const Eigen::VectorXd& phase,
                                      const Eigen::MatrixXd& inputs);

Eigen::MatrixXd eval_cosine_net(const CosineFeatureNet& net, const Eigen::MatrixXd& inputs);

/// Mean of per-model outputs, accumulated left to right.
Eigen::MatrixXd ensemble_eval(std::span<const ModelPtr> models, const Eigen::MatrixXd& inputs);

}  // namespace dsopt
