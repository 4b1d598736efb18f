#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include <Eigen/Dense>

namespace dsopt {

/// Convex loss functional on predictions at a finite sample set.
///
/// Predictions are m x C (C = 1 for scalar regression); labels hold one value per
/// sample (real targets, or class indices stored as doubles). The functional
/// gradient is the m x C array of partial derivatives of `value` with respect to
/// each prediction entry, i.e. dJ/du at the data points.
class LossFunctional {
public:
    virtual ~LossFunctional() = default;
    virtual std::string name() const = 0;
    virtual double value(const Eigen::MatrixXd& predictions, const Eigen::VectorXd& labels) const = 0;
    virtual Eigen::MatrixXd functional_gradient(const Eigen::MatrixXd& predictions,
                                                const Eigen::VectorXd& labels) const = 0;
    /// True when value is affine in the predictions.
    virtual bool is_linear() const { return false; }
    /// Required prediction column count, or 0 for any.
    virtual std::size_t output_dim() const { return 1; }
};

/// (1/m) sum_j (u_j - y_j)^2.
class EmpiricalL2 final : public LossFunctional {
public:
    std::string name() const override { return "l2"; }
    double value(const Eigen::MatrixXd& predictions, const Eigen::VectorXd& labels) const override;
    Eigen::MatrixXd functional_gradient(const Eigen::MatrixXd& predictions,
                                        const Eigen::VectorXd& labels) const override;
};

/// Mean over samples of -log softmax(u_j)[y_j]; softmax uses max subtraction.
class SoftmaxCrossEntropy final : public LossFunctional {
public:
    explicit SoftmaxCrossEntropy(std::size_t class_count);
    std::string name() const override { return "cross-entropy"; }
    double value(const Eigen::MatrixXd& predictions, const Eigen::VectorXd& labels) const override;
    Eigen::MatrixXd functional_gradient(const Eigen::MatrixXd& predictions,
                                        const Eigen::VectorXd& labels) const override;
    std::size_t output_dim() const override { return class_count_; }
    std::size_t class_count() const { return class_count_; }

private:
    std::size_t class_count_;
};

/// J[u] = mean of u over samples; labels are ignored. Used by the linear-case oracles.
class MeanPrediction final : public LossFunctional {
public:
    std::string name() const override { return "linear"; }
    double value(const Eigen::MatrixXd& predictions, const Eigen::VectorXd& labels) const override;
    Eigen::MatrixXd functional_gradient(const Eigen::MatrixXd& predictions,
                                        const Eigen::VectorXd& labels) const override;
    bool is_linear() const override { return true; }
};

enum class LossKind { l2, cross_entropy, linear };

struct LossSpec {
    LossKind kind = LossKind::l2;
    std::size_t class_count = 1;

    friend bool operator==(const LossSpec&, const LossSpec&) = default;
};

std::unique_ptr<LossFunctional> make_loss(const LossSpec& spec);
std::string loss_kind_name(LossKind kind);
LossKind loss_kind_from_name(const std::string& name);

/// Row-wise softmax with max subtraction.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

/// Fraction of rows whose argmax equals the label.
double classification_accuracy(const Eigen::MatrixXd& logits, const Eigen::VectorXd& labels);

double loss_value(const LossFunctional& loss, const Eigen::MatrixXd& predictions, const Eigen::VectorXd& labels);
Eigen::MatrixXd loss_functional_gradient(const LossFunctional& loss, const Eigen::MatrixXd& predictions,
                                         const Eigen::VectorXd& labels);

}  // namespace dsopt
