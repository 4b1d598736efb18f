#include "dsopt/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace dsopt {

namespace {

void check_shapes(const LossFunctional& loss, const Eigen::MatrixXd& predictions, const Eigen::VectorXd& labels) {
    if (predictions.rows() != labels.size()) {
        throw std::invalid_argument(loss.name() + ": " + std::to_string(predictions.rows()) +
                                    " predictions but " + std::to_string(labels.size()) + " labels");
    }
    if (predictions.rows() == 0) throw std::invalid_argument(loss.name() + ": empty sample set");
    const std::size_t want = loss.output_dim();
    if (want != 0 && static_cast<std::size_t>(predictions.cols()) != want) {
        throw std::invalid_argument(loss.name() + ": predictions have " + std::to_string(predictions.cols()) +
                                    " columns, expected " + std::to_string(want));
    }
}

std::size_t class_index(double label, std::size_t classes) {
    const double rounded = std::round(label);
    if (rounded != label || rounded < 0.0 || rounded >= static_cast<double>(classes)) {
        throw std::invalid_argument("cross-entropy: label " + std::to_string(label) + " is not a class index");
    }
    return static_cast<std::size_t>(rounded);
}

}  // namespace

double EmpiricalL2::value(const Eigen::MatrixXd& predictions, const Eigen::VectorXd& labels) const {
    check_shapes(*this, predictions, labels);
    return (predictions.col(0) - labels).squaredNorm() / static_cast<double>(labels.size());
}

Eigen::MatrixXd EmpiricalL2::functional_gradient(const Eigen::MatrixXd& predictions,
                                                 const Eigen::VectorXd& labels) const {
    check_shapes(*this, predictions, labels);
    return (2.0 / static_cast<double>(labels.size())) * (predictions.col(0) - labels);
}

SoftmaxCrossEntropy::SoftmaxCrossEntropy(std::size_t class_count) : class_count_(class_count) {
    if (class_count < 2) throw std::invalid_argument("cross-entropy needs at least two classes");
}

double SoftmaxCrossEntropy::value(const Eigen::MatrixXd& predictions, const Eigen::VectorXd& labels) const {
    check_shapes(*this, predictions, labels);
    double total = 0.0;
    for (Eigen::Index j = 0; j < predictions.rows(); ++j) {
        const auto row = predictions.row(j);
        const double peak = row.maxCoeff();
        const double log_sum = peak + std::log((row.array() - peak).exp().sum());
        total += log_sum - row[static_cast<Eigen::Index>(class_index(labels[j], class_count_))];
    }
    return total / static_cast<double>(predictions.rows());
}

Eigen::MatrixXd SoftmaxCrossEntropy::functional_gradient(const Eigen::MatrixXd& predictions,
                                                         const Eigen::VectorXd& labels) const {
    check_shapes(*this, predictions, labels);
    Eigen::MatrixXd grad = softmax_rows(predictions);
    for (Eigen::Index j = 0; j < grad.rows(); ++j) {
        grad(j, static_cast<Eigen::Index>(class_index(labels[j], class_count_))) -= 1.0;
    }
    return grad / static_cast<double>(predictions.rows());
}

double MeanPrediction::value(const Eigen::MatrixXd& predictions, const Eigen::VectorXd& labels) const {
    check_shapes(*this, predictions, labels);
    return predictions.col(0).mean();
}

Eigen::MatrixXd MeanPrediction::functional_gradient(const Eigen::MatrixXd& predictions,
                                                    const Eigen::VectorXd& labels) const {
    check_shapes(*this, predictions, labels);
    return Eigen::MatrixXd::Constant(predictions.rows(), 1, 1.0 / static_cast<double>(predictions.rows()));
}

std::unique_ptr<LossFunctional> make_loss(const LossSpec& spec) {
    switch (spec.kind) {
        case LossKind::l2:
            return std::make_unique<EmpiricalL2>();
        case LossKind::cross_entropy:
            return std::make_unique<SoftmaxCrossEntropy>(spec.class_count);
        case LossKind::linear:
            return std::make_unique<MeanPrediction>();
    }
    throw std::invalid_argument("unknown loss kind");
}

std::string loss_kind_name(LossKind kind) {
    switch (kind) {
        case LossKind::l2:
            return "l2";
        case LossKind::cross_entropy:
            return "cross-entropy";
        case LossKind::linear:
            return "linear";
    }
    return "?";
}

LossKind loss_kind_from_name(const std::string& name) {
    if (name == "l2") return LossKind::l2;
    if (name == "cross-entropy") return LossKind::cross_entropy;
    if (name == "linear") return LossKind::linear;
    throw std::invalid_argument("unknown loss '" + name + "' (expected l2, cross-entropy or linear)");
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd out(logits.rows(), logits.cols());
    for (Eigen::Index j = 0; j < logits.rows(); ++j) {
        const double peak = logits.row(j).maxCoeff();
        out.row(j) = (logits.row(j).array() - peak).exp().matrix();
        out.row(j) /= out.row(j).sum();
    }
    return out;
}

double classification_accuracy(const Eigen::MatrixXd& logits, const Eigen::VectorXd& labels) {
    if (logits.rows() != labels.size() || logits.rows() == 0) {
        throw std::invalid_argument("classification_accuracy: shape mismatch");
    }
    std::size_t hits = 0;
    for (Eigen::Index j = 0; j < logits.rows(); ++j) {
        Eigen::Index best = 0;
        logits.row(j).maxCoeff(&best);
        if (static_cast<double>(best) == labels[j]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double loss_value(const LossFunctional& loss, const Eigen::MatrixXd& predictions, const Eigen::VectorXd& labels) {
    return loss.value(predictions, labels);
}

Eigen::MatrixXd loss_functional_gradient(const LossFunctional& loss, const Eigen::MatrixXd& predictions,
                                         const Eigen::VectorXd& labels) {
    return loss.functional_gradient(predictions, labels);
}

}  // namespace dsopt
