#include "dsopt/model.hpp"

#include <cmath>
#include <stdexcept>

namespace dsopt {

AngleReluNet::AngleReluNet(Eigen::VectorXd thetas, Eigen::VectorXd outer, double leaky_slope)
    : thetas_(std::move(thetas)), outer_(std::move(outer)), leaky_slope_(leaky_slope) {
    if (thetas_.size() != outer_.size()) throw std::invalid_argument("AngleReluNet: length mismatch");
}

Eigen::MatrixXd AngleReluNet::evaluate(const Eigen::MatrixXd& inputs) const {
    if (inputs.cols() != 1) throw std::invalid_argument("AngleReluNet: inputs must have one column");
    return angle_feature_matrix(thetas_, inputs.col(0), leaky_slope_) * outer_;
}

CosineFeatureNet::CosineFeatureNet(Eigen::MatrixXd freq, Eigen::VectorXd phase, Eigen::MatrixXd outer,
                                   Eigen::VectorXd bias)
    : freq_(std::move(freq)), phase_(std::move(phase)), outer_(std::move(outer)), bias_(std::move(bias)) {
    if (phase_.size() != freq_.rows() || outer_.rows() != freq_.rows() || bias_.size() != outer_.cols()) {
        throw std::invalid_argument("CosineFeatureNet: inconsistent parameter shapes");
    }
}

Eigen::MatrixXd CosineFeatureNet::evaluate(const Eigen::MatrixXd& inputs) const {
    return eval_cosine_net(*this, inputs);
}

Eigen::MatrixXd angle_feature_matrix(const Eigen::VectorXd& thetas, const Eigen::VectorXd& inputs,
                                     double leaky_slope) {
    const Eigen::Index m = inputs.size();
    const Eigen::Index n = thetas.size();
    Eigen::MatrixXd phi(m, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double c = std::cos(thetas[k]);
        const double s = std::sin(thetas[k]);
        for (Eigen::Index j = 0; j < m; ++j) {
            const double z = c * inputs[j] + s;
            phi(j, k) = z > 0.0 ? z : leaky_slope * z;
        }
    }
    return phi;
}

Eigen::VectorXd eval_angle_net(const AngleReluNet& net, const Eigen::VectorXd& inputs) {
    return angle_feature_matrix(net.thetas(), inputs, net.leaky_slope()) * net.outer();
}

Eigen::MatrixXd cosine_feature_matrix(const Eigen::MatrixXd& freq, const Eigen::VectorXd& phase,
                                      const Eigen::MatrixXd& inputs) {
    if (inputs.cols() != freq.cols()) {
        throw std::invalid_argument("cosine features: input dimension " + std::to_string(inputs.cols()) +
                                    " does not match frequency dimension " + std::to_string(freq.cols()));
    }
    Eigen::MatrixXd pre = inputs * freq.transpose();
    pre.rowwise() += phase.transpose();
    return pre.array().cos().matrix();
}

Eigen::MatrixXd eval_cosine_net(const CosineFeatureNet& net, const Eigen::MatrixXd& inputs) {
    Eigen::MatrixXd out = cosine_feature_matrix(net.freq(), net.phase(), inputs) * net.outer();
    out.rowwise() += net.bias().transpose();
    return out;
}

Eigen::MatrixXd ensemble_eval(std::span<const ModelPtr> models, const Eigen::MatrixXd& inputs) {
    if (models.empty()) throw std::invalid_argument("ensemble_eval: empty model list");
    const std::size_t in_dim = models.front()->input_dim();
    const std::size_t out_dim = models.front()->output_dim();
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(inputs.rows(), static_cast<Eigen::Index>(out_dim));
    for (const auto& model : models) {
        if (model->input_dim() != in_dim || model->output_dim() != out_dim) {
            throw std::invalid_argument("ensemble_eval: models disagree in input/output dimension");
        }
        sum += model->evaluate(inputs);
    }
    return sum / static_cast<double>(models.size());
}

}  // namespace dsopt
