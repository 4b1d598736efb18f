#include "dsopt/inner.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "dsopt/loss.hpp"
#include "dsopt/model.hpp"

namespace dsopt {

LsqSolution solve_ridge_lsq(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets, double ridge) {
    const Eigen::Index m = features.rows();
    const Eigen::Index n = features.cols();
    if (m == 0) throw std::invalid_argument("solve_ridge_lsq: empty dataset");
    if (targets.size() != m) throw std::invalid_argument("solve_ridge_lsq: target length mismatch");
    if (!features.allFinite()) throw std::invalid_argument("solve_ridge_lsq: non-finite features");
    if (!(ridge >= 0.0)) throw std::invalid_argument("solve_ridge_lsq: ridge must be non-negative");

    Eigen::MatrixXd stacked(m + n, n);
    stacked.topRows(m) = features;
    stacked.bottomRows(n) = std::sqrt(ridge) * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + n);
    rhs.head(m) = targets;

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(stacked);
    LsqSolution sol;
    sol.outer = qr.solve(rhs);
    sol.fitted = features * sol.outer;
    sol.report.residual_loss = (sol.fitted - targets).squaredNorm() / static_cast<double>(m);
    sol.report.iterations = 1;

    const auto diag = qr.matrixQR().diagonal().cwiseAbs();
    if (n > 0) {
        const double largest = diag.maxCoeff();
        sol.report.condition_warning = largest == 0.0 || diag.minCoeff() < 1e-12 * largest;
    }
    return sol;
}

LsqSolution solve_outer_lsq(const Eigen::VectorXd& thetas, const RegressionDataset& data, double ridge) {
    if (data.size() == 0) throw std::invalid_argument("solve_outer_lsq: empty dataset");
    return solve_ridge_lsq(angle_feature_matrix(thetas, data.inputs), data.labels, ridge);
}

AdamSolution solve_outer_adam_features(const Eigen::MatrixXd& features, const ClassificationDataset& data,
                                       const AdamConfig& config, Rng& rng) {
    const Eigen::Index m = features.rows();
    const Eigen::Index nodes = features.cols();
    const auto classes = static_cast<Eigen::Index>(data.class_count);
    if (m == 0) throw std::invalid_argument("solve_outer_adam: empty dataset");
    if (m != static_cast<Eigen::Index>(data.size())) throw std::invalid_argument("solve_outer_adam: feature rows mismatch");
    if (config.batch == 0) throw std::invalid_argument("solve_outer_adam: batch must be positive");

    AdamSolution sol;
    sol.outer = Eigen::MatrixXd::Zero(nodes, classes);
    sol.bias = Eigen::VectorXd::Zero(classes);
    Eigen::MatrixXd m_a = Eigen::MatrixXd::Zero(nodes, classes), v_a = m_a;
    Eigen::VectorXd m_c = Eigen::VectorXd::Zero(classes), v_c = m_c;

    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::size_t t = 0;
    const auto batch = static_cast<Eigen::Index>(config.batch);
    Eigen::MatrixXd zb, logits;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        for (Eigen::Index start = 0; start < m; start += batch) {
            const Eigen::Index size = std::min(batch, m - start);
            zb.resize(size, nodes);
            Eigen::VectorXd yb(size);
            for (Eigen::Index r = 0; r < size; ++r) {
                zb.row(r) = features.row(order[static_cast<std::size_t>(start + r)]);
                yb[r] = data.labels[order[static_cast<std::size_t>(start + r)]];
            }
            logits = zb * sol.outer;
            logits.rowwise() += sol.bias.transpose();
            Eigen::MatrixXd g = softmax_rows(logits);
            for (Eigen::Index r = 0; r < size; ++r) g(r, static_cast<Eigen::Index>(yb[r])) -= 1.0;
            g /= static_cast<double>(size);
            const Eigen::MatrixXd grad_a = zb.transpose() * g;
            const Eigen::VectorXd grad_c = g.colwise().sum().transpose();

            ++t;
            const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
            const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
            m_a = config.beta1 * m_a + (1.0 - config.beta1) * grad_a;
            v_a = config.beta2 * v_a + (1.0 - config.beta2) * grad_a.cwiseAbs2();
            m_c = config.beta1 * m_c + (1.0 - config.beta1) * grad_c;
            v_c = config.beta2 * v_c + (1.0 - config.beta2) * grad_c.cwiseAbs2();
            sol.outer.array() -= config.lr * (m_a.array() / bc1) / ((v_a.array() / bc2).sqrt() + config.eps);
            sol.bias.array() -= config.lr * (m_c.array() / bc1) / ((v_c.array() / bc2).sqrt() + config.eps);
        }
    }

    sol.fitted = features * sol.outer;
    sol.fitted.rowwise() += sol.bias.transpose();
    sol.report.iterations = t;
    sol.report.residual_loss = SoftmaxCrossEntropy(data.class_count).value(sol.fitted, data.labels);
    return sol;
}

AdamSolution solve_outer_adam(const Eigen::MatrixXd& freq, const Eigen::VectorXd& phase,
                              const ClassificationDataset& data, const AdamConfig& config, Rng& rng) {
    return solve_outer_adam_features(cosine_feature_matrix(freq, phase, data.inputs), data, config, rng);
}

}  // namespace dsopt
