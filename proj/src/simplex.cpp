#include "dsopt/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace dsopt {

SimplexVector::SimplexVector(Eigen::VectorXd weights) : weights_(std::move(weights)) {
    if (weights_.size() == 0) throw std::invalid_argument("SimplexVector: empty weight vector");
    for (Eigen::Index i = 0; i < weights_.size(); ++i) {
        const double w = weights_[i];
        if (!std::isfinite(w) || w < 0.0) {
            std::ostringstream msg;
            msg << "SimplexVector: entry " << i << " is " << w << " (must be finite and >= 0)";
            throw std::invalid_argument(msg.str());
        }
    }
    const double total = weights_.sum();
    if (std::abs(total - 1.0) > kSumTolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "SimplexVector: entries sum to " << total << ", not 1";
        throw std::invalid_argument(msg.str());
    }
    // Drift of a few ulps is left alone so that serialized vectors reload bit-exactly.
    if (std::abs(total - 1.0) > 64.0 * std::numeric_limits<double>::epsilon()) weights_ /= total;
}

SimplexVector SimplexVector::uniform(std::size_t n) {
    if (n == 0) throw std::invalid_argument("SimplexVector::uniform: n must be positive");
    return SimplexVector(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n)));
}

SimplexVector SimplexVector::point_mass(std::size_t n, std::size_t index) {
    if (index >= n) throw std::invalid_argument("SimplexVector::point_mass: index out of range");
    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    w[static_cast<Eigen::Index>(index)] = 1.0;
    return SimplexVector(std::move(w));
}

double SimplexVector::entropy() const {
    double h = 0.0;
    for (Eigen::Index i = 0; i < weights_.size(); ++i) {
        if (weights_[i] > 0.0) h -= weights_[i] * std::log(weights_[i]);
    }
    return h;
}

SimplexVector project_to_simplex(const Eigen::VectorXd& v) {
    const Eigen::Index n = v.size();
    if (n == 0) throw std::invalid_argument("project_to_simplex: empty input");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::isfinite(v[i])) {
            std::ostringstream msg;
            msg << "project_to_simplex: entry " << i << " is not finite (" << v[i] << ")";
            throw std::invalid_argument(msg.str());
        }
    }

    std::vector<double> sorted(v.data(), v.data() + n);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());

    // Largest k with sorted[k-1] - (cumsum_k - 1)/k > 0.
    double cumsum = 0.0;
    double threshold = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        cumsum += sorted[static_cast<std::size_t>(k)];
        const double candidate = (cumsum - 1.0) / static_cast<double>(k + 1);
        if (sorted[static_cast<std::size_t>(k)] - candidate > 0.0) threshold = candidate;
    }

    Eigen::VectorXd w = (v.array() - threshold).max(0.0).matrix();
    const double total = w.sum();
    if (total <= 0.0) {
        // Only reachable through rounding when all entries tie at the threshold.
        w.setConstant(1.0 / static_cast<double>(n));
    } else if (total != 1.0) {
        w /= total;
    }
    return SimplexVector(std::move(w));
}

std::size_t sample_categorical(const SimplexVector& alpha, Rng& rng) {
    const std::size_t n = alpha.size();
    if (n == 1) return 0;
    const double u = rng.uniform();
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] <= 0.0) continue;
        cumulative += alpha[i];
        last_positive = i;
        if (u < cumulative) return i;
    }
    return last_positive;
}

}  // namespace dsopt
