#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "dsopt/random.hpp"

namespace dsopt {

/// Mixture coefficients: a point on the probability simplex.
///
/// Entries are non-negative and sum to one. Construction renormalizes sums that
/// drift from one by at most `kSumTolerance`; anything further off is rejected.
class SimplexVector {
public:
    static constexpr double kSumTolerance = 1e-9;

    explicit SimplexVector(Eigen::VectorXd weights);

    static SimplexVector uniform(std::size_t n);
    static SimplexVector point_mass(std::size_t n, std::size_t index);

    std::size_t size() const { return static_cast<std::size_t>(weights_.size()); }
    double operator[](std::size_t i) const { return weights_[static_cast<Eigen::Index>(i)]; }
    const Eigen::VectorXd& weights() const { return weights_; }

    /// Shannon entropy in nats (0 log 0 = 0).
    double entropy() const;

    friend bool operator==(const SimplexVector& a, const SimplexVector& b) {
        return a.weights_ == b.weights_;
    }

private:
    Eigen::VectorXd weights_;
};

/// Euclidean projection onto the probability simplex (sort-and-threshold).
/// Throws std::invalid_argument on empty or non-finite input.
SimplexVector project_to_simplex(const Eigen::VectorXd& v);

/// Draws index i with probability alpha_i. A one-element simplex returns 0
/// without consuming the stream.
std::size_t sample_categorical(const SimplexVector& alpha, Rng& rng);

}  // namespace dsopt
