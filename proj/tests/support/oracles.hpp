#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace dsopt::test_oracles {

/// Projection onto the simplex by enumerating every support set S, solving the
/// equality-constrained problem on S and keeping the feasible minimizer.
inline Eigen::VectorXd active_set_projection(const Eigen::VectorXd& v) {
    const auto n = v.size();
    Eigen::VectorXd best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        int count = 0;
        double sum = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                ++count;
                sum += v[i];
            }
        }
        const double shift = (1.0 - sum) / count;
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        bool feasible = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                x[i] = v[i] + shift;
                if (x[i] < -1e-14) feasible = false;
            }
        }
        if (!feasible) continue;
        const double d = (x - v).squaredNorm();
        if (d < best_dist) {
            best_dist = d;
            best = x.cwiseMax(0.0);
        }
    }
    return best;
}

/// Composite Simpson rule on [a, b] with `intervals` (even) sub-intervals.
template <class F>
double simpson(F&& f, double a, double b, int intervals) {
    if (intervals % 2) ++intervals;
    const double h = (b - a) / intervals;
    double s = f(a) + f(b);
    for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

/// Upper tail probability of the chi-square distribution via the regularized
/// incomplete gamma series / continued fraction.
inline double chi_square_sf(double x, double dof) {
    const double a = dof / 2.0, z = x / 2.0;
    if (z <= 0.0) return 1.0;
    const double lg = std::lgamma(a);
    if (z < a + 1.0) {
        double term = 1.0 / a, sum = term;
        for (int n = 1; n < 1000; ++n) {
            term *= z / (a + n);
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-15) break;
        }
        return 1.0 - sum * std::exp(-z + a * std::log(z) - lg);
    }
    double b = z + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-z + a * std::log(z) - lg) * h;
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

}  // namespace dsopt::test_oracles
