#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsopt/engine.hpp"
#include "dsopt/loss.hpp"
#include "dsopt/simplex.hpp"

namespace dsopt {

/// Finite parameter set with tabulated model outputs. Every distribution-space
/// quantity is an exact finite sum here.
struct DiscreteInstance {
    Eigen::MatrixXd param_points;            // M x d (descriptive only)
    std::vector<Eigen::MatrixXd> outputs;    // M tables, each m x C: outputs[k](j, c) = u_{w_k}(x_j)_c
    Eigen::VectorXd labels;                  // m
    std::vector<SimplexVector> components;   // n discrete phi_i, each over the M points
    LossSpec loss;
    /// Frozen reference values checked by the verify suite (fixture regression).
    std::map<std::string, double> expectations;

    std::size_t point_count() const { return outputs.size(); }
    std::size_t sample_count() const { return static_cast<std::size_t>(labels.size()); }
    std::size_t component_count() const { return components.size(); }
    std::size_t output_dim() const { return outputs.empty() ? 0 : static_cast<std::size_t>(outputs.front().cols()); }

    void validate() const;
};

/// psi_i = sum_k phi_i[k] U_k: the exact mean model of each component.
std::vector<Eigen::MatrixXd> component_means(const DiscreteInstance& inst);

/// ubar = sum_i alpha_i psi_i. `alpha` may be any real vector (used for finite differences).
Eigen::MatrixXd exact_mean(const DiscreteInstance& inst, const Eigen::VectorXd& alpha);
double exact_loss(const DiscreteInstance& inst, const Eigen::VectorXd& alpha);
inline double exact_loss(const DiscreteInstance& inst, const SimplexVector& alpha) {
    return exact_loss(inst, alpha.weights());
}
/// dl/dalpha_i = < dJ/du(ubar), psi_i >.
Eigen::VectorXd exact_gradient(const DiscreteInstance& inst, const Eigen::VectorXd& alpha);
inline Eigen::VectorXd exact_gradient(const DiscreteInstance& inst, const SimplexVector& alpha) {
    return exact_gradient(inst, alpha.weights());
}

/// L(w_k) = J[u_{w_k}] for every parameter point.
Eigen::VectorXd point_losses(const DiscreteInstance& inst);

/// Copy of the instance whose components are the M point masses.
DiscreteInstance with_point_mass_components(const DiscreteInstance& inst);

struct RandomInstanceOptions {
    std::size_t points = 6;      // M
    std::size_t samples = 8;     // m
    std::size_t components = 3;  // n
    LossSpec loss;
    /// Components are point masses on distinct points instead of random vectors.
    bool point_mass_components = false;
};

DiscreteInstance random_instance(const RandomInstanceOptions& options, Rng& rng);

/// Model that looks up a tabulated output row; inputs are sample indices (m' x 1).
class TabulatedModel final : public ModelFunction {
public:
    explicit TabulatedModel(Eigen::MatrixXd table) : table_(std::move(table)) {}
    std::size_t input_dim() const override { return 1; }
    std::size_t output_dim() const override { return static_cast<std::size_t>(table_.cols()); }
    Eigen::MatrixXd evaluate(const Eigen::MatrixXd& inputs) const override;

private:
    Eigen::MatrixXd table_;
};

/// Engine adapter: component i draws point k with probability phi_i[k].
class DiscreteSampler final : public ModelSampler {
public:
    explicit DiscreteSampler(const DiscreteInstance& inst);
    std::string model_kind() const override { return "tabulated"; }
    std::size_t component_count() const override { return inst_.component_count(); }
    const Eigen::VectorXd& labels() const override { return inst_.labels; }
    DrawnModel draw_from_component(std::size_t i, Rng& rng) const override;

private:
    const DiscreteInstance& inst_;
    std::vector<ModelPtr> models_;
};

/// Exact gradients in place of Monte-Carlo estimates ("oracle mode" training).
class ExactGradientSource final : public GradientSource {
public:
    explicit ExactGradientSource(const DiscreteInstance& inst) : inst_(inst) {}
    GradientEstimate evaluate(const SimplexVector& alpha, std::size_t step) override;

private:
    const DiscreteInstance& inst_;
};

struct ExactMinimum {
    SimplexVector alpha;
    double loss = 0.0;
    std::size_t iterations = 0;
};

/// Accelerated projected gradient with backtracking on l over the simplex,
/// started from the uniform vector.
ExactMinimum minimize_exact_loss(const DiscreteInstance& inst, std::size_t max_iterations = 20000);

struct Prop1Report {
    double mixture_min = 0.0;
    double pointmass_min = 0.0;
    bool holds = false;
};

/// Mixture minimum over all measures on the finite set versus the best point
/// mass; holds when mixture_min <= pointmass_min + 1e-6.
Prop1Report verify_prop1(const DiscreteInstance& inst, std::size_t budget = 20000);

struct LinearCaseReport {
    double l0 = 0.0;                       // min_k L(w_k)
    std::size_t argmin_size = 0;
    std::size_t trials = 0;
    std::size_t supported_trials = 0;      // measures supported on the argmin set
    double max_supported_gap = 0.0;        // max |F - l0| over supported measures
    double min_unsupported_gap = 0.0;      // min F - l0 over the others (inf if none)
    double min_gap_any = 0.0;              // min F - l0 over all trials
    bool holds = false;
};

constexpr double kLinearEqualityTol = 1e-10;
constexpr double kLinearStrictGap = 1e-6;

/// Checks F[mu] >= l0 with equality exactly for measures supported on argmin L.
/// Half the trials are drawn on the argmin set, half with full support.
/// Throws std::invalid_argument for a non-linear loss.
LinearCaseReport verify_linear_case(const DiscreteInstance& inst, std::size_t trials, Rng& rng);

/// max over trials of l((a+b)/2) - (l(a)+l(b))/2 for random simplex points a, b.
double convexity_probe(const DiscreteInstance& inst, std::size_t trials, Rng& rng);

/// Two-node toy in product mode: node parameters drawn i.i.d. from
/// rho = sum_i alpha_i phi_i over M points; pair_outputs[k1 * M + k2] is the
/// m x 1 output of the model with nodes (k1, k2).
struct ProductToy {
    std::vector<Eigen::MatrixXd> pair_outputs;
    Eigen::VectorXd labels;
    std::vector<SimplexVector> components;
    LossSpec loss;

    std::size_t point_count() const { return components.front().size(); }
};

ProductToy random_product_toy(std::size_t points, std::size_t samples, std::size_t components, Rng& rng);
double product_exact_loss(const ProductToy& toy, const Eigen::VectorXd& alpha);
double product_convexity_probe(const ProductToy& toy, std::size_t trials, Rng& rng);

/// Estimators under test. Each call receives a repeat index and must use
/// independent randomness per index.
struct EstimatorHandles {
    SimplexVector alpha;
    std::function<Eigen::MatrixXd(std::size_t)> ensemble;
    std::function<Eigen::VectorXd(std::size_t)> gradient;
};

/// Engine estimators (joint mode) on a discrete instance.
EstimatorHandles engine_handles(const DiscreteSampler& sampler, const LossFunctional& loss,
                                const SimplexVector& alpha, std::size_t R, std::size_t S, std::uint64_t seed);

struct McReport {
    double max_z_ensemble = 0.0;  // max |mean - exact| / (sd / sqrt(repeats))
    double max_z_gradient = 0.0;
    std::size_t ensemble_outside = 0;
    std::size_t gradient_outside = 0;
    bool ensemble_ok = false;
    bool gradient_ok = false;
};

/// Means over `repeats` runs must fall in 3-sigma bands (sample standard
/// deviation) around exact_mean and exact_gradient. Zero-variance entries must
/// match to 1e-12.
McReport mc_consistency(const DiscreteInstance& inst, const EstimatorHandles& handles, std::size_t repeats);

void write_instance(const DiscreteInstance& inst, std::ostream& out);
DiscreteInstance read_instance(std::istream& in);
DiscreteInstance load_instance(const std::filesystem::path& path);
void save_instance(const DiscreteInstance& inst, const std::filesystem::path& path);

struct CheckResult {
    std::string name;
    double statistic = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct OracleSuiteOptions {
    std::vector<std::filesystem::path> fixtures;
    std::size_t random_instances = 20;
    std::size_t convexity_trials = 500;
    std::size_t linear_trials = 100;
    std::size_t mc_repeats = 10000;
    std::uint64_t seed = 1;
};

/// Runs the exact-world verification checks; one CheckResult per check.
std::vector<CheckResult> run_oracle_suite(const OracleSuiteOptions& options);

}  // namespace dsopt
