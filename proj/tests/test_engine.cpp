#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dsopt/basis.hpp"
#include "dsopt/data.hpp"
#include "dsopt/engine.hpp"
#include "dsopt/loss.hpp"
#include "dsopt/oracle.hpp"
#include "oracles.hpp"

using namespace dsopt;

namespace {

RegressionDataset small_regression(std::size_t m, std::uint64_t seed) {
    return sample_regression(gen_target(3, 0.5, 7), m, seed);
}

TrainConfig small_config() {
    TrainConfig c;
    c.R = 4;
    c.S = 1;
    c.k_max = 5;
    c.lr = 0.1;
    c.seed = 11;
    c.mode = DrawMode::product;
    c.node_count = 4;
    return c;
}

}  // namespace

TEST(NormalizeGradient, HandExample) {
    Eigen::VectorXd g(2);
    g << 4.0, 2.0;
    const auto ng = normalize_gradient(g);
    EXPECT_FALSE(ng.stationary);
    EXPECT_NEAR(ng.direction[0], 0.5, 1e-15);
    EXPECT_NEAR(ng.direction[1], -0.5, 1e-15);
}

TEST(NormalizeGradient, ConstantIsStationary) {
    const auto ng = normalize_gradient(Eigen::VectorXd::Constant(5, 3.25));
    EXPECT_TRUE(ng.stationary);
    EXPECT_EQ(ng.direction, Eigen::VectorXd::Zero(5));
    EXPECT_TRUE(normalize_gradient(Eigen::VectorXd::Constant(1, 2.0)).stationary);
    EXPECT_THROW(normalize_gradient(Eigen::VectorXd()), std::invalid_argument);
}

TEST(NormalizeGradient, ZeroMeanAndFixedNorm) {
    Rng rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(30));
        Eigen::VectorXd g(n);
        const double scale = std::pow(10.0, rng.uniform(-6.0, 6.0));
        for (Eigen::Index i = 0; i < n; ++i) g[i] = scale * rng.normal() + 100.0 * scale;
        const auto ng = normalize_gradient(g);
        ASSERT_FALSE(ng.stationary);
        EXPECT_LE(std::abs(ng.direction.sum()), 1e-12);
        EXPECT_NEAR(ng.direction.norm(), std::sqrt(static_cast<double>(n)) / static_cast<double>(n), 1e-10);
    }
}

TEST(TrainConfig, Validation) {
    TrainConfig c;
    EXPECT_NO_THROW(c.validate());
    c.R = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = TrainConfig{};
    c.S = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = TrainConfig{};
    c.lr = 0.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = TrainConfig{};
    c.tol = -1.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = TrainConfig{};
    c.k_max = 0;
    EXPECT_NO_THROW(c.validate());
}

TEST(Train, SingleComponentStaysPut) {
    AngleNetSampler sampler(make_angle_basis(1), 3, small_regression(50, 1));
    EmpiricalL2 loss;
    TrainConfig c = small_config();
    c.node_count = 3;
    const auto out = train(c, sampler, loss);
    EXPECT_EQ(out.mixture.alpha.size(), 1u);
    EXPECT_EQ(out.mixture.alpha[0], 1.0);
    for (const auto& rec : out.result.history) EXPECT_EQ(rec.alpha[0], 1.0);
}

TEST(Train, ZeroIterationsReturnsInitial) {
    AngleNetSampler sampler(make_angle_basis(5), 4, small_regression(50, 1));
    EmpiricalL2 loss;
    TrainConfig c = small_config();
    c.k_max = 0;
    const SimplexVector a0 = random_initial_alpha(5, 99);
    const auto out = train(c, sampler, loss, a0);
    EXPECT_EQ(out.mixture.alpha, a0);
    EXPECT_TRUE(out.result.history.empty());
    EXPECT_EQ(out.result.steps, 0u);
}

TEST(Train, RandomInitialAlphaIsValid) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto a = random_initial_alpha(7, seed);
        EXPECT_GE(a.weights().minCoeff(), 0.0);
        EXPECT_NEAR(a.weights().sum(), 1.0, 1e-12);
    }
    EXPECT_EQ(random_initial_alpha(7, 4), random_initial_alpha(7, 4));
    EXPECT_NE(random_initial_alpha(7, 4), random_initial_alpha(7, 5));
}

TEST(Train, SimplexFeasibleEveryStep) {
    AngleNetSampler sampler(make_angle_basis(12), 5, small_regression(60, 2));
    EmpiricalL2 loss;
    TrainConfig c = small_config();
    c.k_max = 40;
    c.lr = 0.5;
    const auto out = train(c, sampler, loss);
    ASSERT_EQ(out.result.history.size(), 40u);
    for (const auto& rec : out.result.history) {
        EXPECT_GE(rec.alpha.minCoeff(), 0.0);
        EXPECT_NEAR(rec.alpha.sum(), 1.0, 1e-9);
        EXPECT_TRUE(std::isfinite(rec.loss_estimate));
    }
}

TEST(Train, DeterministicHistories) {
    AngleNetSampler sampler(make_angle_basis(8), 4, small_regression(40, 3));
    EmpiricalL2 loss;
    TrainConfig c = small_config();
    c.k_max = 10;
    const auto a = train(c, sampler, loss);
    c.threads = 3;
    const auto b = train(c, sampler, loss);
    ASSERT_EQ(a.result.history.size(), b.result.history.size());
    for (std::size_t k = 0; k < a.result.history.size(); ++k) {
        EXPECT_EQ(a.result.history[k].alpha, b.result.history[k].alpha);
        EXPECT_EQ(a.result.history[k].raw_gradient, b.result.history[k].raw_gradient);
        EXPECT_EQ(a.result.history[k].loss_estimate, b.result.history[k].loss_estimate);
    }
}

TEST(Train, ToleranceStopsEarly) {
    AngleNetSampler sampler(make_angle_basis(4), 4, small_regression(40, 3));
    EmpiricalL2 loss;
    TrainConfig c = small_config();
    c.k_max = 20;
    c.tol = 10.0;  // any non-stationary normalized gradient is below this
    const auto out = train(c, sampler, loss);
    EXPECT_EQ(out.result.status, TrainStatus::converged);
    EXPECT_EQ(out.result.steps, 1u);
}

TEST(Train, OracleModeMatchesGridSearch) {
    Rng rng(21);
    for (int trial = 0; trial < 4; ++trial) {
        RandomInstanceOptions opt;
        opt.points = 6;
        opt.samples = 10;
        opt.components = 3;
        opt.loss = trial % 2 == 0 ? LossSpec{LossKind::l2, 1} : LossSpec{LossKind::cross_entropy, 3};
        const DiscreteInstance inst = random_instance(opt, rng);

        double grid_min = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= 100; ++i) {
            for (int j = 0; i + j <= 100; ++j) {
                Eigen::Vector3d a(i / 100.0, j / 100.0, (100 - i - j) / 100.0);
                grid_min = std::min(grid_min, exact_loss(inst, Eigen::VectorXd(a)));
            }
        }

        ExactGradientSource source(inst);
        TrainConfig c;
        c.k_max = 20000;
        c.lr = 1e-3;
        c.seed = static_cast<std::uint64_t>(trial);
        const auto res = train_alpha(c, source, 3);
        const double final_loss = exact_loss(inst, res.alpha);
        EXPECT_LE(final_loss, grid_min + 1e-4) << "trial " << trial;
    }
}

TEST(DrawModel, PointMassJointUsesOneComponent) {
    const MixtureBasis basis = make_angle_basis(6);
    AngleNetSampler sampler(basis, 5, small_regression(20, 4));
    const SimplexVector alpha = SimplexVector::point_mass(6, 2);
    const auto [lo, hi] = basis[2].support(0);
    Rng rng(5);
    for (int r = 0; r < 200; ++r) {
        const auto drawn = draw_model(sampler, alpha, DrawMode::joint, rng);
        const auto& net = dynamic_cast<const AngleReluNet&>(*drawn.model);
        for (Eigen::Index k = 0; k < net.thetas().size(); ++k) {
            EXPECT_GE(net.thetas()[k], lo);
            EXPECT_LE(net.thetas()[k], hi);
        }
    }
}

TEST(DrawModel, SingleComponentModesCoincide) {
    AngleNetSampler sampler(make_angle_basis(1), 3, small_regression(20, 4));
    const SimplexVector alpha = SimplexVector::uniform(1);
    Rng a(8), b(8);
    for (int r = 0; r < 20; ++r) {
        const auto j = draw_model(sampler, alpha, DrawMode::joint, a);
        const auto p = draw_model(sampler, alpha, DrawMode::product, b);
        EXPECT_EQ(j.train_predictions, p.train_predictions);
    }
}

TEST(DrawModel, ProductWithOneNodeMatchesJointInDistribution) {
    AngleNetSampler sampler(make_angle_basis(5), 1, small_regression(100, 6));
    Eigen::VectorXd w(5);
    w << 0.4, 0.05, 0.3, 0.15, 0.1;
    const SimplexVector alpha(w);
    Eigen::MatrixXd probes(5, 1);
    probes << -0.9, -0.4, 0.0, 0.5, 0.95;

    const std::size_t draws = 2000;
    std::vector<std::vector<double>> joint(5), product(5);
    Rng rj(101), rp(202);
    for (std::size_t r = 0; r < draws; ++r) {
        const Eigen::MatrixXd oj = draw_model(sampler, alpha, DrawMode::joint, rj).model->evaluate(probes);
        const Eigen::MatrixXd op = draw_model(sampler, alpha, DrawMode::product, rp).model->evaluate(probes);
        for (int p = 0; p < 5; ++p) {
            joint[p].push_back(oj(p, 0));
            product[p].push_back(op(p, 0));
        }
    }
    // Two-sample KS critical value at level 1e-3 per probe (Bonferroni over 5 probes).
    const double c_alpha = std::sqrt(-0.5 * std::log(1e-3 / 5.0 / 2.0));
    const double critical = c_alpha * std::sqrt(2.0 / static_cast<double>(draws));
    for (int p = 0; p < 5; ++p) {
        EXPECT_LT(test_oracles::ks_statistic(joint[p], product[p]), critical) << "probe " << p;
    }
}

TEST(EstimateEnsemble, SingleDrawIsOneModel) {
    AngleNetSampler sampler(make_angle_basis(4), 3, small_regression(30, 4));
    const SimplexVector alpha = SimplexVector::uniform(4);
    const Eigen::MatrixXd ubar = estimate_ensemble(sampler, alpha, 1, DrawMode::product, 5, 2);
    Rng rng = derive_stream(5, 2, StreamPurpose::ensemble, 0);
    EXPECT_EQ(ubar, draw_model(sampler, alpha, DrawMode::product, rng).train_predictions);
    EXPECT_THROW(estimate_ensemble(sampler, alpha, 0, DrawMode::product, 5, 2), std::invalid_argument);
}

TEST(EstimateEnsemble, IdenticalModelsGiveZeroVariance) {
    Rng rng(4);
    RandomInstanceOptions opt;
    opt.points = 1;
    opt.components = 2;
    DiscreteInstance inst = random_instance(opt, rng);
    DiscreteSampler sampler(inst);
    const SimplexVector alpha = SimplexVector::uniform(2);
    const Eigen::MatrixXd first = estimate_ensemble(sampler, alpha, 7, DrawMode::joint, 1, 0);
    for (std::uint64_t s = 2; s < 20; ++s) {
        EXPECT_EQ(estimate_ensemble(sampler, alpha, 7, DrawMode::joint, s, 0), first);
    }
    EXPECT_LE((first - inst.outputs[0]).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(EstimateGradient, ZeroWhenMeanMatchesLabels) {
    AngleNetSampler sampler(make_angle_basis(6), 3, small_regression(30, 4));
    EmpiricalL2 loss;
    const Eigen::MatrixXd ubar = sampler.labels();
    const Eigen::VectorXd g = estimate_gradient(ubar, sampler, 2, loss, 3, 0);
    EXPECT_EQ(g, Eigen::VectorXd::Zero(6));
}

TEST(EstimateGradient, IdenticalComponentsAgreeInExpectation) {
    const BasicDistribution c = scaled_translated(triangle_envelope(), 0.5, {2.0});
    AngleNetSampler sampler(MixtureBasis({c, c, scaled_translated(triangle_envelope(), 0.5, {4.0})}), 3,
                            small_regression(40, 9));
    EmpiricalL2 loss;
    const Eigen::MatrixXd ubar = Eigen::MatrixXd::Zero(40, 1);
    const std::size_t repeats = 1000;
    Eigen::VectorXd diffs(static_cast<Eigen::Index>(repeats));
    for (std::size_t r = 0; r < repeats; ++r) {
        const Eigen::VectorXd g = estimate_gradient(ubar, sampler, 1, loss, 1000 + r, 0);
        diffs[static_cast<Eigen::Index>(r)] = g[0] - g[1];
    }
    const double mean = diffs.mean();
    const double sd = std::sqrt((diffs.array() - mean).square().sum() / static_cast<double>(repeats - 1));
    EXPECT_GT(sd, 0.0);
    EXPECT_LE(std::abs(mean), 3.0 * sd / std::sqrt(static_cast<double>(repeats)));
}

TEST(EstimateGradient, DiscreteInstanceBands) {
    Rng rng(17);
    RandomInstanceOptions opt;
    opt.points = 5;
    opt.samples = 4;
    opt.components = 3;
    const DiscreteInstance inst = random_instance(opt, rng);
    DiscreteSampler sampler(inst);
    EmpiricalL2 loss;
    const SimplexVector alpha = random_initial_alpha(3, 5);
    const auto handles = engine_handles(sampler, loss, alpha, 1, 1, 77);
    const McReport report = mc_consistency(inst, handles, 10000);
    EXPECT_TRUE(report.ensemble_ok) << report.max_z_ensemble;
    EXPECT_TRUE(report.gradient_ok) << report.max_z_gradient;
}

TEST(Predict, SingleDrawHasZeroSpread) {
    AngleNetSampler sampler(make_angle_basis(4), 3, small_regression(30, 4));
    Eigen::MatrixXd x(3, 1);
    x << -0.5, 0.0, 0.5;
    const auto p = predict(sampler, SimplexVector::uniform(4), DrawMode::product, x, 1, 3);
    EXPECT_EQ(p.stddev, Eigen::MatrixXd::Zero(3, 1));
    EXPECT_THROW(predict(sampler, SimplexVector::uniform(4), DrawMode::product, x, 0, 3), std::invalid_argument);
}

TEST(Predict, DeterministicForIdenticalModels) {
    Rng rng(4);
    RandomInstanceOptions opt;
    opt.points = 1;
    opt.components = 3;
    DiscreteInstance inst = random_instance(opt, rng);
    DiscreteSampler sampler(inst);
    Eigen::MatrixXd idx(2, 1);
    idx << 0, 3;
    const auto p = predict(sampler, SimplexVector::uniform(3), DrawMode::joint, idx, 9, 1);
    EXPECT_LE(p.stddev.cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE(std::abs(p.mean(1, 0) - inst.outputs[0](3, 0)), 1e-15);
}

TEST(Predict, SingleComponentIsPlainAverage) {
    AngleNetSampler sampler(make_angle_basis(3), 2, small_regression(30, 4));
    Eigen::MatrixXd x(2, 1);
    x << -0.25, 0.75;
    const std::size_t R = 6;
    const SimplexVector alpha = SimplexVector::point_mass(3, 1);
    const auto p = predict(sampler, alpha, DrawMode::joint, x, R, 12);
    Eigen::MatrixXd manual = Eigen::MatrixXd::Zero(2, 1);
    for (std::size_t r = 0; r < R; ++r) {
        Rng rng = derive_stream(12, 0, StreamPurpose::predict, r);
        sample_categorical(alpha, rng);
        manual += sampler.draw_from_component(1, rng).model->evaluate(x);
    }
    manual /= static_cast<double>(R);
    EXPECT_LE((p.mean - manual).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(DrawModeName, RoundTrip) {
    EXPECT_EQ(draw_mode_from_name(draw_mode_name(DrawMode::joint)), DrawMode::joint);
    EXPECT_EQ(draw_mode_from_name(draw_mode_name(DrawMode::product)), DrawMode::product);
    EXPECT_THROW(draw_mode_from_name("mixed"), std::invalid_argument);
}
