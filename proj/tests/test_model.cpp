#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "dsopt/model.hpp"
#include "dsopt/random.hpp"

using namespace dsopt;

namespace {

Eigen::VectorXd random_vec(Rng& rng, Eigen::Index n, double lo, double hi) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
    return v;
}

Eigen::MatrixXd random_mat(Rng& rng, Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
    }
    return m;
}

}  // namespace

TEST(AngleFeatures, SpecialAngles) {
    const Eigen::VectorXd thetas = Eigen::Vector3d(0.0, std::numbers::pi / 2.0, std::numbers::pi);
    const Eigen::VectorXd x = Eigen::Vector2d(0.7, 0.5);
    const Eigen::MatrixXd phi = angle_feature_matrix(thetas, x);
    EXPECT_DOUBLE_EQ(phi(0, 0), 0.7);
    EXPECT_NEAR(phi(0, 1), 1.0, 1e-15);
    EXPECT_NEAR(phi(1, 1), 1.0, 1e-15);
    EXPECT_EQ(phi(1, 2), 0.0);
}

TEST(AngleFeatures, ReluAtZeroIsZeroAndLeakyOption) {
    const Eigen::VectorXd thetas = Eigen::VectorXd::Zero(1);
    EXPECT_EQ(angle_feature_matrix(thetas, Eigen::VectorXd::Zero(1))(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(angle_feature_matrix(thetas, Eigen::VectorXd::Constant(1, -2.0), 0.01)(0, 0), -0.02);
}

TEST(AngleFeatures, BoundedByOnePlusAbsX) {
    Rng rng(1);
    const Eigen::VectorXd thetas = random_vec(rng, 50, 0.0, 2.0 * std::numbers::pi);
    const Eigen::VectorXd x = random_vec(rng, 100, -1.0, 1.0);
    const Eigen::MatrixXd phi = angle_feature_matrix(thetas, x);
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        EXPECT_LE(phi.row(j).maxCoeff(), 1.0 + std::abs(x[j]) + 1e-15);
        EXPECT_GE(phi.row(j).minCoeff(), 0.0);
    }
}

TEST(AngleNet, SimpleCases) {
    const Eigen::VectorXd x = Eigen::Vector3d(-1.0, 0.0, 0.5);
    const AngleReluNet zero(Eigen::Vector2d(0.3, 2.0), Eigen::Vector2d::Zero());
    EXPECT_EQ(eval_angle_net(zero, x), Eigen::VectorXd::Zero(3));
    const AngleReluNet constant(Eigen::VectorXd::Constant(1, std::numbers::pi / 2.0), Eigen::VectorXd::Ones(1));
    for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(eval_angle_net(constant, x)[j], 1.0, 1e-15);
    EXPECT_THROW(AngleReluNet(Eigen::Vector2d(0, 1), Eigen::VectorXd::Ones(3)), std::invalid_argument);
}

TEST(AngleNet, MatchesNaiveDoubleLoop) {
    Rng rng(2);
    const Eigen::VectorXd thetas = random_vec(rng, 30, 0.0, 2.0 * std::numbers::pi);
    const Eigen::VectorXd outer = random_vec(rng, 30, -2.0, 2.0);
    const Eigen::VectorXd x = random_vec(rng, 40, -1.0, 1.0);
    const AngleReluNet net(thetas, outer);
    const Eigen::VectorXd fast = eval_angle_net(net, x);
    const Eigen::MatrixXd via_interface = net.evaluate(x);
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        double s = 0.0;
        for (Eigen::Index k = 0; k < thetas.size(); ++k) {
            s += outer[k] * std::max(0.0, std::cos(thetas[k]) * x[j] + std::sin(thetas[k]));
        }
        EXPECT_NEAR(fast[j], s, 1e-12);
        EXPECT_NEAR(via_interface(j, 0), s, 1e-12);
    }
}

TEST(AngleNet, PositiveHomogeneityInOuterWeight) {
    Rng rng(3);
    const Eigen::VectorXd thetas = random_vec(rng, 5, 0.0, 2.0 * std::numbers::pi);
    const Eigen::VectorXd outer = random_vec(rng, 5, -1.0, 1.0);
    const Eigen::VectorXd x = random_vec(rng, 100, -1.0, 1.0);
    const double c = 3.5;
    Eigen::VectorXd scaled = outer;
    scaled[2] *= c;
    const Eigen::VectorXd base = eval_angle_net(AngleReluNet(thetas, outer), x);
    const Eigen::VectorXd after = eval_angle_net(AngleReluNet(thetas, scaled), x);
    const Eigen::VectorXd node = angle_feature_matrix(thetas, x).col(2) * outer[2];
    for (Eigen::Index j = 0; j < x.size(); ++j) EXPECT_NEAR(after[j] - base[j], (c - 1.0) * node[j], 1e-12);
}

TEST(CosineNet, SimpleCases) {
    Rng rng(4);
    const Eigen::MatrixXd x = random_mat(rng, 6, 3);
    const Eigen::VectorXd bias = Eigen::Vector2d(0.5, -1.0);
    const CosineFeatureNet zero_outer(random_mat(rng, 4, 3), random_vec(rng, 4, 0.0, 6.0), Eigen::MatrixXd::Zero(4, 2), bias);
    const Eigen::MatrixXd out = eval_cosine_net(zero_outer, x);
    for (Eigen::Index j = 0; j < 6; ++j) EXPECT_EQ(out.row(j), bias.transpose());

    const Eigen::MatrixXd outer = random_mat(rng, 4, 2);
    const CosineFeatureNet flat(Eigen::MatrixXd::Zero(4, 3), Eigen::VectorXd::Zero(4), outer, Eigen::VectorXd::Zero(2));
    const Eigen::RowVectorXd sum = outer.colwise().sum();
    for (Eigen::Index j = 0; j < 6; ++j) EXPECT_NEAR((eval_cosine_net(flat, x).row(j) - sum).norm(), 0.0, 1e-14);
}

TEST(CosineNet, MatchesNaiveLoopAndRejectsBadDims) {
    Rng rng(5);
    const Eigen::MatrixXd freq = random_mat(rng, 7, 4);
    const Eigen::VectorXd phase = random_vec(rng, 7, 0.0, 6.28);
    const Eigen::MatrixXd outer = random_mat(rng, 7, 3);
    const Eigen::VectorXd bias = random_vec(rng, 3, -1.0, 1.0);
    const Eigen::MatrixXd x = random_mat(rng, 9, 4);
    const CosineFeatureNet net(freq, phase, outer, bias);
    const Eigen::MatrixXd out = eval_cosine_net(net, x);
    for (Eigen::Index j = 0; j < 9; ++j) {
        for (Eigen::Index c = 0; c < 3; ++c) {
            double s = bias[c];
            for (Eigen::Index k = 0; k < 7; ++k) s += outer(k, c) * std::cos(freq.row(k).dot(x.row(j)) + phase[k]);
            EXPECT_NEAR(out(j, c), s, 1e-10);
        }
    }
    EXPECT_THROW(eval_cosine_net(net, random_mat(rng, 2, 5)), std::invalid_argument);
    EXPECT_EQ(net.output_dim(), 3u);
    EXPECT_EQ(net.input_dim(), 4u);
}

TEST(Ensemble, AveragesModels) {
    Rng rng(6);
    const Eigen::VectorXd thetas = random_vec(rng, 5, 0.0, 6.28);
    const Eigen::VectorXd outer = random_vec(rng, 5, -1.0, 1.0);
    const Eigen::MatrixXd x = random_vec(rng, 10, -1.0, 1.0);
    auto u = std::make_shared<AngleReluNet>(thetas, outer);
    auto neg = std::make_shared<AngleReluNet>(thetas, Eigen::VectorXd(-outer));
    const std::vector<ModelPtr> same = {u, u, u};
    EXPECT_LE((ensemble_eval(same, x) - u->evaluate(x)).cwiseAbs().maxCoeff(), 1e-15);
    const std::vector<ModelPtr> cancel = {u, neg};
    EXPECT_LE(ensemble_eval(cancel, x).cwiseAbs().maxCoeff(), 1e-15);

    std::vector<ModelPtr> three;
    Eigen::MatrixXd manual = Eigen::MatrixXd::Zero(10, 1);
    for (int r = 0; r < 3; ++r) {
        auto m = std::make_shared<AngleReluNet>(random_vec(rng, 4, 0.0, 6.28), random_vec(rng, 4, -1.0, 1.0));
        manual += m->evaluate(x);
        three.push_back(m);
    }
    EXPECT_LE((ensemble_eval(three, x) - manual / 3.0).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_THROW(ensemble_eval(std::vector<ModelPtr>{}, x), std::invalid_argument);
}
