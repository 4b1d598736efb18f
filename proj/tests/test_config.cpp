#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dsopt/config.hpp"
#include "dsopt/experiments.hpp"

using namespace dsopt;

namespace {

std::size_t error_line(const std::string& text) {
    try {
        Config::parse_string(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    ADD_FAILURE() << "expected ConfigError for: " << text;
    return 0;
}

std::size_t experiment_error_line(const std::string& text) {
    try {
        experiment_from_config(Config::parse_string(text));
    } catch (const ConfigError& e) {
        return e.line();
    }
    ADD_FAILURE() << "expected ConfigError for: " << text;
    return 0;
}

}  // namespace

TEST(Config, ParsesScalarsAndComments) {
    const Config c = Config::parse_string(
        "# leading comment\n"
        "experiment = regress1d\n"
        "\n"
        "train.lr = 0.1   # trailing comment\n"
        "train.k_max=500\n"
        "name = \"quoted value\"\n"
        "flag = true\n");
    EXPECT_EQ(c.get_string("experiment", ""), "regress1d");
    EXPECT_DOUBLE_EQ(c.get_real("train.lr", 0), 0.1);
    EXPECT_EQ(c.get_uint("train.k_max", 0), 500u);
    EXPECT_EQ(c.get_string("name", ""), "quoted value");
    EXPECT_TRUE(c.get_bool("flag", false));
    EXPECT_EQ(c.get_real("missing", 2.5), 2.5);
    EXPECT_THROW(c.require_string("missing"), ConfigError);
}

TEST(Config, LineLevelErrors) {
    EXPECT_EQ(error_line("a = 1\nnot a pair\n"), 2u);
    EXPECT_EQ(error_line("a = 1\nb =\n"), 2u);
    EXPECT_EQ(error_line("a = 1\n\n a = 2\n"), 3u);
    EXPECT_EQ(error_line(" = 4\n"), 1u);
    EXPECT_EQ(error_line("bad key! = 4\n"), 1u);
}

TEST(Config, TypeErrorsReportLine) {
    const Config c = Config::parse_string("x = 1\ny = abc\nz = -3\nw = maybe\n");
    try {
        c.get_real("y", 0);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    EXPECT_THROW(c.get_uint("z", 0), ConfigError);
    EXPECT_THROW(c.get_bool("w", false), ConfigError);
}

TEST(Config, UnknownKeysRejected) {
    const Config c = Config::parse_string("train.lr = 1\nsweep.lr_a = [1, 2]\ntrain.lrr = 3\n");
    try {
        c.reject_unknown({"train.lr", "sweep."});
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_NE(std::string(e.what()).find("train.lrr"), std::string::npos);
    }
    EXPECT_NO_THROW(c.reject_unknown({"train.lr", "train.lrr", "sweep."}));
    EXPECT_EQ(experiment_error_line("experiment = regress1d\ntrain.learning_rate = 0.1\n"), 2u);
}

TEST(Config, LogspaceGrid) {
    const auto v = parse_real_list("{logspace(-6,-3,7)}");
    ASSERT_EQ(v.size(), 7u);
    for (std::size_t i = 0; i < 7; ++i) {
        EXPECT_NEAR(v[i], std::pow(10.0, -6.0 + 0.5 * static_cast<double>(i)), 1e-15 * std::pow(10.0, -3.0));
    }
    EXPECT_NEAR(v[3], 3.1622776601683795e-5, 1e-18);
    const auto w = parse_real_list("logspace(-6,0,11)");
    ASSERT_EQ(w.size(), 11u);
    EXPECT_NEAR(w[8], 0.0630957344480193, 1e-15);
    EXPECT_DOUBLE_EQ(w.back(), 1.0);
}

TEST(Config, ListForms) {
    EXPECT_EQ(parse_real_list("[1, 2, 4, 8, 16, 32]"), (std::vector<double>{1, 2, 4, 8, 16, 32}));
    EXPECT_EQ(parse_real_list("3"), (std::vector<double>{3}));
    EXPECT_EQ(parse_real_list("linspace(0, 1, 3), 5"), (std::vector<double>{0, 0.5, 1, 5}));
    EXPECT_THROW(parse_real_list("[1, , 2]"), std::invalid_argument);
    EXPECT_THROW(parse_real_list("cubespace(1,2,3)"), std::invalid_argument);
    EXPECT_THROW(parse_real_list("logspace(1,2)"), std::invalid_argument);
}

TEST(Config, CanonicalHashIgnoresLayout) {
    const Config a = Config::parse_string("b = 2\na = 1\n");
    const Config b = Config::parse_string("# comment\na=1\n\nb =   2\n");
    const Config c = Config::parse_string("a = 1\nb = 3\n");
    EXPECT_EQ(a.canonical(), b.canonical());
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_NE(a.hash(), c.hash());
}

TEST(Config, RelativePathsResolveAgainstFile) {
    const auto dir = std::filesystem::temp_directory_path() / "dsopt_test_config";
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "x.conf");
        out << "data.train_images = imgs/train\n";
    }
    const Config c = Config::load(dir / "x.conf");
    EXPECT_EQ(c.resolve_path(c.get_string("data.train_images", "")), dir / "imgs/train");
    EXPECT_EQ(c.resolve_path("/abs/path"), std::filesystem::path("/abs/path"));
    EXPECT_THROW(Config::load(dir / "missing.conf"), ConfigError);
}

TEST(Experiment, PaperOneDimensionalSettings) {
    const Config c = Config::parse_string(
        "experiment = regress1d\n"
        "seed = 3\n"
        "basis.kind = angle-triangle\n"
        "basis.n = 100\n"
        "train.node_count = 50\n"
        "train.R = 20\n"
        "train.k_max = 500\n"
        "train.lr = 0.1\n"
        "train.mode = product\n"
        "target.K = 10\n"
        "target.t = 5\n"
        "data.train_size = 1000\n"
        "data.test_size = 1000\n"
        "baseline.batch = 200\n"
        "baseline.max_steps = 300000\n"
        "baseline.leaky_slope = 0.01\n"
        "sweep.sigma_a = {1,2,4,8,16,32}\n"
        "sweep.lr_a = {logspace(-6,0,11)}\n"
        "sweep.lr_theta = {logspace(-6,-3,7)}\n");
    const ExperimentConfig e = experiment_from_config(c);
    EXPECT_EQ(e.kind, ExperimentKind::regress1d);
    EXPECT_EQ(e.seed, 3u);
    EXPECT_EQ(e.train.seed, 3u);
    EXPECT_EQ(e.basis.n, 100u);
    EXPECT_EQ(e.train.node_count, 50u);
    EXPECT_EQ(e.train.R, 20u);
    EXPECT_EQ(e.train.k_max, 500u);
    EXPECT_DOUBLE_EQ(e.train.lr, 0.1);
    EXPECT_EQ(e.train.mode, DrawMode::product);
    EXPECT_EQ(e.target.K, 10u);
    EXPECT_DOUBLE_EQ(e.target.t, 5.0);
    EXPECT_EQ(e.baseline1d.max_steps, 300000u);
    ASSERT_EQ(e.sweep_axes.size(), 3u);
    std::size_t total = 1;
    for (const auto& axis : e.sweep_axes) total *= axis.values.size();
    EXPECT_EQ(total, 6u * 11u * 7u);
    EXPECT_FALSE(e.config_hash.empty());
}

TEST(Experiment, PaperMnistSettings) {
    const Config c = Config::parse_string(
        "experiment = mnist-cosine\n"
        "basis.kind = gauss-uniform\n"
        "basis.n = 65\n"
        "train.node_count = 100\n"
        "inner.epochs = 2\n"
        "inner.lr = 0.001\n"
        "data.train_size = 5000\n"
        "data.test_size = 1000\n"
        "baseline.epochs = 30\n"
        "sweep.scale = [0.0000152587890625, 1, 65536]\n");
    const ExperimentConfig e = experiment_from_config(c);
    EXPECT_EQ(e.kind, ExperimentKind::mnist_cosine);
    EXPECT_EQ(e.basis.kind, "gauss-uniform");
    EXPECT_EQ(e.basis.n, 65u);
    EXPECT_EQ(e.inner.epochs, 2u);
    EXPECT_EQ(e.baseline_mnist.epochs, 30u);
    EXPECT_EQ(e.mnist.train_size, 5000u);
    ASSERT_EQ(e.sweep_axes.size(), 1u);
    EXPECT_EQ(e.sweep_axes[0].values.front(), std::pow(2.0, -16));
    const auto basis = e.basis.build(784);
    EXPECT_EQ(basis.size(), 65u);
    EXPECT_EQ(basis.dimension(), 785u);
}

TEST(Experiment, DefaultsFollowKind) {
    const auto one_d = experiment_from_config(Config::parse_string("experiment = regress1d\n"));
    EXPECT_EQ(one_d.basis.kind, "angle-triangle");
    EXPECT_EQ(one_d.train.mode, DrawMode::product);
    EXPECT_EQ(one_d.train.node_count, 50u);
    const auto mnist = experiment_from_config(Config::parse_string("experiment = mnist-cosine\n"));
    EXPECT_EQ(mnist.basis.kind, "gauss-uniform");
    EXPECT_EQ(mnist.train.node_count, 100u);
}

TEST(Experiment, InvalidValuesRejected) {
    EXPECT_EQ(experiment_error_line("experiment = regress1d\ntrain.R = 0\n"), 2u);
    EXPECT_EQ(experiment_error_line("experiment = regress1d\ntrain.lr = -1\n"), 2u);
    EXPECT_EQ(experiment_error_line("experiment = regress1d\ntrain.mode = sideways\n"), 2u);
    EXPECT_EQ(experiment_error_line("experiment = regress2d\n"), 1u);
    EXPECT_EQ(experiment_error_line("experiment = regress1d\nbasis.kind = square\n"), 2u);
    EXPECT_EQ(experiment_error_line("experiment = regress1d\nsweep.warp = [1, 2]\n"), 2u);
}

TEST(Experiment, MissingInputFilesReported) {
    const auto e = experiment_from_config(Config::parse_string(
        "experiment = mnist-cosine\n"
        "data.train_images = /nonexistent/train-images\n"
        "data.train_labels = /nonexistent/train-labels\n"
        "data.test_images = /nonexistent/test-images\n"
        "data.test_labels = /nonexistent/test-labels\n"));
    EXPECT_THROW(check_input_paths(e), ConfigError);
}

TEST(Experiment, AxisApplication) {
    BaselineConfig1D b;
    apply_axis_1d(b, "sigma_a", 8);
    apply_axis_1d(b, "lr_a", 0.063);
    apply_axis_1d(b, "lr_theta", 3.16e-5);
    EXPECT_EQ(b.sigma_a, 8);
    EXPECT_EQ(b.lr_a, 0.063);
    EXPECT_EQ(b.lr_theta, 3.16e-5);
    EXPECT_THROW(apply_axis_1d(b, "momentum", 0.9), std::invalid_argument);
    BaselineConfigMnist m;
    apply_axis_mnist(m, "scale", 0.25);
    EXPECT_EQ(m.scale, 0.25);
    EXPECT_THROW(apply_axis_mnist(m, "sigma_a", 1), std::invalid_argument);
}
