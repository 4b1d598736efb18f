#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsopt/data.hpp"
#include "dsopt/model.hpp"
#include "dsopt/random.hpp"

namespace dsopt {

enum class RunStatus { ok, diverged, failed };
std::string run_status_name(RunStatus status);
RunStatus run_status_from_name(const std::string& name);

constexpr double kDivergenceLoss = 1e12;

struct HistoryPoint {
    std::size_t step = 0;
    double train_loss = 0.0;
};

struct BaselineConfig1D {
    double sigma_a = 1.0;
    double lr_a = 1e-3;
    double lr_theta = 1e-3;
    std::size_t batch = 200;
    std::size_t max_steps = 300000;
    double leaky_slope = 0.01;
    std::size_t log_every = 1000;
    std::uint64_t seed = 0;

    void validate() const;
};

struct AngleNetParams {
    Eigen::VectorXd thetas;
    Eigen::VectorXd outer;
};

/// a ~ N(0, sigma_a^2); theta = arctan(xi) + eta pi wrapped to [0, 2 pi),
/// xi ~ U[-1, 1], eta ~ Bernoulli(1/2).
AngleNetParams init_angle_params(std::size_t N, double sigma_a, Rng& rng);

/// One SGD step on the mean squared error over the given batch. Angles are
/// wrapped to [0, 2 pi) afterwards. Returns the batch loss before the step.
double sgd_angle_step(AngleNetParams& params, const Eigen::VectorXd& x, const Eigen::VectorXd& y, double lr_a,
                      double lr_theta, double leaky_slope);

struct Baseline1DResult {
    AngleNetParams params;
    double leaky_slope = 0.0;
    std::vector<HistoryPoint> history;  // full training loss every log_every steps
    RunStatus status = RunStatus::ok;
    std::size_t steps = 0;
    double final_train_loss = 0.0;

    AngleReluNet net() const { return AngleReluNet(params.thetas, params.outer, leaky_slope); }
};

Baseline1DResult train_sgd_angle_net(const BaselineConfig1D& config, const RegressionDataset& data, std::size_t N);

struct BaselineConfigMnist {
    double scale = 1.0;
    std::size_t epochs = 30;
    double lr = 1e-3;
    std::size_t batch = 100;
    std::uint64_t seed = 0;

    void validate() const;
};

struct CosineNetParams {
    Eigen::MatrixXd freq;   // N x d
    Eigen::VectorXd phase;  // N
    Eigen::MatrixXd outer;  // N x C
    Eigen::VectorXd bias;   // C
};

/// v ~ U[-l, l] with l = sqrt(6 / (d + N)) * scale; a Glorot-uniform; b = c = 0.
CosineNetParams init_cosine_params(std::size_t N, std::size_t d, std::size_t classes, double scale, Rng& rng);

struct MnistBaselineResult {
    CosineNetParams params;
    std::vector<HistoryPoint> history;  // training loss at init and after each epoch
    RunStatus status = RunStatus::ok;
    double final_train_loss = 0.0;

    CosineFeatureNet net() const { return CosineFeatureNet(params.freq, params.phase, params.outer, params.bias); }
};

/// Adam on all of (v, b, a, c) with softmax cross-entropy.
MnistBaselineResult train_adam_cosine_net(const BaselineConfigMnist& config, const ClassificationDataset& data,
                                          std::size_t N);

struct SweepAxis {
    std::string name;
    std::vector<double> values;
};

struct SweepOutcome {
    double final_train_loss = 0.0;
    double final_test_loss = 0.0;
    double accuracy = std::numeric_limits<double>::quiet_NaN();
    RunStatus status = RunStatus::ok;
    double wall_seconds = 0.0;
};

struct SweepRow {
    std::size_t cell = 0;
    std::vector<double> values;  // one per axis
    SweepOutcome outcome;
};

struct SweepTable {
    std::vector<SweepAxis> axes;
    std::vector<SweepRow> rows;  // sorted by cell
    std::optional<std::size_t> best;  // row index minimizing final_train_loss among ok rows
};

/// Values of grid cell `cell` (row-major, last axis fastest).
std::vector<double> sweep_cell_values(const std::vector<SweepAxis>& axes, std::size_t cell);
std::size_t sweep_cell_count(const std::vector<SweepAxis>& axes);

using SweepRunner = std::function<SweepOutcome(const std::vector<double>& values, std::size_t cell)>;

struct SweepOptions {
    /// Results CSV. Rows already present are kept and not rerun; new rows are
    /// appended as they finish and the file is rewritten sorted at the end.
    std::optional<std::filesystem::path> results;
    std::vector<std::string> header_lines;  // written as '# ' comments
    std::size_t jobs = 1;
    /// Stop after this many new cells (used to simulate interruption).
    std::optional<std::size_t> max_new_cells;
};

/// Runs every grid cell; a throwing runner yields a row with status "failed".
SweepTable sweep(const std::vector<SweepAxis>& axes, const SweepRunner& runner, const SweepOptions& options = {});

std::optional<std::size_t> best_row(const std::vector<SweepRow>& rows);

void write_sweep_csv(const SweepTable& table, const std::vector<std::string>& header_lines, std::ostream& out);
/// Rows from a results file written by sweep(); axis names must match.
std::vector<SweepRow> read_sweep_csv(const std::vector<SweepAxis>& axes, std::istream& in);

}  // namespace dsopt
