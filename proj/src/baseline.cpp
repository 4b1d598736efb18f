#include "dsopt/baseline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dsopt/loss.hpp"
#include "dsopt/parallel.hpp"
#include "dsopt/text.hpp"

namespace dsopt {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double theta) {
    double w = theta - kTwoPi * std::floor(theta / kTwoPi);
    if (w >= kTwoPi) w = 0.0;
    return w;
}

bool is_divergent(double loss) { return !std::isfinite(loss) || loss > kDivergenceLoss; }

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    return idx;
}

double angle_train_loss(const AngleNetParams& p, double slope, const RegressionDataset& data) {
    const Eigen::VectorXd pred = angle_feature_matrix(p.thetas, data.inputs, slope) * p.outer;
    return (pred - data.labels).squaredNorm() / static_cast<double>(data.size());
}

}  // namespace

std::string run_status_name(RunStatus status) {
    switch (status) {
        case RunStatus::ok: return "ok";
        case RunStatus::diverged: return "diverged";
        case RunStatus::failed: return "failed";
    }
    return "failed";
}

RunStatus run_status_from_name(const std::string& name) {
    if (name == "ok") return RunStatus::ok;
    if (name == "diverged") return RunStatus::diverged;
    if (name == "failed") return RunStatus::failed;
    throw std::invalid_argument("unknown run status '" + name + "'");
}

void BaselineConfig1D::validate() const {
    if (!(sigma_a >= 0.0) || !std::isfinite(sigma_a)) throw std::invalid_argument("baseline: sigma_a must be >= 0");
    if (!(lr_a >= 0.0) || !std::isfinite(lr_a)) throw std::invalid_argument("baseline: lr_a must be >= 0");
    if (!(lr_theta >= 0.0) || !std::isfinite(lr_theta)) throw std::invalid_argument("baseline: lr_theta must be >= 0");
    if (batch == 0) throw std::invalid_argument("baseline: batch must be positive");
    if (log_every == 0) throw std::invalid_argument("baseline: log_every must be positive");
    if (!(leaky_slope >= 0.0 && leaky_slope < 1.0)) throw std::invalid_argument("baseline: leaky slope must be in [0, 1)");
}

AngleNetParams init_angle_params(std::size_t N, double sigma_a, Rng& rng) {
    AngleNetParams p;
    p.thetas.resize(static_cast<Eigen::Index>(N));
    p.outer.resize(static_cast<Eigen::Index>(N));
    for (Eigen::Index j = 0; j < p.thetas.size(); ++j) {
        p.outer[j] = sigma_a * rng.normal();
        const double xi = rng.uniform(-1.0, 1.0);
        const double eta = rng.bernoulli(0.5) ? 1.0 : 0.0;
        p.thetas[j] = wrap_angle(std::atan(xi) + eta * std::numbers::pi);
    }
    return p;
}

double sgd_angle_step(AngleNetParams& params, const Eigen::VectorXd& x, const Eigen::VectorXd& y, double lr_a,
                      double lr_theta, double leaky_slope) {
    const Eigen::Index b = x.size();
    const Eigen::Index n = params.thetas.size();
    const Eigen::MatrixXd act = angle_feature_matrix(params.thetas, x, leaky_slope);
    const Eigen::VectorXd r = act * params.outer - y;
    const double loss = r.squaredNorm() / static_cast<double>(b);
    const double scale = 2.0 / static_cast<double>(b);

    const Eigen::VectorXd grad_a = scale * (act.transpose() * r);
    Eigen::VectorXd grad_theta(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double c = std::cos(params.thetas[k]);
        const double s = std::sin(params.thetas[k]);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < b; ++i) {
            const double z = c * x[i] + s;
            const double slope = z > 0.0 ? 1.0 : leaky_slope;
            acc += r[i] * slope * (-s * x[i] + c);
        }
        grad_theta[k] = scale * params.outer[k] * acc;
    }
    params.outer -= lr_a * grad_a;
    for (Eigen::Index k = 0; k < n; ++k) params.thetas[k] = wrap_angle(params.thetas[k] - lr_theta * grad_theta[k]);
    return loss;
}

Baseline1DResult train_sgd_angle_net(const BaselineConfig1D& config, const RegressionDataset& data, std::size_t N) {
    config.validate();
    if (N == 0) throw std::invalid_argument("baseline: node count must be positive");
    if (data.size() == 0) throw std::invalid_argument("baseline: empty dataset");
    Rng rng = Rng::derive(config.seed, {static_cast<std::uint64_t>(StreamPurpose::baseline)});

    Baseline1DResult result;
    result.leaky_slope = config.leaky_slope;
    result.params = init_angle_params(N, config.sigma_a, rng);

    const std::size_t m = data.size();
    const std::size_t batch = std::min(config.batch, m);
    std::vector<std::size_t> order = shuffled_indices(m, rng);
    std::size_t cursor = 0;
    Eigen::VectorXd bx(static_cast<Eigen::Index>(batch)), by(static_cast<Eigen::Index>(batch));

    std::size_t step = 0;
    for (; step < config.max_steps; ++step) {
        if (step % config.log_every == 0) {
            const double full = angle_train_loss(result.params, config.leaky_slope, data);
            result.history.push_back({step, full});
            if (is_divergent(full)) {
                result.status = RunStatus::diverged;
                break;
            }
        }
        for (std::size_t i = 0; i < batch; ++i) {
            if (cursor == m) {
                order = shuffled_indices(m, rng);
                cursor = 0;
            }
            const auto j = static_cast<Eigen::Index>(order[cursor++]);
            bx[static_cast<Eigen::Index>(i)] = data.inputs[j];
            by[static_cast<Eigen::Index>(i)] = data.labels[j];
        }
        const double batch_loss =
            sgd_angle_step(result.params, bx, by, config.lr_a, config.lr_theta, config.leaky_slope);
        if (is_divergent(batch_loss) || !result.params.outer.allFinite()) {
            result.status = RunStatus::diverged;
            ++step;
            break;
        }
    }
    result.steps = step;
    result.final_train_loss = angle_train_loss(result.params, config.leaky_slope, data);
    if (result.history.empty() || result.history.back().step != step) result.history.push_back({step, result.final_train_loss});
    if (is_divergent(result.final_train_loss)) result.status = RunStatus::diverged;
    return result;
}

void BaselineConfigMnist::validate() const {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("baseline: scale must be positive");
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw std::invalid_argument("baseline: lr must be >= 0");
    if (batch == 0) throw std::invalid_argument("baseline: batch must be positive");
}

CosineNetParams init_cosine_params(std::size_t N, std::size_t d, std::size_t classes, double scale, Rng& rng) {
    CosineNetParams p;
    const auto n = static_cast<Eigen::Index>(N);
    const double l1 = std::sqrt(6.0 / static_cast<double>(d + N)) * scale;
    const double l2 = std::sqrt(6.0 / static_cast<double>(N + classes));
    p.freq.resize(n, static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < p.freq.rows(); ++i) {
        for (Eigen::Index j = 0; j < p.freq.cols(); ++j) p.freq(i, j) = rng.uniform(-l1, l1);
    }
    p.phase = Eigen::VectorXd::Zero(n);
    p.outer.resize(n, static_cast<Eigen::Index>(classes));
    for (Eigen::Index i = 0; i < p.outer.rows(); ++i) {
        for (Eigen::Index j = 0; j < p.outer.cols(); ++j) p.outer(i, j) = rng.uniform(-l2, l2);
    }
    p.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(classes));
    return p;
}

namespace {

struct AdamMoments {
    Eigen::MatrixXd m, v;
    explicit AdamMoments(const Eigen::MatrixXd& shape)
        : m(Eigen::MatrixXd::Zero(shape.rows(), shape.cols())), v(m) {}

    template <class Param>
    void update(Param& param, const Eigen::MatrixXd& grad, double lr, double c1, double c2) {
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        m = b1 * m + (1.0 - b1) * grad;
        v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
        param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    }
};

double cosine_train_loss(const CosineNetParams& p, const ClassificationDataset& data) {
    Eigen::MatrixXd logits = cosine_feature_matrix(p.freq, p.phase, data.inputs) * p.outer;
    logits.rowwise() += p.bias.transpose();
    return SoftmaxCrossEntropy(data.class_count).value(logits, data.labels);
}

}  // namespace

MnistBaselineResult train_adam_cosine_net(const BaselineConfigMnist& config, const ClassificationDataset& data,
                                          std::size_t N) {
    config.validate();
    if (N == 0) throw std::invalid_argument("baseline: node count must be positive");
    if (data.size() == 0) throw std::invalid_argument("baseline: empty dataset");
    Rng rng = Rng::derive(config.seed, {static_cast<std::uint64_t>(StreamPurpose::baseline)});
    const auto d = static_cast<std::size_t>(data.inputs.cols());
    const std::size_t C = data.class_count;

    MnistBaselineResult result;
    result.params = init_cosine_params(N, d, C, config.scale, rng);
    CosineNetParams& p = result.params;
    result.history.push_back({0, cosine_train_loss(p, data)});

    AdamMoments mv(p.freq), mb(p.phase), ma(p.outer), mc(p.bias);
    const std::size_t m = data.size();
    const std::size_t batch = std::min(config.batch, m);
    std::size_t t = 0;
    for (std::size_t epoch = 0; epoch < config.epochs && result.status == RunStatus::ok; ++epoch) {
        const auto order = shuffled_indices(m, rng);
        for (std::size_t start = 0; start < m; start += batch) {
            const std::size_t end = std::min(m, start + batch);
            const auto b = static_cast<Eigen::Index>(end - start);
            Eigen::MatrixXd x(b, data.inputs.cols());
            Eigen::VectorXd y(b);
            for (Eigen::Index i = 0; i < b; ++i) {
                const auto j = static_cast<Eigen::Index>(order[start + static_cast<std::size_t>(i)]);
                x.row(i) = data.inputs.row(j);
                y[i] = data.labels[j];
            }
            Eigen::MatrixXd pre = x * p.freq.transpose();
            pre.rowwise() += p.phase.transpose();
            const Eigen::MatrixXd features = pre.array().cos().matrix();
            Eigen::MatrixXd logits = features * p.outer;
            logits.rowwise() += p.bias.transpose();
            Eigen::MatrixXd g = softmax_rows(logits);
            for (Eigen::Index i = 0; i < b; ++i) g(i, static_cast<Eigen::Index>(y[i])) -= 1.0;
            g /= static_cast<double>(b);

            const Eigen::MatrixXd grad_a = features.transpose() * g;
            const Eigen::VectorXd grad_c = g.colwise().sum().transpose();
            const Eigen::MatrixXd dpre = -(pre.array().sin() * (g * p.outer.transpose()).array()).matrix();
            const Eigen::MatrixXd grad_v = dpre.transpose() * x;
            const Eigen::VectorXd grad_b = dpre.colwise().sum().transpose();

            ++t;
            const double c1 = 1.0 - std::pow(0.9, static_cast<double>(t));
            const double c2 = 1.0 - std::pow(0.999, static_cast<double>(t));
            mv.update(p.freq, grad_v, config.lr, c1, c2);
            mb.update(p.phase, grad_b, config.lr, c1, c2);
            ma.update(p.outer, grad_a, config.lr, c1, c2);
            mc.update(p.bias, grad_c, config.lr, c1, c2);
        }
        const double loss = cosine_train_loss(p, data);
        result.history.push_back({epoch + 1, loss});
        if (is_divergent(loss)) result.status = RunStatus::diverged;
    }
    result.final_train_loss = result.history.back().train_loss;
    return result;
}

// ---------------------------------------------------------------------------
// Sweeps

std::size_t sweep_cell_count(const std::vector<SweepAxis>& axes) {
    std::size_t count = 1;
    for (const auto& axis : axes) count *= axis.values.size();
    return axes.empty() ? 0 : count;
}

std::vector<double> sweep_cell_values(const std::vector<SweepAxis>& axes, std::size_t cell) {
    if (cell >= sweep_cell_count(axes)) throw std::out_of_range("sweep: cell index out of range");
    std::vector<double> values(axes.size());
    for (std::size_t a = axes.size(); a-- > 0;) {
        const std::size_t size = axes[a].values.size();
        values[a] = axes[a].values[cell % size];
        cell /= size;
    }
    return values;
}

std::optional<std::size_t> best_row(const std::vector<SweepRow>& rows) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& o = rows[i].outcome;
        if (o.status != RunStatus::ok || !std::isfinite(o.final_train_loss)) continue;
        if (!best || o.final_train_loss < rows[*best].outcome.final_train_loss) best = i;
    }
    return best;
}

namespace {

std::string column_line(const std::vector<SweepAxis>& axes) {
    std::string line = "cell";
    for (const auto& axis : axes) line += "," + axis.name;
    line += ",final_train_loss,final_test_loss,accuracy,status,wall_seconds";
    return line;
}

std::string row_line(const SweepRow& row) {
    std::string line = std::to_string(row.cell);
    for (double v : row.values) line += "," + format_real(v);
    const auto& o = row.outcome;
    line += "," + format_real(o.final_train_loss) + "," + format_real(o.final_test_loss) + "," +
            format_real(o.accuracy) + "," + run_status_name(o.status) + "," + format_real(o.wall_seconds);
    return line;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace

void write_sweep_csv(const SweepTable& table, const std::vector<std::string>& header_lines, std::ostream& out) {
    for (const auto& h : header_lines) out << "# " << h << '\n';
    if (table.best) out << "# best_cell: " << table.rows[*table.best].cell << '\n';
    out << column_line(table.axes) << '\n';
    for (const auto& row : table.rows) out << row_line(row) << '\n';
}

std::vector<SweepRow> read_sweep_csv(const std::vector<SweepAxis>& axes, std::istream& in) {
    std::vector<SweepRow> rows;
    std::string line;
    std::size_t line_no = 0;
    bool saw_columns = false;
    const std::string expected = column_line(axes);
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        if (!saw_columns) {
            if (body != expected) {
                throw std::runtime_error("sweep results line " + std::to_string(line_no) +
                                         ": columns do not match the grid (expected '" + expected + "')");
            }
            saw_columns = true;
            continue;
        }
        const auto cells = split_commas(body);
        if (cells.size() != axes.size() + 6) {
            // A partially written trailing row from an interrupted run; it is rerun.
            continue;
        }
        try {
            SweepRow row;
            row.cell = parse_uint(cells[0]);
            for (std::size_t a = 0; a < axes.size(); ++a) row.values.push_back(parse_real(cells[1 + a]));
            const std::size_t k = 1 + axes.size();
            row.outcome.final_train_loss = parse_real(cells[k]);
            row.outcome.final_test_loss = parse_real(cells[k + 1]);
            row.outcome.accuracy = parse_real(cells[k + 2]);
            row.outcome.status = run_status_from_name(std::string(cells[k + 3]));
            row.outcome.wall_seconds = parse_real(cells[k + 4]);
            rows.push_back(std::move(row));
        } catch (const std::invalid_argument&) {
            continue;
        }
    }
    return rows;
}

SweepTable sweep(const std::vector<SweepAxis>& axes, const SweepRunner& runner, const SweepOptions& options) {
    for (const auto& axis : axes) {
        if (axis.values.empty()) throw std::invalid_argument("sweep: axis '" + axis.name + "' has no values");
    }
    const std::size_t total = sweep_cell_count(axes);

    std::map<std::size_t, SweepRow> done;
    const bool resume = options.results && std::filesystem::exists(*options.results);
    if (resume) {
        std::ifstream in(*options.results);
        for (auto& row : read_sweep_csv(axes, in)) {
            if (row.cell < total) done.emplace(row.cell, std::move(row));
        }
    }

    std::vector<std::size_t> pending;
    for (std::size_t c = 0; c < total; ++c) {
        if (!done.contains(c)) pending.push_back(c);
    }
    if (options.max_new_cells && pending.size() > *options.max_new_cells) pending.resize(*options.max_new_cells);

    std::ofstream log;
    if (options.results) {
        if (resume) {
            // Rewrite the kept rows so a torn trailing line cannot corrupt the appends.
            SweepTable partial{axes, {}, std::nullopt};
            for (auto& [cell, row] : done) partial.rows.push_back(row);
            std::ofstream rewrite(*options.results, std::ios::trunc);
            write_sweep_csv(partial, options.header_lines, rewrite);
        } else {
            std::ofstream fresh(*options.results, std::ios::trunc);
            SweepTable empty{axes, {}, std::nullopt};
            write_sweep_csv(empty, options.header_lines, fresh);
        }
        log.open(*options.results, std::ios::app);
        if (!log) throw std::runtime_error("cannot write " + options.results->string());
    }

    std::mutex mutex;
    parallel_for(pending.size(), options.jobs, [&](std::size_t i) {
        SweepRow row;
        row.cell = pending[i];
        row.values = sweep_cell_values(axes, row.cell);
        const auto start = std::chrono::steady_clock::now();
        try {
            row.outcome = runner(row.values, row.cell);
        } catch (const std::exception&) {
            row.outcome = SweepOutcome{};
            row.outcome.final_train_loss = std::numeric_limits<double>::quiet_NaN();
            row.outcome.final_test_loss = std::numeric_limits<double>::quiet_NaN();
            row.outcome.status = RunStatus::failed;
        }
        row.outcome.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::lock_guard lock(mutex);
        if (log.is_open()) {
            log << row_line(row) << '\n';
            log.flush();
        }
        done.emplace(row.cell, std::move(row));
    });
    log.close();

    SweepTable table;
    table.axes = axes;
    for (auto& [cell, row] : done) table.rows.push_back(std::move(row));
    table.best = best_row(table.rows);
    if (options.results) {
        const auto tmp = std::filesystem::path(options.results->string() + ".tmp");
        {
            std::ofstream out(tmp, std::ios::trunc);
            write_sweep_csv(table, options.header_lines, out);
        }
        std::filesystem::rename(tmp, *options.results);
    }
    return table;
}

}  // namespace dsopt
