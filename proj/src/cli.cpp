#include "dsopt/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "dsopt/config.hpp"
#include "dsopt/experiments.hpp"
#include "dsopt/mixture_io.hpp"
#include "dsopt/oracle.hpp"
#include "dsopt/text.hpp"

namespace dsopt {

namespace {

struct CommonOptions {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
};

struct RunContext {
    ExperimentConfig config;
    std::filesystem::path out_dir;
    std::string command;
};

std::vector<std::string> provenance_lines(const RunContext& ctx) {
    return {"dsopt " + std::string(kDsoptVersion), "command: " + ctx.command,
            "config_hash: " + ctx.config.config_hash, "seed: " + std::to_string(ctx.config.seed),
            "artifact_version: " + std::to_string(kArtifactVersion)};
}

void write_header(std::ostream& out, const RunContext& ctx) {
    for (const auto& line : provenance_lines(ctx)) out << "# " << line << '\n';
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.imbue(std::locale::classic());
    return out;
}

RunContext make_context(const CommonOptions& opts, const std::string& command, bool need_config) {
    Config config;
    if (!opts.config_path.empty()) {
        config = Config::load(opts.config_path);
    } else if (need_config) {
        throw ConfigError("<command line>", 0, "--config is required for " + command);
    }
    if (opts.seed) config.set("seed", std::to_string(*opts.seed));
    RunContext ctx;
    ctx.config = experiment_from_config(config);
    if (opts.jobs) ctx.config.train.threads = *opts.jobs;
    ctx.command = command;
    if (!opts.out_dir.empty()) {
        ctx.out_dir = opts.out_dir;
    } else if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
        ctx.out_dir = env;
    } else {
        ctx.out_dir = ctx.config.output_dir;
    }
    check_input_paths(ctx.config);
    return ctx;
}

void write_metrics(const RunContext& ctx, const TrainResult& result, const std::filesystem::path& path) {
    auto out = open_output(path);
    write_header(out, ctx);
    out << "step,loss_estimate,grad_norm,alpha_entropy,wall_seconds\n";
    for (const auto& rec : result.history) {
        double entropy = 0.0;
        for (Eigen::Index i = 0; i < rec.alpha.size(); ++i) {
            if (rec.alpha[i] > 0.0) entropy -= rec.alpha[i] * std::log(rec.alpha[i]);
        }
        out << rec.step << ',' << format_real(rec.loss_estimate) << ',' << format_real(rec.grad_norm) << ','
            << format_real(entropy) << ',' << format_real(rec.wall_seconds) << '\n';
    }
}

nlohmann::ordered_json provenance_json(const RunContext& ctx) {
    nlohmann::ordered_json j;
    j["tool"] = "dsopt";
    j["version"] = kDsoptVersion;
    j["command"] = ctx.command;
    j["config_hash"] = ctx.config.config_hash;
    j["seed"] = ctx.config.seed;
    j["artifact_version"] = kArtifactVersion;
    return j;
}

void write_summary(const std::filesystem::path& path, const nlohmann::ordered_json& summary) {
    auto out = open_output(path);
    out << summary.dump(2) << '\n';
}

int cmd_train_dist(const CommonOptions& opts, std::ostream& out) {
    RunContext ctx = make_context(opts, "train-dist", true);
    const auto& cfg = ctx.config;
    std::filesystem::create_directories(ctx.out_dir);
    DistRun run = [&] {
        switch (cfg.kind) {
            case ExperimentKind::regress1d:
                return run_regress1d_dist(cfg, make_regression_splits(cfg.target, cfg.regression));
            case ExperimentKind::mnist_cosine:
                return run_mnist_dist(cfg, load_mnist_splits(cfg.mnist));
            case ExperimentKind::oracle_verify:
                break;
        }
        throw ConfigError("<config>", 0, "experiment oracle-verify has no training run; use the verify subcommand");
    }();
    {
        auto mix = open_output(ctx.out_dir / "mixture.txt");
        write_header(mix, ctx);
        write_mixture(run.output.mixture, mix);
    }
    write_metrics(ctx, run.output.result, ctx.out_dir / "metrics.csv");

    nlohmann::ordered_json summary;
    summary["provenance"] = provenance_json(ctx);
    summary["experiment"] = experiment_kind_name(cfg.kind);
    summary["status"] = train_status_name(run.output.result.status);
    summary["steps"] = run.output.result.steps;
    summary["components"] = run.output.mixture.alpha.size();
    summary["final_train_loss"] = run.train_eval.loss;
    summary["final_test_loss"] = run.test_eval.loss;
    if (std::isfinite(run.test_eval.accuracy)) summary["test_accuracy"] = run.test_eval.accuracy;
    summary["alpha_entropy"] = run.output.mixture.alpha.entropy();
    summary["wall_seconds"] = run.wall_seconds;
    write_summary(ctx.out_dir / "summary.json", summary);
    out << "train-dist: " << run.output.result.steps << " steps, status "
        << train_status_name(run.output.result.status) << ", test loss " << format_real(run.test_eval.loss) << '\n';
    return exit_ok;
}

int cmd_train_baseline(const CommonOptions& opts, std::ostream& out) {
    RunContext ctx = make_context(opts, "train-baseline", true);
    const auto& cfg = ctx.config;
    std::filesystem::create_directories(ctx.out_dir);
    const auto start = std::chrono::steady_clock::now();
    std::vector<HistoryPoint> history;
    SweepOutcome outcome;
    if (cfg.kind == ExperimentKind::regress1d) {
        const auto splits = make_regression_splits(cfg.target, cfg.regression);
        const auto result = train_sgd_angle_net(cfg.baseline1d, splits.train, cfg.train.node_count);
        history = result.history;
        outcome.status = result.status;
        outcome.final_train_loss = result.final_train_loss;
        outcome.final_test_loss = EmpiricalL2().value(eval_angle_net(result.net(), splits.test.inputs), splits.test.labels);
    } else if (cfg.kind == ExperimentKind::mnist_cosine) {
        const auto splits = load_mnist_splits(cfg.mnist);
        const auto result = train_adam_cosine_net(cfg.baseline_mnist, splits.train, cfg.train.node_count);
        history = result.history;
        outcome.status = result.status;
        outcome.final_train_loss = result.final_train_loss;
        const Eigen::MatrixXd logits = eval_cosine_net(result.net(), splits.test.inputs);
        outcome.final_test_loss = SoftmaxCrossEntropy(splits.test.class_count).value(logits, splits.test.labels);
        outcome.accuracy = classification_accuracy(logits, splits.test.labels);
    } else {
        throw ConfigError("<config>", 0, "experiment oracle-verify has no baseline");
    }
    outcome.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    {
        auto csv = open_output(ctx.out_dir / "baseline_history.csv");
        write_header(csv, ctx);
        csv << "step,train_loss\n";
        for (const auto& h : history) csv << h.step << ',' << format_real(h.train_loss) << '\n';
    }
    nlohmann::ordered_json summary;
    summary["provenance"] = provenance_json(ctx);
    summary["experiment"] = experiment_kind_name(cfg.kind);
    summary["status"] = run_status_name(outcome.status);
    summary["final_train_loss"] = outcome.final_train_loss;
    summary["final_test_loss"] = outcome.final_test_loss;
    if (std::isfinite(outcome.accuracy)) summary["test_accuracy"] = outcome.accuracy;
    summary["wall_seconds"] = outcome.wall_seconds;
    write_summary(ctx.out_dir / "baseline_summary.json", summary);
    out << "train-baseline: status " << run_status_name(outcome.status) << ", test loss "
        << format_real(outcome.final_test_loss) << '\n';
    return exit_ok;
}

int cmd_sweep(const CommonOptions& opts, std::ostream& out) {
    RunContext ctx = make_context(opts, "sweep", true);
    // Cells are single-threaded; --jobs bounds the number of concurrent cells.
    auto cfg = ctx.config;
    cfg.train.threads = 1;
    if (cfg.sweep_axes.empty()) throw ConfigError("<config>", 0, "no sweep.<axis> grids configured");
    std::filesystem::create_directories(ctx.out_dir);

    SweepOptions sopts;
    std::filesystem::path results(cfg.sweep_results);
    if (results.is_relative()) results = ctx.out_dir / results;
    sopts.results = results;
    sopts.jobs = opts.jobs.value_or(1);
    for (const auto& line : provenance_lines(ctx)) {
        if (!line.starts_with("command")) sopts.header_lines.push_back(line);
    }
    sopts.header_lines.push_back("command: sweep");

    SweepTable table;
    if (cfg.kind == ExperimentKind::regress1d) {
        const auto splits = make_regression_splits(cfg.target, cfg.regression);
        table = sweep(cfg.sweep_axes, [&](const std::vector<double>& values, std::size_t) {
            BaselineConfig1D c = cfg.baseline1d;
            for (std::size_t a = 0; a < values.size(); ++a) apply_axis_1d(c, cfg.sweep_axes[a].name, values[a]);
            return run_regress1d_baseline(c, splits, cfg.train.node_count);
        }, sopts);
    } else if (cfg.kind == ExperimentKind::mnist_cosine) {
        const auto splits = load_mnist_splits(cfg.mnist);
        table = sweep(cfg.sweep_axes, [&](const std::vector<double>& values, std::size_t) {
            BaselineConfigMnist c = cfg.baseline_mnist;
            for (std::size_t a = 0; a < values.size(); ++a) apply_axis_mnist(c, cfg.sweep_axes[a].name, values[a]);
            return run_mnist_baseline(c, splits, cfg.train.node_count);
        }, sopts);
    } else {
        throw ConfigError("<config>", 0, "experiment oracle-verify has no sweep");
    }
    out << "sweep: " << table.rows.size() << " cells";
    if (table.best) {
        const auto& best = table.rows[*table.best];
        out << ", best cell " << best.cell << " (";
        for (std::size_t a = 0; a < best.values.size(); ++a) {
            out << (a ? ", " : "") << cfg.sweep_axes[a].name << "=" << format_real(best.values[a]);
        }
        out << ") train loss " << format_real(best.outcome.final_train_loss);
    }
    out << '\n';
    return exit_ok;
}

Eigen::MatrixXd read_inputs_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open inputs file " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        std::vector<double> row;
        std::size_t start = 0;
        bool numeric = true;
        for (;;) {
            const auto pos = body.find(',', start);
            const auto tok = trim(body.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
            try {
                row.push_back(parse_real(tok));
            } catch (const std::invalid_argument&) {
                numeric = false;
                break;
            }
            if (pos == std::string_view::npos) break;
            start = pos + 1;
        }
        if (!numeric) {
            if (rows.empty()) continue;  // header row
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": non-numeric value");
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": inconsistent column count");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("inputs file " + path.string() + " has no rows");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return m;
}

struct InferOptions {
    std::string mixture;
    std::string inputs;
    std::size_t R = 20;
    std::uint64_t seed = 0;
    std::string out;
    std::size_t jobs = 1;
};

int cmd_infer(const InferOptions& opts, std::ostream& out) {
    TrainedMixture mixture = [&] {
        try {
            return load_mixture(opts.mixture);
        } catch (const MixtureFormatError& e) {
            throw ConfigError(opts.mixture, e.line(), e.what());
        }
    }();
    if (opts.R == 0) throw ConfigError("<command line>", 0, "--R must be positive");
    const auto sampler = sampler_for_mixture(mixture);
    const Eigen::MatrixXd inputs = read_inputs_csv(opts.inputs);
    const Prediction p = predict(*sampler, mixture.alpha, mixture.mode, inputs, opts.R, opts.seed, opts.jobs);

    std::filesystem::path path = opts.out.empty() ? std::filesystem::path("predictions.csv") : std::filesystem::path(opts.out);
    if (std::filesystem::is_directory(path)) path /= "predictions.csv";
    auto csv = open_output(path);
    csv << "# dsopt " << kDsoptVersion << "\n# command: infer\n# mixture: " << opts.mixture
        << "\n# mixture_config_hash: "
        << (mixture.provenance.contains("config_hash") ? mixture.provenance.at("config_hash") : "unknown")
        << "\n# seed: " << opts.seed << "\n# R: " << opts.R << "\n# artifact_version: " << kArtifactVersion << '\n';
    csv << "index";
    const bool one_output = p.mean.cols() == 1;
    for (Eigen::Index c = 0; c < p.mean.cols(); ++c) csv << ",mean" << (one_output ? "" : "_" + std::to_string(c));
    for (Eigen::Index c = 0; c < p.stddev.cols(); ++c) csv << ",std" << (one_output ? "" : "_" + std::to_string(c));
    csv << '\n';
    for (Eigen::Index i = 0; i < p.mean.rows(); ++i) {
        csv << i;
        for (Eigen::Index c = 0; c < p.mean.cols(); ++c) csv << ',' << format_real(p.mean(i, c));
        for (Eigen::Index c = 0; c < p.stddev.cols(); ++c) csv << ',' << format_real(p.stddev(i, c));
        csv << '\n';
    }
    out << "infer: " << p.mean.rows() << " predictions written to " << path.string() << '\n';
    return exit_ok;
}

int cmd_verify(const CommonOptions& opts, const std::vector<std::string>& fixtures, std::ostream& out) {
    RunContext ctx = make_context(opts, "verify", false);
    OracleSuiteOptions suite = ctx.config.verify;
    for (const auto& f : fixtures) {
        if (std::filesystem::is_directory(f)) {
            std::vector<std::filesystem::path> found;
            for (const auto& e : std::filesystem::directory_iterator(f)) {
                if (e.path().extension() == ".inst") found.push_back(e.path());
            }
            std::sort(found.begin(), found.end());
            suite.fixtures.insert(suite.fixtures.end(), found.begin(), found.end());
        } else {
            if (!std::filesystem::exists(f)) throw ConfigError("<command line>", 0, "no such fixture " + f);
            suite.fixtures.emplace_back(f);
        }
    }
    const auto checks = run_oracle_suite(suite);
    std::ostringstream report;
    report << "name,statistic,threshold,pass\n";
    bool all = true;
    for (const auto& c : checks) {
        report << c.name << ',' << format_real(c.statistic) << ',' << format_real(c.threshold) << ','
               << (c.pass ? "PASS" : "FAIL") << '\n';
        all = all && c.pass;
    }
    out << report.str();
    if (!opts.out_dir.empty() || std::getenv(kOutputDirEnv) || !opts.config_path.empty()) {
        std::filesystem::create_directories(ctx.out_dir);
        auto csv = open_output(ctx.out_dir / "verify_report.csv");
        write_header(csv, ctx);
        csv << report.str();
    }
    return all ? exit_ok : exit_check_failed;
}

void add_common(CLI::App* sub, CommonOptions& opts, bool config_required) {
    auto* c = sub->add_option("--config", opts.config_path, "Experiment config file")->check(CLI::ExistingFile);
    if (config_required) c->required();
    sub->add_option("--out", opts.out_dir, "Output directory (overrides config and " + std::string(kOutputDirEnv) + ")");
    sub->add_option("--seed", opts.seed, "Run seed (overrides config)");
    sub->add_option("--jobs", opts.jobs, "Worker threads / concurrent sweep cells")->check(CLI::PositiveNumber);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Distribution-space training over mixture coefficients", args.empty() ? "dsopt" : args.front()};
    app.set_version_flag("--version", kDsoptVersion);
    app.require_subcommand(1);

    CommonOptions train_opts, base_opts, sweep_opts, verify_opts;
    InferOptions infer_opts;
    std::vector<std::string> fixtures;

    auto* train_dist = app.add_subcommand("train-dist", "Train mixture coefficients by projected gradient descent");
    add_common(train_dist, train_opts, true);
    auto* train_base = app.add_subcommand("train-baseline", "Train the parameter-space baseline");
    add_common(train_base, base_opts, true);
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a resumable baseline hyperparameter sweep");
    add_common(sweep_cmd, sweep_opts, true);
    auto* infer = app.add_subcommand("infer", "Ensemble predictions from a saved mixture");
    infer->add_option("--mixture", infer_opts.mixture, "Mixture file from train-dist")->required()->check(CLI::ExistingFile);
    infer->add_option("--inputs", infer_opts.inputs, "CSV of input points, one per row")->required()->check(CLI::ExistingFile);
    infer->add_option("--R", infer_opts.R, "Number of sampled models");
    infer->add_option("--seed", infer_opts.seed, "Sampling seed");
    infer->add_option("--out", infer_opts.out, "Output CSV file or directory");
    infer->add_option("--jobs", infer_opts.jobs, "Worker threads")->check(CLI::PositiveNumber);
    auto* verify = app.add_subcommand("verify", "Run the exact-world verification suite");
    add_common(verify, verify_opts, false);
    verify->add_option("--fixtures", fixtures, "Fixture files or directories of .inst files");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForVersion&) {
        out << kDsoptVersion << '\n';
        return exit_ok;
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_config_error;
    }

    try {
        if (*train_dist) return cmd_train_dist(train_opts, out);
        if (*train_base) return cmd_train_baseline(base_opts, out);
        if (*sweep_cmd) return cmd_sweep(sweep_opts, out);
        if (*infer) return cmd_infer(infer_opts, out);
        if (*verify) return cmd_verify(verify_opts, fixtures, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_runtime_error;
    }
    return exit_config_error;
}

}  // namespace dsopt
