#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsopt/cli.hpp"
#include "dsopt/mixture_io.hpp"

using namespace dsopt;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run(std::vector<std::string> args) {
    args.insert(args.begin(), "dsopt");
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("dsopt_test_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

std::string small_1d_config(std::size_t k_max) {
    return "experiment = regress1d\n"
           "seed = 5\n"
           "basis.n = 4\n"
           "train.node_count = 5\n"
           "train.R = 3\n"
           "train.k_max = " + std::to_string(k_max) + "\n"
           "train.predict_R = 4\n"
           "data.train_size = 60\n"
           "data.test_size = 40\n"
           "baseline.max_steps = 200\n"
           "baseline.log_every = 50\n"
           "baseline.batch = 20\n"
           "sweep.sigma_a = [1, 8]\n"
           "sweep.lr_a = [1e-4, 1e-3]\n";
}

/// Drops the last CSV column (wall time) from data rows.
std::string without_wall_time(const std::string& text) {
    std::string out;
    for (const auto& line : lines_of(text)) {
        out += (!line.empty() && line[0] != '#') ? line.substr(0, line.rfind(',')) : line;
        out += '\n';
    }
    return out;
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run({}).code, exit_config_error);
    EXPECT_EQ(run({"frobnicate"}).code, exit_config_error);
    EXPECT_EQ(run({"train-dist"}).code, exit_config_error);
    EXPECT_EQ(run({"train-dist", "--config", "/nonexistent/x.conf"}).code, exit_config_error);
    EXPECT_EQ(run({"verify", "--bogus-flag"}).code, exit_config_error);
    EXPECT_EQ(run({"--version"}).code, exit_ok);
    EXPECT_EQ(run({"--version"}).out, std::string(kDsoptVersion) + "\n");
}

TEST(Cli, BadConfigReportsLine) {
    const auto dir = fresh_dir("badconfig");
    const auto conf = write_file(dir / "bad.conf", "experiment = regress1d\ntrain.lr = fast\n");
    const auto r = run({"train-dist", "--config", conf.string(), "--out", (dir / "o").string()});
    EXPECT_EQ(r.code, exit_config_error);
    EXPECT_NE(r.err.find(conf.string() + ":2:"), std::string::npos) << r.err;
    const auto unknown = write_file(dir / "unknown.conf", "experiment = regress1d\n\ntrain.speed = 3\n");
    const auto u = run({"train-dist", "--config", unknown.string()});
    EXPECT_EQ(u.code, exit_config_error);
    EXPECT_NE(u.err.find(unknown.string() + ":3:"), std::string::npos) << u.err;
}

TEST(Cli, MissingMnistFilesIsConfigError) {
    const auto dir = fresh_dir("mnist_missing");
    const auto conf = write_file(dir / "m.conf", "experiment = mnist-cosine\ndata.train_images = nowhere\n");
    EXPECT_EQ(run({"train-dist", "--config", conf.string(), "--out", (dir / "o").string()}).code, exit_config_error);
}

TEST(Cli, TrainDistZeroIterations) {
    const auto dir = fresh_dir("kmax0");
    const auto conf = write_file(dir / "c.conf", small_1d_config(0));
    const auto r = run({"train-dist", "--config", conf.string(), "--out", (dir / "o").string()});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    const auto metrics = lines_of(slurp(dir / "o" / "metrics.csv"));
    ASSERT_FALSE(metrics.empty());
    EXPECT_EQ(metrics.back(), "step,loss_estimate,grad_norm,alpha_entropy,wall_seconds");
    const auto summary = nlohmann::json::parse(slurp(dir / "o" / "summary.json"));
    EXPECT_EQ(summary["steps"], 0);
    EXPECT_EQ(summary["components"], 4);
    EXPECT_EQ(summary["provenance"]["seed"], 5);
    EXPECT_EQ(summary["provenance"]["artifact_version"], kArtifactVersion);
    const TrainedMixture m = load_mixture(dir / "o" / "mixture.txt");
    EXPECT_EQ(m.alpha, random_initial_alpha(4, 5));
}

TEST(Cli, TrainDistRerunIsIdentical) {
    const auto dir = fresh_dir("rerun");
    const auto conf = write_file(dir / "c.conf", small_1d_config(4));
    ASSERT_EQ(run({"train-dist", "--config", conf.string(), "--out", (dir / "a").string()}).code, exit_ok);
    ASSERT_EQ(run({"train-dist", "--config", conf.string(), "--out", (dir / "b").string(), "--jobs", "2"}).code,
              exit_ok);
    EXPECT_EQ(without_wall_time(slurp(dir / "a" / "metrics.csv")), without_wall_time(slurp(dir / "b" / "metrics.csv")));
    EXPECT_EQ(slurp(dir / "a" / "mixture.txt"), slurp(dir / "b" / "mixture.txt"));
    EXPECT_EQ(lines_of(slurp(dir / "a" / "metrics.csv")).size(), 5u + 1u + 4u);

    ASSERT_EQ(run({"train-dist", "--config", conf.string(), "--out", (dir / "c").string(), "--seed", "6"}).code,
              exit_ok);
    EXPECT_NE(slurp(dir / "a" / "mixture.txt"), slurp(dir / "c" / "mixture.txt"));
}

TEST(Cli, ProvenanceHeadersOnOutputs) {
    const auto dir = fresh_dir("provenance");
    const auto conf = write_file(dir / "c.conf", small_1d_config(2));
    ASSERT_EQ(run({"train-dist", "--config", conf.string(), "--out", (dir / "o").string()}).code, exit_ok);
    ASSERT_EQ(run({"train-baseline", "--config", conf.string(), "--out", (dir / "o").string()}).code, exit_ok);
    for (const char* name : {"metrics.csv", "mixture.txt", "baseline_history.csv"}) {
        const std::string text = slurp(dir / "o" / name);
        EXPECT_NE(text.find("# config_hash: "), std::string::npos) << name;
        EXPECT_NE(text.find("# seed: 5"), std::string::npos) << name;
        EXPECT_NE(text.find("# artifact_version: 1"), std::string::npos) << name;
    }
    for (const char* name : {"summary.json", "baseline_summary.json"}) {
        const auto j = nlohmann::json::parse(slurp(dir / "o" / name));
        EXPECT_TRUE(j["provenance"].contains("config_hash")) << name;
    }
}

TEST(Cli, OutputDirectoryPrecedence) {
    const auto dir = fresh_dir("outdir");
    const auto conf = write_file(dir / "c.conf", small_1d_config(0) + "output_dir = from_config\n");
    ASSERT_EQ(run({"train-dist", "--config", conf.string()}).code, exit_ok);
    EXPECT_TRUE(fs::exists(dir / "from_config" / "summary.json"));

    ::setenv(kOutputDirEnv, (dir / "from_env").c_str(), 1);
    ASSERT_EQ(run({"train-dist", "--config", conf.string()}).code, exit_ok);
    EXPECT_TRUE(fs::exists(dir / "from_env" / "summary.json"));
    ASSERT_EQ(run({"train-dist", "--config", conf.string(), "--out", (dir / "from_flag").string()}).code, exit_ok);
    EXPECT_TRUE(fs::exists(dir / "from_flag" / "summary.json"));
    ::unsetenv(kOutputDirEnv);
}

TEST(Cli, InferSingleDrawHasZeroSpread) {
    const auto dir = fresh_dir("infer");
    const auto conf = write_file(dir / "c.conf", small_1d_config(2));
    ASSERT_EQ(run({"train-dist", "--config", conf.string(), "--out", dir.string()}).code, exit_ok);
    const auto inputs = write_file(dir / "x.csv", "x\n-0.5\n0\n0.25\n0.9\n");
    const auto r = run({"infer", "--mixture", (dir / "mixture.txt").string(), "--inputs", inputs.string(), "--R", "1",
                        "--out", (dir / "p1.csv").string()});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    auto rows = lines_of(slurp(dir / "p1.csv"));
    std::erase_if(rows, [](const std::string& l) { return l.empty() || l[0] == '#'; });
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_EQ(rows[0], "index,mean,std");
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i].substr(rows[i].rfind(',') + 1), "0");

    ASSERT_EQ(run({"infer", "--mixture", (dir / "mixture.txt").string(), "--inputs", inputs.string(), "--R", "8",
                   "--out", (dir / "p8.csv").string()})
                  .code,
              exit_ok);
    EXPECT_NE(slurp(dir / "p8.csv").find("# R: 8"), std::string::npos);

    const auto garbage = write_file(dir / "broken_mixture.txt", "dsopt-mixture 99\n");
    EXPECT_EQ(run({"infer", "--mixture", garbage.string(), "--inputs", inputs.string()}).code, exit_config_error);
    const auto bad_inputs = write_file(dir / "bad.csv", "x\n0.1\nabc\n");
    EXPECT_EQ(run({"infer", "--mixture", (dir / "mixture.txt").string(), "--inputs", bad_inputs.string(), "--out",
                   (dir / "q.csv").string()})
                  .code,
              exit_runtime_error);
}

TEST(Cli, VerifyReportsOneLinePerCheck) {
    const auto dir = fresh_dir("verify");
    const auto conf = write_file(dir / "v.conf",
                                 "experiment = oracle-verify\nverify.random_instances = 3\nverify.mc_repeats = 300\n");
    const auto r = run({"verify", "--config", conf.string(), "--fixtures", DSOPT_FIXTURE_DIR, "--out", dir.string()});
    ASSERT_EQ(r.code, exit_ok) << r.out << r.err;
    const auto printed = lines_of(r.out);
    ASSERT_GT(printed.size(), 10u);
    EXPECT_EQ(printed.front(), "name,statistic,threshold,pass");
    for (std::size_t i = 1; i < printed.size(); ++i) {
        EXPECT_TRUE(printed[i].ends_with(",PASS")) << printed[i];
    }
    auto report = lines_of(slurp(dir / "verify_report.csv"));
    std::erase_if(report, [](const std::string& l) { return l.starts_with("#"); });
    EXPECT_EQ(report, printed);
}

TEST(Cli, VerifyCorruptedFixtureExitsOne) {
    const auto dir = fresh_dir("verify_corrupt");
    const auto conf = write_file(dir / "v.conf",
                                 "experiment = oracle-verify\nverify.random_instances = 0\nverify.mc_repeats = 0\n");
    const auto r = run({"verify", "--config", conf.string(), "--fixtures",
                        (fs::path(DSOPT_FIXTURE_DIR) / "corrupt").string()});
    EXPECT_EQ(r.code, exit_check_failed);
    EXPECT_NE(r.out.find("fixture:l2_wrong_expect:expect:loss_uniform,"), std::string::npos);
    EXPECT_NE(r.out.find(",FAIL"), std::string::npos);
    EXPECT_EQ(run({"verify", "--fixtures", "/nonexistent.inst"}).code, exit_config_error);
}

TEST(Cli, SweepIsResumable) {
    const auto dir = fresh_dir("sweep");
    const auto conf = write_file(dir / "c.conf", small_1d_config(0));
    const auto first = run({"sweep", "--config", conf.string(), "--out", dir.string(), "--jobs", "2"});
    ASSERT_EQ(first.code, exit_ok) << first.err;
    EXPECT_NE(first.out.find("4 cells"), std::string::npos);
    const std::string table = slurp(dir / "sweep.csv");
    EXPECT_NE(table.find("cell,sigma_a,lr_a,final_train_loss"), std::string::npos);
    EXPECT_NE(table.find("# best_cell: "), std::string::npos);
    ASSERT_EQ(run({"sweep", "--config", conf.string(), "--out", dir.string()}).code, exit_ok);
    EXPECT_EQ(slurp(dir / "sweep.csv"), table);
}

TEST(Cli, BinaryExitCodes) {
    const std::string cli = DSOPT_CLI_PATH;
    EXPECT_EQ(std::system((cli + " --version > /dev/null").c_str()), 0);
    const int bad = std::system((cli + " nonsense > /dev/null 2>&1").c_str());
    EXPECT_EQ(WEXITSTATUS(bad), exit_config_error);
    const int fail = std::system((cli + " verify --fixtures " + DSOPT_FIXTURE_DIR +
                                  "/corrupt > /dev/null 2>&1").c_str());
    EXPECT_EQ(WEXITSTATUS(fail), exit_check_failed);
}
