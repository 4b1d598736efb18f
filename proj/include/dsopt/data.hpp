#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dsopt {

/// Truncated random Fourier series on [-1, 1] with jumps at x = -0.4 and x = 0.6:
///   f(x) = sum_{k<K} (c_k cos 2k pi x + s_k sin 2k pi x) / (1 + k)
///          + (sign(x - 0.6) - sign(x + 0.4)) t,
/// with sign(0) = 0 and c_k, s_k standard normal from `seed`.
struct FourierJumpTarget {
    std::size_t K = 1;
    double t = 0.0;
    std::uint64_t seed = 0;
    Eigen::VectorXd cos_coeffs;
    Eigen::VectorXd sin_coeffs;

    double operator()(double x) const;
    Eigen::VectorXd operator()(const Eigen::VectorXd& xs) const;
};

FourierJumpTarget gen_target(std::size_t K, double t, std::uint64_t seed);

struct RegressionDataset {
    Eigen::VectorXd inputs;  // in [-1, 1]
    Eigen::VectorXd labels;

    std::size_t size() const { return static_cast<std::size_t>(inputs.size()); }
    Eigen::MatrixXd input_matrix() const { return inputs; }
};

/// Inputs i.i.d. uniform on [-1, 1]; labels = target(inputs).
RegressionDataset sample_regression(const FourierJumpTarget& target, std::size_t m, std::uint64_t seed);

struct ClassificationDataset {
    Eigen::MatrixXd inputs;  // m x features, pixels in [0, 1]
    Eigen::VectorXd labels;  // class indices
    std::size_t class_count = 10;

    std::size_t size() const { return static_cast<std::size_t>(inputs.rows()); }
};

class IdxError : public std::runtime_error {
public:
    enum class Kind { open_failed, wrong_magic, truncated, count_mismatch, bad_label };
    IdxError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Reads uncompressed IDX image (magic 2051) and label (magic 2049) files.
ClassificationDataset load_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

/// Writes the dataset as IDX files. Pixels are rounded from [0, 1] to bytes.
void write_mnist_idx(const ClassificationDataset& data, std::size_t rows, std::size_t cols,
                     const std::filesystem::path& images, const std::filesystem::path& labels);

/// First `count` samples, or a seeded random subset of size `count`.
ClassificationDataset subset(const ClassificationDataset& data, std::size_t count,
                             std::optional<std::uint64_t> seed = std::nullopt);
RegressionDataset subset(const RegressionDataset& data, std::size_t count,
                         std::optional<std::uint64_t> seed = std::nullopt);

void write_csv(const RegressionDataset& data, std::ostream& out);
void write_csv(const ClassificationDataset& data, std::ostream& out);

}  // namespace dsopt
