#include "dsopt/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <vector>

#include "dsopt/random.hpp"
#include "dsopt/text.hpp"

namespace dsopt {

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

constexpr std::uint32_t kImageMagic = 2051;
constexpr std::uint32_t kLabelMagic = 2049;

std::uint32_t read_be32(std::istream& in, const std::string& file) {
    std::array<unsigned char, 4> b{};
    in.read(reinterpret_cast<char*>(b.data()), 4);
    if (in.gcount() != 4) throw IdxError(IdxError::Kind::truncated, file + ": truncated header");
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

void write_be32(std::ostream& out, std::uint32_t v) {
    const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                                static_cast<char>(v >> 8), static_cast<char>(v)};
    out.write(b.data(), 4);
}

std::vector<std::size_t> pick_indices(std::size_t size, std::size_t count, std::optional<std::uint64_t> seed) {
    if (count > size) {
        throw std::invalid_argument("subset: requested " + std::to_string(count) + " of " +
                                    std::to_string(size) + " samples");
    }
    std::vector<std::size_t> idx(size);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (seed) {
        Rng rng = Rng::derive(*seed, {static_cast<std::uint64_t>(StreamPurpose::data)});
        // Partial Fisher-Yates: the first `count` slots are a uniform random subset.
        for (std::size_t i = 0; i < count; ++i) {
            std::swap(idx[i], idx[i + rng.below(size - i)]);
        }
    }
    idx.resize(count);
    return idx;
}

}  // namespace

double FourierJumpTarget::operator()(double x) const {
    double f = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        const double arg = 2.0 * static_cast<double>(k) * std::numbers::pi * x;
        f += (cos_coeffs[static_cast<Eigen::Index>(k)] * std::cos(arg) +
              sin_coeffs[static_cast<Eigen::Index>(k)] * std::sin(arg)) /
             (1.0 + static_cast<double>(k));
    }
    return f + (sign(x - 0.6) - sign(x + 0.4)) * t;
}

Eigen::VectorXd FourierJumpTarget::operator()(const Eigen::VectorXd& xs) const {
    Eigen::VectorXd out(xs.size());
    for (Eigen::Index j = 0; j < xs.size(); ++j) out[j] = (*this)(xs[j]);
    return out;
}

FourierJumpTarget gen_target(std::size_t K, double t, std::uint64_t seed) {
    if (K == 0) throw std::invalid_argument("gen_target: K must be at least 1");
    FourierJumpTarget target;
    target.K = K;
    target.t = t;
    target.seed = seed;
    target.cos_coeffs.resize(static_cast<Eigen::Index>(K));
    target.sin_coeffs.resize(static_cast<Eigen::Index>(K));
    Rng rng(seed);
    for (std::size_t k = 0; k < K; ++k) {
        target.cos_coeffs[static_cast<Eigen::Index>(k)] = rng.normal();
        target.sin_coeffs[static_cast<Eigen::Index>(k)] = rng.normal();
    }
    return target;
}

RegressionDataset sample_regression(const FourierJumpTarget& target, std::size_t m, std::uint64_t seed) {
    if (m == 0) throw std::invalid_argument("sample_regression: m must be positive");
    RegressionDataset data;
    data.inputs.resize(static_cast<Eigen::Index>(m));
    Rng rng = Rng::derive(seed, {static_cast<std::uint64_t>(StreamPurpose::data)});
    for (Eigen::Index j = 0; j < data.inputs.size(); ++j) data.inputs[j] = rng.uniform(-1.0, 1.0);
    data.labels = target(data.inputs);
    return data;
}

ClassificationDataset load_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
    std::ifstream img(images, std::ios::binary);
    if (!img) throw IdxError(IdxError::Kind::open_failed, "cannot open " + images.string());
    std::ifstream lab(labels, std::ios::binary);
    if (!lab) throw IdxError(IdxError::Kind::open_failed, "cannot open " + labels.string());

    const std::uint32_t img_magic = read_be32(img, images.string());
    if (img_magic != kImageMagic) {
        throw IdxError(IdxError::Kind::wrong_magic, images.string() + ": wrong magic " +
                                                        std::to_string(img_magic) + " (expected 2051)");
    }
    const std::uint32_t lab_magic = read_be32(lab, labels.string());
    if (lab_magic != kLabelMagic) {
        throw IdxError(IdxError::Kind::wrong_magic, labels.string() + ": wrong magic " +
                                                        std::to_string(lab_magic) + " (expected 2049)");
    }
    const std::uint32_t count = read_be32(img, images.string());
    const std::uint32_t rows = read_be32(img, images.string());
    const std::uint32_t cols = read_be32(img, images.string());
    const std::uint32_t label_count = read_be32(lab, labels.string());
    if (count != label_count) {
        throw IdxError(IdxError::Kind::count_mismatch, "image count " + std::to_string(count) +
                                                           " does not match label count " +
                                                           std::to_string(label_count));
    }

    const std::size_t pixels = std::size_t{rows} * cols;
    ClassificationDataset data;
    data.inputs.resize(count, static_cast<Eigen::Index>(pixels));
    data.labels.resize(count);
    std::vector<unsigned char> buffer(pixels);
    for (std::uint32_t i = 0; i < count; ++i) {
        img.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(pixels));
        if (static_cast<std::size_t>(img.gcount()) != pixels) {
            throw IdxError(IdxError::Kind::truncated, images.string() + ": truncated payload at image " +
                                                          std::to_string(i));
        }
        for (std::size_t p = 0; p < pixels; ++p) {
            data.inputs(i, static_cast<Eigen::Index>(p)) = static_cast<double>(buffer[p]) / 255.0;
        }
    }
    std::vector<unsigned char> label_bytes(count);
    lab.read(reinterpret_cast<char*>(label_bytes.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(lab.gcount()) != count) {
        throw IdxError(IdxError::Kind::truncated, labels.string() + ": truncated payload");
    }
    for (std::uint32_t i = 0; i < count; ++i) {
        if (label_bytes[i] >= data.class_count) {
            throw IdxError(IdxError::Kind::bad_label, labels.string() + ": label " +
                                                          std::to_string(label_bytes[i]) + " out of range");
        }
        data.labels[i] = label_bytes[i];
    }
    return data;
}

void write_mnist_idx(const ClassificationDataset& data, std::size_t rows, std::size_t cols,
                     const std::filesystem::path& images, const std::filesystem::path& labels) {
    if (static_cast<std::size_t>(data.inputs.cols()) != rows * cols) {
        throw std::invalid_argument("write_mnist_idx: rows * cols does not match feature count");
    }
    std::ofstream img(images, std::ios::binary);
    std::ofstream lab(labels, std::ios::binary);
    if (!img || !lab) throw std::runtime_error("write_mnist_idx: cannot open output files");
    const auto count = static_cast<std::uint32_t>(data.size());
    write_be32(img, kImageMagic);
    write_be32(img, count);
    write_be32(img, static_cast<std::uint32_t>(rows));
    write_be32(img, static_cast<std::uint32_t>(cols));
    write_be32(lab, kLabelMagic);
    write_be32(lab, count);
    for (Eigen::Index i = 0; i < data.inputs.rows(); ++i) {
        for (Eigen::Index p = 0; p < data.inputs.cols(); ++p) {
            const double scaled = std::clamp(data.inputs(i, p), 0.0, 1.0) * 255.0;
            img.put(static_cast<char>(static_cast<unsigned char>(std::lround(scaled))));
        }
        lab.put(static_cast<char>(static_cast<unsigned char>(data.labels[i])));
    }
}

ClassificationDataset subset(const ClassificationDataset& data, std::size_t count,
                             std::optional<std::uint64_t> seed) {
    const auto idx = pick_indices(data.size(), count, seed);
    ClassificationDataset out;
    out.class_count = data.class_count;
    out.inputs.resize(static_cast<Eigen::Index>(count), data.inputs.cols());
    out.labels.resize(static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) {
        out.inputs.row(static_cast<Eigen::Index>(i)) = data.inputs.row(static_cast<Eigen::Index>(idx[i]));
        out.labels[static_cast<Eigen::Index>(i)] = data.labels[static_cast<Eigen::Index>(idx[i])];
    }
    return out;
}

RegressionDataset subset(const RegressionDataset& data, std::size_t count, std::optional<std::uint64_t> seed) {
    const auto idx = pick_indices(data.size(), count, seed);
    RegressionDataset out;
    out.inputs.resize(static_cast<Eigen::Index>(count));
    out.labels.resize(static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) {
        out.inputs[static_cast<Eigen::Index>(i)] = data.inputs[static_cast<Eigen::Index>(idx[i])];
        out.labels[static_cast<Eigen::Index>(i)] = data.labels[static_cast<Eigen::Index>(idx[i])];
    }
    return out;
}

void write_csv(const RegressionDataset& data, std::ostream& out) {
    out << "x,y\n";
    for (Eigen::Index j = 0; j < data.inputs.size(); ++j) {
        out << format_real(data.inputs[j]) << ',' << format_real(data.labels[j]) << '\n';
    }
}

void write_csv(const ClassificationDataset& data, std::ostream& out) {
    out << "label";
    for (Eigen::Index p = 0; p < data.inputs.cols(); ++p) out << ",x" << p;
    out << '\n';
    for (Eigen::Index i = 0; i < data.inputs.rows(); ++i) {
        out << static_cast<long long>(data.labels[i]);
        for (Eigen::Index p = 0; p < data.inputs.cols(); ++p) out << ',' << format_real(data.inputs(i, p));
        out << '\n';
    }
}

}  // namespace dsopt
