#include "dsopt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dsopt/text.hpp"

namespace dsopt {

namespace {

Eigen::VectorXd random_simplex_point(std::size_t n, Rng& rng, bool sparse) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform();
    if (sparse && n > 1) {
        // Zero a random subset but keep at least one entry.
        const std::size_t keep = rng.below(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (i != keep && rng.bernoulli(0.5)) v[static_cast<Eigen::Index>(i)] = 0.0;
        }
    }
    if (v.sum() <= 0.0) v.setOnes();
    return v / v.sum();
}

double fd_relative_error(const DiscreteInstance& inst, const Eigen::VectorXd& alpha, double h = 1e-5) {
    const Eigen::VectorXd g = exact_gradient(inst, alpha);
    Eigen::VectorXd fd(g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        Eigen::VectorXd plus = alpha, minus = alpha;
        plus[i] += h;
        minus[i] -= h;
        fd[i] = (exact_loss(inst, plus) - exact_loss(inst, minus)) / (2.0 * h);
    }
    return (fd - g).cwiseAbs().maxCoeff() / std::max(g.cwiseAbs().maxCoeff(), 1e-12);
}

}  // namespace

void DiscreteInstance::validate() const {
    if (outputs.empty()) throw std::invalid_argument("DiscreteInstance: no parameter points");
    if (components.empty()) throw std::invalid_argument("DiscreteInstance: no components");
    const auto m = labels.size();
    if (m == 0) throw std::invalid_argument("DiscreteInstance: no samples");
    const auto c = outputs.front().cols();
    for (const auto& u : outputs) {
        if (u.rows() != m || u.cols() != c) throw std::invalid_argument("DiscreteInstance: output table shape mismatch");
        if (!u.allFinite()) throw std::invalid_argument("DiscreteInstance: non-finite output table");
    }
    for (const auto& phi : components) {
        if (phi.size() != outputs.size()) throw std::invalid_argument("DiscreteInstance: component length != point count");
    }
    if (param_points.rows() != 0 && static_cast<std::size_t>(param_points.rows()) != outputs.size()) {
        throw std::invalid_argument("DiscreteInstance: param_points rows != point count");
    }
    const std::size_t want = make_loss(loss)->output_dim();
    if (want != 0 && static_cast<std::size_t>(c) != want) {
        throw std::invalid_argument("DiscreteInstance: output width does not fit the loss");
    }
}

std::vector<Eigen::MatrixXd> component_means(const DiscreteInstance& inst) {
    std::vector<Eigen::MatrixXd> psi;
    psi.reserve(inst.component_count());
    for (const auto& phi : inst.components) {
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(inst.outputs.front().rows(), inst.outputs.front().cols());
        for (std::size_t k = 0; k < inst.point_count(); ++k) {
            if (phi[k] != 0.0) acc += phi[k] * inst.outputs[k];
        }
        psi.push_back(std::move(acc));
    }
    return psi;
}

Eigen::MatrixXd exact_mean(const DiscreteInstance& inst, const Eigen::VectorXd& alpha) {
    if (static_cast<std::size_t>(alpha.size()) != inst.component_count()) {
        throw std::invalid_argument("exact_mean: alpha has " + std::to_string(alpha.size()) + " entries, instance has " +
                                    std::to_string(inst.component_count()) + " components");
    }
    const auto psi = component_means(inst);
    Eigen::MatrixXd ubar = Eigen::MatrixXd::Zero(psi.front().rows(), psi.front().cols());
    for (std::size_t i = 0; i < psi.size(); ++i) ubar += alpha[static_cast<Eigen::Index>(i)] * psi[i];
    return ubar;
}

double exact_loss(const DiscreteInstance& inst, const Eigen::VectorXd& alpha) {
    return make_loss(inst.loss)->value(exact_mean(inst, alpha), inst.labels);
}

Eigen::VectorXd exact_gradient(const DiscreteInstance& inst, const Eigen::VectorXd& alpha) {
    const auto loss = make_loss(inst.loss);
    const Eigen::MatrixXd dj = loss->functional_gradient(exact_mean(inst, alpha), inst.labels);
    const auto psi = component_means(inst);
    Eigen::VectorXd g(static_cast<Eigen::Index>(psi.size()));
    for (std::size_t i = 0; i < psi.size(); ++i) g[static_cast<Eigen::Index>(i)] = (dj.array() * psi[i].array()).sum();
    return g;
}

Eigen::VectorXd point_losses(const DiscreteInstance& inst) {
    const auto loss = make_loss(inst.loss);
    Eigen::VectorXd out(static_cast<Eigen::Index>(inst.point_count()));
    for (std::size_t k = 0; k < inst.point_count(); ++k) {
        out[static_cast<Eigen::Index>(k)] = loss->value(inst.outputs[k], inst.labels);
    }
    return out;
}

DiscreteInstance with_point_mass_components(const DiscreteInstance& inst) {
    DiscreteInstance full = inst;
    full.components.clear();
    for (std::size_t k = 0; k < inst.point_count(); ++k) {
        full.components.push_back(SimplexVector::point_mass(inst.point_count(), k));
    }
    return full;
}

DiscreteInstance random_instance(const RandomInstanceOptions& options, Rng& rng) {
    const std::size_t M = options.points, m = options.samples, n = options.components;
    if (M == 0 || m == 0 || n == 0) throw std::invalid_argument("random_instance: sizes must be positive");
    if (options.point_mass_components && n > M) {
        throw std::invalid_argument("random_instance: more point-mass components than points");
    }
    DiscreteInstance inst;
    inst.loss = options.loss;
    const auto cols = static_cast<Eigen::Index>(options.loss.kind == LossKind::cross_entropy ? options.loss.class_count : 1);
    inst.param_points.resize(static_cast<Eigen::Index>(M), 1);
    for (std::size_t k = 0; k < M; ++k) {
        inst.param_points(static_cast<Eigen::Index>(k), 0) = static_cast<double>(k);
        Eigen::MatrixXd u(static_cast<Eigen::Index>(m), cols);
        for (Eigen::Index j = 0; j < u.rows(); ++j) {
            for (Eigen::Index c = 0; c < cols; ++c) u(j, c) = rng.normal();
        }
        inst.outputs.push_back(std::move(u));
    }
    inst.labels.resize(static_cast<Eigen::Index>(m));
    for (Eigen::Index j = 0; j < inst.labels.size(); ++j) {
        switch (options.loss.kind) {
            case LossKind::l2:
                inst.labels[j] = rng.normal();
                break;
            case LossKind::cross_entropy:
                inst.labels[j] = static_cast<double>(rng.below(options.loss.class_count));
                break;
            case LossKind::linear:
                inst.labels[j] = 0.0;
                break;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (options.point_mass_components) {
            inst.components.push_back(SimplexVector::point_mass(M, i));
        } else {
            inst.components.emplace_back(random_simplex_point(M, rng, false));
        }
    }
    inst.validate();
    return inst;
}

Eigen::MatrixXd TabulatedModel::evaluate(const Eigen::MatrixXd& inputs) const {
    Eigen::MatrixXd out(inputs.rows(), table_.cols());
    for (Eigen::Index j = 0; j < inputs.rows(); ++j) {
        const double idx = inputs(j, 0);
        if (idx < 0.0 || idx >= static_cast<double>(table_.rows()) || std::floor(idx) != idx) {
            throw std::out_of_range("TabulatedModel: input is not a sample index");
        }
        out.row(j) = table_.row(static_cast<Eigen::Index>(idx));
    }
    return out;
}

DiscreteSampler::DiscreteSampler(const DiscreteInstance& inst) : inst_(inst) {
    inst_.validate();
    for (const auto& u : inst_.outputs) models_.push_back(std::make_shared<TabulatedModel>(u));
}

DrawnModel DiscreteSampler::draw_from_component(std::size_t i, Rng& rng) const {
    if (i >= inst_.component_count()) throw std::out_of_range("DiscreteSampler: component index out of range");
    const std::size_t k = sample_categorical(inst_.components[i], rng);
    return DrawnModel{models_[k], inst_.outputs[k]};
}

GradientEstimate ExactGradientSource::evaluate(const SimplexVector& alpha, std::size_t) {
    return GradientEstimate{exact_loss(inst_, alpha), exact_gradient(inst_, alpha)};
}

ExactMinimum minimize_exact_loss(const DiscreteInstance& inst, std::size_t max_iterations) {
    const std::size_t n = inst.component_count();
    Eigen::VectorXd x = SimplexVector::uniform(n).weights();
    Eigen::VectorXd y = x;
    double fx = exact_loss(inst, x);
    double lipschitz = 1.0;
    double t = 1.0;
    std::size_t it = 0;
    std::size_t quiet = 0;
    for (; it < max_iterations; ++it) {
        const double fy = exact_loss(inst, y);
        const Eigen::VectorXd gy = exact_gradient(inst, y);
        Eigen::VectorXd z;
        double fz = 0.0;
        for (int tries = 0; tries < 80; ++tries) {
            z = project_to_simplex(y - gy / lipschitz).weights();
            fz = exact_loss(inst, z);
            const Eigen::VectorXd d = z - y;
            if (fz <= fy + gy.dot(d) + 0.5 * lipschitz * d.squaredNorm() + 1e-15 * std::abs(fy)) break;
            lipschitz *= 2.0;
        }
        if (fz > fx) {
            // Restart momentum when the accelerated step fails to descend.
            t = 1.0;
            y = x;
            continue;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double moved = (z - x).lpNorm<Eigen::Infinity>();
        y = z + ((t - 1.0) / t_next) * (z - x);
        x = z;
        fx = fz;
        t = t_next;
        lipschitz *= 0.95;
        quiet = moved < 1e-15 ? quiet + 1 : 0;
        if (quiet >= 5) break;
    }
    return ExactMinimum{SimplexVector(x), fx, it};
}

Prop1Report verify_prop1(const DiscreteInstance& inst, std::size_t budget) {
    const DiscreteInstance full = with_point_mass_components(inst);
    Prop1Report report;
    report.mixture_min = minimize_exact_loss(full, budget).loss;
    report.pointmass_min = point_losses(inst).minCoeff();
    report.holds = report.mixture_min <= report.pointmass_min + 1e-6;
    return report;
}

LinearCaseReport verify_linear_case(const DiscreteInstance& inst, std::size_t trials, Rng& rng) {
    if (!make_loss(inst.loss)->is_linear()) throw std::invalid_argument("verify_linear_case: loss is not linear");
    const DiscreteInstance full = with_point_mass_components(inst);
    const Eigen::VectorXd losses = point_losses(inst);
    const std::size_t M = inst.point_count();

    LinearCaseReport report;
    report.l0 = losses.minCoeff();
    const double tie = 1e-12 * std::max(1.0, std::abs(report.l0));
    std::vector<std::size_t> argmin;
    for (std::size_t k = 0; k < M; ++k) {
        if (losses[static_cast<Eigen::Index>(k)] - report.l0 <= tie) argmin.push_back(k);
    }
    report.argmin_size = argmin.size();
    report.trials = trials;
    report.min_unsupported_gap = std::numeric_limits<double>::infinity();
    report.min_gap_any = std::numeric_limits<double>::infinity();

    for (std::size_t trial = 0; trial < trials; ++trial) {
        Eigen::VectorXd mu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(M));
        if (trial % 2 == 0) {
            for (std::size_t k : argmin) mu[static_cast<Eigen::Index>(k)] = rng.uniform() + 1e-3;
        } else {
            for (Eigen::Index k = 0; k < mu.size(); ++k) mu[k] = rng.uniform() + 1e-3;
        }
        mu /= mu.sum();
        bool supported = true;
        for (Eigen::Index k = 0; k < mu.size(); ++k) {
            if (mu[k] > 0.0 && std::find(argmin.begin(), argmin.end(), static_cast<std::size_t>(k)) == argmin.end()) {
                supported = false;
            }
        }
        const double gap = exact_loss(full, mu) - report.l0;
        report.min_gap_any = std::min(report.min_gap_any, gap);
        if (supported) {
            ++report.supported_trials;
            report.max_supported_gap = std::max(report.max_supported_gap, std::abs(gap));
        } else {
            report.min_unsupported_gap = std::min(report.min_unsupported_gap, gap);
        }
    }
    report.holds = report.min_gap_any >= -kLinearEqualityTol && report.max_supported_gap <= kLinearEqualityTol &&
                   (report.supported_trials == trials || report.min_unsupported_gap >= kLinearStrictGap);
    return report;
}

double convexity_probe(const DiscreteInstance& inst, std::size_t trials, Rng& rng) {
    const std::size_t n = inst.component_count();
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t trial = 0; trial < trials; ++trial) {
        const Eigen::VectorXd a = random_simplex_point(n, rng, trial % 3 == 1);
        const Eigen::VectorXd b = random_simplex_point(n, rng, trial % 3 == 2);
        const double mid = exact_loss(inst, Eigen::VectorXd(0.5 * (a + b)));
        worst = std::max(worst, mid - 0.5 * (exact_loss(inst, a) + exact_loss(inst, b)));
    }
    return worst;
}

ProductToy random_product_toy(std::size_t points, std::size_t samples, std::size_t components, Rng& rng) {
    ProductToy toy;
    toy.loss = LossSpec{LossKind::l2, 1};
    toy.pair_outputs.assign(points * points, Eigen::MatrixXd());
    for (std::size_t k1 = 0; k1 < points; ++k1) {
        for (std::size_t k2 = k1; k2 < points; ++k2) {
            Eigen::MatrixXd u(static_cast<Eigen::Index>(samples), 1);
            for (Eigen::Index j = 0; j < u.rows(); ++j) u(j, 0) = rng.normal();
            toy.pair_outputs[k1 * points + k2] = u;
            toy.pair_outputs[k2 * points + k1] = u;
        }
    }
    toy.labels.resize(static_cast<Eigen::Index>(samples));
    for (Eigen::Index j = 0; j < toy.labels.size(); ++j) toy.labels[j] = rng.normal();
    for (std::size_t i = 0; i < components; ++i) toy.components.emplace_back(random_simplex_point(points, rng, true));
    return toy;
}

double product_exact_loss(const ProductToy& toy, const Eigen::VectorXd& alpha) {
    const std::size_t M = toy.point_count();
    Eigen::VectorXd rho = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(M));
    for (std::size_t i = 0; i < toy.components.size(); ++i) {
        rho += alpha[static_cast<Eigen::Index>(i)] * toy.components[i].weights();
    }
    Eigen::MatrixXd ubar = Eigen::MatrixXd::Zero(toy.labels.size(), 1);
    for (std::size_t k1 = 0; k1 < M; ++k1) {
        for (std::size_t k2 = 0; k2 < M; ++k2) {
            ubar += rho[static_cast<Eigen::Index>(k1)] * rho[static_cast<Eigen::Index>(k2)] * toy.pair_outputs[k1 * M + k2];
        }
    }
    return make_loss(toy.loss)->value(ubar, toy.labels);
}

double product_convexity_probe(const ProductToy& toy, std::size_t trials, Rng& rng) {
    const std::size_t n = toy.components.size();
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t trial = 0; trial < trials; ++trial) {
        const Eigen::VectorXd a = random_simplex_point(n, rng, true);
        const Eigen::VectorXd b = random_simplex_point(n, rng, true);
        const double mid = product_exact_loss(toy, 0.5 * (a + b));
        worst = std::max(worst, mid - 0.5 * (product_exact_loss(toy, a) + product_exact_loss(toy, b)));
    }
    return worst;
}

EstimatorHandles engine_handles(const DiscreteSampler& sampler, const LossFunctional& loss,
                                const SimplexVector& alpha, std::size_t R, std::size_t S, std::uint64_t seed) {
    EstimatorHandles h{alpha, {}, {}};
    h.ensemble = [&sampler, alpha, R, seed](std::size_t repeat) {
        return estimate_ensemble(sampler, alpha, R, DrawMode::joint, seed, repeat);
    };
    h.gradient = [&sampler, &loss, alpha, R, S, seed](std::size_t repeat) {
        const Eigen::MatrixXd ubar = estimate_ensemble(sampler, alpha, R, DrawMode::joint, seed, repeat);
        return estimate_gradient(ubar, sampler, S, loss, seed, repeat);
    };
    return h;
}

namespace {

struct BandResult {
    double max_z = 0.0;
    std::size_t outside = 0;
};

BandResult band_check(const Eigen::ArrayXd& sum, const Eigen::ArrayXd& sum_sq, std::size_t repeats,
                      const Eigen::ArrayXd& exact) {
    BandResult r;
    const double n = static_cast<double>(repeats);
    for (Eigen::Index e = 0; e < exact.size(); ++e) {
        const double mean = sum[e] / n;
        const double var = std::max(0.0, (sum_sq[e] - n * mean * mean) / std::max(1.0, n - 1.0));
        const double se = std::sqrt(var / n);
        const double dev = std::abs(mean - exact[e]);
        const double floor = 1e-12 * std::max(1.0, std::abs(exact[e]));
        if (se <= floor) {
            if (dev > floor) {
                ++r.outside;
                r.max_z = std::numeric_limits<double>::infinity();
            }
            continue;
        }
        const double z = dev / se;
        r.max_z = std::max(r.max_z, z);
        if (z > 3.0) ++r.outside;
    }
    return r;
}

}  // namespace

McReport mc_consistency(const DiscreteInstance& inst, const EstimatorHandles& handles, std::size_t repeats) {
    if (repeats < 2) throw std::invalid_argument("mc_consistency: need at least two repeats");
    const Eigen::MatrixXd exact_u = exact_mean(inst, handles.alpha.weights());
    const Eigen::VectorXd exact_g = exact_gradient(inst, handles.alpha.weights());
    const Eigen::Index nu = exact_u.size();
    Eigen::ArrayXd su = Eigen::ArrayXd::Zero(nu), squ = su;
    Eigen::ArrayXd sg = Eigen::ArrayXd::Zero(exact_g.size()), sqg = sg;
    // Accumulate deviations from the exact value so sums of squares stay well conditioned.
    const Eigen::ArrayXd ref_u = exact_u.reshaped().array();
    const Eigen::ArrayXd ref_g = exact_g.array();
    for (std::size_t r = 0; r < repeats; ++r) {
        const Eigen::ArrayXd u = handles.ensemble(r).reshaped().array() - ref_u;
        su += u;
        squ += u.square();
        const Eigen::ArrayXd g = handles.gradient(r).array() - ref_g;
        sg += g;
        sqg += g.square();
    }
    const BandResult bu = band_check(su, squ, repeats, Eigen::ArrayXd::Zero(nu));
    const BandResult bg = band_check(sg, sqg, repeats, Eigen::ArrayXd::Zero(exact_g.size()));
    McReport report;
    report.max_z_ensemble = bu.max_z;
    report.max_z_gradient = bg.max_z;
    report.ensemble_outside = bu.outside;
    report.gradient_outside = bg.outside;
    report.ensemble_ok = bu.outside == 0;
    report.gradient_ok = bg.outside == 0;
    return report;
}

// ---------------------------------------------------------------------------
// Fixture format

void write_instance(const DiscreteInstance& inst, std::ostream& out) {
    inst.validate();
    const auto d = inst.param_points.cols();
    out << "dsopt-instance 1\n";
    out << "loss " << loss_kind_name(inst.loss.kind) << ' ' << inst.loss.class_count << '\n';
    out << "sizes " << inst.point_count() << ' ' << inst.sample_count() << ' ' << inst.component_count() << ' '
        << inst.output_dim() << ' ' << d << '\n';
    out << "labels";
    for (Eigen::Index j = 0; j < inst.labels.size(); ++j) out << ' ' << format_real(inst.labels[j]);
    out << '\n';
    for (Eigen::Index k = 0; k < inst.param_points.rows(); ++k) {
        out << "point";
        for (Eigen::Index c = 0; c < d; ++c) out << ' ' << format_real(inst.param_points(k, c));
        out << '\n';
    }
    for (const auto& u : inst.outputs) {
        out << "output";
        for (Eigen::Index j = 0; j < u.rows(); ++j) {
            for (Eigen::Index c = 0; c < u.cols(); ++c) out << ' ' << format_real(u(j, c));
        }
        out << '\n';
    }
    for (const auto& phi : inst.components) {
        out << "component";
        for (std::size_t k = 0; k < phi.size(); ++k) out << ' ' << format_real(phi[k]);
        out << '\n';
    }
    for (const auto& [key, value] : inst.expectations) out << "expect " << key << ' ' << format_real(value) << '\n';
}

DiscreteInstance read_instance(std::istream& in) {
    DiscreteInstance inst;
    std::string line;
    std::size_t line_no = 0;
    std::size_t M = 0, m = 0, n = 0, C = 0, d = 0;
    bool header = false, sized = false;
    std::vector<std::vector<double>> points;
    auto fail = [&line_no](const std::string& msg) -> std::runtime_error {
        return std::runtime_error("instance line " + std::to_string(line_no) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto tok = split_whitespace(body);
        try {
            if (!header) {
                if (tok.size() != 2 || tok[0] != "dsopt-instance" || tok[1] != "1") throw fail("expected 'dsopt-instance 1'");
                header = true;
            } else if (tok[0] == "loss" && tok.size() == 3) {
                inst.loss = LossSpec{loss_kind_from_name(std::string(tok[1])), parse_uint(tok[2])};
            } else if (tok[0] == "sizes" && tok.size() == 6) {
                M = parse_uint(tok[1]);
                m = parse_uint(tok[2]);
                n = parse_uint(tok[3]);
                C = parse_uint(tok[4]);
                d = parse_uint(tok[5]);
                sized = true;
            } else if (!sized) {
                throw fail("'sizes' must precede data lines");
            } else if (tok[0] == "labels") {
                if (tok.size() != m + 1) throw fail("labels: expected " + std::to_string(m) + " values");
                inst.labels.resize(static_cast<Eigen::Index>(m));
                for (std::size_t j = 0; j < m; ++j) inst.labels[static_cast<Eigen::Index>(j)] = parse_real(tok[j + 1]);
            } else if (tok[0] == "point") {
                if (tok.size() != d + 1) throw fail("point: expected " + std::to_string(d) + " values");
                std::vector<double> p;
                for (std::size_t c = 0; c < d; ++c) p.push_back(parse_real(tok[c + 1]));
                points.push_back(std::move(p));
            } else if (tok[0] == "output") {
                if (tok.size() != m * C + 1) throw fail("output: expected " + std::to_string(m * C) + " values");
                Eigen::MatrixXd u(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(C));
                std::size_t pos = 1;
                for (Eigen::Index j = 0; j < u.rows(); ++j) {
                    for (Eigen::Index c = 0; c < u.cols(); ++c) u(j, c) = parse_real(tok[pos++]);
                }
                inst.outputs.push_back(std::move(u));
            } else if (tok[0] == "component") {
                if (tok.size() != M + 1) throw fail("component: expected " + std::to_string(M) + " values");
                Eigen::VectorXd phi(static_cast<Eigen::Index>(M));
                for (std::size_t k = 0; k < M; ++k) phi[static_cast<Eigen::Index>(k)] = parse_real(tok[k + 1]);
                inst.components.emplace_back(std::move(phi));
            } else if (tok[0] == "expect" && tok.size() == 3) {
                inst.expectations[std::string(tok[1])] = parse_real(tok[2]);
            } else {
                throw fail("unrecognized line");
            }
        } catch (const std::runtime_error&) {
            throw;
        } catch (const std::exception& e) {
            throw fail(e.what());
        }
    }
    if (!header || !sized) throw std::runtime_error("instance: missing header or sizes");
    if (inst.outputs.size() != M || inst.components.size() != n || points.size() != (d ? M : 0)) {
        throw std::runtime_error("instance: point/output/component counts do not match sizes");
    }
    inst.param_points.resize(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < points.size(); ++k) {
        for (std::size_t c = 0; c < d; ++c) inst.param_points(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = points[k][c];
    }
    inst.validate();
    return inst;
}

DiscreteInstance load_instance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return read_instance(in);
}

void save_instance(const DiscreteInstance& inst, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_instance(inst, out);
}

// ---------------------------------------------------------------------------
// Verification suite

namespace {

double fixture_expectation(const DiscreteInstance& inst, const std::string& key) {
    if (key == "loss_uniform") return exact_loss(inst, SimplexVector::uniform(inst.component_count()));
    if (key == "pointmass_min") return point_losses(inst).minCoeff();
    throw std::invalid_argument("unknown expectation '" + key + "'");
}

}  // namespace

std::vector<CheckResult> run_oracle_suite(const OracleSuiteOptions& options) {
    std::vector<CheckResult> checks;
    Rng rng = Rng::derive(options.seed, {static_cast<std::uint64_t>(StreamPurpose::oracle)});

    for (const auto& path : options.fixtures) {
        const std::string prefix = "fixture:" + path.stem().string() + ":";
        DiscreteInstance inst;
        try {
            inst = load_instance(path);
        } catch (const std::exception&) {
            checks.push_back({prefix + "load", 1.0, 0.0, false});
            continue;
        }
        for (const auto& [key, expected] : inst.expectations) {
            double stat = std::numeric_limits<double>::infinity();
            try {
                stat = std::abs(fixture_expectation(inst, key) - expected) / std::max(1.0, std::abs(expected));
            } catch (const std::exception&) {
            }
            checks.push_back({prefix + "expect:" + key, stat, 1e-12, stat <= 1e-12});
        }
        const double fd = fd_relative_error(inst, SimplexVector::uniform(inst.component_count()).weights());
        checks.push_back({prefix + "gradient_fd", fd, 1e-6, fd <= 1e-6});
        const double conv = convexity_probe(inst, options.convexity_trials, rng);
        checks.push_back({prefix + "convexity", conv, 1e-10, conv <= 1e-10});
        const auto p1 = verify_prop1(inst);
        checks.push_back({prefix + "prop1", p1.mixture_min - p1.pointmass_min, 1e-6, p1.holds});
        if (make_loss(inst.loss)->is_linear()) {
            const auto lc = verify_linear_case(inst, options.linear_trials, rng);
            checks.push_back({prefix + "linear_case", lc.max_supported_gap, kLinearEqualityTol, lc.holds});
        }
    }

    const std::size_t count = options.random_instances;
    const LossSpec l2{LossKind::l2, 1}, ce{LossKind::cross_entropy, 3}, linear{LossKind::linear, 1};
    auto draw = [&](const LossSpec& loss) {
        RandomInstanceOptions o;
        o.points = 2 + rng.below(9);
        o.samples = 1 + rng.below(20);
        o.components = 1 + rng.below(5);
        o.loss = loss;
        return random_instance(o, rng);
    };

    double worst_fd = 0.0;
    double worst_conv_l2 = -std::numeric_limits<double>::infinity(), worst_conv_ce = worst_conv_l2;
    double worst_p1_l2 = -std::numeric_limits<double>::infinity(), worst_p1_ce = worst_p1_l2;
    double worst_lin_eq = 0.0;
    bool lin_holds = true;
    double worst_lin_gap = 0.0;
    for (std::size_t t = 0; t < count; ++t) {
        for (const auto& spec : {l2, ce}) {
            const DiscreteInstance inst = draw(spec);
            worst_fd = std::max(worst_fd, fd_relative_error(inst, random_simplex_point(inst.component_count(), rng, false)));
            const double conv = convexity_probe(inst, options.convexity_trials, rng);
            const auto p1 = verify_prop1(inst);
            if (spec.kind == LossKind::l2) {
                worst_conv_l2 = std::max(worst_conv_l2, conv);
                worst_p1_l2 = std::max(worst_p1_l2, p1.mixture_min - p1.pointmass_min);
            } else {
                worst_conv_ce = std::max(worst_conv_ce, conv);
                worst_p1_ce = std::max(worst_p1_ce, p1.mixture_min - p1.pointmass_min);
            }
        }
        const DiscreteInstance lin = draw(linear);
        const auto p1 = verify_prop1(lin);
        worst_lin_eq = std::max(worst_lin_eq, std::abs(p1.mixture_min - p1.pointmass_min));
        const auto lc = verify_linear_case(lin, options.linear_trials, rng);
        lin_holds = lin_holds && lc.holds;
        worst_lin_gap = std::max(worst_lin_gap, lc.max_supported_gap);
    }
    if (count > 0) {
        checks.push_back({"gradient_fd", worst_fd, 1e-6, worst_fd <= 1e-6});
        checks.push_back({"convexity_l2", worst_conv_l2, 1e-10, worst_conv_l2 <= 1e-10});
        checks.push_back({"convexity_cross_entropy", worst_conv_ce, 1e-10, worst_conv_ce <= 1e-10});
        checks.push_back({"prop1_l2", worst_p1_l2, 1e-6, worst_p1_l2 <= 1e-6});
        checks.push_back({"prop1_cross_entropy", worst_p1_ce, 1e-6, worst_p1_ce <= 1e-6});
        checks.push_back({"prop1_linear_equality", worst_lin_eq, 1e-6, worst_lin_eq <= 1e-6});
        checks.push_back({"linear_case_support", worst_lin_gap, kLinearEqualityTol, lin_holds});
    }

    if (options.mc_repeats >= 2) {
        RandomInstanceOptions o;
        o.points = 5;
        o.samples = 4;
        o.components = 3;
        o.loss = l2;
        const DiscreteInstance inst = random_instance(o, rng);
        const DiscreteSampler sampler(inst);
        const EmpiricalL2 loss;
        const SimplexVector alpha(random_simplex_point(inst.component_count(), rng, false));
        const auto report = mc_consistency(inst, engine_handles(sampler, loss, alpha, 1, 1, options.seed),
                                           options.mc_repeats);
        checks.push_back({"mc_ensemble_band", report.max_z_ensemble, 3.0, report.ensemble_ok});
        checks.push_back({"mc_gradient_band", report.max_z_gradient, 3.0, report.gradient_ok});
    }

    // Product mode has no convexity guarantee; the probe is reported only.
    const ProductToy toy = random_product_toy(4, 6, 3, rng);
    const double product_violation = product_convexity_probe(toy, options.convexity_trials, rng);
    checks.push_back({"product_convexity_report", product_violation, std::numeric_limits<double>::infinity(), true});
    return checks;
}

}  // namespace dsopt
