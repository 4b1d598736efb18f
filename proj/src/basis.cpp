#include "dsopt/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "dsopt/text.hpp"

namespace dsopt {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double gaussian_normalizer(double radius) { return std::erf(radius / std::numbers::sqrt2); }

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string envelope_name(EnvelopeKind kind) {
    return kind == EnvelopeKind::triangle ? "triangle" : "truncated-gaussian";
}

EnvelopeKind envelope_from_name(std::string_view name) {
    if (name == "triangle") return EnvelopeKind::triangle;
    if (name == "truncated-gaussian") return EnvelopeKind::truncated_gaussian;
    throw std::invalid_argument("unknown envelope kind '" + std::string(name) + "'");
}

std::vector<double> domain_mass(const ScaledEnvelope& s) {
    std::vector<double> mass(s.mu.size(), 1.0);
    if (!s.domain) return mass;
    for (std::size_t k = 0; k < s.mu.size(); ++k) {
        const double upper = s.envelope.cdf((s.domain->second - s.mu[k]) / s.sigma);
        const double lower = s.envelope.cdf((s.domain->first - s.mu[k]) / s.sigma);
        mass[k] = upper - lower;
        if (!(mass[k] > 0.0)) {
            throw std::invalid_argument("scaled envelope has no mass inside its domain");
        }
    }
    return mass;
}

}  // namespace

double Envelope::density(double x) const {
    switch (kind) {
        case EnvelopeKind::triangle:
            return std::abs(x) <= 1.0 ? 1.0 - std::abs(x) : 0.0;
        case EnvelopeKind::truncated_gaussian:
            if (std::abs(x) > radius) return 0.0;
            return std::exp(-0.5 * x * x) / (std::sqrt(kTwoPi) * gaussian_normalizer(radius));
    }
    return 0.0;
}

double Envelope::cdf(double x) const {
    switch (kind) {
        case EnvelopeKind::triangle:
            if (x <= -1.0) return 0.0;
            if (x < 0.0) return 0.5 * (1.0 + x) * (1.0 + x);
            if (x < 1.0) return 1.0 - 0.5 * (1.0 - x) * (1.0 - x);
            return 1.0;
        case EnvelopeKind::truncated_gaussian: {
            if (x <= -radius) return 0.0;
            if (x >= radius) return 1.0;
            const double z = gaussian_normalizer(radius);
            return (std::erf(x / std::numbers::sqrt2) + z) / (2.0 * z);
        }
    }
    return 0.0;
}

double Envelope::support_radius() const {
    return kind == EnvelopeKind::triangle ? 1.0 : radius;
}

double Envelope::sample(Rng& rng) const {
    switch (kind) {
        case EnvelopeKind::triangle:
            // Sum of two uniforms has the triangular density on [-1, 1].
            return rng.uniform() + rng.uniform() - 1.0;
        case EnvelopeKind::truncated_gaussian:
            for (;;) {
                const double z = rng.normal();
                if (std::abs(z) <= radius) return z;
            }
    }
    return 0.0;
}

Envelope triangle_envelope() { return Envelope{EnvelopeKind::triangle, 1.0}; }

Envelope truncated_gaussian_envelope(double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("truncated gaussian radius must be positive");
    return Envelope{EnvelopeKind::truncated_gaussian, radius};
}

double envelope_density(const Envelope& e, double x) { return e.density(x); }

BasicDistribution::BasicDistribution(Kind kind) : kind_(std::move(kind)) {
    std::visit(overloaded{
                   [](ScaledEnvelope& s) {
                       if (s.mu.empty()) throw std::invalid_argument("scaled envelope needs a centre");
                       if (!(s.sigma > 0.0) || !std::isfinite(s.sigma)) {
                           throw std::invalid_argument("scaled envelope sigma must be positive");
                       }
                       if (s.domain && !(s.domain->first < s.domain->second)) {
                           throw std::invalid_argument("scaled envelope domain is empty");
                       }
                       s.mass = domain_mass(s);
                   },
                   [](GaussUniform& g) {
                       if (!(g.lambda > 0.0) || !std::isfinite(g.lambda)) {
                           throw std::invalid_argument("gauss-uniform lambda must be positive");
                       }
                       if (g.v_dim == 0) throw std::invalid_argument("gauss-uniform v_dim must be positive");
                   },
               },
               kind_);
}

std::size_t BasicDistribution::dimension() const {
    return std::visit(overloaded{
                          [](const ScaledEnvelope& s) { return s.mu.size(); },
                          [](const GaussUniform& g) { return g.v_dim + 1; },
                      },
                      kind_);
}

double BasicDistribution::density(std::span<const double> w) const {
    if (w.size() != dimension()) throw std::invalid_argument("density: dimension mismatch");
    return std::visit(
        overloaded{
            [&](const ScaledEnvelope& s) {
                double value = 1.0;
                for (std::size_t k = 0; k < w.size(); ++k) {
                    if (s.domain && (w[k] < s.domain->first || w[k] > s.domain->second)) return 0.0;
                    value *= s.envelope.density((w[k] - s.mu[k]) / s.sigma) / (s.sigma * s.mass[k]);
                }
                return value;
            },
            [&](const GaussUniform& g) {
                const double b = w[g.v_dim];
                if (b < 0.0 || b > kTwoPi) return 0.0;
                double sq = 0.0;
                for (std::size_t k = 0; k < g.v_dim; ++k) sq += w[k] * w[k];
                const double log_norm =
                    static_cast<double>(g.v_dim) * (std::log(g.lambda) - 0.5 * std::log(kTwoPi));
                return std::exp(log_norm - 0.5 * g.lambda * g.lambda * sq) / kTwoPi;
            },
        },
        kind_);
}

void BasicDistribution::sample_into(Rng& rng, std::span<double> out) const {
    if (out.size() != dimension()) throw std::invalid_argument("sample: dimension mismatch");
    std::visit(overloaded{
                   [&](const ScaledEnvelope& s) {
                       for (std::size_t k = 0; k < out.size(); ++k) {
                           for (;;) {
                               const double x = s.mu[k] + s.sigma * s.envelope.sample(rng);
                               if (!s.domain || (x >= s.domain->first && x <= s.domain->second)) {
                                   out[k] = x;
                                   break;
                               }
                           }
                       }
                   },
                   [&](const GaussUniform& g) {
                       for (std::size_t k = 0; k < g.v_dim; ++k) out[k] = rng.normal() / g.lambda;
                       out[g.v_dim] = rng.uniform(0.0, kTwoPi);
                   },
               },
               kind_);
}

std::vector<double> BasicDistribution::sample(Rng& rng) const {
    std::vector<double> out(dimension());
    sample_into(rng, out);
    return out;
}

std::pair<double, double> BasicDistribution::support(std::size_t coordinate) const {
    if (coordinate >= dimension()) throw std::out_of_range("support: coordinate out of range");
    return std::visit(overloaded{
                          [&](const ScaledEnvelope& s) {
                              const double r = s.sigma * s.envelope.support_radius();
                              double lo = s.mu[coordinate] - r;
                              double hi = s.mu[coordinate] + r;
                              if (s.domain) {
                                  lo = std::max(lo, s.domain->first);
                                  hi = std::min(hi, s.domain->second);
                              }
                              return std::pair{lo, hi};
                          },
                          [&](const GaussUniform& g) {
                              if (coordinate == g.v_dim) return std::pair{0.0, kTwoPi};
                              return std::pair{-8.0 / g.lambda, 8.0 / g.lambda};
                          },
                      },
                      kind_);
}

std::string BasicDistribution::label() const {
    std::ostringstream out;
    std::visit(overloaded{
                   [&](const ScaledEnvelope& s) {
                       out << envelope_name(s.envelope.kind) << "(sigma=" << format_real(s.sigma) << ",mu=";
                       for (std::size_t k = 0; k < s.mu.size(); ++k) {
                           out << (k ? ";" : "") << format_real(s.mu[k]);
                       }
                       out << ")";
                   },
                   [&](const GaussUniform& g) {
                       out << "gauss-uniform(lambda=" << format_real(g.lambda) << ",v_dim=" << g.v_dim << ")";
                   },
               },
               kind_);
    return out.str();
}

std::string BasicDistribution::serialize() const {
    std::ostringstream out;
    std::visit(overloaded{
                   [&](const ScaledEnvelope& s) {
                       out << "scaled " << envelope_name(s.envelope.kind) << ' ' << format_real(s.envelope.radius)
                           << ' ' << format_real(s.sigma) << ' ' << s.mu.size();
                       for (double m : s.mu) out << ' ' << format_real(m);
                       if (s.domain) {
                           out << " domain " << format_real(s.domain->first) << ' '
                               << format_real(s.domain->second);
                       } else {
                           out << " free";
                       }
                   },
                   [&](const GaussUniform& g) {
                       out << "gauss-uniform " << format_real(g.lambda) << ' ' << g.v_dim;
                   },
               },
               kind_);
    return out.str();
}

BasicDistribution BasicDistribution::parse(std::string_view text) {
    const auto tokens = split_whitespace(text);
    if (tokens.empty()) throw std::invalid_argument("empty component description");
    if (tokens[0] == "gauss-uniform") {
        if (tokens.size() != 3) throw std::invalid_argument("gauss-uniform expects: lambda v_dim");
        return BasicDistribution(GaussUniform{parse_real(tokens[1]), parse_uint(tokens[2])});
    }
    if (tokens[0] == "scaled") {
        if (tokens.size() < 5) throw std::invalid_argument("scaled component is truncated");
        ScaledEnvelope s;
        s.envelope.kind = envelope_from_name(tokens[1]);
        s.envelope.radius = parse_real(tokens[2]);
        s.sigma = parse_real(tokens[3]);
        const std::size_t d = parse_uint(tokens[4]);
        std::size_t pos = 5;
        if (tokens.size() < pos + d + 1) throw std::invalid_argument("scaled component is truncated");
        for (std::size_t k = 0; k < d; ++k) s.mu.push_back(parse_real(tokens[pos++]));
        if (tokens[pos] == "domain") {
            if (tokens.size() != pos + 3) throw std::invalid_argument("scaled domain expects: lo hi");
            s.domain = std::pair{parse_real(tokens[pos + 1]), parse_real(tokens[pos + 2])};
        } else if (tokens[pos] != "free" || tokens.size() != pos + 1) {
            throw std::invalid_argument("scaled component: expected 'domain lo hi' or 'free'");
        }
        return BasicDistribution(std::move(s));
    }
    throw std::invalid_argument("unknown component kind '" + std::string(tokens[0]) + "'");
}

bool operator==(const BasicDistribution& a, const BasicDistribution& b) {
    return a.serialize() == b.serialize();
}

MixtureBasis::MixtureBasis(std::vector<BasicDistribution> components)
    : components_(std::move(components)) {
    if (components_.empty()) throw std::invalid_argument("MixtureBasis: no components");
    const std::size_t d = components_.front().dimension();
    for (const auto& c : components_) {
        if (c.dimension() != d) throw std::invalid_argument("MixtureBasis: component dimensions disagree");
    }
}

BasicDistribution scaled_translated(const Envelope& e, double sigma, std::vector<double> mu) {
    if (!(sigma > 0.0 && sigma <= 1.0)) {
        throw std::invalid_argument("scaled_translated: sigma must lie in (0, 1], got " + format_real(sigma));
    }
    return BasicDistribution(ScaledEnvelope{e, sigma, std::move(mu), std::nullopt, {}});
}

MixtureBasis make_angle_basis(std::size_t n) {
    if (n == 0) throw std::invalid_argument("make_angle_basis: n must be positive");
    const double width = kTwoPi / static_cast<double>(n);
    std::vector<BasicDistribution> components;
    components.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        components.emplace_back(ScaledEnvelope{triangle_envelope(), width,
                                               {width * static_cast<double>(i)},
                                               std::pair{0.0, kTwoPi}, {}});
    }
    return MixtureBasis(std::move(components));
}

MixtureBasis make_gauss_uniform_basis(std::span<const double> lambdas, std::size_t v_dim) {
    std::vector<BasicDistribution> components;
    components.reserve(lambdas.size());
    for (double lambda : lambdas) {
        if (!(lambda > 0.0)) {
            throw std::invalid_argument("make_gauss_uniform_basis: lambda must be positive, got " +
                                        format_real(lambda));
        }
        components.emplace_back(GaussUniform{lambda, v_dim});
    }
    return MixtureBasis(std::move(components));
}

std::vector<double> lambda_grid(double lo, double hi, std::size_t count, bool geometric) {
    if (count == 0 || !(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("lambda_grid: bad range");
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        out[i] = geometric ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
    }
    out.back() = hi;
    return out;
}

double mixture_density(const MixtureBasis& basis, const SimplexVector& alpha, std::span<const double> w) {
    if (alpha.size() != basis.size()) throw std::invalid_argument("mixture_density: length mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        if (alpha[i] > 0.0) total += alpha[i] * basis[i].density(w);
    }
    return total;
}

std::vector<double> sample_mixture(const MixtureBasis& basis, const SimplexVector& alpha, Rng& rng) {
    if (alpha.size() != basis.size()) throw std::invalid_argument("sample_mixture: length mismatch");
    return basis[sample_categorical(alpha, rng)].sample(rng);
}

std::vector<double> sample_product(const MixtureBasis& basis, const SimplexVector& alpha,
                                   std::size_t node_count, Rng& rng) {
    if (basis.dimension() != 1) throw std::invalid_argument("sample_product: basis must be one-dimensional");
    if (alpha.size() != basis.size()) throw std::invalid_argument("sample_product: length mismatch");
    std::vector<double> out(node_count);
    for (auto& x : out) {
        basis[sample_categorical(alpha, rng)].sample_into(rng, std::span<double>(&x, 1));
    }
    return out;
}

}  // namespace dsopt
