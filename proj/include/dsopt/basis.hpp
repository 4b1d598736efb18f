#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "dsopt/random.hpp"
#include "dsopt/simplex.hpp"

namespace dsopt {

enum class EnvelopeKind { triangle, truncated_gaussian };

/// Compactly supported 1D density used to build approximate identities.
/// Multi-dimensional envelopes are products of the 1D envelope over coordinates.
struct Envelope {
    EnvelopeKind kind = EnvelopeKind::triangle;
    /// Truncation radius in standard deviations (truncated-gaussian only).
    double radius = 3.0;

    double density(double x) const;
    double cdf(double x) const;
    /// Half-width of the support.
    double support_radius() const;
    double sample(Rng& rng) const;

    friend bool operator==(const Envelope&, const Envelope&) = default;
};

Envelope triangle_envelope();
Envelope truncated_gaussian_envelope(double radius = 3.0);

double envelope_density(const Envelope& e, double x);

/// Envelope scaled by sigma and centred at mu, optionally restricted to a
/// per-coordinate interval [lo, hi] and renormalized there.
struct ScaledEnvelope {
    Envelope envelope;
    double sigma = 1.0;
    std::vector<double> mu;
    std::optional<std::pair<double, double>> domain;
    /// Per-coordinate mass of the unrestricted density inside `domain` (1 without one).
    std::vector<double> mass;
};

/// Centered Gaussian on v with standard deviation 1/lambda per entry times a
/// uniform phase b on [0, 2 pi]. Parameter layout is (v_1..v_vdim, b).
struct GaussUniform {
    double lambda = 1.0;
    std::size_t v_dim = 1;
};

/// One fixed mixture component: a density plus a sampler over parameter space.
class BasicDistribution {
public:
    using Kind = std::variant<ScaledEnvelope, GaussUniform>;

    explicit BasicDistribution(Kind kind);

    std::size_t dimension() const;
    double density(std::span<const double> w) const;
    std::vector<double> sample(Rng& rng) const;
    void sample_into(Rng& rng, std::span<double> out) const;

    /// Per-coordinate interval containing the support (gaussian coordinates
    /// report +-8 standard deviations).
    std::pair<double, double> support(std::size_t coordinate) const;

    std::string label() const;
    /// Whitespace-separated tokens that reconstruct this component exactly.
    std::string serialize() const;
    static BasicDistribution parse(std::string_view tokens);

    const Kind& kind() const { return kind_; }

    friend bool operator==(const BasicDistribution& a, const BasicDistribution& b);

private:
    Kind kind_;
};

/// Ordered set of components sharing one parameter dimension.
class MixtureBasis {
public:
    explicit MixtureBasis(std::vector<BasicDistribution> components);

    std::size_t size() const { return components_.size(); }
    std::size_t dimension() const { return components_.front().dimension(); }
    const BasicDistribution& operator[](std::size_t i) const { return components_[i]; }
    const std::vector<BasicDistribution>& components() const { return components_; }

    friend bool operator==(const MixtureBasis&, const MixtureBasis&) = default;

private:
    std::vector<BasicDistribution> components_;
};

/// Density w -> sigma^-d phi((w - mu) / sigma). Requires sigma in (0, 1].
BasicDistribution scaled_translated(const Envelope& e, double sigma, std::vector<double> mu);

/// n triangle hats over angles: component i (0-based) is centred at 2 pi i / n
/// with half-width 2 pi / n, truncated to [0, 2 pi] and renormalized.
MixtureBasis make_angle_basis(std::size_t n);

/// Gaussian-on-v times uniform-on-b components, one per lambda.
MixtureBasis make_gauss_uniform_basis(std::span<const double> lambdas, std::size_t v_dim);

/// `count` values spaced geometrically (or linearly) over [lo, hi].
std::vector<double> lambda_grid(double lo, double hi, std::size_t count, bool geometric = true);

double mixture_density(const MixtureBasis& basis, const SimplexVector& alpha,
                       std::span<const double> w);

std::vector<double> sample_mixture(const MixtureBasis& basis, const SimplexVector& alpha, Rng& rng);

/// Product mode: N coordinates drawn independently from a 1D mixture.
std::vector<double> sample_product(const MixtureBasis& basis, const SimplexVector& alpha,
                                   std::size_t node_count, Rng& rng);

}  // namespace dsopt
