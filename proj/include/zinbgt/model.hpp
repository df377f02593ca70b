#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "zinbgt/gene_counts.hpp"

namespace zinbgt {

/**
 * Mixture variants. The first six are fitted and compared by BIC; AllZero is
 * the closed-form outcome for genes with no non-zero counts.
 *
 * Restrictions carried by each variant:
 *   PoissonGeom      d = 1
 *   NbOnly           p2 = 0, mu_g = 0
 *   PoissonOnly      p2 = 0, mu_g = 0, d = 1
 *   ConstantOneOnly  p2 = 0, mu_g = 0, m = 0, d = 1
 *   GeomOnly         p2 = 0, mu_g = 0, m = d - 1
 * A constant-one component combined with a geometric tail is never built.
 */
enum class Submodel {
    FullNbGeom,
    PoissonGeom,
    NbOnly,
    PoissonOnly,
    ConstantOneOnly,
    GeomOnly,
    AllZero,
};

/// Fitted variants in fixed enumeration order (also the BIC tie-break order).
inline constexpr std::array<Submodel, 6> kFittedSubmodels = {
    Submodel::FullNbGeom,  Submodel::PoissonGeom,     Submodel::NbOnly,
    Submodel::PoissonOnly, Submodel::ConstantOneOnly, Submodel::GeomOnly,
};

std::string_view to_string(Submodel kind);
std::optional<Submodel> parse_submodel(std::string_view name);

/// Number of free parameters used in the BIC penalty.
int free_parameters(Submodel kind);

/// Mixture parameters: component weights, hurdle-NB mean m and dispersion d
/// (of the non-hurdle equivalent), and geometric mean mu_g.
struct Params {
    double p0 = 1.0;
    double p1 = 0.0;
    double p2 = 0.0;
    double m = 0.0;
    double d = 1.0;
    double mu_g = 0.0;

    /// NB shape r = m / (d - 1); only meaningful for d > 1.
    double nb_shape() const { return m / (d - 1.0); }
    /// Geometric success probability 1 / (1 + mu_g).
    double geom_success() const { return 1.0 / (1.0 + mu_g); }

    friend bool operator==(const Params&, const Params&) = default;
};

inline constexpr double kWeightSumTolerance = 1e-12;

/// Throws std::invalid_argument when a parameter invariant is violated.
void validate(const Params& theta);
bool is_valid(const Params& theta);

/// True when theta carries the exact restrictions of the given variant.
bool satisfies_restrictions(const Params& theta, Submodel kind);

/// Log-likelihood value used for data the model cannot produce.
inline constexpr double kImpossibleLogLik = -std::numeric_limits<double>::infinity();

/// d values at or below 1 + this width use the Poisson branch.
inline constexpr double kPoissonClampWidth = 1e-8;

/**
 * Log mass of the hurdle negative-binomial component, prepared once per (m, d).
 *
 * Branches: NB (m > 0, d > 1 + kPoissonClampWidth), hurdle Poisson
 * (m > 0, d within the clamp of 1) and the constant one (m = 0).
 */
class HurdleNbLogPmf {
public:
    HurdleNbLogPmf(double m, double d);

    double operator()(std::int64_t x) const;

    enum class Branch { NegativeBinomial, Poisson, ConstantOne };
    Branch branch() const { return branch_; }

    /// Ratio f(x + 1) / f(x) for x >= 1 (not defined for ConstantOne).
    double successor_ratio(std::int64_t x) const;

private:
    Branch branch_;
    double shape_ = 0.0;      // r
    double log_ratio_ = 0.0;  // log(m / d) or log(m)
    double log_norm_ = 0.0;   // log(d^r - 1) or log(e^m - 1)
    double odds_ = 0.0;       // (d - 1) / d
    double m_ = 0.0;
};

double log_pmf_hurdle_nb(std::int64_t x, double m, double d);
double pmf_hurdle_nb(std::int64_t x, double m, double d);

double log_pmf_hurdle_geom(std::int64_t x, double mu_g);
double pmf_hurdle_geom(std::int64_t x, double mu_g);

double pmf_zinbgt(std::int64_t x, const Params& theta);
double log_pmf_zinbgt(std::int64_t x, const Params& theta);

/// Observed-data log-likelihood; kImpossibleLogLik when a count has zero mass.
double loglik(const GeneCounts& counts, const Params& theta);
/// Same, for a per-cell vector (compacted first).
double loglik(std::span<const std::int64_t> cells, const Params& theta);

/// Mean of the mixture.
double mixture_mean(const Params& theta);

/// Finite representation of a pmf on non-negative integers.
struct DiscretePmf {
    std::vector<std::int64_t> support;  // strictly increasing
    std::vector<double> mass;           // aligned with support
    std::int64_t tail_cut = 0;          // last support point
    double folded_mass = 0.0;           // residual tail mass added at tail_cut

    double total() const;
};

inline constexpr double kDefaultMassTolerance = 1e-10;
inline constexpr std::int64_t kMaxTruncation = 1'000'000;

/**
 * Dense pmf on [0..K] for the smallest K whose tail mass is below mass_tol,
 * with K >= min_support; the residual mass is folded into K. K never exceeds
 * kMaxTruncation (or min_support, if larger).
 */
DiscretePmf truncated_pmf(const Params& theta, double mass_tol = kDefaultMassTolerance,
                          std::int64_t min_support = 0);

/// n independent draws; deterministic given seed.
std::vector<std::int64_t> sample(const Params& theta, std::size_t n, std::uint64_t seed);

namespace detail {

/// log Gamma(r + x) - log Gamma(r) - x log r, for r > 0 and x >= 0.
double log_rising_excess(double r, std::int64_t x);

/// log(e^a - 1) for a > 0.
double log_expm1(double a);

}  // namespace detail

}  // namespace zinbgt
