#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "zinbgt/gene_counts.hpp"
#include "zinbgt/model.hpp"

namespace zinbgt {

enum class InitStrategy { Median, Even, Exponential, Random };

std::string_view to_string(InitStrategy s);
std::optional<InitStrategy> parse_init_strategy(std::string_view name);

struct FitConfig {
    InitStrategy init_strategy = InitStrategy::Median;
    int max_iter = 500;
    double loglik_rel_tol = 1e-8;
    double param_abs_tol = 1e-6;
    std::uint64_t seed = 0;  // Random strategy only
    double m_min = 1e-8;
    double d_max = 1e6;
    double mu_g_max = 1e9;
    bool record_trace = false;  // keep the per-iteration log-likelihoods
};

void validate(const FitConfig& config);

/// Posterior membership of each non-zero unique value (aligned with
/// GeneCounts::nonzero_pairs()). Zeros belong wholly to the zero component.
/// For per-cell initializations the entries are per-value averages.
struct Responsibilities {
    std::vector<double> nb;
    std::vector<double> geom;
};

/// Fit annotations, combined as a bit set.
enum FitFlag : unsigned {
    kFlagNone = 0,
    kFlagMAtMin = 1u << 0,
    kFlagDAtMax = 1u << 1,
    kFlagMuGAtMax = 1u << 2,
    kFlagOptimizerStalled = 1u << 3,
    kFlagNestingViolation = 1u << 4,
    kFlagEStepFailure = 1u << 5,
};

std::string flags_to_string(unsigned flags);

struct FitResult {
    Params theta;
    Submodel submodel = Submodel::AllZero;
    double loglik = 0.0;
    double bic = 0.0;
    int n_iter = 0;
    bool converged = true;
    unsigned flags = kFlagNone;
    std::map<Submodel, double> per_submodel_bic;
    std::vector<double> loglik_trace;
};

inline constexpr double kImpossibleBic = std::numeric_limits<double>::infinity();
inline constexpr double kBicTieTolerance = 1e-9;

double bic(Submodel kind, double loglik, std::int64_t n_cells);

/**
 * Grid for inverting the hurdle-Poisson mean equation m / (1 - e^-m) = x~.
 * Holds 3000 m values log-spaced from m_min to the cutoff, with their x~.
 */
class PoissonMleTable {
public:
    static constexpr std::size_t kGridSize = 3000;
    static constexpr double kCutoff = 30.0;

    explicit PoissonMleTable(double m_min = 1e-8);

    /// Shared table for the default m_min.
    static const PoissonMleTable& shared();

    double m_min() const { return m_.front(); }
    const std::vector<double>& m_grid() const { return m_; }
    const std::vector<double>& x_tilde_grid() const { return x_; }

    /// x~ = m / (1 - e^-m).
    static double x_tilde(double m);

private:
    std::vector<double> m_;
    std::vector<double> x_;
};

/// Hurdle-Poisson MLE of m from the weighted mean of positive counts: x~ above
/// the cutoff is returned unchanged, smaller values are interpolated.
/// Throws std::invalid_argument for x~ < 1.
double solve_hurdle_poisson_m(double x_tilde, const PoissonMleTable& table = PoissonMleTable::shared());

/// Bayes responsibilities at each non-zero value; nullopt when some observed
/// value has zero mass under both non-zero components.
std::optional<Responsibilities> e_step(const GeneCounts& counts, const Params& theta);

struct Proportions {
    double p0 = 1.0;
    double p1 = 0.0;
    double p2 = 0.0;
};

Proportions m_step_proportions(const GeneCounts& counts, const Responsibilities& resp);

/// Weighted mean of (x - 1) under the geometric responsibilities; nullopt
/// when they carry no weight.
std::optional<double> m_step_geometric(const GeneCounts& counts, const Responsibilities& resp);

struct NbStep {
    double m = 0.0;
    double d = 1.0;
    bool improved = false;   // false: the warm start was returned
    bool stalled = false;    // optimizer ran out of budget or failed
};

/**
 * Maximizes the responsibility-weighted hurdle-NB log-likelihood over
 * (log m, log(d - 1)) with a simplex search warm-started at (m, d). The result
 * is clamped to m >= m_min, 1 <= d <= d_max and never lowers the objective
 * relative to the warm start.
 */
NbStep m_step_nb(const GeneCounts& counts, const Responsibilities& resp, double m_current, double d_current,
                 const FitConfig& config);

/// Responsibility-weighted hurdle-NB log-likelihood (the M-step objective).
double nb_weighted_objective(const GeneCounts& counts, const Responsibilities& resp, double m, double d);

struct Initialization {
    Params theta;
    Responsibilities resp;
    /// True when theta is a full starting point (Median); otherwise only resp
    /// is meaningful and an M-step comes first.
    bool theta_defined = false;
};

Initialization initialize(const GeneCounts& counts, InitStrategy strategy, std::uint64_t seed);

/// Fits one variant; incompatible data gives loglik = kImpossibleLogLik and
/// bic = kImpossibleBic.
FitResult fit_submodel(const GeneCounts& counts, Submodel kind, const FitConfig& config);

/// Fits every variant (or the closed form for trivial genes) and returns the
/// minimum-BIC result.
FitResult fit_gene(const GeneCounts& counts, const FitConfig& config);

}  // namespace zinbgt
