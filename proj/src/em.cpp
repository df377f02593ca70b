#include "zinbgt/em.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>

#include "zinbgt/nelder_mead.hpp"
#include "zinbgt/sampler.hpp"

namespace zinbgt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kMCap = 1e12;
constexpr std::int64_t kPrefixLimit = 16;

/// Weighted hurdle-NB log-likelihood over the non-zero values of one gene.
class NbObjective {
public:
    NbObjective(const GeneCounts& counts, std::span<const double> nb_resp) {
        const auto nz = counts.nonzero_pairs();
        x_.reserve(nz.size());
        w_.reserve(nz.size());
        for (std::size_t i = 0; i < nz.size(); ++i) {
            const double w = static_cast<double>(nz[i].multiplicity) * nb_resp[i];
            if (!(w > 0.0)) continue;
            x_.push_back(nz[i].value);
            w_.push_back(w);
            total_w_ += w;
            total_wx_ += w * static_cast<double>(nz[i].value);
            const_term_ += w * std::lgamma(static_cast<double>(nz[i].value) + 1.0);
            all_ones_ = all_ones_ && nz[i].value == 1;
        }
    }

    double total_weight() const { return total_w_; }
    double weighted_sum() const { return total_wx_; }

    double operator()(double m, double d) const {
        if (m == 0.0) return all_ones_ ? 0.0 : kNegInf;
        if (d - 1.0 <= kPoissonClampWidth) {
            return total_wx_ * std::log(m) - const_term_ - total_w_ * detail::log_expm1(m);
        }
        const double r = m / (d - 1.0);
        // Prefix sums of log1p(j / r) reproduce detail::log_rising_excess for
        // small x without recomputing the shared terms.
        std::array<double, kPrefixLimit> prefix{};
        const std::int64_t top = std::min<std::int64_t>(x_.empty() ? 0 : x_.back(), kPrefixLimit);
        for (std::int64_t j = 1; j < top; ++j) {
            prefix[static_cast<std::size_t>(j)] = prefix[static_cast<std::size_t>(j - 1)] +
                                                  std::log1p(static_cast<double>(j) / r);
        }
        double rising = 0.0;
        for (std::size_t i = 0; i < x_.size(); ++i) {
            const auto x = x_[i];
            const double s = x <= kPrefixLimit ? prefix[static_cast<std::size_t>(x - 1)]
                                               : detail::log_rising_excess(r, x);
            rising += w_[i] * s;
        }
        return rising + total_wx_ * (std::log(m) - std::log(d)) - const_term_ -
               total_w_ * detail::log_expm1(r * std::log1p(d - 1.0));
    }

    /// Poisson branch objective without the constant term.
    double poisson(double m) const {
        return total_wx_ * std::log(m) - total_w_ * detail::log_expm1(m);
    }

private:
    std::vector<std::int64_t> x_;
    std::vector<double> w_;
    double total_w_ = 0.0;
    double total_wx_ = 0.0;
    double const_term_ = 0.0;
    bool all_ones_ = true;
};

struct Chart {
    double m_min;
    double d_max;

    std::array<double, 2> to_chart(double m, double d) const {
        const double excess = d - 1.0 <= kPoissonClampWidth ? kPoissonClampWidth : d - 1.0;
        return {std::log(std::max(m, m_min)), std::log(excess)};
    }

    std::pair<double, double> from_chart(const std::array<double, 2>& y) const {
        const double m = std::clamp(std::exp(y[0]), m_min, kMCap);
        const double excess = std::exp(y[1]);
        const double d = excess <= kPoissonClampWidth ? 1.0 : std::min(1.0 + excess, d_max);
        return {m, d};
    }
};

NbStep optimize_nb(const NbObjective& objective, double m_current, double d_current, const FitConfig& config,
                   const NelderMeadOptions& options) {
    const Chart chart{config.m_min, config.d_max};
    const auto start = chart.to_chart(m_current, d_current);
    auto minus_q = [&](const std::array<double, 2>& y) {
        const auto [m, d] = chart.from_chart(y);
        return -objective(m, d);
    };
    const auto res = nelder_mead<2>(minus_q, start, options);

    NbStep step{m_current, d_current, false, !res.converged};
    const auto [m_new, d_new] = chart.from_chart(res.x);
    const double q_new = objective(m_new, d_new);
    const double q_cur = objective(m_current, d_current);
    if (std::isfinite(q_new) && !(q_new < q_cur)) {
        step.m = m_new;
        step.d = d_new;
        step.improved = true;
    } else {
        step.stalled = true;
    }
    return step;
}

NelderMeadOptions em_nm_options() {
    NelderMeadOptions o;
    o.max_evals = 400;
    o.initial_step = 0.1;
    return o;
}

struct Moments {
    double mean = 0.0;
    double var = 0.0;
};

Moments weighted_moments(std::span<const CountPair> nz, std::span<const double> weights) {
    double w = 0.0, wx = 0.0;
    for (std::size_t i = 0; i < nz.size(); ++i) {
        const double wi = static_cast<double>(nz[i].multiplicity) * weights[i];
        w += wi;
        wx += wi * static_cast<double>(nz[i].value);
    }
    Moments mo;
    if (w <= 0.0) return mo;
    mo.mean = wx / w;
    double ss = 0.0;
    for (std::size_t i = 0; i < nz.size(); ++i) {
        const double dx = static_cast<double>(nz[i].value) - mo.mean;
        ss += static_cast<double>(nz[i].multiplicity) * weights[i] * dx * dx;
    }
    mo.var = ss / w;
    return mo;
}

unsigned boundary_flags(const Params& t, const FitConfig& config) {
    unsigned f = kFlagNone;
    if (t.p1 > 0.0 && t.m == config.m_min) f |= kFlagMAtMin;
    if (t.p1 > 0.0 && t.d == config.d_max) f |= kFlagDAtMax;
    if (t.p2 > 0.0 && t.mu_g == config.mu_g_max) f |= kFlagMuGAtMax;
    return f;
}

FitResult impossible_result(Submodel kind, Params theta) {
    FitResult r;
    r.theta = theta;
    r.submodel = kind;
    r.loglik = kImpossibleLogLik;
    r.bic = kImpossibleBic;
    r.converged = false;
    return r;
}

void finish(FitResult& r, const GeneCounts& counts, const FitConfig& config) {
    r.bic = bic(r.submodel, r.loglik, counts.n_cells());
    r.flags |= boundary_flags(r.theta, config);
}

const PoissonMleTable& table_for(const FitConfig& config) {
    if (config.m_min == PoissonMleTable::shared().m_min()) return PoissonMleTable::shared();
    thread_local std::unique_ptr<PoissonMleTable> local;
    if (!local || local->m_min() != config.m_min) local = std::make_unique<PoissonMleTable>(config.m_min);
    return *local;
}

double max_param_change(const Params& a, const Params& b) {
    return std::max({std::abs(a.p1 - b.p1), std::abs(a.p2 - b.p2), std::abs(a.m - b.m), std::abs(a.d - b.d),
                     std::abs(a.mu_g - b.mu_g)});
}

FitResult fit_em(const GeneCounts& counts, Submodel kind, const FitConfig& config) {
    const bool poisson = kind == Submodel::PoissonGeom;
    const auto nz = counts.nonzero_pairs();
    const double p0 = counts.zero_fraction();
    const auto& table = table_for(config);
    const auto nm_options = em_nm_options();

    FitResult result;
    result.submodel = kind;

    Initialization init = initialize(counts, config.init_strategy, config.seed);
    Responsibilities resp = std::move(init.resp);
    Params theta;
    double prev_ll = 0.0;
    bool have_prev = false;

    if (init.theta_defined) {
        theta = init.theta;
        if (poisson) theta.d = 1.0;
        theta.m = std::max(theta.m, config.m_min);
        theta.d = std::min(theta.d, config.d_max);
        theta.mu_g = std::min(theta.mu_g, config.mu_g_max);
        if (poisson) {
            if (auto r = e_step(counts, theta)) resp = std::move(*r);
        }
        prev_ll = loglik(counts, theta);
        have_prev = std::isfinite(prev_ll);
        if (config.record_trace && have_prev) result.loglik_trace.push_back(prev_ll);
    } else {
        const auto mo = weighted_moments(nz, resp.nb);
        theta.p0 = p0;
        theta.m = std::max(mo.mean, config.m_min);
        theta.d = poisson ? 1.0 : std::clamp(mo.var / std::max(mo.mean, config.m_min), 1.0, config.d_max);
        theta.mu_g = 0.0;
    }

    bool stalled = false;
    for (int iter = 1; iter <= config.max_iter; ++iter) {
        const auto props = m_step_proportions(counts, resp);
        Params next = theta;
        next.p0 = p0;
        next.p1 = props.p1;
        next.p2 = props.p2;

        if (const auto mu = m_step_geometric(counts, resp)) {
            next.mu_g = std::clamp(*mu, 0.0, config.mu_g_max);
        } else {
            next.p2 = 0.0;
            next.mu_g = 0.0;
            next.p1 = 1.0 - p0;
        }

        const NbObjective objective(counts, resp.nb);
        if (objective.total_weight() > 0.0) {
            if (poisson) {
                const double x_tilde = std::max(1.0, objective.weighted_sum() / objective.total_weight());
                const double m_new = solve_hurdle_poisson_m(x_tilde, table);
                if (!(objective.poisson(m_new) < objective.poisson(theta.m))) next.m = m_new;
                next.d = 1.0;
            } else {
                const auto step = optimize_nb(objective, theta.m, theta.d, config, nm_options);
                next.m = step.m;
                next.d = step.d;
                stalled = stalled || step.stalled;
            }
        } else {
            next.p1 = 0.0;
            next.p2 = 1.0 - p0;
        }

        const double ll = loglik(counts, next);
        if (config.record_trace) result.loglik_trace.push_back(ll);
        result.n_iter = iter;

        bool done = false;
        if (have_prev && std::isfinite(ll)) {
            const double rel = std::abs(ll - prev_ll) / std::max(std::abs(prev_ll), 1e-300);
            done = rel < config.loglik_rel_tol || max_param_change(next, theta) < config.param_abs_tol;
        }
        theta = next;
        prev_ll = ll;
        have_prev = std::isfinite(ll);
        if (done) {
            result.converged = true;
            break;
        }
        result.converged = false;

        auto fresh = e_step(counts, theta);
        if (!fresh) {
            auto bad = impossible_result(kind, theta);
            bad.n_iter = iter;
            bad.flags |= kFlagEStepFailure;
            bad.loglik_trace = std::move(result.loglik_trace);
            return bad;
        }
        resp = std::move(*fresh);
    }

    result.theta = theta;
    result.loglik = prev_ll;
    if (stalled) result.flags |= kFlagOptimizerStalled;
    if (!std::isfinite(prev_ll)) {
        auto bad = impossible_result(kind, theta);
        bad.n_iter = result.n_iter;
        return bad;
    }
    finish(result, counts, config);
    return result;
}

double nonzero_mean(const GeneCounts& counts) {
    double s = 0.0, c = 0.0;
    for (const auto& p : counts.nonzero_pairs()) {
        s += static_cast<double>(p.value) * static_cast<double>(p.multiplicity);
        c += static_cast<double>(p.multiplicity);
    }
    return s / c;
}

FitResult fit_direct(const GeneCounts& counts, Submodel kind, const FitConfig& config) {
    const double p0 = counts.zero_fraction();
    Params theta;
    theta.p0 = p0;
    theta.p1 = 1.0 - p0;
    theta.p2 = 0.0;
    theta.mu_g = 0.0;

    FitResult result;
    result.submodel = kind;
    result.converged = true;

    switch (kind) {
        case Submodel::ConstantOneOnly: {
            theta.m = 0.0;
            theta.d = 1.0;
            if (counts.max_value() > 1) return impossible_result(kind, theta);
            if (theta.p1 == 0.0) theta.p0 = 1.0;
            break;
        }
        case Submodel::PoissonOnly: {
            theta.m = solve_hurdle_poisson_m(std::max(1.0, nonzero_mean(counts)), table_for(config));
            theta.d = 1.0;
            break;
        }
        case Submodel::GeomOnly: {
            const double mu = std::max(0.0, nonzero_mean(counts) - 1.0);
            theta.d = std::min(1.0 + mu, config.d_max);
            theta.m = theta.d - 1.0;
            break;
        }
        case Submodel::NbOnly: {
            Responsibilities unit;
            unit.nb.assign(counts.nonzero_pairs().size(), 1.0);
            unit.geom.assign(counts.nonzero_pairs().size(), 0.0);
            const NbObjective objective(counts, unit.nb);
            const auto mo = weighted_moments(counts.nonzero_pairs(), unit.nb);
            double m = std::max(mo.mean, config.m_min);
            double d = std::clamp(mo.var / m, 1.0, config.d_max);
            NelderMeadOptions opt;
            opt.max_evals = 1000;
            opt.initial_step = 0.5;
            // Restart from each improvement; a collapsed simplex can stop early.
            for (int restart = 0; restart < 4; ++restart) {
                const double before = objective(m, d);
                const auto step = optimize_nb(objective, m, d, config, opt);
                m = step.m;
                d = step.d;
                result.n_iter += 1;
                if (!(objective(m, d) > before + 1e-12 * std::abs(before))) break;
                opt.initial_step = 0.1;
            }
            theta.m = m;
            theta.d = d;
            break;
        }
        default:
            throw std::invalid_argument("fit_direct: not a direct-MLE submodel");
    }

    result.theta = theta;
    result.loglik = loglik(counts, theta);
    if (!std::isfinite(result.loglik)) return impossible_result(kind, theta);
    finish(result, counts, config);
    return result;
}

}  // namespace

std::string_view to_string(InitStrategy s) {
    switch (s) {
        case InitStrategy::Median: return "median";
        case InitStrategy::Even: return "even";
        case InitStrategy::Exponential: return "exponential";
        case InitStrategy::Random: return "random";
    }
    return "?";
}

std::optional<InitStrategy> parse_init_strategy(std::string_view name) {
    for (auto s : {InitStrategy::Median, InitStrategy::Even, InitStrategy::Exponential, InitStrategy::Random}) {
        if (to_string(s) == name) return s;
    }
    return std::nullopt;
}

void validate(const FitConfig& c) {
    if (c.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
    if (!(c.loglik_rel_tol > 0.0) || !(c.param_abs_tol > 0.0)) {
        throw std::invalid_argument("tolerances must be positive");
    }
    if (!(c.m_min > 0.0) || !(c.d_max > 1.0) || !(c.mu_g_max > 0.0)) {
        throw std::invalid_argument("invalid parameter bounds");
    }
}

std::string flags_to_string(unsigned flags) {
    static constexpr std::pair<unsigned, const char*> kNames[] = {
        {kFlagMAtMin, "m_min"},           {kFlagDAtMax, "d_max"},
        {kFlagMuGAtMax, "mu_g_max"},      {kFlagOptimizerStalled, "optimizer_stalled"},
        {kFlagNestingViolation, "nesting"}, {kFlagEStepFailure, "estep_failure"},
    };
    std::string out;
    for (const auto& [bit, name] : kNames) {
        if (!(flags & bit)) continue;
        if (!out.empty()) out += ';';
        out += name;
    }
    return out;
}

double bic(Submodel kind, double ll, std::int64_t n_cells) {
    if (!std::isfinite(ll)) return kImpossibleBic;
    return free_parameters(kind) * std::log(static_cast<double>(n_cells)) - 2.0 * ll;
}

PoissonMleTable::PoissonMleTable(double m_min) {
    if (!(m_min > 0.0) || !(m_min < kCutoff)) throw std::invalid_argument("m_min must lie in (0, 30)");
    m_.resize(kGridSize);
    x_.resize(kGridSize);
    const double lo = std::log(m_min);
    const double hi = std::log(kCutoff);
    for (std::size_t i = 0; i < kGridSize; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(kGridSize - 1);
        m_[i] = i + 1 == kGridSize ? kCutoff : (i == 0 ? m_min : std::exp(lo + t * (hi - lo)));
        x_[i] = x_tilde(m_[i]);
    }
}

const PoissonMleTable& PoissonMleTable::shared() {
    static const PoissonMleTable table(1e-8);
    return table;
}

double PoissonMleTable::x_tilde(double m) { return m / -std::expm1(-m); }

double solve_hurdle_poisson_m(double x_tilde, const PoissonMleTable& table) {
    if (!(x_tilde >= 1.0)) throw std::invalid_argument("x_tilde must be at least 1");
    if (x_tilde > PoissonMleTable::kCutoff) return x_tilde;
    const auto& xs = table.x_tilde_grid();
    const auto& ms = table.m_grid();
    if (x_tilde <= xs.front()) return ms.front();
    if (x_tilde >= xs.back()) return ms.back();
    const auto hi = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x_tilde) - xs.begin());
    const std::size_t lo = hi - 1;
    const double t = (x_tilde - xs[lo]) / (xs[hi] - xs[lo]);
    return ms[lo] + t * (ms[hi] - ms[lo]);
}

std::optional<Responsibilities> e_step(const GeneCounts& counts, const Params& theta) {
    const auto nz = counts.nonzero_pairs();
    Responsibilities resp;
    resp.nb.resize(nz.size());
    resp.geom.resize(nz.size());

    const bool use_nb = theta.p1 > 0.0;
    const bool use_geom = theta.p2 > 0.0;
    const HurdleNbLogPmf nb(use_nb ? theta.m : 0.0, use_nb ? theta.d : 1.0);
    const double log_p1 = use_nb ? std::log(theta.p1) : kNegInf;
    const double log_p2 = use_geom ? std::log(theta.p2) : kNegInf;

    for (std::size_t i = 0; i < nz.size(); ++i) {
        const auto x = nz[i].value;
        const double a = use_nb ? log_p1 + nb(x) : kNegInf;
        const double b = use_geom ? log_p2 + log_pmf_hurdle_geom(x, theta.mu_g) : kNegInf;
        if (a == kNegInf && b == kNegInf) return std::nullopt;
        if (a == kNegInf) {
            resp.nb[i] = 0.0;
            resp.geom[i] = 1.0;
        } else if (b == kNegInf) {
            resp.nb[i] = 1.0;
            resp.geom[i] = 0.0;
        } else {
            // Logistic form keeps both small responsibilities accurate.
            resp.nb[i] = 1.0 / (1.0 + std::exp(b - a));
            resp.geom[i] = 1.0 / (1.0 + std::exp(a - b));
        }
    }
    return resp;
}

Proportions m_step_proportions(const GeneCounts& counts, const Responsibilities& resp) {
    const auto nz = counts.nonzero_pairs();
    const double n = static_cast<double>(counts.n_cells());
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < nz.size(); ++i) {
        const double c = static_cast<double>(nz[i].multiplicity);
        s1 += c * resp.nb[i];
        s2 += c * resp.geom[i];
    }
    return {counts.zero_fraction(), s1 / n, s2 / n};
}

std::optional<double> m_step_geometric(const GeneCounts& counts, const Responsibilities& resp) {
    const auto nz = counts.nonzero_pairs();
    double w = 0.0, wx = 0.0;
    for (std::size_t i = 0; i < nz.size(); ++i) {
        const double wi = static_cast<double>(nz[i].multiplicity) * resp.geom[i];
        w += wi;
        wx += wi * static_cast<double>(nz[i].value - 1);
    }
    if (!(w > 0.0)) return std::nullopt;
    return wx / w;
}

double nb_weighted_objective(const GeneCounts& counts, const Responsibilities& resp, double m, double d) {
    return NbObjective(counts, resp.nb)(m, d);
}

NbStep m_step_nb(const GeneCounts& counts, const Responsibilities& resp, double m_current, double d_current,
                 const FitConfig& config) {
    const NbObjective objective(counts, resp.nb);
    if (!(objective.total_weight() > 0.0)) {
        throw std::invalid_argument("m_step_nb requires positive NB responsibility");
    }
    return optimize_nb(objective, std::max(m_current, config.m_min), std::clamp(d_current, 1.0, config.d_max),
                       config, em_nm_options());
}

Initialization initialize(const GeneCounts& counts, InitStrategy strategy, std::uint64_t seed) {
    const auto nz = counts.nonzero_pairs();
    if (nz.empty()) throw std::invalid_argument("initialization needs at least one non-zero count");

    Initialization init;
    init.resp.nb.resize(nz.size());
    init.resp.geom.resize(nz.size());

    switch (strategy) {
        case InitStrategy::Median: {
            std::int64_t total = 0;
            for (const auto& p : nz) total += p.multiplicity;
            auto value_at = [&](std::int64_t pos) {
                for (const auto& p : nz) {
                    if (pos < p.multiplicity) return static_cast<double>(p.value);
                    pos -= p.multiplicity;
                }
                return static_cast<double>(nz.back().value);
            };
            const double median =
                total % 2 == 1 ? value_at(total / 2) : 0.5 * (value_at(total / 2 - 1) + value_at(total / 2));
            double mean = 0.0;
            for (const auto& p : nz) mean += static_cast<double>(p.value * p.multiplicity);
            mean /= static_cast<double>(total);
            double ss = 0.0;
            for (const auto& p : nz) {
                const double dx = static_cast<double>(p.value) - mean;
                ss += static_cast<double>(p.multiplicity) * dx * dx;
            }
            const double var = total > 1 ? ss / static_cast<double>(total - 1) : 0.0;

            Params& t = init.theta;
            t.p0 = counts.zero_fraction();
            t.p1 = (1.0 - t.p0) / 2.0;
            t.p2 = t.p1;
            t.m = median;
            t.d = std::max(1.0, var / median);
            t.mu_g = static_cast<double>(nz.back().value);
            init.theta_defined = true;
            auto resp = e_step(counts, t);
            if (!resp) throw std::logic_error("median initialization produced an impossible state");
            init.resp = std::move(*resp);
            break;
        }
        case InitStrategy::Even:
            std::fill(init.resp.nb.begin(), init.resp.nb.end(), 0.5);
            std::fill(init.resp.geom.begin(), init.resp.geom.end(), 0.5);
            break;
        case InitStrategy::Exponential:
            for (std::size_t i = 0; i < nz.size(); ++i) {
                init.resp.nb[i] = std::pow(10.0, static_cast<double>(1 - nz[i].value));
                init.resp.geom[i] = 1.0 - init.resp.nb[i];
            }
            break;
        case InitStrategy::Random: {
            std::mt19937_64 rng(seed);
            for (std::size_t i = 0; i < nz.size(); ++i) {
                double s = 0.0;
                for (std::int64_t c = 0; c < nz[i].multiplicity; ++c) s += uniform01(rng);
                init.resp.nb[i] = s / static_cast<double>(nz[i].multiplicity);
                init.resp.geom[i] = 1.0 - init.resp.nb[i];
            }
            break;
        }
    }
    return init;
}

FitResult fit_submodel(const GeneCounts& counts, Submodel kind, const FitConfig& config) {
    validate(config);
    switch (kind) {
        case Submodel::FullNbGeom:
        case Submodel::PoissonGeom:
            if (counts.nonzero_count() == 0) throw std::invalid_argument("EM fit needs non-zero counts");
            return fit_em(counts, kind, config);
        case Submodel::NbOnly:
        case Submodel::PoissonOnly:
        case Submodel::GeomOnly:
            if (counts.nonzero_count() == 0) throw std::invalid_argument("fit needs non-zero counts");
            return fit_direct(counts, kind, config);
        case Submodel::ConstantOneOnly:
            return fit_direct(counts, kind, config);
        case Submodel::AllZero:
            break;
    }
    throw std::invalid_argument("AllZero is not a fitted submodel");
}

FitResult fit_gene(const GeneCounts& counts, const FitConfig& config) {
    validate(config);
    switch (classify_trivial(counts)) {
        case TrivialClass::AllZero: {
            FitResult r;
            r.submodel = Submodel::AllZero;
            r.theta = Params{};
            r.loglik = 0.0;
            r.bic = 0.0;
            return r;
        }
        case TrivialClass::ZeroOneOnly:
            return fit_submodel(counts, Submodel::ConstantOneOnly, config);
        case TrivialClass::General:
            break;
    }

    std::array<FitResult, kFittedSubmodels.size()> fits;
    for (std::size_t i = 0; i < kFittedSubmodels.size(); ++i) {
        fits[i] = fit_submodel(counts, kFittedSubmodels[i], config);
    }

    double best_bic = kImpossibleBic;
    for (const auto& f : fits) best_bic = std::min(best_bic, f.bic);
    std::size_t chosen = 0;
    bool have = false;
    for (std::size_t i = 0; i < fits.size(); ++i) {
        if (!(fits[i].bic <= best_bic + kBicTieTolerance)) continue;
        if (!have || free_parameters(fits[i].submodel) < free_parameters(fits[chosen].submodel)) {
            chosen = i;
            have = true;
        }
    }

    FitResult out = fits[chosen];
    for (const auto& f : fits) out.per_submodel_bic[f.submodel] = f.bic;

    auto ll = [&](Submodel k) {
        return fits[static_cast<std::size_t>(std::find(kFittedSubmodels.begin(), kFittedSubmodels.end(), k) -
                                             kFittedSubmodels.begin())]
            .loglik;
    };
    constexpr double slack = 1e-6;
    const bool nested = ll(Submodel::FullNbGeom) >= ll(Submodel::PoissonGeom) - slack &&
                        ll(Submodel::PoissonGeom) >= ll(Submodel::PoissonOnly) - slack &&
                        ll(Submodel::FullNbGeom) >= ll(Submodel::NbOnly) - slack &&
                        ll(Submodel::NbOnly) >= ll(Submodel::GeomOnly) - slack;
    if (!nested) out.flags |= kFlagNestingViolation;
    return out;
}

}  // namespace zinbgt
