#include "zinbgt/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "zinbgt/sampler.hpp"

namespace zinbgt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Stirling series correction 1/(12z) - 1/(360z^3) + 1/(1260z^5).
double stirling_tail(double z) {
    const double inv = 1.0 / z;
    const double inv2 = inv * inv;
    return inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0));
}

double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument(std::string("non-finite parameter ") + name);
    }
}

}  // namespace

namespace detail {

double log_rising_excess(double r, std::int64_t x) {
    if (x <= 16) {
        double s = 0.0;
        for (std::int64_t j = 1; j < x; ++j) s += std::log1p(static_cast<double>(j) / r);
        return s;
    }
    const double xd = static_cast<double>(x);
    if (r >= 1000.0) {
        return (r + xd - 0.5) * std::log1p(xd / r) - xd + stirling_tail(r + xd) - stirling_tail(r);
    }
    return std::lgamma(r + xd) - std::lgamma(r) - xd * std::log(r);
}

double log_expm1(double a) {
    if (a > 30.0) return a + std::log1p(-std::exp(-a));
    return std::log(std::expm1(a));
}

}  // namespace detail

std::string_view to_string(Submodel kind) {
    switch (kind) {
        case Submodel::FullNbGeom: return "FullNbGeom";
        case Submodel::PoissonGeom: return "PoissonGeom";
        case Submodel::NbOnly: return "NbOnly";
        case Submodel::PoissonOnly: return "PoissonOnly";
        case Submodel::ConstantOneOnly: return "ConstantOneOnly";
        case Submodel::GeomOnly: return "GeomOnly";
        case Submodel::AllZero: return "AllZero";
    }
    return "?";
}

std::optional<Submodel> parse_submodel(std::string_view name) {
    for (auto kind : kFittedSubmodels) {
        if (to_string(kind) == name) return kind;
    }
    if (name == to_string(Submodel::AllZero)) return Submodel::AllZero;
    return std::nullopt;
}

int free_parameters(Submodel kind) {
    switch (kind) {
        case Submodel::FullNbGeom: return 5;
        case Submodel::PoissonGeom: return 4;
        case Submodel::NbOnly: return 3;
        case Submodel::PoissonOnly: return 2;
        case Submodel::GeomOnly: return 2;
        case Submodel::ConstantOneOnly: return 1;
        case Submodel::AllZero: return 0;
    }
    return 0;
}

void validate(const Params& t) {
    require_finite(t.p0, "p0");
    require_finite(t.p1, "p1");
    require_finite(t.p2, "p2");
    require_finite(t.m, "m");
    require_finite(t.d, "d");
    require_finite(t.mu_g, "mu_g");
    for (double p : {t.p0, t.p1, t.p2}) {
        if (p < 0.0 || p > 1.0) throw std::invalid_argument("component weight outside [0, 1]");
    }
    if (std::abs(t.p0 + t.p1 + t.p2 - 1.0) > kWeightSumTolerance) {
        throw std::invalid_argument("component weights do not sum to one");
    }
    if (t.m < 0.0) throw std::invalid_argument("m must be non-negative");
    if (t.d < 1.0) throw std::invalid_argument("d must be at least one");
    if (t.mu_g < 0.0) throw std::invalid_argument("mu_g must be non-negative");
    if (t.m == 0.0 && t.d != 1.0) throw std::invalid_argument("m = 0 requires d = 1");
}

bool is_valid(const Params& theta) {
    try {
        validate(theta);
        return true;
    } catch (const std::invalid_argument&) {
        return false;
    }
}

bool satisfies_restrictions(const Params& t, Submodel kind) {
    const bool no_geom = t.p2 == 0.0 && t.mu_g == 0.0;
    switch (kind) {
        case Submodel::FullNbGeom: return true;
        case Submodel::PoissonGeom: return t.d == 1.0;
        case Submodel::NbOnly: return no_geom;
        case Submodel::PoissonOnly: return no_geom && t.d == 1.0;
        case Submodel::ConstantOneOnly: return no_geom && t.m == 0.0 && t.d == 1.0;
        case Submodel::GeomOnly: return no_geom && t.m == t.d - 1.0;
        case Submodel::AllZero:
            return t.p0 == 1.0 && t.p1 == 0.0 && t.p2 == 0.0 && t.m == 0.0 && t.d == 1.0 &&
                   t.mu_g == 0.0;
    }
    return false;
}

HurdleNbLogPmf::HurdleNbLogPmf(double m, double d) {
    require_finite(m, "m");
    require_finite(d, "d");
    if (m < 0.0 || d < 1.0) throw std::invalid_argument("hurdle NB requires m >= 0 and d >= 1");
    if (m == 0.0) {
        if (d != 1.0) throw std::invalid_argument("m = 0 requires d = 1");
        branch_ = Branch::ConstantOne;
        return;
    }
    m_ = m;
    if (d - 1.0 <= kPoissonClampWidth) {
        branch_ = Branch::Poisson;
        log_ratio_ = std::log(m);
        log_norm_ = detail::log_expm1(m);
        return;
    }
    branch_ = Branch::NegativeBinomial;
    shape_ = m / (d - 1.0);
    log_ratio_ = std::log(m) - std::log(d);
    log_norm_ = detail::log_expm1(shape_ * std::log1p(d - 1.0));
    odds_ = (d - 1.0) / d;
}

double HurdleNbLogPmf::operator()(std::int64_t x) const {
    if (x <= 0) return kNegInf;
    switch (branch_) {
        case Branch::ConstantOne:
            return x == 1 ? 0.0 : kNegInf;
        case Branch::Poisson: {
            const double xd = static_cast<double>(x);
            return xd * log_ratio_ - std::lgamma(xd + 1.0) - log_norm_;
        }
        case Branch::NegativeBinomial: {
            const double xd = static_cast<double>(x);
            return detail::log_rising_excess(shape_, x) + xd * log_ratio_ -
                   std::lgamma(xd + 1.0) - log_norm_;
        }
    }
    return kNegInf;
}

double HurdleNbLogPmf::successor_ratio(std::int64_t x) const {
    const double xd = static_cast<double>(x);
    if (branch_ == Branch::Poisson) return m_ / (xd + 1.0);
    return (xd + shape_) / (xd + 1.0) * odds_;
}

double log_pmf_hurdle_nb(std::int64_t x, double m, double d) {
    return HurdleNbLogPmf(m, d)(x);
}

double pmf_hurdle_nb(std::int64_t x, double m, double d) {
    return std::exp(log_pmf_hurdle_nb(x, m, d));
}

double log_pmf_hurdle_geom(std::int64_t x, double mu_g) {
    require_finite(mu_g, "mu_g");
    if (mu_g < 0.0) throw std::invalid_argument("mu_g must be non-negative");
    if (x <= 0) return kNegInf;
    if (mu_g == 0.0) return x == 1 ? 0.0 : kNegInf;
    const double xd = static_cast<double>(x);
    return (xd - 1.0) * std::log(mu_g) - xd * std::log1p(mu_g);
}

double pmf_hurdle_geom(std::int64_t x, double mu_g) {
    return std::exp(log_pmf_hurdle_geom(x, mu_g));
}

double pmf_zinbgt(std::int64_t x, const Params& theta) {
    if (x == 0) return theta.p0;
    double total = 0.0;
    if (theta.p1 > 0.0) total += theta.p1 * pmf_hurdle_nb(x, theta.m, theta.d);
    if (theta.p2 > 0.0) total += theta.p2 * pmf_hurdle_geom(x, theta.mu_g);
    return total;
}

double log_pmf_zinbgt(std::int64_t x, const Params& theta) {
    if (x == 0) return theta.p0 > 0.0 ? std::log(theta.p0) : kNegInf;
    double out = kNegInf;
    if (theta.p1 > 0.0) out = log_add(out, std::log(theta.p1) + log_pmf_hurdle_nb(x, theta.m, theta.d));
    if (theta.p2 > 0.0) out = log_add(out, std::log(theta.p2) + log_pmf_hurdle_geom(x, theta.mu_g));
    return out;
}

double loglik(const GeneCounts& counts, const Params& theta) {
    if (counts.n_cells() == 0) throw std::invalid_argument("loglik requires non-empty counts");
    const bool use_nb = theta.p1 > 0.0;
    const bool use_geom = theta.p2 > 0.0;
    const HurdleNbLogPmf nb(use_nb ? theta.m : 0.0, use_nb ? theta.d : 1.0);
    const double log_p1 = use_nb ? std::log(theta.p1) : kNegInf;
    const double log_p2 = use_geom ? std::log(theta.p2) : kNegInf;

    double total = 0.0;
    for (const auto& [x, c] : counts.pairs()) {
        double lp;
        if (x == 0) {
            lp = theta.p0 > 0.0 ? std::log(theta.p0) : kNegInf;
        } else {
            lp = kNegInf;
            if (use_nb) lp = log_add(lp, log_p1 + nb(x));
            if (use_geom) lp = log_add(lp, log_p2 + log_pmf_hurdle_geom(x, theta.mu_g));
        }
        if (lp == kNegInf) return kImpossibleLogLik;
        total += static_cast<double>(c) * lp;
    }
    return total;
}

double loglik(std::span<const std::int64_t> cells, const Params& theta) {
    return loglik(GeneCounts::from_cells("", cells), theta);
}

double mixture_mean(const Params& theta) {
    double nb_mean = 1.0;
    if (theta.m > 0.0) {
        if (theta.d - 1.0 <= kPoissonClampWidth) {
            nb_mean = theta.m / -std::expm1(-theta.m);
        } else {
            const double a = theta.nb_shape() * std::log1p(theta.d - 1.0);
            nb_mean = theta.m / -std::expm1(-a);
        }
    }
    return theta.p1 * nb_mean + theta.p2 * (1.0 + theta.mu_g);
}

double DiscretePmf::total() const {
    double s = 0.0;
    for (double v : mass) s += v;
    return s;
}

DiscretePmf truncated_pmf(const Params& theta, double mass_tol, std::int64_t min_support) {
    if (!(mass_tol > 0.0) || mass_tol > 1e-6) {
        throw std::invalid_argument("mass_tol must lie in (0, 1e-6]");
    }
    validate(theta);
    const std::int64_t cap = std::max(kMaxTruncation, min_support);

    const bool use_nb = theta.p1 > 0.0;
    const bool use_geom = theta.p2 > 0.0;
    const HurdleNbLogPmf nb(use_nb ? theta.m : 0.0, use_nb ? theta.d : 1.0);
    const double geom_log_q =
        use_geom && theta.mu_g > 0.0 ? std::log(theta.mu_g) - std::log1p(theta.mu_g) : 0.0;

    DiscretePmf out;
    out.support.push_back(0);
    out.mass.push_back(theta.p0);

    double nb_cum = 0.0;
    std::int64_t k = 0;
    auto tail_after = [&](std::int64_t x) {
        double tail = 0.0;
        if (use_nb) tail += theta.p1 * std::max(0.0, 1.0 - nb_cum);
        if (use_geom) {
            if (theta.mu_g > 0.0) {
                tail += theta.p2 * std::exp(static_cast<double>(x) * geom_log_q);
            } else if (x < 1) {
                tail += theta.p2;
            }
        }
        return tail;
    };

    while (k < cap && (k < min_support || !(tail_after(k) < mass_tol))) {
        ++k;
        double mass = 0.0;
        if (use_nb) {
            const double f = std::exp(nb(k));
            nb_cum += f;
            mass += theta.p1 * f;
        }
        if (use_geom) mass += theta.p2 * pmf_hurdle_geom(k, theta.mu_g);
        out.support.push_back(k);
        out.mass.push_back(mass);
    }

    const double residual = 1.0 - out.total();
    out.mass.back() = std::max(0.0, out.mass.back() + residual);
    out.tail_cut = k;
    out.folded_mass = residual;
    return out;
}

std::vector<std::int64_t> sample(const Params& theta, std::size_t n, std::uint64_t seed) {
    validate(theta);
    std::vector<std::int64_t> out;
    Sampler(theta).draw(n, seed, out);
    return out;
}

}  // namespace zinbgt
