#include "zinbgt/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "zinbgt/sampler.hpp"
#include "zinbgt/seed.hpp"

namespace zinbgt {

std::string_view to_string(SupportTransform t) {
    return t == SupportTransform::Identity ? "identity" : "log1p";
}

std::optional<SupportTransform> parse_transform(std::string_view name) {
    if (name == "identity") return SupportTransform::Identity;
    if (name == "log1p") return SupportTransform::Log1p;
    return std::nullopt;
}

double apply_transform(SupportTransform t, std::int64_t v) {
    const double x = static_cast<double>(v);
    return t == SupportTransform::Identity ? x : std::log1p(x);
}

void validate(const DiagConfig& c) {
    if (!(c.alpha >= 1.0) || !std::isfinite(c.alpha)) throw std::invalid_argument("alpha must be >= 1");
    if (c.n_boot < 1) throw std::invalid_argument("n_boot must be at least 1");
    if (!(c.mass_tol > 0.0) || c.mass_tol > 1e-6) throw std::invalid_argument("mass_tol must lie in (0, 1e-6]");
}

namespace {

double cdf_distance(const DiscretePmf& a, const DiscretePmf& b, SupportTransform transform) {
    std::size_t i = 0, j = 0;
    double fa = 0.0, fb = 0.0;
    double total = 0.0;
    bool started = false;
    double prev_t = 0.0;
    while (i < a.support.size() || j < b.support.size()) {
        std::int64_t v;
        if (j >= b.support.size() || (i < a.support.size() && a.support[i] <= b.support[j])) {
            v = a.support[i];
        } else {
            v = b.support[j];
        }
        const double t = apply_transform(transform, v);
        // F_a and F_b are constant on [prev, v).
        if (started) total += std::abs(fa - fb) * (t - prev_t);
        if (i < a.support.size() && a.support[i] == v) fa += a.mass[i++];
        if (j < b.support.size() && b.support[j] == v) fb += b.mass[j++];
        prev_t = t;
        started = true;
    }
    return total;
}

double quantile_distance(const DiscretePmf& a, const DiscretePmf& b, double alpha, SupportTransform transform) {
    // Walk the cumulative breakpoints of both distributions together.
    std::size_t i = 0, j = 0;
    double ca = a.mass.empty() ? 0.0 : a.mass[0];
    double cb = b.mass.empty() ? 0.0 : b.mass[0];
    double u = 0.0;
    double cost = 0.0;
    while (i < a.support.size() && j < b.support.size()) {
        const double next = std::min(ca, cb);
        const double width = next - u;
        if (width > 0.0) {
            const double gap = std::abs(apply_transform(transform, a.support[i]) -
                                        apply_transform(transform, b.support[j]));
            cost += width * std::pow(gap, alpha);
            u = next;
        }
        if (ca <= next) {
            if (++i < a.support.size()) ca += a.mass[i];
        }
        if (cb <= next) {
            if (++j < b.support.size()) cb += b.mass[j];
        }
    }
    return std::pow(cost, 1.0 / alpha);
}

void check_pmf(const DiscretePmf& p) {
    if (p.support.size() != p.mass.size() || p.support.empty()) {
        throw std::invalid_argument("pmf support and mass must be non-empty and aligned");
    }
    for (std::size_t k = 0; k < p.support.size(); ++k) {
        if (p.support[k] < 0 || (k > 0 && p.support[k] <= p.support[k - 1])) {
            throw std::invalid_argument("pmf support must be strictly increasing and non-negative");
        }
        if (!(p.mass[k] >= 0.0)) throw std::invalid_argument("pmf mass must be non-negative");
    }
}

}  // namespace

double wasserstein_discrete(const DiscretePmf& a, const DiscretePmf& b, double alpha, SupportTransform transform) {
    check_pmf(a);
    check_pmf(b);
    if (!(alpha >= 1.0)) throw std::invalid_argument("alpha must be >= 1");
    if (alpha == 1.0) return cdf_distance(a, b, transform);
    return quantile_distance(a, b, alpha, transform);
}

DiscretePmf empirical_pmf(const GeneCounts& counts) {
    DiscretePmf p;
    const double n = static_cast<double>(counts.n_cells());
    for (const auto& pair : counts.pairs()) {
        p.support.push_back(pair.value);
        p.mass.push_back(static_cast<double>(pair.multiplicity) / n);
    }
    p.tail_cut = p.support.empty() ? 0 : p.support.back();
    return p;
}

double gene_wasserstein(const GeneCounts& counts, const Params& theta, const DiagConfig& config) {
    validate(config);
    const auto model = truncated_pmf(theta, config.mass_tol, counts.max_value());
    return wasserstein_discrete(empirical_pmf(counts), model, config.alpha, config.transform);
}

DiagnosticResult p_b_value(const GeneCounts& counts, const Params& theta, const DiagConfig& config) {
    validate(config);
    const auto model = truncated_pmf(theta, config.mass_tol, counts.max_value());
    DiagnosticResult out;
    out.n_boot = config.n_boot;
    out.wasserstein = wasserstein_discrete(empirical_pmf(counts), model, config.alpha, config.transform);

    const Sampler sampler(theta);
    const auto n = static_cast<std::size_t>(counts.n_cells());
    const auto k_model = static_cast<std::size_t>(model.tail_cut);
    std::vector<std::int64_t> draws;
    std::vector<std::int64_t> tally(k_model + 1);
    std::vector<std::int64_t> beyond;
    DiscretePmf boot;
    for (int b = 0; b < config.n_boot; ++b) {
        sampler.draw(n, derive_seed(config.seed, static_cast<std::uint64_t>(b)), draws);
        std::fill(tally.begin(), tally.end(), 0);
        beyond.clear();
        for (const auto x : draws) {
            if (static_cast<std::size_t>(x) <= k_model) {
                ++tally[static_cast<std::size_t>(x)];
            } else {
                beyond.push_back(x);
            }
        }
        std::sort(beyond.begin(), beyond.end());
        boot.support.clear();
        boot.mass.clear();
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t v = 0; v <= k_model; ++v) {
            if (tally[v] == 0) continue;
            boot.support.push_back(static_cast<std::int64_t>(v));
            boot.mass.push_back(static_cast<double>(tally[v]) * inv_n);
        }
        for (std::size_t s = 0; s < beyond.size();) {
            std::size_t e = s;
            while (e < beyond.size() && beyond[e] == beyond[s]) ++e;
            boot.support.push_back(beyond[s]);
            boot.mass.push_back(static_cast<double>(e - s) * inv_n);
            s = e;
        }
        const double w_b = wasserstein_discrete(boot, model, config.alpha, config.transform);
        if (w_b >= out.wasserstein) ++out.exceed_count;
    }
    out.p_b = static_cast<double>(out.exceed_count) / static_cast<double>(config.n_boot);
    return out;
}

}  // namespace zinbgt
