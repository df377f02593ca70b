#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "zinbgt/gene_counts.hpp"
#include "zinbgt/model.hpp"

namespace zinbgt {

/// Map applied to count values before measuring transport distances.
enum class SupportTransform { Identity, Log1p };

std::string_view to_string(SupportTransform t);
std::optional<SupportTransform> parse_transform(std::string_view name);

double apply_transform(SupportTransform t, std::int64_t v);

struct DiagConfig {
    double alpha = 1.0;  // cost exponent; 1 and 2 are the tested values
    SupportTransform transform = SupportTransform::Log1p;
    int n_boot = 100;
    std::uint64_t seed = 0;  // gene-level stream seed
    double mass_tol = kDefaultMassTolerance;
};

void validate(const DiagConfig& config);

struct DiagnosticResult {
    double wasserstein = 0.0;
    std::optional<double> p_b;  // absent when only the distance was requested
    int n_boot = 0;
    int exceed_count = 0;  // bootstrap distances >= the observed one
    bool skipped = false;
    std::string skip_reason;
};

/**
 * Wasserstein distance between two pmfs on non-negative integers after mapping
 * the support through `transform`.
 *
 * alpha = 1 integrates |F_a - F_b| over the merged support. Other exponents
 * pair the two quantile functions over the merged cumulative breakpoints.
 */
double wasserstein_discrete(const DiscretePmf& a, const DiscretePmf& b, double alpha,
                            SupportTransform transform);

/// Observed frequencies of a gene as a pmf over its distinct values.
DiscretePmf empirical_pmf(const GeneCounts& counts);

/// Distance between the data and the fitted model, truncated at
/// config.mass_tol but never below the observed maximum.
double gene_wasserstein(const GeneCounts& counts, const Params& theta, const DiagConfig& config);

/**
 * Bootstrap p_B: the share of n_boot samples of size n_cells, drawn from
 * theta and compared against the same theta (no refit), whose distance is at
 * least the observed one. Bootstrap i uses seed derive_seed(config.seed, i).
 */
DiagnosticResult p_b_value(const GeneCounts& counts, const Params& theta, const DiagConfig& config);

}  // namespace zinbgt
