#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zinbgt/em.hpp"
#include "zinbgt/gene_counts.hpp"
#include "zinbgt/wasserstein.hpp"

namespace zinbgt {

enum class DiagnosticsTier { None, Wasserstein, Full };

std::string_view to_string(DiagnosticsTier t);
std::optional<DiagnosticsTier> parse_diagnostics_tier(std::string_view name);

// Reasons recorded when a gene gets no diagnostics.
inline constexpr std::string_view kSkipAllZero = "trivial_all_zero";
inline constexpr std::string_view kSkipZeroOne = "trivial_zero_one";
inline constexpr std::string_view kSkipBelowMaxCount = "below_min_max_count";
inline constexpr std::string_view kSkipDisabled = "disabled";

struct PipelineConfig {
    FitConfig fit;
    DiagConfig diag;  // its seed is replaced per gene
    DiagnosticsTier tier = DiagnosticsTier::Full;
    /// Diagnose only genes whose maximum count exceeds this value.
    std::int64_t min_max_count = 0;
    unsigned threads = 1;
    std::uint64_t seed = 0;
};

/// One output row.
struct GeneRecord {
    std::string gene_id;
    std::int64_t n_cells = 0;
    std::int64_t n_unique = 0;
    std::int64_t max_count = 0;
    FitResult fit;
    DiagnosticResult diag;
};

struct PhaseTimings {
    double fit_seconds = 0.0;
    double diagnostics_seconds = 0.0;
};

/// Per-gene seeds, derived from the global seed and the gene's input position.
std::uint64_t fit_seed(std::uint64_t global_seed, std::size_t gene_index);
std::uint64_t diag_seed(std::uint64_t global_seed, std::size_t gene_index);

/// Diagnostics for one fitted gene, honoring trivial-gene and threshold skips.
DiagnosticResult diagnose_gene(const GeneCounts& counts, const FitResult& fit, const PipelineConfig& config,
                               std::size_t gene_index);

/// Fits and diagnoses every gene; rows come back in input order and do not
/// depend on the worker count.
std::vector<GeneRecord> run_pipeline(const std::vector<GeneCounts>& genes, const PipelineConfig& config,
                                     PhaseTimings* timings = nullptr);

}  // namespace zinbgt
