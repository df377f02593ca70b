#include "zinbgt/pipeline.hpp"

#include <chrono>

#include "zinbgt/parallel.hpp"
#include "zinbgt/seed.hpp"

namespace zinbgt {

std::string_view to_string(DiagnosticsTier t) {
    switch (t) {
        case DiagnosticsTier::None: return "none";
        case DiagnosticsTier::Wasserstein: return "wass";
        case DiagnosticsTier::Full: return "full";
    }
    return "?";
}

std::optional<DiagnosticsTier> parse_diagnostics_tier(std::string_view name) {
    for (auto t : {DiagnosticsTier::None, DiagnosticsTier::Wasserstein, DiagnosticsTier::Full}) {
        if (to_string(t) == name) return t;
    }
    return std::nullopt;
}

std::uint64_t fit_seed(std::uint64_t global_seed, std::size_t gene_index) {
    return derive_seed(derive_seed(global_seed, kFitStream), gene_index);
}

std::uint64_t diag_seed(std::uint64_t global_seed, std::size_t gene_index) {
    return derive_seed(derive_seed(global_seed, kDiagStream), gene_index);
}

DiagnosticResult diagnose_gene(const GeneCounts& counts, const FitResult& fit, const PipelineConfig& config,
                               std::size_t gene_index) {
    DiagnosticResult skip;
    skip.skipped = true;
    switch (classify_trivial(counts)) {
        case TrivialClass::AllZero: skip.skip_reason = kSkipAllZero; return skip;
        case TrivialClass::ZeroOneOnly: skip.skip_reason = kSkipZeroOne; return skip;
        case TrivialClass::General: break;
    }
    if (config.tier == DiagnosticsTier::None) {
        skip.skip_reason = kSkipDisabled;
        return skip;
    }
    if (counts.max_value() <= config.min_max_count) {
        skip.skip_reason = kSkipBelowMaxCount;
        return skip;
    }
    DiagConfig diag = config.diag;
    diag.seed = diag_seed(config.seed, gene_index);
    if (config.tier == DiagnosticsTier::Full) return p_b_value(counts, fit.theta, diag);
    DiagnosticResult out;
    out.wasserstein = gene_wasserstein(counts, fit.theta, diag);
    return out;
}

std::vector<GeneRecord> run_pipeline(const std::vector<GeneCounts>& genes, const PipelineConfig& config,
                                     PhaseTimings* timings) {
    validate(config.fit);
    if (config.tier != DiagnosticsTier::None) validate(config.diag);

    using Clock = std::chrono::steady_clock;
    std::vector<GeneRecord> records(genes.size());

    const auto t0 = Clock::now();
    parallel_for(genes.size(), config.threads, [&](std::size_t i) {
        const auto& g = genes[i];
        auto& r = records[i];
        r.gene_id = g.gene_id();
        r.n_cells = g.n_cells();
        r.n_unique = g.n_unique();
        r.max_count = g.max_value();
        FitConfig fc = config.fit;
        fc.seed = fit_seed(config.seed, i);
        r.fit = fit_gene(g, fc);
    });
    const auto t1 = Clock::now();
    parallel_for(genes.size(), config.threads,
                 [&](std::size_t i) { records[i].diag = diagnose_gene(genes[i], records[i].fit, config, i); });
    const auto t2 = Clock::now();

    if (timings) {
        timings->fit_seconds = std::chrono::duration<double>(t1 - t0).count();
        timings->diagnostics_seconds = std::chrono::duration<double>(t2 - t1).count();
    }
    return records;
}

}  // namespace zinbgt
