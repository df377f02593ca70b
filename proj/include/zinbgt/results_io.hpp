#pragma once

#include <array>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "zinbgt/pipeline.hpp"

namespace zinbgt {

inline constexpr std::array<std::string_view, 19> kResultColumns = {
    "gene_id", "n_cells", "n_unique", "max_count", "submodel", "p0",        "p1",
    "p2",      "m",       "d",        "mu_g",      "loglik",   "bic",       "n_iter",
    "converged", "boundary_flags", "wasserstein", "p_b",     "diag_skipped_reason",
};

/// Tab-separated table, one row per gene in the given order. Cells that do
/// not apply are empty; doubles use the shortest round-trip form.
void write_results_tsv(std::ostream& out, const std::vector<GeneRecord>& records);

/// JSON array mirroring the table, with the per-variant BIC map added.
void write_results_json(std::ostream& out, const std::vector<GeneRecord>& records);

/// Reads a table written by write_results_tsv. Throws std::invalid_argument
/// naming the line on malformed input.
std::vector<GeneRecord> read_results_tsv(std::istream& in);

unsigned parse_flags(std::string_view text);

}  // namespace zinbgt
