#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "zinbgt/gene_counts.hpp"
#include "zinbgt/pipeline.hpp"

namespace zinbgt {

/**
 * Tidy data files behind the standard figures. Every writer emits a TSV with a
 * header row. Parameters that describe an absent component (m and d with
 * p1 = 0, mu_g with p2 = 0) are left out, and genes with p0 = 1 appear only in
 * the p0 = 1 strip.
 *
 * Interior axes: p0, p1, p2 linear on [0, 1]; m, mu_g as log10; d as
 * log10(d - 1). Boundary values (p = 0 or 1, m = 0, d = 1, mu_g = 0) are
 * counted in separate strips, never in the interior bins.
 */
enum class PlotParam { P0, P1, P2, M, D, MuG };

inline constexpr std::array<PlotParam, 6> kPlotParams = {PlotParam::P0, PlotParam::P1, PlotParam::P2,
                                                         PlotParam::M,  PlotParam::D,  PlotParam::MuG};

std::string_view to_string(PlotParam p);

/// Boundary label of a parameter value ("0", "1"), or nullopt for interior values.
std::optional<std::string_view> boundary_label(PlotParam p, const Params& theta);

/// Whether the parameter is meaningful for theta.
bool is_defined(PlotParam p, const Params& theta);

/// Interior axis coordinate (see above).
double axis_value(PlotParam p, const Params& theta);

class UnknownGeneError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Columns: p0_bin p1_bin p0_lo p0_hi p1_lo p1_hi count density.
void write_ternary(std::ostream& out, const std::vector<GeneRecord>& records, int bins);

/// Columns: x_param y_param region x_boundary y_boundary x_bin y_bin x_lo x_hi y_lo y_hi count.
/// region is interior, x_strip, y_strip, corner or p0_one.
void write_hist2d(std::ostream& out, const std::vector<GeneRecord>& records, int bins);

/// Columns: param region boundary bin lo hi count.
void write_hist1d(std::ostream& out, const std::vector<GeneRecord>& records, int bins);

/// Side-bar proportions. Columns: param boundary count n_defined proportion.
void write_boundary(std::ostream& out, const std::vector<GeneRecord>& records);

/// Columns: gene_id submodel mean mean_source zero_fraction wasserstein p_b.
/// With `genes` the empirical mean is used, otherwise the fitted mixture mean.
void write_scatter(std::ostream& out, const std::vector<GeneRecord>& records,
                   const std::vector<GeneCounts>* genes);

/// Columns: gene_id x empirical model. Throws UnknownGeneError listing ids not
/// present in both the records and the genes.
void write_pmf(std::ostream& out, const std::vector<GeneRecord>& records, const std::vector<GeneCounts>& genes,
               const std::vector<std::string>& gene_ids, double mass_tol = kDefaultMassTolerance);

}  // namespace zinbgt
