#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "zinbgt/gene_counts.hpp"
#include "zinbgt/model.hpp"

namespace zinbgt {

enum class SimKind { FromParamsTable, NbMixtureMisspec };

/// Hyperpriors of the two-NB mixture family. Exponential draws are given by
/// their means.
struct MisspecHyper {
    double m1_mean = 10.0;          // m1 ~ Exp(mean)
    double ratio_excess_mean = 10.0;  // m2 = m1 * (1 + Exp(mean))
    double d_excess_mean = 10.0;    // d1, d2 ~ 1 + Exp(mean)
    double rho_a = 2.0;             // rho ~ Beta(a, b)
    double rho_b = 2.0;
};

struct SimSpec {
    SimKind kind = SimKind::FromParamsTable;
    std::int64_t n_cells = 1;
    std::int64_t n_genes = 0;
    std::uint64_t seed = 0;
    std::vector<Params> params_table;  // FromParamsTable only
    MisspecHyper hyper;
    unsigned threads = 1;
};

void validate(const SimSpec& spec);

/// True parameters of one two-NB mixture gene; rho is the weight of the first NB.
struct NbMixtureDraw {
    double rho = 0.0;
    double m1 = 0.0;
    double m2 = 0.0;
    double d1 = 1.0;
    double d2 = 1.0;
};

/// Plain (non-hurdle) NB draw with mean m and variance m * d, via gamma-Poisson.
std::int64_t sample_nb(double m, double d, std::mt19937_64& rng);

/// Gene j holds n_cells draws from params_table[j], named "gene_<j>".
std::vector<GeneCounts> simulate_zinbgt_dataset(const SimSpec& spec);

std::pair<std::vector<GeneCounts>, std::vector<NbMixtureDraw>> simulate_nb_mixture_dataset(const SimSpec& spec);

/// Hyperdraws for a single gene from its stream; exposed for testing.
NbMixtureDraw draw_nb_mixture(const MisspecHyper& hyper, std::mt19937_64& rng);

/**
 * Shipped parameter table (809 rows): 200 each of FullNbGeom, PoissonGeom,
 * NbOnly and PoissonOnly, then 9 GeomOnly, drawn uniformly (log-uniformly for
 * scale parameters) over fixed ranges with a fixed seed. The ranges are listed
 * in the README; bump the version when they change.
 */
inline constexpr int kDefaultParamsTableVersion = 1;
std::vector<Params> default_params_table();

/// One draw from the table's prior for a non-trivial submodel.
Params draw_table_params(Submodel kind, std::mt19937_64& rng);

/// Submodel label of each default table row, aligned with default_params_table().
std::vector<Submodel> default_params_table_kinds();

/// TSV with header "gene_id p0 p1 p2 m d mu_g"; doubles round-trip exactly.
void write_params_table(std::ostream& out, const std::vector<Params>& table);
std::vector<Params> read_params_table(std::istream& in);

/// TSV with header "gene_id rho m1 m2 d1 d2".
void write_hyperdraws(std::ostream& out, const std::vector<NbMixtureDraw>& draws);

}  // namespace zinbgt
