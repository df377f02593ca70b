#include "zinbgt/simulate.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "zinbgt/parallel.hpp"
#include "zinbgt/sampler.hpp"
#include "zinbgt/seed.hpp"
#include "zinbgt/text.hpp"

namespace zinbgt {

namespace {

std::uint64_t gene_seed(std::uint64_t seed, std::size_t j) {
    return derive_seed(derive_seed(seed, kSimStream), j);
}

std::string gene_name(std::size_t j) { return "gene_" + std::to_string(j); }

double exponential_with_mean(double mean, std::mt19937_64& rng) { return -mean * std::log1p(-uniform01(rng)); }

double uniform(double lo, double hi, std::mt19937_64& rng) { return lo + (hi - lo) * uniform01(rng); }

double log_uniform(double lo, double hi, std::mt19937_64& rng) {
    return std::exp(uniform(std::log(lo), std::log(hi), rng));
}

constexpr std::uint64_t kDefaultTableSeed = 0x5a17'6e09'0000'0001ULL;
constexpr int kRowsPerKind = 200;
constexpr int kGeomOnlyRows = 9;

}  // namespace

void validate(const SimSpec& spec) {
    if (spec.n_cells < 1) throw std::invalid_argument("n_cells must be at least 1");
    if (spec.kind == SimKind::FromParamsTable) {
        if (spec.n_genes != static_cast<std::int64_t>(spec.params_table.size())) {
            throw std::invalid_argument("n_genes must equal the parameter table length");
        }
        for (std::size_t j = 0; j < spec.params_table.size(); ++j) {
            if (!is_valid(spec.params_table[j])) {
                throw std::invalid_argument("invalid parameters in table row " + std::to_string(j));
            }
        }
    } else if (spec.n_genes < 0) {
        throw std::invalid_argument("n_genes must be non-negative");
    }
}

std::int64_t sample_nb(double m, double d, std::mt19937_64& rng) {
    if (m <= 0.0) return 0;
    double lambda = m;
    if (d - 1.0 > kPoissonClampWidth) {
        std::gamma_distribution<double> gamma(m / (d - 1.0), d - 1.0);
        lambda = gamma(rng);
    }
    if (!(lambda > 0.0)) return 0;
    std::poisson_distribution<std::int64_t> poisson(lambda);
    return poisson(rng);
}

NbMixtureDraw draw_nb_mixture(const MisspecHyper& hyper, std::mt19937_64& rng) {
    NbMixtureDraw h;
    h.m1 = exponential_with_mean(hyper.m1_mean, rng);
    h.m2 = h.m1 * (1.0 + exponential_with_mean(hyper.ratio_excess_mean, rng));
    h.d1 = 1.0 + exponential_with_mean(hyper.d_excess_mean, rng);
    h.d2 = 1.0 + exponential_with_mean(hyper.d_excess_mean, rng);
    std::gamma_distribution<double> ga(hyper.rho_a, 1.0);
    std::gamma_distribution<double> gb(hyper.rho_b, 1.0);
    const double a = ga(rng);
    const double b = gb(rng);
    h.rho = a / (a + b);
    return h;
}

std::vector<GeneCounts> simulate_zinbgt_dataset(const SimSpec& spec) {
    if (spec.kind != SimKind::FromParamsTable) throw std::invalid_argument("spec is not a parameter-table spec");
    validate(spec);
    std::vector<GeneCounts> genes(spec.params_table.size());
    parallel_for(genes.size(), spec.threads, [&](std::size_t j) {
        std::vector<std::int64_t> cells;
        Sampler(spec.params_table[j]).draw(static_cast<std::size_t>(spec.n_cells), gene_seed(spec.seed, j), cells);
        genes[j] = GeneCounts::from_cells(gene_name(j), cells);
    });
    return genes;
}

std::pair<std::vector<GeneCounts>, std::vector<NbMixtureDraw>> simulate_nb_mixture_dataset(const SimSpec& spec) {
    if (spec.kind != SimKind::NbMixtureMisspec) throw std::invalid_argument("spec is not a mixture spec");
    validate(spec);
    const auto n_genes = static_cast<std::size_t>(spec.n_genes);
    std::vector<GeneCounts> genes(n_genes);
    std::vector<NbMixtureDraw> draws(n_genes);
    parallel_for(n_genes, spec.threads, [&](std::size_t j) {
        std::mt19937_64 rng(gene_seed(spec.seed, j));
        const auto h = draw_nb_mixture(spec.hyper, rng);
        std::vector<std::int64_t> cells(static_cast<std::size_t>(spec.n_cells));
        for (auto& c : cells) {
            c = uniform01(rng) < h.rho ? sample_nb(h.m1, h.d1, rng) : sample_nb(h.m2, h.d2, rng);
        }
        draws[j] = h;
        genes[j] = GeneCounts::from_cells(gene_name(j), cells);
    });
    return {std::move(genes), std::move(draws)};
}

std::vector<Submodel> default_params_table_kinds() {
    std::vector<Submodel> kinds;
    for (auto k : {Submodel::FullNbGeom, Submodel::PoissonGeom, Submodel::NbOnly, Submodel::PoissonOnly}) {
        kinds.insert(kinds.end(), kRowsPerKind, k);
    }
    kinds.insert(kinds.end(), kGeomOnlyRows, Submodel::GeomOnly);
    return kinds;
}

Params draw_table_params(Submodel kind, std::mt19937_64& rng) {
    Params t;
    t.p0 = uniform(0.2, 0.95, rng);
    const double rest = 1.0 - t.p0;
    switch (kind) {
        case Submodel::FullNbGeom:
            t.p1 = rest * uniform(0.5, 0.95, rng);
            t.p2 = rest - t.p1;
            t.m = log_uniform(0.5, 20.0, rng);
            t.d = 1.0 + log_uniform(0.1, 10.0, rng);
            t.mu_g = log_uniform(5.0, 200.0, rng);
            break;
        case Submodel::PoissonGeom:
            t.p1 = rest * uniform(0.5, 0.95, rng);
            t.p2 = rest - t.p1;
            t.m = log_uniform(0.5, 10.0, rng);
            t.d = 1.0;
            t.mu_g = log_uniform(5.0, 200.0, rng);
            break;
        case Submodel::NbOnly:
            t.p1 = rest;
            t.m = log_uniform(0.2, 30.0, rng);
            t.d = 1.0 + log_uniform(0.1, 20.0, rng);
            break;
        case Submodel::PoissonOnly:
            t.p1 = rest;
            t.m = log_uniform(0.1, 10.0, rng);
            t.d = 1.0;
            break;
        case Submodel::GeomOnly: {
            t.p1 = rest;
            const double mu = log_uniform(0.5, 30.0, rng);
            t.d = 1.0 + mu;
            t.m = t.d - 1.0;
            break;
        }
        default:
            throw std::invalid_argument("no table prior for " + std::string(to_string(kind)));
    }
    return t;
}

std::vector<Params> default_params_table() {
    std::mt19937_64 rng(kDefaultTableSeed);
    std::vector<Params> table;
    for (const auto kind : default_params_table_kinds()) table.push_back(draw_table_params(kind, rng));
    return table;
}

void write_params_table(std::ostream& out, const std::vector<Params>& table) {
    out << "gene_id\tp0\tp1\tp2\tm\td\tmu_g\n";
    for (std::size_t j = 0; j < table.size(); ++j) {
        const auto& t = table[j];
        out << gene_name(j) << '\t' << format_double(t.p0) << '\t' << format_double(t.p1) << '\t'
            << format_double(t.p2) << '\t' << format_double(t.m) << '\t' << format_double(t.d) << '\t'
            << format_double(t.mu_g) << '\n';
    }
}

std::vector<Params> read_params_table(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("parameter table is empty");
    std::vector<Params> table;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split(line, '\t');
        if (fields.size() != 7) {
            throw std::invalid_argument("parameter table row " + std::to_string(row) + " needs 7 fields");
        }
        double v[6];
        for (int k = 0; k < 6; ++k) {
            const auto parsed = parse_double(fields[static_cast<std::size_t>(k) + 1]);
            if (!parsed) throw std::invalid_argument("bad number in parameter table row " + std::to_string(row));
            v[k] = *parsed;
        }
        table.push_back(Params{v[0], v[1], v[2], v[3], v[4], v[5]});
    }
    return table;
}

void write_hyperdraws(std::ostream& out, const std::vector<NbMixtureDraw>& draws) {
    out << "gene_id\trho\tm1\tm2\td1\td2\n";
    for (std::size_t j = 0; j < draws.size(); ++j) {
        const auto& h = draws[j];
        out << gene_name(j) << '\t' << format_double(h.rho) << '\t' << format_double(h.m1) << '\t'
            << format_double(h.m2) << '\t' << format_double(h.d1) << '\t' << format_double(h.d2) << '\n';
    }
}

}  // namespace zinbgt
