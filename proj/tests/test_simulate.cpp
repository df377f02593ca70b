#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "zinbgt/sampler.hpp"
#include "zinbgt/simulate.hpp"

using namespace zinbgt;

namespace {

SimSpec table_spec(std::vector<Params> table, std::int64_t n_cells, std::uint64_t seed) {
    SimSpec s;
    s.kind = SimKind::FromParamsTable;
    s.n_cells = n_cells;
    s.n_genes = static_cast<std::int64_t>(table.size());
    s.params_table = std::move(table);
    s.seed = seed;
    return s;
}

}  // namespace

TEST(SimulateTable, DegenerateRows) {
    const auto genes = simulate_zinbgt_dataset(table_spec({Params{}, Params{0, 1, 0, 0, 1, 0}}, 50, 1));
    ASSERT_EQ(genes.size(), 2u);
    EXPECT_EQ(genes[0], GeneCounts("gene_0", {{0, 50}}));
    EXPECT_EQ(genes[1], GeneCounts("gene_1", {{1, 50}}));
}

TEST(SimulateTable, ReproducibleAcrossRunsAndWorkers) {
    auto spec = table_spec(std::vector<Params>(40, Params{0.3, 0.5, 0.2, 3.0, 2.0, 9.0}), 500, 77);
    const auto a = simulate_zinbgt_dataset(spec);
    spec.threads = 3;
    const auto b = simulate_zinbgt_dataset(spec);
    EXPECT_EQ(a, b);
    EXPECT_NE(a[0], a[1]);
}

TEST(SimulateTable, MeansMatchModel) {
    const std::vector<Params> table{Params{0.5, 0.5, 0, 4.0, 1.0, 0}, Params{0.2, 0.8, 0, 10.0, 3.0, 0},
                                    Params{0.7, 0.3, 0, 0.5, 2.0, 0}};
    const auto genes = simulate_zinbgt_dataset(table_spec(table, 200000, 5));
    for (std::size_t j = 0; j < table.size(); ++j) {
        const auto pmf = truncated_pmf(table[j], 1e-12 * 1000);
        double mean = 0.0, second = 0.0;
        for (std::size_t k = 0; k < pmf.support.size(); ++k) {
            const double x = static_cast<double>(pmf.support[k]);
            mean += x * pmf.mass[k];
            second += x * x * pmf.mass[k];
        }
        const double sigma = std::sqrt((second - mean * mean) / 200000.0);
        EXPECT_NEAR(genes[j].mean(), mixture_mean(table[j]), 5.0 * sigma) << j;
    }
}

TEST(SimulateTable, RejectsBadSpecs) {
    auto spec = table_spec({Params{}}, 10, 1);
    spec.n_genes = 2;
    EXPECT_THROW(simulate_zinbgt_dataset(spec), std::invalid_argument);
    auto bad = table_spec({Params{}, Params{0.5, 0.6, 0, 1, 1, 0}}, 10, 1);
    try {
        simulate_zinbgt_dataset(bad);
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
    }
    auto empty = table_spec({Params{}}, 0, 1);
    EXPECT_THROW(simulate_zinbgt_dataset(empty), std::invalid_argument);
}

TEST(SampleNb, Moments) {
    std::mt19937_64 rng(3);
    for (auto [m, d] : {std::pair{5.0, 1.0}, {5.0, 3.0}, {40.0, 11.0}, {0.3, 2.0}}) {
        const int n = 200000;
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = static_cast<double>(sample_nb(m, d, rng));
            s += x;
            s2 += x * x;
        }
        const double mean = s / n;
        const double var = s2 / n - mean * mean;
        EXPECT_NEAR(mean, m, 5.0 * std::sqrt(m * d / n));
        EXPECT_NEAR(var / mean, d, 0.05 * d);
    }
    EXPECT_EQ(sample_nb(0.0, 1.0, rng), 0);
}

TEST(SimulateMixture, HyperdrawsFollowPriors) {
    SimSpec spec;
    spec.kind = SimKind::NbMixtureMisspec;
    spec.n_cells = 1;
    spec.n_genes = 1000;
    spec.seed = 10;
    const auto [genes, draws] = simulate_nb_mixture_dataset(spec);
    ASSERT_EQ(draws.size(), 1000u);
    double rho = 0.0, m1 = 0.0;
    for (const auto& h : draws) {
        rho += h.rho;
        m1 += h.m1;
        EXPECT_GE(h.m2, h.m1);
        EXPECT_GE(h.d1, 1.0);
        EXPECT_GE(h.d2, 1.0);
        EXPECT_GT(h.rho, 0.0);
        EXPECT_LT(h.rho, 1.0);
    }
    EXPECT_GE(rho / 1000.0, 0.45);
    EXPECT_LE(rho / 1000.0, 0.55);
    // Exp(mean 10): standard error of the mean is 10 / sqrt(1000).
    EXPECT_NEAR(m1 / 1000.0, 10.0, 5.0 * 10.0 / std::sqrt(1000.0));
}

TEST(SimulateMixture, Reproducible) {
    SimSpec spec;
    spec.kind = SimKind::NbMixtureMisspec;
    spec.n_cells = 300;
    spec.n_genes = 10;
    spec.seed = 42;
    const auto a = simulate_nb_mixture_dataset(spec);
    spec.threads = 4;
    const auto b = simulate_nb_mixture_dataset(spec);
    EXPECT_EQ(a.first, b.first);
    ASSERT_EQ(a.second.size(), b.second.size());
    for (std::size_t j = 0; j < a.second.size(); ++j) EXPECT_EQ(a.second[j].rho, b.second[j].rho);
}

TEST(DefaultTable, ShapeAndRestrictions) {
    const auto table = default_params_table();
    const auto kinds = default_params_table_kinds();
    ASSERT_EQ(table.size(), 809u);
    ASSERT_EQ(kinds.size(), 809u);
    EXPECT_EQ(std::count(kinds.begin(), kinds.end(), Submodel::GeomOnly), 9);
    EXPECT_EQ(std::count(kinds.begin(), kinds.end(), Submodel::FullNbGeom), 200);
    for (std::size_t j = 0; j < table.size(); ++j) {
        EXPECT_TRUE(is_valid(table[j])) << j;
        EXPECT_TRUE(satisfies_restrictions(table[j], kinds[j])) << j;
    }
    EXPECT_EQ(default_params_table(), table);
}

TEST(ParamsTable, RoundTrip) {
    const auto table = default_params_table();
    std::stringstream io;
    write_params_table(io, table);
    EXPECT_EQ(read_params_table(io), table);

    std::istringstream bad("gene_id\tp0\tp1\tp2\tm\td\tmu_g\ng\t0.5\tx\t0\t1\t1\t0\n");
    EXPECT_THROW(read_params_table(bad), std::invalid_argument);
}

TEST(Hyperdraws, Table) {
    std::ostringstream out;
    write_hyperdraws(out, {NbMixtureDraw{0.5, 1.0, 2.0, 1.5, 3.0}});
    EXPECT_EQ(out.str(), "gene_id\trho\tm1\tm2\td1\td2\ngene_0\t0.5\t1\t2\t1.5\t3\n");
}
