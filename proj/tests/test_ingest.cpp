#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "zinbgt/ingest.hpp"
#include "zinbgt/model.hpp"

using namespace zinbgt;

namespace {

std::vector<GeneCounts> dense(const std::string& text, Orientation o = Orientation::GenesAsColumns, char delim = '\t',
                              bool header = false, bool rownames = false,
                              std::vector<std::string>* warnings = nullptr) {
    std::istringstream in(text);
    return load_dense(in, o, delim, header, rownames, warnings);
}

std::vector<GeneCounts> mtx(const std::string& text, Orientation o = Orientation::GenesAsColumns) {
    std::istringstream in(text);
    return load_matrix_market(in, o);
}

std::vector<CountPair> pairs_of(const GeneCounts& g) { return {g.pairs().begin(), g.pairs().end()}; }

}  // namespace

TEST(GeneCounts, CompactsAndExpands) {
    const std::vector<std::int64_t> cells{3, 0, 1, 3, 0, 0, 7};
    const auto g = GeneCounts::from_cells("g", cells);
    EXPECT_EQ(pairs_of(g), (std::vector<CountPair>{{0, 3}, {1, 1}, {3, 2}, {7, 1}}));
    EXPECT_EQ(g.n_cells(), 7);
    EXPECT_EQ(g.zero_count(), 3);
    EXPECT_EQ(g.max_value(), 7);
    EXPECT_DOUBLE_EQ(g.mean(), 2.0);
    EXPECT_DOUBLE_EQ(g.zero_fraction(), 3.0 / 7.0);
    auto sorted = cells;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(g.expand(), sorted);
}

TEST(GeneCounts, RoundTripAndPermutationInvariance) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::int64_t> cells(1 + rng() % 200);
        for (auto& c : cells) c = static_cast<std::int64_t>(rng() % 3 == 0 ? 0 : rng() % 40);
        const auto a = GeneCounts::from_cells("g", cells);
        auto expanded = a.expand();
        auto sorted = cells;
        std::sort(sorted.begin(), sorted.end());
        EXPECT_EQ(expanded, sorted);
        std::shuffle(cells.begin(), cells.end(), rng);
        EXPECT_EQ(GeneCounts::from_cells("g", cells), a);
    }
}

TEST(GeneCounts, RejectsInvalidPairs) {
    EXPECT_THROW(GeneCounts("g", {{2, 1}, {1, 1}}), std::invalid_argument);
    EXPECT_THROW(GeneCounts("g", {{1, 0}}), std::invalid_argument);
    EXPECT_THROW(GeneCounts("g", {{-1, 2}}), std::invalid_argument);
    EXPECT_THROW(GeneCounts("g", {{1, 1}, {1, 1}}), std::invalid_argument);
    const std::vector<std::int64_t> negative{1, -2};
    EXPECT_THROW(GeneCounts::from_cells("g", negative), std::invalid_argument);
}

TEST(ClassifyTrivial, Examples) {
    EXPECT_EQ(classify_trivial(GeneCounts("g", {{0, 100}})), TrivialClass::AllZero);
    EXPECT_EQ(classify_trivial(GeneCounts("g", {{0, 90}, {1, 10}})), TrivialClass::ZeroOneOnly);
    EXPECT_EQ(classify_trivial(GeneCounts("g", {{0, 90}, {1, 9}, {7, 1}})), TrivialClass::General);
    EXPECT_EQ(classify_trivial(GeneCounts("g", {{1, 4}})), TrivialClass::ZeroOneOnly);
}

TEST(LoadDense, TwoByTwoGenesAsColumns) {
    const auto genes = dense("0\t1\n2\t0\n");
    ASSERT_EQ(genes.size(), 2u);
    EXPECT_EQ(pairs_of(genes[0]), (std::vector<CountPair>{{0, 1}, {2, 1}}));
    EXPECT_EQ(pairs_of(genes[1]), (std::vector<CountPair>{{0, 1}, {1, 1}}));
    EXPECT_EQ(genes[0].gene_id(), "gene_0");
    EXPECT_EQ(genes[1].gene_id(), "gene_1");
}

TEST(LoadDense, GenesAsRowsWithNames) {
    const auto genes = dense("gene,c1,c2,c3\nA,0,4,4\nB,1,0,0\n", Orientation::GenesAsRows, ',', true, true);
    ASSERT_EQ(genes.size(), 2u);
    EXPECT_EQ(genes[0].gene_id(), "A");
    EXPECT_EQ(pairs_of(genes[0]), (std::vector<CountPair>{{0, 1}, {4, 2}}));
    EXPECT_EQ(genes[1].gene_id(), "B");
    EXPECT_EQ(genes[1].n_cells(), 3);
}

TEST(LoadDense, HeaderNamesGenesAsColumns) {
    const auto genes = dense("cell\tX\tY\nc1\t0\t3\nc2\t5\t0\n", Orientation::GenesAsColumns, '\t', true, true);
    ASSERT_EQ(genes.size(), 2u);
    EXPECT_EQ(genes[0].gene_id(), "X");
    EXPECT_EQ(genes[1].gene_id(), "Y");
    EXPECT_EQ(pairs_of(genes[1]), (std::vector<CountPair>{{0, 1}, {3, 1}}));
}

TEST(LoadDense, AcceptsIntegralDecimals) {
    const auto genes = dense("1.0\t2\n0\t3.000\n");
    EXPECT_EQ(pairs_of(genes[0]), (std::vector<CountPair>{{0, 1}, {1, 1}}));
}

TEST(LoadDense, NonIntegerEntryNamesRowAndColumn) {
    try {
        dense("0\t1\n2.5\t0\n");
        FAIL() << "expected an IngestError";
    } catch (const IngestError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("non-integer"), std::string::npos) << what;
        EXPECT_NE(what.find("row 2"), std::string::npos) << what;
        EXPECT_NE(what.find("column 1"), std::string::npos) << what;
        EXPECT_EQ(e.line(), 2);
        EXPECT_EQ(e.offset(), 4);
        EXPECT_EQ(e.gene(), 0);
        EXPECT_EQ(e.cell(), 1);
    }
}

TEST(LoadDense, NegativeAndRaggedRowsRejected) {
    EXPECT_THROW(dense("0\t-1\n"), IngestError);
    EXPECT_THROW(dense("0\t1\n2\n"), IngestError);
    EXPECT_THROW(dense("a\t1\n"), IngestError);
    EXPECT_THROW(dense("x\ty\tz\n1\t2\n", Orientation::GenesAsColumns, '\t', true), IngestError);
    EXPECT_THROW(dense(""), IngestError);
}

TEST(LoadDense, DuplicateIdsSuffixed) {
    std::vector<std::string> warnings;
    const auto genes = dense("A\tB\tA\tA\n1\t2\t3\t4\n", Orientation::GenesAsColumns, '\t', true, false, &warnings);
    EXPECT_EQ(genes[0].gene_id(), "A");
    EXPECT_EQ(genes[2].gene_id(), "A#2");
    EXPECT_EQ(genes[3].gene_id(), "A#3");
    EXPECT_EQ(warnings.size(), 2u);
}

TEST(LoadMatrixMarket, EmptyMatrixMaterializesZeros) {
    const auto genes = mtx("%%MatrixMarket matrix coordinate integer general\n5 3 0\n");
    ASSERT_EQ(genes.size(), 3u);
    for (const auto& g : genes) EXPECT_EQ(pairs_of(g), (std::vector<CountPair>{{0, 5}}));
}

TEST(LoadMatrixMarket, GenesAsRows) {
    const auto genes = mtx(
        "%%MatrixMarket matrix coordinate integer general\n% comment\n2 4 3\n1 2 5\n2 1 1\n1 4 5\n",
        Orientation::GenesAsRows);
    ASSERT_EQ(genes.size(), 2u);
    EXPECT_EQ(pairs_of(genes[0]), (std::vector<CountPair>{{0, 2}, {5, 2}}));
    EXPECT_EQ(pairs_of(genes[1]), (std::vector<CountPair>{{0, 3}, {1, 1}}));
}

TEST(LoadMatrixMarket, Errors) {
    EXPECT_THROW(mtx("%%MatrixMarket matrix array integer general\n2 2\n"), IngestError);
    EXPECT_THROW(mtx("%%MatrixMarket matrix coordinate integer general\n2 2 2\n1 1 3\n"), IngestError);
    EXPECT_THROW(mtx("%%MatrixMarket matrix coordinate integer general\n2 2 1\n3 1 3\n"), IngestError);
    EXPECT_THROW(mtx("%%MatrixMarket matrix coordinate integer general\n2 2 1\n1 1 -3\n"), IngestError);
    EXPECT_THROW(mtx("%%MatrixMarket matrix coordinate integer general\n2 2 2\n1 1 3\n1 1 4\n"), IngestError);
    EXPECT_THROW(mtx(""), IngestError);
    try {
        mtx("%%MatrixMarket matrix coordinate real general\n2 2 1\n2 1 0.5\n");
        FAIL();
    } catch (const IngestError& e) {
        EXPECT_NE(std::string(e.what()).find("non-integer"), std::string::npos);
        EXPECT_EQ(e.line(), 3);
    }
}

TEST(LoadMatrix, DenseAndSparseEncodingsAgree) {
    std::mt19937_64 rng(4);
    std::vector<GeneCounts> genes;
    for (int g = 0; g < 12; ++g) {
        std::vector<std::int64_t> cells(37);
        for (auto& c : cells) c = rng() % 2 ? 0 : static_cast<std::int64_t>(rng() % 9);
        genes.push_back(GeneCounts::from_cells("gene_" + std::to_string(g), cells));
    }
    for (auto o : {Orientation::GenesAsColumns, Orientation::GenesAsRows}) {
        std::ostringstream sparse_out, dense_out;
        write_matrix_market(sparse_out, genes, o);
        write_dense(dense_out, genes, o, '\t');
        std::istringstream sparse_in(sparse_out.str());
        const auto from_sparse = load_matrix_market(sparse_in, o);
        std::istringstream dense_in(dense_out.str());
        const auto from_dense = load_dense(dense_in, o, '\t', true, o == Orientation::GenesAsRows);
        EXPECT_EQ(from_sparse, genes);
        EXPECT_EQ(from_dense, genes);
    }
}

TEST(LoadMatrix, FromFile) {
    const auto path = std::filesystem::temp_directory_path() / "zinbgt_ingest_test.csv";
    {
        std::ofstream out(path);
        out << "a,b\n0,1\n2,0\n";
    }
    CountMatrixSource src;
    src.path = path;
    src.format = MatrixFormat::DenseDelimited;
    src.delimiter = ',';
    src.has_header = true;
    const auto genes = load_matrix(src);
    ASSERT_EQ(genes.size(), 2u);
    EXPECT_EQ(genes[0].gene_id(), "a");
    std::filesystem::remove(path);

    src.path = "/nonexistent/zinbgt.mtx";
    EXPECT_THROW(load_matrix(src), IoError);
}
