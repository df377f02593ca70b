#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace zinbgt {

/// One distinct count value and the number of cells that observed it.
struct CountPair {
    std::int64_t value = 0;
    std::int64_t multiplicity = 0;

    friend bool operator==(const CountPair&, const CountPair&) = default;
};

/**
 * Compacted observation vector for a single gene.
 *
 * Counts are stored as (value, multiplicity) pairs sorted by value, so every
 * per-gene computation scales with the number of distinct counts rather than
 * the number of cells. Zeros are explicit: a gene with k > 0 zero cells always
 * carries a (0, k) pair.
 */
class GeneCounts {
public:
    GeneCounts() = default;

    /// Validates ordering and multiplicities; throws std::invalid_argument.
    GeneCounts(std::string gene_id, std::vector<CountPair> pairs);

    /// Compacts a per-cell count vector. Cell order is irrelevant.
    static GeneCounts from_cells(std::string gene_id, std::span<const std::int64_t> cells);

    /// Expands back to a per-cell vector sorted by value.
    std::vector<std::int64_t> expand() const;

    const std::string& gene_id() const { return gene_id_; }
    void set_gene_id(std::string id) { gene_id_ = std::move(id); }

    std::span<const CountPair> pairs() const { return pairs_; }
    /// Pairs with value > 0, in increasing value order.
    std::span<const CountPair> nonzero_pairs() const;

    std::int64_t n_cells() const { return n_cells_; }
    std::int64_t n_unique() const { return static_cast<std::int64_t>(pairs_.size()); }
    std::int64_t zero_count() const;
    std::int64_t nonzero_count() const { return n_cells_ - zero_count(); }
    std::int64_t max_value() const { return pairs_.empty() ? 0 : pairs_.back().value; }

    double mean() const;
    double zero_fraction() const;

    friend bool operator==(const GeneCounts&, const GeneCounts&) = default;

private:
    std::string gene_id_;
    std::vector<CountPair> pairs_;
    std::int64_t n_cells_ = 0;
};

enum class TrivialClass { AllZero, ZeroOneOnly, General };

TrivialClass classify_trivial(const GeneCounts& counts);

}  // namespace zinbgt
