#include "zinbgt/gene_counts.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace zinbgt {

GeneCounts::GeneCounts(std::string gene_id, std::vector<CountPair> pairs)
    : gene_id_(std::move(gene_id)), pairs_(std::move(pairs)) {
    std::int64_t total = 0;
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
        const auto& p = pairs_[i];
        if (p.value < 0) throw std::invalid_argument("count values must be non-negative");
        if (p.multiplicity < 1) throw std::invalid_argument("multiplicities must be positive");
        if (i > 0 && pairs_[i - 1].value >= p.value) {
            throw std::invalid_argument("count values must be strictly increasing");
        }
        total += p.multiplicity;
    }
    if (total < 1) throw std::invalid_argument("a gene needs at least one cell");
    n_cells_ = total;
}

GeneCounts GeneCounts::from_cells(std::string gene_id, std::span<const std::int64_t> cells) {
    std::map<std::int64_t, std::int64_t> tally;
    for (auto v : cells) ++tally[v];
    std::vector<CountPair> pairs;
    pairs.reserve(tally.size());
    for (const auto& [value, mult] : tally) pairs.push_back({value, mult});
    return GeneCounts(std::move(gene_id), std::move(pairs));
}

std::vector<std::int64_t> GeneCounts::expand() const {
    std::vector<std::int64_t> out;
    out.reserve(static_cast<std::size_t>(n_cells_));
    for (const auto& p : pairs_) out.insert(out.end(), static_cast<std::size_t>(p.multiplicity), p.value);
    return out;
}

std::span<const CountPair> GeneCounts::nonzero_pairs() const {
    std::span<const CountPair> all = pairs_;
    if (!all.empty() && all.front().value == 0) return all.subspan(1);
    return all;
}

std::int64_t GeneCounts::zero_count() const {
    return !pairs_.empty() && pairs_.front().value == 0 ? pairs_.front().multiplicity : 0;
}

double GeneCounts::mean() const {
    double s = 0.0;
    for (const auto& p : pairs_) s += static_cast<double>(p.value) * static_cast<double>(p.multiplicity);
    return s / static_cast<double>(n_cells_);
}

double GeneCounts::zero_fraction() const {
    return static_cast<double>(zero_count()) / static_cast<double>(n_cells_);
}

TrivialClass classify_trivial(const GeneCounts& counts) {
    const auto top = counts.max_value();
    if (top == 0) return TrivialClass::AllZero;
    if (top == 1) return TrivialClass::ZeroOneOnly;
    return TrivialClass::General;
}

}  // namespace zinbgt
