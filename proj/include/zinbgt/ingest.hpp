#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "zinbgt/gene_counts.hpp"

namespace zinbgt {

enum class MatrixFormat { MatrixMarket, DenseDelimited };
enum class Orientation { GenesAsRows, GenesAsColumns };

struct CountMatrixSource {
    std::filesystem::path path;
    MatrixFormat format = MatrixFormat::MatrixMarket;
    Orientation orientation = Orientation::GenesAsColumns;
    char delimiter = '\t';
    bool has_header = false;
    bool has_rownames = false;
};

/// Malformed input content. Carries the byte offset and line of the problem,
/// plus the gene/cell index when one applies (-1 otherwise).
class IngestError : public std::runtime_error {
public:
    IngestError(const std::string& what, std::int64_t offset, std::int64_t line,
                std::int64_t gene = -1, std::int64_t cell = -1);

    std::int64_t offset() const { return offset_; }
    std::int64_t line() const { return line_; }
    std::int64_t gene() const { return gene_; }
    std::int64_t cell() const { return cell_; }

private:
    std::int64_t offset_;
    std::int64_t line_;
    std::int64_t gene_;
    std::int64_t cell_;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Reads a count matrix into one GeneCounts per gene, in file order.
 *
 * Implicit zeros of the sparse format become the zero pair. Gene ids come
 * from the header or row-name column when present, else "gene_<index>".
 * Duplicate ids get "#2", "#3", ... suffixes and a message in `warnings`.
 */
std::vector<GeneCounts> load_matrix(const CountMatrixSource& source,
                                    std::vector<std::string>* warnings = nullptr);

std::vector<GeneCounts> load_matrix_market(std::istream& in, Orientation orientation,
                                           std::vector<std::string>* warnings = nullptr);
std::vector<GeneCounts> load_dense(std::istream& in, Orientation orientation, char delimiter,
                                   bool has_header, bool has_rownames,
                                   std::vector<std::string>* warnings = nullptr);

/// Writes `%%MatrixMarket matrix coordinate integer general`, 1-based.
void write_matrix_market(std::ostream& out, const std::vector<GeneCounts>& genes,
                         Orientation orientation);

/// Writes a dense table with a header of gene ids (columns) or a row-name
/// column of gene ids (rows). Per-cell values are reconstructed in sorted
/// order, so only the per-gene multisets are meaningful.
void write_dense(std::ostream& out, const std::vector<GeneCounts>& genes,
                 Orientation orientation, char delimiter);

/// Makes gene ids unique in place.
void dedupe_gene_ids(std::vector<GeneCounts>& genes, std::vector<std::string>* warnings);

}  // namespace zinbgt
