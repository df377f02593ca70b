#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "zinbgt/ingest.hpp"

namespace zinbgt {

namespace {

std::string describe(const std::string& what, std::int64_t offset, std::int64_t line) {
    std::ostringstream os;
    os << what << " (line " << line << ", byte offset " << offset << ")";
    return os.str();
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::string_view unquote(std::string_view s) {
    s = trim(s);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

/// Reads lines while tracking line numbers and byte offsets.
class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    bool next(std::string& line) {
        offset_ = next_offset_;
        if (!std::getline(in_, line)) return false;
        ++line_no_;
        next_offset_ += static_cast<std::int64_t>(line.size()) + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    }

    std::int64_t offset() const { return offset_; }
    std::int64_t line() const { return line_no_; }

private:
    std::istream& in_;
    std::int64_t offset_ = 0;
    std::int64_t next_offset_ = 0;
    std::int64_t line_no_ = 0;
};

enum class TokenError { None, Negative, NonInteger };

TokenError parse_count(std::string_view token, std::int64_t& value) {
    token = unquote(token);
    if (token.empty()) return TokenError::NonInteger;
    const char* first = token.data();
    const char* last = first + token.size();
    auto [p, ec] = std::from_chars(first, last, value);
    if (ec == std::errc() && p == last) return value < 0 ? TokenError::Negative : TokenError::None;

    double real = 0.0;
    auto [q, ec2] = std::from_chars(first, last, real);
    if (ec2 != std::errc() || q != last || !std::isfinite(real)) return TokenError::NonInteger;
    if (real < 0.0) return TokenError::Negative;
    if (real != std::floor(real) || real > 9.0e18) return TokenError::NonInteger;
    value = static_cast<std::int64_t>(real);
    return TokenError::None;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

GeneCounts compact_nonzero(std::string id, std::vector<std::int64_t>& nonzero, std::int64_t n_cells) {
    std::sort(nonzero.begin(), nonzero.end());
    std::vector<CountPair> pairs;
    const auto zeros = n_cells - static_cast<std::int64_t>(nonzero.size());
    if (zeros > 0) pairs.push_back({0, zeros});
    for (auto v : nonzero) {
        if (!pairs.empty() && pairs.back().value == v) {
            ++pairs.back().multiplicity;
        } else {
            pairs.push_back({v, 1});
        }
    }
    return GeneCounts(std::move(id), std::move(pairs));
}

std::string default_gene_id(std::size_t index) { return "gene_" + std::to_string(index); }

[[noreturn]] void throw_entry_error(TokenError err, std::string_view token, std::int64_t row,
                                    std::int64_t col, std::int64_t gene, std::int64_t cell,
                                    const LineReader& reader) {
    std::ostringstream os;
    os << (err == TokenError::Negative ? "negative entry '" : "non-integer entry '") << trim(token)
       << "' at row " << row << ", column " << col;
    throw IngestError(os.str(), reader.offset(), reader.line(), gene, cell);
}

}  // namespace

IngestError::IngestError(const std::string& what, std::int64_t offset, std::int64_t line,
                         std::int64_t gene, std::int64_t cell)
    : std::runtime_error(describe(what, offset, line)),
      offset_(offset),
      line_(line),
      gene_(gene),
      cell_(cell) {}

void dedupe_gene_ids(std::vector<GeneCounts>& genes, std::vector<std::string>* warnings) {
    std::unordered_map<std::string, int> seen;
    for (auto& g : genes) {
        const int n = ++seen[g.gene_id()];
        if (n > 1) {
            const std::string renamed = g.gene_id() + "#" + std::to_string(n);
            if (warnings) warnings->push_back("duplicate gene id '" + g.gene_id() + "' renamed to '" + renamed + "'");
            g.set_gene_id(renamed);
        }
    }
}

std::vector<GeneCounts> load_matrix_market(std::istream& in, Orientation orientation,
                                           std::vector<std::string>* warnings) {
    LineReader reader(in);
    std::string line;
    if (!reader.next(line)) throw IngestError("empty MatrixMarket file", 0, 0);

    const auto banner = split_ws(line);
    if (banner.size() != 5 || lower(banner[0]) != "%%matrixmarket" || lower(banner[1]) != "matrix" ||
        lower(banner[2]) != "coordinate" || (lower(banner[3]) != "integer" && lower(banner[3]) != "real") ||
        lower(banner[4]) != "general") {
        throw IngestError("malformed header: expected '%%MatrixMarket matrix coordinate integer general'",
                          reader.offset(), reader.line());
    }

    std::int64_t n_rows = -1, n_cols = -1, nnz = -1;
    while (reader.next(line)) {
        const auto t = trim(line);
        if (t.empty() || t.front() == '%') continue;
        const auto fields = split_ws(t);
        bool ok = fields.size() == 3;
        std::int64_t dims[3] = {0, 0, 0};
        for (std::size_t i = 0; ok && i < 3; ++i) ok = parse_count(fields[i], dims[i]) == TokenError::None;
        if (!ok) throw IngestError("malformed size line", reader.offset(), reader.line());
        n_rows = dims[0];
        n_cols = dims[1];
        nnz = dims[2];
        break;
    }
    if (n_rows < 0) throw IngestError("missing size line", reader.offset(), reader.line());

    const bool gene_rows = orientation == Orientation::GenesAsRows;
    const std::int64_t n_genes = gene_rows ? n_rows : n_cols;
    const std::int64_t n_cells = gene_rows ? n_cols : n_rows;
    if (n_cells < 1 && n_genes > 0) throw IngestError("matrix has no cells", reader.offset(), reader.line());

    struct Entry {
        std::uint32_t gene;
        std::uint32_t cell;
        std::int64_t value;
    };
    std::vector<Entry> entries;
    std::int64_t seen = 0;
    while (reader.next(line)) {
        const auto t = trim(line);
        if (t.empty() || t.front() == '%') continue;
        const auto fields = split_ws(t);
        if (fields.size() != 3) {
            throw IngestError("malformed entry line: expected 'row column value'", reader.offset(), reader.line());
        }
        std::int64_t row = 0, col = 0, value = 0;
        if (parse_count(fields[0], row) != TokenError::None || parse_count(fields[1], col) != TokenError::None) {
            throw IngestError("malformed entry indices", reader.offset(), reader.line());
        }
        if (row < 1 || row > n_rows || col < 1 || col > n_cols) {
            std::ostringstream os;
            os << "dimension mismatch: entry (" << row << ", " << col << ") outside " << n_rows << " x " << n_cols;
            throw IngestError(os.str(), reader.offset(), reader.line());
        }
        const std::int64_t gene = (gene_rows ? row : col) - 1;
        const std::int64_t cell = (gene_rows ? col : row) - 1;
        if (const auto err = parse_count(fields[2], value); err != TokenError::None) {
            throw_entry_error(err, fields[2], row, col, gene, cell, reader);
        }
        ++seen;
        if (seen > nnz) {
            throw IngestError("dimension mismatch: more entries than declared", reader.offset(), reader.line(), gene, cell);
        }
        if (value != 0) {
            entries.push_back({static_cast<std::uint32_t>(gene), static_cast<std::uint32_t>(cell), value});
        }
    }
    if (seen != nnz) {
        std::ostringstream os;
        os << "dimension mismatch: declared " << nnz << " entries, found " << seen;
        throw IngestError(os.str(), reader.offset(), reader.line());
    }

    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return a.gene != b.gene ? a.gene < b.gene : a.cell < b.cell;
    });

    std::vector<GeneCounts> genes;
    genes.reserve(static_cast<std::size_t>(n_genes));
    std::size_t pos = 0;
    std::vector<std::int64_t> buffer;
    for (std::int64_t g = 0; g < n_genes; ++g) {
        buffer.clear();
        for (; pos < entries.size() && entries[pos].gene == g; ++pos) {
            if (pos > 0 && entries[pos - 1].gene == g && entries[pos - 1].cell == entries[pos].cell) {
                throw IngestError("duplicate entry", -1, -1, g, entries[pos].cell);
            }
            buffer.push_back(entries[pos].value);
        }
        genes.push_back(compact_nonzero(default_gene_id(static_cast<std::size_t>(g)), buffer, n_cells));
    }
    dedupe_gene_ids(genes, warnings);
    return genes;
}

std::vector<GeneCounts> load_dense(std::istream& in, Orientation orientation, char delimiter,
                                   bool has_header, bool has_rownames,
                                   std::vector<std::string>* warnings) {
    LineReader reader(in);
    std::string line;

    std::vector<std::string> header;
    if (has_header) {
        while (reader.next(line)) {
            if (trim(line).empty()) continue;
            for (auto f : split(line, delimiter)) header.emplace_back(unquote(f));
            break;
        }
    }

    const bool gene_rows = orientation == Orientation::GenesAsRows;
    std::vector<GeneCounts> genes;                    // GenesAsRows
    std::vector<std::vector<std::int64_t>> columns;   // GenesAsColumns: non-zero values per gene
    std::vector<std::string> row_names;
    std::int64_t n_values = -1;
    std::int64_t n_data_rows = 0;
    std::vector<std::int64_t> buffer;

    while (reader.next(line)) {
        if (trim(line).empty()) continue;
        const auto fields = split(line, delimiter);
        const std::int64_t width = static_cast<std::int64_t>(fields.size()) - (has_rownames ? 1 : 0);
        if (n_values < 0) {
            n_values = width;
            if (n_values < 1) throw IngestError("row has no values", reader.offset(), reader.line());
            if (!header.empty()) {
                const auto hw = static_cast<std::int64_t>(header.size());
                if (has_rownames && hw == n_values + 1) {
                    header.erase(header.begin());
                } else if (hw != n_values) {
                    std::ostringstream os;
                    os << "dimension mismatch: header has " << hw << " fields, data rows have " << n_values << " values";
                    throw IngestError(os.str(), reader.offset(), reader.line());
                }
            }
            if (!gene_rows) columns.assign(static_cast<std::size_t>(n_values), {});
        } else if (width != n_values) {
            std::ostringstream os;
            os << "dimension mismatch: expected " << n_values << " values, found " << width;
            throw IngestError(os.str(), reader.offset(), reader.line(),
                              gene_rows ? n_data_rows : -1, gene_rows ? -1 : n_data_rows);
        }

        const std::size_t first = has_rownames ? 1 : 0;
        if (has_rownames) row_names.emplace_back(unquote(fields[0]));
        buffer.clear();
        for (std::int64_t j = 0; j < n_values; ++j) {
            const auto token = fields[first + static_cast<std::size_t>(j)];
            std::int64_t value = 0;
            const std::int64_t gene = gene_rows ? n_data_rows : j;
            const std::int64_t cell = gene_rows ? j : n_data_rows;
            if (const auto err = parse_count(token, value); err != TokenError::None) {
                throw_entry_error(err, token, n_data_rows + 1, j + 1, gene, cell, reader);
            }
            if (value == 0) continue;
            if (gene_rows) {
                buffer.push_back(value);
            } else {
                columns[static_cast<std::size_t>(j)].push_back(value);
            }
        }
        if (gene_rows) {
            std::string id = has_rownames ? row_names.back() : default_gene_id(static_cast<std::size_t>(n_data_rows));
            genes.push_back(compact_nonzero(std::move(id), buffer, n_values));
        }
        ++n_data_rows;
    }

    if (n_data_rows == 0) throw IngestError("no data rows", reader.offset(), reader.line());

    if (!gene_rows) {
        genes.reserve(columns.size());
        for (std::size_t g = 0; g < columns.size(); ++g) {
            std::string id = !header.empty() ? header[g] : default_gene_id(g);
            genes.push_back(compact_nonzero(std::move(id), columns[g], n_data_rows));
            std::vector<std::int64_t>().swap(columns[g]);
        }
    }
    dedupe_gene_ids(genes, warnings);
    return genes;
}

std::vector<GeneCounts> load_matrix(const CountMatrixSource& source, std::vector<std::string>* warnings) {
    std::ifstream in(source.path, std::ios::binary);
    if (!in) throw IoError("cannot open input file: " + source.path.string());
    if (source.format == MatrixFormat::MatrixMarket) {
        return load_matrix_market(in, source.orientation, warnings);
    }
    return load_dense(in, source.orientation, source.delimiter, source.has_header, source.has_rownames,
                      warnings);
}

void write_matrix_market(std::ostream& out, const std::vector<GeneCounts>& genes, Orientation orientation) {
    const std::int64_t n_cells = genes.empty() ? 0 : genes.front().n_cells();
    std::int64_t nnz = 0;
    for (const auto& g : genes) {
        if (g.n_cells() != n_cells) throw std::invalid_argument("genes disagree on cell count");
        nnz += g.nonzero_count();
    }
    const bool gene_rows = orientation == Orientation::GenesAsRows;
    const auto n_genes = static_cast<std::int64_t>(genes.size());
    out << "%%MatrixMarket matrix coordinate integer general\n";
    out << (gene_rows ? n_genes : n_cells) << ' ' << (gene_rows ? n_cells : n_genes) << ' ' << nnz << '\n';
    for (std::int64_t g = 0; g < n_genes; ++g) {
        const auto& gene = genes[static_cast<std::size_t>(g)];
        std::int64_t cell = gene.zero_count();
        for (const auto& p : gene.nonzero_pairs()) {
            for (std::int64_t k = 0; k < p.multiplicity; ++k, ++cell) {
                if (gene_rows) {
                    out << g + 1 << ' ' << cell + 1 << ' ' << p.value << '\n';
                } else {
                    out << cell + 1 << ' ' << g + 1 << ' ' << p.value << '\n';
                }
            }
        }
    }
    if (!out) throw IoError("failed writing MatrixMarket output");
}

void write_dense(std::ostream& out, const std::vector<GeneCounts>& genes, Orientation orientation,
                 char delimiter) {
    const std::int64_t n_cells = genes.empty() ? 0 : genes.front().n_cells();
    for (const auto& g : genes) {
        if (g.n_cells() != n_cells) throw std::invalid_argument("genes disagree on cell count");
    }
    if (orientation == Orientation::GenesAsRows) {
        out << "gene_id";
        for (std::int64_t c = 0; c < n_cells; ++c) out << delimiter << "cell_" << c;
        out << '\n';
        for (const auto& g : genes) {
            out << g.gene_id();
            for (auto v : g.expand()) out << delimiter << v;
            out << '\n';
        }
    } else {
        for (std::size_t j = 0; j < genes.size(); ++j) {
            if (j) out << delimiter;
            out << genes[j].gene_id();
        }
        out << '\n';
        std::vector<std::vector<std::int64_t>> cols;
        cols.reserve(genes.size());
        for (const auto& g : genes) cols.push_back(g.expand());
        for (std::int64_t c = 0; c < n_cells; ++c) {
            for (std::size_t j = 0; j < cols.size(); ++j) {
                if (j) out << delimiter;
                out << cols[j][static_cast<std::size_t>(c)];
            }
            out << '\n';
        }
    }
    if (!out) throw IoError("failed writing delimited output");
}

}  // namespace zinbgt
