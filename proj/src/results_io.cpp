#include "zinbgt/results_io.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "zinbgt/text.hpp"

namespace zinbgt {

namespace {

bool has_wasserstein(const GeneRecord& r) { return !r.diag.skipped; }

nlohmann::json number_or_null(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

}  // namespace

void write_results_tsv(std::ostream& out, const std::vector<GeneRecord>& records) {
    for (std::size_t c = 0; c < kResultColumns.size(); ++c) {
        out << (c ? "\t" : "") << kResultColumns[c];
    }
    out << '\n';
    for (const auto& r : records) {
        const auto& t = r.fit.theta;
        out << r.gene_id << '\t' << r.n_cells << '\t' << r.n_unique << '\t' << r.max_count << '\t'
            << to_string(r.fit.submodel) << '\t' << format_double(t.p0) << '\t' << format_double(t.p1) << '\t'
            << format_double(t.p2) << '\t' << format_double(t.m) << '\t' << format_double(t.d) << '\t'
            << format_double(t.mu_g) << '\t' << format_double(r.fit.loglik) << '\t' << format_double(r.fit.bic)
            << '\t' << r.fit.n_iter << '\t' << (r.fit.converged ? "true" : "false") << '\t'
            << flags_to_string(r.fit.flags) << '\t';
        if (has_wasserstein(r)) out << format_double(r.diag.wasserstein);
        out << '\t';
        if (r.diag.p_b) out << format_double(*r.diag.p_b);
        out << '\t' << r.diag.skip_reason << '\n';
    }
}

void write_results_json(std::ostream& out, const std::vector<GeneRecord>& records) {
    auto rows = nlohmann::json::array();
    for (const auto& r : records) {
        const auto& t = r.fit.theta;
        nlohmann::json row;
        row["gene_id"] = r.gene_id;
        row["n_cells"] = r.n_cells;
        row["n_unique"] = r.n_unique;
        row["max_count"] = r.max_count;
        row["submodel"] = std::string(to_string(r.fit.submodel));
        row["p0"] = t.p0;
        row["p1"] = t.p1;
        row["p2"] = t.p2;
        row["m"] = t.m;
        row["d"] = t.d;
        row["mu_g"] = t.mu_g;
        row["loglik"] = number_or_null(r.fit.loglik);
        row["bic"] = number_or_null(r.fit.bic);
        row["n_iter"] = r.fit.n_iter;
        row["converged"] = r.fit.converged;
        row["boundary_flags"] = flags_to_string(r.fit.flags);
        row["wasserstein"] = has_wasserstein(r) ? nlohmann::json(r.diag.wasserstein) : nlohmann::json(nullptr);
        row["p_b"] = r.diag.p_b ? nlohmann::json(*r.diag.p_b) : nlohmann::json(nullptr);
        row["diag_skipped_reason"] = r.diag.skip_reason;
        auto bics = nlohmann::json::object();
        for (const auto& [kind, b] : r.fit.per_submodel_bic) bics[std::string(to_string(kind))] = number_or_null(b);
        row["per_submodel_bic"] = std::move(bics);
        rows.push_back(std::move(row));
    }
    out << rows.dump(1) << '\n';
}

unsigned parse_flags(std::string_view text) {
    unsigned flags = kFlagNone;
    if (text.empty()) return flags;
    for (const auto name : split(text, ';')) {
        bool found = false;
        for (unsigned bit = 1; bit <= kFlagEStepFailure; bit <<= 1) {
            if (flags_to_string(bit) == name) {
                flags |= bit;
                found = true;
            }
        }
        if (!found) throw std::invalid_argument("unknown fit flag '" + std::string(name) + "'");
    }
    return flags;
}

std::vector<GeneRecord> read_results_tsv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("results table is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line, '\t');
    if (header.size() != kResultColumns.size() ||
        !std::equal(header.begin(), header.end(), kResultColumns.begin())) {
        throw std::invalid_argument("results table header does not match the expected columns");
    }

    std::vector<GeneRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split(line, '\t');
        auto fail = [&](const std::string& what) {
            return std::invalid_argument("results line " + std::to_string(line_no) + ": " + what);
        };
        if (f.size() != kResultColumns.size()) throw fail("wrong number of fields");
        auto num = [&](std::size_t k) {
            const auto v = parse_double(f[k]);
            if (!v) throw fail("bad number in column " + std::string(kResultColumns[k]));
            return *v;
        };
        auto integer = [&](std::size_t k) {
            const auto v = parse_int(f[k]);
            if (!v) throw fail("bad integer in column " + std::string(kResultColumns[k]));
            return static_cast<std::int64_t>(*v);
        };

        GeneRecord r;
        r.gene_id = std::string(f[0]);
        r.n_cells = integer(1);
        r.n_unique = integer(2);
        r.max_count = integer(3);
        const auto kind = parse_submodel(f[4]);
        if (!kind) throw fail("unknown submodel");
        r.fit.submodel = *kind;
        r.fit.theta = Params{num(5), num(6), num(7), num(8), num(9), num(10)};
        r.fit.loglik = num(11);
        r.fit.bic = num(12);
        r.fit.n_iter = static_cast<int>(integer(13));
        if (f[14] != "true" && f[14] != "false") throw fail("converged must be true or false");
        r.fit.converged = f[14] == "true";
        r.fit.flags = parse_flags(f[15]);
        if (f[16].empty()) {
            r.diag.skipped = true;
        } else {
            r.diag.wasserstein = num(16);
        }
        if (!f[17].empty()) r.diag.p_b = num(17);
        r.diag.skip_reason = std::string(f[18]);
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace zinbgt
