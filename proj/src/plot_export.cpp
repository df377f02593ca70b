#include "zinbgt/plot_export.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <tuple>
#include <unordered_map>

#include "zinbgt/text.hpp"

namespace zinbgt {

std::string_view to_string(PlotParam p) {
    switch (p) {
        case PlotParam::P0: return "p0";
        case PlotParam::P1: return "p1";
        case PlotParam::P2: return "p2";
        case PlotParam::M: return "m";
        case PlotParam::D: return "d";
        case PlotParam::MuG: return "mu_g";
    }
    return "?";
}

bool is_defined(PlotParam p, const Params& t) {
    switch (p) {
        case PlotParam::M:
        case PlotParam::D: return t.p1 > 0.0;
        case PlotParam::MuG: return t.p2 > 0.0;
        default: return true;
    }
}

std::optional<std::string_view> boundary_label(PlotParam p, const Params& t) {
    auto unit = [](double v) -> std::optional<std::string_view> {
        if (v == 0.0) return "0";
        if (v == 1.0) return "1";
        return std::nullopt;
    };
    switch (p) {
        case PlotParam::P0: return unit(t.p0);
        case PlotParam::P1: return unit(t.p1);
        case PlotParam::P2: return unit(t.p2);
        case PlotParam::M: return t.m == 0.0 ? std::optional<std::string_view>("0") : std::nullopt;
        case PlotParam::D: return t.d == 1.0 ? std::optional<std::string_view>("1") : std::nullopt;
        case PlotParam::MuG: return t.mu_g == 0.0 ? std::optional<std::string_view>("0") : std::nullopt;
    }
    return std::nullopt;
}

double axis_value(PlotParam p, const Params& t) {
    switch (p) {
        case PlotParam::P0: return t.p0;
        case PlotParam::P1: return t.p1;
        case PlotParam::P2: return t.p2;
        case PlotParam::M: return std::log10(t.m);
        case PlotParam::D: return std::log10(t.d - 1.0);
        case PlotParam::MuG: return std::log10(t.mu_g);
    }
    return 0.0;
}

namespace {

bool all_zero_strip(const Params& t) { return t.p0 == 1.0; }

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    int bins = 1;

    int bin(double v) const {
        const int b = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
        return std::clamp(b, 0, bins - 1);
    }
    double edge(int b) const { return lo + (hi - lo) * b / bins; }
};

bool is_probability(PlotParam p) { return p == PlotParam::P0 || p == PlotParam::P1 || p == PlotParam::P2; }

bool interior(PlotParam p, const Params& t) {
    return !all_zero_strip(t) && is_defined(p, t) && !boundary_label(p, t);
}

Axis make_axis(PlotParam p, const std::vector<GeneRecord>& records, int bins) {
    Axis a;
    a.bins = bins;
    if (is_probability(p)) return a;
    bool any = false;
    for (const auto& r : records) {
        if (!interior(p, r.fit.theta)) continue;
        const double v = axis_value(p, r.fit.theta);
        if (!std::isfinite(v)) continue;
        a.lo = any ? std::min(a.lo, v) : v;
        a.hi = any ? std::max(a.hi, v) : v;
        any = true;
    }
    if (!any) return Axis{0.0, 1.0, bins};
    if (a.hi - a.lo < 1e-12) {
        a.lo -= 0.5;
        a.hi += 0.5;
    }
    return a;
}

void check_bins(int bins) {
    if (bins < 1) throw std::invalid_argument("bin count must be positive");
}

}  // namespace

void write_ternary(std::ostream& out, const std::vector<GeneRecord>& records, int bins) {
    check_bins(bins);
    const Axis axis{0.0, 1.0, bins};
    std::map<std::pair<int, int>, std::int64_t> cells;
    for (const auto& r : records) {
        const auto& t = r.fit.theta;
        const int i = axis.bin(t.p0);
        const int j = std::min(axis.bin(t.p1), bins - 1 - i);
        ++cells[{i, j}];
    }
    const double total = static_cast<double>(records.size());
    out << "p0_bin\tp1_bin\tp0_lo\tp0_hi\tp1_lo\tp1_hi\tcount\tdensity\n";
    for (const auto& [key, count] : cells) {
        const auto [i, j] = key;
        out << i << '\t' << j << '\t' << format_double(axis.edge(i)) << '\t' << format_double(axis.edge(i + 1))
            << '\t' << format_double(axis.edge(j)) << '\t' << format_double(axis.edge(j + 1)) << '\t' << count
            << '\t' << format_double(static_cast<double>(count) / total) << '\n';
    }
}

void write_hist2d(std::ostream& out, const std::vector<GeneRecord>& records, int bins) {
    check_bins(bins);
    std::unordered_map<int, Axis> axes;
    for (auto p : kPlotParams) axes[static_cast<int>(p)] = make_axis(p, records, bins);

    out << "x_param\ty_param\tregion\tx_boundary\ty_boundary\tx_bin\ty_bin\tx_lo\tx_hi\ty_lo\ty_hi\tcount\n";
    for (std::size_t a = 0; a < kPlotParams.size(); ++a) {
        for (std::size_t b = a + 1; b < kPlotParams.size(); ++b) {
            const auto px = kPlotParams[a];
            const auto py = kPlotParams[b];
            const auto& ax = axes[static_cast<int>(px)];
            const auto& ay = axes[static_cast<int>(py)];
            // (region, x_boundary, y_boundary, x_bin, y_bin) -> count
            std::map<std::tuple<std::string, std::string, std::string, int, int>, std::int64_t> cells;
            for (const auto& r : records) {
                const auto& t = r.fit.theta;
                if (all_zero_strip(t)) {
                    ++cells[{"p0_one", "", "", -1, -1}];
                    continue;
                }
                if (!is_defined(px, t) || !is_defined(py, t)) continue;
                const auto bx = boundary_label(px, t);
                const auto by = boundary_label(py, t);
                const int xb = bx ? -1 : ax.bin(axis_value(px, t));
                const int yb = by ? -1 : ay.bin(axis_value(py, t));
                const char* region = bx ? (by ? "corner" : "x_strip") : (by ? "y_strip" : "interior");
                ++cells[{region, std::string(bx.value_or("")), std::string(by.value_or("")), xb, yb}];
            }
            for (const auto& [key, count] : cells) {
                const auto& [region, xbound, ybound, xb, yb] = key;
                out << to_string(px) << '\t' << to_string(py) << '\t' << region << '\t' << xbound << '\t' << ybound
                    << '\t' << xb << '\t' << yb << '\t';
                if (xb >= 0) out << format_double(ax.edge(xb)) << '\t' << format_double(ax.edge(xb + 1));
                else out << '\t';
                out << '\t';
                if (yb >= 0) out << format_double(ay.edge(yb)) << '\t' << format_double(ay.edge(yb + 1));
                else out << '\t';
                out << '\t' << count << '\n';
            }
        }
    }
}

void write_hist1d(std::ostream& out, const std::vector<GeneRecord>& records, int bins) {
    check_bins(bins);
    out << "param\tregion\tboundary\tbin\tlo\thi\tcount\n";
    for (auto p : kPlotParams) {
        const auto axis = make_axis(p, records, bins);
        std::map<std::tuple<std::string, std::string, int>, std::int64_t> cells;
        for (const auto& r : records) {
            const auto& t = r.fit.theta;
            if (all_zero_strip(t)) {
                ++cells[{"p0_one", "", -1}];
                continue;
            }
            if (!is_defined(p, t)) continue;
            if (const auto b = boundary_label(p, t)) {
                ++cells[{"boundary", std::string(*b), -1}];
            } else {
                ++cells[{"interior", "", axis.bin(axis_value(p, t))}];
            }
        }
        for (const auto& [key, count] : cells) {
            const auto& [region, bound, bin] = key;
            out << to_string(p) << '\t' << region << '\t' << bound << '\t' << bin << '\t';
            if (bin >= 0) out << format_double(axis.edge(bin)) << '\t' << format_double(axis.edge(bin + 1));
            else out << '\t';
            out << '\t' << count << '\n';
        }
    }
}

void write_boundary(std::ostream& out, const std::vector<GeneRecord>& records) {
    out << "param\tboundary\tcount\tn_defined\tproportion\n";
    for (auto p : kPlotParams) {
        std::map<std::string, std::int64_t> counts;
        std::int64_t defined = 0;
        for (const auto& r : records) {
            const auto& t = r.fit.theta;
            if (!is_defined(p, t)) continue;
            ++defined;
            if (const auto b = boundary_label(p, t)) ++counts[std::string(*b)];
        }
        for (const auto& [label, count] : counts) {
            out << to_string(p) << '\t' << label << '\t' << count << '\t' << defined << '\t'
                << format_double(static_cast<double>(count) / static_cast<double>(defined)) << '\n';
        }
    }
}

void write_scatter(std::ostream& out, const std::vector<GeneRecord>& records, const std::vector<GeneCounts>* genes) {
    if (genes && genes->size() != records.size()) {
        throw std::invalid_argument("scatter export needs one count vector per result row");
    }
    out << "gene_id\tsubmodel\tmean\tmean_source\tzero_fraction\twasserstein\tp_b\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        const bool empirical = genes != nullptr;
        const double mean = empirical ? (*genes)[i].mean() : mixture_mean(r.fit.theta);
        const double zero_fraction = empirical ? (*genes)[i].zero_fraction() : r.fit.theta.p0;
        out << r.gene_id << '\t' << to_string(r.fit.submodel) << '\t' << format_double(mean) << '\t'
            << (empirical ? "empirical" : "model") << '\t' << format_double(zero_fraction) << '\t';
        if (!r.diag.skipped) out << format_double(r.diag.wasserstein);
        out << '\t';
        if (r.diag.p_b) out << format_double(*r.diag.p_b);
        out << '\n';
    }
}

void write_pmf(std::ostream& out, const std::vector<GeneRecord>& records, const std::vector<GeneCounts>& genes,
               const std::vector<std::string>& gene_ids, double mass_tol) {
    std::unordered_map<std::string, std::size_t> record_index;
    for (std::size_t i = 0; i < records.size(); ++i) record_index.emplace(records[i].gene_id, i);
    std::unordered_map<std::string, std::size_t> gene_index;
    for (std::size_t i = 0; i < genes.size(); ++i) gene_index.emplace(genes[i].gene_id(), i);

    std::string missing;
    for (const auto& id : gene_ids) {
        if (!record_index.count(id) || !gene_index.count(id)) missing += (missing.empty() ? "" : ", ") + id;
    }
    if (!missing.empty()) throw UnknownGeneError("unknown gene ids: " + missing);

    out << "gene_id\tx\tempirical\tmodel\n";
    for (const auto& id : gene_ids) {
        const auto& counts = genes[gene_index.at(id)];
        const auto& theta = records[record_index.at(id)].fit.theta;
        const auto model = truncated_pmf(theta, mass_tol, counts.max_value());
        const double n = static_cast<double>(counts.n_cells());
        const auto pairs = counts.pairs();
        std::size_t k = 0;
        for (std::size_t x = 0; x < model.support.size(); ++x) {
            double emp = 0.0;
            while (k < pairs.size() && pairs[k].value < model.support[x]) ++k;
            if (k < pairs.size() && pairs[k].value == model.support[x]) emp = static_cast<double>(pairs[k].multiplicity) / n;
            out << id << '\t' << model.support[x] << '\t' << format_double(emp) << '\t'
                << format_double(model.mass[x]) << '\n';
        }
    }
}

}  // namespace zinbgt
