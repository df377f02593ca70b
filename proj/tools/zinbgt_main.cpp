// zinbgt: fit, simulate and export plot data for per-gene count mixtures.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "zinbgt/ingest.hpp"
#include "zinbgt/parallel.hpp"
#include "zinbgt/pipeline.hpp"
#include "zinbgt/plot_export.hpp"
#include "zinbgt/results_io.hpp"
#include "zinbgt/simulate.hpp"

namespace fs = std::filesystem;
using namespace zinbgt;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitInput = 2;
constexpr int kExitIo = 3;

struct MatrixArgs {
    std::string input;
    std::string format = "mtx";
    std::string genes_as = "cols";
    bool has_header = false;
    bool has_rownames = false;
};

void add_matrix_options(CLI::App* cmd, MatrixArgs& a, bool required) {
    auto* in = cmd->add_option("--input", a.input, "Count matrix path");
    if (required) in->required();
    cmd->add_option("--format", a.format, "Matrix format")->check(CLI::IsMember({"mtx", "csv", "tsv"}));
    cmd->add_option("--genes-as", a.genes_as, "Whether genes are rows or columns")
        ->check(CLI::IsMember({"rows", "cols"}));
    cmd->add_flag("--has-header", a.has_header, "Delimited input has a header row");
    cmd->add_flag("--has-rownames", a.has_rownames, "Delimited input has a row-name column");
}

CountMatrixSource to_source(const MatrixArgs& a) {
    CountMatrixSource s;
    s.path = a.input;
    s.format = a.format == "mtx" ? MatrixFormat::MatrixMarket : MatrixFormat::DenseDelimited;
    s.delimiter = a.format == "csv" ? ',' : '\t';
    s.orientation = a.genes_as == "rows" ? Orientation::GenesAsRows : Orientation::GenesAsColumns;
    s.has_header = a.has_header;
    s.has_rownames = a.has_rownames;
    return s;
}

nlohmann::json source_json(const MatrixArgs& a) {
    return {{"path", a.input},
            {"format", a.format},
            {"genes_as", a.genes_as},
            {"has_header", a.has_header},
            {"has_rownames", a.has_rownames}};
}

std::vector<GeneCounts> load(const MatrixArgs& a) {
    std::vector<std::string> warnings;
    auto genes = load_matrix(to_source(a), &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    return genes;
}

fs::path prepare_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
    return fs::path(dir);
}

template <class Writer>
void write_file(const fs::path& path, Writer&& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    writer(out);
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}

double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

struct FitArgs {
    MatrixArgs matrix;
    std::string diagnostics = "full";
    double alpha = 1.0;
    std::string transform = "log1p";
    int boot = 100;
    std::uint64_t seed = 0;
    unsigned threads = default_threads();
    std::string init = "median";
    std::int64_t min_max_count = 0;
    std::string out;
};

int cmd_fit(const FitArgs& a) {
    using Clock = std::chrono::steady_clock;
    PipelineConfig config;
    config.fit.init_strategy = *parse_init_strategy(a.init);
    config.diag.alpha = a.alpha;
    config.diag.transform = *parse_transform(a.transform);
    config.diag.n_boot = a.boot;
    config.tier = *parse_diagnostics_tier(a.diagnostics);
    config.min_max_count = a.min_max_count;
    config.threads = std::max(1u, a.threads);
    config.seed = a.seed;

    const auto out_dir = prepare_out_dir(a.out);
    const auto t0 = Clock::now();
    const auto genes = load(a.matrix);
    const double ingest_seconds = seconds_since(t0);

    PhaseTimings timings;
    const auto records = run_pipeline(genes, config, &timings);

    const auto t1 = Clock::now();
    write_file(out_dir / "results.tsv", [&](std::ostream& o) { write_results_tsv(o, records); });
    write_file(out_dir / "results.json", [&](std::ostream& o) { write_results_json(o, records); });
    const double write_seconds = seconds_since(t1);

    nlohmann::json manifest;
    manifest["tool"] = "zinbgt";
    manifest["version"] = kVersion;
    manifest["command"] = "fit";
    manifest["input"] = source_json(a.matrix);
    manifest["n_genes"] = genes.size();
    manifest["fit_config"] = {{"init_strategy", a.init},
                              {"max_iter", config.fit.max_iter},
                              {"loglik_rel_tol", config.fit.loglik_rel_tol},
                              {"param_abs_tol", config.fit.param_abs_tol},
                              {"m_min", config.fit.m_min},
                              {"d_max", config.fit.d_max},
                              {"mu_g_max", config.fit.mu_g_max}};
    if (config.tier == DiagnosticsTier::None) {
        manifest["diagnostics"] = "none";
    } else {
        manifest["diagnostics"] = {{"tier", a.diagnostics},
                                   {"alpha", a.alpha},
                                   {"transform", a.transform},
                                   {"n_boot", a.boot},
                                   {"mass_tol", config.diag.mass_tol},
                                   {"min_max_count", a.min_max_count}};
    }
    manifest["threads"] = config.threads;
    manifest["seed"] = a.seed;
    manifest["outputs"] = {(out_dir / "results.tsv").string(), (out_dir / "results.json").string()};
    manifest["timings_seconds"] = {{"ingest", ingest_seconds},
                                   {"fit", timings.fit_seconds},
                                   {"diagnostics", timings.diagnostics_seconds},
                                   {"write", write_seconds}};
    write_file(out_dir / "manifest.json", [&](std::ostream& o) { o << manifest.dump(2) << '\n'; });
    return 0;
}

struct SimArgs {
    std::string kind = "params";
    std::string params;
    std::int64_t n_cells = 10000;
    std::int64_t n_genes = 1000;
    std::uint64_t seed = 0;
    unsigned threads = default_threads();
    std::string format = "mtx";
    std::string genes_as = "cols";
    std::string out;
};

int cmd_simulate(const SimArgs& a) {
    SimSpec spec;
    spec.n_cells = a.n_cells;
    spec.seed = a.seed;
    spec.threads = std::max(1u, a.threads);
    const auto out_dir = prepare_out_dir(a.out);

    std::vector<GeneCounts> genes;
    nlohmann::json manifest;
    manifest["tool"] = "zinbgt";
    manifest["version"] = kVersion;
    manifest["command"] = "simulate";
    manifest["kind"] = a.kind;
    manifest["n_cells"] = a.n_cells;
    manifest["seed"] = a.seed;

    if (a.kind == "params") {
        spec.kind = SimKind::FromParamsTable;
        if (a.params.empty()) {
            spec.params_table = default_params_table();
            manifest["params_table"] = "default_v" + std::to_string(kDefaultParamsTableVersion);
        } else {
            std::ifstream in(a.params);
            if (!in) throw IoError("cannot open " + a.params);
            spec.params_table = read_params_table(in);
            manifest["params_table"] = a.params;
        }
        spec.n_genes = static_cast<std::int64_t>(spec.params_table.size());
        genes = simulate_zinbgt_dataset(spec);
        write_file(out_dir / "params.tsv", [&](std::ostream& o) { write_params_table(o, spec.params_table); });
    } else {
        spec.kind = SimKind::NbMixtureMisspec;
        spec.n_genes = a.n_genes;
        auto [g, draws] = simulate_nb_mixture_dataset(spec);
        genes = std::move(g);
        write_file(out_dir / "hyperdraws.tsv", [&](std::ostream& o) { write_hyperdraws(o, draws); });
        manifest["hyper"] = {{"m1_mean", spec.hyper.m1_mean},
                             {"ratio_excess_mean", spec.hyper.ratio_excess_mean},
                             {"d_excess_mean", spec.hyper.d_excess_mean},
                             {"rho_beta", {spec.hyper.rho_a, spec.hyper.rho_b}}};
    }
    manifest["n_genes"] = genes.size();

    const auto orientation = a.genes_as == "rows" ? Orientation::GenesAsRows : Orientation::GenesAsColumns;
    const std::string name = a.format == "mtx" ? "counts.mtx" : "counts." + a.format;
    write_file(out_dir / name, [&](std::ostream& o) {
        if (a.format == "mtx") {
            write_matrix_market(o, genes, orientation);
        } else {
            write_dense(o, genes, orientation, a.format == "csv" ? ',' : '\t');
        }
    });
    manifest["outputs"] = {{"matrix", name}, {"format", a.format}, {"genes_as", a.genes_as}};
    write_file(out_dir / "manifest.json", [&](std::ostream& o) { o << manifest.dump(2) << '\n'; });
    return 0;
}

struct ExportArgs {
    std::string results;
    MatrixArgs matrix;
    std::vector<std::string> genes;
    int bins = 50;
    std::string out;
};

int cmd_export_plots(const ExportArgs& a) {
    std::ifstream in(a.results);
    if (!in) throw IoError("cannot open " + a.results);
    const auto records = read_results_tsv(in);

    std::vector<GeneCounts> genes;
    const bool have_matrix = !a.matrix.input.empty();
    if (have_matrix) {
        genes = load(a.matrix);
        if (genes.size() != records.size()) {
            throw std::invalid_argument("results table and matrix disagree on the number of genes");
        }
    }
    if (!a.genes.empty() && !have_matrix) throw std::invalid_argument("--genes requires --input");

    const auto out_dir = prepare_out_dir(a.out);
    write_file(out_dir / "ternary.tsv", [&](std::ostream& o) { write_ternary(o, records, a.bins); });
    write_file(out_dir / "hist2d.tsv", [&](std::ostream& o) { write_hist2d(o, records, a.bins); });
    write_file(out_dir / "hist1d.tsv", [&](std::ostream& o) { write_hist1d(o, records, a.bins); });
    write_file(out_dir / "boundary.tsv", [&](std::ostream& o) { write_boundary(o, records); });
    write_file(out_dir / "scatter.tsv",
               [&](std::ostream& o) { write_scatter(o, records, have_matrix ? &genes : nullptr); });
    if (!a.genes.empty()) {
        // Render into memory first so an unknown id leaves no partial file.
        std::ostringstream pmf;
        write_pmf(pmf, records, genes, a.genes);
        write_file(out_dir / "pmf.tsv", [&](std::ostream& o) { o << pmf.str(); });
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Per-gene zero-inflated NB / geometric-tail mixture fitting"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit every gene and optionally run diagnostics");
    add_matrix_options(fit_cmd, fit.matrix, true);
    fit_cmd->add_option("--diagnostics", fit.diagnostics, "none, wass or full")
        ->check(CLI::IsMember({"none", "wass", "full"}));
    fit_cmd->add_option("--alpha", fit.alpha, "Wasserstein cost exponent")->check(CLI::IsMember({1.0, 2.0}));
    fit_cmd->add_option("--transform", fit.transform, "Support transform")
        ->check(CLI::IsMember({"identity", "log1p"}));
    fit_cmd->add_option("--boot", fit.boot, "Bootstrap replicates for p_B")->check(CLI::PositiveNumber);
    fit_cmd->add_option("--seed", fit.seed, "Global seed");
    fit_cmd->add_option("--threads", fit.threads, "Worker count")->check(CLI::PositiveNumber);
    fit_cmd->add_option("--init", fit.init, "EM initialization")
        ->check(CLI::IsMember({"median", "even", "exponential", "random"}));
    fit_cmd->add_option("--min-max-count", fit.min_max_count,
                        "Diagnose only genes whose maximum count exceeds this value");
    fit_cmd->add_option("--out", fit.out, "Output directory")->required();

    SimArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic dataset");
    sim_cmd->add_option("--kind", sim.kind, "params (mixture-parameter table) or misspec (two-NB mixtures)")
        ->check(CLI::IsMember({"params", "misspec"}));
    sim_cmd->add_option("--params", sim.params, "Parameter table TSV (default: the shipped table)");
    sim_cmd->add_option("--n-cells", sim.n_cells, "Cells per gene")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--n-genes", sim.n_genes, "Genes (misspec only)")->check(CLI::NonNegativeNumber);
    sim_cmd->add_option("--seed", sim.seed, "Seed");
    sim_cmd->add_option("--threads", sim.threads, "Worker count")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--format", sim.format, "Matrix format")->check(CLI::IsMember({"mtx", "csv", "tsv"}));
    sim_cmd->add_option("--genes-as", sim.genes_as, "Write genes as rows or columns")
        ->check(CLI::IsMember({"rows", "cols"}));
    sim_cmd->add_option("--out", sim.out, "Output directory")->required();

    ExportArgs exp;
    auto* exp_cmd = app.add_subcommand("export-plots", "Write plot-data tables from a results table");
    exp_cmd->add_option("--results", exp.results, "results.tsv from fit")->required();
    add_matrix_options(exp_cmd, exp.matrix, false);
    exp_cmd->add_option("--genes", exp.genes, "Gene ids for pmf tables")->delimiter(',');
    exp_cmd->add_option("--bins", exp.bins, "Histogram bins per axis")->check(CLI::PositiveNumber);
    exp_cmd->add_option("--out", exp.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try {
        if (*fit_cmd) return cmd_fit(fit);
        if (*sim_cmd) return cmd_simulate(sim);
        if (*exp_cmd) return cmd_export_plots(exp);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const IngestError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const UnknownGeneError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return kExitInput;
}
