// grnn-lab: file-based front end for the toolkit. Subcommands cover the whole
// flow: normalize counts, score edge stability, describe tasks, search for
// solving genes, extract subnetworks, measure perturbation reliability, trace
// stability certificates, generate benchmarks, and run the full pipeline.
//
// Exit codes: 0 success, 1 domain error (the message carries the error name),
// 2 usage error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "grnn/edge_stability.hpp"
#include "grnn/errors.hpp"
#include "grnn/ingest.hpp"
#include "grnn/lyapunov.hpp"
#include "grnn/network.hpp"
#include "grnn/perturb.hpp"
#include "grnn/report.hpp"
#include "grnn/search.hpp"
#include "grnn/synth.hpp"
#include "grnn/tasks.hpp"
#include "grnn/version.hpp"

namespace {

using nlohmann::ordered_json;

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out += ' ';
        out += t;
    }
    return out;
}

std::string scalar_token(const ordered_json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();  // numbers and booleans keep their literal text
}

// Appends config-file entries as flags for every option the command line did
// not set itself; flags always win. The config is a flat JSON object whose
// keys are long option names without the leading dashes.
std::vector<std::string> merge_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--config") path = args[i + 1];
    if (path.empty()) return args;

    ordered_json doc;
    try {
        doc = ordered_json::parse(grnn::read_text_file(path));
    } catch (const ordered_json::parse_error& e) {
        throw grnn::ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) throw grnn::ConfigError("config '" + path + "' must be a JSON object");

    std::set<std::string> given;
    for (const auto& a : args)
        if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') - 2));

    for (const auto& [key, value] : doc.items()) {
        if (given.count(key)) continue;
        if (value.is_object() || value.is_null())
            throw grnn::ConfigError("config key '" + key + "' must be a scalar or an array");
        if (value.is_boolean()) {
            if (value.get<bool>()) args.push_back("--" + key);
            continue;
        }
        args.push_back("--" + key);
        if (value.is_array())
            for (const auto& e : value) args.push_back(scalar_token(e));
        else
            args.push_back(scalar_token(value));
    }
    return args;
}

// Output directory with a deterministic writer; created up front so path
// problems surface before any computation.
struct Emitter {
    std::string dir;

    explicit Emitter(std::string d) : dir(std::move(d)) {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw grnn::IoError("cannot create directory '" + dir + "': " + ec.message());
    }
    void file(const std::string& name, std::string_view text) const {
        grnn::write_text_file(dir + "/" + name, text);
    }
};

struct ManifestBuilder {
    grnn::RunManifest man;

    ManifestBuilder(const std::vector<std::string>& raw_args, std::uint64_t seed) {
        man.command = join_tokens(raw_args);
        man.seed = seed;
        man.version = grnn::kVersion;
        man.wall_time_utc = grnn::utc_timestamp();
    }

    void input(const std::string& path) {
        if (!path.empty()) man.input_digests[path] = grnn::file_digest_hex(path);
    }

    void set(const std::string& k, const std::string& v) { man.config[k] = v; }
    void set(const std::string& k, const char* v) { man.config[k] = v; }
    void set(const std::string& k, double v) { man.config[k] = grnn::format_double(v); }
    void set(const std::string& k, bool v) { man.config[k] = v ? "true" : "false"; }
    template <class T, std::enable_if_t<std::is_integral_v<T>, int> = 0>
    void set(const std::string& k, T v) {
        man.config[k] = std::to_string(v);
    }
    void set(const std::string& k, const std::vector<double>& v) {
        std::string s;
        for (double x : v) {
            if (!s.empty()) s += ',';
            s += grnn::format_double(x);
        }
        man.config[k] = s;
    }
    void set(const std::string& k, const std::vector<int>& v) {
        std::string s;
        for (int x : v) {
            if (!s.empty()) s += ',';
            s += std::to_string(x);
        }
        man.config[k] = s;
    }
    void set(const std::string& k, const std::vector<std::string>& v) {
        std::string s;
        for (const auto& x : v) {
            if (!s.empty()) s += ',';
            s += x;
        }
        man.config[k] = s;
    }
    template <class T>
    void set(const std::string& k, const std::optional<T>& v) {
        if (v)
            set(k, *v);
        else
            man.config[k] = "auto";
    }

    void write(const Emitter& out) const { out.file("run_manifest.json", grnn::run_manifest_json(man)); }
};

// --- option bundles shared by several subcommands -----------------------------

struct DataOpts {
    std::string expr;
    std::string edges;
    std::optional<int> base_code;
};

void add_data_opts(CLI::App* s, DataOpts& o, bool need_edges) {
    s->add_option("--expr", o.expr, "expression table (CSV)")->required()->check(CLI::ExistingFile);
    if (need_edges)
        s->add_option("--edges", o.edges, "edge list (CSV)")->required()->check(CLI::ExistingFile);
    s->add_option("--base-code", o.base_code,
                  "reference input code (default: 0 when measured, else the smallest)");
}

struct TaskOpts {
    std::string task;
    std::vector<int> codes;
    std::optional<double> epsilon;
    grnn::ClassifierMode mode = grnn::ClassifierMode::MarginMax;
};

void add_task_opts(CLI::App* s, TaskOpts& o, bool required = true) {
    auto* opt = s->add_option("--task", o.task, "built-in task name (see `tasks list`)");
    if (required) opt->required();
    s->add_option("--codes", o.codes, "input codes the task covers (default: the task's own)");
    s->add_option("--epsilon", o.epsilon, "fold tolerance for calculation tasks (default 0.01)");
    s->add_option("--mode", o.mode, "classifier pick: widest margin or smallest slack")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, grnn::ClassifierMode>{{"margin", grnn::ClassifierMode::MarginMax},
                                                        {"score", grnn::ClassifierMode::ScoreMin}},
            CLI::ignore_case));
}

std::string mode_name(grnn::ClassifierMode m) {
    return m == grnn::ClassifierMode::MarginMax ? "margin" : "score";
}

struct ExtractOpts {
    unsigned depth = 4;
    std::vector<std::string> inputs;
    std::size_t top_inputs = 10;
};

void add_extract_opts(CLI::App* s, ExtractOpts& o, bool with_inputs = true) {
    s->add_option("--depth", o.depth, "backward expansion depth limit (default 4)");
    if (with_inputs) {
        s->add_option("--inputs", o.inputs, "input-responsive gene ids (default: inferred)");
        s->add_option("--top-inputs", o.top_inputs,
                      "genes picked when inferring inputs by code-variance (default 10)");
    }
}

struct PerturbOpts {
    std::vector<double> alphas = {1, 2, 3, 4, 5};
    double sigma2 = 0.1;
    unsigned dmax = 4;
    std::uint64_t seed = 0;
};

void add_perturb_opts(CLI::App* s, PerturbOpts& o, bool with_seed = true) {
    s->add_option("--alphas", o.alphas, "perturbation strength grid (default 1..5)");
    s->add_option("--sigma2", o.sigma2, "noise variance (default 0.1)");
    s->add_option("--dmax", o.dmax, "propagation walk depth (default 4)");
    if (with_seed) s->add_option("--seed", o.seed, "master seed (default 0)");
}

struct RampOpts {
    double k = 10.0;
    double l = 1.0;
    double alpha0 = 0.1;
    double sigma0 = 0.1;
    double s_max = 0.2;
    unsigned samples = 101;
    double criticality = 1.0;
    double epsilon_tol = 0.0;
    double zeta = 1e-9;
};

void add_ramp_opts(CLI::App* s, RampOpts& o) {
    s->add_option("--k", o.k, "strength slope of the ramp (default 10)")->check(CLI::PositiveNumber);
    s->add_option("--l", o.l, "noise slope of the ramp (default 1)")->check(CLI::PositiveNumber);
    s->add_option("--alpha0", o.alpha0, "ramp-start strength (default 0.1)")->check(CLI::PositiveNumber);
    s->add_option("--sigma0", o.sigma0, "ramp-start noise level (default 0.1)")
        ->check(CLI::NonNegativeNumber);
    s->add_option("--s-max", o.s_max, "trajectory endpoint (default 0.2)")->check(CLI::PositiveNumber);
    s->add_option("--samples", o.samples, "trajectory sample count (default 101)")
        ->check(CLI::Range(2u, 1000000u));
    s->add_option("--criticality", o.criticality,
                  "criticality gain; scales the certificate, not the onset root (default 1)");
    s->add_option("--epsilon-tol", o.epsilon_tol, "tolerance offset added to the certificate");
    s->add_option("--zeta", o.zeta, "weight-factor regulariser (default 1e-9)");
}

grnn::TrajectoryParams ramp_params(const RampOpts& o) {
    grnn::TrajectoryParams p;
    p.alpha0 = o.alpha0;
    p.sigma0 = o.sigma0;
    p.k = o.k;
    p.l = o.l;
    p.epsilon_tol = o.epsilon_tol;
    p.zeta = o.zeta;
    return p;
}

void set_ramp_config(ManifestBuilder& man, const RampOpts& o) {
    man.set("k", o.k);
    man.set("l", o.l);
    man.set("alpha0", o.alpha0);
    man.set("sigma0", o.sigma0);
    man.set("s-max", o.s_max);
    man.set("samples", o.samples);
    man.set("epsilon-tol", o.epsilon_tol);
    man.set("zeta", o.zeta);
}

// --- shared pipeline stages ----------------------------------------------------

grnn::TaskSpec resolve_task(const TaskOpts& o) {
    if (o.codes.empty()) return grnn::make_task(o.task);
    return grnn::make_task(o.task, o.codes);
}

struct SearchOutcome {
    grnn::TaskSpec task;
    std::vector<grnn::MatchSet> sets;  // one for calc/class, one per bit plane for binary
};

SearchOutcome run_search(const grnn::ExpressionDataset& ds, grnn::TaskSpec task,
                         grnn::ClassifierMode mode, std::optional<double> epsilon) {
    SearchOutcome out{std::move(task), {}};
    if (out.task.is_calculation()) {
        grnn::CalculationTask ct = out.task.calculation();
        if (epsilon) ct.epsilon = *epsilon;
        out.sets.push_back(grnn::search_calculation(ds, ct, out.task.name));
    } else if (out.task.is_classification()) {
        auto cands = grnn::search_classification_candidates(ds, out.task.classification(), out.task.name);
        if (cands.entries.empty()) {
            out.sets.push_back(std::move(cands));  // empty set is a result, not an error
        } else {
            out.sets.push_back(grnn::select_best_classifier(ds, std::move(cands), mode));
        }
    } else {
        const auto& bt = out.task.binary();
        for (std::size_t b = 0; b < bt.bit_patterns.size(); ++b)
            out.sets.push_back(grnn::search_binary_pattern(ds, bt.bit_patterns[b],
                                                           out.task.name + "/bit" + std::to_string(b)));
    }
    return out;
}

void emit_search_artifacts(const Emitter& out, const grnn::ExpressionDataset& ds,
                           const SearchOutcome& so) {
    if (!so.task.is_binary()) {
        out.file("matchset.json", grnn::match_set_json(so.sets.at(0)));
    } else {
        bool complete = true;
        double tp = 0.0;
        std::vector<grnn::GeneId> bit_genes;
        std::vector<std::map<int, double>> thresholds;
        for (std::size_t b = 0; b < so.sets.size(); ++b) {
            out.file("matchset_bit" + std::to_string(b) + ".json", grnn::match_set_json(so.sets[b]));
            const grnn::MatchEntry* best = so.sets[b].best_entry();
            if (!best) {
                complete = false;
                continue;
            }
            if (b == 0)
                tp = best->timepoint;
            else if (best->timepoint != tp)
                complete = false;  // decode needs one common timepoint
            bit_genes.push_back(best->gene);
            thresholds.push_back(best->thresholds);
        }
        if (complete) {
            auto decoded = grnn::decode_binary_outputs(ds, bit_genes, thresholds, tp);
            ordered_json j;
            j["task"] = so.task.name;
            j["timepoint"] = tp;
            j["bit_genes"] = bit_genes;
            j["decoded"] = decoded;
            out.file("decoded.json", j.dump(2) + "\n");
        }
    }
    out.file("counts.json", grnn::match_counts_json(grnn::count_matching_networks(ds, so.task)));
}

// Best match per match set becomes an output gene; classification and binary
// matches carry their decision thresholds into the subnetwork.
grnn::SubGRNN build_sub(const grnn::RegulatoryNetwork& net, const SearchOutcome& so,
                        const std::set<grnn::GeneId>& inputs, unsigned depth) {
    std::vector<grnn::GeneId> outputs;
    std::map<grnn::GeneId, std::map<int, double>> thresholds;
    double tp = 0.0;
    for (std::size_t i = 0; i < so.sets.size(); ++i) {
        const grnn::MatchEntry* best = so.sets[i].best_entry();
        if (!best)
            throw grnn::ValueError("task '" + so.task.name + "' has no matching gene" +
                                   (so.sets.size() > 1 ? " for bit plane " + std::to_string(i) : ""));
        if (i == 0) tp = best->timepoint;
        outputs.push_back(best->gene);
        if (!best->thresholds.empty()) thresholds[best->gene] = best->thresholds;
    }
    grnn::SubGRNN sub = grnn::extract_subgrnn(net, std::move(outputs), inputs, depth);
    sub.timepoint = tp;
    sub.thresholds = std::move(thresholds);
    sub.task_name = so.task.name;
    return sub;
}

std::set<grnn::GeneId> resolve_inputs(const grnn::ExpressionDataset& ds, const ExtractOpts& o) {
    if (!o.inputs.empty()) return {o.inputs.begin(), o.inputs.end()};
    return grnn::default_input_genes(ds, o.top_inputs);
}

std::vector<double> linspace_from_zero(double hi, unsigned n) {
    std::vector<double> v(n);
    for (unsigned i = 0; i < n; ++i) v[i] = hi * double(i) / double(n - 1);
    return v;
}

// Trajectory for the code driving the overall bound: earliest onset when one
// exists, else the largest deviation. Nothing to trace when no code deviates.
void emit_trajectory(const Emitter& out, const grnn::StabilityProfile& prof,
                     grnn::TrajectoryParams params, double criticality, double s_max,
                     unsigned samples) {
    const grnn::CodeStability* pick = nullptr;
    for (const auto& cs : prof.codes)
        if (cs.level && (!pick || cs.level->s1 < pick->level->s1)) pick = &cs;
    if (!pick)
        for (const auto& cs : prof.codes)
            if (cs.sum_delta_sq > 0 && (!pick || cs.sum_delta_sq > pick->sum_delta_sq)) pick = &cs;
    if (!pick) return;
    params.delta_norm = pick->delta_norm;
    auto grid = linspace_from_zero(s_max, samples);
    auto traj = grnn::trajectory(params, criticality, pick->sum_delta_sq, grid);
    out.file("trajectory.csv", grnn::trajectory_csv(traj));
}

std::string sweep_metric_name(const grnn::TaskSpec& task) {
    return task.is_calculation() ? "mean_r2" : "hamming_worst";
}

// --- subcommand drivers ---------------------------------------------------------

struct NormalizeOpts {
    std::string counts;
    std::string out_dir;
    std::optional<int> base_code;
    bool as_expression = false;
};

void run_normalize(const NormalizeOpts& o, const std::vector<std::string>& raw) {
    auto counts = grnn::load_count_table(o.counts);
    auto tpm = grnn::tpm_normalize(counts);
    Emitter out(o.out_dir);
    std::ostringstream ss;
    grnn::serialize_tpm_table(tpm, ss);
    out.file("tpm.csv", ss.str());
    if (o.as_expression) {
        auto ds = grnn::tpm_as_expression(tpm, o.base_code);
        std::ostringstream es;
        grnn::serialize_expression_table(ds, es);
        out.file("expression.csv", es.str());
    }
    ManifestBuilder man(raw, 0);
    man.input(o.counts);
    man.set("counts", o.counts);
    man.set("out-dir", o.out_dir);
    man.set("base-code", o.base_code);
    man.set("as-expression", o.as_expression);
    man.write(out);
    std::cout << "normalized " << tpm.genes.size() << " genes x " << tpm.samples.size()
              << " samples -> " << o.out_dir << "\n";
}

struct StableEdgesOpts {
    std::string edges;
    std::vector<std::string> exprs;
    std::string out_dir;
    double cutoff = 0.75;
    double quantile = 0.30;
    grnn::StableMode mode = grnn::StableMode::Threshold;
};

void run_stable_edges(const StableEdgesOpts& o, const std::vector<std::string>& raw) {
    if (o.exprs.size() < 2)
        throw CLI::ValidationError("--expr", "need at least two expression datasets");
    auto net = grnn::load_edge_list(o.edges);
    std::vector<grnn::ExpressionDataset> datasets;
    datasets.reserve(o.exprs.size());
    for (const auto& p : o.exprs) datasets.push_back(grnn::load_expression_table(p));
    auto report = grnn::classify_edges(grnn::edge_correlation_ensembles(net, datasets), o.cutoff,
                                       o.mode, o.quantile);
    Emitter out(o.out_dir);
    out.file("stable_edges.json", grnn::stability_report_json(report));
    ManifestBuilder man(raw, 0);
    man.input(o.edges);
    for (const auto& p : o.exprs) man.input(p);
    man.set("edges", o.edges);
    man.set("expr", o.exprs);
    man.set("out-dir", o.out_dir);
    man.set("cutoff", o.cutoff);
    man.set("quantile", o.quantile);
    man.set("stable-mode", o.mode == grnn::StableMode::Threshold ? "threshold" : "quantile");
    man.write(out);
    std::cout << "stable fraction " << grnn::format_double(report.stable_fraction) << " (cutoff "
              << grnn::format_double(report.cutoff) << ") -> " << o.out_dir << "\n";
}

struct SearchCmdOpts {
    DataOpts data;
    TaskOpts task;
    std::string out_dir;
    std::string kind;  // calculation | classification | binary
};

void run_search_cmd(const SearchCmdOpts& o, const std::vector<std::string>& raw) {
    auto ds = grnn::load_expression_table(o.data.expr, o.data.base_code);
    auto task = resolve_task(o.task);
    if (o.kind == "calculation" && !task.is_calculation())
        throw grnn::ValueError("task '" + task.name + "' is not a calculation task");
    if (o.kind == "classification" && !task.is_classification())
        throw grnn::ValueError("task '" + task.name + "' is not a classification task");
    if (o.kind == "binary" && !task.is_binary())
        throw grnn::ValueError("task '" + task.name + "' is not a binary task");
    auto so = run_search(ds, task, o.task.mode, o.task.epsilon);
    Emitter out(o.out_dir);
    emit_search_artifacts(out, ds, so);
    ManifestBuilder man(raw, 0);
    man.input(o.data.expr);
    man.set("expr", o.data.expr);
    man.set("base-code", o.data.base_code);
    man.set("task", o.task.task);
    man.set("codes", o.task.codes);
    man.set("epsilon", o.task.epsilon);
    man.set("mode", mode_name(o.task.mode));
    man.set("out-dir", o.out_dir);
    man.write(out);
    std::size_t matched = 0;
    for (const auto& ms : so.sets) matched += ms.entries.size();
    std::cout << "search " << o.kind << " '" << task.name << "': " << matched << " match entries -> "
              << o.out_dir << "\n";
}

struct ExtractCmdOpts {
    DataOpts data;
    TaskOpts task;
    ExtractOpts extract;
    std::string out_dir;
};

void run_extract_cmd(const ExtractCmdOpts& o, const std::vector<std::string>& raw) {
    auto ds = grnn::load_expression_table(o.data.expr, o.data.base_code);
    auto net = grnn::load_edge_list(o.data.edges);
    auto so = run_search(ds, resolve_task(o.task), o.task.mode, o.task.epsilon);
    auto sub = build_sub(net, so, resolve_inputs(ds, o.extract), o.extract.depth);
    Emitter out(o.out_dir);
    out.file("subgrnn.json", grnn::subgrnn_json(sub));
    ManifestBuilder man(raw, 0);
    man.input(o.data.expr);
    man.input(o.data.edges);
    man.set("expr", o.data.expr);
    man.set("edges", o.data.edges);
    man.set("base-code", o.data.base_code);
    man.set("task", o.task.task);
    man.set("codes", o.task.codes);
    man.set("epsilon", o.task.epsilon);
    man.set("mode", mode_name(o.task.mode));
    man.set("depth", o.extract.depth);
    man.set("inputs", o.extract.inputs);
    man.set("top-inputs", o.extract.top_inputs);
    man.set("out-dir", o.out_dir);
    man.write(out);
    std::cout << "extracted subnetwork: " << sub.output_genes.size() << " outputs, "
              << sub.hidden_genes.size() << " hidden, " << sub.input_genes.size() << " inputs -> "
              << o.out_dir << "\n";
}

struct PerturbCmdOpts {
    DataOpts data;
    TaskOpts task;
    ExtractOpts extract;
    PerturbOpts perturb;
    std::string out_dir;
    std::vector<std::string> genes;  // gene mode
    std::size_t top_k = 3;           // collective mode
};

void set_perturb_common_config(ManifestBuilder& man, const PerturbCmdOpts& o) {
    man.input(o.data.expr);
    man.input(o.data.edges);
    man.set("expr", o.data.expr);
    man.set("edges", o.data.edges);
    man.set("base-code", o.data.base_code);
    man.set("task", o.task.task);
    man.set("codes", o.task.codes);
    man.set("epsilon", o.task.epsilon);
    man.set("mode", mode_name(o.task.mode));
    man.set("depth", o.extract.depth);
    man.set("inputs", o.extract.inputs);
    man.set("top-inputs", o.extract.top_inputs);
    man.set("alphas", o.perturb.alphas);
    man.set("sigma2", o.perturb.sigma2);
    man.set("dmax", o.perturb.dmax);
    man.set("seed", o.perturb.seed);
    man.set("out-dir", o.out_dir);
}

void run_perturb_gene(const PerturbCmdOpts& o, const std::vector<std::string>& raw) {
    auto ds = grnn::load_expression_table(o.data.expr, o.data.base_code);
    auto net = grnn::load_edge_list(o.data.edges);
    auto so = run_search(ds, resolve_task(o.task), o.task.mode, o.task.epsilon);
    auto sub = build_sub(net, so, resolve_inputs(ds, o.extract), o.extract.depth);
    grnn::PerturbationConfig cfg{o.perturb.alphas, o.perturb.sigma2, o.perturb.dmax, o.perturb.seed};
    auto report = grnn::rank_gene_criticality(
        ds, sub, so.task, cfg, std::span<const grnn::GeneId>(o.genes.data(), o.genes.size()));
    Emitter out(o.out_dir);
    out.file("reliability.json", grnn::reliability_report_json(report));
    out.file("reliability.csv", grnn::reliability_csv(report));
    ManifestBuilder man(raw, o.perturb.seed);
    set_perturb_common_config(man, o);
    man.set("gene", o.genes);
    man.write(out);
    std::cout << "ranked " << report.genes.size() << " genes -> " << o.out_dir << "\n";
}

void run_perturb_collective(const PerturbCmdOpts& o, const std::vector<std::string>& raw) {
    auto ds = grnn::load_expression_table(o.data.expr, o.data.base_code);
    auto net = grnn::load_edge_list(o.data.edges);
    auto so = run_search(ds, resolve_task(o.task), o.task.mode, o.task.epsilon);
    auto sub = build_sub(net, so, resolve_inputs(ds, o.extract), o.extract.depth);
    grnn::PerturbationConfig cfg{o.perturb.alphas, o.perturb.sigma2, o.perturb.dmax, o.perturb.seed};
    auto ranking = grnn::rank_gene_criticality(ds, sub, so.task, cfg);
    auto sweep = grnn::collective_sweep(ds, sub, so.task, ranking, o.top_k, cfg);
    Emitter out(o.out_dir);
    out.file("reliability.json", grnn::reliability_report_json(ranking));
    out.file("reliability.csv", grnn::reliability_csv(ranking));
    const std::string metric = sweep_metric_name(so.task);
    out.file("sweep.json", grnn::sweep_json(sweep, metric));
    out.file("sweep.csv", grnn::sweep_csv(sweep, metric));
    ManifestBuilder man(raw, o.perturb.seed);
    set_perturb_common_config(man, o);
    man.set("top-k", o.top_k);
    man.write(out);
    std::cout << "collective sweep up to k=" << o.top_k << " -> " << o.out_dir << "\n";
}

struct LyapunovCmdOpts {
    DataOpts data;
    TaskOpts task;
    ExtractOpts extract;
    RampOpts ramp;
    std::string gene;
    unsigned dmax = 4;
    std::uint64_t seed = 0;
    std::string out_dir;
};

void run_lyapunov_cmd(const LyapunovCmdOpts& o, const std::vector<std::string>& raw) {
    auto ds = grnn::load_expression_table(o.data.expr, o.data.base_code);
    auto net = grnn::load_edge_list(o.data.edges);
    auto so = run_search(ds, resolve_task(o.task), o.task.mode, o.task.epsilon);
    auto sub = build_sub(net, so, resolve_inputs(ds, o.extract), o.extract.depth);
    grnn::TrajectoryParams params = ramp_params(o.ramp);
    auto prof = grnn::stability_profile(sub, ds, o.gene, o.ramp.criticality, so.task, params, o.seed,
                                        o.dmax);
    Emitter out(o.out_dir);
    out.file("stability.json", grnn::stability_profile_json(prof, params));
    emit_trajectory(out, prof, params, o.ramp.criticality, o.ramp.s_max, o.ramp.samples);
    ManifestBuilder man(raw, o.seed);
    man.input(o.data.expr);
    man.input(o.data.edges);
    man.set("expr", o.data.expr);
    man.set("edges", o.data.edges);
    man.set("base-code", o.data.base_code);
    man.set("task", o.task.task);
    man.set("codes", o.task.codes);
    man.set("epsilon", o.task.epsilon);
    man.set("mode", mode_name(o.task.mode));
    man.set("depth", o.extract.depth);
    man.set("inputs", o.extract.inputs);
    man.set("top-inputs", o.extract.top_inputs);
    man.set("gene", o.gene);
    man.set("criticality", o.ramp.criticality);
    man.set("dmax", o.dmax);
    man.set("seed", o.seed);
    man.set("out-dir", o.out_dir);
    set_ramp_config(man, o.ramp);
    man.write(out);
    if (prof.overall)
        std::cout << "stability onset s1=" << grnn::format_double(prof.overall->s1) << " (alpha*="
                  << grnn::format_double(prof.overall->alpha_star) << ", sigma*="
                  << grnn::format_double(prof.overall->sigma_star) << ") -> " << o.out_dir << "\n";
    else
        std::cout << "no instability onset along the ramp -> " << o.out_dir << "\n";
}

struct SynthCmdOpts {
    std::string spec_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
};

grnn::Benchmark emit_benchmark(const Emitter& out, const grnn::BenchmarkSpec& spec) {
    auto bench = grnn::generate_benchmark(spec);
    std::ostringstream es;
    grnn::serialize_expression_table(bench.dataset, es);
    out.file("expression.csv", es.str());
    std::ostringstream ns;
    grnn::serialize_edge_list(bench.network, ns);
    out.file("edges.csv", ns.str());
    out.file("spec.json", grnn::benchmark_spec_json(spec));
    out.file("manifest.json", grnn::ground_truth_json(bench.truth));
    return bench;
}

void run_synth_cmd(const SynthCmdOpts& o, const std::vector<std::string>& raw) {
    grnn::BenchmarkSpec spec = o.spec_path.empty()
                                   ? grnn::default_benchmark_spec()
                                   : grnn::parse_benchmark_spec_json(grnn::read_text_file(o.spec_path));
    if (o.seed) spec.seed = *o.seed;
    Emitter out(o.out_dir);
    auto bench = emit_benchmark(out, spec);
    ManifestBuilder man(raw, spec.seed);
    man.input(o.spec_path);
    man.set("spec", o.spec_path.empty() ? "builtin-default" : o.spec_path);
    man.set("seed", spec.seed);
    man.set("out-dir", o.out_dir);
    man.write(out);
    std::cout << "benchmark: " << bench.dataset.genes().size() << " genes, "
              << bench.network.edges().size() << " edges, " << bench.truth.planted.size()
              << " planted tasks -> " << o.out_dir << "\n";
}

struct PipelineCmdOpts {
    std::string task_name = "collatz";
    std::string spec_path;
    std::optional<std::uint64_t> seed;
    TaskOpts task;  // epsilon/mode/codes knobs; task name comes from task_name
    ExtractOpts extract;
    PerturbOpts perturb;
    RampOpts ramp;
    std::size_t top_k = 3;
    std::optional<std::string> gene;
    std::string out_dir;
};

void run_pipeline_cmd(const PipelineCmdOpts& o, const std::vector<std::string>& raw) {
    grnn::BenchmarkSpec spec = o.spec_path.empty()
                                   ? grnn::default_benchmark_spec()
                                   : grnn::parse_benchmark_spec_json(grnn::read_text_file(o.spec_path));
    if (o.seed) spec.seed = *o.seed;
    Emitter out(o.out_dir);
    auto bench = emit_benchmark(out, spec);

    TaskOpts topts = o.task;
    topts.task = o.task_name;
    auto so = run_search(bench.dataset, resolve_task(topts), o.task.mode, o.task.epsilon);
    emit_search_artifacts(out, bench.dataset, so);

    std::set<grnn::GeneId> inputs(bench.truth.input_genes.begin(), bench.truth.input_genes.end());
    auto sub = build_sub(bench.network, so, inputs, o.extract.depth);
    out.file("subgrnn.json", grnn::subgrnn_json(sub));

    grnn::PerturbationConfig cfg{o.perturb.alphas, o.perturb.sigma2, o.perturb.dmax, spec.seed};
    auto ranking = grnn::rank_gene_criticality(bench.dataset, sub, so.task, cfg);
    out.file("reliability.json", grnn::reliability_report_json(ranking));
    out.file("reliability.csv", grnn::reliability_csv(ranking));
    auto sweep = grnn::collective_sweep(bench.dataset, sub, so.task, ranking, o.top_k, cfg);
    const std::string metric = sweep_metric_name(so.task);
    out.file("sweep.json", grnn::sweep_json(sweep, metric));
    out.file("sweep.csv", grnn::sweep_csv(sweep, metric));

    grnn::GeneId critical;
    double criticality = 1.0;
    if (o.gene) {
        critical = *o.gene;
        grnn::GeneId one[1] = {critical};
        auto solo = grnn::rank_gene_criticality(bench.dataset, sub, so.task, cfg,
                                                std::span<const grnn::GeneId>(one, 1));
        criticality = solo.genes.at(0).criticality.value;
    } else {
        if (ranking.genes.empty())
            throw grnn::ValueError("no perturbable genes in the extracted subnetwork");
        critical = ranking.genes.front().gene;
        criticality = ranking.genes.front().criticality.value;
    }
    grnn::TrajectoryParams params = ramp_params(o.ramp);
    auto prof = grnn::stability_profile(sub, bench.dataset, critical, criticality, so.task, params,
                                        spec.seed, o.perturb.dmax);
    out.file("stability.json", grnn::stability_profile_json(prof, params));
    emit_trajectory(out, prof, params, criticality, o.ramp.s_max, o.ramp.samples);

    ManifestBuilder man(raw, spec.seed);
    man.input(o.spec_path);
    man.set("task", o.task_name);
    man.set("spec", o.spec_path.empty() ? "builtin-default" : o.spec_path);
    man.set("seed", spec.seed);
    man.set("codes", o.task.codes);
    man.set("epsilon", o.task.epsilon);
    man.set("mode", mode_name(o.task.mode));
    man.set("depth", o.extract.depth);
    man.set("alphas", o.perturb.alphas);
    man.set("sigma2", o.perturb.sigma2);
    man.set("dmax", o.perturb.dmax);
    man.set("top-k", o.top_k);
    man.set("gene", critical);
    man.set("criticality", criticality);
    man.set("out-dir", o.out_dir);
    set_ramp_config(man, o.ramp);
    man.write(out);
    std::cout << "pipeline '" << o.task_name << "' complete: critical gene " << critical << " -> "
              << o.out_dir << "\n";
}

struct TasksShowOpts {
    std::string name;
    std::vector<int> codes;
};

void run_tasks_show(const TasksShowOpts& o) {
    grnn::TaskSpec task =
        o.codes.empty() ? grnn::make_task(o.name) : grnn::make_task(o.name, o.codes);
    std::vector<int> codes = o.codes;
    if (codes.empty()) {
        // mirror the built-in defaults: fibonacci covers 1..6, everything else 1..7
        int hi = o.name == "fibonacci" ? 6 : 7;
        for (int c = 1; c <= hi; ++c) codes.push_back(c);
    }
    ordered_json j;
    j["task"] = ordered_json::parse(grnn::task_spec_json(task));
    j["codes"] = codes;
    j["expected_outputs"] = grnn::expected_outputs(o.name, codes);
    std::cout << j.dump(2) << "\n";
}

int run_cli(const std::vector<std::string>& raw) {
    CLI::App app{"subnetwork search, perturbation reliability, and stability bounds "
                 "for gene regulatory expression data"};
    app.set_version_flag("--version", std::string(grnn::kVersion));
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "flat JSON config mirroring the flags; flags win");

    // normalize
    NormalizeOpts norm;
    auto* s_norm = app.add_subcommand("normalize", "raw counts to TPM");
    s_norm->fallthrough();
    s_norm->add_option("--counts", norm.counts, "count table (CSV)")->required()->check(CLI::ExistingFile);
    s_norm->add_option("--out-dir", norm.out_dir, "artifact directory")->required();
    s_norm->add_option("--base-code", norm.base_code, "reference code for --as-expression");
    s_norm->add_flag("--as-expression", norm.as_expression,
                     "also emit expression.csv when sample labels follow c{code}_t{time}_r{rep}");
    s_norm->callback([&] { run_normalize(norm, raw); });

    // stable-edges
    StableEdgesOpts se;
    auto* s_se = app.add_subcommand("stable-edges", "edge consistency across datasets");
    s_se->fallthrough();
    s_se->add_option("--edges", se.edges, "edge list (CSV)")->required()->check(CLI::ExistingFile);
    s_se->add_option("--expr", se.exprs, "expression tables, one per dataset (2+)")
        ->required()
        ->check(CLI::ExistingFile);
    s_se->add_option("--out-dir", se.out_dir, "artifact directory")->required();
    s_se->add_option("--cutoff", se.cutoff, "stable score threshold (default 0.75)");
    s_se->add_option("--quantile", se.quantile, "top fraction for quantile mode (default 0.30)");
    s_se->add_option("--stable-mode", se.mode, "threshold or quantile cutoff")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, grnn::StableMode>{{"threshold", grnn::StableMode::Threshold},
                                                    {"quantile", grnn::StableMode::Quantile}},
            CLI::ignore_case));
    s_se->callback([&] { run_stable_edges(se, raw); });

    // tasks
    auto* s_tasks = app.add_subcommand("tasks", "built-in task definitions");
    s_tasks->fallthrough();
    s_tasks->require_subcommand(1);
    auto* s_tlist = s_tasks->add_subcommand("list", "task names");
    s_tlist->callback([] {
        ordered_json j = grnn::builtin_task_names();
        std::cout << j.dump(2) << "\n";
    });
    TasksShowOpts tshow;
    auto* s_tshow = s_tasks->add_subcommand("show", "task description and expected outputs");
    s_tshow->fallthrough();
    s_tshow->add_option("name", tshow.name, "task name")->required();
    s_tshow->add_option("--codes", tshow.codes, "input codes (default: the task's own)");
    s_tshow->callback([&] { run_tasks_show(tshow); });

    // search calc|class|binary
    auto* s_search = app.add_subcommand("search", "find genes whose expression solves a task");
    s_search->fallthrough();
    s_search->require_subcommand(1);
    SearchCmdOpts sc_calc, sc_class, sc_binary;
    sc_calc.kind = "calculation";
    sc_class.kind = "classification";
    sc_binary.kind = "binary";
    struct KindSub {
        const char* name;
        const char* desc;
        SearchCmdOpts* opts;
    } kind_subs[] = {
        {"calc", "fold-change calculation tasks", &sc_calc},
        {"class", "threshold classification tasks", &sc_class},
        {"binary", "bit-pattern tasks", &sc_binary},
    };
    for (auto& ks : kind_subs) {
        auto* s = s_search->add_subcommand(ks.name, ks.desc);
        s->fallthrough();
        add_data_opts(s, ks.opts->data, /*need_edges=*/false);
        add_task_opts(s, ks.opts->task);
        s->add_option("--out-dir", ks.opts->out_dir, "artifact directory")->required();
        SearchCmdOpts* opts = ks.opts;
        s->callback([&raw, opts] { run_search_cmd(*opts, raw); });
    }

    // extract
    ExtractCmdOpts ex;
    auto* s_ex = app.add_subcommand("extract", "trace the subnetwork behind the best match");
    s_ex->fallthrough();
    add_data_opts(s_ex, ex.data, /*need_edges=*/true);
    add_task_opts(s_ex, ex.task);
    add_extract_opts(s_ex, ex.extract);
    s_ex->add_option("--out-dir", ex.out_dir, "artifact directory")->required();
    s_ex->callback([&] { run_extract_cmd(ex, raw); });

    // perturb gene|collective
    auto* s_pert = app.add_subcommand("perturb", "Monte Carlo reliability under gene perturbation");
    s_pert->fallthrough();
    s_pert->require_subcommand(1);
    PerturbCmdOpts pg, pc;
    auto* s_pg = s_pert->add_subcommand("gene", "perturb genes one at a time and rank criticality");
    s_pg->fallthrough();
    add_data_opts(s_pg, pg.data, true);
    add_task_opts(s_pg, pg.task);
    add_extract_opts(s_pg, pg.extract);
    add_perturb_opts(s_pg, pg.perturb);
    s_pg->add_option("--gene", pg.genes, "genes to perturb (default: the subnetwork's hidden genes)");
    s_pg->add_option("--out-dir", pg.out_dir, "artifact directory")->required();
    s_pg->callback([&] { run_perturb_gene(pg, raw); });
    auto* s_pc = s_pert->add_subcommand("collective", "perturb the top-k critical genes together");
    s_pc->fallthrough();
    add_data_opts(s_pc, pc.data, true);
    add_task_opts(s_pc, pc.task);
    add_extract_opts(s_pc, pc.extract);
    add_perturb_opts(s_pc, pc.perturb);
    s_pc->add_option("--top-k", pc.top_k, "largest group size (default 3)")
        ->check(CLI::PositiveNumber);
    s_pc->add_option("--out-dir", pc.out_dir, "artifact directory")->required();
    s_pc->callback([&] { run_perturb_collective(pc, raw); });

    // lyapunov
    LyapunovCmdOpts ly;
    auto* s_ly = app.add_subcommand("lyapunov", "stability certificate along a perturbation ramp");
    s_ly->fallthrough();
    add_data_opts(s_ly, ly.data, true);
    add_task_opts(s_ly, ly.task);
    add_extract_opts(s_ly, ly.extract);
    add_ramp_opts(s_ly, ly.ramp);
    s_ly->add_option("--gene", ly.gene, "gene whose perturbation is traced")->required();
    s_ly->add_option("--dmax", ly.dmax, "propagation walk depth (default 4)");
    s_ly->add_option("--seed", ly.seed, "master seed (default 0)");
    s_ly->add_option("--out-dir", ly.out_dir, "artifact directory")->required();
    s_ly->callback([&] { run_lyapunov_cmd(ly, raw); });

    // synth
    SynthCmdOpts sy;
    auto* s_sy = app.add_subcommand("synth", "generate a benchmark with known solutions");
    s_sy->fallthrough();
    s_sy->add_option("--spec", sy.spec_path, "benchmark spec (JSON; default: built-in 200-gene spec)")
        ->check(CLI::ExistingFile);
    s_sy->add_option("--seed", sy.seed, "override the spec's seed");
    s_sy->add_option("--out-dir", sy.out_dir, "artifact directory")->required();
    s_sy->callback([&] { run_synth_cmd(sy, raw); });

    // pipeline
    PipelineCmdOpts pl;
    auto* s_pl = app.add_subcommand("pipeline", "synth -> search -> extract -> perturb -> stability");
    s_pl->fallthrough();
    s_pl->add_option("--task", pl.task_name, "task to chase through the pipeline (default collatz)");
    s_pl->add_option("--spec", pl.spec_path, "benchmark spec (JSON; default: built-in 200-gene spec)")
        ->check(CLI::ExistingFile);
    s_pl->add_option("--seed", pl.seed, "override the spec's seed");
    s_pl->add_option("--codes", pl.task.codes, "input codes the task covers (default: the task's own)");
    s_pl->add_option("--epsilon", pl.task.epsilon, "fold tolerance for calculation tasks");
    s_pl->add_option("--mode", pl.task.mode, "classifier pick: widest margin or smallest slack")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, grnn::ClassifierMode>{{"margin", grnn::ClassifierMode::MarginMax},
                                                        {"score", grnn::ClassifierMode::ScoreMin}},
            CLI::ignore_case));
    s_pl->add_option("--depth", pl.extract.depth, "backward expansion depth limit (default 4)");
    add_perturb_opts(s_pl, pl.perturb, /*with_seed=*/false);
    add_ramp_opts(s_pl, pl.ramp);
    s_pl->add_option("--top-k", pl.top_k, "collective sweep size (default 3)")->check(CLI::PositiveNumber);
    s_pl->add_option("--gene", pl.gene, "critical gene override (default: top-ranked)");
    s_pl->add_option("--out-dir", pl.out_dir, "artifact directory")->required();
    s_pl->callback([&] { run_pipeline_cmd(pl, raw); });

    std::vector<std::string> args = merge_config(raw);
    std::vector<const char*> cargv;
    cargv.push_back("grnn-lab");
    for (const auto& a : args) cargv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> raw(argv + 1, argv + argc);
    try {
        return run_cli(raw);
    } catch (const grnn::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
