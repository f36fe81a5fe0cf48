#include "grnn/report.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "grnn/errors.hpp"
#include "grnn/hash.hpp"
#include "grnn/ingest.hpp"

namespace grnn {

namespace {

using json = nlohmann::ordered_json;

json threshold_map(const std::map<int, double>& by_rep) {
    json out = json::object();
    for (const auto& [rep, theta] : by_rep) out[std::to_string(rep)] = theta;
    return out;
}

json critical_level_json(const CriticalLevel& lvl) {
    json out;
    out["s1"] = lvl.s1;
    out["alpha_star"] = lvl.alpha_star;
    out["sigma_star"] = lvl.sigma_star;
    out["residual"] = lvl.residual;
    return out;
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

}  // namespace

std::string match_set_json(const MatchSet& ms) {
    json doc;
    doc["task"] = ms.task_name;
    doc["kind"] = ms.kind;
    doc["skipped"] = ms.skipped;
    if (const MatchEntry* b = ms.best_entry()) {
        json best;
        best["gene"] = b->gene;
        best["timepoint"] = b->timepoint;
        best["deviation"] = b->deviation;
        doc["best"] = std::move(best);
    } else {
        doc["best"] = nullptr;
    }
    doc["entries"] = json::array();
    for (const MatchEntry& e : ms.entries) {
        json je;
        je["gene"] = e.gene;
        je["timepoint"] = e.timepoint;
        je["deviation"] = e.deviation;
        if (!e.thresholds.empty()) je["thresholds"] = threshold_map(e.thresholds);
        if (!e.folds.empty()) {
            json folds = json::object();
            for (const auto& [rep, by_code] : e.folds) {
                json jc = json::object();
                for (const auto& [code, fold] : by_code) jc[std::to_string(code)] = fold;
                folds[std::to_string(rep)] = std::move(jc);
            }
            je["folds"] = std::move(folds);
        }
        doc["entries"].push_back(std::move(je));
    }
    return dump(doc);
}

std::string match_counts_json(std::span<const MatchCount> counts) {
    json doc;
    doc["counts"] = json::array();
    for (const MatchCount& c : counts) {
        json jc;
        jc["timepoint"] = c.timepoint;
        jc["count"] = c.count;
        if (!c.per_bit.empty()) jc["per_bit"] = c.per_bit;
        doc["counts"].push_back(std::move(jc));
    }
    return dump(doc);
}

std::string task_spec_json(const TaskSpec& task) {
    json doc;
    doc["name"] = task.name;
    if (task.is_calculation()) {
        doc["kind"] = "calculation";
        json folds = json::object();
        for (const auto& [code, fold] : task.calculation().expected_fold)
            folds[std::to_string(code)] = fold;
        doc["expected_fold"] = std::move(folds);
        doc["epsilon"] = task.calculation().epsilon;
    } else if (task.is_classification()) {
        doc["kind"] = "classification";
        doc["target_codes"] = task.classification().target_codes;
    } else {
        doc["kind"] = "binary";
        doc["bit_patterns"] = task.binary().bit_patterns;
        doc["expected_values"] = task.binary().expected_values;
    }
    return dump(doc);
}

std::string subgrnn_json(const SubGRNN& sub) {
    json doc;
    doc["task"] = sub.task_name;
    doc["timepoint"] = sub.timepoint;
    doc["output_genes"] = sub.output_genes;
    doc["input_genes"] = sub.input_genes;
    doc["hidden_genes"] = sub.hidden_genes;
    json th = json::object();
    for (const auto& [gene, by_rep] : sub.thresholds) th[gene] = threshold_map(by_rep);
    doc["thresholds"] = std::move(th);
    json net;
    net["nodes"] = sub.network.nodes();
    net["edges"] = json::array();
    for (const Edge& e : sub.network.edges()) {
        json je;
        je["source"] = sub.network.nodes()[e.source];
        je["target"] = sub.network.nodes()[e.target];
        if (e.rho)
            je["rho"] = *e.rho;
        else
            je["rho"] = nullptr;
        net["edges"].push_back(std::move(je));
    }
    doc["network"] = std::move(net);
    doc["warnings"] = sub.warnings;
    return dump(doc);
}

std::string reliability_report_json(const ReliabilityReport& rep) {
    const bool calc = rep.kind == "calculation";
    json doc;
    doc["task"] = rep.task_name;
    doc["kind"] = rep.kind;
    doc["output_genes"] = rep.output_genes;
    doc["timepoint"] = rep.timepoint;
    doc["genes"] = json::array();
    for (const GeneReliability& g : rep.genes) {
        json jg;
        jg["gene"] = g.gene;
        jg["centrality"] = g.centrality;
        jg["criticality"] = g.criticality.value;
        jg["criticality_floored"] = g.criticality.floored;
        if (calc) jg["mean_r2"] = g.mean_r2;
        jg["levels"] = json::array();
        for (const AlphaOutcome& lvl : g.levels) {
            json jl;
            jl["alpha"] = lvl.alpha;
            if (calc) {
                jl["r2_mean"] = lvl.r2_mean;
                jl["replicates"] = json::array();
                for (const CalcMetrics& m : lvl.calc_by_replicate) {
                    json jm;
                    json errs = json::object();
                    for (const auto& [code, err] : m.error_by_code)
                        errs[std::to_string(code)] = err;
                    jm["error_by_code"] = std::move(errs);
                    jm["ess"] = m.ess;
                    jm["var"] = m.var;
                    jm["r2"] = m.r2;
                    jl["replicates"].push_back(std::move(jm));
                }
            } else {
                jl["hamming"] = lvl.hamming;
                json by_rep = json::object();
                for (const auto& [r, h] : lvl.hamming_by_replicate)
                    by_rep[std::to_string(r)] = h;
                jl["hamming_by_replicate"] = std::move(by_rep);
            }
            jg["levels"].push_back(std::move(jl));
        }
        doc["genes"].push_back(std::move(jg));
    }
    return dump(doc);
}

std::string reliability_csv(const ReliabilityReport& rep) {
    const bool calc = rep.kind == "calculation";
    std::ostringstream out;
    out << "gene,alpha,centrality,r2_mean,hamming,criticality\n";
    for (const GeneReliability& g : rep.genes) {
        for (const AlphaOutcome& lvl : g.levels) {
            out << g.gene << ',' << format_double(lvl.alpha) << ',' << format_double(g.centrality)
                << ',';
            if (calc) out << format_double(lvl.r2_mean);
            out << ',';
            if (!calc) out << lvl.hamming;
            out << ',' << format_double(g.criticality.value) << '\n';
        }
    }
    return out.str();
}

std::string sweep_json(std::span<const SweepPoint> points, const std::string& metric_name) {
    json doc;
    doc["metric"] = metric_name;
    doc["points"] = json::array();
    for (const SweepPoint& p : points) {
        json jp;
        jp["k"] = p.k;
        jp["alpha"] = p.alpha;
        jp["metric"] = p.metric;
        doc["points"].push_back(std::move(jp));
    }
    return dump(doc);
}

std::string sweep_csv(std::span<const SweepPoint> points, const std::string& metric_name) {
    std::ostringstream out;
    out << "k,alpha," << metric_name << '\n';
    for (const SweepPoint& p : points)
        out << p.k << ',' << format_double(p.alpha) << ',' << format_double(p.metric) << '\n';
    return out.str();
}

std::string stability_report_json(const StabilityReport& rep) {
    json doc;
    doc["cutoff"] = rep.cutoff;
    doc["stable_fraction"] = rep.stable_fraction;
    doc["edges"] = json::array();
    for (const EdgeConsistency& e : rep.edges) {
        json je;
        je["source"] = e.source;
        je["target"] = e.target;
        je["correlations"] = e.correlations;
        je["score"] = e.score;
        je["stable"] = e.stable;
        doc["edges"].push_back(std::move(je));
    }
    return dump(doc);
}

std::string overlap_report_json(const OverlapReport& rep) {
    json doc;
    json singles = json::object();
    for (const auto& [code, n] : rep.singleton_sizes) singles[std::to_string(code)] = n;
    doc["singletons"] = std::move(singles);
    doc["tuples"] = json::array();
    for (const auto& [codes, n] : rep.tuple_sizes) {
        json jt;
        jt["codes"] = codes;
        jt["size"] = n;
        doc["tuples"].push_back(std::move(jt));
    }
    json inter;
    inter["size"] = rep.full_intersection_size;
    json edges = json::array();
    for (const EdgeKey& e : rep.full_intersection) edges.push_back({e.first, e.second});
    inter["edges"] = std::move(edges);
    doc["full_intersection"] = std::move(inter);
    return dump(doc);
}

std::string stability_profile_json(const StabilityProfile& prof, const TrajectoryParams& params) {
    json doc;
    doc["gene"] = prof.gene;
    doc["criticality"] = prof.criticality;
    json ramp;
    ramp["alpha0"] = params.alpha0;
    ramp["sigma0"] = params.sigma0;
    ramp["k"] = params.k;
    ramp["l"] = params.l;
    ramp["epsilon_tol"] = params.epsilon_tol;
    ramp["zeta"] = params.zeta;
    doc["ramp"] = std::move(ramp);
    doc["s2"] = -params.sigma0 / params.l;
    doc["codes"] = json::array();
    for (const CodeStability& cs : prof.codes) {
        json jc;
        jc["code"] = cs.code;
        jc["sum_delta_sq"] = cs.sum_delta_sq;
        jc["delta_norm"] = cs.delta_norm;
        jc["onset"] = cs.level ? critical_level_json(*cs.level) : json(nullptr);
        doc["codes"].push_back(std::move(jc));
    }
    doc["overall"] = prof.overall ? critical_level_json(*prof.overall) : json(nullptr);
    return dump(doc);
}

std::string trajectory_csv(const LyapunovTrajectory& traj) {
    std::ostringstream out;
    out << "s,alpha,sigma,V,dV_ds\n";
    for (const TrajectorySample& s : traj.samples) {
        out << format_double(s.s) << ',' << format_double(s.alpha) << ',' << format_double(s.sigma)
            << ',' << format_double(s.V) << ',' << format_double(s.dV_ds) << '\n';
    }
    return out.str();
}

std::string ground_truth_json(const GroundTruth& truth) {
    json doc;
    doc["seed"] = truth.seed;
    doc["input_genes"] = truth.input_genes;
    doc["planted"] = json::array();
    for (const PlantedRecord& rec : truth.planted) {
        json jr;
        jr["task"] = rec.task_name;
        jr["kind"] = rec.kind;
        jr["genes"] = rec.genes;
        if (rec.kind == "calculation") {
            json folds = json::object();
            for (const auto& [code, fold] : rec.expected_fold)
                folds[std::to_string(code)] = fold;
            jr["expected_fold"] = std::move(folds);
        } else if (rec.kind == "classification") {
            jr["target_codes"] = rec.target_codes;
        } else {
            jr["bit_patterns"] = rec.bit_patterns;
            jr["expected_values"] = rec.expected_values;
        }
        if (!rec.thresholds.empty()) {
            json th = json::object();
            for (const auto& [gene, by_rep] : rec.thresholds) th[gene] = threshold_map(by_rep);
            jr["thresholds"] = std::move(th);
        }
        doc["planted"].push_back(std::move(jr));
    }
    return dump(doc);
}

std::string run_manifest_json(const RunManifest& m) {
    json doc;
    doc["command"] = m.command;
    json cfg = json::object();
    for (const auto& [key, value] : m.config) cfg[key] = value;
    doc["config"] = std::move(cfg);
    doc["seed"] = m.seed;
    json digests = json::object();
    for (const auto& [path, digest] : m.input_digests) digests[path] = digest;
    doc["input_digests"] = std::move(digests);
    doc["version"] = m.version;
    doc["wall_time_utc"] = m.wall_time_utc;
    return dump(doc);
}

std::string bytes_digest_hex(std::string_view bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

std::string file_digest_hex(const std::string& path) { return bytes_digest_hex(read_text_file(path)); }

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failed on '" + path + "'");
    return buf.str();
}

void write_text_file(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out.good()) throw IoError("write failed on '" + path + "'");
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace grnn
