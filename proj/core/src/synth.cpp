#include "grnn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "grnn/errors.hpp"
#include "grnn/rng.hpp"

namespace grnn {

namespace {

std::string numbered(const char* prefix, std::size_t i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s%03zu", prefix, i);
    return buf;
}

bool strictly_ascending(const std::vector<int>& v) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        if (v[i] >= v[i + 1]) return false;
    return true;
}

bool strictly_ascending(const std::vector<double>& v) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        if (v[i] >= v[i + 1]) return false;
    return true;
}

// Fold profile of a planted calculation gene over all code positions; codes
// the task does not map continue past the largest mapped fold in steps of 5,
// keeping them far from every mapped value.
std::vector<double> calc_fold_profile(const CalculationTask& task, const std::vector<int>& codes) {
    double max_fold = 0.0;
    for (const auto& [code, fold] : task.expected_fold) max_fold = std::max(max_fold, fold);
    std::vector<double> folds(codes.size());
    double ext = max_fold;
    for (std::size_t p = 0; p < codes.size(); ++p) {
        const auto it = task.expected_fold.find(codes[p]);
        if (it != task.expected_fold.end()) {
            folds[p] = it->second;
        } else {
            ext += 5.0;
            folds[p] = ext;
        }
    }
    return folds;
}

struct GenePlan {
    GeneId id;
    std::vector<double> by_pos;  // clean value per position (0 = base code)
};

constexpr double kOn = 1000.0;
constexpr double kOff = 10.0;
constexpr double kCalcBase = 100.0;

}  // namespace

BenchmarkSpec default_benchmark_spec() {
    BenchmarkSpec spec;
    spec.seed = 1;
    spec.tasks.push_back({make_task("fibonacci"), {"fib_out"}});
    spec.tasks.push_back({make_task("lucky", spec.codes), {"lucky_out"}});
    plant_collatz_bank(spec);
    return spec;
}

std::vector<GeneId> plant_collatz_bank(BenchmarkSpec& spec) {
    TaskSpec task = make_task("collatz", spec.codes);
    const std::size_t n_bits = task.binary().bit_patterns.size();
    std::vector<GeneId> genes;
    genes.reserve(n_bits);
    for (std::size_t b = 0; b < n_bits; ++b) genes.push_back("clz_b" + std::to_string(b));
    spec.tasks.push_back({std::move(task), genes});
    return genes;
}

Benchmark generate_benchmark(const BenchmarkSpec& spec) {
    // ---- validation -------------------------------------------------------
    if (spec.codes.empty() || !strictly_ascending(spec.codes) || spec.codes.front() < 1)
        throw SpecError("codes must be strictly ascending and >= 1 (0 is the base)");
    if (spec.timepoints.empty() || !strictly_ascending(spec.timepoints))
        throw SpecError("timepoints must be non-empty and strictly ascending");
    if (spec.replicates.empty() || !strictly_ascending(spec.replicates))
        throw SpecError("replicates must be non-empty and strictly ascending");
    if (!(spec.edge_density > 0.0) || spec.edge_density > 1.0)
        throw SpecError("edge_density must be in (0, 1]");
    if (!(spec.expression_noise >= 0.0) || spec.expression_noise > 0.04)
        throw SpecError("expression_noise must be in [0, 0.04] to keep planted margins");
    if (spec.missing_rho_fraction < 0.0 || spec.missing_rho_fraction > 1.0)
        throw SpecError("missing_rho_fraction must be in [0, 1]");
    if (spec.n_input_genes == 0) throw SpecError("need at least one input gene");
    if (spec.n_hidden_layers > 0 && spec.hidden_width == 0)
        throw SpecError("hidden_width must be positive when hidden layers exist");

    const std::size_t P = spec.codes.size();
    const std::set<int> code_set(spec.codes.begin(), spec.codes.end());

    std::size_t planted_count = 0;
    std::set<GeneId> planted_ids;
    for (const PlantedTask& pt : spec.tasks) {
        std::size_t want = 0;
        if (pt.task.is_calculation()) {
            want = 1;
            for (const auto& [code, fold] : pt.task.calculation().expected_fold) {
                (void)fold;
                if (!code_set.count(code))
                    throw SpecError("task '" + pt.task.name + "' maps code " + std::to_string(code) +
                                    " which the spec does not measure");
            }
        } else if (pt.task.is_classification()) {
            want = 1;
            const auto& targets = pt.task.classification().target_codes;
            if (targets.empty() || targets.size() >= code_set.size())
                throw SpecError("task '" + pt.task.name + "' targets must be a proper subset");
            for (int code : targets)
                if (!code_set.count(code))
                    throw SpecError("task '" + pt.task.name + "' targets unmeasured code " +
                                    std::to_string(code));
        } else {
            const auto& patterns = pt.task.binary().bit_patterns;
            want = patterns.size();
            for (const auto& pat : patterns) {
                if (pat.size() != P)
                    throw SpecError("task '" + pt.task.name + "' pattern width mismatch");
                const bool any0 = std::find(pat.begin(), pat.end(), 0) != pat.end();
                const bool any1 = std::find(pat.begin(), pat.end(), 1) != pat.end();
                if (!any0 || !any1)
                    throw SpecError("task '" + pt.task.name + "' has a non-separable bit plane");
            }
        }
        if (pt.genes.size() != want)
            throw SpecError("task '" + pt.task.name + "' needs " + std::to_string(want) +
                            " planted gene(s), got " + std::to_string(pt.genes.size()));
        for (const GeneId& g : pt.genes) {
            if (g.empty()) throw SpecError("planted gene id must not be empty");
            if (!planted_ids.insert(g).second)
                throw SpecError("planted gene '" + g + "' assigned twice");
        }
        planted_count += want;
    }

    const std::size_t n_auto = spec.n_input_genes + std::size_t(spec.n_hidden_layers) * spec.hidden_width;
    if (spec.n_genes < n_auto + planted_count)
        throw SpecError("n_genes too small: need at least " + std::to_string(n_auto + planted_count));
    const std::size_t n_decoys = spec.n_genes - n_auto - planted_count;

    // ---- gene plans -------------------------------------------------------
    std::vector<GenePlan> plans;
    plans.reserve(spec.n_genes);
    std::vector<GeneId> inputs;
    auto check_clash = [&](const GeneId& g) {
        if (planted_ids.count(g))
            throw SpecError("planted gene id '" + g + "' collides with a generated name");
    };

    for (std::size_t j = 0; j < spec.n_input_genes; ++j) {
        GenePlan gp;
        gp.id = numbered("in", j + 1);
        check_clash(gp.id);
        inputs.push_back(gp.id);
        const double step = 60.0 + 15.0 * static_cast<double>(j);
        gp.by_pos.resize(P + 1);
        for (std::size_t pos = 0; pos <= P; ++pos)
            gp.by_pos[pos] = 120.0 + step * static_cast<double>(pos);
        plans.push_back(std::move(gp));
    }

    std::vector<std::vector<GeneId>> hidden(spec.n_hidden_layers);
    std::size_t hidden_flat = 0;
    for (unsigned L = 0; L < spec.n_hidden_layers; ++L) {
        for (std::size_t i = 0; i < spec.hidden_width; ++i) {
            GenePlan gp;
            gp.id = "h" + std::to_string(L + 1) + "_" + std::to_string(i + 1);
            check_clash(gp.id);
            hidden[L].push_back(gp.id);
            gp.by_pos.assign(P + 1, 80.0 + 7.0 * static_cast<double>(hidden_flat++));
            plans.push_back(std::move(gp));
        }
    }

    std::vector<GeneId> planted_all;
    struct PlantedHigh {
        GeneId id;
        std::set<std::size_t> high_pos;  // positions (1-based) sitting at the high level
    };
    std::vector<PlantedHigh> leveled;  // classification + binary genes
    for (const PlantedTask& pt : spec.tasks) {
        if (pt.task.is_calculation()) {
            GenePlan gp;
            gp.id = pt.genes[0];
            const std::vector<double> folds = calc_fold_profile(pt.task.calculation(), spec.codes);
            gp.by_pos.resize(P + 1);
            gp.by_pos[0] = kCalcBase;
            for (std::size_t p = 0; p < P; ++p) gp.by_pos[p + 1] = kCalcBase * folds[p];
            planted_all.push_back(gp.id);
            plans.push_back(std::move(gp));
        } else if (pt.task.is_classification()) {
            GenePlan gp;
            gp.id = pt.genes[0];
            const auto& targets = pt.task.classification().target_codes;
            gp.by_pos.assign(P + 1, kOff);
            PlantedHigh ph{gp.id, {}};
            for (std::size_t p = 0; p < P; ++p) {
                if (targets.count(spec.codes[p])) {
                    gp.by_pos[p + 1] = kOn;
                    ph.high_pos.insert(p + 1);
                }
            }
            leveled.push_back(std::move(ph));
            planted_all.push_back(gp.id);
            plans.push_back(std::move(gp));
        } else {
            const auto& patterns = pt.task.binary().bit_patterns;
            for (std::size_t b = 0; b < patterns.size(); ++b) {
                GenePlan gp;
                gp.id = pt.genes[b];
                gp.by_pos.assign(P + 1, kOff);
                PlantedHigh ph{gp.id, {}};
                for (std::size_t p = 0; p < P; ++p) {
                    if (patterns[b][p]) {
                        gp.by_pos[p + 1] = kOn;
                        ph.high_pos.insert(p + 1);
                    }
                }
                leveled.push_back(std::move(ph));
                planted_all.push_back(gp.id);
                plans.push_back(std::move(gp));
            }
        }
    }

    std::vector<GeneId> decoys;
    for (std::size_t i = 0; i < n_decoys; ++i) {
        GenePlan gp;
        gp.id = numbered("dec", i + 1);
        check_clash(gp.id);
        decoys.push_back(gp.id);
        KeyedRng rng(RngKey(spec.seed).with("decoy").with(static_cast<std::uint64_t>(i)));
        const double base = rng.uniform(50.0, 500.0);
        const bool increasing = (i % 2) == 0;
        gp.by_pos.resize(P + 1);
        for (std::size_t pos = 0; pos <= P; ++pos) {
            const double factor = increasing ? 1.0 + 0.05 * static_cast<double>(pos)
                                             : 1.4 - 0.05 * static_cast<double>(pos);
            gp.by_pos[pos] = base * std::max(0.05, factor);
        }
        plans.push_back(std::move(gp));
    }

    // ---- expression matrix ------------------------------------------------
    DatasetAxes axes;
    axes.codes.push_back(0);
    axes.codes.insert(axes.codes.end(), spec.codes.begin(), spec.codes.end());
    axes.timepoints = spec.timepoints;
    axes.replicates = spec.replicates;
    axes.base_code = 0;

    ExpressionDataset::Builder builder(axes);
    for (const GenePlan& gp : plans) builder.add_gene(gp.id);
    const double noise = spec.expression_noise;
    for (const GenePlan& gp : plans) {
        for (std::size_t pos = 0; pos <= P; ++pos) {
            const int code = pos == 0 ? 0 : spec.codes[pos - 1];
            const double clean = gp.by_pos[pos];
            for (double t : spec.timepoints) {
                for (int r : spec.replicates) {
                    double v = clean;
                    if (noise > 0.0) {
                        KeyedRng rng(RngKey(spec.seed)
                                         .with("noise")
                                         .with(gp.id)
                                         .with(code)
                                         .with(t)
                                         .with(r));
                        v = clean * (1.0 + noise * rng.uniform(-1.0, 1.0));
                    }
                    builder.set(gp.id, code, t, r, v);
                }
            }
        }
    }
    ExpressionDataset dataset = builder.build();

    // ---- network ----------------------------------------------------------
    RegulatoryNetwork::Builder nb;
    for (const GenePlan& gp : plans) nb.add_node(gp.id);

    auto coin = [&](std::string_view purpose, const GeneId& a, const GeneId& b, double p) {
        return KeyedRng(RngKey(spec.seed).with(purpose).with(a).with(b)).uniform01() < p;
    };
    auto rho_for = [&](const GeneId& a, const GeneId& b) -> std::optional<double> {
        if (spec.missing_rho_fraction > 0.0 &&
            coin("rho-miss", a, b, spec.missing_rho_fraction))
            return std::nullopt;
        return KeyedRng(RngKey(spec.seed).with("rho-gen").with(a).with(b)).uniform(-1.0, 1.0);
    };
    auto wire = [&](const std::vector<GeneId>& from, const std::vector<GeneId>& to) {
        for (const GeneId& b : to) {
            bool any = false;
            for (const GeneId& a : from) {
                if (coin("wire", a, b, spec.edge_density)) {
                    nb.add_edge(a, b, rho_for(a, b));
                    any = true;
                }
            }
            if (!any && !from.empty()) {
                // keep every layer target reachable
                const std::size_t pick =
                    KeyedRng(RngKey(spec.seed).with("force").with(b)).next_u64() % from.size();
                nb.add_edge(from[pick], b, rho_for(from[pick], b));
            }
        }
    };

    const std::vector<GeneId>* prev = &inputs;
    for (unsigned L = 0; L < spec.n_hidden_layers; ++L) {
        wire(*prev, hidden[L]);
        prev = &hidden[L];
    }
    wire(*prev, planted_all);
    for (std::size_t i = 0; i + 1 < decoys.size(); ++i) {
        const std::size_t stop = std::min(decoys.size(), i + 4);
        for (std::size_t j = i + 1; j < stop; ++j) {
            if (coin("wire", decoys[i], decoys[j], spec.edge_density))
                nb.add_edge(decoys[i], decoys[j], rho_for(decoys[i], decoys[j]));
        }
    }
    RegulatoryNetwork network = nb.build();

    // ---- ground truth ------------------------------------------------------
    // Decision thresholds from the final (possibly noisy) values, pooled over
    // codes and timepoints per replicate, so they separate at every timepoint.
    auto thresholds_for = [&](const PlantedHigh& ph) {
        std::map<int, double> by_rep;
        for (int r : spec.replicates) {
            double max_low = -1.0, min_high = -1.0;
            bool has_low = false, has_high = false;
            for (std::size_t pos = 1; pos <= P; ++pos) {
                const int code = spec.codes[pos - 1];
                for (double t : spec.timepoints) {
                    const double v = dataset.expression_at(ph.id, code, t, r);
                    if (ph.high_pos.count(pos)) {
                        min_high = has_high ? std::min(min_high, v) : v;
                        has_high = true;
                    } else {
                        max_low = has_low ? std::max(max_low, v) : v;
                        has_low = true;
                    }
                }
            }
            by_rep[r] = 0.5 * (max_low + min_high);
        }
        return by_rep;
    };
    std::map<GeneId, std::map<int, double>> leveled_thresholds;
    for (const PlantedHigh& ph : leveled) leveled_thresholds[ph.id] = thresholds_for(ph);

    GroundTruth truth;
    truth.seed = spec.seed;
    truth.input_genes = inputs;
    for (const PlantedTask& pt : spec.tasks) {
        PlantedRecord rec;
        rec.task_name = pt.task.name;
        rec.genes = pt.genes;
        if (pt.task.is_calculation()) {
            rec.kind = "calculation";
            rec.expected_fold = pt.task.calculation().expected_fold;
        } else if (pt.task.is_classification()) {
            rec.kind = "classification";
            rec.target_codes = pt.task.classification().target_codes;
            rec.thresholds[pt.genes[0]] = leveled_thresholds.at(pt.genes[0]);
        } else {
            rec.kind = "binary";
            rec.bit_patterns = pt.task.binary().bit_patterns;
            rec.expected_values = pt.task.binary().expected_values;
            for (const GeneId& g : pt.genes) rec.thresholds[g] = leveled_thresholds.at(g);
        }
        truth.planted.push_back(std::move(rec));
    }

    return Benchmark{std::move(dataset), std::move(network), std::move(truth)};
}

// ---- spec JSON --------------------------------------------------------------

namespace {

using json = nlohmann::ordered_json;

}  // namespace

BenchmarkSpec parse_benchmark_spec_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ValueError(std::string("invalid benchmark spec JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SpecError("benchmark spec must be a JSON object");

    static const std::set<std::string> known{
        "n_genes",     "n_hidden_layers",  "hidden_width",        "n_input_genes",
        "edge_density", "expression_noise", "missing_rho_fraction", "seed",
        "codes",       "timepoints",       "replicates",          "tasks"};
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (!known.count(key)) throw SpecError("unknown benchmark spec field '" + key + "'");
    }

    BenchmarkSpec spec;
    spec.tasks.clear();
    try {
        if (doc.contains("n_genes")) spec.n_genes = doc["n_genes"].get<std::size_t>();
        if (doc.contains("n_hidden_layers"))
            spec.n_hidden_layers = doc["n_hidden_layers"].get<unsigned>();
        if (doc.contains("hidden_width")) spec.hidden_width = doc["hidden_width"].get<unsigned>();
        if (doc.contains("n_input_genes"))
            spec.n_input_genes = doc["n_input_genes"].get<std::size_t>();
        if (doc.contains("edge_density")) spec.edge_density = doc["edge_density"].get<double>();
        if (doc.contains("expression_noise"))
            spec.expression_noise = doc["expression_noise"].get<double>();
        if (doc.contains("missing_rho_fraction"))
            spec.missing_rho_fraction = doc["missing_rho_fraction"].get<double>();
        if (doc.contains("seed")) spec.seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("codes")) spec.codes = doc["codes"].get<std::vector<int>>();
        if (doc.contains("timepoints"))
            spec.timepoints = doc["timepoints"].get<std::vector<double>>();
        if (doc.contains("replicates"))
            spec.replicates = doc["replicates"].get<std::vector<int>>();
        if (doc.contains("tasks")) {
            for (const json& jt : doc["tasks"]) {
                if (!jt.is_object() || !jt.contains("name") || !jt.contains("genes"))
                    throw SpecError("each task needs 'name' and 'genes'");
                for (const auto& [key, value] : jt.items()) {
                    (void)value;
                    if (key != "name" && key != "codes" && key != "genes")
                        throw SpecError("unknown task field '" + key + "'");
                }
                const std::string name = jt["name"].get<std::string>();
                TaskSpec task = jt.contains("codes")
                                    ? make_task(name, jt["codes"].get<std::vector<int>>())
                                    : make_task(name);
                spec.tasks.push_back(
                    {std::move(task), jt["genes"].get<std::vector<GeneId>>()});
            }
        }
    } catch (const json::exception& e) {
        throw SpecError(std::string("benchmark spec field has wrong type: ") + e.what());
    }
    return spec;
}

std::string benchmark_spec_json(const BenchmarkSpec& spec) {
    json doc;
    doc["n_genes"] = spec.n_genes;
    doc["n_hidden_layers"] = spec.n_hidden_layers;
    doc["hidden_width"] = spec.hidden_width;
    doc["n_input_genes"] = spec.n_input_genes;
    doc["edge_density"] = spec.edge_density;
    doc["expression_noise"] = spec.expression_noise;
    doc["missing_rho_fraction"] = spec.missing_rho_fraction;
    doc["seed"] = spec.seed;
    doc["codes"] = spec.codes;
    doc["timepoints"] = spec.timepoints;
    doc["replicates"] = spec.replicates;
    doc["tasks"] = json::array();
    for (const PlantedTask& pt : spec.tasks) {
        json jt;
        jt["name"] = pt.task.name;
        std::vector<int> codes;
        if (pt.task.is_calculation()) {
            for (const auto& [code, fold] : pt.task.calculation().expected_fold) {
                (void)fold;
                codes.push_back(code);
            }
        } else if (pt.task.is_binary()) {
            // binary patterns are positional; the spec's code list defines them
            codes = spec.codes;
        } else {
            codes = spec.codes;
        }
        jt["codes"] = codes;
        jt["genes"] = pt.genes;
        doc["tasks"].push_back(std::move(jt));
    }
    return doc.dump(2) + "\n";
}

// ---- stable-fraction ensembles ----------------------------------------------

namespace {

// Mean-centered unit vector plus a second one orthonormal to it, drawn from
// keyed uniforms; retries on (vanishingly rare) degenerate draws.
std::pair<std::vector<double>, std::vector<double>> orthonormal_pair(std::uint64_t seed,
                                                                     std::uint64_t edge,
                                                                     std::uint64_t dsi,
                                                                     std::size_t m) {
    for (std::uint64_t attempt = 0;; ++attempt) {
        KeyedRng rs(RngKey(seed).with("sf-s").with(edge).with(dsi).with(attempt));
        std::vector<double> s(m);
        double mean = 0.0;
        for (double& v : s) mean += (v = rs.uniform(-1.0, 1.0));
        mean /= static_cast<double>(m);
        double ns = 0.0;
        for (double& v : s) {
            v -= mean;
            ns += v * v;
        }
        if (ns < 1e-12) continue;
        ns = std::sqrt(ns);
        for (double& v : s) v /= ns;

        KeyedRng rg(RngKey(seed).with("sf-g").with(edge).with(dsi).with(attempt));
        std::vector<double> g(m);
        mean = 0.0;
        for (double& v : g) mean += (v = rg.uniform(-1.0, 1.0));
        mean /= static_cast<double>(m);
        double dot = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            g[i] -= mean;
            dot += g[i] * s[i];
        }
        double ng = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            g[i] -= dot * s[i];
            ng += g[i] * g[i];
        }
        if (ng < 1e-12) continue;
        ng = std::sqrt(ng);
        for (double& v : g) v /= ng;
        return {std::move(s), std::move(g)};
    }
}

}  // namespace

StableFractionBench plant_stable_fraction(std::size_t n_edges, std::size_t n_datasets,
                                          double fraction, std::uint64_t seed) {
    if (n_edges == 0) throw ValueError("need at least one edge");
    if (n_datasets < 2) throw ValueError("need at least two conditions");
    if (!(fraction >= 0.0) || fraction > 1.0) throw ValueError("fraction must be in [0, 1]");

    const std::size_t n_stable =
        static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n_edges)));

    DatasetAxes axes;
    axes.codes = {0, 1, 2};
    axes.timepoints = {1.0, 2.0};
    axes.replicates = {1, 2};
    axes.base_code = 0;
    const std::size_t m = axes.codes.size() * axes.timepoints.size() * axes.replicates.size();

    StableFractionBench out;
    out.planted_fraction = static_cast<double>(n_stable) / static_cast<double>(n_edges);

    std::vector<std::pair<GeneId, GeneId>> pairs;
    RegulatoryNetwork::Builder nb;
    for (std::size_t e = 0; e < n_edges; ++e) {
        const GeneId src = numbered("e", e + 1) + "_src";
        const GeneId tgt = numbered("e", e + 1) + "_tgt";
        nb.add_edge(src, tgt, std::nullopt);
        pairs.emplace_back(src, tgt);
        if (e < n_stable)
            out.stable_edges.emplace_back(src, tgt);
        else
            out.dynamic_edges.emplace_back(src, tgt);
    }
    out.network = nb.build();

    for (std::size_t d = 0; d < n_datasets; ++d) {
        ExpressionDataset::Builder builder(axes);
        for (const auto& [src, tgt] : pairs) {
            builder.add_gene(src);
            builder.add_gene(tgt);
        }
        for (std::size_t e = 0; e < n_edges; ++e) {
            const bool stable = e < n_stable;
            double rho;
            if (stable) {
                const double sign =
                    KeyedRng(RngKey(seed).with("sf-sign").with(std::uint64_t(e))).uniform01() < 0.5
                        ? -1.0
                        : 1.0;
                const double jitter =
                    KeyedRng(RngKey(seed).with("sf-jit").with(std::uint64_t(e)).with(std::uint64_t(d)))
                        .uniform(-1.0, 1.0);
                rho = sign * (0.8 + 0.02 * jitter);
            } else {
                rho = (d % 2 == 0 ? 1.0 : -1.0) * 0.5;
            }
            const auto [s_hat, g_hat] =
                orthonormal_pair(seed, std::uint64_t(e), std::uint64_t(d), m);
            const double mix = std::sqrt(1.0 - rho * rho);

            std::size_t i = 0;
            for (int code : axes.codes) {
                for (double t : axes.timepoints) {
                    for (int r : axes.replicates) {
                        builder.set(pairs[e].first, code, t, r, 1000.0 + 100.0 * s_hat[i]);
                        builder.set(pairs[e].second, code, t, r,
                                    1000.0 + 100.0 * (rho * s_hat[i] + mix * g_hat[i]));
                        ++i;
                    }
                }
            }
        }
        out.datasets.push_back(builder.build());
    }
    return out;
}

}  // namespace grnn
