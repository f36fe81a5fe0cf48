#include "grnn/perturb.hpp"

#include <algorithm>
#include <cmath>

#include "grnn/parallel.hpp"

namespace grnn {

RegulatoryNetwork assign_missing_correlations(const RegulatoryNetwork& net, std::uint64_t seed) {
    return net.with_filled_correlations([&](const GeneId& source, const GeneId& target) {
        KeyedRng rng(RngKey(seed).with("rho").with(source).with(target));
        return rng.uniform(-1.0, 1.0);
    });
}

std::vector<double> propagation_row(const RegulatoryNetwork& net, std::size_t source, unsigned d_max) {
    std::vector<std::vector<double>> products(net.n_nodes());
    struct Walk {
        std::size_t node;
        double product;
    };
    std::vector<Walk> frontier{{source, 1.0}};
    std::vector<Walk> next;
    std::size_t total_walks = 0;
    for (unsigned depth = 0; depth < d_max && !frontier.empty(); ++depth) {
        next.clear();
        for (const Walk& w : frontier) {
            for (std::size_t ei : net.out_edges(w.node)) {
                const Edge& e = net.edges()[ei];
                if (e.target == e.source) continue;  // self-loops carry nothing
                if (!e.rho) throw ValueError("propagation needs a correlation on every reachable edge");
                double product = w.product * *e.rho;
                products[e.target].push_back(product);
                next.push_back(Walk{e.target, product});
                if (++total_walks > 10000000) {
                    throw Overflow("walk enumeration explodes; lower the propagation depth");
                }
            }
        }
        frontier.swap(next);
    }
    std::vector<double> row(net.n_nodes(), 0.0);
    for (std::size_t v = 0; v < net.n_nodes(); ++v) {
        if (products[v].empty()) continue;
        // sorted accumulation: value is independent of traversal order
        std::sort(products[v].begin(), products[v].end());
        double sum = 0.0;
        for (double p : products[v]) sum += p;
        row[v] = std::clamp(sum / static_cast<double>(products[v].size()), -1.0, 1.0);
    }
    row[source] = 1.0;
    return row;
}

double sample_perturbation(double alpha, double sigma2, double x_min, double x_max, KeyedRng& rng) {
    if (!(alpha >= 0.0) || !(sigma2 >= 0.0)) throw ValueError("strength and variance must be non-negative");
    if (!(x_min <= x_max)) throw ValueError("invalid expression bounds");
    double eta = rng.normal();
    double u = rng.uniform(x_min * (1.0 - alpha), x_max * (1.0 + alpha));
    return eta * sigma2 * u;
}

KeyedRng perturbation_stream(std::uint64_t seed, const GeneId& gene, std::size_t alpha_index,
                             int code, double time, int replicate) {
    return KeyedRng(RngKey(seed)
                        .with("perturb")
                        .with(gene)
                        .with(static_cast<std::uint64_t>(alpha_index))
                        .with(code)
                        .with(time)
                        .with(replicate));
}

namespace {

struct PerturbationSource {
    std::size_t ds_gene = 0;
    std::vector<std::pair<std::size_t, double>> row;  // (dataset gene, weight), non-zero entries
    std::vector<std::pair<double, double>> bounds;    // per code index: min/max of the source gene
    GeneId id;
};

PerturbationSource prepare_source(const ExpressionDataset& ds, const RegulatoryNetwork& net,
                                  const GeneId& p, unsigned d_max) {
    PerturbationSource src;
    src.id = p;
    src.ds_gene = ds.gene_index(p);
    std::vector<double> row = propagation_row(net, net.node_index(p), d_max);
    for (std::size_t v = 0; v < row.size(); ++v) {
        if (row[v] == 0.0) continue;
        const GeneId& gid = net.nodes()[v];
        if (!ds.has_gene(gid)) continue;  // nodes outside the dataset take no perturbation
        src.row.emplace_back(ds.gene_index(gid), row[v]);
    }
    for (int code : ds.axes().codes) {
        src.bounds.push_back(ds.min_max_expression(p, code));
    }
    return src;
}

ExpressionDataset apply_sources(const ExpressionDataset& ds, std::span<const PerturbationSource> sources,
                                std::size_t alpha_index, const PerturbationConfig& cfg) {
    if (alpha_index >= cfg.alphas.size()) throw ValueError("alpha index out of range");
    double alpha = cfg.alphas[alpha_index];
    std::vector<double> values = ds.raw_values();
    const auto& present = ds.raw_present();
    for (const PerturbationSource& src : sources) {
        for (std::size_t ci = 0; ci < ds.n_codes(); ++ci) {
            int code = ds.axes().codes[ci];
            auto [x_min, x_max] = src.bounds[ci];
            for (std::size_t ti = 0; ti < ds.n_times(); ++ti) {
                double time = ds.axes().timepoints[ti];
                for (std::size_t ri = 0; ri < ds.n_replicates(); ++ri) {
                    int rep = ds.axes().replicates[ri];
                    KeyedRng rng = perturbation_stream(cfg.seed, src.id, alpha_index, code, time, rep);
                    double u = sample_perturbation(alpha, cfg.sigma2, x_min, x_max, rng);
                    for (const auto& [gene, weight] : src.row) {
                        std::size_t idx = ds.cell_index(gene, ci, ti, ri);
                        if (present[idx]) values[idx] += weight * u;
                    }
                }
            }
        }
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (present[i] && values[i] < 0.0) values[i] = 0.0;
    }
    return ds.copy_with_values(std::move(values));
}

}  // namespace

ExpressionDataset apply_genewise(const ExpressionDataset& ds, const RegulatoryNetwork& net,
                                 const GeneId& p, std::size_t alpha_index,
                                 const PerturbationConfig& cfg) {
    PerturbationSource src = prepare_source(ds, net, p, cfg.d_max);
    return apply_sources(ds, std::span(&src, 1), alpha_index, cfg);
}

ExpressionDataset apply_collective(const ExpressionDataset& ds, const RegulatoryNetwork& net,
                                   std::span<const GeneId> genes, std::size_t alpha_index,
                                   const PerturbationConfig& cfg) {
    if (genes.empty()) throw EmptySet("collective perturbation needs at least one gene");
    std::vector<PerturbationSource> sources;
    sources.reserve(genes.size());
    for (const GeneId& p : genes) sources.push_back(prepare_source(ds, net, p, cfg.d_max));
    return apply_sources(ds, sources, alpha_index, cfg);
}

CalcMetrics calc_metrics(const ExpressionDataset& unperturbed, const ExpressionDataset& perturbed,
                         const GeneId& output_gene, const CalculationTask& task, double timepoint,
                         int replicate) {
    if (!unperturbed.same_shape(perturbed)) throw ValueError("datasets must share shape");
    CalcMetrics m;
    int base = unperturbed.axes().base_code;
    double pert_base = perturbed.expression_at(output_gene, base, timepoint, replicate);
    if (pert_base == 0.0) throw DivisionByZeroBase("perturbed base expression is zero");

    std::vector<double> clean;
    for (const auto& [code, expected] : task.expected_fold) {
        double actual = perturbed.expression_at(output_gene, code, timepoint, replicate) / pert_base;
        double err = std::abs(expected - actual);
        m.error_by_code[code] = err;
        m.ess += err * err;
        clean.push_back(unperturbed.expression_at(output_gene, code, timepoint, replicate));
    }
    double mean = 0.0;
    for (double v : clean) mean += v;
    mean /= static_cast<double>(clean.size());
    for (double v : clean) m.var += (v - mean) * (v - mean);
    if (m.var == 0.0) {
        throw ZeroVariance("unperturbed output is flat across the mapped codes");
    }
    m.r2 = 1.0 - m.ess / m.var;
    return m;
}

double mean_r_squared(std::span<const double> r2_values) {
    if (r2_values.empty()) throw TooFewSamples("mean of an empty collection");
    double sum = 0.0;
    for (double v : r2_values) sum += v;
    return sum / static_cast<double>(r2_values.size());
}

double outward_centrality(const RegulatoryNetwork& net, const GeneId& gene) {
    if (net.n_nodes() <= 1) throw SingletonNetwork("centrality needs at least two nodes");
    std::size_t node = net.node_index(gene);
    return static_cast<double>(net.out_degree_no_self(node)) / static_cast<double>(net.n_nodes() - 1);
}

Criticality criticality_calc(double centrality, double mean_r2) {
    constexpr double kFloor = 1e-6;
    Criticality c;
    c.floored = !(mean_r2 > kFloor);
    c.value = centrality / std::max(mean_r2, kFloor);
    return c;
}

std::size_t hamming_distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    if (a.size() != b.size()) throw LengthMismatch("bit vectors must have equal length");
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if ((a[i] != 0) != (b[i] != 0)) ++d;
    }
    return d;
}

double criticality_class(double centrality, std::span<const std::size_t> hamming_per_alpha) {
    std::size_t total = 0;
    for (std::size_t h : hamming_per_alpha) total += h;
    return centrality * static_cast<double>(total);
}

std::vector<std::vector<std::uint8_t>> binarize_against_thresholds(
    const ExpressionDataset& ds, const GeneId& gene, const std::map<int, double>& thresholds,
    double timepoint) {
    const auto universe = ds.axes().input_codes();
    std::vector<std::vector<std::uint8_t>> bits;
    for (int rep : ds.axes().replicates) {
        auto it = thresholds.find(rep);
        if (it == thresholds.end()) throw ValueError("missing threshold for a replicate");
        std::vector<std::uint8_t> row;
        row.reserve(universe.size());
        for (int code : universe) {
            row.push_back(ds.expression_at(gene, code, timepoint, rep) > it->second ? 1 : 0);
        }
        bits.push_back(std::move(row));
    }
    return bits;
}

namespace {

// Worst-replicate Hamming distance between clean and perturbed binarizations
// of every output gene, per the report's conservative aggregation.
std::size_t pattern_hamming(const ExpressionDataset& clean, const ExpressionDataset& perturbed,
                            const SubGRNN& sub, double timepoint,
                            std::map<int, std::size_t>* by_replicate) {
    std::vector<std::size_t> per_rep(clean.n_replicates(), 0);
    for (const GeneId& out_gene : sub.output_genes) {
        auto thr = sub.thresholds.find(out_gene);
        if (thr == sub.thresholds.end()) throw ValueError("no thresholds recorded for an output gene");
        auto before = binarize_against_thresholds(clean, out_gene, thr->second, timepoint);
        auto after = binarize_against_thresholds(perturbed, out_gene, thr->second, timepoint);
        for (std::size_t ri = 0; ri < per_rep.size(); ++ri) {
            per_rep[ri] += hamming_distance(before[ri], after[ri]);
        }
    }
    std::size_t worst = 0;
    for (std::size_t ri = 0; ri < per_rep.size(); ++ri) {
        if (by_replicate) (*by_replicate)[clean.axes().replicates[ri]] = per_rep[ri];
        worst = std::max(worst, per_rep[ri]);
    }
    return worst;
}

AlphaOutcome score_level(const ExpressionDataset& ds, const ExpressionDataset& perturbed,
                         const SubGRNN& sub, const TaskSpec& task, double alpha) {
    AlphaOutcome outcome;
    outcome.alpha = alpha;
    if (task.is_calculation()) {
        std::vector<double> r2s;
        for (int rep : ds.axes().replicates) {
            outcome.calc_by_replicate.push_back(
                calc_metrics(ds, perturbed, sub.output_genes.front(), task.calculation(),
                             sub.timepoint, rep));
            r2s.push_back(outcome.calc_by_replicate.back().r2);
        }
        outcome.r2_mean = mean_r_squared(r2s);
    } else {
        outcome.hamming = pattern_hamming(ds, perturbed, sub, sub.timepoint,
                                          &outcome.hamming_by_replicate);
    }
    return outcome;
}

}  // namespace

ReliabilityReport rank_gene_criticality(const ExpressionDataset& ds, const SubGRNN& sub,
                                        const TaskSpec& task, const PerturbationConfig& cfg,
                                        std::span<const GeneId> genes) {
    if (task.is_calculation() && sub.output_genes.size() != 1) {
        throw ValueError("calculation reliability expects exactly one output gene");
    }
    ReliabilityReport report;
    report.task_name = task.name;
    report.kind = task.is_calculation() ? "calculation" : (task.is_binary() ? "binary" : "classification");
    report.output_genes = sub.output_genes;
    report.timepoint = sub.timepoint;

    std::vector<GeneId> targets(genes.begin(), genes.end());
    if (targets.empty()) targets = sub.hidden_genes;
    if (targets.empty()) throw ValueError("no genes to perturb");

    RegulatoryNetwork filled = assign_missing_correlations(sub.network, cfg.seed);

    report.genes.resize(targets.size());
    parallel_for(targets.size(), [&](std::size_t i) {
        const GeneId& p = targets[i];
        GeneReliability rel;
        rel.gene = p;
        rel.centrality = outward_centrality(sub.network, p);
        std::vector<double> r2s;
        std::vector<std::size_t> hds;
        for (std::size_t ai = 0; ai < cfg.alphas.size(); ++ai) {
            ExpressionDataset perturbed = apply_genewise(ds, filled, p, ai, cfg);
            AlphaOutcome outcome = score_level(ds, perturbed, sub, task, cfg.alphas[ai]);
            if (task.is_calculation()) {
                for (const auto& m : outcome.calc_by_replicate) r2s.push_back(m.r2);
            } else {
                hds.push_back(outcome.hamming);
            }
            rel.levels.push_back(std::move(outcome));
        }
        if (task.is_calculation()) {
            rel.mean_r2 = mean_r_squared(r2s);
            rel.criticality = criticality_calc(rel.centrality, rel.mean_r2);
        } else {
            rel.criticality.value = criticality_class(rel.centrality, hds);
        }
        report.genes[i] = std::move(rel);
    });
    std::sort(report.genes.begin(), report.genes.end(),
              [](const GeneReliability& a, const GeneReliability& b) {
                  if (a.criticality.value != b.criticality.value) {
                      return a.criticality.value > b.criticality.value;
                  }
                  return a.gene < b.gene;
              });
    return report;
}

std::vector<SweepPoint> collective_sweep(const ExpressionDataset& ds, const SubGRNN& sub,
                                         const TaskSpec& task, const ReliabilityReport& ranking,
                                         std::size_t k_max, const PerturbationConfig& cfg) {
    if (ranking.genes.empty()) throw ValueError("ranking is empty");
    k_max = std::min(k_max, ranking.genes.size());
    RegulatoryNetwork filled = assign_missing_correlations(sub.network, cfg.seed);

    std::vector<SweepPoint> sweep;
    for (std::size_t k = 1; k <= k_max; ++k) {
        std::vector<GeneId> group;
        for (std::size_t i = 0; i < k; ++i) group.push_back(ranking.genes[i].gene);
        for (std::size_t ai = 0; ai < cfg.alphas.size(); ++ai) {
            ExpressionDataset perturbed = apply_collective(ds, filled, group, ai, cfg);
            AlphaOutcome outcome = score_level(ds, perturbed, sub, task, cfg.alphas[ai]);
            SweepPoint pt;
            pt.k = k;
            pt.alpha = cfg.alphas[ai];
            pt.metric = task.is_calculation() ? outcome.r2_mean : static_cast<double>(outcome.hamming);
            sweep.push_back(pt);
        }
    }
    return sweep;
}

}  // namespace grnn
