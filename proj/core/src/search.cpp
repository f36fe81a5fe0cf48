#include "grnn/search.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "grnn/parallel.hpp"

namespace grnn {

namespace {

// Per-gene scratch results so parallel scans stay schedule-independent.
struct GeneScan {
    std::vector<MatchEntry> entries;
    std::size_t skipped = 0;
};

void sort_entries(std::vector<MatchEntry>& entries) {
    std::sort(entries.begin(), entries.end(), [](const MatchEntry& a, const MatchEntry& b) {
        if (a.gene != b.gene) return a.gene < b.gene;
        return a.timepoint < b.timepoint;
    });
}

// Entries are sorted by (gene, timepoint), so the first extremum wins ties
// in exactly that order.
std::optional<std::size_t> pick_best(const std::vector<MatchEntry>& entries, bool smaller_is_better) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!best) {
            best = i;
            continue;
        }
        double cur = entries[i].deviation;
        double ref = entries[*best].deviation;
        if (smaller_is_better ? cur < ref : cur > ref) best = i;
    }
    return best;
}

MatchSet collect(std::vector<GeneScan> scans, std::string task_name, std::string kind,
                 bool rank, bool smaller_is_better) {
    MatchSet ms;
    ms.task_name = std::move(task_name);
    ms.kind = std::move(kind);
    for (auto& scan : scans) {
        ms.skipped += scan.skipped;
        for (auto& e : scan.entries) ms.entries.push_back(std::move(e));
    }
    sort_entries(ms.entries);
    if (rank) ms.best = pick_best(ms.entries, smaller_is_better);
    return ms;
}

std::vector<std::size_t> code_indices(const ExpressionDataset& ds, std::span<const int> codes) {
    std::vector<std::size_t> out;
    out.reserve(codes.size());
    for (int c : codes) out.push_back(ds.code_index(c));
    return out;
}

void validate_classification(const ClassificationTask& task,
                             const std::vector<int>& universe) {
    if (task.target_codes.empty()) throw SpecError("classification task has no target codes");
    for (int c : task.target_codes) {
        if (std::find(universe.begin(), universe.end(), c) == universe.end()) {
            throw SpecError("target code is not an input code of the dataset");
        }
    }
    if (task.target_codes.size() >= universe.size()) {
        throw SpecError("classification target set must be a proper subset of the input codes");
    }
}

}  // namespace

MatchSet search_calculation(const ExpressionDataset& ds, const CalculationTask& task,
                            const std::string& task_name) {
    if (task.expected_fold.empty()) throw SpecError("calculation task maps no codes");
    if (!(task.epsilon >= 0.0)) throw ValueError("tolerance must be non-negative");
    std::vector<int> codes;
    std::vector<double> expected;
    for (const auto& [code, fold] : task.expected_fold) {
        codes.push_back(code);
        expected.push_back(fold);
    }
    const auto ci = code_indices(ds, codes);
    const std::size_t base_ci = ds.code_index(ds.axes().base_code);
    const auto& values = ds.raw_values();
    const auto& present = ds.raw_present();

    std::vector<GeneScan> scans(ds.n_genes());
    parallel_for(ds.n_genes(), [&](std::size_t g) {
        GeneScan& scan = scans[g];
        for (std::size_t ti = 0; ti < ds.n_times(); ++ti) {
            bool usable = true;
            bool matches = true;
            double deviation = 0.0;
            std::map<int, std::map<int, double>> folds;
            for (std::size_t ri = 0; usable && matches && ri < ds.n_replicates(); ++ri) {
                std::size_t base_idx = ds.cell_index(g, base_ci, ti, ri);
                if (!present[base_idx] || values[base_idx] == 0.0) {
                    usable = false;
                    break;
                }
                double base = values[base_idx];
                for (std::size_t k = 0; k < ci.size(); ++k) {
                    std::size_t idx = ds.cell_index(g, ci[k], ti, ri);
                    if (!present[idx]) {
                        usable = false;
                        break;
                    }
                    double fold = values[idx] / base;
                    double err = std::abs(fold - expected[k]);
                    if (err > task.epsilon) {
                        matches = false;
                        break;
                    }
                    deviation += err;
                    folds[ds.axes().replicates[ri]][codes[k]] = fold;
                }
            }
            if (!usable) {
                ++scan.skipped;
            } else if (matches) {
                MatchEntry e;
                e.gene = ds.genes()[g];
                e.timepoint = ds.axes().timepoints[ti];
                e.deviation = deviation;
                e.folds = std::move(folds);
                scan.entries.push_back(std::move(e));
            }
        }
    });
    return collect(std::move(scans), task_name, "calculation", true, /*smaller_is_better=*/true);
}

MatchSet search_classification_candidates(const ExpressionDataset& ds, const ClassificationTask& task,
                                          const std::string& task_name) {
    const auto universe = ds.axes().input_codes();
    validate_classification(task, universe);
    const auto ci = code_indices(ds, universe);
    std::vector<std::uint8_t> is_target(universe.size(), 0);
    for (std::size_t k = 0; k < universe.size(); ++k) {
        is_target[k] = task.target_codes.count(universe[k]) ? 1 : 0;
    }
    const auto& values = ds.raw_values();
    const auto& present = ds.raw_present();

    std::vector<GeneScan> scans(ds.n_genes());
    parallel_for(ds.n_genes(), [&](std::size_t g) {
        GeneScan& scan = scans[g];
        std::vector<double> profile(universe.size());
        for (std::size_t ti = 0; ti < ds.n_times(); ++ti) {
            bool usable = true;
            bool matches = true;
            std::map<int, double> means;
            for (std::size_t ri = 0; usable && matches && ri < ds.n_replicates(); ++ri) {
                double sum = 0.0;
                for (std::size_t k = 0; k < ci.size(); ++k) {
                    std::size_t idx = ds.cell_index(g, ci[k], ti, ri);
                    if (!present[idx]) {
                        usable = false;
                        break;
                    }
                    profile[k] = values[idx];
                    sum += profile[k];
                }
                if (!usable) break;
                double theta = sum / static_cast<double>(profile.size());
                for (std::size_t k = 0; k < profile.size(); ++k) {
                    bool above = profile[k] > theta;
                    if (above != static_cast<bool>(is_target[k])) {
                        matches = false;
                        break;
                    }
                }
                means[ds.axes().replicates[ri]] = theta;
            }
            if (!usable) {
                ++scan.skipped;
            } else if (matches) {
                MatchEntry e;
                e.gene = ds.genes()[g];
                e.timepoint = ds.axes().timepoints[ti];
                e.thresholds = std::move(means);
                scan.entries.push_back(std::move(e));
            }
        }
    });
    return collect(std::move(scans), task_name, "classification", false, false);
}

MatchSet select_best_classifier(const ExpressionDataset& ds, MatchSet candidates, ClassifierMode mode) {
    if (candidates.entries.empty()) throw EmptyCandidates("no classification candidates to rank");
    const auto universe = ds.axes().input_codes();
    const auto ci = code_indices(ds, universe);
    const auto& values = ds.raw_values();
    const auto& present = ds.raw_present();

    std::vector<MatchEntry> scored;
    scored.reserve(candidates.entries.size());
    for (auto& entry : candidates.entries) {
        std::size_t g = ds.gene_index(entry.gene);
        std::size_t ti = ds.time_index(entry.timepoint);
        double total = 0.0;
        std::map<int, double> midpoints;
        bool usable = true;
        for (std::size_t ri = 0; usable && ri < ds.n_replicates(); ++ri) {
            double sum = 0.0;
            std::vector<double> profile(ci.size());
            for (std::size_t k = 0; k < ci.size(); ++k) {
                std::size_t idx = ds.cell_index(g, ci[k], ti, ri);
                if (!present[idx]) {
                    usable = false;
                    break;
                }
                profile[k] = values[idx];
                sum += profile[k];
            }
            if (!usable) break;
            double theta = sum / static_cast<double>(profile.size());
            double above = 0.0, below = 0.0;
            bool has_above = false, has_below = false;
            for (double v : profile) {
                if (v > theta) {
                    if (!has_above || v < above) above = v;
                    has_above = true;
                } else {
                    if (!has_below || v > below) below = v;
                    has_below = true;
                }
            }
            if (!has_above || !has_below) {
                usable = false;
                break;
            }
            total += (above - theta) + (theta - below);
            midpoints[ds.axes().replicates[ri]] = (above + below) / 2.0;
        }
        if (!usable) {
            ++candidates.skipped;
            continue;
        }
        entry.deviation = total;
        entry.thresholds = std::move(midpoints);
        scored.push_back(std::move(entry));
    }
    candidates.entries = std::move(scored);
    sort_entries(candidates.entries);
    candidates.best = pick_best(candidates.entries, mode == ClassifierMode::ScoreMin);
    return candidates;
}

BinaryProfile binary_profile(std::span<const double> values) {
    if (values.size() < 2) throw ValueError("binarization needs at least two values");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    double widest = 0.0;
    std::size_t at = 0;
    for (std::size_t j = 0; j + 1 < sorted.size(); ++j) {
        double gap = sorted[j + 1] - sorted[j];
        if (gap > widest) {
            widest = gap;
            at = j;
        }
    }
    if (widest == 0.0) throw DegenerateProfile("all expression values are equal");
    BinaryProfile out;
    out.threshold = (sorted[at] + sorted[at + 1]) / 2.0;
    out.separation = widest;
    out.bits.reserve(values.size());
    for (double v : values) out.bits.push_back(v > out.threshold ? 1 : 0);
    return out;
}

MatchSet search_binary_pattern(const ExpressionDataset& ds, std::span<const std::uint8_t> pattern,
                               const std::string& task_name) {
    const auto universe = ds.axes().input_codes();
    if (pattern.size() != universe.size()) {
        throw SpecError("bit pattern length must equal the number of input codes");
    }
    const auto ci = code_indices(ds, universe);
    const auto& values = ds.raw_values();
    const auto& present = ds.raw_present();

    std::vector<GeneScan> scans(ds.n_genes());
    parallel_for(ds.n_genes(), [&](std::size_t g) {
        GeneScan& scan = scans[g];
        std::vector<double> profile(ci.size());
        for (std::size_t ti = 0; ti < ds.n_times(); ++ti) {
            bool usable = true;
            bool matches = true;
            double separation_sum = 0.0;
            std::map<int, double> thresholds;
            for (std::size_t ri = 0; usable && matches && ri < ds.n_replicates(); ++ri) {
                for (std::size_t k = 0; k < ci.size(); ++k) {
                    std::size_t idx = ds.cell_index(g, ci[k], ti, ri);
                    if (!present[idx]) {
                        usable = false;
                        break;
                    }
                    profile[k] = values[idx];
                }
                if (!usable) break;
                BinaryProfile bp;
                try {
                    bp = binary_profile(profile);
                } catch (const DegenerateProfile&) {
                    usable = false;
                    break;
                }
                if (!std::equal(bp.bits.begin(), bp.bits.end(), pattern.begin(), pattern.end())) {
                    matches = false;
                    break;
                }
                separation_sum += bp.separation;
                thresholds[ds.axes().replicates[ri]] = bp.threshold;
            }
            if (!usable) {
                ++scan.skipped;
            } else if (matches) {
                MatchEntry e;
                e.gene = ds.genes()[g];
                e.timepoint = ds.axes().timepoints[ti];
                e.deviation = separation_sum / static_cast<double>(ds.n_replicates());
                e.thresholds = std::move(thresholds);
                scan.entries.push_back(std::move(e));
            }
        }
    });
    return collect(std::move(scans), task_name, "binary", true, /*smaller_is_better=*/false);
}

std::vector<MatchCount> count_matching_networks(const ExpressionDataset& ds, const TaskSpec& task) {
    std::vector<MatchCount> out;
    for (double t : ds.axes().timepoints) {
        MatchCount mc;
        mc.timepoint = t;
        out.push_back(mc);
    }
    auto tally = [&](const MatchSet& ms, std::vector<std::uint64_t>& counts) {
        counts.assign(ds.n_times(), 0);
        for (const auto& e : ms.entries) ++counts[ds.time_index(e.timepoint)];
    };
    if (task.is_binary()) {
        const auto& patterns = task.binary().bit_patterns;
        std::vector<std::vector<std::uint64_t>> per_bit(patterns.size());
        for (std::size_t b = 0; b < patterns.size(); ++b) {
            tally(search_binary_pattern(ds, patterns[b], task.name), per_bit[b]);
        }
        for (std::size_t ti = 0; ti < ds.n_times(); ++ti) {
            std::uint64_t product = 1;
            for (std::size_t b = 0; b < patterns.size(); ++b) {
                out[ti].per_bit.push_back(per_bit[b][ti]);
                if (__builtin_mul_overflow(product, per_bit[b][ti], &product)) {
                    throw Overflow("assignment count exceeds 64 bits");
                }
            }
            out[ti].count = product;
        }
        return out;
    }
    std::vector<std::uint64_t> counts;
    if (task.is_calculation()) {
        tally(search_calculation(ds, task.calculation(), task.name), counts);
    } else {
        tally(search_classification_candidates(ds, task.classification(), task.name), counts);
    }
    for (std::size_t ti = 0; ti < ds.n_times(); ++ti) out[ti].count = counts[ti];
    return out;
}

std::vector<std::uint64_t> decode_binary_outputs(const ExpressionDataset& ds,
                                                 std::span<const GeneId> bit_genes,
                                                 const std::vector<std::map<int, double>>& thresholds,
                                                 double timepoint) {
    if (bit_genes.size() != thresholds.size()) {
        throw ValueError("one threshold map per bit gene required");
    }
    const auto universe = ds.axes().input_codes();
    std::vector<std::uint64_t> decoded(universe.size(), 0);
    for (std::size_t b = 0; b < bit_genes.size(); ++b) {
        for (std::size_t k = 0; k < universe.size(); ++k) {
            bool bit = true;
            for (int rep : ds.axes().replicates) {
                auto it = thresholds[b].find(rep);
                if (it == thresholds[b].end()) throw ValueError("missing threshold for a replicate");
                if (!(ds.expression_at(bit_genes[b], universe[k], timepoint, rep) > it->second)) {
                    bit = false;
                    break;
                }
            }
            if (bit) decoded[k] |= (std::uint64_t{1} << b);
        }
    }
    return decoded;
}

SubGRNN extract_subgrnn(const RegulatoryNetwork& net, std::vector<GeneId> output_genes,
                        const std::set<GeneId>& input_genes, unsigned depth_limit) {
    if (output_genes.empty()) throw ValueError("extraction needs at least one output gene");
    std::set<GeneId> seen_outputs;
    for (const auto& g : output_genes) {
        net.node_index(g);  // UnknownGene on absent outputs
        if (!seen_outputs.insert(g).second) throw ValueError("output gene '" + g + "' listed twice");
    }

    SubGRNN sub;
    std::set<GeneId> visited(output_genes.begin(), output_genes.end());
    for (const GeneId& out_gene : output_genes) {
        std::size_t start = net.node_index(out_gene);
        std::deque<std::pair<std::size_t, unsigned>> queue;
        std::set<std::size_t> local{start};
        bool reached_input = input_genes.count(out_gene) != 0;
        if (!reached_input) queue.emplace_back(start, 0);
        while (!queue.empty()) {
            auto [node, depth] = queue.front();
            queue.pop_front();
            if (depth >= depth_limit) continue;
            for (std::size_t ei : net.in_edges(node)) {
                std::size_t pred = net.edges()[ei].source;
                if (pred == node) continue;  // self-loop
                if (!local.insert(pred).second) continue;
                visited.insert(net.nodes()[pred]);
                if (input_genes.count(net.nodes()[pred])) {
                    reached_input = true;  // stop expanding past an input gene
                } else {
                    queue.emplace_back(pred, depth + 1);
                }
            }
        }
        if (!reached_input) {
            sub.warnings.push_back("output gene '" + out_gene + "' is not reached by any input gene");
        }
    }

    sub.output_genes = std::move(output_genes);
    for (const GeneId& g : visited) {
        if (seen_outputs.count(g)) continue;
        if (input_genes.count(g)) {
            sub.input_genes.push_back(g);
        } else {
            sub.hidden_genes.push_back(g);
        }
    }
    sub.network = net.induced_subgraph(visited);
    return sub;
}

std::set<GeneId> default_input_genes(const ExpressionDataset& ds, std::size_t top_k) {
    struct Ranked {
        double variance;
        GeneId gene;
    };
    std::vector<Ranked> ranked(ds.n_genes());
    parallel_for(ds.n_genes(), [&](std::size_t g) {
        std::vector<double> code_means;
        for (std::size_t ci = 0; ci < ds.n_codes(); ++ci) {
            double sum = 0.0;
            std::size_t n = 0;
            for (std::size_t ti = 0; ti < ds.n_times(); ++ti) {
                for (std::size_t ri = 0; ri < ds.n_replicates(); ++ri) {
                    std::size_t idx = ds.cell_index(g, ci, ti, ri);
                    if (!ds.raw_present()[idx]) continue;
                    sum += ds.raw_values()[idx];
                    ++n;
                }
            }
            if (n) code_means.push_back(sum / static_cast<double>(n));
        }
        double variance = 0.0;
        if (code_means.size() >= 2) {
            double mean = 0.0;
            for (double m : code_means) mean += m;
            mean /= static_cast<double>(code_means.size());
            for (double m : code_means) variance += (m - mean) * (m - mean);
            variance /= static_cast<double>(code_means.size());
        }
        ranked[g] = Ranked{variance, ds.genes()[g]};
    });
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.variance != b.variance) return a.variance > b.variance;
        return a.gene < b.gene;
    });
    std::set<GeneId> out;
    for (std::size_t i = 0; i < ranked.size() && i < top_k; ++i) out.insert(ranked[i].gene);
    return out;
}

}  // namespace grnn
