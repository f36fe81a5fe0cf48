#include "grnn/edge_stability.hpp"

#include <algorithm>
#include <cmath>

namespace grnn {

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValueError("series lengths differ");
    std::size_t n = x.size();
    if (n < 2) throw TooFewSamples("correlation needs at least two samples");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw ValueError("series must be finite");
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx;
        double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw DegenerateSeries("constant series has no defined correlation");
    return sxy / std::sqrt(sxx * syy);
}

double consistency_score(std::span<const double> correlations) {
    std::size_t n = correlations.size();
    if (n < 2) throw TooFewSamples("consistency needs at least two correlations");
    double mean = 0.0;
    for (double c : correlations) mean += c;
    mean /= static_cast<double>(n);
    bool mean_positive = mean >= 0.0;  // zero mean counts as positive
    std::size_t matching = 0;
    double ss = 0.0;
    for (double c : correlations) {
        if (c == 0.0 || (c > 0.0) == mean_positive) ++matching;
        double d = c - mean;
        ss += d * d;
    }
    double stddev = std::sqrt(ss / static_cast<double>(n));
    return (static_cast<double>(matching) / static_cast<double>(n)) / (1.0 + stddev);
}

std::vector<EdgeConsistency> edge_correlation_ensembles(const RegulatoryNetwork& net,
                                                        std::span<const ExpressionDataset> datasets) {
    std::vector<EdgeConsistency> out;
    out.reserve(net.edges().size());
    for (const Edge& e : net.edges()) {
        EdgeConsistency ec;
        ec.source = net.nodes()[e.source];
        ec.target = net.nodes()[e.target];
        for (const ExpressionDataset& ds : datasets) {
            if (!ds.has_gene(ec.source) || !ds.has_gene(ec.target)) continue;
            std::size_t gs = ds.gene_index(ec.source);
            std::size_t gt = ds.gene_index(ec.target);
            std::vector<double> xs, ys;
            for (std::size_t ci = 0; ci < ds.n_codes(); ++ci) {
                for (std::size_t ti = 0; ti < ds.n_times(); ++ti) {
                    for (std::size_t ri = 0; ri < ds.n_replicates(); ++ri) {
                        std::size_t is = ds.cell_index(gs, ci, ti, ri);
                        std::size_t it = ds.cell_index(gt, ci, ti, ri);
                        if (!ds.raw_present()[is] || !ds.raw_present()[it]) continue;
                        xs.push_back(ds.raw_values()[is]);
                        ys.push_back(ds.raw_values()[it]);
                    }
                }
            }
            if (xs.size() < 2) continue;
            try {
                ec.correlations.push_back(pearson(xs, ys));
            } catch (const DegenerateSeries&) {
                // constant series in this dataset: no usable entry
            }
        }
        out.push_back(std::move(ec));
    }
    return out;
}

StabilityReport classify_edges(std::vector<EdgeConsistency> ensembles, double threshold,
                               StableMode mode, double quantile) {
    StabilityReport report;
    for (auto& ec : ensembles) {
        ec.score = consistency_score(ec.correlations);
    }
    if (mode == StableMode::Threshold) {
        report.cutoff = threshold;
    } else {
        if (!(quantile > 0.0) || quantile > 1.0) throw ValueError("quantile must be in (0, 1]");
        std::vector<double> scores;
        scores.reserve(ensembles.size());
        for (const auto& ec : ensembles) scores.push_back(ec.score);
        std::sort(scores.begin(), scores.end());
        // smallest score still inside the top `quantile` fraction
        std::size_t keep = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(scores.size())));
        keep = std::max<std::size_t>(keep, 1);
        report.cutoff = scores[scores.size() - keep];
    }
    std::size_t stable = 0;
    for (auto& ec : ensembles) {
        ec.stable = ec.score >= report.cutoff;
        if (ec.stable) ++stable;
    }
    report.stable_fraction =
        ensembles.empty() ? 0.0 : static_cast<double>(stable) / static_cast<double>(ensembles.size());
    report.edges = std::move(ensembles);
    return report;
}

OverlapReport stable_overlap(const std::map<int, std::set<EdgeKey>>& stable_by_code,
                             const std::vector<std::vector<int>>& tuples) {
    OverlapReport report;
    auto intersect = [&](const std::vector<int>& codes) {
        std::set<EdgeKey> acc;
        bool first = true;
        for (int code : codes) {
            auto it = stable_by_code.find(code);
            if (it == stable_by_code.end()) throw UnknownAxis("no stable set for requested code");
            if (first) {
                acc = it->second;
                first = false;
            } else {
                std::set<EdgeKey> next;
                std::set_intersection(acc.begin(), acc.end(), it->second.begin(), it->second.end(),
                                      std::inserter(next, next.begin()));
                acc = std::move(next);
            }
        }
        return acc;
    };

    std::vector<int> all_codes;
    for (const auto& [code, edges] : stable_by_code) {
        report.singleton_sizes[code] = edges.size();
        all_codes.push_back(code);
    }
    if (!all_codes.empty()) {
        report.full_intersection = intersect(all_codes);
        report.full_intersection_size = report.full_intersection.size();
    }
    for (const auto& tuple : tuples) {
        if (tuple.empty()) throw ValueError("overlap tuple must name at least one code");
        report.tuple_sizes[tuple] = intersect(tuple).size();
    }
    return report;
}

}  // namespace grnn
