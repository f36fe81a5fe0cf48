#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "grnn/dataset.hpp"
#include "grnn/network.hpp"

namespace grnn {

// Sample Pearson correlation. TooFewSamples when n < 2, ValueError on length
// mismatch or non-finite input, DegenerateSeries when either series is constant.
double pearson(std::span<const double> x, std::span<const double> y);

// Agreement of a correlation series across datasets:
//   score = (fraction of entries whose sign matches the sign of the mean)
//           / (1 + population standard deviation)
// A zero mean counts as positive; entries equal to zero match either sign.
// Always in [0, 1]. TooFewSamples when fewer than 2 entries.
double consistency_score(std::span<const double> correlations);

struct EdgeConsistency {
    GeneId source, target;
    std::vector<double> correlations;  // one per dataset that yielded a finite value
    double score = 0.0;
    bool stable = false;
};

enum class StableMode { Threshold, Quantile };

struct StabilityReport {
    std::vector<EdgeConsistency> edges;   // network edge order
    double cutoff = 0.0;                  // score at/above which an edge is stable
    double stable_fraction = 0.0;
};

// Per-edge correlation series across datasets: for every edge, the Pearson
// correlation of (source, target) expression over all cells present in both,
// one entry per dataset. Datasets where a series is constant contribute no
// entry; edges missing from a dataset's gene set contribute no entry.
std::vector<EdgeConsistency> edge_correlation_ensembles(const RegulatoryNetwork& net,
                                                        std::span<const ExpressionDataset> datasets);

// Stable/dynamic split. Threshold mode: stable iff score >= threshold.
// Quantile mode: stable iff score is within the top `quantile` fraction
// (cutoff = empirical (1-quantile) quantile of the scores).
// TooFewSamples when any edge has fewer than 2 correlations.
StabilityReport classify_edges(std::vector<EdgeConsistency> ensembles, double threshold = 0.75,
                               StableMode mode = StableMode::Threshold, double quantile = 0.30);

using EdgeKey = std::pair<GeneId, GeneId>;

struct OverlapReport {
    std::map<int, std::size_t> singleton_sizes;          // code -> |stable set|
    std::map<std::vector<int>, std::size_t> tuple_sizes; // requested tuples
    std::size_t full_intersection_size = 0;
    std::set<EdgeKey> full_intersection;
};

// Intersections of per-code stable edge sets: every singleton, the full
// intersection, and any explicitly requested code tuples.
OverlapReport stable_overlap(const std::map<int, std::set<EdgeKey>>& stable_by_code,
                             const std::vector<std::vector<int>>& tuples = {});

}  // namespace grnn
