#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "grnn/dataset.hpp"
#include "grnn/network.hpp"
#include "grnn/rng.hpp"
#include "grnn/tasks.hpp"

namespace grnn {

struct PerturbationConfig {
    std::vector<double> alphas = {1, 2, 3, 4, 5};  // perturbation strength grid
    double sigma2 = 0.1;                            // noise variance
    unsigned d_max = 4;                             // propagation depth
    std::uint64_t seed = 0;
};

// Copy of the network with every unknown correlation drawn from U(-1, 1),
// keyed by (seed, edge endpoints) so the fill never depends on edge order.
RegulatoryNetwork assign_missing_correlations(const RegulatoryNetwork& net, std::uint64_t seed);

// Influence of `source` on every node: mean over all directed walks of
// length 1..d_max of the walk's correlation product, clamped to [-1, 1];
// 1.0 for the source itself, 0.0 where no walk arrives. Self-loops are
// skipped. Walk products are summed in sorted order so the value is exactly
// reproducible. ValueError when a reachable edge has no correlation;
// Overflow when the walk count explodes past 10^7.
std::vector<double> propagation_row(const RegulatoryNetwork& net, std::size_t source, unsigned d_max);

// One perturbation draw: standard normal times sigma^2 times a uniform draw
// from (x_min(1-alpha), x_max(1+alpha)). Consumes one normal then one
// uniform from rng.
double sample_perturbation(double alpha, double sigma2, double x_min, double x_max, KeyedRng& rng);

// Keyed stream for one perturbation cell; shared by the gene-wise and
// collective paths so a singleton collective run is bitwise a gene-wise run.
KeyedRng perturbation_stream(std::uint64_t seed, const GeneId& gene, std::size_t alpha_index,
                             int code, double time, int replicate);

// Dataset with gene `p` perturbed at strength alphas[alpha_index]: for every
// (code, time, replicate), one draw scaled by p's propagation row is added to
// every reachable gene, clamped at zero. Genes absent from the dataset are
// skipped. UnknownGene when p is not a network node or dataset gene.
ExpressionDataset apply_genewise(const ExpressionDataset& ds, const RegulatoryNetwork& net,
                                 const GeneId& p, std::size_t alpha_index,
                                 const PerturbationConfig& cfg);

// Independent draws for every gene in `genes` (same streams as the gene-wise
// path), applied cumulatively before the zero clamp.
ExpressionDataset apply_collective(const ExpressionDataset& ds, const RegulatoryNetwork& net,
                                   std::span<const GeneId> genes, std::size_t alpha_index,
                                   const PerturbationConfig& cfg);

// --- reliability metrics -----------------------------------------------------

// Fold-change reproduction of one output gene at one (timepoint, replicate):
// per-code absolute fold error, the error sum of squares, the unperturbed
// spread, and R^2 = 1 - ess/var. ZeroVariance when the unperturbed output is
// flat across the mapped codes.
struct CalcMetrics {
    std::map<int, double> error_by_code;
    double ess = 0.0;
    double var = 0.0;
    double r2 = 0.0;
};
CalcMetrics calc_metrics(const ExpressionDataset& unperturbed, const ExpressionDataset& perturbed,
                         const GeneId& output_gene, const CalculationTask& task, double timepoint,
                         int replicate);

double mean_r_squared(std::span<const double> r2_values);  // TooFewSamples on empty

// Out-degree (self-loops excluded) over |V|-1. SingletonNetwork when |V|=1.
double outward_centrality(const RegulatoryNetwork& net, const GeneId& gene);

// centrality / max(mean_r2, 1e-6); `floored` marks a clamped denominator.
struct Criticality {
    double value = 0.0;
    bool floored = false;
};
Criticality criticality_calc(double centrality, double mean_r2);

std::size_t hamming_distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

// centrality times the total Hamming distance across the strength grid.
double criticality_class(double centrality, std::span<const std::size_t> hamming_per_alpha);

// --- reliability report ------------------------------------------------------

struct AlphaOutcome {
    double alpha = 0.0;
    // calculation: metrics per replicate, in replicate order
    std::vector<CalcMetrics> calc_by_replicate;
    double r2_mean = 0.0;
    // classification/binary: Hamming distance per replicate and the
    // conservative per-level scalar (max across replicates)
    std::map<int, std::size_t> hamming_by_replicate;
    std::size_t hamming = 0;
};

struct GeneReliability {
    GeneId gene;
    double centrality = 0.0;
    std::vector<AlphaOutcome> levels;  // one per alpha
    double mean_r2 = 0.0;              // calculation only: over levels x replicates
    Criticality criticality;           // calc: centrality/meanR2; class: centrality * sum HD
};

struct ReliabilityReport {
    std::string task_name;
    std::string kind;                  // "calculation" | "classification" | "binary"
    std::vector<GeneId> output_genes;
    double timepoint = 0.0;
    std::vector<GeneReliability> genes;   // sorted by criticality, most critical first
};

// Perturbs each gene in `genes` independently (default: the subnetwork's
// hidden genes) and scores the output gene(s) of `sub`. Propagation runs on
// sub.network with unknown correlations filled from cfg.seed.
ReliabilityReport rank_gene_criticality(const ExpressionDataset& ds, const SubGRNN& sub,
                                        const TaskSpec& task, const PerturbationConfig& cfg,
                                        std::span<const GeneId> genes = {});

// Perturbs the top-k most critical genes together, k = 1..k_max, recording
// mean R^2 (calculation) or worst-replicate Hamming distance per (k, alpha).
struct SweepPoint {
    std::size_t k = 0;
    double alpha = 0.0;
    double metric = 0.0;
};
std::vector<SweepPoint> collective_sweep(const ExpressionDataset& ds, const SubGRNN& sub,
                                         const TaskSpec& task, const ReliabilityReport& ranking,
                                         std::size_t k_max, const PerturbationConfig& cfg);

// Binary output of one gene against per-replicate thresholds at a timepoint,
// one bit per input code and replicate: bits[replicate_index][code_position].
std::vector<std::vector<std::uint8_t>> binarize_against_thresholds(
    const ExpressionDataset& ds, const GeneId& gene, const std::map<int, double>& thresholds,
    double timepoint);

}  // namespace grnn
