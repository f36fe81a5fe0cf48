#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "grnn/dataset.hpp"
#include "grnn/network.hpp"
#include "grnn/tasks.hpp"

namespace grnn {

// One (gene, timepoint) hit. `deviation` is the ranking key: total absolute
// fold error for calculation (lower is better), margin for classification and
// gap separation for binary patterns (higher is better).
struct MatchEntry {
    GeneId gene;
    double timepoint = 0.0;
    double deviation = 0.0;
    std::map<int, double> thresholds;              // replicate -> theta (classification/binary)
    std::map<int, std::map<int, double>> folds;    // replicate -> code -> fold (calculation)
};

struct MatchSet {
    std::string task_name;
    std::string kind;  // "calculation" | "classification" | "binary"
    std::vector<MatchEntry> entries;               // sorted by (gene, timepoint)
    std::optional<std::size_t> best;               // index into entries
    std::size_t skipped = 0;                       // cells missing, zero base, flat profiles

    const MatchEntry* best_entry() const {
        return best ? &entries[*best] : nullptr;
    }
};

// Genes whose fold change reproduces the task's expected fold at every mapped
// code, within epsilon, in every replicate. deviation = sum over replicates
// and codes of |fold - expected|; best = smallest deviation, ties broken by
// gene id then earliest timepoint.
MatchSet search_calculation(const ExpressionDataset& ds, const CalculationTask& task,
                            const std::string& task_name = "calculation");

// Genes whose expression at every target code sits strictly above the gene's
// own mean (over the input codes), and at or below it everywhere else, in
// every replicate. Candidate entries carry the per-replicate mean as theta.
MatchSet search_classification_candidates(const ExpressionDataset& ds, const ClassificationTask& task,
                                          const std::string& task_name = "classification");

// How the best classifier is chosen among candidates: widest margin (default)
// or smallest total slack score.
enum class ClassifierMode { MarginMax, ScoreMin };

// Re-scores candidates: per replicate, the distance from the mean to the
// closest value above and the closest at/below; threshold becomes the
// midpoint of those two values; deviation = sum of both distances over
// replicates. Picks the best by mode, ties broken by gene id then timepoint.
MatchSet select_best_classifier(const ExpressionDataset& ds, MatchSet candidates,
                                ClassifierMode mode = ClassifierMode::MarginMax);

// Largest-gap binarization of one expression profile across codes.
// DegenerateProfile when all values are equal.
struct BinaryProfile {
    double threshold = 0.0;                  // midpoint of the widest adjacent gap
    std::vector<std::uint8_t> bits;          // value > threshold, per code position
    double separation = 0.0;                 // gap width
};
BinaryProfile binary_profile(std::span<const double> values);

// Genes whose largest-gap binarization equals `pattern` (over sorted input
// codes) in every replicate. deviation = mean separation across replicates;
// thresholds carry the per-replicate gap midpoints; best = widest separation.
MatchSet search_binary_pattern(const ExpressionDataset& ds, std::span<const std::uint8_t> pattern,
                               const std::string& task_name = "binary");

// Count of distinct solving assignments per timepoint. Calculation and
// classification count matching genes; binary tasks count the product over
// bit planes of per-plane match counts. Overflow if a product leaves uint64.
struct MatchCount {
    double timepoint = 0.0;
    std::vector<std::uint64_t> per_bit;      // binary tasks only
    std::uint64_t count = 0;
};
std::vector<MatchCount> count_matching_networks(const ExpressionDataset& ds, const TaskSpec& task);

// Decoded integer per input code from a bank of bit-plane genes: bit b comes
// from bit_genes[b] being strictly above its per-replicate threshold in every
// replicate at `timepoint`.
std::vector<std::uint64_t> decode_binary_outputs(const ExpressionDataset& ds,
                                                 std::span<const GeneId> bit_genes,
                                                 const std::vector<std::map<int, double>>& thresholds,
                                                 double timepoint);

// Reverse breadth-first expansion from the output genes, following edges
// backwards, stopping at input genes or depth_limit. The result's network is
// the induced subgraph on every visited gene. Outputs that no input gene
// reaches within the limit produce a warning on the SubGRNN.
SubGRNN extract_subgrnn(const RegulatoryNetwork& net, std::vector<GeneId> output_genes,
                        const std::set<GeneId>& input_genes, unsigned depth_limit = 4);

// Fallback when no curated input-responsive set exists: top K genes by
// variance of code-mean expression (mean over time and replicates per code).
std::set<GeneId> default_input_genes(const ExpressionDataset& ds, std::size_t top_k = 10);

}  // namespace grnn
