#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "grnn/dataset.hpp"
#include "grnn/network.hpp"
#include "grnn/tasks.hpp"

namespace grnn {

// One task to hide in the generated data. Calculation and classification
// tasks take exactly one gene id; binary tasks one id per bit plane.
struct PlantedTask {
    TaskSpec task;
    std::vector<GeneId> genes;
};

// Recipe for a synthetic dataset + network with known solutions. Input genes
// ramp with the code, hidden layers sit between inputs and the planted
// output genes, and the remaining budget becomes decoy genes whose profiles
// stay a safe distance from every built-in task pattern.
struct BenchmarkSpec {
    std::size_t n_genes = 200;
    unsigned n_hidden_layers = 2;
    unsigned hidden_width = 8;
    std::size_t n_input_genes = 4;
    double edge_density = 0.25;          // wiring probability per candidate link, (0, 1]
    double expression_noise = 0.0;       // relative half-width of bounded noise, [0, 0.04]
    double missing_rho_fraction = 0.0;   // fraction of edges left without a weight
    std::uint64_t seed = 0;
    std::vector<int> codes = {1, 2, 3, 4, 5, 6, 7};  // input codes; 0 is added as base
    std::vector<double> timepoints = {4.0, 8.0, 24.0};
    std::vector<int> replicates = {1, 2};
    std::vector<PlantedTask> tasks;
};

// What was hidden where; enough to verify every search result exactly.
struct PlantedRecord {
    std::string task_name;
    std::string kind;  // "calculation" | "classification" | "binary"
    std::vector<GeneId> genes;
    std::map<int, double> expected_fold;                   // calculation
    std::set<int> target_codes;                            // classification
    std::vector<std::vector<std::uint8_t>> bit_patterns;   // binary, [bit][code position]
    std::vector<std::uint64_t> expected_values;            // binary decode targets
    std::map<GeneId, std::map<int, double>> thresholds;    // gene -> replicate -> theta
};

struct GroundTruth {
    std::uint64_t seed = 0;
    std::vector<GeneId> input_genes;
    std::vector<PlantedRecord> planted;
};

struct Benchmark {
    ExpressionDataset dataset;
    RegulatoryNetwork network;
    GroundTruth truth;
};

// fibonacci + lucky + collatz planted over 200 genes, noise-free.
BenchmarkSpec default_benchmark_spec();

// Appends a collatz bit bank (one gene per bit plane) to the spec's tasks;
// returns the bank's gene ids in bit order.
std::vector<GeneId> plant_collatz_bank(BenchmarkSpec& spec);

// Deterministically generates the dataset, the layered network, and the
// ground-truth manifest. At zero noise every planted gene is recovered by
// its search algorithm with zero deviation / full margin, and no decoy
// outranks it. SpecError on an invalid or unsatisfiable spec.
Benchmark generate_benchmark(const BenchmarkSpec& spec);

// JSON round-trip for the spec (flat document, field names as in the struct).
BenchmarkSpec parse_benchmark_spec_json(const std::string& text);
std::string benchmark_spec_json(const BenchmarkSpec& spec);

// Cross-condition correlation ensembles with a planted stable fraction:
// each edge joins its own private gene pair, sample series are constructed
// so the per-condition correlation is exact — stable edges keep one sign
// with low spread, dynamic edges alternate sign across conditions.
struct StableFractionBench {
    RegulatoryNetwork network;
    std::vector<ExpressionDataset> datasets;  // one per condition
    std::vector<std::pair<GeneId, GeneId>> stable_edges;
    std::vector<std::pair<GeneId, GeneId>> dynamic_edges;
    double planted_fraction = 0.0;  // realized after rounding to whole edges
};
StableFractionBench plant_stable_fraction(std::size_t n_edges, std::size_t n_datasets,
                                          double fraction, std::uint64_t seed);

}  // namespace grnn
