// Micro-benchmarks for the hot paths: synthetic data generation, the three
// search modes, perturbation propagation and scoring, and the stability root.
// Sizes are chosen to bracket the scales the command-line pipeline touches.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "grnn/edge_stability.hpp"
#include "grnn/ingest.hpp"
#include "grnn/lyapunov.hpp"
#include "grnn/network.hpp"
#include "grnn/perturb.hpp"
#include "grnn/search.hpp"
#include "grnn/synth.hpp"
#include "grnn/tasks.hpp"

namespace {

const grnn::Benchmark& cached_benchmark(std::size_t n_genes) {
    static std::map<std::size_t, grnn::Benchmark> cache;
    auto it = cache.find(n_genes);
    if (it == cache.end()) {
        grnn::BenchmarkSpec spec = grnn::default_benchmark_spec();
        spec.n_genes = n_genes;
        spec.seed = 1;
        it = cache.emplace(n_genes, grnn::generate_benchmark(spec)).first;
    }
    return it->second;
}

void BM_GenerateBenchmark(benchmark::State& state) {
    grnn::BenchmarkSpec spec = grnn::default_benchmark_spec();
    spec.n_genes = std::size_t(state.range(0));
    spec.seed = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(grnn::generate_benchmark(spec));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateBenchmark)->Arg(200)->Arg(1000)->Arg(4000);

void BM_SearchCalculation(benchmark::State& state) {
    const auto& bench = cached_benchmark(std::size_t(state.range(0)));
    const grnn::TaskSpec task = grnn::make_task("fibonacci");
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            grnn::search_calculation(bench.dataset, task.calculation(), "fibonacci"));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SearchCalculation)->Arg(200)->Arg(1000)->Arg(4000);

void BM_SelectClassifier(benchmark::State& state) {
    const auto& bench = cached_benchmark(std::size_t(state.range(0)));
    const grnn::TaskSpec task = grnn::make_task("lucky");
    for (auto _ : state) {
        auto cands = grnn::search_classification_candidates(
            bench.dataset, task.classification(), "lucky");
        benchmark::DoNotOptimize(
            grnn::select_best_classifier(bench.dataset, std::move(cands)));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SelectClassifier)->Arg(200)->Arg(1000)->Arg(4000);

void BM_SearchBinaryPlane(benchmark::State& state) {
    const auto& bench = cached_benchmark(std::size_t(state.range(0)));
    const grnn::TaskSpec task = grnn::make_task("collatz");
    const auto& plane = task.binary().bit_patterns.front();
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            grnn::search_binary_pattern(bench.dataset, plane, "collatz"));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SearchBinaryPlane)->Arg(200)->Arg(1000)->Arg(4000);

grnn::RegulatoryNetwork random_network(std::size_t n, double density, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> rho(-1.0, 1.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    grnn::RegulatoryNetwork::Builder nb;
    for (std::size_t i = 0; i < n; ++i) nb.add_node("g" + std::to_string(i));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && coin(rng) < density)
                nb.add_edge("g" + std::to_string(i), "g" + std::to_string(j), rho(rng));
    return nb.build();
}

void BM_PropagationRow(benchmark::State& state) {
    const std::size_t n = std::size_t(state.range(0));
    const grnn::RegulatoryNetwork net = random_network(n, 0.2, 11);
    std::size_t src = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(grnn::propagation_row(net, src, 4));
        src = (src + 1) % n;
    }
}
BENCHMARK(BM_PropagationRow)->Arg(16)->Arg(64)->Arg(128);

void BM_ApplyGenewise(benchmark::State& state) {
    const auto& bench = cached_benchmark(200);
    grnn::PerturbationConfig cfg;
    const grnn::GeneId probe = bench.truth.input_genes.front();
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            grnn::apply_genewise(bench.dataset, bench.network, probe, 1, cfg));
    }
}
BENCHMARK(BM_ApplyGenewise);

void BM_RankCriticality(benchmark::State& state) {
    const auto& bench = cached_benchmark(200);
    const grnn::TaskSpec task = grnn::make_task("fibonacci");
    const std::set<grnn::GeneId> inputs(bench.truth.input_genes.begin(),
                                        bench.truth.input_genes.end());
    grnn::SubGRNN sub = grnn::extract_subgrnn(bench.network, {"fib_out"}, inputs);
    sub.timepoint = bench.dataset.axes().timepoints.front();
    sub.task_name = "fibonacci";
    grnn::PerturbationConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            grnn::rank_gene_criticality(bench.dataset, sub, task, cfg));
    }
}
BENCHMARK(BM_RankCriticality);

void BM_CriticalRoot(benchmark::State& state) {
    const grnn::TrajectoryParams params;
    for (auto _ : state) {
        benchmark::DoNotOptimize(grnn::critical_s_numeric(params));
    }
}
BENCHMARK(BM_CriticalRoot);

void BM_ClassifyEdges(benchmark::State& state) {
    const grnn::StableFractionBench bench = grnn::plant_stable_fraction(
        std::size_t(state.range(0)), 6, 0.3, 7);
    for (auto _ : state) {
        auto ensembles =
            grnn::edge_correlation_ensembles(bench.network, bench.datasets);
        benchmark::DoNotOptimize(grnn::classify_edges(std::move(ensembles)));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ClassifyEdges)->Arg(50)->Arg(200);

void BM_TpmNormalize(benchmark::State& state) {
    const std::size_t n_genes = std::size_t(state.range(0));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> len(100.0, 5000.0);
    std::uniform_real_distribution<double> count(0.5, 10000.0);
    grnn::CountTable ct;
    for (std::size_t g = 0; g < n_genes; ++g) {
        ct.genes.push_back("g" + std::to_string(g));
        ct.length_bp.push_back(len(rng));
    }
    for (int s = 0; s < 8; ++s) ct.samples.push_back("s" + std::to_string(s));
    ct.counts.resize(n_genes * ct.samples.size());
    for (double& c : ct.counts) c = count(rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(grnn::tpm_normalize(ct));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TpmNormalize)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
