#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "grnn/dataset.hpp"
#include "grnn/errors.hpp"

namespace grnn {

// Directed regulatory edge. rho is the signed correlation weight in [-1, 1];
// absent when the source data had no value for the pair.
struct Edge {
    std::size_t source = 0;
    std::size_t target = 0;
    std::optional<double> rho;
};

// Directed graph over gene nodes. Parallel duplicate edges are rejected;
// self-loops are allowed (propagation ignores them).
class RegulatoryNetwork {
public:
    class Builder;

    RegulatoryNetwork() = default;  // empty network

    const std::vector<GeneId>& nodes() const { return nodes_; }
    std::size_t n_nodes() const { return nodes_.size(); }
    bool has_node(const GeneId& g) const { return node_index_.count(g) != 0; }
    std::size_t node_index(const GeneId& g) const;  // UnknownGene

    const std::vector<Edge>& edges() const { return edges_; }
    // indices into edges() leaving / entering a node
    std::span<const std::size_t> out_edges(std::size_t node) const;
    std::span<const std::size_t> in_edges(std::size_t node) const;

    std::size_t out_degree_no_self(std::size_t node) const;

    // Copy with every absent rho replaced via fill(source_id, target_id).
    template <typename Fn>
    RegulatoryNetwork with_filled_correlations(Fn&& fill) const {
        RegulatoryNetwork out(*this);
        for (auto& e : out.edges_) {
            if (!e.rho) e.rho = fill(nodes_[e.source], nodes_[e.target]);
        }
        return out;
    }

    // Induced subgraph on `keep` (node ids must exist). Edge rho is preserved.
    RegulatoryNetwork induced_subgraph(const std::set<GeneId>& keep) const;

private:
    friend class Builder;
    void rebuild_adjacency();

    std::vector<GeneId> nodes_;
    std::unordered_map<GeneId, std::size_t> node_index_;
    std::vector<Edge> edges_;
    // CSR-style adjacency
    std::vector<std::size_t> out_offsets_, out_list_;
    std::vector<std::size_t> in_offsets_, in_list_;
};

class RegulatoryNetwork::Builder {
public:
    Builder& add_node(const GeneId& g);  // idempotent; ValueError on empty id
    // adds missing endpoints; DuplicateEdge on repeated (source, target);
    // ValueError when |rho| > 1 or rho is not finite
    Builder& add_edge(const GeneId& source, const GeneId& target, std::optional<double> rho);

    RegulatoryNetwork build();

private:
    RegulatoryNetwork net_;
    std::set<std::pair<std::size_t, std::size_t>> seen_;
    bool built_ = false;
};

// Extracted subnetwork: partitioned genes plus per-output decision thresholds
// (classification/binary tasks) and the timepoint the match was found at.
struct SubGRNN {
    std::vector<GeneId> output_genes;              // search order
    std::vector<GeneId> input_genes;               // sorted
    std::vector<GeneId> hidden_genes;              // sorted
    RegulatoryNetwork network;                     // induced on the union
    double timepoint = 0.0;
    std::map<GeneId, std::map<int, double>> thresholds;  // gene -> replicate -> theta
    std::string task_name;
    std::vector<std::string> warnings;             // e.g. outputs no input gene reaches
};

}  // namespace grnn
