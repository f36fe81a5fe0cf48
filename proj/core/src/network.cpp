#include "grnn/network.hpp"

#include <algorithm>
#include <cmath>

namespace grnn {

std::size_t RegulatoryNetwork::node_index(const GeneId& g) const {
    auto it = node_index_.find(g);
    if (it == node_index_.end()) throw UnknownGene("no node '" + g + "' in network");
    return it->second;
}

std::span<const std::size_t> RegulatoryNetwork::out_edges(std::size_t node) const {
    return {out_list_.data() + out_offsets_[node], out_offsets_[node + 1] - out_offsets_[node]};
}

std::span<const std::size_t> RegulatoryNetwork::in_edges(std::size_t node) const {
    return {in_list_.data() + in_offsets_[node], in_offsets_[node + 1] - in_offsets_[node]};
}

std::size_t RegulatoryNetwork::out_degree_no_self(std::size_t node) const {
    std::size_t d = 0;
    for (std::size_t ei : out_edges(node)) {
        if (edges_[ei].target != node) ++d;
    }
    return d;
}

void RegulatoryNetwork::rebuild_adjacency() {
    std::size_t n = nodes_.size();
    out_offsets_.assign(n + 1, 0);
    in_offsets_.assign(n + 1, 0);
    for (const Edge& e : edges_) {
        ++out_offsets_[e.source + 1];
        ++in_offsets_[e.target + 1];
    }
    for (std::size_t i = 0; i < n; ++i) {
        out_offsets_[i + 1] += out_offsets_[i];
        in_offsets_[i + 1] += in_offsets_[i];
    }
    out_list_.resize(edges_.size());
    in_list_.resize(edges_.size());
    std::vector<std::size_t> out_pos(out_offsets_.begin(), out_offsets_.end() - 1);
    std::vector<std::size_t> in_pos(in_offsets_.begin(), in_offsets_.end() - 1);
    for (std::size_t ei = 0; ei < edges_.size(); ++ei) {
        out_list_[out_pos[edges_[ei].source]++] = ei;
        in_list_[in_pos[edges_[ei].target]++] = ei;
    }
}

RegulatoryNetwork RegulatoryNetwork::induced_subgraph(const std::set<GeneId>& keep) const {
    Builder b;
    for (const GeneId& g : keep) {
        node_index(g);  // validate
        b.add_node(g);
    }
    for (const Edge& e : edges_) {
        const GeneId& s = nodes_[e.source];
        const GeneId& t = nodes_[e.target];
        if (keep.count(s) && keep.count(t)) b.add_edge(s, t, e.rho);
    }
    return b.build();
}

RegulatoryNetwork::Builder& RegulatoryNetwork::Builder::add_node(const GeneId& g) {
    if (g.empty()) throw ValueError("node id must be non-empty");
    if (net_.node_index_.emplace(g, net_.nodes_.size()).second) {
        net_.nodes_.push_back(g);
    }
    return *this;
}

RegulatoryNetwork::Builder& RegulatoryNetwork::Builder::add_edge(const GeneId& source,
                                                                 const GeneId& target,
                                                                 std::optional<double> rho) {
    if (rho && (!std::isfinite(*rho) || std::abs(*rho) > 1.0)) {
        throw ValueError("edge correlation must be finite and within [-1, 1]");
    }
    add_node(source);
    add_node(target);
    std::size_t s = net_.node_index_.at(source);
    std::size_t t = net_.node_index_.at(target);
    if (!seen_.emplace(s, t).second) {
        throw DuplicateEdge("edge " + source + " -> " + target + " listed twice");
    }
    net_.edges_.push_back(Edge{s, t, rho});
    return *this;
}

RegulatoryNetwork RegulatoryNetwork::Builder::build() {
    if (built_) throw ValueError("builder already consumed");
    built_ = true;
    net_.rebuild_adjacency();
    return std::move(net_);
}

}  // namespace grnn
