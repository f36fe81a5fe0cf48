#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "grnn/errors.hpp"

namespace grnn {

using GeneId = std::string;

// Axis labels of an expression matrix. Codes are small integers describing
// the input condition applied to the culture; one of them (base_code) is the
// reference condition used as the fold-change denominator.
struct DatasetAxes {
    std::vector<int> codes;          // ascending, includes base_code when measured
    std::vector<double> timepoints;  // hours, ascending
    std::vector<int> replicates;     // ascending
    int base_code = 0;

    // codes without the base; the domain a task pattern ranges over
    std::vector<int> input_codes() const;
};

// Immutable expression matrix over (gene, code, time, replicate) with
// per-cell missing flags. Values are non-negative finite reals.
class ExpressionDataset {
public:
    class Builder;

    const DatasetAxes& axes() const { return axes_; }
    const std::vector<GeneId>& genes() const { return genes_; }
    std::size_t n_genes() const { return genes_.size(); }

    bool has_gene(const GeneId& g) const { return gene_index_.count(g) != 0; }
    std::size_t gene_index(const GeneId& g) const;  // UnknownGene

    std::size_t code_index(int code) const;        // UnknownAxis
    std::size_t time_index(double time) const;     // UnknownAxis
    std::size_t replicate_index(int rep) const;    // UnknownAxis

    std::size_t n_codes() const { return axes_.codes.size(); }
    std::size_t n_times() const { return axes_.timepoints.size(); }
    std::size_t n_replicates() const { return axes_.replicates.size(); }

    // flat index into raw storage
    std::size_t cell_index(std::size_t g, std::size_t ci, std::size_t ti, std::size_t ri) const {
        return ((g * n_codes() + ci) * n_times() + ti) * n_replicates() + ri;
    }

    bool present_at(std::size_t g, std::size_t ci, std::size_t ti, std::size_t ri) const {
        return present_[cell_index(g, ci, ti, ri)] != 0;
    }

    // raw accessors for hot loops; prefer expression_at elsewhere
    const std::vector<double>& raw_values() const { return values_; }
    const std::vector<std::uint8_t>& raw_present() const { return present_; }

    // Expression level of a cell; MissingCell when the cell was not measured.
    double expression_at(const GeneId& g, int code, double time, int rep) const;

    // Expression relative to the base code at the same (time, replicate).
    // DivisionByZeroBase when the base expression is zero.
    double fold_change(const GeneId& g, int code, double time, int rep) const;

    // Min/max over timepoints for one (gene, code), pooled across replicates.
    // Missing cells are skipped; MissingCell if nothing was measured.
    std::pair<double, double> min_max_expression(const GeneId& g, int code) const;
    // Same but for a single replicate.
    std::pair<double, double> min_max_expression(const GeneId& g, int code, int rep) const;

    // Structural copy with replaced cell values (same axes, genes, missing
    // mask); the perturbation engine's output path.
    ExpressionDataset copy_with_values(std::vector<double> values) const;

    bool same_shape(const ExpressionDataset& other) const;

private:
    friend class Builder;
    ExpressionDataset() = default;

    DatasetAxes axes_;
    std::vector<GeneId> genes_;
    std::unordered_map<GeneId, std::size_t> gene_index_;
    std::vector<double> values_;
    std::vector<std::uint8_t> present_;
};

// Mutable staging area; build() freezes into an immutable dataset.
class ExpressionDataset::Builder {
public:
    explicit Builder(DatasetAxes axes);

    Builder& add_gene(const GeneId& g);  // DuplicateGene, ValueError on empty id
    // ValueError on negative/NaN/inf values; UnknownGene/UnknownAxis on bad keys
    Builder& set(const GeneId& g, int code, double time, int rep, double value);

    std::size_t n_genes() const { return ds_.genes_.size(); }

    ExpressionDataset build();

private:
    ExpressionDataset ds_;
    bool built_ = false;
};

}  // namespace grnn
