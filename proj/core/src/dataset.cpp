#include "grnn/dataset.hpp"

#include <algorithm>
#include <cmath>

namespace grnn {

std::vector<int> DatasetAxes::input_codes() const {
    std::vector<int> out;
    out.reserve(codes.size());
    for (int c : codes) {
        if (c != base_code) out.push_back(c);
    }
    return out;
}

std::size_t ExpressionDataset::gene_index(const GeneId& g) const {
    auto it = gene_index_.find(g);
    if (it == gene_index_.end()) throw UnknownGene("no gene '" + g + "' in dataset");
    return it->second;
}

namespace {
template <typename T>
std::size_t axis_index(const std::vector<T>& axis, T value, const char* what) {
    auto it = std::find(axis.begin(), axis.end(), value);
    if (it == axis.end()) throw UnknownAxis(std::string(what) + " not present in dataset axes");
    return static_cast<std::size_t>(it - axis.begin());
}
}  // namespace

std::size_t ExpressionDataset::code_index(int code) const {
    return axis_index(axes_.codes, code, "input code");
}
std::size_t ExpressionDataset::time_index(double time) const {
    return axis_index(axes_.timepoints, time, "timepoint");
}
std::size_t ExpressionDataset::replicate_index(int rep) const {
    return axis_index(axes_.replicates, rep, "replicate");
}

double ExpressionDataset::expression_at(const GeneId& g, int code, double time, int rep) const {
    std::size_t idx = cell_index(gene_index(g), code_index(code), time_index(time), replicate_index(rep));
    if (!present_[idx]) {
        throw MissingCell("gene '" + g + "' has no measurement for the requested cell");
    }
    return values_[idx];
}

double ExpressionDataset::fold_change(const GeneId& g, int code, double time, int rep) const {
    double base = expression_at(g, axes_.base_code, time, rep);
    if (base == 0.0) {
        throw DivisionByZeroBase("gene '" + g + "' has zero base expression");
    }
    return expression_at(g, code, time, rep) / base;
}

std::pair<double, double> ExpressionDataset::min_max_expression(const GeneId& g, int code) const {
    std::size_t gi = gene_index(g);
    std::size_t ci = code_index(code);
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (std::size_t ti = 0; ti < n_times(); ++ti) {
        for (std::size_t ri = 0; ri < n_replicates(); ++ri) {
            std::size_t idx = cell_index(gi, ci, ti, ri);
            if (!present_[idx]) continue;
            double v = values_[idx];
            if (!any) {
                lo = hi = v;
                any = true;
            } else {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    }
    if (!any) throw MissingCell("gene '" + g + "' has no measurements for the requested code");
    return {lo, hi};
}

std::pair<double, double> ExpressionDataset::min_max_expression(const GeneId& g, int code, int rep) const {
    std::size_t gi = gene_index(g);
    std::size_t ci = code_index(code);
    std::size_t ri = replicate_index(rep);
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (std::size_t ti = 0; ti < n_times(); ++ti) {
        std::size_t idx = cell_index(gi, ci, ti, ri);
        if (!present_[idx]) continue;
        double v = values_[idx];
        if (!any) {
            lo = hi = v;
            any = true;
        } else {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!any) throw MissingCell("gene '" + g + "' has no measurements for the requested code/replicate");
    return {lo, hi};
}

ExpressionDataset ExpressionDataset::copy_with_values(std::vector<double> values) const {
    if (values.size() != values_.size()) {
        throw ValueError("replacement value vector has wrong size");
    }
    ExpressionDataset out(*this);
    out.values_ = std::move(values);
    return out;
}

bool ExpressionDataset::same_shape(const ExpressionDataset& other) const {
    return genes_ == other.genes_ && axes_.codes == other.axes_.codes &&
           axes_.timepoints == other.axes_.timepoints && axes_.replicates == other.axes_.replicates &&
           axes_.base_code == other.axes_.base_code;
}

ExpressionDataset::Builder::Builder(DatasetAxes axes) {
    if (axes.codes.empty() || axes.timepoints.empty() || axes.replicates.empty()) {
        throw ValueError("dataset axes must be non-empty");
    }
    auto sorted_unique = [](auto v) {
        std::sort(v.begin(), v.end());
        return std::adjacent_find(v.begin(), v.end()) == v.end();
    };
    if (!sorted_unique(axes.codes) || !sorted_unique(axes.timepoints) || !sorted_unique(axes.replicates)) {
        throw ValueError("dataset axis values must be unique");
    }
    std::sort(axes.codes.begin(), axes.codes.end());
    std::sort(axes.timepoints.begin(), axes.timepoints.end());
    std::sort(axes.replicates.begin(), axes.replicates.end());
    ds_.axes_ = std::move(axes);
}

ExpressionDataset::Builder& ExpressionDataset::Builder::add_gene(const GeneId& g) {
    if (g.empty()) throw ValueError("gene id must be non-empty");
    if (!ds_.gene_index_.emplace(g, ds_.genes_.size()).second) {
        throw DuplicateGene("gene '" + g + "' listed twice");
    }
    ds_.genes_.push_back(g);
    std::size_t cells = ds_.n_codes() * ds_.n_times() * ds_.n_replicates();
    ds_.values_.resize(ds_.values_.size() + cells, 0.0);
    ds_.present_.resize(ds_.present_.size() + cells, 0);
    return *this;
}

ExpressionDataset::Builder& ExpressionDataset::Builder::set(const GeneId& g, int code, double time,
                                                            int rep, double value) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
        throw ValueError("expression values must be finite and non-negative");
    }
    std::size_t idx = ds_.cell_index(ds_.gene_index(g), ds_.code_index(code), ds_.time_index(time),
                                     ds_.replicate_index(rep));
    ds_.values_[idx] = value;
    ds_.present_[idx] = 1;
    return *this;
}

ExpressionDataset ExpressionDataset::Builder::build() {
    if (built_) throw ValueError("builder already consumed");
    built_ = true;
    return std::move(ds_);
}

}  // namespace grnn
