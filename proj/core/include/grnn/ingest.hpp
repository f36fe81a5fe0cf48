#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "grnn/dataset.hpp"
#include "grnn/network.hpp"

namespace grnn {

// --- expression tables ------------------------------------------------------
//
// CSV with header `gene,c{code}_t{time}_r{rep},...`. A cell left empty is a
// missing measurement, not zero. Axes are inferred from the header; labels
// absent from the header become missing cells for every gene.

// base_code: explicit reference code; default picks 0 when present, else the
// smallest code. UnknownAxis when an explicit base is not in the header.
ExpressionDataset parse_expression_table(std::istream& in, std::optional<int> base_code = {});
ExpressionDataset load_expression_table(const std::string& path, std::optional<int> base_code = {});

// Emits the full axis cross product, missing cells as empty fields, floats
// with 17 significant digits; parse(serialize(ds)) reproduces ds bit-exactly.
void serialize_expression_table(const ExpressionDataset& ds, std::ostream& out);
void save_expression_table(const ExpressionDataset& ds, const std::string& path);

// --- edge lists ---------------------------------------------------------------
//
// CSV with header `source,target,correlation`; empty correlation = unknown.

RegulatoryNetwork parse_edge_list(std::istream& in);
RegulatoryNetwork load_edge_list(const std::string& path);
void serialize_edge_list(const RegulatoryNetwork& net, std::ostream& out);
void save_edge_list(const RegulatoryNetwork& net, const std::string& path);

// --- raw count tables and TPM -------------------------------------------------
//
// CSV with header `gene,length_bp,{sample}...`; counts are non-negative,
// lengths strictly positive.

struct CountTable {
    std::vector<GeneId> genes;
    std::vector<double> length_bp;       // per gene
    std::vector<std::string> samples;    // column labels
    std::vector<double> counts;          // gene-major [g * samples + s]

    double count_at(std::size_t g, std::size_t s) const { return counts[g * samples.size() + s]; }
};

CountTable parse_count_table(std::istream& in);
CountTable load_count_table(const std::string& path);

struct TpmTable {
    std::vector<GeneId> genes;
    std::vector<std::string> samples;
    std::vector<double> values;          // gene-major, each sample column sums to 1e6

    double value_at(std::size_t g, std::size_t s) const { return values[g * samples.size() + s]; }
};

// Reads-per-kilobase scaled to a million per sample. EmptySample when a
// sample has zero total signal.
TpmTable tpm_normalize(const CountTable& counts);

// TPM table as an expression dataset when all sample labels follow the
// c{code}_t{time}_r{rep} scheme; SchemaError otherwise.
ExpressionDataset tpm_as_expression(const TpmTable& tpm, std::optional<int> base_code = {});

void serialize_tpm_table(const TpmTable& tpm, std::ostream& out);

// 17 significant digits, enough to round-trip any double exactly.
std::string format_double(double v);

// Column label helpers shared by parser, serializer, and synthetic writers.
std::string cell_label(int code, double time, int rep);
bool parse_cell_label(const std::string& label, int& code, double& time, int& rep);

}  // namespace grnn
