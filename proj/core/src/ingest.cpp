#include "grnn/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace grnn {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

bool parse_double_strict(const std::string& s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

bool parse_int_strict(const std::string& s, int& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

std::string format_time(double t) {
    if (t == std::floor(t) && std::abs(t) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(t));
        return buf;
    }
    return format_double(t);
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream create_or_throw(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

}  // namespace

std::string cell_label(int code, double time, int rep) {
    return "c" + std::to_string(code) + "_t" + format_time(time) + "_r" + std::to_string(rep);
}

bool parse_cell_label(const std::string& label, int& code, double& time, int& rep) {
    if (label.size() < 6 || label[0] != 'c') return false;
    std::size_t t_pos = label.find("_t");
    if (t_pos == std::string::npos) return false;
    std::size_t r_pos = label.find("_r", t_pos + 2);
    if (r_pos == std::string::npos) return false;
    return parse_int_strict(label.substr(1, t_pos - 1), code) &&
           parse_double_strict(label.substr(t_pos + 2, r_pos - t_pos - 2), time) &&
           parse_int_strict(label.substr(r_pos + 2), rep);
}

ExpressionDataset parse_expression_table(std::istream& in, std::optional<int> base_code) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("expression table is empty");
    auto header = split_csv_line(line);
    if (header.empty() || header[0] != "gene") {
        throw SchemaError("expression table header must start with 'gene'");
    }
    struct Column {
        int code;
        double time;
        int rep;
    };
    std::vector<Column> columns;
    std::set<std::string> seen_labels;
    std::set<int> codes;
    std::set<double> times;
    std::set<int> reps;
    for (std::size_t i = 1; i < header.size(); ++i) {
        Column col{};
        if (!parse_cell_label(header[i], col.code, col.time, col.rep)) {
            throw SchemaError("bad expression column label '" + header[i] + "'");
        }
        if (!seen_labels.insert(header[i]).second) {
            throw SchemaError("duplicate expression column '" + header[i] + "'");
        }
        columns.push_back(col);
        codes.insert(col.code);
        times.insert(col.time);
        reps.insert(col.rep);
    }
    if (columns.empty()) throw SchemaError("expression table has no measurement columns");

    DatasetAxes axes;
    axes.codes.assign(codes.begin(), codes.end());
    axes.timepoints.assign(times.begin(), times.end());
    axes.replicates.assign(reps.begin(), reps.end());
    if (base_code) {
        if (!codes.count(*base_code)) throw UnknownAxis("requested base code is not a dataset column");
        axes.base_code = *base_code;
    } else {
        axes.base_code = codes.count(0) ? 0 : *codes.begin();
    }

    ExpressionDataset::Builder builder(std::move(axes));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != columns.size() + 1) {
            throw SchemaError("row for '" + (fields.empty() ? std::string() : fields[0]) +
                              "' has wrong field count");
        }
        const std::string& gene = fields[0];
        builder.add_gene(gene);
        for (std::size_t i = 0; i < columns.size(); ++i) {
            const std::string& cell = fields[i + 1];
            if (cell.empty()) continue;  // missing measurement
            double v;
            if (!parse_double_strict(cell, v)) {
                throw ValueError("unparseable expression value '" + cell + "' for gene '" + gene + "'");
            }
            builder.set(gene, columns[i].code, columns[i].time, columns[i].rep, v);
        }
    }
    if (builder.n_genes() == 0) throw SchemaError("expression table has no gene rows");
    return builder.build();
}

ExpressionDataset load_expression_table(const std::string& path, std::optional<int> base_code) {
    auto in = open_or_throw(path);
    return parse_expression_table(in, base_code);
}

void serialize_expression_table(const ExpressionDataset& ds, std::ostream& out) {
    const auto& ax = ds.axes();
    out << "gene";
    for (int code : ax.codes) {
        for (double t : ax.timepoints) {
            for (int rep : ax.replicates) {
                out << ',' << cell_label(code, t, rep);
            }
        }
    }
    out << '\n';
    for (std::size_t g = 0; g < ds.n_genes(); ++g) {
        out << ds.genes()[g];
        for (std::size_t ci = 0; ci < ds.n_codes(); ++ci) {
            for (std::size_t ti = 0; ti < ds.n_times(); ++ti) {
                for (std::size_t ri = 0; ri < ds.n_replicates(); ++ri) {
                    out << ',';
                    std::size_t idx = ds.cell_index(g, ci, ti, ri);
                    if (ds.raw_present()[idx]) out << format_double(ds.raw_values()[idx]);
                }
            }
        }
        out << '\n';
    }
}

void save_expression_table(const ExpressionDataset& ds, const std::string& path) {
    auto out = create_or_throw(path);
    serialize_expression_table(ds, out);
}

RegulatoryNetwork parse_edge_list(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("edge list is empty");
    auto header = split_csv_line(line);
    if (header.size() != 3 || header[0] != "source" || header[1] != "target" ||
        header[2] != "correlation") {
        throw SchemaError("edge list header must be 'source,target,correlation'");
    }
    RegulatoryNetwork::Builder builder;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 3) throw SchemaError("edge row must have three fields");
        std::optional<double> rho;
        if (!fields[2].empty()) {
            double v;
            if (!parse_double_strict(fields[2], v)) {
                throw ValueError("unparseable correlation '" + fields[2] + "'");
            }
            rho = v;
        }
        builder.add_edge(fields[0], fields[1], rho);
    }
    return builder.build();
}

RegulatoryNetwork load_edge_list(const std::string& path) {
    auto in = open_or_throw(path);
    return parse_edge_list(in);
}

void serialize_edge_list(const RegulatoryNetwork& net, std::ostream& out) {
    out << "source,target,correlation\n";
    for (const Edge& e : net.edges()) {
        out << net.nodes()[e.source] << ',' << net.nodes()[e.target] << ',';
        if (e.rho) out << format_double(*e.rho);
        out << '\n';
    }
}

void save_edge_list(const RegulatoryNetwork& net, const std::string& path) {
    auto out = create_or_throw(path);
    serialize_edge_list(net, out);
}

CountTable parse_count_table(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("count table is empty");
    auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "gene" || header[1] != "length_bp") {
        throw SchemaError("count table header must be 'gene,length_bp,{samples...}'");
    }
    CountTable table;
    table.samples.assign(header.begin() + 2, header.end());
    std::set<std::string> names;
    for (const auto& s : table.samples) {
        if (s.empty() || !names.insert(s).second) throw SchemaError("sample labels must be unique and non-empty");
    }
    std::set<GeneId> genes;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw SchemaError("count row for '" + (fields.empty() ? std::string() : fields[0]) +
                              "' has wrong field count");
        }
        if (!genes.insert(fields[0]).second) throw DuplicateGene("gene '" + fields[0] + "' listed twice");
        table.genes.push_back(fields[0]);
        double len;
        if (!parse_double_strict(fields[1], len) || !(len > 0.0)) {
            throw ValueError("gene length must be a positive number, got '" + fields[1] + "'");
        }
        table.length_bp.push_back(len);
        for (std::size_t s = 0; s < table.samples.size(); ++s) {
            double v;
            if (!parse_double_strict(fields[2 + s], v) || !(v >= 0.0) || !std::isfinite(v)) {
                throw ValueError("counts must be finite and non-negative, got '" + fields[2 + s] + "'");
            }
            table.counts.push_back(v);
        }
    }
    if (table.genes.empty()) throw SchemaError("count table has no gene rows");
    return table;
}

CountTable load_count_table(const std::string& path) {
    auto in = open_or_throw(path);
    return parse_count_table(in);
}

TpmTable tpm_normalize(const CountTable& counts) {
    std::size_t n_genes = counts.genes.size();
    std::size_t n_samples = counts.samples.size();
    TpmTable tpm;
    tpm.genes = counts.genes;
    tpm.samples = counts.samples;
    tpm.values.assign(n_genes * n_samples, 0.0);

    // reads per kilobase, then scale each sample column to a million
    std::vector<double> rpk(n_genes * n_samples);
    for (std::size_t g = 0; g < n_genes; ++g) {
        double kb = counts.length_bp[g] / 1000.0;
        for (std::size_t s = 0; s < n_samples; ++s) {
            rpk[g * n_samples + s] = counts.count_at(g, s) / kb;
        }
    }
    for (std::size_t s = 0; s < n_samples; ++s) {
        double total = 0.0;
        for (std::size_t g = 0; g < n_genes; ++g) total += rpk[g * n_samples + s];
        if (total == 0.0) throw EmptySample("sample '" + counts.samples[s] + "' has zero total signal");
        for (std::size_t g = 0; g < n_genes; ++g) {
            tpm.values[g * n_samples + s] = rpk[g * n_samples + s] / total * 1e6;
        }
    }
    return tpm;
}

ExpressionDataset tpm_as_expression(const TpmTable& tpm, std::optional<int> base_code) {
    std::ostringstream buf;
    serialize_tpm_table(tpm, buf);
    std::istringstream in(buf.str());
    // reuse the expression parser so label validation lives in one place
    std::string header;
    std::getline(in, header);
    auto fields = split_csv_line(header);
    for (std::size_t i = 1; i < fields.size(); ++i) {
        int code, rep;
        double time;
        if (!parse_cell_label(fields[i], code, time, rep)) {
            throw SchemaError("sample label '" + fields[i] + "' is not a c{code}_t{time}_r{rep} label");
        }
    }
    std::istringstream again(buf.str());
    return parse_expression_table(again, base_code);
}

void serialize_tpm_table(const TpmTable& tpm, std::ostream& out) {
    out << "gene";
    for (const auto& s : tpm.samples) out << ',' << s;
    out << '\n';
    for (std::size_t g = 0; g < tpm.genes.size(); ++g) {
        out << tpm.genes[g];
        for (std::size_t s = 0; s < tpm.samples.size(); ++s) {
            out << ',' << format_double(tpm.value_at(g, s));
        }
        out << '\n';
    }
}

}  // namespace grnn
