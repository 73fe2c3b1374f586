#include "catcov/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <unordered_map>
#include <unordered_set>

#include "catcov/error.hpp"

namespace catcov {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

std::string at_line(const std::string& source, std::size_t line) {
    return source + ":" + std::to_string(line) + ": ";
}

// Category encoder assigning indices in first-appearance order.
class Encoder {
public:
    int encode(const std::string& label) {
        auto [it, inserted] = index_.try_emplace(label, static_cast<int>(labels_.size()));
        if (inserted) labels_.push_back(label);
        return it->second;
    }
    std::vector<std::string> take_labels() { return std::move(labels_); }

private:
    std::unordered_map<std::string, int> index_;
    std::vector<std::string> labels_;
};

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    return in;
}

} // namespace

CategoricalDataset::CategoricalDataset(std::vector<CategoricalVariable> variables, Eigen::VectorXd weights)
    : variables_(std::move(variables)), weights_(std::move(weights)) {
    std::unordered_set<std::string> names;
    for (const auto& v : variables_) {
        if (!names.insert(v.name).second) throw InputError("duplicate variable name '" + v.name + "'");
        if (static_cast<Eigen::Index>(v.codes.size()) != weights_.size())
            throw InputError("variable '" + v.name + "' has " + std::to_string(v.codes.size()) +
                             " instances, expected " + std::to_string(weights_.size()));
        if (v.categories.empty() && !v.codes.empty())
            throw InputError("variable '" + v.name + "' has no categories");
        for (int c : v.codes)
            if (c < 0 || c >= v.category_count())
                throw InputError("variable '" + v.name + "' has an out-of-range category code");
    }
    if (!weights_.allFinite() || (weights_.array() < 0).any())
        throw InputError("weights must be finite and nonnegative");
    total_weight_ = weights_.sum();
    if (!(total_weight_ > 0)) throw InputError("dataset is empty (total weight is zero)");
}

namespace {
Eigen::VectorXd unit_weights(const std::vector<CategoricalVariable>& variables) {
    return Eigen::VectorXd::Ones(variables.empty() ? 0 : static_cast<Eigen::Index>(variables.front().codes.size()));
}
} // namespace

CategoricalDataset::CategoricalDataset(std::vector<CategoricalVariable> variables)
    : CategoricalDataset(variables, unit_weights(variables)) {}

std::size_t CategoricalDataset::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < variables_.size(); ++i)
        if (variables_[i].name == name) return i;
    throw InputError("unknown variable '" + name + "'");
}

std::string CategoricalDataset::instance_label(Eigen::Index instance, const std::string& sep) const {
    std::string label;
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        if (i > 0) label += sep;
        const auto& v = variables_[i];
        label += v.categories[static_cast<std::size_t>(v.codes[static_cast<std::size_t>(instance)])];
    }
    return label;
}

CategoricalDataset CategoricalDataset::select(std::span<const std::size_t> variables) const {
    if (variables.empty()) throw InputError("empty variable selection");
    std::vector<CategoricalVariable> picked;
    picked.reserve(variables.size());
    for (std::size_t i : variables) {
        if (i >= variables_.size()) throw InputError("variable index out of range");
        picked.push_back(variables_[i]);
    }
    return CategoricalDataset(std::move(picked), weights_);
}

std::vector<CsvRecord> read_csv_records(std::istream& in, char delimiter, const std::string& source) {
    std::vector<CsvRecord> records;
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) text.erase(0, 3);

    std::size_t line = 1;
    std::size_t pos = 0;
    const std::size_t n = text.size();
    while (pos < n) {
        CsvRecord record;
        record.line = line;
        std::string field;
        bool quoted_field = false;
        bool end_of_record = false;
        while (!end_of_record) {
            if (pos < n && text[pos] == '"' && field.empty() && !quoted_field) {
                quoted_field = true;
                const std::size_t open_line = line;
                ++pos;
                for (;;) {
                    if (pos >= n) throw InputError(at_line(source, open_line) + "unterminated quoted field");
                    const char c = text[pos++];
                    if (c == '"') {
                        if (pos < n && text[pos] == '"') {
                            field += '"';
                            ++pos;
                        } else {
                            break;
                        }
                    } else {
                        if (c == '\n') ++line;
                        field += c;
                    }
                }
                continue;
            }
            if (pos >= n) {
                end_of_record = true;
            } else {
                const char c = text[pos++];
                if (c == delimiter) {
                    record.fields.push_back(std::move(field));
                    field.clear();
                    quoted_field = false;
                    continue;
                }
                if (c == '\r' && pos < n && text[pos] == '\n') continue;
                if (c == '\n') {
                    ++line;
                    end_of_record = true;
                } else if (quoted_field) {
                    throw InputError(at_line(source, line) + "unexpected character after closing quote");
                } else {
                    field += c;
                }
            }
        }
        record.fields.push_back(std::move(field));
        const bool blank = record.fields.size() == 1 && trim(record.fields.front()).empty() && !quoted_field;
        if (!blank) records.push_back(std::move(record));
    }
    return records;
}

CategoricalDataset parse_csv(std::istream& in, const CsvOptions& options, const std::string& source) {
    const auto records = read_csv_records(in, options.delimiter, source);
    if (records.empty()) throw InputError(source + ": missing header row");

    const auto& header = records.front().fields;
    std::vector<std::string> names;
    names.reserve(header.size());
    std::unordered_set<std::string> seen;
    for (const auto& h : header) {
        std::string name = trim(h);
        if (!seen.insert(name).second)
            throw InputError(at_line(source, records.front().line) + "duplicate column name '" + name + "'");
        names.push_back(std::move(name));
    }

    std::optional<std::size_t> weight_col;
    if (options.weight_column) {
        const auto it = std::find(names.begin(), names.end(), *options.weight_column);
        if (it == names.end())
            throw InputError(source + ": weight column '" + *options.weight_column + "' not found in header");
        weight_col = static_cast<std::size_t>(it - names.begin());
    }
    if (names.size() - (weight_col ? 1 : 0) == 0) throw InputError(source + ": no categorical columns");

    std::vector<Encoder> encoders(names.size());
    std::vector<std::vector<int>> codes(names.size());
    std::vector<double> weights;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != names.size())
            throw InputError(at_line(source, rec.line) + "expected " + std::to_string(names.size()) +
                             " fields, found " + std::to_string(rec.fields.size()));
        double weight = 1.0;
        if (weight_col) {
            const std::string cell = trim(rec.fields[*weight_col]);
            const char* end = cell.data() + cell.size();
            auto [ptr, ec] = std::from_chars(cell.data(), end, weight);
            if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(weight))
                throw InputError(at_line(source, rec.line) + "weight '" + cell + "' is not a number");
            if (weight < 0) throw InputError(at_line(source, rec.line) + "negative weight " + cell);
        }
        bool has_missing = false;
        for (std::size_t c = 0; c < names.size(); ++c)
            if (c != weight_col && trim(rec.fields[c]).empty()) has_missing = true;
        if (has_missing && options.missing == MissingPolicy::drop_row) continue;

        for (std::size_t c = 0; c < names.size(); ++c) {
            if (c == weight_col) continue;
            std::string label = trim(rec.fields[c]);
            if (label.empty()) label = missing_label;
            codes[c].push_back(encoders[c].encode(label));
        }
        weights.push_back(weight);
    }
    if (weights.empty()) throw InputError(source + ": dataset is empty");

    std::vector<CategoricalVariable> variables;
    for (std::size_t c = 0; c < names.size(); ++c) {
        if (c == weight_col) continue;
        variables.push_back({names[c], encoders[c].take_labels(), std::move(codes[c])});
    }
    Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
    try {
        return CategoricalDataset(std::move(variables), std::move(w));
    } catch (const InputError& e) {
        throw InputError(source + ": " + e.what());
    }
}

CategoricalDataset load_csv(const std::string& path, const CsvOptions& options) {
    auto in = open_or_throw(path);
    return parse_csv(in, options, path);
}

CategoricalDataset from_contingency(const Eigen::MatrixXd& counts, std::string row_variable,
                                    std::vector<std::string> row_labels, std::string col_variable,
                                    std::vector<std::string> col_labels) {
    if (counts.rows() != static_cast<Eigen::Index>(row_labels.size()) ||
        counts.cols() != static_cast<Eigen::Index>(col_labels.size()))
        throw InputError("contingency table shape does not match its labels");
    if (!counts.allFinite() || (counts.array() < 0).any()) throw InputError("contingency table has a negative cell");

    CategoricalVariable rows{std::move(row_variable), std::move(row_labels), {}};
    CategoricalVariable cols{std::move(col_variable), std::move(col_labels), {}};
    std::vector<double> weights;
    for (Eigen::Index r = 0; r < counts.rows(); ++r) {
        for (Eigen::Index c = 0; c < counts.cols(); ++c) {
            if (counts(r, c) == 0) continue;
            rows.codes.push_back(static_cast<int>(r));
            cols.codes.push_back(static_cast<int>(c));
            weights.push_back(counts(r, c));
        }
    }
    Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
    std::vector<CategoricalVariable> vars;
    vars.push_back(std::move(rows));
    vars.push_back(std::move(cols));
    return CategoricalDataset(std::move(vars), std::move(w));
}

CategoricalDataset parse_contingency(std::istream& in, std::optional<std::string> row_variable,
                                     std::optional<std::string> col_variable, const std::string& source) {
    const auto records = read_csv_records(in, ',', source);
    if (records.empty()) throw InputError(source + ": empty contingency table");
    const auto& header = records.front().fields;
    if (header.size() < 2) throw InputError(at_line(source, records.front().line) + "table has no columns");
    if (records.size() < 2) throw InputError(source + ": table has no rows");

    const std::string corner = trim(header.front());
    if (!row_variable || !col_variable) {
        std::string r = "row", c = "col";
        const auto split = corner.find_first_of("\\/");
        if (split != std::string::npos && split > 0 && split + 1 < corner.size()) {
            r = trim(corner.substr(0, split));
            c = trim(corner.substr(split + 1));
        }
        if (!row_variable) row_variable = r;
        if (!col_variable) col_variable = c;
    }

    std::vector<std::string> col_labels;
    std::unordered_set<std::string> seen;
    for (std::size_t j = 1; j < header.size(); ++j) {
        col_labels.push_back(trim(header[j]));
        if (!seen.insert(col_labels.back()).second)
            throw InputError(at_line(source, records.front().line) + "duplicate column label '" + col_labels.back() + "'");
    }

    const auto rows = static_cast<Eigen::Index>(records.size() - 1);
    const auto cols = static_cast<Eigen::Index>(col_labels.size());
    Eigen::MatrixXd counts(rows, cols);
    std::vector<std::string> row_labels;
    seen.clear();
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& rec = records[static_cast<std::size_t>(r + 1)];
        if (static_cast<Eigen::Index>(rec.fields.size()) != cols + 1)
            throw InputError(at_line(source, rec.line) + "expected " + std::to_string(cols + 1) + " fields, found " +
                             std::to_string(rec.fields.size()));
        row_labels.push_back(trim(rec.fields.front()));
        if (!seen.insert(row_labels.back()).second)
            throw InputError(at_line(source, rec.line) + "duplicate row label '" + row_labels.back() + "'");
        for (Eigen::Index c = 0; c < cols; ++c) {
            const std::string cell = trim(rec.fields[static_cast<std::size_t>(c + 1)]);
            long long value = 0;
            const char* end = cell.data() + cell.size();
            auto [ptr, ec] = std::from_chars(cell.data(), end, value);
            if (cell.empty() || ec != std::errc() || ptr != end)
                throw InputError(at_line(source, rec.line) + "cell '" + cell + "' is not an integer count");
            if (value < 0) throw InputError(at_line(source, rec.line) + "negative cell " + cell);
            counts(r, c) = static_cast<double>(value);
        }
    }
    try {
        return from_contingency(counts, *row_variable, std::move(row_labels), *col_variable, std::move(col_labels));
    } catch (const InputError& e) {
        throw InputError(source + ": " + e.what());
    }
}

CategoricalDataset load_contingency(const std::string& path, std::optional<std::string> row_variable,
                                    std::optional<std::string> col_variable) {
    auto in = open_or_throw(path);
    return parse_contingency(in, std::move(row_variable), std::move(col_variable), path);
}

Eigen::VectorXd frequencies(const CategoricalDataset& data, std::size_t variable) {
    if (variable >= data.variable_count()) throw InputError("unknown variable index " + std::to_string(variable));
    const auto& v = data.variable(variable);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(v.category_count());
    const auto& w = data.weights();
    for (Eigen::Index a = 0; a < data.instance_count(); ++a) p(v.codes[static_cast<std::size_t>(a)]) += w(a);
    return p / data.total_weight();
}

Eigen::VectorXd frequencies(const CategoricalDataset& data, const std::string& variable) {
    return frequencies(data, data.index_of(variable));
}

Eigen::MatrixXd tabulate(const CategoricalDataset& data, std::size_t var_i, std::size_t var_j) {
    if (var_i >= data.variable_count() || var_j >= data.variable_count())
        throw InputError("unknown variable index");
    const auto& vi = data.variable(var_i);
    const auto& vj = data.variable(var_j);
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(vi.category_count(), vj.category_count());
    const auto& w = data.weights();
    for (Eigen::Index a = 0; a < data.instance_count(); ++a) {
        const auto s = static_cast<std::size_t>(a);
        t(vi.codes[s], vj.codes[s]) += w(a);
    }
    return t;
}

} // namespace catcov
