#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace catcov {

struct CategoricalVariable {
    std::string name;
    std::vector<std::string> categories; // index -> label, first-appearance order
    std::vector<int> codes;              // per instance, in [0, categories.size())

    int category_count() const noexcept { return static_cast<int>(categories.size()); }
};

/// Column-oriented categorical instances with nonnegative per-instance weights.
/// Immutable after construction.
class CategoricalDataset {
public:
    /// Validates equal column lengths, code ranges, weights >= 0 and a positive
    /// weight total. Throws `InputError`.
    CategoricalDataset(std::vector<CategoricalVariable> variables, Eigen::VectorXd weights);

    /// All weights 1.
    explicit CategoricalDataset(std::vector<CategoricalVariable> variables);

    const std::vector<CategoricalVariable>& variables() const noexcept { return variables_; }
    const CategoricalVariable& variable(std::size_t i) const { return variables_.at(i); }
    std::size_t variable_count() const noexcept { return variables_.size(); }

    /// Throws `InputError` for an unknown name.
    std::size_t index_of(const std::string& name) const;

    Eigen::Index instance_count() const noexcept { return weights_.size(); }
    const Eigen::VectorXd& weights() const noexcept { return weights_; }
    double total_weight() const noexcept { return total_weight_; }

    /// Category labels of one instance joined with `sep`, e.g. "light-fair".
    std::string instance_label(Eigen::Index instance, const std::string& sep = "-") const;

    /// Dataset restricted to the given variables (in the given order).
    CategoricalDataset select(std::span<const std::size_t> variables) const;

private:
    std::vector<CategoricalVariable> variables_;
    Eigen::VectorXd weights_;
    double total_weight_ = 0;
};

enum class MissingPolicy { own_category, drop_row };

/// Label used for missing cells under `MissingPolicy::own_category`.
inline constexpr const char* missing_label = "missing";

struct CsvOptions {
    std::optional<std::string> weight_column;
    MissingPolicy missing = MissingPolicy::own_category;
    char delimiter = ',';
};

/// Instance-level CSV: header row, one instance per record. Every non-weight
/// column becomes a categorical variable. Errors name the offending line.
CategoricalDataset load_csv(const std::string& path, const CsvOptions& options = {});
CategoricalDataset parse_csv(std::istream& in, const CsvOptions& options = {},
                             const std::string& source = "<input>");

/// Two-way table of nonnegative integer counts. First header cell is a corner
/// label; when the variable names are not given they are taken from a corner
/// of the form "row\col" or "row/col", else "row" and "col".
CategoricalDataset load_contingency(const std::string& path,
                                    std::optional<std::string> row_variable = std::nullopt,
                                    std::optional<std::string> col_variable = std::nullopt);
CategoricalDataset parse_contingency(std::istream& in, std::optional<std::string> row_variable = std::nullopt,
                                     std::optional<std::string> col_variable = std::nullopt,
                                     const std::string& source = "<input>");

/// One weighted instance per nonzero cell (row-major); every label is kept
/// as a category even when its margin is zero.
CategoricalDataset from_contingency(const Eigen::MatrixXd& counts, std::string row_variable,
                                    std::vector<std::string> row_labels, std::string col_variable,
                                    std::vector<std::string> col_labels);

/// Weighted category probabilities p_c = sum_{a: x_a = c} w_a / W.
Eigen::VectorXd frequencies(const CategoricalDataset& data, std::size_t variable);
Eigen::VectorXd frequencies(const CategoricalDataset& data, const std::string& variable);

/// Weighted joint counts, k_i x k_j.
Eigen::MatrixXd tabulate(const CategoricalDataset& data, std::size_t var_i, std::size_t var_j);

/// Splits CSV text into records per RFC 4180 (quoted fields, "" escapes,
/// embedded delimiters and newlines). Each record carries its starting line.
struct CsvRecord {
    std::size_t line = 0;
    std::vector<std::string> fields;
};
std::vector<CsvRecord> read_csv_records(std::istream& in, char delimiter, const std::string& source);

} // namespace catcov
