#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "catcov/covariance.hpp"
#include "catcov/dataset.hpp"
#include "catcov/rspca.hpp"

namespace catcov {

enum class Format { csv, json };

/// `x` rounded to 12 significant digits, with -0 mapped to 0.
double round_significant(double x);

/// Shortest round-trip text of `round_significant(x)`.
std::string format_number(double x);

/// RFC 4180 quoting when the field needs it.
std::string csv_field(const std::string& s);

/// Square matrix with a header row and column of names. Undefined entries
/// (`defined(i, j) == false`) are empty in CSV and null in JSON.
void write_matrix(std::ostream& os, Format format, const std::vector<std::string>& names, const Eigen::MatrixXd& m,
                  const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>* defined = nullptr);

/// Columns instance_id, weight, label, pc1..pcK (CSV) or an array of rows (JSON).
void write_scores(std::ostream& os, Format format, const ScoreTable& table, Eigen::Index first_component = 0);

/// {variables, categories, layout, eigenvalues, eigenvectors, mean}.
void write_model_json(std::ostream& os, const PcaModel& model);

/// Columns mode, eigenvalue.
void write_scree(std::ostream& os, Format format, const std::vector<std::pair<int, double>>& modes);

/// Ranked importance with a `selected` flag on the first `top`.
void write_selection(std::ostream& os, Format format, const std::vector<VariableImportance>& ranking, std::size_t top);

/// Text lines such as "-0.63 d[eye](medium->light)" per component, or JSON.
void write_interpretations(std::ostream& os, Format format, const std::vector<ComponentInterpretation>& items,
                           const PcaModel& model);

/// Instance-level CSV (header + one row per instance) with an optional
/// trailing weight column.
void write_dataset_csv(std::ostream& os, const CategoricalDataset& data, bool with_weights);

/// 800x600 scatter of the first two score columns. Instances sharing a label
/// collapse to one point whose area follows their total weight; axes show the
/// share of total variance carried by each component.
std::string scatter_svg(const ScoreTable& table, const PcaModel& model);

/// 800x600 eigenvalue-versus-mode line plot.
std::string scree_svg(const std::vector<std::pair<int, double>>& modes);

} // namespace catcov
