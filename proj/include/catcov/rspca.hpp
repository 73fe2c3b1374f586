#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "catcov/covariance.hpp"
#include "catcov/dataset.hpp"
#include "catcov/simplex.hpp"

namespace catcov {

/// Placement of each variable's simplex block inside the concatenated
/// per-instance vector of vertex coordinates.
struct LrsvLayout {
    std::vector<Eigen::Index> offsets;
    std::vector<Eigen::Index> widths; // k_i - 1

    Eigen::Index dimension() const noexcept {
        return offsets.empty() ? 0 : offsets.back() + widths.back();
    }
    std::size_t blocks() const noexcept { return widths.size(); }

    static LrsvLayout of(const Embeddings& embeddings);
};

/// Eigendecomposition of the covariance matrix of the concatenated simplex
/// coordinates. Eigenvalues are descending; each eigenvector's
/// largest-magnitude entry is positive.
struct PcaModel {
    std::vector<std::string> variables;
    std::vector<std::vector<std::string>> categories;
    LrsvLayout layout;
    Eigen::VectorXd mean;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors; // P x components
    /// Index of column 0 in the full model; nonzero after `restrict_components`.
    Eigen::Index first_component = 0;

    Eigen::Index dimension() const noexcept { return layout.dimension(); }
    Eigen::Index component_count() const noexcept { return eigenvalues.size(); }
};

/// Concatenated vertex coordinates of one instance.
Eigen::VectorXd lrsv_vector(const CategoricalDataset& data, const Embeddings& embeddings, Eigen::Index instance);

/// Block covariance matrix whose (i, j) block is `cross_matrix(i, j)`.
Eigen::MatrixXd lrsv_covariance(const CategoricalDataset& data, const Embeddings& embeddings);

/// Throws `InputError` when every variable is constant (P = 0).
PcaModel fit(const CategoricalDataset& data, const Embeddings& embeddings);
PcaModel fit(const CategoricalDataset& data);

/// Projections of centered instances on the leading components.
struct ScoreTable {
    std::vector<std::string> labels; // joined category labels, "light-fair"
    Eigen::VectorXd weights;
    Eigen::MatrixXd scores; // N x n_components
};

/// `n_components` must be in [1, model.component_count()].
ScoreTable scores(const PcaModel& model, const CategoricalDataset& data, Eigen::Index n_components);

struct InterpretOptions {
    int max_terms = 4;            // distinct atoms per variable block
    double relative_epsilon = 0.05; // stop once block residual <= eps * ||block||
    bool refit = false;           // least-squares refit of all selected atoms (OMP)
    int max_iterations = 100;     // per block
};

struct InterpretationTerm {
    double coefficient = 0;
    BasisAtom atom;
};

struct BlockResidual {
    std::string variable;
    double norm = 0;    // ||block of eigenvector||
    double epsilon = 0; // absolute stopping threshold
    double residual = 0;
};

struct ComponentInterpretation {
    Eigen::Index component = 0; // 0-based, in the full model
    std::vector<InterpretationTerm> terms; // by |coefficient| descending
    std::vector<BlockResidual> blocks;
    double residual_norm = 0; // over all blocks
};

/// Expresses one eigenvector as a sparse combination of edge and center atoms
/// by matching pursuit run separately in every variable block: the atom with
/// the largest normalized correlation with the block residual is selected and
/// its coefficient grows by the projection of the residual (or, with
/// `refit`, all selected coefficients are re-solved by least squares).
/// `component` is 0-based relative to the model's columns.
ComponentInterpretation interpret(const PcaModel& model, Eigen::Index component, const Embeddings& embeddings,
                                  const InterpretOptions& options = {});

/// Atom name such as "d[eye](light->medium)" or "c[eye](blue)".
std::string atom_name(const BasisAtom& atom, const std::vector<std::string>& categories);

/// (1-based mode number, eigenvalue).
std::vector<std::pair<int, double>> scree(const PcaModel& model);

struct VariableImportance {
    std::size_t variable = 0; // dataset index
    std::string name;
    double importance = 0;
};

/// importance_i = sum_{m < n} lambda_m ||e_m restricted to block i||^2, ranked
/// descending with ties in dataset order.
std::vector<VariableImportance> variable_importance(const PcaModel& model, Eigen::Index n_components);

/// Refit on a subset of variables (dataset indices, in the order given).
PcaModel refit_subset(const CategoricalDataset& data, std::span<const std::size_t> variables);

/// Full-model components [first, first + count), for scoring on a range.
PcaModel restrict_components(const PcaModel& model, Eigen::Index first, Eigen::Index count);

} // namespace catcov
