#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "catcov/dataset.hpp"
#include "catcov/numerics.hpp"
#include "catcov/simplex.hpp"

namespace catcov {

/// One simplex embedding per dataset variable, in dataset order.
using Embeddings = std::vector<SimplexEmbedding>;

Embeddings build_embeddings(const CategoricalDataset& data);

/// Cross-covariance A^ij of two variables' simplex coordinates,
/// (k_i - 1) x (k_j - 1).
struct CrossMatrix {
    std::size_t var_i = 0;
    std::size_t var_j = 0;
    Eigen::MatrixXd entries;

    Eigen::Index rows() const noexcept { return entries.rows(); }
    Eigen::Index cols() const noexcept { return entries.cols(); }
};

/// sigma = max over orthogonal L of trace(A L^T), with the maximizer.
struct CovarianceResult {
    double sigma = 0;
    Eigen::MatrixXd rotation;        // L, (k_i - 1) x (k_j - 1)
    Eigen::VectorXd singular_values; // nonincreasing
};

/// Gini variance (1/(2W^2)) sum_ab w_a w_b [x_a != x_b], evaluated as
/// (1 - sum_c p_c^2) / 2.
double gini_variance(const CategoricalDataset& data, std::size_t variable);

/// A^ij = V_i^T (P_ij - p_i p_j^T) V_j where P_ij is the weighted joint
/// distribution and V the simplex vertex matrices. This equals the pairwise
/// double sum (1/(2W^2)) sum_ab w_a w_b (v_i(a) - v_i(b))^T (v_j(a) - v_j(b)).
CrossMatrix cross_matrix(const CategoricalDataset& data, std::size_t var_i, std::size_t var_j,
                         const Embeddings& embeddings);

/// SVD route: A = U D V^T, L = U V^T, sigma = trace(D). The zero matrix gives
/// L = I. Only sigma is unique when singular values repeat or vanish.
CovarianceResult covariance_svd(const Eigen::MatrixXd& cross, const SvdOptions& options = {});
inline CovarianceResult covariance_svd(const CrossMatrix& cross, const SvdOptions& options = {}) {
    return covariance_svd(cross.entries, options);
}

/// Newton route on the stationarity system, used as an oracle and fallback.
/// Rectangular inputs are zero-padded to square; the returned rotation is the
/// block of the padded solution matching `cross`.
CovarianceResult covariance_newton(const Eigen::MatrixXd& cross, double tolerance = 1e-12, int max_iter = 100);
inline CovarianceResult covariance_newton(const CrossMatrix& cross, double tolerance = 1e-12, int max_iter = 100) {
    return covariance_newton(cross.entries, tolerance, max_iter);
}

/// J x J matrix: Gini variances on the diagonal, SVD covariances elsewhere.
/// Each unordered pair is computed once. Numerical failures are rethrown
/// naming the pair.
Eigen::MatrixXd covariance_matrix(const CategoricalDataset& data);
Eigen::MatrixXd covariance_matrix(const CategoricalDataset& data, const Embeddings& embeddings);

/// rho_ij = sigma_ij / sqrt(sigma_ii sigma_jj). Entries involving a
/// zero-variance variable are marked undefined (and hold NaN).
struct CorrelationMatrix {
    Eigen::MatrixXd rho;
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> defined;

    bool all_defined() const { return defined.all(); }
};

CorrelationMatrix correlation_from_covariance(const Eigen::MatrixXd& covariance);
CorrelationMatrix correlation_matrix(const CategoricalDataset& data);

} // namespace catcov
