#include "catcov/covariance.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "catcov/error.hpp"

namespace catcov {

Embeddings build_embeddings(const CategoricalDataset& data) {
    Embeddings out;
    out.reserve(data.variable_count());
    for (const auto& v : data.variables()) out.emplace_back(v.category_count());
    return out;
}

double gini_variance(const CategoricalDataset& data, std::size_t variable) {
    const Eigen::VectorXd p = frequencies(data, variable);
    return (1.0 - p.squaredNorm()) / 2.0;
}

CrossMatrix cross_matrix(const CategoricalDataset& data, std::size_t var_i, std::size_t var_j,
                         const Embeddings& embeddings) {
    if (var_i >= data.variable_count() || var_j >= data.variable_count())
        throw InputError("cross_matrix: unknown variable index");
    if (embeddings.size() != data.variable_count())
        throw InputError("cross_matrix: embeddings do not match the dataset");
    const Eigen::MatrixXd joint = tabulate(data, var_i, var_j) / data.total_weight();
    const Eigen::VectorXd p_i = joint.rowwise().sum();
    const Eigen::VectorXd p_j = joint.colwise().sum().transpose();
    const Eigen::MatrixXd centered = joint - p_i * p_j.transpose();
    const auto& v_i = embeddings[var_i].vertices();
    const auto& v_j = embeddings[var_j].vertices();
    return {var_i, var_j, v_i.transpose() * centered * v_j};
}

CovarianceResult covariance_svd(const Eigen::MatrixXd& cross, const SvdOptions& options) {
    CovarianceResult out;
    if (cross.size() == 0) {
        out.rotation = Eigen::MatrixXd::Zero(cross.rows(), cross.cols());
        return out;
    }
    const auto d = svd(cross, options);
    out.singular_values = d.singular_values;
    out.rotation = d.U * d.V.transpose();
    out.sigma = d.singular_values.sum();
    return out;
}

CovarianceResult covariance_newton(const Eigen::MatrixXd& cross, double tolerance, int max_iter) {
    CovarianceResult out;
    if (cross.size() == 0) {
        out.rotation = Eigen::MatrixXd::Zero(cross.rows(), cross.cols());
        return out;
    }
    const Eigen::Index n = std::max(cross.rows(), cross.cols());
    Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(n, n);
    padded.topLeftCorner(cross.rows(), cross.cols()) = cross;

    NewtonOptions options;
    options.tolerance = tolerance;
    options.max_iter = max_iter;
    const auto pt = newton_orthogonal_stationarity(padded, options);

    out.rotation = pt.rotation.topLeftCorner(cross.rows(), cross.cols());
    out.sigma = (cross * out.rotation.transpose()).trace();
    // At the maximum the multiplier is PSD and its spectrum is the singular values.
    const auto eig = sym_eig(pt.multiplier);
    out.singular_values = eig.values.head(std::min(cross.rows(), cross.cols())).cwiseMax(0.0);
    return out;
}

Eigen::MatrixXd covariance_matrix(const CategoricalDataset& data, const Embeddings& embeddings) {
    const auto j = static_cast<Eigen::Index>(data.variable_count());
    Eigen::MatrixXd cov(j, j);
    for (Eigen::Index a = 0; a < j; ++a) {
        const auto ia = static_cast<std::size_t>(a);
        cov(a, a) = gini_variance(data, ia);
        for (Eigen::Index b = a + 1; b < j; ++b) {
            const auto ib = static_cast<std::size_t>(b);
            try {
                cov(a, b) = cov(b, a) = covariance_svd(cross_matrix(data, ia, ib, embeddings)).sigma;
            } catch (const NumericalError& e) {
                throw NumericalError("covariance of '" + data.variable(ia).name + "' and '" +
                                         data.variable(ib).name + "': " + e.what(),
                                     e.matrix());
            }
        }
    }
    return cov;
}

Eigen::MatrixXd covariance_matrix(const CategoricalDataset& data) {
    return covariance_matrix(data, build_embeddings(data));
}

CorrelationMatrix correlation_from_covariance(const Eigen::MatrixXd& covariance) {
    const Eigen::Index j = covariance.rows();
    CorrelationMatrix out;
    out.rho.resize(j, j);
    out.defined.resize(j, j);
    for (Eigen::Index a = 0; a < j; ++a) {
        for (Eigen::Index b = 0; b < j; ++b) {
            const double denom = covariance(a, a) * covariance(b, b);
            const bool ok = covariance(a, a) > 0 && covariance(b, b) > 0;
            out.defined(a, b) = ok;
            if (!ok)
                out.rho(a, b) = std::numeric_limits<double>::quiet_NaN();
            else
                out.rho(a, b) = a == b ? 1.0 : covariance(a, b) / std::sqrt(denom);
        }
    }
    return out;
}

CorrelationMatrix correlation_matrix(const CategoricalDataset& data) {
    return correlation_from_covariance(covariance_matrix(data));
}

} // namespace catcov
