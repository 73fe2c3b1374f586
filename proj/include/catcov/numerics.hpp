#pragma once

// Dense kernels for small matrices: one-sided Jacobi SVD, symmetric
// eigendecomposition, and the Newton solver for the orthogonal
// stationarity system {A L^T symmetric, L L^T = I}.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "catcov/error.hpp"
#include "catcov/random.hpp"

namespace catcov {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Thin SVD `m = U diag(s) V^T` with `r = min(rows, cols)` columns in U and V.
template <typename Scalar>
struct Svd {
    MatrixX<Scalar> U;
    VectorX<Scalar> singular_values; // nonincreasing, nonnegative
    MatrixX<Scalar> V;
    int sweeps = 0;
};

struct SvdOptions {
    double threshold = 1e-12; // relative off-diagonal mass |b_p.b_q| / (|b_p||b_q|)
    int max_sweeps = 100;
};

namespace detail {

template <typename Scalar>
Eigen::MatrixXd to_double(const MatrixX<Scalar>& m) {
    return m.template cast<double>();
}

// Extends the orthonormal columns [0, filled) of `q` to a full orthonormal set
// by Gram-Schmidt over the standard basis, in index order.
template <typename Scalar>
void complete_orthonormal(MatrixX<Scalar>& q, const std::vector<bool>& filled) {
    const Eigen::Index n = q.rows();
    Eigen::Index candidate = 0;
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
        if (filled[static_cast<std::size_t>(j)]) continue;
        for (; candidate < n; ++candidate) {
            VectorX<Scalar> v = VectorX<Scalar>::Unit(n, candidate);
            for (int pass = 0; pass < 2; ++pass) {
                for (Eigen::Index k = 0; k < q.cols(); ++k) {
                    if (k == j || (!filled[static_cast<std::size_t>(k)] && k > j)) continue;
                    v -= q.col(k).dot(v) * q.col(k);
                }
            }
            if (v.norm() > Scalar(0.5)) {
                q.col(j) = v.normalized();
                ++candidate;
                break;
            }
        }
    }
}

// One-sided Jacobi on a tall (rows >= cols) matrix.
template <typename Scalar>
Svd<Scalar> jacobi_svd_tall(MatrixX<Scalar> b, const SvdOptions& options) {
    using std::abs;
    using std::sqrt;
    const Eigen::Index m = b.rows();
    const Eigen::Index n = b.cols();
    MatrixX<Scalar> v = MatrixX<Scalar>::Identity(n, n);
    const Scalar threshold = static_cast<Scalar>(options.threshold);
    // Columns this short are numerical zeros; rotating them only churns noise.
    const Scalar zero_column = static_cast<Scalar>(std::max(m, n)) * std::numeric_limits<Scalar>::epsilon() * b.norm();
    const Scalar zero_column_sq = zero_column * zero_column;

    int sweep = 0;
    bool rotated = true;
    while (rotated) {
        if (sweep == options.max_sweeps)
            throw NumericalError("svd: no convergence after " + std::to_string(sweep) + " sweeps",
                                 to_double<Scalar>(b));
        ++sweep;
        rotated = false;
        for (Eigen::Index p = 0; p + 1 < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const Scalar alpha = b.col(p).squaredNorm();
                const Scalar beta = b.col(q).squaredNorm();
                const Scalar gamma = b.col(p).dot(b.col(q));
                if (gamma == Scalar(0) || abs(gamma) <= threshold * sqrt(alpha * beta)) continue;
                if (alpha <= zero_column_sq || beta <= zero_column_sq) continue;
                rotated = true;
                const Scalar zeta = (beta - alpha) / (Scalar(2) * gamma);
                const Scalar t = (zeta >= 0 ? Scalar(1) : Scalar(-1)) /
                                 (abs(zeta) + sqrt(Scalar(1) + zeta * zeta));
                const Scalar c = Scalar(1) / sqrt(Scalar(1) + t * t);
                const Scalar s = c * t;
                for (Eigen::Index i = 0; i < m; ++i) {
                    const Scalar bp = b(i, p), bq = b(i, q);
                    b(i, p) = c * bp - s * bq;
                    b(i, q) = s * bp + c * bq;
                }
                for (Eigen::Index i = 0; i < n; ++i) {
                    const Scalar vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
    }

    VectorX<Scalar> norms(n);
    for (Eigen::Index j = 0; j < n; ++j) norms(j) = b.col(j).norm();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index x, Eigen::Index y) { return norms(x) > norms(y); });

    Svd<Scalar> out;
    out.sweeps = sweep;
    out.singular_values.resize(n);
    out.U.setZero(m, n);
    out.V.resize(n, n);
    const Scalar largest = n > 0 ? norms(order.front()) : Scalar(0);
    const Scalar negligible =
        largest * static_cast<Scalar>(std::max(m, n)) * std::numeric_limits<Scalar>::epsilon();
    std::vector<bool> filled(static_cast<std::size_t>(n), false);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index src = order[static_cast<std::size_t>(j)];
        out.singular_values(j) = norms(src);
        out.V.col(j) = v.col(src);
        if (norms(src) > negligible && norms(src) > Scalar(0)) {
            out.U.col(j) = b.col(src) / norms(src);
            filled[static_cast<std::size_t>(j)] = true;
        }
    }
    complete_orthonormal(out.U, filled);
    return out;
}

} // namespace detail

/// Thin singular value decomposition by one-sided (Hestenes) Jacobi.
///
/// Zero singular values get left singular vectors completed from the standard
/// basis, so the zero matrix yields `U = I`, `V = I`. Throws `NumericalError`
/// when `options.max_sweeps` sweeps do not reach the off-diagonal threshold.
template <typename Derived>
Svd<typename Derived::Scalar> svd(const Eigen::MatrixBase<Derived>& m, const SvdOptions& options = {}) {
    using Scalar = typename Derived::Scalar;
    if (!m.allFinite()) throw InputError("svd: matrix has non-finite entries");
    if (m.rows() >= m.cols()) return detail::jacobi_svd_tall<Scalar>(m, options);
    Svd<Scalar> t = detail::jacobi_svd_tall<Scalar>(m.transpose(), options);
    std::swap(t.U, t.V);
    return t;
}

/// Sum of singular values.
template <typename Derived>
typename Derived::Scalar nuclear_norm(const Eigen::MatrixBase<Derived>& m) {
    return svd(m).singular_values.sum();
}

template <typename Scalar>
struct SymEig {
    VectorX<Scalar> values;  // descending
    MatrixX<Scalar> vectors; // orthonormal columns, matching `values`
};

/// Eigendecomposition of the symmetric part of `m`, eigenvalues descending.
template <typename Derived>
SymEig<typename Derived::Scalar> sym_eig(const Eigen::MatrixBase<Derived>& m) {
    using Scalar = typename Derived::Scalar;
    if (m.rows() != m.cols()) throw InputError("sym_eig: matrix is not square");
    if (!m.allFinite()) throw InputError("sym_eig: matrix has non-finite entries");
    SymEig<Scalar> out;
    if (m.rows() == 0) return out;
    const MatrixX<Scalar> sym = (m + m.transpose()) / Scalar(2);
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> solver(sym);
    if (solver.info() != Eigen::Success)
        throw NumericalError("sym_eig: eigensolver did not converge", detail::to_double<Scalar>(sym));
    out.values = solver.eigenvalues().reverse();
    out.vectors = solver.eigenvectors().rowwise().reverse();
    return out;
}

/// ||L L^T - I||_F; zero for matrices with orthonormal rows.
template <typename Derived>
typename Derived::Scalar orthogonality_defect(const Eigen::MatrixBase<Derived>& l) {
    using Scalar = typename Derived::Scalar;
    return (l * l.transpose() - MatrixX<Scalar>::Identity(l.rows(), l.rows())).norm();
}

/// Haar-distributed random orthogonal matrix (QR of a Gaussian matrix).
template <typename Scalar = double>
MatrixX<Scalar> random_orthogonal(Eigen::Index n, Rng& rng) {
    MatrixX<Scalar> g(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) g(i, j) = static_cast<Scalar>(rng.normal());
    Eigen::HouseholderQR<MatrixX<Scalar>> qr(g);
    MatrixX<Scalar> q = qr.householderQ();
    const MatrixX<Scalar> r = qr.matrixQR().template triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j)
        if (r(j, j) < Scalar(0)) q.col(j) = -q.col(j);
    return q;
}

/// Orthogonal R minimizing ||x R - y||_F (rows are paired observations).
template <typename DerivedX, typename DerivedY>
MatrixX<typename DerivedX::Scalar> procrustes_rotation(const Eigen::MatrixBase<DerivedX>& x,
                                                       const Eigen::MatrixBase<DerivedY>& y) {
    const auto d = svd(x.transpose() * y);
    return d.U * d.V.transpose();
}

struct NewtonOptions {
    double tolerance = 1e-12; // on both Frobenius residual norms
    int max_iter = 100;       // per start
    int random_starts = 3;    // in addition to the identity start
    std::uint64_t seed = 20020;
};

/// A solution of {A L^T = (A L^T)^T, L L^T = I}.
template <typename Scalar>
struct StationaryPoint {
    MatrixX<Scalar> rotation;   // L
    MatrixX<Scalar> multiplier; // symmetric part of A L^T (Lagrange multiplier)
    Scalar value = 0;           // trace(A L^T)
    Scalar symmetry_residual = 0;
    Scalar orthogonality_residual = 0;
    int iterations = 0;
};

namespace detail {

template <typename Scalar>
VectorX<Scalar> pack_residual(const MatrixX<Scalar>& sym_part, const MatrixX<Scalar>& orth_part) {
    const Eigen::Index n = sym_part.rows();
    VectorX<Scalar> f(n * n);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) f(k++) = sym_part(i, j) - sym_part(j, i);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) f(k++) = orth_part(i, j);
    return f;
}

template <typename Scalar>
VectorX<Scalar> stationarity_residual(const MatrixX<Scalar>& a, const MatrixX<Scalar>& l) {
    const Eigen::Index n = a.rows();
    return pack_residual<Scalar>(a * l.transpose(),
                                 l * l.transpose() - MatrixX<Scalar>::Identity(n, n));
}

template <typename Scalar>
MatrixX<Scalar> stationarity_jacobian(const MatrixX<Scalar>& a, const MatrixX<Scalar>& l) {
    const Eigen::Index n = a.rows();
    MatrixX<Scalar> jac(n * n, n * n);
    for (Eigen::Index q = 0; q < n; ++q) {
        for (Eigen::Index p = 0; p < n; ++p) {
            MatrixX<Scalar> dl = MatrixX<Scalar>::Zero(n, n);
            dl(p, q) = Scalar(1);
            jac.col(q * n + p) = pack_residual<Scalar>(a * dl.transpose(),
                                                       dl * l.transpose() + l * dl.transpose());
        }
    }
    return jac;
}

template <typename Scalar>
void update_residuals(const MatrixX<Scalar>& a, StationaryPoint<Scalar>& pt) {
    const Eigen::Index n = a.rows();
    const MatrixX<Scalar> s = a * pt.rotation.transpose();
    pt.symmetry_residual = (s - s.transpose()).norm();
    pt.orthogonality_residual = (pt.rotation * pt.rotation.transpose() - MatrixX<Scalar>::Identity(n, n)).norm();
    pt.multiplier = (s + s.transpose()) / Scalar(2);
    pt.value = s.trace();
}

// Damped Newton (minimum-norm steps, backtracking on the residual) from `start`.
// Returns false if the tolerance is not reached within `max_iter` iterations.
template <typename Scalar>
bool newton_solve(const MatrixX<Scalar>& a, MatrixX<Scalar> l, const NewtonOptions& options,
                  StationaryPoint<Scalar>& out) {
    const Eigen::Index n = a.rows();
    const Scalar tol = static_cast<Scalar>(options.tolerance);
    VectorX<Scalar> f = stationarity_residual<Scalar>(a, l);
    for (int it = 0; it <= options.max_iter; ++it) {
        out.rotation = l;
        out.iterations = it;
        update_residuals(a, out);
        if (out.symmetry_residual <= tol && out.orthogonality_residual <= tol) return true;
        if (it == options.max_iter) break;

        const MatrixX<Scalar> jac = stationarity_jacobian<Scalar>(a, l);
        const VectorX<Scalar> step = jac.completeOrthogonalDecomposition().solve(-f);
        const MatrixX<Scalar> dl = Eigen::Map<const MatrixX<Scalar>>(step.data(), n, n);
        Scalar t = 1;
        const Scalar f_norm = f.norm();
        bool accepted = false;
        for (int halving = 0; halving < 40; ++halving, t /= Scalar(2)) {
            const MatrixX<Scalar> trial = l + t * dl;
            const VectorX<Scalar> f_trial = stationarity_residual<Scalar>(a, trial);
            if (f_trial.norm() < f_norm || halving == 39) {
                l = trial;
                f = f_trial;
                accepted = f_trial.norm() < f_norm;
                break;
            }
        }
        if (!accepted) break;
    }
    return false;
}

} // namespace detail

/// Solves the stationarity system of `max trace(A L^T) s.t. L L^T = I` by
/// Newton iteration and returns the maximizing solution.
///
/// Each start (identity, then seeded random orthogonal matrices) is driven to
/// a stationary point. At a stationary point S = A L^T is symmetric, and
/// reflecting L across every eigenvector of S with a negative eigenvalue keeps
/// it stationary while raising trace(S) to the sum of |eigenvalues|; S is then
/// positive semidefinite, which characterizes the global maximum. `a` must be
/// square; pad rectangular inputs with zeros first.
template <typename Derived>
StationaryPoint<typename Derived::Scalar> newton_orthogonal_stationarity(const Eigen::MatrixBase<Derived>& a_in,
                                                                         const NewtonOptions& options = {}) {
    using Scalar = typename Derived::Scalar;
    if (a_in.rows() != a_in.cols()) throw InputError("newton: matrix must be square (pad first)");
    if (!a_in.allFinite()) throw InputError("newton: matrix has non-finite entries");
    const MatrixX<Scalar> a = a_in;
    const Eigen::Index n = a.rows();

    StationaryPoint<Scalar> best;
    if (n == 0) return best;
    bool have_best = false;
    Rng rng(options.seed);
    int total_iterations = 0;

    for (int start = 0; start <= options.random_starts; ++start) {
        const MatrixX<Scalar> l0 = start == 0 ? MatrixX<Scalar>::Identity(n, n) : random_orthogonal<Scalar>(n, rng);
        StationaryPoint<Scalar> pt;
        if (!detail::newton_solve<Scalar>(a, l0, options, pt)) {
            total_iterations += pt.iterations;
            continue;
        }
        total_iterations += pt.iterations;

        const auto eig = sym_eig(pt.multiplier);
        MatrixX<Scalar> reflect = MatrixX<Scalar>::Identity(n, n);
        bool any = false;
        for (Eigen::Index k = 0; k < n; ++k) {
            if (eig.values(k) < Scalar(0)) {
                reflect -= Scalar(2) * eig.vectors.col(k) * eig.vectors.col(k).transpose();
                any = true;
            }
        }
        if (any) {
            StationaryPoint<Scalar> polished;
            if (!detail::newton_solve<Scalar>(a, reflect * pt.rotation, options, polished)) continue;
            total_iterations += polished.iterations;
            pt = polished;
        }
        if (!have_best || pt.value > best.value) {
            best = pt;
            have_best = true;
        }
    }
    if (!have_best)
        throw NumericalError("newton: stationarity system did not converge from any start",
                             detail::to_double<Scalar>(a));
    best.iterations = total_iterations;
    return best;
}

} // namespace catcov
