#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "catcov/error.hpp"

namespace catcov {

/// Vertices of a regular (k-1)-simplex with unit edge length, centered at the
/// origin: row `c` is the coordinate vector of category `c`.
///
/// Vertex `j` (j >= 1) is the first to leave the span of axes `0..j-2`; its
/// coordinate on axis `j-1` is `j / sqrt(2 j (j+1))`, while every earlier
/// vertex has `-1 / sqrt(2 j (j+1))` there. For k = 2 this gives -1/2, +1/2.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> simplex_vertices(int k) {
    if (k < 1) throw InputError("simplex: category count must be at least 1");
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> v =
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(k, k - 1);
    using std::sqrt;
    for (int j = 1; j < k; ++j) {
        const Scalar scale = Scalar(1) / sqrt(Scalar(2) * Scalar(j) * Scalar(j + 1));
        for (int i = 0; i < j; ++i) v(i, j - 1) = -scale;
        v(j, j - 1) = Scalar(j) * scale;
    }
    return v;
}

/// Regular-simplex coordinates for one categorical variable.
class SimplexEmbedding {
public:
    explicit SimplexEmbedding(int k) : k_(k), vertices_(simplex_vertices<double>(k)) {}

    int categories() const noexcept { return k_; }
    Eigen::Index dimension() const noexcept { return k_ - 1; }
    const Eigen::MatrixXd& vertices() const noexcept { return vertices_; }
    auto vertex(int category) const { return vertices_.row(category); }

private:
    int k_;
    Eigen::MatrixXd vertices_;
};

inline SimplexEmbedding build_simplex(int k) { return SimplexEmbedding(k); }

/// Interpretive direction in one variable's simplex space.
struct BasisAtom {
    enum class Kind { edge, center };

    Kind kind;
    std::string variable;
    int from = -1; // edge atoms only
    int to = -1;
    Eigen::VectorXd vector;
};

/// All edge atoms `v(to) - v(from)` with from < to, then all center atoms
/// `v(to)` (the centroid is the origin).
inline std::vector<BasisAtom> basis_atoms(const SimplexEmbedding& embedding, const std::string& variable) {
    const int k = embedding.categories();
    std::vector<BasisAtom> atoms;
    if (k < 2) return atoms;
    atoms.reserve(static_cast<std::size_t>(k * (k - 1) / 2 + k));
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b)
            atoms.push_back({BasisAtom::Kind::edge, variable, a, b,
                             (embedding.vertex(b) - embedding.vertex(a)).transpose()});
    for (int a = 0; a < k; ++a)
        atoms.push_back({BasisAtom::Kind::center, variable, -1, a, embedding.vertex(a).transpose()});
    return atoms;
}

} // namespace catcov
