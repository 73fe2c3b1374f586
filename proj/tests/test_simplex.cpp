#include <doctest.h>

#include <cmath>

#include "catcov/simplex.hpp"

using namespace catcov;

namespace {

void check_regular(int k) {
    const SimplexEmbedding e(k);
    const auto& v = e.vertices();
    REQUIRE(v.rows() == k);
    REQUIRE(v.cols() == k - 1);
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b) CHECK(std::abs((v.row(a) - v.row(b)).norm() - 1.0) <= 1e-12);
    if (k > 1) CHECK(v.colwise().sum().norm() <= 1e-12);
}

} // namespace

TEST_CASE("build_simplex geometry") {
    SUBCASE("k=1 is zero-dimensional") {
        const auto e = build_simplex(1);
        CHECK(e.dimension() == 0);
        CHECK(e.vertex(0).size() == 0);
    }
    SUBCASE("k=2 sits at -1/2 and +1/2") {
        const auto e = build_simplex(2);
        CHECK(e.vertex(0)(0) == -0.5);
        CHECK(e.vertex(1)(0) == 0.5);
    }
    SUBCASE("k=3 equilateral") { check_regular(3); }
    SUBCASE("k=5 all ten distances unit") { check_regular(5); }
    SUBCASE("larger k") {
        for (int k : {4, 7, 12, 40}) check_regular(k);
    }
    SUBCASE("k=0 rejected") { CHECK_THROWS_AS(build_simplex(0), InputError); }
}

TEST_CASE("construction is bit-identical across calls") {
    CHECK(simplex_vertices(9) == simplex_vertices(9));
}

TEST_CASE("squared embedded distance reproduces the 0/1 category distance") {
    const auto v = simplex_vertices(6);
    for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b)
            CHECK((v.row(a) - v.row(b)).squaredNorm() == doctest::Approx(a == b ? 0.0 : 1.0).epsilon(1e-12));
}

TEST_CASE("basis atoms") {
    SUBCASE("k=2") {
        const auto atoms = basis_atoms(build_simplex(2), "x");
        REQUIRE(atoms.size() == 3);
        CHECK(atoms[0].kind == BasisAtom::Kind::edge);
        CHECK(atoms[0].vector.norm() == doctest::Approx(1.0));
        CHECK(atoms[1].vector.norm() == doctest::Approx(0.5));
        CHECK(atoms[2].vector.norm() == doctest::Approx(0.5));
    }
    SUBCASE("k=4 counts and norms") {
        const auto atoms = basis_atoms(build_simplex(4), "x");
        int edges = 0, centers = 0;
        for (const auto& a : atoms) {
            if (a.kind == BasisAtom::Kind::edge) {
                ++edges;
                CHECK(a.from < a.to);
                CHECK(std::abs(a.vector.norm() - 1.0) <= 1e-12);
            } else {
                ++centers;
                CHECK(std::abs(a.vector.norm() - std::sqrt(3.0 / 8.0)) <= 1e-12);
            }
        }
        CHECK(edges == 6);
        CHECK(centers == 4);
    }
    SUBCASE("k=1 has none") { CHECK(basis_atoms(build_simplex(1), "x").empty()); }
    SUBCASE("centers sum to zero and edges are center differences") {
        const int k = 5;
        const auto atoms = basis_atoms(build_simplex(k), "x");
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(k - 1);
        std::vector<Eigen::VectorXd> center(k);
        for (const auto& a : atoms)
            if (a.kind == BasisAtom::Kind::center) {
                sum += a.vector;
                center[static_cast<std::size_t>(a.to)] = a.vector;
            }
        CHECK(sum.norm() <= 1e-12);
        for (const auto& a : atoms)
            if (a.kind == BasisAtom::Kind::edge)
                CHECK((a.vector - (center[static_cast<std::size_t>(a.to)] - center[static_cast<std::size_t>(a.from)])).norm() <=
                      1e-15);
    }
}
