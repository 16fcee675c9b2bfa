#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "test_util.hpp"
#include "utc/normalize.hpp"

using namespace utc;
using testutil::max_abs_diff;
using testutil::random_symmetric_nonneg;

TEST_CASE("normalize_pairwise") {
    SUBCASE("constant row sum") {
        DenseMatrix S(3, 3);
        S << 0, 1, 2, 1, 2, 0, 2, 0, 1;
        CHECK(max_abs_diff(normalize_pairwise(S).L, S / 3.0) < 1e-15);
    }
    SUBCASE("unit degrees") {
        DenseMatrix S(2, 2);
        S << 0, 1, 1, 0;
        CHECK(normalize_pairwise(S).L == S);
    }
    SUBCASE("largest eigenvalue at most one") {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            DenseMatrix S = random_symmetric_nonneg(6, seed);
            PairwiseNormalization n = normalize_pairwise(S);
            Eigen::SelfAdjointEigenSolver<DenseMatrix> es(n.L);
            CHECK(es.eigenvalues().cwiseAbs().maxCoeff() <= 1.0 + 1e-10);
            // The top eigenvector is D^{1/2} 1 with eigenvalue 1.
            CHECK(std::abs(es.eigenvalues().maxCoeff() - 1.0) < 1e-10);
            CHECK(n.L == n.L.transpose());
            CHECK(n.isolated.empty());
        }
    }
    SUBCASE("isolated row is flagged and zero") {
        DenseMatrix S = DenseMatrix::Zero(3, 3);
        S(0, 1) = S(1, 0) = 2.0;
        PairwiseNormalization n = normalize_pairwise(S);
        CHECK(n.isolated == std::vector<long>{2});
        CHECK(n.L.row(2).isZero());
        CHECK(n.L(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("normalize_triadic") {
    SUBCASE("single entry") {
        SparseMatrix T = make_sparse(9, 3, {{4, 1, 4.0}});
        SparseNormalization n = normalize_triadic(T);
        CHECK(n.L.coeff(4, 1) == 1.0);
        CHECK(n.L.nonZeros() == 1);
        CHECK(n.zero_rows == 8);
        CHECK(n.zero_cols == 2);
    }
    SUBCASE("all-equal entries") {
        SparseMatrix T = DenseMatrix::Constant(4, 2, 3.5).sparseView();
        SparseNormalization n = normalize_triadic(T);
        DenseMatrix L(n.L);
        CHECK((L.array() - 1.0 / std::sqrt(8.0)).abs().maxCoeff() < 1e-15);
    }
    SUBCASE("signed entries use absolute degrees") {
        SparseMatrix T = make_sparse(4, 2, {{0, 0, -1.0}, {0, 1, 3.0}, {3, 1, 1.0}});
        DenseMatrix L(normalize_triadic(T).L);
        CHECK(L(0, 0) == doctest::Approx(-1.0 / std::sqrt(4.0 * 1.0)));
        CHECK(L(0, 1) == doctest::Approx(3.0 / std::sqrt(4.0 * 4.0)));
        CHECK(L(3, 1) == doctest::Approx(1.0 / std::sqrt(1.0 * 4.0)));
    }
    SUBCASE("decomposable identity") {
        for (std::uint64_t seed = 10; seed < 15; ++seed) {
            DenseMatrix S = random_symmetric_nonneg(5, seed);
            PairwiseNormalization p = normalize_pairwise(S);
            auto [left, right] = decomposable_triadic_degrees(p.degree);
            SparseNormalization n = normalize_triadic(khatri_rao(S, S).sparseView(), left, right);
            CHECK(max_abs_diff(DenseMatrix(n.L), khatri_rao(p.L, p.L)) < 1e-10);
        }
    }
    SUBCASE("direct column sums give the squared degrees") {
        DenseMatrix S = random_symmetric_nonneg(4, 20);
        SparseNormalization n = normalize_triadic(khatri_rao(S, S).sparseView());
        Vector d = S.rowwise().sum();
        CHECK(max_abs_diff(n.right_degree, d.cwiseProduct(d)) < 1e-12);
    }
    SUBCASE("degree length mismatch") {
        SparseMatrix T = make_sparse(4, 2, {{0, 0, 1.0}});
        CHECK_THROWS_AS(normalize_triadic(T, Vector::Ones(3), Vector::Ones(2)), DimensionError);
        CHECK_THROWS_AS(normalize_triadic(make_sparse(5, 2, {})), DimensionError);
    }
}

TEST_CASE("normalize_tetradic") {
    SUBCASE("kronecker identity") {
        for (std::uint64_t seed = 30; seed < 35; ++seed) {
            DenseMatrix S = random_symmetric_nonneg(4, seed);
            DenseMatrix L2 = normalize_pairwise(S).L;
            SparseNormalization n = normalize_tetradic(kronecker(S, S).sparseView());
            CHECK(max_abs_diff(DenseMatrix(n.L), kronecker(L2, L2)) < 1e-10);
        }
    }
    SUBCASE("permutation matrix is unchanged") {
        std::vector<Triplet> t;
        const long perm[9] = {3, 7, 0, 5, 1, 8, 2, 6, 4};
        for (long i = 0; i < 9; ++i) t.emplace_back(i, perm[i], 1.0);
        SparseMatrix P = make_sparse(9, 9, t);
        CHECK(max_abs_diff(DenseMatrix(normalize_tetradic(P).L), DenseMatrix(P)) == 0.0);
    }
    SUBCASE("single entry") {
        SparseMatrix T = make_sparse(4, 4, {{2, 2, 9.0}});
        CHECK(normalize_tetradic(T).L.coeff(2, 2) == 1.0);
    }
    SUBCASE("shape check") {
        CHECK_THROWS_AS(normalize_tetradic(make_sparse(4, 3, {})), DimensionError);
    }
}

TEST_CASE("scale invariance") {
    DenseMatrix S = random_symmetric_nonneg(4, 40);
    for (double c : {1e-3, 0.5, 7.0, 1e4}) {
        DenseMatrix cS = c * S;
        CHECK(max_abs_diff(normalize_pairwise(cS).L, normalize_pairwise(S).L) < 1e-12);
        SparseMatrix K3 = khatri_rao(S, S).sparseView(), cK3 = khatri_rao(cS, cS).sparseView();
        CHECK(max_abs_diff(DenseMatrix(normalize_triadic(cK3).L), DenseMatrix(normalize_triadic(K3).L)) < 1e-12);
        SparseMatrix K4 = kronecker(S, S).sparseView(), cK4 = (c * kronecker(S, S)).sparseView();
        CHECK(max_abs_diff(DenseMatrix(normalize_tetradic(cK4).L), DenseMatrix(normalize_tetradic(K4).L)) < 1e-12);
    }
}
