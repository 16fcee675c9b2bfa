#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "test_util.hpp"
#include "utc/clustering.hpp"
#include "utc/error.hpp"

using namespace utc;
using testutil::random_matrix;

namespace {

// Same partition up to a relabeling of clusters.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return false;
    std::map<int, int> ab, ba;
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto [x, nx] = ab.emplace(a[i], b[i]);
        auto [y, ny] = ba.emplace(b[i], a[i]);
        if (x->second != b[i] || y->second != a[i]) return false;
    }
    return true;
}

double wcss_of(const DenseMatrix& X, const std::vector<int>& a, int k) {
    double total = 0.0;
    for (int c = 0; c < k; ++c) {
        Vector mean = Vector::Zero(X.cols());
        long n = 0;
        for (long i = 0; i < X.rows(); ++i)
            if (a[i] == c) {
                mean += X.row(i).transpose();
                ++n;
            }
        if (n == 0) continue;
        mean /= static_cast<double>(n);
        for (long i = 0; i < X.rows(); ++i)
            if (a[i] == c) total += (X.row(i).transpose() - mean).squaredNorm();
    }
    return total;
}

ClusterLabels labels_of(std::vector<int> a, int k) {
    ClusterLabels l;
    l.assignment = std::move(a);
    l.k = k;
    return l;
}

DenseMatrix block_affinity(const std::vector<int>& sizes) {
    long m = 0;
    for (int s : sizes) m += s;
    DenseMatrix S = DenseMatrix::Zero(m, m);
    long off = 0;
    for (int s : sizes) {
        S.block(off, off, s, s).setOnes();
        off += s;
    }
    return S;
}

}  // namespace

TEST_CASE("kmeans") {
    SUBCASE("single cluster") {
        ClusterLabels l = kmeans(random_matrix(7, 3, 1), 1, 5);
        CHECK(l.assignment == std::vector<int>(7, 0));
        CHECK(l.k == 1);
    }
    SUBCASE("two far-apart groups") {
        DenseMatrix X = 0.01 * random_matrix(20, 2, 2);
        X.bottomRows(10).array() += 100.0;
        ClusterLabels l = kmeans(X, 2, 3);
        std::vector<int> truth(20, 0);
        for (int i = 10; i < 20; ++i) truth[i] = 1;
        CHECK(same_partition(l.assignment, truth));
        CHECK(l.empty_clusters == 0);
    }
    SUBCASE("matches the exhaustive minimum over all 2^8 assignments") {
        for (std::uint64_t seed = 10; seed < 15; ++seed) {
            DenseMatrix X = random_matrix(8, 2, seed);
            double best = std::numeric_limits<double>::infinity();
            for (int mask = 0; mask < 256; ++mask) {
                std::vector<int> a(8);
                for (int i = 0; i < 8; ++i) a[i] = (mask >> i) & 1;
                best = std::min(best, wcss_of(X, a, 2));
            }
            ClusterLabels l = kmeans(X, 2, seed);
            CHECK(l.wcss == doctest::Approx(best).epsilon(1e-12));
            CHECK(wcss_of(X, l.assignment, 2) == doctest::Approx(l.wcss).epsilon(1e-12));
        }
    }
    SUBCASE("deterministic and in range") {
        DenseMatrix X = random_matrix(30, 4, 20);
        ClusterLabels a = kmeans(X, 4, 99), b = kmeans(X, 4, 99);
        CHECK(a.assignment == b.assignment);
        CHECK(a.wcss == b.wcss);
        for (int v : a.assignment) {
            CHECK(v >= 0);
            CHECK(v < 4);
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(kmeans(random_matrix(3, 2, 1), 4, 1), ArgumentError);
        CHECK_THROWS_AS(kmeans(random_matrix(3, 2, 1), 0, 1), ArgumentError);
    }
}

TEST_CASE("spectral_on_gram") {
    SUBCASE("indicator embedding") {
        std::vector<int> truth{0, 0, 0, 1, 1, 2, 2, 2, 2, 1};
        DenseMatrix V = DenseMatrix::Zero(10, 3);
        std::vector<int> count(3, 0);
        for (int t : truth) ++count[t];
        for (int i = 0; i < 10; ++i) V(i, truth[i]) = 1.0 / std::sqrt(count[truth[i]]);
        // Rotating the basis must not change the partition.
        DenseMatrix R = orthonormalize(random_matrix(3, 3, 7));
        CHECK(same_partition(spectral_on_gram(V, 3, 1).assignment, truth));
        CHECK(same_partition(spectral_on_gram(V * R, 3, 1).assignment, truth));
    }
    SUBCASE("single cluster") {
        DenseMatrix V = orthonormalize(random_matrix(6, 2, 8));
        CHECK(spectral_on_gram(V, 1, 1).assignment == std::vector<int>(6, 0));
    }
    SUBCASE("agrees with kmeans on well-separated rows") {
        std::mt19937_64 rng(9);
        std::normal_distribution<double> n(0.0, 0.01);
        DenseMatrix V(12, 2);
        for (int i = 0; i < 12; ++i) {
            V(i, 0) = (i < 6 ? 1.0 : 0.0) + n(rng);
            V(i, 1) = (i < 6 ? 0.0 : 1.0) + n(rng);
        }
        V = orthonormalize(V);
        CHECK(same_partition(spectral_on_gram(V, 2, 3).assignment, kmeans(V, 2, 3).assignment));
    }
}

TEST_CASE("n_assoc") {
    SUBCASE("single cluster of ones") {
        PartitionScore s = n_assoc(labels_of(std::vector<int>(5, 0), 1), DenseMatrix::Ones(5, 5));
        CHECK(s.value == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(s.order == 2);
    }
    SUBCASE("zero operator") {
        ClusterLabels l = labels_of({0, 1, 0, 1}, 2);
        CHECK(n_assoc(l, DenseMatrix::Zero(4, 4)).value == 0.0);
        CHECK(n_assoc(l, SparseMatrix(16, 4), 3).value == 0.0);
        CHECK(n_assoc(l, SparseMatrix(16, 16), 4).value == 0.0);
    }
    SUBCASE("loop oracles for orders 3 and 4") {
        const long m = 6;
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::vector<SparseTensor3::Entry> e3;
        std::vector<SparseTensor4::Entry> e4;
        for (long i = 0; i < m; ++i)
            for (long j = 0; j < m; ++j)
                for (long k = 0; k < m; ++k) {
                    e3.push_back({{i, j, k}, u(rng)});
                    for (long l = 0; l < m; ++l) e4.push_back({{i, j, k, l}, u(rng)});
                }
        SparseTensor3 T3(m, e3);
        SparseTensor4 T4(m, e4);
        ClusterLabels lab = labels_of({0, 1, 1, 0, 1, 1}, 2);
        double want3 = 0.0, want4 = 0.0;
        for (int c = 0; c < 2; ++c) {
            double sim3 = 0.0, sim4 = 0.0;
            double n = 0.0;
            for (long i = 0; i < m; ++i) n += lab.assignment[i] == c;
            for (long i = 0; i < m; ++i)
                for (long j = 0; j < m; ++j)
                    for (long k = 0; k < m; ++k) {
                        if (lab.assignment[i] != c || lab.assignment[j] != c || lab.assignment[k] != c) continue;
                        sim3 += T3.at({i, j, k});
                        for (long l = 0; l < m; ++l)
                            if (lab.assignment[l] == c) sim4 += T4.at({i, j, k, l});
                    }
            want3 += sim3 / (n * n * n);
            want4 += sim4 / (n * n * n * n);
        }
        CHECK(std::abs(n_assoc(lab, unfold3(T3), 3).value - want3) < 1e-12);
        CHECK(std::abs(n_assoc(lab, unfold4(T4), 4).value - want4) < 1e-12);
    }
    SUBCASE("invariant under consistent sample relabeling") {
        const long m = 7;
        DenseMatrix L = testutil::random_symmetric_nonneg(m, 12);
        std::vector<int> a{0, 1, 2, 0, 1, 2, 2};
        std::vector<long> pi{3, 6, 0, 5, 2, 1, 4};
        DenseMatrix P = DenseMatrix::Zero(m, m);
        std::vector<int> b(m);
        for (long i = 0; i < m; ++i) {
            P(pi[i], i) = 1.0;
            b[pi[i]] = a[i];
        }
        CHECK(n_assoc(labels_of(a, 3), L).value ==
              doctest::Approx(n_assoc(labels_of(b, 3), DenseMatrix(P * L * P.transpose())).value).epsilon(1e-14));
        // Cluster ids do not matter either.
        std::vector<int> c{2, 0, 1, 2, 0, 1, 1};
        CHECK(n_assoc(labels_of(a, 3), L).value == doctest::Approx(n_assoc(labels_of(c, 3), L).value).epsilon(1e-14));
    }
    SUBCASE("empty cluster contributes zero") {
        PartitionScore s = n_assoc(labels_of({0, 0, 2, 2}, 3), DenseMatrix::Ones(4, 4));
        CHECK(s.value == doctest::Approx(2.0));
        CHECK(s.empty_clusters == 1);
    }
    SUBCASE("errors") {
        ClusterLabels l = labels_of({0, 1, 0}, 2);
        CHECK_THROWS_AS(n_assoc(l, DenseMatrix::Zero(4, 4)), DimensionError);
        CHECK_THROWS_AS(n_assoc(l, SparseMatrix(9, 9), 3), DimensionError);
        CHECK_THROWS_AS(n_assoc(l, SparseMatrix(9, 3), 5), ArgumentError);
    }
}

TEST_CASE("brute_force_best_partition") {
    SUBCASE("ideal blocks win and the maximum is unique") {
        for (const std::vector<int>& sizes : {std::vector<int>{3, 5}, std::vector<int>{4, 4}, std::vector<int>{2, 8}}) {
            NormalizedOperators ops;
            ops.L2 = normalize_pairwise(block_affinity(sizes)).L;
            const long m = ops.L2.rows();
            std::vector<int> truth(m, 1);
            for (int i = 0; i < sizes[0]; ++i) truth[i] = 0;
            ClusterLabels best = brute_force_best_partition(ops, Orders::pairwise_only(), 2);
            CHECK(same_partition(best.assignment, truth));
            // Every other 2-partition scores strictly lower.
            double top = n_assoc(labels_of(truth, 2), ops.L2).value;
            int ties = 0;
            for (long mask = 1; mask < (1L << m) - 1; ++mask) {
                if (mask & 1) continue;  // each partition once
                std::vector<int> a(m);
                for (long i = 0; i < m; ++i) a[i] = (mask >> i) & 1;
                if (same_partition(a, truth)) continue;
                if (n_assoc(labels_of(a, 2), ops.L2).value >= top - 1e-12) ++ties;
            }
            CHECK(ties == 0);
        }
    }
    SUBCASE("k equal to m gives singletons") {
        NormalizedOperators ops;
        ops.L2 = normalize_pairwise(testutil::random_symmetric_nonneg(5, 13)).L;
        ClusterLabels l = brute_force_best_partition(ops, Orders::pairwise_only(), 5);
        CHECK(l.assignment == std::vector<int>{0, 1, 2, 3, 4});
    }
    SUBCASE("higher orders on a decomposable instance") {
        DenseMatrix S = block_affinity({3, 4}) + 0.01 * DenseMatrix::Ones(7, 7);
        NormalizedOperators ops;
        PairwiseNormalization p = normalize_pairwise(S);
        ops.L2 = p.L;
        ops.L3 = SparseMatrix(khatri_rao(p.L, p.L).sparseView());
        ops.L4 = SparseMatrix(kronecker(p.L, p.L).sparseView());
        ClusterLabels l = brute_force_best_partition(ops, Orders::all(), 2);
        CHECK(same_partition(l.assignment, {0, 0, 0, 1, 1, 1, 1}));
    }
    SUBCASE("capacity and argument errors") {
        NormalizedOperators ops;
        ops.L2 = DenseMatrix::Identity(11, 11);
        CHECK_THROWS_AS(brute_force_best_partition(ops, Orders::pairwise_only(), 2), CapacityError);
        ops.L2 = DenseMatrix::Identity(4, 4);
        CHECK_THROWS_AS(brute_force_best_partition(ops, Orders::pairwise_only(), 5), ArgumentError);
        CHECK_THROWS_AS(brute_force_best_partition(ops, Orders::all(), 2), ArgumentError);
    }
}
