#include "utc/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace utc {

DistanceMatrix pairwise_distances(const DataMatrix& X) { return pairwise_distances(X.X); }

DistanceMatrix pairwise_distances(const DenseMatrix& X) {
    const long m = X.rows();
    if (m < 2) throw ArgumentError("pairwise_distances: need at least 2 samples");
    if (X.cols() < 1) throw ArgumentError("pairwise_distances: need at least 1 feature");
    if (!X.allFinite()) throw InputError("pairwise_distances: non-finite feature value");
    DistanceMatrix D = DistanceMatrix::Zero(m, m);
    for (long i = 0; i < m; ++i)
        for (long j = i + 1; j < m; ++j) {
            double d = (X.row(i) - X.row(j)).norm();
            D(i, j) = d;
            D(j, i) = d;
        }
    return D;
}

KnnIndex knn_index(const DistanceMatrix& D, long k) {
    const long m = D.rows();
    if (D.cols() != m) throw DimensionError("knn_index: distance matrix must be square");
    if (k < 1 || k >= m) throw ArgumentError("knn_index: need 1 <= k < m");
    KnnIndex out;
    out.k = k;
    out.neighbors.resize(m);
    std::vector<long> order(m - 1);
    for (long i = 0; i < m; ++i) {
        order.clear();
        for (long j = 0; j < m; ++j)
            if (j != i) order.push_back(j);
        std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](long a, long b) {
            return D(i, a) != D(i, b) ? D(i, a) < D(i, b) : a < b;
        });
        out.neighbors[i].assign(order.begin(), order.begin() + k);
    }
    return out;
}

AffinityMatrix pairwise_affinity(const DistanceMatrix& D, long k_neighbors) {
    const long m = D.rows();
    std::vector<double> nonzero;
    for (long i = 0; i < m; ++i)
        for (long j = i + 1; j < m; ++j)
            if (D(i, j) > 0.0) nonzero.push_back(D(i, j));
    if (nonzero.empty()) throw DegenerateInputError("pairwise_affinity: all distances are zero");
    KnnIndex knn = knn_index(D, k_neighbors);

    std::sort(nonzero.begin(), nonzero.end());
    const std::size_t n = nonzero.size();
    const double sigma = n % 2 ? nonzero[n / 2] : 0.5 * (nonzero[n / 2 - 1] + nonzero[n / 2]);

    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask =
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(m, m, false);
    for (long i = 0; i < m; ++i)
        for (long j : knn.neighbors[i]) mask(i, j) = true;

    AffinityMatrix A;
    A.S = DenseMatrix::Zero(m, m);
    for (long i = 0; i < m; ++i)
        for (long j = 0; j < m; ++j)
            if (i != j && mask(i, j) && mask(j, i))
                A.S(i, j) = std::exp(-D(i, j) * D(i, j) / (2.0 * sigma * sigma));
    A.S = 0.5 * (A.S + A.S.transpose()).eval();
    A.S.diagonal().setZero();
    A.degree = A.S.rowwise().sum();
    A.bandwidth = sigma;
    A.k_neighbors = k_neighbors;
    return A;
}

SparseTensor3 triadic_affinity(const DenseMatrix& X, const DistanceMatrix& D, const KnnIndex& knn) {
    const long m = X.rows();
    if (D.rows() != m || knn.samples() != m) throw DimensionError("triadic_affinity: sample count mismatch");
    std::vector<SparseTensor3::Entry> entries;
    entries.reserve(static_cast<std::size_t>(m * knn.k * knn.k));
    for (long j = 0; j < m; ++j) {
        const auto& nb = knn.neighbors[j];
        for (long i : nb) {
            if (D(i, j) == 0.0) continue;
            for (long k : nb) {
                if (k == i || D(j, k) == 0.0) continue;
                double c = (X.row(i) - X.row(j)).dot(X.row(k) - X.row(j)) / (D(i, j) * D(j, k));
                entries.push_back({{i, j, k}, std::clamp(c, -1.0, 1.0)});
            }
        }
    }
    return SparseTensor3(m, std::move(entries));
}

SparseTensor4 tetradic_affinity(const DistanceMatrix& D, const KnnIndex& knn, double sigma, double eps) {
    if (!(sigma > 0.0) || !(eps > 0.0)) throw ArgumentError("tetradic_affinity: sigma and eps must be positive");
    const long m = D.rows();
    if (knn.samples() != m) throw DimensionError("tetradic_affinity: sample count mismatch");
    std::vector<SparseTensor4::Index> tuples;
    std::vector<long> cand;
    for (long i = 0; i < m; ++i) {
        for (long j : knn.neighbors[i]) {
            cand = knn.neighbors[i];
            cand.insert(cand.end(), knn.neighbors[j].begin(), knn.neighbors[j].end());
            std::sort(cand.begin(), cand.end());
            cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
            for (long k : cand)
                for (long l : knn.neighbors[k]) {
                    tuples.push_back({i, j, k, l});
                    tuples.push_back({k, l, i, j});
                }
        }
    }
    std::sort(tuples.begin(), tuples.end());
    tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());

    std::vector<SparseTensor4::Entry> entries;
    entries.reserve(tuples.size());
    for (const auto& t : tuples) {
        const auto [i, j, k, l] = t;
        double v = std::exp(-sigma * (D(i, j) + D(k, l)) / (D(i, k) + D(j, l) + eps));
        if (v > 0.0) entries.push_back({t, v});
    }
    return SparseTensor4(m, std::move(entries));
}

SparseMatrix decomposable_triadic(const DenseMatrix& S) {
    if (S.rows() != S.cols()) throw DimensionError("decomposable_triadic: S must be square");
    SparseMatrix Ss = S.sparseView(0.0, 0.0);
    return khatri_rao(Ss, Ss);
}

SparseMatrix decomposable_tetradic(const DenseMatrix& S) {
    if (S.rows() != S.cols()) throw DimensionError("decomposable_tetradic: S must be square");
    SparseMatrix Ss = S.sparseView(0.0, 0.0);
    return kronecker(Ss, Ss);
}

}  // namespace utc
