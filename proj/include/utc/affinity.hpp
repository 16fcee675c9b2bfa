#pragma once

#include <vector>

#include "utc/data.hpp"
#include "utc/tensor_core.hpp"

namespace utc {

// Euclidean, symmetric, zero diagonal.
using DistanceMatrix = DenseMatrix;

// Per-sample neighbor lists ordered by (distance, index), self excluded.
struct KnnIndex {
    std::vector<std::vector<long>> neighbors;
    long k = 0;

    long samples() const { return static_cast<long>(neighbors.size()); }
};

struct AffinityMatrix {
    DenseMatrix S;
    Vector degree;
    double bandwidth = 0.0;
    long k_neighbors = 0;
};

inline constexpr double kDefaultTetradicSigma = 1e-6;
inline constexpr double kDefaultTetradicEps = 1e-8;

inline long default_k_neighbors(long m) { return std::min<long>(10, m - 1); }

DistanceMatrix pairwise_distances(const DataMatrix& X);
DistanceMatrix pairwise_distances(const DenseMatrix& X);

KnnIndex knn_index(const DistanceMatrix& D, long k);

// Gaussian kernel with median-of-nonzero-distances bandwidth, restricted to
// mutual nearest neighbors.
AffinityMatrix pairwise_affinity(const DistanceMatrix& D, long k_neighbors);

// Cosine of the angle at anchor j for i, k in knn[j], i != k.
SparseTensor3 triadic_affinity(const DenseMatrix& X, const DistanceMatrix& D, const KnnIndex& knn);

// exp(-sigma (d_ij + d_kl) / (d_ik + d_jl + eps)) over j in knn[i],
// k in knn[i] u knn[j], l in knn[k]; the set is closed under (i,j,k,l) -> (k,l,i,j).
SparseTensor4 tetradic_affinity(const DistanceMatrix& D, const KnnIndex& knn,
                                double sigma = kDefaultTetradicSigma, double eps = kDefaultTetradicEps);

// Unfolding of T[i,j,k] = S[i,j] S[k,j], i.e. S * S (Khatri-Rao).
SparseMatrix decomposable_triadic(const DenseMatrix& S);
// Unfolding of T[i,j,k,l] = S[i,k] S[j,l], i.e. S (x) S.
SparseMatrix decomposable_tetradic(const DenseMatrix& S);

}  // namespace utc
