#pragma once

#include <cstdint>
#include <vector>

#include "utc/normalize.hpp"
#include "utc/solver.hpp"
#include "utc/tensor_core.hpp"

namespace utc {

struct ClusterLabels {
    std::vector<int> assignment;
    int k = 0;
    // Within-cluster sum of squares for k-means results, 0 otherwise.
    double wcss = 0.0;
    // Declared clusters that ended up without members.
    int empty_clusters = 0;

    long size() const { return static_cast<long>(assignment.size()); }
};

struct KMeansOptions {
    int restarts = 20;
    int max_iter = 300;
    double tol = 1e-6;  // relative WCSS change
};

// Lloyd iterations from k-means++ seeds on the rows of V; best restart by
// WCSS, ties to the lower restart index.
ClusterLabels kmeans(const DenseMatrix& V, int k, std::uint64_t seed, const KMeansOptions& opt = {});

// Spectral clustering of max(V V', 0).
ClusterLabels spectral_on_gram(const DenseMatrix& V, int k, std::uint64_t seed);

// Top-k eigenvectors of a normalized affinity followed by k-means.
ClusterLabels spectral_embedding_kmeans(const DenseMatrix& L, int k, std::uint64_t seed,
                                        DenseMatrix* embedding = nullptr);

struct PartitionScore {
    double value = 0.0;
    int order = 2;
    int empty_clusters = 0;
};

// Sum over clusters of Sim(C) / |C|^p.
PartitionScore n_assoc(const ClusterLabels& labels, const DenseMatrix& L2);
// Unfolded order-3 (m^2 x m) or order-4 (m^2 x m^2) operator.
PartitionScore n_assoc(const ClusterLabels& labels, const SparseMatrix& unfolded, int order);

inline constexpr long kMaxBruteForceSamples = 10;

// Exhaustive search over partitions into exactly k nonempty blocks, scored by
// the summed n_assoc of the selected orders.
ClusterLabels brute_force_best_partition(const NormalizedOperators& ops, const Orders& orders, int k);

}  // namespace utc
