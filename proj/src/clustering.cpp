#include "utc/clustering.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace utc {

namespace {

struct Lloyd {
    std::vector<int> assign;
    double wcss = std::numeric_limits<double>::infinity();
};

Lloyd lloyd_once(const DenseMatrix& X, int k, std::mt19937_64& rng, const KMeansOptions& opt) {
    const long m = X.rows();
    DenseMatrix C(k, X.cols());
    std::uniform_int_distribution<long> pick(0, m - 1);
    C.row(0) = X.row(pick(rng));
    Vector d2(m);
    for (long i = 0; i < m; ++i) d2[i] = (X.row(i) - C.row(0)).squaredNorm();
    for (int c = 1; c < k; ++c) {
        double total = d2.sum();
        long chosen = 0;
        if (total > 0.0) {
            std::uniform_real_distribution<double> u(0.0, total);
            double r = u(rng), acc = 0.0;
            chosen = m - 1;
            for (long i = 0; i < m; ++i) {
                acc += d2[i];
                if (r < acc && d2[i] > 0.0) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = pick(rng);
        }
        C.row(c) = X.row(chosen);
        for (long i = 0; i < m; ++i) d2[i] = std::min(d2[i], (X.row(i) - C.row(c)).squaredNorm());
    }

    Lloyd out;
    out.assign.assign(m, 0);
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < opt.max_iter; ++it) {
        double w = 0.0;
        for (long i = 0; i < m; ++i) {
            int best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                double d = (X.row(i) - C.row(c)).squaredNorm();
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            out.assign[i] = best;
            w += bd;
        }
        out.wcss = w;
        DenseMatrix sum = DenseMatrix::Zero(k, X.cols());
        std::vector<long> cnt(k, 0);
        for (long i = 0; i < m; ++i) {
            sum.row(out.assign[i]) += X.row(i);
            ++cnt[out.assign[i]];
        }
        for (int c = 0; c < k; ++c)
            if (cnt[c] > 0) C.row(c) = sum.row(c) / static_cast<double>(cnt[c]);
        if (std::isfinite(prev) && prev - w <= opt.tol * prev) break;
        prev = w;
    }
    return out;
}

ClusterLabels finish(std::vector<int> assign, int k, double wcss) {
    ClusterLabels L;
    L.k = k;
    L.wcss = wcss;
    std::vector<int> used(k, 0);
    for (int a : assign) used[a] = 1;
    for (int u : used) L.empty_clusters += u ? 0 : 1;
    L.assignment = std::move(assign);
    return L;
}

}  // namespace

ClusterLabels kmeans(const DenseMatrix& V, int k, std::uint64_t seed, const KMeansOptions& opt) {
    const long m = V.rows();
    if (k < 1) throw ArgumentError("kmeans: k must be positive");
    if (k > m) throw ArgumentError("kmeans: k exceeds sample count");
    if (opt.restarts < 1) throw ArgumentError("kmeans: need at least one restart");
    if (!V.allFinite()) throw InputError("kmeans: non-finite embedding");
    Lloyd best;
    for (int r = 0; r < opt.restarts; ++r) {
        std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                         static_cast<std::uint32_t>(r)};
        std::mt19937_64 rng(sq);
        Lloyd cur = lloyd_once(V, k, rng, opt);
        if (cur.wcss < best.wcss) best = std::move(cur);
    }
    return finish(std::move(best.assign), k, best.wcss);
}

ClusterLabels spectral_embedding_kmeans(const DenseMatrix& L, int k, std::uint64_t seed, DenseMatrix* embedding) {
    const long m = L.rows();
    if (k < 1 || k > m) throw ArgumentError("spectral clustering: need 1 <= k <= m");
    Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(L);
    DenseMatrix U(m, k);
    for (int c = 0; c < k; ++c) U.col(c) = eig.eigenvectors().col(m - 1 - c);
    if (embedding) *embedding = U;
    return kmeans(U, k, seed);
}

ClusterLabels spectral_on_gram(const DenseMatrix& V, int k, std::uint64_t seed) {
    DenseMatrix G = (V * V.transpose()).cwiseMax(0.0);
    return spectral_embedding_kmeans(normalize_pairwise(G).L, k, seed);
}

PartitionScore n_assoc(const ClusterLabels& labels, const DenseMatrix& L2) {
    const long m = labels.size();
    if (L2.rows() != m || L2.cols() != m) throw DimensionError("n_assoc: operator does not match labels");
    std::vector<double> sim(labels.k, 0.0);
    std::vector<long> size(labels.k, 0);
    for (long i = 0; i < m; ++i) ++size[labels.assignment[i]];
    for (long i = 0; i < m; ++i)
        for (long j = 0; j < m; ++j)
            if (labels.assignment[i] == labels.assignment[j]) sim[labels.assignment[i]] += L2(i, j);
    PartitionScore s;
    s.order = 2;
    for (int c = 0; c < labels.k; ++c) {
        if (size[c] == 0) {
            ++s.empty_clusters;
            continue;
        }
        s.value += sim[c] / std::pow(static_cast<double>(size[c]), 2);
    }
    return s;
}

PartitionScore n_assoc(const ClusterLabels& labels, const SparseMatrix& U, int order) {
    const long m = labels.size();
    if (order == 3) {
        if (U.rows() != m * m || U.cols() != m) throw DimensionError("n_assoc: expected an m^2 x m operator");
    } else if (order == 4) {
        if (U.rows() != m * m || U.cols() != m * m) throw DimensionError("n_assoc: expected an m^2 x m^2 operator");
    } else {
        throw ArgumentError("n_assoc: sparse operator order must be 3 or 4");
    }
    const auto& a = labels.assignment;
    std::vector<double> sim(labels.k, 0.0);
    std::vector<long> size(labels.k, 0);
    for (long i = 0; i < m; ++i) ++size[a[i]];
    for (long col = 0; col < U.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(U, col); it; ++it) {
            long r = it.row();
            // Order 3: row i m + k, column j. Order 4: row j m + i, column l m + k.
            long p = r / m, q = r % m;
            int c = a[p];
            if (a[q] != c) continue;
            if (order == 3) {
                if (a[col] != c) continue;
            } else if (a[col / m] != c || a[col % m] != c) {
                continue;
            }
            sim[c] += it.value();
        }
    PartitionScore s;
    s.order = order;
    for (int c = 0; c < labels.k; ++c) {
        if (size[c] == 0) {
            ++s.empty_clusters;
            continue;
        }
        s.value += sim[c] / std::pow(static_cast<double>(size[c]), order);
    }
    return s;
}

ClusterLabels brute_force_best_partition(const NormalizedOperators& ops, const Orders& orders, int k) {
    const long m = ops.samples();
    if (m > kMaxBruteForceSamples)
        throw CapacityError("brute_force_best_partition: at most " + std::to_string(kMaxBruteForceSamples) +
                            " samples");
    if (k < 1 || k > m) throw ArgumentError("brute_force_best_partition: need 1 <= k <= m");
    if (orders.triadic && !ops.L3) throw ArgumentError("brute_force_best_partition: missing L3");
    if (orders.tetradic && !ops.L4) throw ArgumentError("brute_force_best_partition: missing L4");

    // Restricted growth strings enumerate each set partition exactly once.
    ClusterLabels cur;
    cur.k = k;
    cur.assignment.assign(m, 0);
    std::vector<int> best;
    double best_score = -std::numeric_limits<double>::infinity();
    auto score = [&]() {
        double v = 0.0;
        if (orders.pairwise) v += n_assoc(cur, ops.L2).value;
        if (orders.triadic) v += n_assoc(cur, *ops.L3, 3).value;
        if (orders.tetradic) v += n_assoc(cur, *ops.L4, 4).value;
        return v;
    };
    auto rec = [&](auto&& self, long i, int used) -> void {
        if (m - i < k - used) return;
        if (i == m) {
            if (used != k) return;
            double v = score();
            if (v > best_score) {
                best_score = v;
                best = cur.assignment;
            }
            return;
        }
        for (int c = 0; c <= std::min(used, k - 1); ++c) {
            cur.assignment[i] = c;
            self(self, i + 1, std::max(used, c + 1));
        }
    };
    rec(rec, 0, 0);
    return finish(std::move(best), k, 0.0);
}

}  // namespace utc
