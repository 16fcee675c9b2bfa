#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "utc/error.hpp"

namespace utc {

using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Coordinate-list tensor of order N. Entries are kept sorted by index tuple,
// duplicates are rejected and explicit zeros are never stored.
template <int N>
class SparseTensor {
public:
    static_assert(N >= 1, "tensor order must be positive");
    using Index = std::array<long, N>;

    struct Entry {
        Index idx;
        double value;
    };

    SparseTensor() { shape_.fill(0); }
    explicit SparseTensor(long m) { shape_.fill(m); }
    explicit SparseTensor(const Index& shape) : shape_(shape) {}

    SparseTensor(const Index& shape, std::vector<Entry> entries) : shape_(shape) {
        entries_.reserve(entries.size());
        for (auto& e : entries) {
            check_entry(e.idx, e.value);
            if (e.value != 0.0) entries_.push_back(e);
        }
        std::sort(entries_.begin(), entries_.end(),
                  [](const Entry& a, const Entry& b) { return a.idx < b.idx; });
        for (std::size_t t = 1; t < entries_.size(); ++t)
            if (entries_[t].idx == entries_[t - 1].idx)
                throw ArgumentError("duplicate tensor index tuple");
    }

    SparseTensor(long m, std::vector<Entry> entries) : SparseTensor(cube(m), std::move(entries)) {}

    static Index cube(long m) {
        Index s;
        s.fill(m);
        return s;
    }

    const Index& shape() const { return shape_; }
    // Common mode length; only meaningful for cubical tensors.
    long dim() const { return shape_[0]; }
    std::size_t nnz() const { return entries_.size(); }
    const std::vector<Entry>& entries() const { return entries_; }

    double at(const Index& idx) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), idx,
                                   [](const Entry& e, const Index& i) { return e.idx < i; });
        return (it != entries_.end() && it->idx == idx) ? it->value : 0.0;
    }

private:
    void check_entry(const Index& idx, double v) const {
        for (int d = 0; d < N; ++d)
            if (idx[d] < 0 || idx[d] >= shape_[d]) throw ArgumentError("tensor index out of range");
        if (!std::isfinite(v)) throw InputError("non-finite tensor value");
    }

    Index shape_;
    std::vector<Entry> entries_;
};

using SparseTensor3 = SparseTensor<3>;
using SparseTensor4 = SparseTensor<4>;

DenseMatrix hadamard(const DenseMatrix& A, const DenseMatrix& B);
DenseMatrix kronecker(const DenseMatrix& A, const DenseMatrix& B);
DenseMatrix khatri_rao(const DenseMatrix& A, const DenseMatrix& B);

// Sparse counterparts, used where one factor is a sparse affinity.
SparseMatrix kronecker(const SparseMatrix& A, const SparseMatrix& B);
SparseMatrix khatri_rao(const SparseMatrix& A, const SparseMatrix& B);

// Builds a sparse matrix from triplets. Rejects duplicates, drops zeros.
SparseMatrix make_sparse(long rows, long cols, std::vector<Triplet> triplets);

// T[i,j,k] -> row i*m + k, column j.
SparseMatrix unfold3(const SparseTensor3& T);
// T[i,j,k,l] -> row j*m + i, column l*m + k.
SparseMatrix unfold4(const SparseTensor4& T);

namespace detail {
inline void check_mode(int mode, int order) {
    if (mode < 0 || mode >= order)
        throw ArgumentError("mode " + std::to_string(mode) + " invalid for order " +
                            std::to_string(order));
}
}  // namespace detail

// Mode product with a J x dim matrix: the contracted mode gets length J.
// Modes are 0-based.
template <int N>
SparseTensor<N> k_mode_product(const SparseTensor<N>& T, const DenseMatrix& V, int mode) {
    detail::check_mode(mode, N);
    if (V.cols() != T.shape()[mode]) throw DimensionError("k_mode_product: V.cols != mode length");
    auto shape = T.shape();
    shape[mode] = V.rows();
    // Accumulate by output index; entries are visited in sorted order so the
    // reduction order is fixed.
    std::vector<typename SparseTensor<N>::Entry> acc;
    acc.reserve(T.nnz() * static_cast<std::size_t>(V.rows()));
    for (const auto& e : T.entries()) {
        for (long r = 0; r < V.rows(); ++r) {
            double w = V(r, e.idx[mode]);
            if (w == 0.0) continue;
            auto idx = e.idx;
            idx[mode] = r;
            acc.push_back({idx, w * e.value});
        }
    }
    std::stable_sort(acc.begin(), acc.end(), [](const auto& a, const auto& b) { return a.idx < b.idx; });
    std::vector<typename SparseTensor<N>::Entry> merged;
    for (const auto& e : acc) {
        if (!merged.empty() && merged.back().idx == e.idx)
            merged.back().value += e.value;
        else
            merged.push_back(e);
    }
    return SparseTensor<N>(shape, std::move(merged));
}

// Mode product with a vector: the mode is summed out and the order drops by one.
template <int N>
SparseTensor<N - 1> k_mode_product(const SparseTensor<N>& T, const Vector& v, int mode) {
    static_assert(N >= 2, "vector contraction needs order >= 2");
    detail::check_mode(mode, N);
    if (v.size() != T.shape()[mode]) throw DimensionError("k_mode_product: vector length != mode length");
    typename SparseTensor<N - 1>::Index shape;
    for (int d = 0, o = 0; d < N; ++d)
        if (d != mode) shape[o++] = T.shape()[d];
    std::vector<typename SparseTensor<N - 1>::Entry> acc;
    acc.reserve(T.nnz());
    for (const auto& e : T.entries()) {
        double w = v[e.idx[mode]];
        if (w == 0.0) continue;
        typename SparseTensor<N - 1>::Index idx;
        for (int d = 0, o = 0; d < N; ++d)
            if (d != mode) idx[o++] = e.idx[d];
        acc.push_back({idx, w * e.value});
    }
    std::stable_sort(acc.begin(), acc.end(), [](const auto& a, const auto& b) { return a.idx < b.idx; });
    std::vector<typename SparseTensor<N - 1>::Entry> merged;
    for (const auto& e : acc) {
        if (!merged.empty() && merged.back().idx == e.idx)
            merged.back().value += e.value;
        else
            merged.push_back(e);
    }
    return SparseTensor<N - 1>(shape, std::move(merged));
}

}  // namespace utc
