#include "utc/normalize.hpp"

#include <cmath>

namespace utc {

namespace {

Vector inv_sqrt(const Vector& d, long& zeros) {
    Vector r(d.size());
    zeros = 0;
    for (long i = 0; i < d.size(); ++i) {
        if (d[i] > 0.0) {
            r[i] = 1.0 / std::sqrt(d[i]);
        } else {
            r[i] = 0.0;
            ++zeros;
        }
    }
    return r;
}

SparseMatrix scale(const SparseMatrix& T, const Vector& left, const Vector& right) {
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(T.nonZeros()));
    for (long j = 0; j < T.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(T, j); it; ++it)
            t.emplace_back(it.row(), it.col(), it.value() * (left[it.row()] * right[it.col()]));
    return make_sparse(T.rows(), T.cols(), std::move(t));
}

Vector abs_row_sums(const SparseMatrix& T) {
    Vector r = Vector::Zero(T.rows());
    for (long j = 0; j < T.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(T, j); it; ++it) r[it.row()] += std::abs(it.value());
    return r;
}

Vector abs_col_sums(const SparseMatrix& T) {
    Vector c = Vector::Zero(T.cols());
    for (long j = 0; j < T.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(T, j); it; ++it) c[j] += std::abs(it.value());
    return c;
}

}  // namespace

PairwiseNormalization normalize_pairwise(const DenseMatrix& S) {
    if (S.rows() != S.cols()) throw DimensionError("normalize_pairwise: S must be square");
    PairwiseNormalization out;
    out.degree = S.rowwise().sum();
    long zeros = 0;
    Vector di = inv_sqrt(out.degree, zeros);
    for (long i = 0; i < di.size(); ++i)
        if (di[i] == 0.0) out.isolated.push_back(i);
    // Scale by the product of both factors so that symmetric input stays exactly symmetric.
    out.L = S.cwiseProduct(di * di.transpose());
    return out;
}

SparseNormalization normalize_triadic(const SparseMatrix& T3u) {
    long m = T3u.cols();
    if (T3u.rows() != m * m) throw DimensionError("normalize_triadic: expected an m^2 x m matrix");
    return normalize_triadic(T3u, abs_row_sums(T3u), abs_col_sums(T3u));
}

SparseNormalization normalize_triadic(const SparseMatrix& T3u, const Vector& left_degree,
                                      const Vector& right_degree) {
    long m = T3u.cols();
    if (T3u.rows() != m * m) throw DimensionError("normalize_triadic: expected an m^2 x m matrix");
    if (left_degree.size() != T3u.rows() || right_degree.size() != m)
        throw DimensionError("normalize_triadic: degree length mismatch");
    SparseNormalization out;
    out.left_degree = left_degree;
    out.right_degree = right_degree;
    Vector l = inv_sqrt(left_degree, out.zero_rows);
    Vector r = inv_sqrt(right_degree, out.zero_cols);
    out.L = scale(T3u, l, r);
    return out;
}

std::pair<Vector, Vector> decomposable_triadic_degrees(const Vector& d) {
    const long m = d.size();
    Vector left(m * m);
    for (long a = 0; a < m; ++a) left.segment(a * m, m) = d[a] * d;
    return {left, d.cwiseProduct(d)};
}

SparseNormalization normalize_tetradic(const SparseMatrix& T4u) {
    if (T4u.rows() != T4u.cols()) throw DimensionError("normalize_tetradic: expected a square matrix");
    SparseNormalization out;
    out.left_degree = abs_row_sums(T4u);
    out.right_degree = out.left_degree;
    Vector s = inv_sqrt(out.left_degree, out.zero_rows);
    out.zero_cols = out.zero_rows;
    out.L = scale(T4u, s, s);
    return out;
}

}  // namespace utc
