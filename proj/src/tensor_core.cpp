#include "utc/tensor_core.hpp"

#include <limits>

namespace utc {

namespace {

long checked_mul(long a, long b, const char* what) {
    long r = 0;
    if (__builtin_mul_overflow(a, b, &r)) throw CapacityError(std::string(what) + ": dimension overflow");
    return r;
}

void check_product_size(long rows, long cols, const char* what) {
    long total = checked_mul(rows, cols, what);
    if (total > std::numeric_limits<long>::max() / static_cast<long>(sizeof(double)))
        throw CapacityError(std::string(what) + ": result too large");
}

}  // namespace

DenseMatrix hadamard(const DenseMatrix& A, const DenseMatrix& B) {
    if (A.rows() != B.rows() || A.cols() != B.cols()) throw DimensionError("hadamard: shape mismatch");
    return A.cwiseProduct(B);
}

DenseMatrix kronecker(const DenseMatrix& A, const DenseMatrix& B) {
    long rows = checked_mul(A.rows(), B.rows(), "kronecker");
    long cols = checked_mul(A.cols(), B.cols(), "kronecker");
    check_product_size(rows, cols, "kronecker");
    DenseMatrix K(rows, cols);
    for (long i = 0; i < A.rows(); ++i)
        for (long j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

DenseMatrix khatri_rao(const DenseMatrix& A, const DenseMatrix& B) {
    if (A.cols() != B.cols()) throw DimensionError("khatri_rao: column count mismatch");
    long rows = checked_mul(A.rows(), B.rows(), "khatri_rao");
    check_product_size(rows, A.cols(), "khatri_rao");
    DenseMatrix K(rows, A.cols());
    for (long j = 0; j < A.cols(); ++j)
        for (long a = 0; a < A.rows(); ++a)
            K.col(j).segment(a * B.rows(), B.rows()) = A(a, j) * B.col(j);
    return K;
}

SparseMatrix kronecker(const SparseMatrix& A, const SparseMatrix& B) {
    long rows = checked_mul(A.rows(), B.rows(), "kronecker");
    long cols = checked_mul(A.cols(), B.cols(), "kronecker");
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(A.nonZeros()) * static_cast<std::size_t>(B.nonZeros()));
    for (long ja = 0; ja < A.outerSize(); ++ja)
        for (SparseMatrix::InnerIterator ia(A, ja); ia; ++ia)
            for (long jb = 0; jb < B.outerSize(); ++jb)
                for (SparseMatrix::InnerIterator ib(B, jb); ib; ++ib)
                    t.emplace_back(ia.row() * B.rows() + ib.row(), ia.col() * B.cols() + ib.col(),
                                   ia.value() * ib.value());
    return make_sparse(rows, cols, std::move(t));
}

SparseMatrix khatri_rao(const SparseMatrix& A, const SparseMatrix& B) {
    if (A.cols() != B.cols()) throw DimensionError("khatri_rao: column count mismatch");
    long rows = checked_mul(A.rows(), B.rows(), "khatri_rao");
    std::vector<Triplet> t;
    for (long j = 0; j < A.cols(); ++j)
        for (SparseMatrix::InnerIterator ia(A, j); ia; ++ia)
            for (SparseMatrix::InnerIterator ib(B, j); ib; ++ib)
                t.emplace_back(ia.row() * B.rows() + ib.row(), j, ia.value() * ib.value());
    return make_sparse(rows, A.cols(), std::move(t));
}

SparseMatrix make_sparse(long rows, long cols, std::vector<Triplet> triplets) {
    std::erase_if(triplets, [](const Triplet& t) { return t.value() == 0.0; });
    for (const auto& t : triplets) {
        if (t.row() < 0 || t.row() >= rows || t.col() < 0 || t.col() >= cols)
            throw ArgumentError("sparse triplet out of range");
        if (!std::isfinite(t.value())) throw InputError("non-finite sparse value");
    }
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.col() != b.col() ? a.col() < b.col() : a.row() < b.row();
    });
    for (std::size_t i = 1; i < triplets.size(); ++i)
        if (triplets[i].row() == triplets[i - 1].row() && triplets[i].col() == triplets[i - 1].col())
            throw ArgumentError("duplicate sparse entry");
    SparseMatrix M(rows, cols);
    M.setFromTriplets(triplets.begin(), triplets.end());
    M.makeCompressed();
    return M;
}

SparseMatrix unfold3(const SparseTensor3& T) {
    long m = T.dim();
    const auto& s = T.shape();
    if (s[1] != m || s[2] != m) throw DimensionError("unfold3: tensor must be cubical");
    std::vector<Triplet> t;
    t.reserve(T.nnz());
    for (const auto& e : T.entries()) t.emplace_back(e.idx[0] * m + e.idx[2], e.idx[1], e.value);
    return make_sparse(checked_mul(m, m, "unfold3"), m, std::move(t));
}

SparseMatrix unfold4(const SparseTensor4& T) {
    long m = T.dim();
    const auto& s = T.shape();
    if (s[1] != m || s[2] != m || s[3] != m) throw DimensionError("unfold4: tensor must be cubical");
    long mm = checked_mul(m, m, "unfold4");
    std::vector<Triplet> t;
    t.reserve(T.nnz());
    for (const auto& e : T.entries())
        t.emplace_back(e.idx[1] * m + e.idx[0], e.idx[3] * m + e.idx[2], e.value);
    return make_sparse(mm, mm, std::move(t));
}

}  // namespace utc
