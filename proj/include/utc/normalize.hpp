#pragma once

#include <optional>
#include <vector>

#include "utc/tensor_core.hpp"

namespace utc {

struct PairwiseNormalization {
    DenseMatrix L;
    Vector degree;
    // Rows with zero degree; they come out as zero rows.
    std::vector<long> isolated;
};

struct SparseNormalization {
    SparseMatrix L;
    Vector left_degree;
    Vector right_degree;
    long zero_rows = 0;
    long zero_cols = 0;
};

// D^{-1/2} S D^{-1/2} with D the row sums of S.
PairwiseNormalization normalize_pairwise(const DenseMatrix& S);

// Left degrees from row sums of |T|, right degrees from column sums of |T|.
SparseNormalization normalize_triadic(const SparseMatrix& T3u);
// Same scaling with caller-supplied degrees (length m^2 and m).
SparseNormalization normalize_triadic(const SparseMatrix& T3u, const Vector& left_degree,
                                      const Vector& right_degree);

// Degrees for an input of the form S * S given the pairwise degrees d:
// left d (x) d, right d .* d.
std::pair<Vector, Vector> decomposable_triadic_degrees(const Vector& pairwise_degree);

// Symmetric scaling by row sums of |T|.
SparseNormalization normalize_tetradic(const SparseMatrix& T4u);

struct NormalizedOperators {
    DenseMatrix L2;
    std::optional<SparseMatrix> L3;
    std::optional<SparseMatrix> L4;
    Vector degree2;
    std::vector<long> isolated;

    long samples() const { return L2.rows(); }
};

}  // namespace utc
