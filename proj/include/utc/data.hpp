#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "utc/tensor_core.hpp"

namespace utc {

// m samples (rows) by n features.
struct DataMatrix {
    DenseMatrix X;
    std::optional<std::vector<int>> labels;
    std::string provenance;

    long samples() const { return X.rows(); }
    long features() const { return X.cols(); }
};

// Two groups sampled uniformly on [-1,1] along the x and y axes, with
// isotropic Gaussian jitter. Labels are the line index.
DataMatrix gen_syndata1(std::uint64_t seed, int n_per_line = 20, double noise = 0.01);

// Groups on disjoint contiguous feature blocks of width dimension/3, entries
// N(2, 0.5) inside the block and 0 elsewhere. Leftover columns stay zero.
DataMatrix gen_syndata2(std::uint64_t seed, long dimension, const std::vector<int>& sizes = {34, 33, 33});

// Column selector: by header name or by 0-based index.
using LabelColumn = std::variant<std::string, long>;

// Comma-separated numeric table with an optional header row. A header is
// assumed when any cell of the first row is not a number.
DataMatrix load_csv(const std::string& path, const std::optional<LabelColumn>& label_column = std::nullopt);

// Writes M with 17 significant digits. A header row is written when names are
// given, or always for a matrix without rows.
void export_matrix(const DenseMatrix& M, const std::string& path,
                   const std::vector<std::string>& column_names = {});

// Writes features followed by a "label" column when labels are present.
void export_dataset(const DataMatrix& data, const std::string& path);

std::string format_real(double v);

}  // namespace utc
