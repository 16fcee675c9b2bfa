#include "utc/data.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace utc {

DataMatrix gen_syndata1(std::uint64_t seed, int n_per_line, double noise) {
    if (n_per_line < 1) throw ArgumentError("gen_syndata1: n_per_line must be positive");
    if (!(noise >= 0.0)) throw ArgumentError("gen_syndata1: noise must be nonnegative");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(-1.0, 1.0);
    std::normal_distribution<double> jitter(0.0, 1.0);
    DataMatrix d;
    d.X = DenseMatrix::Zero(2 * n_per_line, 2);
    std::vector<int> labels(2 * n_per_line);
    for (int g = 0; g < 2; ++g)
        for (int t = 0; t < n_per_line; ++t) {
            long i = g * n_per_line + t;
            d.X(i, g) = pos(rng);
            labels[i] = g;
        }
    for (long i = 0; i < d.X.rows(); ++i)
        for (long j = 0; j < 2; ++j) d.X(i, j) += noise * jitter(rng);
    d.labels = std::move(labels);
    d.provenance = "syndata1(seed=" + std::to_string(seed) + ")";
    return d;
}

DataMatrix gen_syndata2(std::uint64_t seed, long dimension, const std::vector<int>& sizes) {
    if (sizes.size() != 3) throw ArgumentError("gen_syndata2: exactly three group sizes expected");
    for (int s : sizes)
        if (s < 30 || s > 40) throw ArgumentError("gen_syndata2: group sizes must lie in [30, 40]");
    const long block = dimension / 3;
    if (block < 1) throw ArgumentError("gen_syndata2: dimension too small for three nonempty blocks");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> entry(2.0, 0.5);
    long m = 0;
    for (int s : sizes) m += s;
    DataMatrix d;
    d.X = DenseMatrix::Zero(m, dimension);
    std::vector<int> labels(m);
    long row = 0;
    for (int g = 0; g < 3; ++g)
        for (int t = 0; t < sizes[g]; ++t, ++row) {
            labels[row] = g;
            for (long c = 0; c < block; ++c) d.X(row, g * block + c) = entry(rng);
        }
    d.labels = std::move(labels);
    d.provenance = "syndata2(seed=" + std::to_string(seed) + ",dim=" + std::to_string(dimension) + ")";
    return d;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_real(const std::string& s, double& v) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    const char* first = t.data();
    if (*first == '+') ++first;
    auto res = std::from_chars(first, t.data() + t.size(), v);
    return res.ec == std::errc() && res.ptr == t.data() + t.size();
}

}  // namespace

DataMatrix load_csv(const std::string& path, const std::optional<LabelColumn>& label_column) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        rows.push_back(split_line(line));
    }

    std::vector<std::string> header;
    std::size_t first = 0;
    if (!rows.empty()) {
        double v;
        for (const auto& cell : rows[0])
            if (!parse_real(cell, v)) {
                for (const auto& h : rows[0]) header.push_back(trim(h));
                first = 1;
                break;
            }
    }
    const long width = header.empty() ? (rows.empty() ? 0 : static_cast<long>(rows[0].size()))
                                      : static_cast<long>(header.size());

    long label_idx = -1;
    if (label_column) {
        if (const auto* name = std::get_if<std::string>(&*label_column)) {
            auto it = std::find(header.begin(), header.end(), *name);
            if (it == header.end()) throw ParseError("label column '" + *name + "' not found in header", 1, 0);
            label_idx = it - header.begin();
        } else {
            label_idx = std::get<long>(*label_column);
            if (label_idx < 0 || label_idx >= width)
                throw ParseError("label column index out of range", static_cast<long>(first + 1), label_idx + 1);
        }
    }

    const long m = static_cast<long>(rows.size() - first);
    const long n = width - (label_idx >= 0 ? 1 : 0);
    DataMatrix d;
    d.X.resize(m, n);
    std::vector<std::string> raw_labels;
    for (long r = 0; r < m; ++r) {
        const auto& cells = rows[first + r];
        const long file_row = static_cast<long>(first + r + 1);
        if (static_cast<long>(cells.size()) != width)
            throw ParseError("expected " + std::to_string(width) + " fields, found " + std::to_string(cells.size()),
                             file_row, static_cast<long>(cells.size()));
        for (long c = 0, f = 0; c < width; ++c) {
            if (c == label_idx) {
                raw_labels.push_back(trim(cells[c]));
                continue;
            }
            double v;
            if (!parse_real(cells[c], v)) throw ParseError("non-numeric cell '" + trim(cells[c]) + "'", file_row, c + 1);
            if (!std::isfinite(v)) throw ParseError("non-finite cell", file_row, c + 1);
            d.X(r, f++) = v;
        }
    }

    if (label_idx >= 0) {
        // Dense ids in sorted order of the raw values, numeric when every value is an integer.
        bool numeric = true;
        std::vector<long> nums;
        for (const auto& s : raw_labels) {
            long x;
            auto res = std::from_chars(s.data(), s.data() + s.size(), x);
            if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
                numeric = false;
                break;
            }
            nums.push_back(x);
        }
        std::vector<int> labels(m);
        if (numeric) {
            std::vector<long> u = nums;
            std::sort(u.begin(), u.end());
            u.erase(std::unique(u.begin(), u.end()), u.end());
            for (long i = 0; i < m; ++i)
                labels[i] = static_cast<int>(std::lower_bound(u.begin(), u.end(), nums[i]) - u.begin());
        } else {
            std::map<std::string, int> ids;
            for (const auto& s : raw_labels) ids.emplace(s, 0);
            int next = 0;
            for (auto& [k, v] : ids) v = next++;
            for (long i = 0; i < m; ++i) labels[i] = ids[raw_labels[i]];
        }
        d.labels = std::move(labels);
    }
    d.provenance = path;
    return d;
}

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void export_matrix(const DenseMatrix& M, const std::string& path, const std::vector<std::string>& column_names) {
    if (!M.allFinite()) throw InputError("export_matrix: non-finite entry");
    if (!column_names.empty() && static_cast<long>(column_names.size()) != M.cols())
        throw DimensionError("export_matrix: column name count mismatch");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    std::string text;
    if (!column_names.empty() || M.rows() == 0) {
        for (long c = 0; c < M.cols(); ++c) {
            if (c) text += ',';
            text += column_names.empty() ? "c" + std::to_string(c) : column_names[c];
        }
        text += '\n';
    }
    for (long r = 0; r < M.rows(); ++r) {
        for (long c = 0; c < M.cols(); ++c) {
            if (c) text += ',';
            text += format_real(M(r, c));
        }
        text += '\n';
    }
    out << text;
    if (!out) throw IoError("write failed for '" + path + "'");
}

void export_dataset(const DataMatrix& data, const std::string& path) {
    std::vector<std::string> names;
    for (long c = 0; c < data.features(); ++c) names.push_back("x" + std::to_string(c));
    DenseMatrix M = data.X;
    if (data.labels) {
        M.conservativeResize(Eigen::NoChange, data.features() + 1);
        for (long i = 0; i < data.samples(); ++i) M(i, data.features()) = (*data.labels)[i];
        names.push_back("label");
    }
    export_matrix(M, path, names);
}

}  // namespace utc
