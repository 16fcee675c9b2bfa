#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "utc/clustering.hpp"
#include "utc/data.hpp"
#include "utc/error.hpp"
#include "utc/metrics.hpp"
#include "utc/normalize.hpp"
#include "utc/solver.hpp"

namespace utc {

// Carries the pipeline stage that failed: config, data, affinity, solver,
// clustering, metrics or output.
class PipelineError : public Error {
public:
    PipelineError(std::string stage, const std::string& what)
        : Error("stage=" + stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

enum class LabelMode { kmeans, spectral_gram };

LabelMode parse_label_mode(const std::string& s);
std::string to_string(LabelMode mode);

struct DatasetSpec {
    std::string source = "syndata2";  // syndata1, syndata2 or csv
    long dimension = 10000;
    int n_per_line = 20;
    double noise = 0.01;
    std::vector<int> sizes{34, 33, 33};
    std::string path;
    std::string label_column;  // name, or a number for a column index
};

struct AffinityParams {
    long k_neighbors = 0;  // 0 picks min(10, m - 1)
    double sigma = 1e-6;
    double eps = 1e-8;
};

struct RunConfig {
    DatasetSpec dataset;
    AffinityParams affinity;
    std::string method = "utc";  // sc, utc-3, utc-4, utc
    std::optional<Orders> orders;  // overrides the method's orders
    SolverConfig solver;
    int clusters = 0;  // 0 takes the number of ground-truth classes
    LabelMode label_mode = LabelMode::spectral_gram;
    std::string out = "utc_out";
    std::uint64_t seed = 0;

    Orders effective_orders() const;
};

// Reads and writes the key=value section format.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text);
std::string config_to_string(const RunConfig& cfg);

Orders orders_for_method(const std::string& method);

DataMatrix load_dataset(const RunConfig& cfg);

struct OperatorDiagnostics {
    long k_neighbors = 0;
    double bandwidth = 0.0;
    std::size_t triadic_tuples = 0;
    std::size_t tetradic_tuples = 0;
    long isolated = 0;
};

NormalizedOperators build_operators(const DataMatrix& data, const AffinityParams& params, const Orders& orders,
                                    OperatorDiagnostics* diag = nullptr);

struct RunResult {
    ClusterLabels labels;
    DenseMatrix embedding;
    std::optional<Embedding> solution;  // absent for the spectral baseline
    std::optional<MetricsReport> metrics;
    OperatorDiagnostics diagnostics;
    int clusters = 0;

    // Deterministic key=value record of the outcome.
    std::string record(const RunConfig& cfg) const;
};

// Runs the pipeline in memory.
RunResult run_pipeline(const RunConfig& cfg, const DataMatrix& data);
RunResult run_pipeline(const RunConfig& cfg);

// Runs and writes embedding.csv, gram.csv, labels.csv, trace.jsonl,
// metrics.txt and config.ini to cfg.out.
RunResult run_to_directory(const RunConfig& cfg);

struct SweepCell {
    long dimension = 0;
    std::string method;
    int runs = 0;
    int failures = 0;
    std::vector<std::string> errors;
    MetricsReport mean;
    MetricsReport sd;
};

// Worker count from UTC_WORKERS, else the hardware concurrency.
int sweep_workers();

// Cross product of dimensions, methods and seeds; writes sweep.csv plus one
// subdirectory per cell under cfg.out.
std::vector<SweepCell> sweep(const RunConfig& cfg, const std::vector<long>& dimensions,
                             const std::vector<std::string>& methods, const std::vector<std::uint64_t>& seeds,
                             int workers = 0);

std::string sweep_table(const std::vector<SweepCell>& cells);

}  // namespace utc
