#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "utc/data.hpp"
#include "utc/metrics.hpp"
#include "utc/pipeline.hpp"

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> orders;
    std::optional<long> k_neighbors;
    std::optional<int> clusters;
    std::optional<std::string> label_mode;
    std::optional<std::string> method;
    std::optional<std::string> data;
    std::optional<std::string> label_column;
    std::optional<long> dim;
};

void add_common(CLI::App* app, Overrides& o) {
    app->add_option("--config", o.config, "key=value config file");
    app->add_option("--seed", o.seed, "random seed");
    app->add_option("--out", o.out, "output directory");
    app->add_option("--orders", o.orders, "affinity orders, e.g. 2,3,4");
    app->add_option("--k-neighbors", o.k_neighbors, "neighbor count for affinities");
    app->add_option("--clusters", o.clusters, "number of clusters");
    app->add_option("--label-mode", o.label_mode, "kmeans or spectral-gram")
        ->check(CLI::IsMember({"kmeans", "spectral-gram"}));
    app->add_option("--method", o.method, "sc, utc-3, utc-4 or utc")
        ->check(CLI::IsMember({"sc", "utc-3", "utc-4", "utc"}));
    app->add_option("--data", o.data, "CSV dataset (sets source=csv)");
    app->add_option("--label-column", o.label_column, "CSV label column, by name or 0-based index");
    app->add_option("--dim", o.dim, "feature dimension for syndata2");
}

utc::RunConfig resolve(const Overrides& o) {
    utc::RunConfig c = o.config.empty() ? utc::RunConfig{} : utc::load_config(o.config);
    try {
        if (o.seed) c.seed = *o.seed;
        if (o.out) c.out = *o.out;
        if (o.method) {
            c.method = *o.method;
            c.orders.reset();
        }
        if (o.orders) c.orders = utc::Orders::parse(*o.orders);
        if (o.k_neighbors) c.affinity.k_neighbors = *o.k_neighbors;
        if (o.clusters) c.clusters = *o.clusters;
        if (o.label_mode) c.label_mode = utc::parse_label_mode(*o.label_mode);
        if (o.data) {
            c.dataset.source = "csv";
            c.dataset.path = *o.data;
        }
        if (o.label_column) c.dataset.label_column = *o.label_column;
        if (o.dim) c.dataset.dimension = *o.dim;
    } catch (const utc::Error& e) {
        throw utc::PipelineError("config", e.what());
    }
    return c;
}

std::vector<int> read_labels(const std::string& path, const std::string& column) {
    utc::DataMatrix d = utc::load_csv(path, utc::LabelColumn{column});
    return *d.labels;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Clustering with fused pairwise, triadic and tetradic affinities"};
    app.require_subcommand(1);

    Overrides gen_o, run_o, sweep_o;
    std::string source = "syndata2";
    std::string gen_path = "dataset.csv";
    auto* gen = app.add_subcommand("generate", "write a synthetic dataset as CSV");
    add_common(gen, gen_o);
    gen->add_option("--source", source, "syndata1 or syndata2")->check(CLI::IsMember({"syndata1", "syndata2"}));
    gen->add_option("--file", gen_path, "output CSV path");

    auto* run = app.add_subcommand("run", "run one experiment and write its artifacts");
    add_common(run, run_o);

    std::vector<long> dims;
    std::vector<std::string> methods;
    std::vector<std::uint64_t> seeds;
    auto* sw = app.add_subcommand("sweep", "cross product of dimensions, methods and seeds");
    add_common(sw, sweep_o);
    sw->add_option("--dims", dims, "feature dimensions")->delimiter(',')->required();
    sw->add_option("--methods", methods, "methods")->delimiter(',')->required();
    sw->add_option("--seeds", seeds, "seeds")->delimiter(',')->required();

    std::string pred_path, truth_path, pred_col = "pred", truth_col = "truth";
    auto* ev = app.add_subcommand("eval", "score predicted labels against ground truth");
    ev->add_option("--pred", pred_path, "CSV with predicted labels")->required();
    ev->add_option("--truth", truth_path, "CSV with true labels (defaults to --pred)");
    ev->add_option("--pred-column", pred_col, "predicted label column name");
    ev->add_option("--truth-column", truth_col, "true label column name");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            utc::RunConfig c = resolve(gen_o);
            c.dataset.source = source;
            utc::DataMatrix d = utc::load_dataset(c);
            std::string path = gen_o.out ? *gen_o.out : gen_path;
            try {
                utc::export_dataset(d, path);
            } catch (const utc::Error& e) {
                throw utc::PipelineError("output", e.what());
            }
            std::cout << "wrote " << d.samples() << " samples x " << d.features() << " features to " << path << '\n';
        } else if (*run) {
            utc::RunConfig c = resolve(run_o);
            utc::RunResult r = utc::run_to_directory(c);
            std::cout << r.record(c);
        } else if (*sw) {
            utc::RunConfig c = resolve(sweep_o);
            auto cells = utc::sweep(c, dims, methods, seeds);
            std::cout << utc::sweep_table(cells);
            for (const auto& cell : cells)
                for (const auto& e : cell.errors)
                    std::cerr << "cell dim=" << cell.dimension << " method=" << cell.method << ": " << e << '\n';
        } else if (*ev) {
            std::vector<int> pred, truth;
            try {
                pred = read_labels(pred_path, pred_col);
                truth = read_labels(truth_path.empty() ? pred_path : truth_path, truth_col);
            } catch (const utc::Error& e) {
                throw utc::PipelineError("data", e.what());
            }
            try {
                std::cout << utc::evaluate(pred, truth).to_record();
            } catch (const utc::Error& e) {
                throw utc::PipelineError("metrics", e.what());
            }
        }
    } catch (const utc::PipelineError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
