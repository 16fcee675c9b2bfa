#include "utc/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "utc/affinity.hpp"

namespace utc {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

LabelMode parse_label_mode(const std::string& s) {
    if (s == "kmeans") return LabelMode::kmeans;
    if (s == "spectral-gram" || s == "spectral_gram") return LabelMode::spectral_gram;
    throw ArgumentError("unknown label mode '" + s + "'");
}

std::string to_string(LabelMode mode) { return mode == LabelMode::kmeans ? "kmeans" : "spectral-gram"; }

Orders orders_for_method(const std::string& method) {
    if (method == "sc") return Orders::pairwise_only();
    if (method == "utc-3") return {true, true, false};
    if (method == "utc-4") return {true, false, true};
    if (method == "utc") return Orders::all();
    throw ArgumentError("unknown method '" + method + "'");
}

Orders RunConfig::effective_orders() const { return orders ? *orders : orders_for_method(method); }

namespace {

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.find_first_not_of(" \t") == std::string::npos) continue;
        out.push_back(std::stoi(tok));
    }
    return out;
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"run.seed", [](RunConfig& c, const std::string& v) { c.seed = std::stoull(v); }},
        {"run.method", [](RunConfig& c, const std::string& v) { orders_for_method(v), c.method = v; }},
        {"run.orders",
         [](RunConfig& c, const std::string& v) {
             if (v.empty())
                 c.orders.reset();
             else
                 c.orders = Orders::parse(v);
         }},
        {"run.clusters", [](RunConfig& c, const std::string& v) { c.clusters = std::stoi(v); }},
        {"run.label_mode", [](RunConfig& c, const std::string& v) { c.label_mode = parse_label_mode(v); }},
        {"run.out", [](RunConfig& c, const std::string& v) { c.out = v; }},
        {"dataset.source", [](RunConfig& c, const std::string& v) { c.dataset.source = v; }},
        {"dataset.dimension", [](RunConfig& c, const std::string& v) { c.dataset.dimension = std::stol(v); }},
        {"dataset.n_per_line", [](RunConfig& c, const std::string& v) { c.dataset.n_per_line = std::stoi(v); }},
        {"dataset.noise", [](RunConfig& c, const std::string& v) { c.dataset.noise = std::stod(v); }},
        {"dataset.sizes", [](RunConfig& c, const std::string& v) { c.dataset.sizes = parse_int_list(v); }},
        {"dataset.path", [](RunConfig& c, const std::string& v) { c.dataset.path = v; }},
        {"dataset.label_column", [](RunConfig& c, const std::string& v) { c.dataset.label_column = v; }},
        {"affinity.k_neighbors", [](RunConfig& c, const std::string& v) { c.affinity.k_neighbors = std::stol(v); }},
        {"affinity.sigma", [](RunConfig& c, const std::string& v) { c.affinity.sigma = std::stod(v); }},
        {"affinity.eps", [](RunConfig& c, const std::string& v) { c.affinity.eps = std::stod(v); }},
        {"solver.mu0", [](RunConfig& c, const std::string& v) { c.solver.mu0 = std::stod(v); }},
        {"solver.mu_max", [](RunConfig& c, const std::string& v) { c.solver.mu_max = std::stod(v); }},
        {"solver.rho", [](RunConfig& c, const std::string& v) { c.solver.rho = std::stod(v); }},
        {"solver.alpha", [](RunConfig& c, const std::string& v) { c.solver.alpha = std::stod(v); }},
        {"solver.eps_inner", [](RunConfig& c, const std::string& v) { c.solver.eps_inner = std::stod(v); }},
        {"solver.eps_outer", [](RunConfig& c, const std::string& v) { c.solver.eps_outer = std::stod(v); }},
        {"solver.max_outer", [](RunConfig& c, const std::string& v) { c.solver.max_outer = std::stoi(v); }},
        {"solver.max_inner", [](RunConfig& c, const std::string& v) { c.solver.max_inner = std::stoi(v); }},
        {"solver.mu_floor_factor",
         [](RunConfig& c, const std::string& v) { c.solver.mu_floor_factor = std::stod(v); }},
        {"solver.init_noise", [](RunConfig& c, const std::string& v) { c.solver.init_noise = std::stod(v); }},
        {"solver.krylov_tol", [](RunConfig& c, const std::string& v) { c.solver.krylov_tol = std::stod(v); }},
        {"solver.krylov_max_iter",
         [](RunConfig& c, const std::string& v) { c.solver.krylov_max_iter = std::stoi(v); }},
        {"solver.shift_delta", [](RunConfig& c, const std::string& v) { c.solver.shift_delta = std::stod(v); }},
    };
    return table;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw PipelineError("config", e.message() + " at line " + std::to_string(e.line()));
    }
    RunConfig cfg;
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw PipelineError("config", "key '" + section + "' outside a section");
        for (const auto& [key, node] : body) {
            const std::string full = section + "." + key;
            auto it = setters().find(full);
            if (it == setters().end()) throw PipelineError("config", "unknown key '" + full + "'");
            try {
                it->second(cfg, node.get_value<std::string>());
            } catch (const std::exception& e) {
                throw PipelineError("config", "bad value for '" + full + "': " + e.what());
            }
        }
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PipelineError("config", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_string(const RunConfig& c) {
    pt::ptree t;
    t.put("run.seed", std::to_string(c.seed));
    t.put("run.method", c.method);
    t.put("run.orders", c.orders ? c.orders->to_string() : std::string());
    t.put("run.clusters", std::to_string(c.clusters));
    t.put("run.label_mode", to_string(c.label_mode));
    t.put("run.out", c.out);
    t.put("dataset.source", c.dataset.source);
    t.put("dataset.dimension", std::to_string(c.dataset.dimension));
    t.put("dataset.n_per_line", std::to_string(c.dataset.n_per_line));
    t.put("dataset.noise", format_real(c.dataset.noise));
    t.put("dataset.sizes", join_ints(c.dataset.sizes));
    t.put("dataset.path", c.dataset.path);
    t.put("dataset.label_column", c.dataset.label_column);
    t.put("affinity.k_neighbors", std::to_string(c.affinity.k_neighbors));
    t.put("affinity.sigma", format_real(c.affinity.sigma));
    t.put("affinity.eps", format_real(c.affinity.eps));
    const SolverConfig& s = c.solver;
    t.put("solver.mu0", format_real(s.mu0));
    t.put("solver.mu_max", format_real(s.mu_max));
    t.put("solver.rho", format_real(s.rho));
    t.put("solver.alpha", format_real(s.alpha));
    t.put("solver.eps_inner", format_real(s.eps_inner));
    t.put("solver.eps_outer", format_real(s.eps_outer));
    t.put("solver.max_outer", std::to_string(s.max_outer));
    t.put("solver.max_inner", std::to_string(s.max_inner));
    t.put("solver.mu_floor_factor", format_real(s.mu_floor_factor));
    t.put("solver.init_noise", format_real(s.init_noise));
    t.put("solver.krylov_tol", format_real(s.krylov_tol));
    t.put("solver.krylov_max_iter", std::to_string(s.krylov_max_iter));
    t.put("solver.shift_delta", format_real(s.shift_delta));
    std::ostringstream os;
    pt::write_ini(os, t);
    return os.str();
}

DataMatrix load_dataset(const RunConfig& cfg) {
    const DatasetSpec& d = cfg.dataset;
    try {
        if (d.source == "syndata1") return gen_syndata1(cfg.seed, d.n_per_line, d.noise);
        if (d.source == "syndata2") return gen_syndata2(cfg.seed, d.dimension, d.sizes);
        if (d.source == "csv") {
            std::optional<LabelColumn> col;
            if (!d.label_column.empty()) {
                long idx = 0;
                auto res = std::from_chars(d.label_column.data(), d.label_column.data() + d.label_column.size(), idx);
                if (res.ec == std::errc() && res.ptr == d.label_column.data() + d.label_column.size())
                    col = idx;
                else
                    col = d.label_column;
            }
            return load_csv(d.path, col);
        }
    } catch (const Error& e) {
        throw PipelineError("data", e.what());
    }
    throw PipelineError("data", "unknown dataset source '" + d.source + "'");
}

NormalizedOperators build_operators(const DataMatrix& data, const AffinityParams& params, const Orders& orders,
                                    OperatorDiagnostics* diag) {
    const long m = data.samples();
    if (m < 2) throw ArgumentError("build_operators: need at least 2 samples");
    const long k = params.k_neighbors > 0 ? params.k_neighbors : default_k_neighbors(m);
    DistanceMatrix D = pairwise_distances(data);
    AffinityMatrix A = pairwise_affinity(D, k);
    PairwiseNormalization p = normalize_pairwise(A.S);
    NormalizedOperators ops;
    ops.L2 = std::move(p.L);
    ops.degree2 = std::move(p.degree);
    ops.isolated = std::move(p.isolated);
    OperatorDiagnostics dg;
    dg.k_neighbors = k;
    dg.bandwidth = A.bandwidth;
    dg.isolated = static_cast<long>(ops.isolated.size());
    if (orders.triadic || orders.tetradic) {
        KnnIndex knn = knn_index(D, k);
        if (orders.triadic) {
            SparseTensor3 T3 = triadic_affinity(data.X, D, knn);
            dg.triadic_tuples = T3.nnz();
            ops.L3 = normalize_triadic(unfold3(T3)).L;
        }
        if (orders.tetradic) {
            SparseTensor4 T4 = tetradic_affinity(D, knn, params.sigma, params.eps);
            dg.tetradic_tuples = T4.nnz();
            ops.L4 = normalize_tetradic(unfold4(T4)).L;
        }
    }
    if (diag) *diag = dg;
    return ops;
}

namespace {

int class_count(const DataMatrix& data) {
    if (!data.labels || data.labels->empty()) return 0;
    return *std::max_element(data.labels->begin(), data.labels->end()) + 1;
}

}  // namespace

RunResult run_pipeline(const RunConfig& cfg, const DataMatrix& data) {
    Orders orders;
    try {
        orders = cfg.effective_orders();
        cfg.solver.validate();
    } catch (const Error& e) {
        throw PipelineError("config", e.what());
    }
    RunResult r;
    r.clusters = cfg.clusters > 0 ? cfg.clusters : class_count(data);
    if (r.clusters < 1) throw PipelineError("config", "cluster count unknown: set clusters or provide labels");

    NormalizedOperators ops;
    try {
        ops = build_operators(data, cfg.affinity, orders, &r.diagnostics);
    } catch (const Error& e) {
        throw PipelineError("affinity", e.what());
    }

    const bool baseline = cfg.method == "sc" && !cfg.orders;
    if (baseline) {
        try {
            r.labels = spectral_embedding_kmeans(ops.L2, r.clusters, cfg.seed, &r.embedding);
        } catch (const Error& e) {
            throw PipelineError("clustering", e.what());
        }
    } else {
        SolverConfig sc = cfg.solver;
        sc.k = r.clusters;
        sc.orders = orders;
        try {
            r.solution = utc_solve(ops, sc, cfg.seed);
        } catch (const Error& e) {
            throw PipelineError("solver", e.what());
        }
        r.embedding = r.solution->V;
        try {
            r.labels = cfg.label_mode == LabelMode::kmeans ? kmeans(r.embedding, r.clusters, cfg.seed)
                                                           : spectral_on_gram(r.embedding, r.clusters, cfg.seed);
        } catch (const Error& e) {
            throw PipelineError("clustering", e.what());
        }
    }
    if (data.labels) {
        try {
            r.metrics = evaluate(r.labels.assignment, *data.labels);
        } catch (const Error& e) {
            throw PipelineError("metrics", e.what());
        }
    }
    return r;
}

RunResult run_pipeline(const RunConfig& cfg) { return run_pipeline(cfg, load_dataset(cfg)); }

std::string RunResult::record(const RunConfig& cfg) const {
    std::ostringstream os;
    os << "method=" << cfg.method << '\n'
       << "orders=" << cfg.effective_orders().to_string() << '\n'
       << "seed=" << cfg.seed << '\n'
       << "samples=" << labels.size() << '\n'
       << "clusters=" << clusters << '\n'
       << "k_neighbors=" << diagnostics.k_neighbors << '\n'
       << "isolated=" << diagnostics.isolated << '\n';
    if (solution) {
        os << "converged=" << (solution->converged ? 1 : 0) << '\n'
           << "iterations=" << solution->iterations << '\n'
           << "objective=" << format_real(solution->objective) << '\n'
           << "coupling_residual=" << format_real(solution->coupling) << '\n'
           << "orthogonality_residual=" << format_real(solution->orthogonality) << '\n';
    }
    if (metrics) os << metrics->to_record();
    return os.str();
}

namespace {

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + p.string() + "'");
    out << text;
    if (!out) throw IoError("write failed for '" + p.string() + "'");
}

}  // namespace

RunResult run_to_directory(const RunConfig& cfg) {
    DataMatrix data = load_dataset(cfg);
    RunResult r = run_pipeline(cfg, data);
    try {
        fs::path dir(cfg.out);
        fs::create_directories(dir);
        export_matrix(r.embedding, (dir / "embedding.csv").string());
        export_matrix(r.embedding * r.embedding.transpose(), (dir / "gram.csv").string());
        DenseMatrix lab(r.labels.size(), data.labels ? 2 : 1);
        for (long i = 0; i < r.labels.size(); ++i) {
            lab(i, 0) = r.labels.assignment[i];
            if (data.labels) lab(i, 1) = (*data.labels)[i];
        }
        std::vector<std::string> names{"pred"};
        if (data.labels) names.push_back("truth");
        export_matrix(lab, (dir / "labels.csv").string(), names);
        std::string trace;
        if (r.solution)
            for (const auto& rec : r.solution->history) trace += rec.to_json() + '\n';
        write_text(dir / "trace.jsonl", trace);
        write_text(dir / "metrics.txt", r.record(cfg));
        write_text(dir / "config.ini", config_to_string(cfg));
    } catch (const std::exception& e) {
        throw PipelineError("output", e.what());
    }
    return r;
}

int sweep_workers() {
    if (const char* env = std::getenv("UTC_WORKERS")) {
        int w = std::atoi(env);
        if (w > 0) return w;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<SweepCell> sweep(const RunConfig& base, const std::vector<long>& dimensions,
                             const std::vector<std::string>& methods, const std::vector<std::uint64_t>& seeds,
                             int workers) {
    if (dimensions.empty() || methods.empty() || seeds.empty())
        throw PipelineError("config", "sweep needs nonempty dimension, method and seed lists");
    for (const auto& m : methods) {
        try {
            orders_for_method(m);
        } catch (const Error& e) {
            throw PipelineError("config", e.what());
        }
    }
    struct Job {
        std::size_t cell;
        RunConfig cfg;
        std::optional<MetricsReport> metrics;
        std::string error;
    };
    std::vector<SweepCell> cells;
    std::vector<Job> jobs;
    for (long dim : dimensions)
        for (const auto& method : methods) {
            SweepCell c;
            c.dimension = dim;
            c.method = method;
            cells.push_back(c);
            for (auto seed : seeds) {
                RunConfig cfg = base;
                cfg.dataset.dimension = dim;
                cfg.method = method;
                cfg.orders.reset();
                cfg.seed = seed;
                cfg.out = (fs::path(base.out) / ("dim" + std::to_string(dim) + "_" + method) /
                           ("seed" + std::to_string(seed)))
                              .string();
                jobs.push_back({cells.size() - 1, cfg, std::nullopt, {}});
            }
        }

    if (workers <= 0) workers = sweep_workers();
    workers = std::min<int>(workers, static_cast<int>(jobs.size()));
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            try {
                RunResult r = run_to_directory(jobs[j].cfg);
                if (r.metrics)
                    jobs[j].metrics = r.metrics;
                else
                    jobs[j].error = "no ground truth labels";
            } catch (const std::exception& e) {
                jobs[j].error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    // Fold in cell order so the table is independent of scheduling.
    std::vector<std::vector<MetricsReport>> per_cell(cells.size());
    for (const auto& job : jobs) {
        SweepCell& c = cells[job.cell];
        if (job.metrics) {
            per_cell[job.cell].push_back(*job.metrics);
            ++c.runs;
        } else {
            ++c.failures;
            c.errors.push_back("seed " + std::to_string(job.cfg.seed) + ": " + job.error);
        }
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& v = per_cell[i];
        if (v.empty()) continue;
        auto stat = [&](double MetricsReport::*f, double& mean, double& sd) {
            double s = 0.0;
            for (const auto& r : v) s += r.*f;
            mean = s / v.size();
            double q = 0.0;
            for (const auto& r : v) q += (r.*f - mean) * (r.*f - mean);
            sd = v.size() > 1 ? std::sqrt(q / (v.size() - 1)) : 0.0;
        };
        SweepCell& c = cells[i];
        stat(&MetricsReport::acc, c.mean.acc, c.sd.acc);
        stat(&MetricsReport::ari, c.mean.ari, c.sd.ari);
        stat(&MetricsReport::f_score, c.mean.f_score, c.sd.f_score);
        stat(&MetricsReport::nmi, c.mean.nmi, c.sd.nmi);
        stat(&MetricsReport::purity, c.mean.purity, c.sd.purity);
    }
    try {
        fs::create_directories(base.out);
        write_text(fs::path(base.out) / "sweep.csv", sweep_table(cells));
    } catch (const std::exception& e) {
        throw PipelineError("output", e.what());
    }
    return cells;
}

std::string sweep_table(const std::vector<SweepCell>& cells) {
    std::ostringstream os;
    os << "dimension,method,runs,failures,acc_mean,acc_sd,ari_mean,ari_sd,f_score_mean,f_score_sd,"
          "nmi_mean,nmi_sd,purity_mean,purity_sd\n";
    for (const auto& c : cells) {
        os << c.dimension << ',' << c.method << ',' << c.runs << ',' << c.failures;
        for (auto [m, s] : {std::pair{c.mean.acc, c.sd.acc}, std::pair{c.mean.ari, c.sd.ari},
                            std::pair{c.mean.f_score, c.sd.f_score}, std::pair{c.mean.nmi, c.sd.nmi},
                            std::pair{c.mean.purity, c.sd.purity}}) {
            if (c.runs == 0)
                os << ",,";
            else
                os << ',' << format_real(m) << ',' << format_real(s);
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace utc
