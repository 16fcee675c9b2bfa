#include "utc/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <unsupported/Eigen/IterativeSolvers>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

namespace utc {

Orders Orders::parse(const std::string& text) {
    Orders o{false, false, false};
    std::stringstream ss(text);
    std::string tok;
    bool any = false;
    while (std::getline(ss, tok, ',')) {
        tok.erase(std::remove_if(tok.begin(), tok.end(), ::isspace), tok.end());
        if (tok.empty()) continue;
        if (tok == "2" || tok == "pairwise")
            o.pairwise = true;
        else if (tok == "3" || tok == "triadic")
            o.triadic = true;
        else if (tok == "4" || tok == "tetradic")
            o.tetradic = true;
        else
            throw ArgumentError("unknown order '" + tok + "'");
        any = true;
    }
    if (!any) throw ArgumentError("orders must not be empty");
    if (!o.pairwise) throw ArgumentError("orders must include pairwise");
    return o;
}

std::string Orders::to_string() const {
    std::string s;
    auto add = [&](bool on, const char* t) {
        if (!on) return;
        if (!s.empty()) s += ',';
        s += t;
    };
    add(pairwise, "2");
    add(triadic, "3");
    add(tetradic, "4");
    return s;
}

void SolverConfig::validate() const {
    if (k < 1) throw ArgumentError("solver: k must be positive");
    if (!(mu0 > 0.0) || !(mu_max > 0.0)) throw ArgumentError("solver: mu0 and mu_max must be positive");
    if (!(rho > 1.0)) throw ArgumentError("solver: rho must exceed 1");
    if (!(alpha > 0.0)) throw ArgumentError("solver: alpha must be positive");
    if (!(eps_inner > 0.0) || !(eps_outer > 0.0)) throw ArgumentError("solver: tolerances must be positive");
    if (max_outer < 0 || max_inner < 1) throw ArgumentError("solver: iteration limits out of range");
    if (!orders.pairwise) throw ArgumentError("solver: orders must include pairwise");
    if (mu_floor_factor < 0.0 || init_noise < 0.0) throw ArgumentError("solver: negative factor");
    if (!(krylov_tol > 0.0) || krylov_max_iter < 1) throw ArgumentError("solver: bad Krylov settings");
}

std::string TraceRecord::to_json() const {
    nlohmann::ordered_json j;
    j["iteration"] = iteration;
    j["objective"] = objective;
    j["coupling"] = coupling;
    j["orthogonality"] = orthogonality;
    j["delta_v1"] = delta_v1;
    j["delta_v2"] = delta_v2;
    j["mu"] = mu;
    j["inner_steps"] = inner_steps;
    j["krylov_iterations"] = krylov_iterations;
    j["shifted"] = shifted;
    return j.dump();
}

DenseMatrix self_khatri_rao(const DenseMatrix& V) {
    const long m = V.rows();
    DenseMatrix W(m * m, V.cols());
    for (long c = 0; c < V.cols(); ++c)
        for (long a = 0; a < m; ++a) W.col(c).segment(a * m, m) = V(a, c) * V.col(c);
    return W;
}

namespace {

void check_ops(const NormalizedOperators& ops, const Orders& orders, long m) {
    if (ops.L2.rows() != m || ops.L2.cols() != m) throw DimensionError("solver: L2 shape does not match V");
    if (orders.triadic) {
        if (!ops.L3) throw ArgumentError("solver: triadic order selected without an L3 operator");
        if (ops.L3->rows() != m * m || ops.L3->cols() != m) throw DimensionError("solver: L3 must be m^2 x m");
    }
    if (orders.tetradic) {
        if (!ops.L4) throw ArgumentError("solver: tetradic order selected without an L4 operator");
        if (ops.L4->rows() != m * m || ops.L4->cols() != m * m)
            throw DimensionError("solver: L4 must be m^2 x m^2");
    }
}

double inf_norm(const DenseMatrix& A) { return A.size() ? A.cwiseAbs().maxCoeff() : 0.0; }

bool is_symmetric(const SparseMatrix& A) {
    SparseMatrix At = A.transpose();
    double scale = std::max(1.0, A.norm());
    return (A - At).norm() <= 1e-12 * scale;
}

// Parts of the augmented Lagrangian that depend on V1, given the fixed V2 terms.
double al_v1_terms(const DenseMatrix& V1, const SolverState& s, const NormalizedOperators& ops,
                   const Orders& orders) {
    const long k = V1.cols();
    double f = -(V1.transpose() * ops.L2 * V1).trace();
    if (orders.triadic) f -= s.V2.cwiseProduct(*ops.L3 * V1).sum();
    DenseMatrix C = self_khatri_rao(V1) - s.V2;
    DenseMatrix O = V1.transpose() * V1 - DenseMatrix::Identity(k, k);
    f += s.Y1.cwiseProduct(C).sum() + s.Y2.cwiseProduct(O).sum();
    f += 0.5 * s.mu * (C.squaredNorm() + O.squaredNorm());
    return f;
}

// Gradient in V1 evaluated at V1 with the remaining state taken from s.
DenseMatrix grad_at(const DenseMatrix& V1, const SolverState& s, const NormalizedOperators& ops,
                    const Orders& orders) {
    const long m = V1.rows();
    const long k = V1.cols();
    DenseMatrix g = -2.0 * ops.L2 * V1;
    if (orders.triadic) g -= ops.L3->transpose() * s.V2;
    DenseMatrix R = s.mu * (self_khatri_rao(V1) - s.V2) + s.Y1;
    for (long c = 0; c < k; ++c) {
        // Column-major map of r gives M(b, a) = r[a m + b].
        Eigen::Map<const DenseMatrix> M(R.col(c).data(), m, m);
        g.col(c) += M * V1.col(c) + M.transpose() * V1.col(c);
    }
    // Y2 + Y2' reduces to 2 Y2 for the symmetric multipliers the solver produces.
    g += V1 * (2.0 * s.mu * (V1.transpose() * V1 - DenseMatrix::Identity(k, k)) + s.Y2 + s.Y2.transpose());
    return g;
}

double tetradic_v2_term(const SolverState& s, const NormalizedOperators& ops, const Orders& orders) {
    return orders.tetradic ? -s.V2.cwiseProduct(*ops.L4 * s.V2).sum() : 0.0;
}

// Sign of each column chosen so that its odd-order contribution is
// nonnegative; columns without one get a nonnegative sum instead.
void orient_columns(DenseMatrix& V, const NormalizedOperators& ops, const Orders& orders) {
    for (long c = 0; c < V.cols(); ++c) {
        double score = 0.0;
        if (orders.triadic) {
            DenseMatrix v = V.col(c);
            score = self_khatri_rao(v).cwiseProduct(*ops.L3 * v).sum();
        }
        if (std::abs(score) <= 1e-12) score = V.col(c).sum();
        if (std::abs(score) <= 1e-12) {
            for (long i = 0; i < V.rows(); ++i)
                if (V(i, c) != 0.0) {
                    score = V(i, c);
                    break;
                }
        }
        if (score < 0.0) V.col(c) = -V.col(c);
    }
}

}  // namespace

double objective(const DenseMatrix& V, const NormalizedOperators& ops, const Orders& orders) {
    check_ops(ops, orders, V.rows());
    double f = -(V.transpose() * ops.L2 * V).trace();
    if (orders.triadic || orders.tetradic) {
        DenseMatrix W = self_khatri_rao(V);
        if (orders.triadic) f -= W.cwiseProduct(*ops.L3 * V).sum();
        if (orders.tetradic) f -= W.cwiseProduct(*ops.L4 * W).sum();
    }
    return f;
}

double augmented_lagrangian(const SolverState& s, const NormalizedOperators& ops, const Orders& orders) {
    check_ops(ops, orders, s.V1.rows());
    return al_v1_terms(s.V1, s, ops, orders) + tetradic_v2_term(s, ops, orders);
}

DenseMatrix grad_v1(const SolverState& s, const NormalizedOperators& ops, const Orders& orders) {
    check_ops(ops, orders, s.V1.rows());
    return grad_at(s.V1, s, ops, orders);
}

double spectral_radius(const SparseMatrix& A, int iterations) {
    const long n = A.rows();
    if (n == 0 || A.nonZeros() == 0) return 0.0;
    Vector x(n);
    for (long i = 0; i < n; ++i) x[i] = 1.0 + 0.01 * static_cast<double>((i * 7919) % 101) / 101.0;
    x.normalize();
    double est = 0.0;
    for (int t = 0; t < iterations; ++t) {
        Vector y = A * x;
        double ny = y.norm();
        if (ny == 0.0) return 0.0;
        if (std::abs(ny - est) <= 1e-12 * ny) {
            est = ny;
            break;
        }
        est = ny;
        x = y / ny;
    }
    return est;
}

V2Solution solve_v2(const SolverState& s, const NormalizedOperators& ops, const Orders& orders,
                    const SolverConfig& cfg, double l4_radius) {
    if (!(s.mu > 0.0)) throw ArgumentError("solve_v2: mu must be positive");
    const long m = s.V1.rows();
    check_ops(ops, orders, m);
    DenseMatrix rhs = s.mu * self_khatri_rao(s.V1) + s.Y1;
    if (orders.triadic) rhs += *ops.L3 * s.V1;

    V2Solution out;
    if (!orders.tetradic) {
        out.V2 = rhs / s.mu;
        return out;
    }
    const SparseMatrix& L4 = *ops.L4;
    double radius = l4_radius >= 0.0 ? l4_radius : spectral_radius(L4);
    double diag = s.mu;
    if (s.mu <= 2.0 * radius) {
        diag = 2.0 * radius + cfg.shift_delta;
        out.shifted = true;
    }
    SparseMatrix I(m * m, m * m);
    I.setIdentity();
    SparseMatrix A = diag * I - 2.0 * L4;
    A.makeCompressed();

    out.V2.resize(m * m, s.V1.cols());
    const bool warm = s.V2.rows() == m * m && s.V2.cols() == s.V1.cols();
    auto finish = [&](auto& solver) {
        solver.setTolerance(cfg.krylov_tol);
        solver.setMaxIterations(cfg.krylov_max_iter);
        solver.compute(A);
        for (long c = 0; c < rhs.cols(); ++c) {
            Vector b = rhs.col(c);
            Vector x = warm ? Vector(solver.solveWithGuess(b, s.V2.col(c))) : Vector(solver.solve(b));
            double bn = b.norm();
            double res = (A * x - b).norm() / (bn > 0.0 ? bn : 1.0);
            if (solver.info() != Eigen::Success && res > cfg.krylov_tol)
                throw SolverError("solve_v2: Krylov solver did not converge", res);
            out.V2.col(c) = x;
            out.iterations = std::max<int>(out.iterations, static_cast<int>(solver.iterations()));
        }
    };
    if (is_symmetric(L4)) {
        Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
        finish(cg);
    } else {
        Eigen::GMRES<SparseMatrix, Eigen::IdentityPreconditioner> gmres;
        finish(gmres);
    }
    return out;
}

void update_multipliers(SolverState& s, const SolverConfig& cfg) {
    const long k = s.V1.cols();
    DenseMatrix C = self_khatri_rao(s.V1) - s.V2;
    DenseMatrix O = s.V1.transpose() * s.V1 - DenseMatrix::Identity(k, k);
    s.coupling = inf_norm(C);
    s.orthogonality = inf_norm(O);
    s.Y1 += s.mu * C;
    s.Y2 += s.mu * O;
    s.mu = std::min(cfg.rho * s.mu, cfg.mu_max);
}

DenseMatrix orthonormalize(const DenseMatrix& V) {
    const long m = V.rows();
    const long k = V.cols();
    Eigen::HouseholderQR<DenseMatrix> qr(V);
    DenseMatrix Q = qr.householderQ() * DenseMatrix::Identity(m, k);
    DenseMatrix R = qr.matrixQR().topLeftCorner(std::min(m, k), k).triangularView<Eigen::Upper>();
    for (long c = 0; c < std::min(m, k); ++c)
        if (R(c, c) < 0.0) Q.col(c) = -Q.col(c);
    return Q;
}

Embedding utc_solve(const NormalizedOperators& ops, const SolverConfig& cfg_in, std::uint64_t seed,
                    const TraceCallback& on_iteration) {
    cfg_in.validate();
    const long m = ops.L2.rows();
    const long k = cfg_in.k;
    if (k > m) throw ArgumentError("solver: k exceeds sample count");
    const Orders& orders = cfg_in.orders;
    check_ops(ops, orders, m);

    Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(ops.L2);
    if (eig.info() != Eigen::Success) throw SolverError("solver: eigendecomposition of L2 failed", 0.0);
    SolverState s;
    s.V1.resize(m, k);
    for (long c = 0; c < k; ++c) s.V1.col(c) = eig.eigenvectors().col(m - 1 - c);
    orient_columns(s.V1, ops, orders);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (long c = 0; c < k; ++c)
        for (long i = 0; i < m; ++i) s.V1(i, c) += cfg_in.init_noise * normal(rng);

    double rho4 = orders.tetradic ? spectral_radius(*ops.L4) : 0.0;
    double rho2 = eig.eigenvalues().cwiseAbs().maxCoeff();
    SolverConfig cfg = cfg_in;
    s.mu = std::max(cfg.mu0, cfg.mu_floor_factor * 2.0 * std::max(rho2, rho4));
    cfg.mu_max = std::max(cfg.mu_max, s.mu);

    s.V2 = self_khatri_rao(s.V1);
    s.Y1 = DenseMatrix::Zero(m * m, k);
    s.Y2 = DenseMatrix::Zero(k, k);
    s.orthogonality = inf_norm(s.V1.transpose() * s.V1 - DenseMatrix::Identity(k, k));

    Embedding out;
    for (int it = 0; it < cfg.max_outer; ++it) {
        s.iteration = it;
        DenseMatrix Vt = s.V1;
        double f = al_v1_terms(Vt, s, ops, orders);
        double step = cfg.alpha;
        int steps = 0;
        for (int t = 0; t < cfg.max_inner; ++t) {
            DenseMatrix g = grad_at(Vt, s, ops, orders);
            DenseMatrix Vn;
            double fn = 0.0;
            while (true) {
                Vn = Vt - step * g;
                fn = al_v1_terms(Vn, s, ops, orders);
                if (fn <= f || step < 1e-12) break;
                step *= 0.5;
            }
            double d = inf_norm(Vn - Vt);
            Vt = std::move(Vn);
            f = fn;
            ++steps;
            if (d <= cfg.eps_inner) break;
        }
        double dv1 = inf_norm(Vt - s.V1);
        s.V1 = std::move(Vt);

        V2Solution v2 = solve_v2(s, ops, orders, cfg, rho4);
        double dv2 = inf_norm(v2.V2 - s.V2);
        s.V2 = std::move(v2.V2);
        double mu_used = s.mu;
        update_multipliers(s, cfg);
        if (!s.V1.allFinite() || !s.V2.allFinite() || !s.Y1.allFinite() || !s.Y2.allFinite())
            throw DivergenceError("solver: non-finite iterate", it);

        TraceRecord rec;
        rec.iteration = it;
        rec.objective = objective(s.V1, ops, orders);
        rec.coupling = s.coupling;
        rec.orthogonality = s.orthogonality;
        rec.delta_v1 = dv1;
        rec.delta_v2 = dv2;
        rec.mu = mu_used;
        rec.inner_steps = steps;
        rec.krylov_iterations = v2.iterations;
        rec.shifted = v2.shifted;
        if (!std::isfinite(rec.objective)) throw DivergenceError("solver: non-finite objective", it);
        out.history.push_back(rec);
        if (on_iteration) on_iteration(rec);
        out.iterations = it + 1;

        if (std::max({dv1, dv2, s.coupling, s.orthogonality}) < cfg.eps_outer) {
            out.converged = true;
            break;
        }
    }
    out.coupling = s.coupling;
    out.orthogonality = s.orthogonality;
    out.V = orthonormalize(s.V1);
    out.objective = objective(out.V, ops, orders);
    return out;
}

}  // namespace utc
