#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "utc/normalize.hpp"
#include "utc/tensor_core.hpp"

namespace utc {

struct Orders {
    bool pairwise = true;
    bool triadic = true;
    bool tetradic = true;

    static Orders all() { return {}; }
    static Orders pairwise_only() { return {true, false, false}; }
    // Accepts comma-separated tokens: 2/3/4 or pairwise/triadic/tetradic.
    static Orders parse(const std::string& text);
    std::string to_string() const;
    bool operator==(const Orders&) const = default;
};

struct SolverConfig {
    long k = 2;
    double mu0 = 1e-3;
    double mu_max = 1e2;
    double rho = 1.1;
    double alpha = 1e-3;
    double eps_inner = 1e-2;
    double eps_outer = 1e-3;
    int max_outer = 500;
    int max_inner = 200;
    Orders orders;
    // Starting penalty is at least this factor times 2 * max(rho(L2), rho(L4)).
    // The V2 subproblem is unbounded while mu < 2 rho(L4); 0 disables the floor.
    double mu_floor_factor = 5.0;
    double init_noise = 1e-3;
    double krylov_tol = 1e-8;
    int krylov_max_iter = 500;
    double shift_delta = 1e-6;

    void validate() const;
};

struct SolverState {
    DenseMatrix V1;  // m x k
    DenseMatrix V2;  // m^2 x k
    DenseMatrix Y1;  // m^2 x k
    DenseMatrix Y2;  // k x k
    double mu = 0.0;
    int iteration = 0;
    double coupling = 0.0;       // ||V1*V1 - V2||_inf
    double orthogonality = 0.0;  // ||V1'V1 - I||_inf
};

struct TraceRecord {
    int iteration = 0;
    double objective = 0.0;
    double coupling = 0.0;
    double orthogonality = 0.0;
    double delta_v1 = 0.0;
    double delta_v2 = 0.0;
    double mu = 0.0;
    int inner_steps = 0;
    int krylov_iterations = 0;
    bool shifted = false;

    std::string to_json() const;
};

struct Embedding {
    DenseMatrix V;
    double objective = 0.0;
    bool converged = false;
    int iterations = 0;
    // Constraint residuals of the last iterate, before re-orthonormalization.
    double coupling = 0.0;
    double orthogonality = 0.0;
    std::vector<TraceRecord> history;
};

struct V2Solution {
    DenseMatrix V2;
    bool shifted = false;
    int iterations = 0;
};

// Columnwise V * V.
DenseMatrix self_khatri_rao(const DenseMatrix& V);

double objective(const DenseMatrix& V, const NormalizedOperators& ops, const Orders& orders);
double augmented_lagrangian(const SolverState& s, const NormalizedOperators& ops, const Orders& orders);
DenseMatrix grad_v1(const SolverState& s, const NormalizedOperators& ops, const Orders& orders);

// Solves (mu I - 2 L4) V2 = mu (V1*V1) + L3 V1 + Y1 column by column. When mu is
// not above 2 rho(L4) the operator is replaced by ((2 rho + delta) I - 2 L4).
// A negative l4_radius means estimate it here.
V2Solution solve_v2(const SolverState& s, const NormalizedOperators& ops, const Orders& orders,
                    const SolverConfig& cfg, double l4_radius = -1.0);

void update_multipliers(SolverState& s, const SolverConfig& cfg);

// Largest absolute eigenvalue of a symmetric sparse operator by power iteration.
double spectral_radius(const SparseMatrix& A, int iterations = 200);

// Thin QR with column signs chosen so that diag(R) >= 0.
DenseMatrix orthonormalize(const DenseMatrix& V);

using TraceCallback = std::function<void(const TraceRecord&)>;

Embedding utc_solve(const NormalizedOperators& ops, const SolverConfig& cfg, std::uint64_t seed,
                    const TraceCallback& on_iteration = {});

}  // namespace utc
