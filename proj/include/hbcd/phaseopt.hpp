// Loss over phase sequences, finite-difference gradient, multi-restart
// quasi-Newton optimization, and the incremental minimal-query search.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hbcd/protocols.hpp"

namespace hbcd {

struct OptimizerConfig {
    int n_reps = 10;
    std::uint64_t seed = 0;
    int max_iterations = 500;
    double gradient_step = 1e-5;     // central finite-difference step
    double convergence_tol = 1e-10;  // gradient-norm stop
    bool per_query_psi = false;      // exploration flag; acceptance runs share psi

    void validate() const;
};

struct OptimizationResult {
    PhaseSequence best_phi;
    double best_loss;
    std::vector<double> losses_per_restart;
    std::vector<int> iterations;
};

// R(Phi) = (1 - P(1|alpha;Phi) + P(1|0;Phi))^2, from the exact distribution.
double loss(const PhaseSequence& seq, const HBCDProblem& problem);

// Central finite differences over the free angles: (phi0, phi_1..phi_K, psi)
// for a shared-psi sequence, (phi0, phis..., psis...) for per-query.
std::vector<double> loss_gradient(const PhaseSequence& seq, const HBCDProblem& problem,
                                  double step = 1e-5);

// n_reps independent L-BFGS descents from the prescribed initial conditions:
// phi = {pi/4, 0, ..., 0, pi/4}, psi0 drawn from a standard normal per
// restart. Deterministic given cfg.seed; ties resolved to the lowest
// restart index.
OptimizationResult optimize_phases(int K, const HBCDProblem& problem,
                                   const OptimizerConfig& cfg);

// Smallest K <= n_cap whose optimized loss satisfies R <= 4 epsilon^2.
std::optional<int> min_queries_sequential(const HBCDProblem& problem,
                                          const OptimizerConfig& cfg, int n_cap);

}  // namespace hbcd
