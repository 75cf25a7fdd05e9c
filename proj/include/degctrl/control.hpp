#pragma once

#include <vector>

#include "degctrl/evolve.hpp"

namespace degctrl {

/// Output of the penalized HUM optimizer.
struct ControlResult {
    SpaceTimeField g;           // control, zero off omega0-tagged elements
    Vector terminal_state;      // z(T) from an independent forward re-solve with g
    double terminal_norm = 0.0; // ||z(T)||_M
    double control_cost = 0.0;  // dt sum_n ||g^n||^2_{M,omega0}
    int cg_iterations = 0;
    double penalty = 0.0;
    Vector wT_star;              // HUM multiplier solving (Lambda + penalty I) wT* = rhs
    double identity_residual = 0.0;  // ||z(T) - target + penalty wT*||_M, target = 0 for null control
};

/// Controllability Gramian: wT -> terminal state of the forward problem with
/// z0 = 0 and g = chi_{omega0} w, where w solves the adjoint from wT with
/// f = 0. Symmetric positive semidefinite in the M-inner product.
Vector gramian_apply(const System& sys, const Vector& wT);

/// Conjugate gradient in the M-inner product on (Lambda + penalty I) x = b.
/// Relative tolerance 1e-10; iteration cap 10 * sqrt(free-node count).
struct CgOutcome {
    Vector x;
    int iterations = 0;
    double relative_residual = 0.0;
};

CgOutcome gramian_cg(const System& sys, const Vector& b, double penalty);

/// Null control (interior case): drives z(T) to -penalty * wT*, so the
/// terminal norm is penalty * ||wT*||_M up to the CG tolerance.
ControlResult hum_null_control(const System& sys, const Vector& z0, double penalty);

/// Approximate control (offcenter case): steers z(T) toward z_target with
/// miss distance penalty * ||wT*||_M up to the CG tolerance.
ControlResult approximate_control(const System& sys, const Vector& z0, const Vector& z_target,
                                  double penalty);

struct ObservabilityResult {
    std::vector<double> ratios;  // ||w(0)||_M^2 / (dt sum_n ||w^n||^2_{M,omega0})
    double max_ratio = 0.0;
};

ObservabilityResult observability_ratio(const System& sys, const std::vector<Vector>& samples);

struct ContinuationProbe {
    double omega_energy = 0.0;   // dt sum_n ||w^n||^2_{M,omega0}
    double global_energy = 0.0;  // dt sum_n ||w^n||^2_M
    bool flagged = false;        // omega_energy < threshold * global_energy with global > 0
};

ContinuationProbe unique_continuation_probe(const System& sys, const Vector& wT, double threshold);

}  // namespace degctrl
