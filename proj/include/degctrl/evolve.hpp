#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <memory>

#include "degctrl/forms.hpp"

namespace degctrl {

/// Nodal values over all time slots 0..steps; slot n holds the field at
/// t = n*dt. For controls, slot n is the value active on (t_n, t_{n+1}];
/// slot `steps` stays zero. Boundary rows are identically zero.
struct SpaceTimeField {
    Eigen::MatrixXd values;  // nodes x (steps+1)
    double dt = 0.0;

    SpaceTimeField() = default;
    SpaceTimeField(int nodes, int steps, double dt_)
        : values(Eigen::MatrixXd::Zero(nodes, steps + 1)), dt(dt_) {}

    int steps() const { return static_cast<int>(values.cols()) - 1; }
    int nodes() const { return static_cast<int>(values.rows()); }
    Eigen::VectorXd slot(int n) const { return values.col(n); }
};

/// Assembled operators and the reusable factorization for one (mesh, coeff,
/// T, dt) tuple. The backward solve reuses the same factors, which is what
/// makes the discrete adjoint the exact transpose of the forward map.
struct System {
    const Mesh* mesh = nullptr;
    const RegionTags* tags = nullptr;
    CoefficientField coeff;
    double T = 0.0;
    double dt = 0.0;
    int steps = 0;
    bool crank_nicolson = false;

    DiscreteForm mass;
    DiscreteForm stiffness;
    DiscreteForm mass_omega0;
    Vector lumped_mass;  // full-length row sums of the mass matrix

    Eigen::SimplicialLDLT<SparseMat> solver;  // factors of the stepping matrix
    SparseMat explicit_part;                  // CN only: (M - dt/2 K)_free

    System() = default;
    System(const System&) = delete;
    System& operator=(const System&) = delete;

    double dot_mass(const Vector& a, const Vector& b) const { return a.dot(mass.full * b); }
    double dot_mass_omega0(const Vector& a, const Vector& b) const {
        return a.dot(mass_omega0.full * b);
    }
};

/// Assembles forms, validates dt | T, and factors the stepping matrix once.
std::unique_ptr<System> make_system(const Mesh& mesh, const RegionTags& tags,
                                    const CoefficientField& coeff, double T, double dt,
                                    bool crank_nicolson = false);

struct ForwardProblem {
    const System* sys = nullptr;
    Vector z0;            // nodal initial state, zero on boundary
    SpaceTimeField g;     // control on omega0 x (0,T); slot n acts on (t_n, t_{n+1}]
};

struct AdjointProblem {
    const System* sys = nullptr;
    Vector wT;            // nodal terminal state, zero on boundary
    SpaceTimeField f;     // source on Q
};

/// Implicit-Euler trajectory of the controlled forward problem:
/// (M + dt K) z^{n+1} = M z^n + dt M_{omega0} g^n.
SpaceTimeField solve_forward(const ForwardProblem& p);

/// Backward march, the exact transpose of the forward propagation:
/// (M + dt K) w^n = M w^{n+1} - dt M f^n, for n = steps-1 .. 0.
SpaceTimeField solve_adjoint(const AdjointProblem& p);

struct DualityResult {
    double residual = 0.0;  // |<z(T),wT>_M - <z0,w(0)>_M - dt sum <g^n,w^n>_{M,omega0}|
    double scale = 0.0;     // sum of the magnitudes of the three terms
    double relative = 0.0;  // residual / max(scale, tiny)
};

/// Discrete Green identity; machine zero for f = 0 trajectories.
DualityResult duality_residual(const ForwardProblem& fp, const SpaceTimeField& z,
                               const SpaceTimeField& w);

struct EnergyEstimate {
    double lhs = 0.0;        // max_n ||z^n||_M^2 + dt sum_n ||z^n||_K^2
    double data_norm = 0.0;  // ||z0||_M^2 + dt sum_n ||g^n||_M^2
    double ratio = 0.0;      // lhs / data_norm, 0 when both vanish
};

EnergyEstimate verify_energy_estimate(const SpaceTimeField& z, const ForwardProblem& p);

/// Generalized eigenpairs K v = mu M v on free nodes, M-orthonormal modes.
/// Dense solve, desk scale only (the appendix-style spectral basis).
struct ModalBasis {
    Eigen::MatrixXd modes;       // free x m
    Eigen::VectorXd eigenvalues; // ascending
};

ModalBasis modal_basis(const System& sys, int num_modes);

/// Implicit Euler in modal coordinates. With the full spectral basis this
/// reproduces solve_forward exactly; truncated, it is the m-mode Galerkin
/// approximation.
SpaceTimeField solve_forward_modal(const System& sys, const ModalBasis& basis, const Vector& z0,
                                   const SpaceTimeField& g);

}  // namespace degctrl
