#include "degctrl/evolve.hpp"

#include <cmath>

#include "degctrl/errors.hpp"

namespace degctrl {

namespace {

void require_boundary_zero(const System& sys, const Vector& v, const char* what) {
    for (int n = 0; n < sys.mesh->num_vertices(); ++n)
        if (sys.mesh->node_flags[n] == NodeFlag::Boundary && v[n] != 0.0)
            throw ValidationError(std::string(what) + ": nonzero value on a boundary node");
}

}  // namespace

std::unique_ptr<System> make_system(const Mesh& mesh, const RegionTags& tags,
                                    const CoefficientField& coeff, double T, double dt,
                                    bool crank_nicolson) {
    if (!(T > 0.0) || !(dt > 0.0)) throw ValidationError("make_system: T and dt must be positive");
    const double steps_real = T / dt;
    const int steps = static_cast<int>(std::llround(steps_real));
    if (steps < 1 || std::abs(steps * dt - T) > 1e-12 * std::max(T, 1.0))
        throw ValidationError("make_system: dt must divide T");

    auto sys = std::make_unique<System>();
    sys->mesh = &mesh;
    sys->tags = &tags;
    sys->coeff = coeff;
    sys->T = T;
    sys->dt = dt;
    sys->steps = steps;
    sys->crank_nicolson = crank_nicolson;
    sys->mass = assemble_mass(mesh);
    sys->stiffness = assemble_degenerate_stiffness(mesh, coeff);
    sys->mass_omega0 = assemble_mass_region(mesh, tags.omega0_elems);
    sys->lumped_mass = sys->mass.full * Vector::Ones(mesh.num_vertices());

    const double c = crank_nicolson ? 0.5 : 1.0;
    SparseMat stepping = sys->mass.free + (c * dt) * sys->stiffness.free;
    sys->solver.compute(stepping);
    if (sys->solver.info() != Eigen::Success)
        throw NumericalFailure("make_system: factorization of the stepping matrix failed");
    if (crank_nicolson) sys->explicit_part = sys->mass.free - (0.5 * dt) * sys->stiffness.free;
    return sys;
}

SpaceTimeField solve_forward(const ForwardProblem& p) {
    const System& sys = *p.sys;
    require_boundary_zero(sys, p.z0, "solve_forward z0");
    if (p.g.nodes() != sys.mesh->num_vertices() || p.g.steps() != sys.steps)
        throw ValidationError("solve_forward: control shape mismatch");

    SpaceTimeField z(sys.mesh->num_vertices(), sys.steps, sys.dt);
    z.values.col(0) = p.z0;
    Vector zf = sys.mass.restrict_free(p.z0);
    for (int n = 0; n < sys.steps; ++n) {
        Vector rhs;
        const Vector force = sys.mass_omega0.full * p.g.values.col(n);
        if (!sys.crank_nicolson) {
            rhs = sys.mass.free * zf + sys.dt * sys.mass.restrict_free(force);
        } else {
            rhs = sys.explicit_part * zf + sys.dt * sys.mass.restrict_free(force);
        }
        zf = sys.solver.solve(rhs);
        if (sys.solver.info() != Eigen::Success)
            throw NumericalFailure("solve_forward: linear solve failed");
        z.values.col(n + 1) = sys.mass.extend_full(zf);
    }
    return z;
}

SpaceTimeField solve_adjoint(const AdjointProblem& p) {
    const System& sys = *p.sys;
    require_boundary_zero(sys, p.wT, "solve_adjoint wT");
    if (p.f.nodes() != sys.mesh->num_vertices() || p.f.steps() != sys.steps)
        throw ValidationError("solve_adjoint: source shape mismatch");
    if (sys.crank_nicolson)
        throw ValidationError("solve_adjoint: only the implicit-Euler scheme is transposed");

    SpaceTimeField w(sys.mesh->num_vertices(), sys.steps, sys.dt);
    w.values.col(sys.steps) = p.wT;
    Vector wf = sys.mass.restrict_free(p.wT);
    for (int n = sys.steps - 1; n >= 0; --n) {
        const Vector source = sys.mass.full * p.f.values.col(n);
        const Vector rhs = sys.mass.free * wf - sys.dt * sys.mass.restrict_free(source);
        wf = sys.solver.solve(rhs);
        if (sys.solver.info() != Eigen::Success)
            throw NumericalFailure("solve_adjoint: linear solve failed");
        w.values.col(n) = sys.mass.extend_full(wf);
    }
    return w;
}

DualityResult duality_residual(const ForwardProblem& fp, const SpaceTimeField& z,
                               const SpaceTimeField& w) {
    const System& sys = *fp.sys;
    if (z.steps() != sys.steps || w.steps() != sys.steps)
        throw ValidationError("duality_residual: mismatched discretizations");

    const double terminal = sys.dot_mass(z.values.col(sys.steps), w.values.col(sys.steps));
    const double initial = sys.dot_mass(fp.z0, w.values.col(0));
    double work = 0.0;
    for (int n = 0; n < sys.steps; ++n)
        work += sys.dot_mass_omega0(fp.g.values.col(n), w.values.col(n));
    work *= sys.dt;

    DualityResult r;
    r.residual = std::abs(terminal - initial - work);
    r.scale = std::abs(terminal) + std::abs(initial) + std::abs(work);
    r.relative = r.residual / std::max(r.scale, 1e-300);
    return r;
}

EnergyEstimate verify_energy_estimate(const SpaceTimeField& z, const ForwardProblem& p) {
    const System& sys = *p.sys;
    EnergyEstimate e;
    double stiff_sum = 0.0;
    for (int n = 0; n <= sys.steps; ++n) {
        const Vector zn = z.values.col(n);
        e.lhs = std::max(e.lhs, sys.dot_mass(zn, zn));
        stiff_sum += zn.dot(sys.stiffness.full * zn);
    }
    e.lhs += sys.dt * stiff_sum;

    e.data_norm = sys.dot_mass(p.z0, p.z0);
    double gsum = 0.0;
    for (int n = 0; n < sys.steps; ++n) {
        const Vector gn = p.g.values.col(n);
        gsum += sys.dot_mass(gn, gn);
    }
    e.data_norm += sys.dt * gsum;
    e.ratio = e.data_norm > 0.0 ? e.lhs / e.data_norm : 0.0;
    return e;
}

ModalBasis modal_basis(const System& sys, int num_modes) {
    const int nf = sys.mesh->num_free();
    if (nf > 600)
        throw ValidationError("modal_basis: dense spectral basis is desk scale only (<= 600 free nodes)");
    if (num_modes < 1 || num_modes > std::min(nf, 200))
        throw ValidationError("modal_basis: num_modes must lie in [1, min(free nodes, 200)]");

    Eigen::MatrixXd K = Eigen::MatrixXd(sys.stiffness.free);
    Eigen::MatrixXd M = Eigen::MatrixXd(sys.mass.free);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, M);
    if (es.info() != Eigen::Success)
        throw NumericalFailure("modal_basis: generalized eigensolve failed");

    ModalBasis b;
    b.modes = es.eigenvectors().leftCols(num_modes);
    b.eigenvalues = es.eigenvalues().head(num_modes);
    return b;
}

SpaceTimeField solve_forward_modal(const System& sys, const ModalBasis& basis, const Vector& z0,
                                   const SpaceTimeField& g) {
    require_boundary_zero(sys, z0, "solve_forward_modal z0");
    const int m = static_cast<int>(basis.modes.cols());

    // Project the initial state in the M-inner product (modes are M-orthonormal).
    Eigen::VectorXd d = basis.modes.transpose() * (sys.mass.free * sys.mass.restrict_free(z0));

    SpaceTimeField z(sys.mesh->num_vertices(), sys.steps, sys.dt);
    z.values.col(0) = sys.mass.extend_full(basis.modes * d);
    for (int n = 0; n < sys.steps; ++n) {
        const Vector force = sys.mass.restrict_free(sys.mass_omega0.full * g.values.col(n));
        const Eigen::VectorXd ghat = basis.modes.transpose() * force;
        for (int k = 0; k < m; ++k)
            d[k] = (d[k] + sys.dt * ghat[k]) / (1.0 + sys.dt * basis.eigenvalues[k]);
        z.values.col(n + 1) = sys.mass.extend_full(basis.modes * d);
    }
    return z;
}

}  // namespace degctrl
