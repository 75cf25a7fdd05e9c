#include "degctrl/control.hpp"

#include <cmath>
#include <vector>

#include "degctrl/errors.hpp"

namespace degctrl {

namespace {

std::vector<bool> omega0_node_mask(const System& sys) {
    std::vector<bool> mask(sys.mesh->num_vertices(), false);
    for (int t : sys.tags->omega0_elems)
        for (int v : sys.mesh->triangles[t]) mask[v] = true;
    return mask;
}

// Control = adjoint trajectory restricted to omega0 nodes; slot `steps`
// stays zero (slot n acts on (t_n, t_{n+1}]).
SpaceTimeField masked_control(const System& sys, const SpaceTimeField& w) {
    const auto mask = omega0_node_mask(sys);
    SpaceTimeField g(w.nodes(), w.steps(), w.dt);
    for (int n = 0; n < w.steps(); ++n)
        for (int v = 0; v < w.nodes(); ++v)
            if (mask[v]) g.values(v, n) = w.values(v, n);
    return g;
}

double control_cost(const System& sys, const SpaceTimeField& g) {
    double cost = 0.0;
    for (int n = 0; n < g.steps(); ++n)
        cost += sys.dot_mass_omega0(g.values.col(n), g.values.col(n));
    return sys.dt * cost;
}

ControlResult run_hum(const System& sys, const Vector& z0, const Vector* z_target,
                      double penalty) {
    if (!(penalty > 0.0)) throw ValidationError("hum: penalty must be positive");

    const SpaceTimeField no_control(sys.mesh->num_vertices(), sys.steps, sys.dt);
    const SpaceTimeField z_free = solve_forward({&sys, z0, no_control});

    Vector rhs = -z_free.values.col(sys.steps);
    if (z_target) rhs += *z_target;

    const CgOutcome cg = gramian_cg(sys, rhs, penalty);

    ControlResult res;
    res.penalty = penalty;
    res.cg_iterations = cg.iterations;
    res.wT_star = cg.x;

    const SpaceTimeField no_source(sys.mesh->num_vertices(), sys.steps, sys.dt);
    const SpaceTimeField w_star = solve_adjoint({&sys, cg.x, no_source});
    res.g = masked_control(sys, w_star);

    // Independent re-solve with the returned control.
    const SpaceTimeField z_ctrl = solve_forward({&sys, z0, res.g});
    res.terminal_state = z_ctrl.values.col(sys.steps);
    res.terminal_norm = std::sqrt(sys.dot_mass(res.terminal_state, res.terminal_state));
    res.control_cost = control_cost(sys, res.g);

    Vector miss = res.terminal_state + penalty * cg.x;
    if (z_target) miss -= *z_target;
    res.identity_residual = std::sqrt(sys.dot_mass(miss, miss));
    return res;
}

}  // namespace

Vector gramian_apply(const System& sys, const Vector& wT) {
    const SpaceTimeField no_source(sys.mesh->num_vertices(), sys.steps, sys.dt);
    const SpaceTimeField w = solve_adjoint({&sys, wT, no_source});
    const SpaceTimeField g = masked_control(sys, w);
    const Vector z0 = Vector::Zero(sys.mesh->num_vertices());
    const SpaceTimeField z = solve_forward({&sys, z0, g});
    return z.values.col(sys.steps);
}

CgOutcome gramian_cg(const System& sys, const Vector& b, double penalty) {
    CgOutcome out;
    out.x = Vector::Zero(b.size());

    const double b_norm2 = sys.dot_mass(b, b);
    if (b_norm2 == 0.0) return out;

    const double tol = 1e-10;
    const int cap = static_cast<int>(10.0 * std::sqrt(static_cast<double>(sys.mesh->num_free()))) + 1;

    // Each operator application costs two full PDE solves, so keeping the
    // residual history and reorthogonalizing is cheap by comparison and
    // restores the exact-arithmetic convergence the decaying Gramian
    // spectrum allows.
    std::vector<Vector> history;
    Vector r = b;  // x0 = 0
    Vector p = r;
    double rho = sys.dot_mass(r, r);
    history.push_back(r / std::sqrt(rho));
    for (int it = 0; it < cap; ++it) {
        if (rho <= tol * tol * b_norm2) {
            out.relative_residual = std::sqrt(rho / b_norm2);
            return out;
        }
        const Vector ap = gramian_apply(sys, p) + penalty * p;
        const double alpha = rho / sys.dot_mass(p, ap);
        out.x += alpha * p;
        r -= alpha * ap;
        for (const auto& q : history) r -= sys.dot_mass(q, r) * q;
        const double rho_next = sys.dot_mass(r, r);
        if (rho_next > 0.0) history.push_back(r / std::sqrt(rho_next));
        p = r + (rho_next / rho) * p;
        rho = rho_next;
        out.iterations = it + 1;
    }
    out.relative_residual = std::sqrt(rho / b_norm2);
    if (out.relative_residual > tol)
        throw NumericalFailure(
            "gramian_cg: no convergence within the iteration cap (penalty too small for this "
            "mesh resolution)");
    return out;
}

ControlResult hum_null_control(const System& sys, const Vector& z0, double penalty) {
    if (sys.tags->region_case != RegionCase::Interior)
        throw ValidationError("hum_null_control: requires interior-case tags (0 in omega0)");
    return run_hum(sys, z0, nullptr, penalty);
}

ControlResult approximate_control(const System& sys, const Vector& z0, const Vector& z_target,
                                  double penalty) {
    if (sys.tags->region_case != RegionCase::Offcenter)
        throw ValidationError("approximate_control: requires offcenter-case tags (0 not in omega0)");
    ControlResult res = run_hum(sys, z0, &z_target, penalty);
    // For the approximate problem the reported norm is the miss distance.
    Vector miss = res.terminal_state - z_target;
    res.terminal_norm = std::sqrt(sys.dot_mass(miss, miss));
    return res;
}

ObservabilityResult observability_ratio(const System& sys, const std::vector<Vector>& samples) {
    ObservabilityResult result;
    const SpaceTimeField no_source(sys.mesh->num_vertices(), sys.steps, sys.dt);
    for (const auto& wT : samples) {
        if (std::sqrt(sys.dot_mass(wT, wT)) == 0.0)
            throw ValidationError("observability_ratio: zero sample");
        const SpaceTimeField w = solve_adjoint({&sys, wT, no_source});
        double denom = 0.0;
        for (int n = 0; n < sys.steps; ++n)
            denom += sys.dot_mass_omega0(w.values.col(n), w.values.col(n));
        denom *= sys.dt;
        if (denom == 0.0)
            throw NumericalFailure(
                "observability_ratio: omega0 energy vanished for a nonzero sample "
                "(unique-continuation violation at mesh scale)");
        const double num = sys.dot_mass(w.values.col(0), w.values.col(0));
        result.ratios.push_back(num / denom);
        result.max_ratio = std::max(result.max_ratio, num / denom);
    }
    return result;
}

ContinuationProbe unique_continuation_probe(const System& sys, const Vector& wT,
                                            double threshold) {
    ContinuationProbe probe;
    const SpaceTimeField no_source(sys.mesh->num_vertices(), sys.steps, sys.dt);
    const SpaceTimeField w = solve_adjoint({&sys, wT, no_source});
    for (int n = 0; n < sys.steps; ++n) {
        probe.omega_energy += sys.dot_mass_omega0(w.values.col(n), w.values.col(n));
        probe.global_energy += sys.dot_mass(w.values.col(n), w.values.col(n));
    }
    probe.omega_energy *= sys.dt;
    probe.global_energy *= sys.dt;
    probe.flagged = probe.global_energy > 0.0 && probe.omega_energy < threshold * probe.global_energy;
    return probe;
}

}  // namespace degctrl
