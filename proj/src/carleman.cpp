#include "degctrl/carleman.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <map>

#include "degctrl/errors.hpp"

namespace degctrl {

namespace {

struct Window {
    int lo = 0;   // first slot with t >= delta
    int hi = 0;   // last slot with t <= T - delta
};

Window evaluation_window(const System& sys, double delta) {
    Window w;
    w.lo = std::max(1, static_cast<int>(std::ceil(delta / sys.dt - 1e-12)));
    w.hi = sys.steps - w.lo;
    if (w.hi - w.lo < 2)
        throw ValidationError("carleman: evaluation window too short (delta too large or dt too coarse)");
    return w;
}

CarlemanSides evaluate_terms(const System& sys, const SpaceTimeField& w, const SpaceTimeField& f,
                             const CarlemanWeights& cw, const RegionTags& tags,
                             bool include_full_grad) {
    const Mesh& mesh = *sys.mesh;
    if (w.nodes() != mesh.num_vertices() || w.steps() != sys.steps)
        throw ValidationError("carleman: trajectory shape mismatch");
    const Window win = evaluation_window(sys, cw.delta);
    const int nwin = win.hi - win.lo + 1;

    const double s = cw.s;
    const double lambda = cw.lambda;
    const double sup = cw.eta.eta_sup;
    const double big = std::exp(10.0 * lambda * sup);

    // theta per slot and nodal xi-hat = exp(lambda (8 sup + eta)).
    std::vector<double> theta(nwin);
    for (int k = 0; k < nwin; ++k) {
        const double t = (win.lo + k) * sys.dt;
        theta[k] = cw.theta(t);
    }
    const int nv = mesh.num_vertices();
    Vector xihat(nv);
    for (int v = 0; v < nv; ++v) xihat[v] = std::exp(lambda * (8.0 * sup + cw.eta.eta[v]));

    // Transformed stack u = exp(-s sigma) w on the window, its discrete
    // divergence image, and its time derivative.
    Eigen::MatrixXd u(nv, nwin), Lu(nv, nwin), ut(nv, nwin);
    for (int k = 0; k < nwin; ++k) {
        const int n = win.lo + k;
        for (int v = 0; v < nv; ++v) {
            const double sigma = theta[k] * (big - xihat[v]);
            u(v, k) = std::exp(-s * sigma) * w.values(v, n);
        }
    }
    for (int k = 0; k < nwin; ++k)
        Lu.col(k) = (sys.stiffness.full * u.col(k)).cwiseQuotient(sys.lumped_mass);
    for (int k = 0; k < nwin; ++k) {
        if (k == 0)
            ut.col(k) = (u.col(1) - u.col(0)) / sys.dt;
        else if (k == nwin - 1)
            ut.col(k) = (u.col(k) - u.col(k - 1)) / sys.dt;
        else
            ut.col(k) = (u.col(k + 1) - u.col(k - 1)) / (2.0 * sys.dt);
    }

    const bool has_source = f.values.size() > 0 && f.values.cwiseAbs().maxCoeff() > 0.0;

    const auto& q = TriQuadrature::order5();
    CarlemanSides out;
    double i_time = 0.0, i_div = 0.0, i_state = 0.0, i_geta = 0.0, i_gfull = 0.0;
    double i_src = 0.0, i_om0 = 0.0;

    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tr = mesh.triangles[t];
        const double area = mesh.areas[t];
        const bool in_omega0 = tags.in_omega0(t);
        const double inv2a = 1.0 / (2.0 * area);
        std::array<Vec2, 3> grad;
        for (int i = 0; i < 3; ++i) {
            const Vec2& pj = mesh.vertices[tr[(i + 1) % 3]];
            const Vec2& pk = mesh.vertices[tr[(i + 2) % 3]];
            grad[i] = {(pj.y - pk.y) * inv2a, (pk.x - pj.x) * inv2a};
        }

        // Static per-quadrature-point data.
        struct QP {
            double wgt, pow_alpha, xihat, deta_x, deta_y;
            std::array<double, 3> l;
            SymMat2 A;
        };
        std::array<QP, TriQuadrature::num_points> qps;
        for (int n = 0; n < TriQuadrature::num_points; ++n) {
            auto& p = qps[n];
            p.l = q.barycentric[n];
            const Vec2 x = mesh.vertices[tr[0]] * p.l[0] + mesh.vertices[tr[1]] * p.l[1] +
                           mesh.vertices[tr[2]] * p.l[2];
            p.wgt = q.weights[n] * area;
            p.pow_alpha = std::pow(x.norm(), sys.coeff.alpha);
            p.A = sys.coeff.eval(x);
            const double eta_q = cw.eta.eta[tr[0]] * p.l[0] + cw.eta.eta[tr[1]] * p.l[1] +
                                 cw.eta.eta[tr[2]] * p.l[2];
            p.xihat = std::exp(lambda * (8.0 * sup + eta_q));
            const Vec2 ge = cw.eta.grad_eta[tr[0]] * p.l[0] + cw.eta.grad_eta[tr[1]] * p.l[1] +
                            cw.eta.grad_eta[tr[2]] * p.l[2];
            const Vec2 d = p.A.apply(ge);
            p.deta_x = p.pow_alpha * d.x;
            p.deta_y = p.pow_alpha * d.y;
        }

        for (int k = 0; k < nwin; ++k) {
            const int slot = win.lo + k;
            const double th = theta[k];
            const std::array<double, 3> uv{u(tr[0], k), u(tr[1], k), u(tr[2], k)};
            const std::array<double, 3> utv{ut(tr[0], k), ut(tr[1], k), ut(tr[2], k)};
            const std::array<double, 3> luv{Lu(tr[0], k), Lu(tr[1], k), Lu(tr[2], k)};
            const Vec2 gu = grad[0] * uv[0] + grad[1] * uv[1] + grad[2] * uv[2];

            for (int n = 0; n < TriQuadrature::num_points; ++n) {
                const auto& p = qps[n];
                const double xi = th * p.xihat;
                const double wq = p.wgt * sys.dt;

                const double u_q = uv[0] * p.l[0] + uv[1] * p.l[1] + uv[2] * p.l[2];
                const double ut_q = utv[0] * p.l[0] + utv[1] * p.l[1] + utv[2] * p.l[2];
                const double lu_q = luv[0] * p.l[0] + luv[1] * p.l[1] + luv[2] * p.l[2];

                i_time += wq / xi * ut_q * ut_q;
                i_div += wq / xi * lu_q * lu_q;
                i_state += wq * xi * xi * xi * u_q * u_q;
                const double cross = p.deta_x * gu.x + p.deta_y * gu.y;
                i_geta += wq * xi * cross * cross;
                if (include_full_grad) i_gfull += wq * xi * p.pow_alpha * p.A.quad(gu);

                const double w_q = w.values(tr[0], slot) * p.l[0] + w.values(tr[1], slot) * p.l[1] +
                                   w.values(tr[2], slot) * p.l[2];
                if (in_omega0) i_om0 += wq * xi * xi * xi * w_q * w_q;

                if (has_source) {
                    const double f_q = f.values(tr[0], slot) * p.l[0] +
                                       f.values(tr[1], slot) * p.l[1] +
                                       f.values(tr[2], slot) * p.l[2];
                    const double sigma = th * (big - p.xihat);
                    const double df = std::exp(-s * sigma) * f_q;
                    i_src += wq * df * df;
                }
            }
        }
    }

    const double l4 = lambda * lambda * lambda * lambda;
    const double s3 = s * s * s;
    out.term_time = i_time / s;
    out.term_div = i_div / s;
    out.term_state = s3 * l4 * i_state;
    out.term_grad_eta = s * lambda * lambda * i_geta;
    out.term_grad_full = include_full_grad ? s * lambda * lambda * i_gfull : 0.0;
    out.rhs_source = i_src;
    out.rhs_omega0 = s3 * l4 * i_om0;

    out.lhs = out.term_time + out.term_div + out.term_state + out.term_grad_eta +
              out.term_grad_full;
    out.rhs = out.rhs_source + out.rhs_omega0;
    out.ratio = out.rhs > 0.0 ? out.lhs / out.rhs : (out.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    out.eps_used = cw.eta.eps;
    return out;
}

}  // namespace

CarlemanSides evaluate_carleman_case1(const System& sys, const SpaceTimeField& w,
                                      const SpaceTimeField& f, const CarlemanWeights& cw,
                                      const RegionTags& tags) {
    if (cw.eta.region_case != RegionCase::Interior)
        throw ValidationError("evaluate_carleman_case1: weight built for the offcenter case");
    return evaluate_terms(sys, w, f, cw, tags, false);
}

CarlemanSides evaluate_carleman_case2(const System& sys, const SpaceTimeField& w,
                                      const SpaceTimeField& f, const CarlemanWeights& cw,
                                      const RegionTags& tags) {
    if (cw.eta.region_case != RegionCase::Offcenter)
        throw ValidationError("evaluate_carleman_case2: weight built for the interior case");

    // Transform with the provisional weight, re-select epsilon on u, rebuild.
    const Window win = evaluation_window(sys, cw.delta);
    const int nv = sys.mesh->num_vertices();
    const double big = std::exp(10.0 * cw.lambda * cw.eta.eta_sup);
    SpaceTimeField u(nv, sys.steps, sys.dt);
    for (int n = win.lo; n <= win.hi; ++n) {
        const double th = cw.theta(n * sys.dt);
        for (int v = 0; v < nv; ++v) {
            const double xh = std::exp(cw.lambda * (8.0 * cw.eta.eta_sup + cw.eta.eta[v]));
            u.values(v, n) = std::exp(-cw.s * th * (big - xh)) * w.values(v, n);
        }
    }
    const EpsilonSelection sel = select_epsilon(u, *sys.mesh, tags, sys.coeff);

    CarlemanWeights used = cw;
    if (!sel.trivial && sel.eps != cw.eta.eps) {
        RegionTags retagged = tag_regions(*sys.mesh, tags.omega_spec, tags.omega0_spec, sel.eps,
                                          tags.eps0, RegionCase::Offcenter);
        const SpatialWeight eta = build_eta_offcenter(*sys.mesh, retagged, sys.coeff);
        used = make_weights(eta, cw.s, cw.lambda, cw.T, cw.delta);
        CarlemanSides out = evaluate_terms(sys, w, f, used, retagged, true);
        out.eps_used = sel.eps;
        return out;
    }
    CarlemanSides out = evaluate_terms(sys, w, f, used, tags, true);
    out.eps_used = sel.trivial ? sel.eps : cw.eta.eps;
    return out;
}

SweepResult carleman_sweep_case1(const System& sys, const SpatialWeight& eta,
                                 const std::vector<Vector>& terminal_samples,
                                 const std::vector<double>& s_list,
                                 const std::vector<double>& lambda_list, double delta,
                                 bool stop_at_threshold) {
    SweepResult result;
    const SpaceTimeField no_source(sys.mesh->num_vertices(), sys.steps, sys.dt);

    std::vector<SpaceTimeField> trajectories;
    trajectories.reserve(terminal_samples.size());
    for (const auto& wT : terminal_samples)
        trajectories.push_back(solve_adjoint({&sys, wT, no_source}));

    for (double lambda : lambda_list) {
        for (double s : s_list) {
            const CarlemanWeights cw = make_weights(eta, s, lambda, sys.T, delta);
            double worst = 0.0;
            for (size_t i = 0; i < trajectories.size(); ++i) {
                const CarlemanSides sides =
                    evaluate_carleman_case1(sys, trajectories[i], no_source, cw, *sys.tags);
                result.rows.push_back({static_cast<int>(i), s, lambda, eta.eps, delta, sides.lhs,
                                       sides.rhs, sides.ratio});
                worst = std::max(worst, sides.ratio);
            }
            if (!result.found && worst <= 1.0) {
                result.found = true;
                result.s_bar = s;
                result.lambda_bar = lambda;
            }
            if (result.found && stop_at_threshold) return result;
        }
    }
    return result;
}

Case2Battery carleman_battery_case2(const System& sys, const SpatialWeight& eta,
                                    const std::vector<Vector>& terminal_samples, double s,
                                    double lambda, double delta) {
    Case2Battery battery;
    const SpaceTimeField no_source(sys.mesh->num_vertices(), sys.steps, sys.dt);
    const CarlemanWeights cw = make_weights(eta, s, lambda, sys.T, delta);

    battery.ratio_min = std::numeric_limits<double>::max();
    for (size_t i = 0; i < terminal_samples.size(); ++i) {
        const SpaceTimeField w = solve_adjoint({&sys, terminal_samples[i], no_source});
        const CarlemanSides sides = evaluate_carleman_case2(sys, w, no_source, cw, *sys.tags);
        battery.rows.push_back({static_cast<int>(i), s, lambda, sides.eps_used, delta, sides.lhs,
                                sides.rhs, sides.ratio});
        battery.ratio_min = std::min(battery.ratio_min, sides.ratio);
        battery.ratio_max = std::max(battery.ratio_max, sides.ratio);
    }
    battery.spread = battery.ratio_min > 0.0 ? battery.ratio_max / battery.ratio_min : 0.0;
    return battery;
}

}  // namespace degctrl
