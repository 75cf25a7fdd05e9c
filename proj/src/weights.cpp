#include "degctrl/weights.hpp"

#include <cmath>
#include <sstream>

#include "degctrl/errors.hpp"

namespace degctrl {

namespace {

// Monotone rational reparameterization of [lo,hi] sending p to the midpoint.
struct AxisMap {
    double lo = 0.0, len = 1.0, s = 1.0;

    static AxisMap make(double lo, double hi, double p) {
        AxisMap m;
        m.lo = lo;
        m.len = hi - lo;
        const double tp = (p - lo) / m.len;
        m.s = tp / (1.0 - tp);
        return m;
    }
    double value(double t) const {
        const double tau = (t - lo) / len;
        return lo + len * tau / (tau + s * (1.0 - tau));
    }
    double deriv(double t) const {
        const double tau = (t - lo) / len;
        const double den = tau + s * (1.0 - tau);
        return s / (den * den);
    }
};

// Base profile psi in (0,1], zero on the boundary, unique critical point at
// the pull target p_star. Rectangles compose the product bump with per-axis
// maps; disks use the Moebius automorphism of the unit disk.
struct BaseProfile {
    std::function<double(const Vec2&)> value;
    std::function<Vec2(const Vec2&)> grad;
};

BaseProfile rect_profile(const RectDomain& r, const Vec2& p_star) {
    const AxisMap mx = AxisMap::make(r.x0, r.x1, p_star.x);
    const AxisMap my = AxisMap::make(r.y0, r.y1, p_star.y);
    const double norm = 16.0 / (r.width() * r.width() * r.height() * r.height());
    auto raw = [r, norm](double u, double v) {
        return norm * (u - r.x0) * (r.x1 - u) * (v - r.y0) * (r.y1 - v);
    };
    auto raw_du = [r, norm](double u, double v) {
        return norm * (r.x0 + r.x1 - 2.0 * u) * (v - r.y0) * (r.y1 - v);
    };
    auto raw_dv = [r, norm](double u, double v) {
        return norm * (u - r.x0) * (r.x1 - u) * (r.y0 + r.y1 - 2.0 * v);
    };
    BaseProfile b;
    b.value = [mx, my, raw](const Vec2& x) { return raw(mx.value(x.x), my.value(x.y)); };
    b.grad = [mx, my, raw_du, raw_dv](const Vec2& x) {
        const double u = mx.value(x.x), v = my.value(x.y);
        return Vec2{raw_du(u, v) * mx.deriv(x.x), raw_dv(u, v) * my.deriv(x.y)};
    };
    return b;
}

BaseProfile disk_profile(const DiskDomain& d, const Vec2& p_star) {
    const double R = d.radius;
    const Vec2 c = d.center;
    const Vec2 a = (p_star - c) * (1.0 / R);
    const double one_minus_a2 = 1.0 - a.squared_norm();
    BaseProfile b;
    auto parts = [R, c, a](const Vec2& x, double& N, double& D, Vec2& gN, Vec2& gD) {
        const Vec2 z = (x - c) * (1.0 / R);
        N = 1.0 - z.squared_norm();
        const double re = 1.0 - (a.x * z.x + a.y * z.y);
        const double im = -(a.x * z.y - a.y * z.x);  // imag of (1 - conj(a) z)
        D = re * re + im * im;
        gN = {-2.0 * z.x / R, -2.0 * z.y / R};
        // d(re)/dz = (-a.x, -a.y),  d(im)/dz = (a.y, -a.x), chain by 1/R
        gD = {2.0 * (re * (-a.x) + im * a.y) / R, 2.0 * (re * (-a.y) + im * (-a.x)) / R};
    };
    b.value = [parts, one_minus_a2](const Vec2& x) {
        double N, D;
        Vec2 gN, gD;
        parts(x, N, D, gN, gD);
        return one_minus_a2 * N / D;
    };
    b.grad = [parts, one_minus_a2](const Vec2& x) {
        double N, D;
        Vec2 gN, gD;
        parts(x, N, D, gN, gD);
        const double f = one_minus_a2 / (D * D);
        return Vec2{f * (gN.x * D - N * gD.x), f * (gN.y * D - N * gD.y)};
    };
    return b;
}

// zeta = (exp(2 mu psi) - 1) / (exp(2 mu) - 1): same zero set and critical
// points as psi, normalized to peak value 1.
struct Zeta {
    BaseProfile base;
    double mu = 1.0;
    double value(const Vec2& x) const {
        return std::expm1(2.0 * mu * base.value(x)) / std::expm1(2.0 * mu);
    }
    Vec2 grad(const Vec2& x) const {
        const double f = 2.0 * mu * std::exp(2.0 * mu * base.value(x)) / std::expm1(2.0 * mu);
        return f * base.grad(x);
    }
};

double quintic_smoothstep(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
double quintic_smoothstep_deriv(double t) {
    const double u = t * (1.0 - t);
    return 30.0 * u * u;
}

SpatialWeight assemble_weight(const Mesh& mesh, RegionCase rc, double eps, const Zeta& zeta,
                              double (*h)(double, double), double (*hd)(double, double)) {
    SpatialWeight w;
    w.region_case = rc;
    w.eps = eps;
    w.mu = zeta.mu;

    auto eta_at = [zeta, h, eps](const Vec2& x) { return h(x.norm(), eps) * zeta.value(x); };
    auto grad_at = [zeta, h, hd, eps](const Vec2& x) {
        const double r = x.norm();
        const double hv = h(r, eps);
        Vec2 g = hv == 0.0 ? Vec2{0, 0} : hv * zeta.grad(x);
        const double hder = hd(r, eps);
        if (hder != 0.0 && r > 0.0) {
            const double f = hder * zeta.value(x) / r;
            g = g + f * x;
        }
        return g;
    };

    const int nv = mesh.num_vertices();
    w.eta.resize(nv);
    w.h_factor.resize(nv);
    w.zeta_factor.resize(nv);
    w.grad_eta.resize(nv);
    for (int v = 0; v < nv; ++v) {
        const Vec2& x = mesh.vertices[v];
        w.h_factor[v] = h(x.norm(), eps);
        w.zeta_factor[v] = zeta.value(x);
        w.eta[v] = mesh.node_flags[v] == NodeFlag::Boundary ? 0.0 : w.h_factor[v] * w.zeta_factor[v];
        w.grad_eta[v] = grad_at(x);
    }
    w.eta_sup = w.eta.cwiseAbs().maxCoeff();
    w.eta_fn = eta_at;
    w.grad_eta_fn = grad_at;
    return w;
}

[[noreturn]] void verification_failure(const std::string& quantity, const Vec2& at, double value) {
    std::ostringstream os;
    os << "weight verification failed: " << quantity << " = " << value << " at (" << at.x << ", "
       << at.y << ")";
    throw WeightVerificationFailed(os.str());
}

WeightReport run_checks(const Mesh& mesh, const RegionTags& tags, const CoefficientField& coeff,
                        const SpatialWeight& w, bool throwing) {
    WeightReport rep;
    rep.min_quadform = std::numeric_limits<double>::max();
    rep.min_boundary_slope = std::numeric_limits<double>::max();

    const bool interior = w.region_case == RegionCase::Interior;

    // Nodal support conditions.
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const Vec2& x = mesh.vertices[v];
        const double r = x.norm();
        const bool bdry = mesh.node_flags[v] == NodeFlag::Boundary;
        if (interior) {
            if (r <= w.eps || bdry) {
                rep.max_eta_on_eps = std::max(rep.max_eta_on_eps, std::abs(w.eta[v]));
                if (std::abs(w.eta[v]) > 1e-14 && throwing)
                    verification_failure("eta on Omega_eps or boundary", x, w.eta[v]);
            }
            if (r <= w.eps) {
                const double gn = w.grad_eta[v].norm();
                rep.max_grad_on_eps = std::max(rep.max_grad_on_eps, gn);
                if (gn > 1e-12 && throwing) verification_failure("grad eta on closure(Omega_eps)", x, gn);
            }
            if (!bdry && r > w.eps && !(w.eta[v] > 0.0) && throwing)
                verification_failure("eta positivity on Omega^eps", x, w.eta[v]);
        } else {
            if (bdry && std::abs(w.eta[v]) > 1e-14 && throwing)
                verification_failure("eta on boundary", x, w.eta[v]);
            if (!bdry && w.eta[v] < 0.0 && throwing)
                verification_failure("eta nonnegativity", x, w.eta[v]);
        }
    }

    // Quadratic form bound at quadrature points of the complement region.
    const auto& q = TriQuadrature::order5();
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const bool excluded = interior
                                  ? tags.in_omega0(t)
                                  : (tags.in_omega(t) || mesh.barycenter(t).norm() < w.eps);
        if (excluded) continue;
        const auto& tr = mesh.triangles[t];
        for (int n = 0; n < TriQuadrature::num_points; ++n) {
            const auto& l = q.barycentric[n];
            const Vec2 x = mesh.vertices[tr[0]] * l[0] + mesh.vertices[tr[1]] * l[1] +
                           mesh.vertices[tr[2]] * l[2];
            const Vec2 g = w.grad_eta[tr[0]] * l[0] + w.grad_eta[tr[1]] * l[1] +
                           w.grad_eta[tr[2]] * l[2];
            const double quad = std::pow(x.norm(), coeff.alpha) * coeff.eval(x).quad(g);
            const double checked = interior ? quad : quad * quad;
            if (checked < rep.min_quadform) {
                rep.min_quadform = checked;
                rep.worst_point = x;
            }
        }
    }
    if (!(rep.min_quadform > 0.0) && throwing)
        verification_failure(interior ? "|x|^a A grad(eta).grad(eta) on Omega\\omega0"
                                      : "squared quadratic form on Omega\\(omega u Omega_eps)",
                             rep.worst_point, rep.min_quadform);

    // Outward slope at boundary edge midpoints, one-sided difference.
    for (const auto& be : mesh.boundary_edges) {
        const Vec2 m = (mesh.vertices[be.a] + mesh.vertices[be.b]) * 0.5;
        const double step = 1e-3 * (mesh.vertices[be.b] - mesh.vertices[be.a]).norm();
        const Vec2 inward = m - step * be.normal;
        const double slope = (w.eta_fn(m) - w.eta_fn(inward)) / step;
        rep.min_boundary_slope = std::min(rep.min_boundary_slope, -slope);
        if (!(slope < 0.0) && throwing)
            verification_failure("deta/dn at boundary edge midpoint", m, slope);
    }

    rep.pass = rep.min_quadform > 0.0 && rep.min_boundary_slope > 0.0 &&
               rep.max_eta_on_eps <= 1e-14 && rep.max_grad_on_eps <= 1e-12;
    return rep;
}

SpatialWeight build_weight(const Mesh& mesh, const RegionTags& tags, const CoefficientField& coeff,
                           RegionCase rc) {
    if (!mesh.domain)
        throw ValidationError("build_eta: mesh carries no domain descriptor");
    if (tags.region_case != rc)
        throw ValidationError("build_eta: tags belong to the other geometric case");

    const Vec2 p_star = region_center(rc == RegionCase::Interior ? tags.omega0_spec : tags.omega_spec);
    BaseProfile base = std::holds_alternative<RectDomain>(*mesh.domain)
                           ? rect_profile(std::get<RectDomain>(*mesh.domain), p_star)
                           : disk_profile(std::get<DiskDomain>(*mesh.domain), p_star);

    auto h = rc == RegionCase::Interior ? cutoff_interior : cutoff_offcenter;
    auto hd = rc == RegionCase::Interior ? cutoff_interior_deriv : cutoff_offcenter_deriv;

    // Verification after construction; mu strengthens the convexification if
    // the first candidate fails.
    std::string last_error;
    for (double mu : {1.0, 2.0, 4.0}) {
        Zeta zeta{base, mu};
        SpatialWeight w = assemble_weight(mesh, rc, tags.eps, zeta, h, hd);
        try {
            const WeightReport rep = run_checks(mesh, tags, coeff, w, true);
            w.c_star = rep.min_quadform;
            return w;
        } catch (const WeightVerificationFailed& e) {
            last_error = e.what();
        }
    }
    throw WeightVerificationFailed(last_error);
}

}  // namespace

double cutoff_interior(double r, double eps) {
    if (r <= eps) return 0.0;
    if (r >= 2.0 * eps) return 1.0;
    return quintic_smoothstep((r - eps) / eps);
}

double cutoff_interior_deriv(double r, double eps) {
    if (r <= eps || r >= 2.0 * eps) return 0.0;
    return quintic_smoothstep_deriv((r - eps) / eps) / eps;
}

double cutoff_offcenter(double r, double eps) {
    if (r >= eps) return 1.0;
    if (r <= 0.5 * eps) return 2.0 * r * r / (eps * eps);
    // Hermite cubic on [eps/2, eps] matching the inner branch's value and
    // slope at eps/2 and reaching 1 with zero slope at eps.
    const double t = (r - 0.5 * eps) / (0.5 * eps);
    const double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
    const double h10 = t * (1.0 - t) * (1.0 - t);
    const double h01 = t * t * (3.0 - 2.0 * t);
    return 0.5 * h00 + (0.5 * eps) * (2.0 / eps) * h10 + 1.0 * h01;
}

double cutoff_offcenter_deriv(double r, double eps) {
    if (r >= eps) return 0.0;
    if (r <= 0.5 * eps) return 4.0 * r / (eps * eps);
    const double half = 0.5 * eps;
    const double t = (r - half) / half;
    const double dh00 = 6.0 * t * (t - 1.0);
    const double dh10 = (1.0 - t) * (1.0 - 3.0 * t);
    const double dh01 = 6.0 * t * (1.0 - t);
    return (0.5 * dh00 + half * (2.0 / eps) * dh10 + dh01) / half;
}

SpatialWeight build_eta_interior(const Mesh& mesh, const RegionTags& tags,
                                 const CoefficientField& coeff) {
    return build_weight(mesh, tags, coeff, RegionCase::Interior);
}

SpatialWeight build_eta_offcenter(const Mesh& mesh, const RegionTags& tags,
                                  const CoefficientField& coeff) {
    return build_weight(mesh, tags, coeff, RegionCase::Offcenter);
}

WeightReport verify_spatial_weight(const Mesh& mesh, const RegionTags& tags,
                                   const CoefficientField& coeff, const SpatialWeight& weight) {
    return run_checks(mesh, tags, coeff, weight, false);
}

namespace {

EpsilonSelection select_epsilon_impl(const std::vector<Vector>& slots, const Mesh& mesh,
                                     const RegionTags& tags, const CoefficientField& coeff) {
    const auto& q = TriQuadrature::order5();
    const int nt = mesh.num_triangles();

    // Per-element integrals of u^2 and |x|^a A grad(u).grad(u), summed over slots.
    std::vector<double> e_val(nt, 0.0), e_grad(nt, 0.0);
    for (int t = 0; t < nt; ++t) {
        const auto& tr = mesh.triangles[t];
        const double inv2a = 1.0 / (2.0 * mesh.areas[t]);
        std::array<Vec2, 3> grad;
        for (int i = 0; i < 3; ++i) {
            const Vec2& pj = mesh.vertices[tr[(i + 1) % 3]];
            const Vec2& pk = mesh.vertices[tr[(i + 2) % 3]];
            grad[i] = {(pj.y - pk.y) * inv2a, (pk.x - pj.x) * inv2a};
        }
        for (const auto& u : slots) {
            const Vec2 gu = grad[0] * u[tr[0]] + grad[1] * u[tr[1]] + grad[2] * u[tr[2]];
            for (int n = 0; n < TriQuadrature::num_points; ++n) {
                const auto& l = q.barycentric[n];
                const Vec2 x = mesh.vertices[tr[0]] * l[0] + mesh.vertices[tr[1]] * l[1] +
                               mesh.vertices[tr[2]] * l[2];
                const double uv = u[tr[0]] * l[0] + u[tr[1]] * l[1] + u[tr[2]] * l[2];
                const double wgt = q.weights[n] * mesh.areas[t];
                const double pw = std::pow(x.norm(), coeff.alpha);
                e_val[t] += wgt * uv * uv;
                e_grad[t] += wgt * pw * coeff.eval(x).quad(gu);
            }
        }
    }

    std::vector<double> bary_r(nt);
    double min_bary = std::numeric_limits<double>::max();
    for (int t = 0; t < nt; ++t) {
        bary_r[t] = mesh.barycenter(t).norm();
        min_bary = std::min(min_bary, bary_r[t]);
    }
    double omega_dist = std::numeric_limits<double>::max();
    for (int t : tags.omega_elems) omega_dist = std::min(omega_dist, mesh.distance_to_origin(t));

    // Trivial data: u vanishes outside omega.
    double outside = 0.0;
    for (int t = 0; t < nt; ++t)
        if (!tags.in_omega(t)) outside += e_val[t] + e_grad[t];
    if (outside == 0.0) return {tags.eps0 / 9.0, true};

    auto feasible = [&](double eps) {
        if (tags.region_case == RegionCase::Offcenter) return 2.0 * eps <= omega_dist;
        for (int t = 0; t < nt; ++t)
            if (mesh.distance_to_origin(t) < 6.0 * eps && !tags.in_omega0(t)) return false;
        return true;
    };
    auto holds = [&](double eps) {
        double lv = 0.0, lg = 0.0, rv = 0.0, rg = 0.0;
        for (int t = 0; t < nt; ++t) {
            if (bary_r[t] < eps) {
                lv += e_val[t];
                lg += e_grad[t];
            } else if (!tags.in_omega(t)) {
                rv += e_val[t];
                rg += e_grad[t];
            }
        }
        return lv <= 0.25 * rv && lg <= 0.25 * rg;
    };

    // Geometric grid eps0/9 * 2^-k, k >= 1, down to one element ring.
    std::vector<double> grid;
    for (double eps = tags.eps0 / 18.0; eps >= 0.5 * min_bary; eps *= 0.5) grid.push_back(eps);
    if (grid.empty()) grid.push_back(tags.eps0 / 18.0);

    // The predicate is monotone (shrinking eps moves mass from the left side
    // to the right side), so bisect on the grid index.
    int lo = 0, hi = static_cast<int>(grid.size()) - 1;
    if (!holds(grid[hi]) || !feasible(grid[hi]))
        throw NoEpsilonFound(
            "select_epsilon: no grid radius satisfies both smallness inequalities "
            "(data concentrated at the origin beyond mesh resolution)");
    if (feasible(grid[lo]) && holds(grid[lo])) return {grid[lo], false};
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        if (feasible(grid[mid]) && holds(grid[mid]))
            hi = mid;
        else
            lo = mid;
    }
    return {grid[hi], false};
}

}  // namespace

EpsilonSelection select_epsilon(const Vector& u, const Mesh& mesh, const RegionTags& tags,
                                const CoefficientField& coeff) {
    return select_epsilon_impl({u}, mesh, tags, coeff);
}

EpsilonSelection select_epsilon(const SpaceTimeField& u, const Mesh& mesh, const RegionTags& tags,
                                const CoefficientField& coeff) {
    std::vector<Vector> slots;
    slots.reserve(u.steps() + 1);
    for (int n = 0; n <= u.steps(); ++n) slots.push_back(u.values.col(n));
    return select_epsilon_impl(slots, mesh, tags, coeff);
}

CarlemanWeights make_weights(const SpatialWeight& eta, double s, double lambda, double T,
                             double delta) {
    if (!(s > 0.0) || !(lambda > 0.0))
        throw ValidationError("make_weights: s and lambda must be positive");
    if (!(delta > 0.0 && delta < 0.5 * T))
        throw ValidationError("make_weights: delta must lie in (0, T/2)");
    if (!(eta.eta_sup > 0.0))
        throw ValidationError("make_weights: eta vanishes identically");
    CarlemanWeights cw;
    cw.eta = eta;
    cw.s = s;
    cw.lambda = lambda;
    cw.T = T;
    cw.delta = delta;
    return cw;
}

}  // namespace degctrl
