#include <doctest.h>

#include "degctrl/errors.hpp"
#include "degctrl/fields.hpp"
#include "degctrl/weights.hpp"
#include "oracles.hpp"

using namespace degctrl;

namespace {

struct InteriorFixture {
    Mesh mesh = oracles::unit_square_mesh(0.1, 2.0);
    RegionTags tags = tag_regions(mesh, BallSpec{{0.2, 0.0}, 0.1}, BallSpec{{0, 0}, 0.5}, 0.05,
                                  0.9, RegionCase::Interior);
    CoefficientField coeff = CoefficientField::isotropic(1.0);
};

struct OffcenterFixture {
    Mesh mesh = oracles::unit_square_mesh(0.1, 2.0);
    RegionTags tags = tag_regions(mesh, BallSpec{{0.6, 0.0}, 0.1}, BallSpec{{0.6, 0.0}, 0.2},
                                  0.05, 0.9, RegionCase::Offcenter);
    CoefficientField coeff = CoefficientField::isotropic(1.0);
};

double fd_second_derivative(double (*f)(double, double), double r, double eps) {
    const double d = 1e-5 * eps;
    return (f(r + d, eps) - 2.0 * f(r, eps) + f(r - d, eps)) / (d * d);
}

}  // namespace

TEST_CASE("interior cutoff matches value, slope, curvature at both ends") {
    const double eps = 0.05;
    CHECK(cutoff_interior(eps, eps) == 0.0);
    CHECK(cutoff_interior(2.0 * eps, eps) == 1.0);
    CHECK(cutoff_interior(0.5 * eps, eps) == 0.0);
    CHECK(cutoff_interior(3.0 * eps, eps) == 1.0);
    CHECK(std::abs(cutoff_interior_deriv(eps * (1.0 + 1e-9), eps)) <= 1e-6 / eps);
    CHECK(std::abs(cutoff_interior_deriv(2.0 * eps * (1.0 - 1e-9), eps)) <= 1e-6 / eps);
    // straddling second differences stay small at both seams (C2 matching)
    CHECK(std::abs(fd_second_derivative(cutoff_interior, eps, eps)) <= 1e-3 / (eps * eps));
    CHECK(std::abs(fd_second_derivative(cutoff_interior, 2.0 * eps, eps)) <= 1e-3 / (eps * eps));
    // monotone on the blend
    double prev = -1.0;
    for (int k = 0; k <= 50; ++k) {
        const double v = cutoff_interior(eps + k * eps / 50.0, eps);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("offcenter cutoff follows the quadratic/cubic/one profile") {
    const double eps = 0.08;
    CHECK(cutoff_offcenter(0.0, eps) == 0.0);
    CHECK(cutoff_offcenter(0.5 * eps, eps) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(cutoff_offcenter(eps, eps) == 1.0);
    CHECK(cutoff_offcenter(2.0 * eps, eps) == 1.0);

    // C1 across both seams, to 1e-12
    for (double seam : {0.5 * eps, eps}) {
        const double lo = cutoff_offcenter(seam * (1.0 - 1e-13), eps);
        const double hi = cutoff_offcenter(seam * (1.0 + 1e-13), eps);
        CHECK(std::abs(hi - lo) <= 1e-12);
        const double dlo = cutoff_offcenter_deriv(seam * (1.0 - 1e-13), eps);
        const double dhi = cutoff_offcenter_deriv(seam * (1.0 + 1e-13), eps);
        CHECK(std::abs(dhi - dlo) <= 1e-9 / eps);
    }
    // derivative consistent with finite differences inside the blend
    const double r = 0.7 * eps;
    const double d = 1e-7 * eps;
    const double fd = (cutoff_offcenter(r + d, eps) - cutoff_offcenter(r - d, eps)) / (2.0 * d);
    CHECK(cutoff_offcenter_deriv(r, eps) == doctest::Approx(fd).epsilon(1e-5));
}

TEST_CASE("interior weight satisfies its support and positivity structure") {
    const InteriorFixture fx;
    const SpatialWeight w = build_eta_interior(fx.mesh, fx.tags, fx.coeff);
    CHECK(w.c_star > 0.0);
    for (int v = 0; v < fx.mesh.num_vertices(); ++v) {
        const double r = fx.mesh.vertices[v].norm();
        if (r <= w.eps || fx.mesh.node_flags[v] == NodeFlag::Boundary) {
            CHECK(w.eta[v] == 0.0);
        } else {
            CHECK(w.eta[v] > 0.0);
        }
        if (r <= w.eps) CHECK(w.grad_eta[v].norm() == 0.0);
    }
    const WeightReport rep = verify_spatial_weight(fx.mesh, fx.tags, fx.coeff, w);
    CHECK(rep.pass);
    CHECK(rep.min_boundary_slope > 0.0);
    CHECK(rep.min_quadform == doctest::Approx(w.c_star));
}

TEST_CASE("offcenter weight keeps its squared bound off omega and the eps ball") {
    const OffcenterFixture fx;
    const SpatialWeight w = build_eta_offcenter(fx.mesh, fx.tags, fx.coeff);
    const WeightReport rep = verify_spatial_weight(fx.mesh, fx.tags, fx.coeff, w);
    CHECK(rep.pass);
    CHECK(rep.min_quadform > 0.0);
    CHECK(rep.min_boundary_slope > 0.0);
    // eta vanishes exactly at the origin (h(0) = 0) and on the boundary
    REQUIRE(fx.mesh.origin_vertex >= 0);
    CHECK(w.eta[fx.mesh.origin_vertex] == 0.0);
}

TEST_CASE("disk domains build verified interior weights too") {
    const Mesh mesh = build_graded_mesh(DiskDomain{{0, 0}, 1.0}, 0.08, 2.0);
    const RegionTags tags = tag_regions(mesh, BallSpec{{0.2, 0.0}, 0.1}, BallSpec{{0, 0}, 0.5},
                                        0.05, 0.9, RegionCase::Interior);
    const CoefficientField coeff = CoefficientField::radial_mix(1.2);
    const SpatialWeight w = build_eta_interior(mesh, tags, coeff);
    CHECK(w.c_star > 0.0);
    CHECK(verify_spatial_weight(mesh, tags, coeff, w).pass);
}

TEST_CASE("sabotaged weights fail verification loudly") {
    const InteriorFixture fx;
    SpatialWeight w = build_eta_interior(fx.mesh, fx.tags, fx.coeff);
    for (auto& g : w.grad_eta) g = {0.0, 0.0};
    const WeightReport rep = verify_spatial_weight(fx.mesh, fx.tags, fx.coeff, w);
    CHECK(!rep.pass);
}

TEST_CASE("epsilon selection: support away from the origin gives the grid maximum") {
    const InteriorFixture fx;
    const Vector u = interpolate(fx.mesh, gaussian_bump(*fx.mesh.domain, {0.6, 0.6}, 0.1, 1.0));
    const EpsilonSelection sel = select_epsilon(u, fx.mesh, fx.tags, fx.coeff);
    CHECK(!sel.trivial);
    CHECK(sel.eps == doctest::Approx(fx.tags.eps0 / 18.0));
}

TEST_CASE("epsilon selection re-verifies post hoc for an origin bump") {
    const InteriorFixture fx;
    const Vector u = interpolate(fx.mesh, gaussian_bump(*fx.mesh.domain, {0, 0}, 0.35, 1.0));
    const EpsilonSelection sel = select_epsilon(u, fx.mesh, fx.tags, fx.coeff);
    CHECK(!sel.trivial);

    // Direct quadrature re-check of both inequalities at the returned eps.
    const auto& q = TriQuadrature::order5();
    double lv = 0, lg = 0, rv = 0, rg = 0;
    for (int t = 0; t < fx.mesh.num_triangles(); ++t) {
        const auto& tr = fx.mesh.triangles[t];
        const double inv2a = 1.0 / (2.0 * fx.mesh.areas[t]);
        Vec2 gu{0, 0};
        for (int i = 0; i < 3; ++i) {
            const Vec2& pj = fx.mesh.vertices[tr[(i + 1) % 3]];
            const Vec2& pk = fx.mesh.vertices[tr[(i + 2) % 3]];
            const Vec2 gb{(pj.y - pk.y) * inv2a, (pk.x - pj.x) * inv2a};
            gu = gu + gb * u[tr[i]];
        }
        double ev = 0, eg = 0;
        for (int n = 0; n < TriQuadrature::num_points; ++n) {
            const auto& l = q.barycentric[n];
            const Vec2 x = fx.mesh.vertices[tr[0]] * l[0] + fx.mesh.vertices[tr[1]] * l[1] +
                           fx.mesh.vertices[tr[2]] * l[2];
            const double uv = u[tr[0]] * l[0] + u[tr[1]] * l[1] + u[tr[2]] * l[2];
            const double w = q.weights[n] * fx.mesh.areas[t];
            ev += w * uv * uv;
            eg += w * std::pow(x.norm(), fx.coeff.alpha) * gu.squared_norm();
        }
        const double br = fx.mesh.barycenter(t).norm();
        if (br < sel.eps) {
            lv += ev;
            lg += eg;
        } else if (!fx.tags.in_omega(t)) {
            rv += ev;
            rg += eg;
        }
    }
    CHECK(lv <= 0.25 * rv);
    CHECK(lg <= 0.25 * rg);
}

TEST_CASE("epsilon selection flags trivial data") {
    const InteriorFixture fx;
    const EpsilonSelection sel =
        select_epsilon(Vector::Zero(fx.mesh.num_vertices()), fx.mesh, fx.tags, fx.coeff);
    CHECK(sel.trivial);
    CHECK(sel.eps == doctest::Approx(fx.tags.eps0 / 9.0));
}

TEST_CASE("carleman weight evaluators satisfy the defining identities") {
    const InteriorFixture fx;
    const SpatialWeight eta = build_eta_interior(fx.mesh, fx.tags, fx.coeff);
    const double T = 1.0, lambda = 1.5, s = 2.0, delta = 0.05;
    const CarlemanWeights cw = make_weights(eta, s, lambda, T, delta);

    CHECK(cw.theta(0.5) == doctest::Approx(256.0).epsilon(1e-13));
    CHECK(cw.theta(0.5 * T) == doctest::Approx(std::pow(T * T / 4.0, -4.0)));

    const double big = std::exp(10.0 * lambda * eta.eta_sup);
    for (double t : {delta, 0.3, 0.5, 0.9, T - delta}) {
        CHECK(cw.theta(t) >= cw.theta(0.5 * T));
        CHECK(cw.theta(t) == doctest::Approx(cw.theta(T - t)).epsilon(1e-12));
        for (int v = 0; v < fx.mesh.num_vertices(); v += 7) {
            const double xi = cw.xi(eta.eta[v], t);
            const double sigma = cw.sigma(eta.eta[v], t);
            CHECK(xi > 0.0);
            CHECK(sigma > 0.0);
            CHECK(sigma + xi == doctest::Approx(cw.theta(t) * big).epsilon(1e-12));
            if (eta.eta[v] == 0.0)
                CHECK(xi == doctest::Approx(cw.theta(t) *
                                            std::exp(8.0 * lambda * eta.eta_sup)).epsilon(1e-12));
        }
    }
    // theta blows up toward the endpoints
    CHECK(cw.theta(1e-3) > 1e10);
    CHECK(cw.theta(T - 1e-3) > 1e10);
}

TEST_CASE("make_weights validates its parameters") {
    const InteriorFixture fx;
    const SpatialWeight eta = build_eta_interior(fx.mesh, fx.tags, fx.coeff);
    CHECK_THROWS_AS(make_weights(eta, -1.0, 1.0, 1.0, 0.1), ValidationError);
    CHECK_THROWS_AS(make_weights(eta, 1.0, 0.0, 1.0, 0.1), ValidationError);
    CHECK_THROWS_AS(make_weights(eta, 1.0, 1.0, 1.0, 0.6), ValidationError);
}
