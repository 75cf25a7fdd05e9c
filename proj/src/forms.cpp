#include "degctrl/forms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <tuple>
#include <vector>

#include "degctrl/errors.hpp"

namespace degctrl {

CoefficientField CoefficientField::isotropic(double alpha) {
    CoefficientField c;
    c.alpha = alpha;
    c.A = [](const Vec2&) { return SymMat2::identity(); };
    c.beta = 1.0;
    c.validate();
    return c;
}

CoefficientField CoefficientField::sanity() {
    CoefficientField c;
    c.alpha = 0.0;
    c.A = [](const Vec2&) { return SymMat2::identity(); };
    c.beta = 1.0;
    c.sanity_mode = true;
    return c;
}

CoefficientField CoefficientField::constant_matrix(double alpha, const SymMat2& A) {
    CoefficientField c;
    c.alpha = alpha;
    c.A = [A](const Vec2&) { return A; };
    c.beta = A.min_eigenvalue();
    c.validate();
    return c;
}

CoefficientField CoefficientField::radial_mix(double alpha) {
    CoefficientField c;
    c.alpha = alpha;
    c.A = [](const Vec2& x) {
        const double s = 0.5 / (1.0 + x.squared_norm());
        return SymMat2{1.0 + s * x.x * x.x, s * x.x * x.y, 1.0 + s * x.y * x.y};
    };
    c.beta = 1.0;
    c.validate();
    return c;
}

void CoefficientField::validate() const {
    if (!sanity_mode && !(alpha > 0.0 && alpha < 2.0))
        throw ValidationError("CoefficientField: alpha must lie in (0,2) outside sanity mode");
    if (sanity_mode && alpha != 0.0)
        throw ValidationError("CoefficientField: sanity mode fixes alpha = 0");
    if (!(beta > 0.0)) throw ValidationError("CoefficientField: beta must be positive");
    if (!A) throw ValidationError("CoefficientField: missing matrix field");
}

EllipticityReport check_ellipticity(const CoefficientField& coeff, const Mesh& mesh,
                                    int num_samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> elem(0, mesh.num_triangles() - 1);

    EllipticityReport rep;
    rep.min_rayleigh = std::numeric_limits<double>::max();
    rep.min_eigenvalue = std::numeric_limits<double>::max();
    for (int s = 0; s < num_samples; ++s) {
        const auto& tr = mesh.triangles[elem(rng)];
        double l0 = unit(rng), l1 = unit(rng);
        if (l0 + l1 > 1.0) { l0 = 1.0 - l0; l1 = 1.0 - l1; }
        const Vec2 x = mesh.vertices[tr[0]] * (1.0 - l0 - l1) + mesh.vertices[tr[1]] * l0 +
                       mesh.vertices[tr[2]] * l1;
        const double phi = 2.0 * M_PI * unit(rng);
        const Vec2 xi{std::cos(phi), std::sin(phi)};
        const SymMat2 a = coeff.eval(x);
        rep.min_rayleigh = std::min(rep.min_rayleigh, a.quad(xi));
        rep.min_eigenvalue = std::min(rep.min_eigenvalue, a.min_eigenvalue());
    }
    rep.satisfied = rep.min_rayleigh >= coeff.beta - 1e-12 && rep.min_eigenvalue >= coeff.beta - 1e-12;
    return rep;
}

const TriQuadrature& TriQuadrature::order5() {
    static const TriQuadrature rule = [] {
        TriQuadrature q;
        const double s15 = std::sqrt(15.0);
        const double a1 = (6.0 - s15) / 21.0, w1 = (155.0 - s15) / 1200.0;
        const double a2 = (6.0 + s15) / 21.0, w2 = (155.0 + s15) / 1200.0;
        q.barycentric[0] = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
        q.weights[0] = 9.0 / 40.0;
        const std::array<double, 2> as{a1, a2};
        const std::array<double, 2> ws{w1, w2};
        int idx = 1;
        for (int g = 0; g < 2; ++g) {
            const double a = as[g];
            const double b = 1.0 - 2.0 * a;
            q.barycentric[idx] = {b, a, a};
            q.barycentric[idx + 1] = {a, b, a};
            q.barycentric[idx + 2] = {a, a, b};
            q.weights[idx] = q.weights[idx + 1] = q.weights[idx + 2] = ws[g];
            idx += 3;
        }
        return q;
    }();
    return rule;
}

namespace {

struct ElementGeometry {
    std::array<Vec2, 3> p;
    std::array<Vec2, 3> grad;  // P1 basis gradients (constant per element)
    double area;
};

ElementGeometry element_geometry(const Mesh& mesh, int t) {
    ElementGeometry g;
    const auto& tr = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) g.p[i] = mesh.vertices[tr[i]];
    g.area = mesh.areas[t];
    const double inv2a = 1.0 / (2.0 * g.area);
    for (int i = 0; i < 3; ++i) {
        const Vec2& pj = g.p[(i + 1) % 3];
        const Vec2& pk = g.p[(i + 2) % 3];
        g.grad[i] = {(pj.y - pk.y) * inv2a, (pk.x - pj.x) * inv2a};
    }
    return g;
}

// 3x3 element stiffness for int |x|^alpha A grad(phi_i).grad(phi_j) over one
// triangle given by corner points, by the order-5 rule.
std::array<std::array<double, 3>, 3> stiffness_local(const std::array<Vec2, 3>& p,
                                                     const std::array<Vec2, 3>& grad, double area,
                                                     const CoefficientField& coeff) {
    const auto& q = TriQuadrature::order5();
    std::array<std::array<double, 3>, 3> k{};
    for (int n = 0; n < TriQuadrature::num_points; ++n) {
        const auto& l = q.barycentric[n];
        const Vec2 x = p[0] * l[0] + p[1] * l[1] + p[2] * l[2];
        const SymMat2 d = coeff.diffusion(x);
        const double w = q.weights[n] * area;
        std::array<Vec2, 3> dg;
        for (int i = 0; i < 3; ++i) dg[i] = d.apply(grad[i]);
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) k[i][j] += w * dg[i].dot(grad[j]);
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < i; ++j) k[i][j] = k[j][i];
    return k;
}

DiscreteForm from_triplets(const Mesh& mesh, std::vector<Eigen::Triplet<double>>& trip) {
    DiscreteForm f;
    f.mesh = &mesh;
    const int n = mesh.num_vertices();
    f.full.resize(n, n);
    f.full.setFromTriplets(trip.begin(), trip.end());
    f.full.makeCompressed();

    std::vector<Eigen::Triplet<double>> ft;
    ft.reserve(trip.size());
    for (const auto& t : trip) {
        const int fi = mesh.free_index[t.row()];
        const int fj = mesh.free_index[t.col()];
        if (fi >= 0 && fj >= 0) ft.emplace_back(fi, fj, t.value());
    }
    const int nf = mesh.num_free();
    f.free.resize(nf, nf);
    f.free.setFromTriplets(ft.begin(), ft.end());
    f.free.makeCompressed();
    return f;
}

}  // namespace

Vector DiscreteForm::restrict_free(const Vector& v) const {
    Vector r(mesh->num_free());
    for (int k = 0; k < mesh->num_free(); ++k) r[k] = v[mesh->free_nodes[k]];
    return r;
}

Vector DiscreteForm::extend_full(const Vector& v) const {
    Vector r = Vector::Zero(mesh->num_vertices());
    for (int k = 0; k < mesh->num_free(); ++k) r[mesh->free_nodes[k]] = v[k];
    return r;
}

DiscreteForm assemble_mass(const Mesh& mesh) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(mesh.num_triangles() * 9);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tr = mesh.triangles[t];
        const double a12 = mesh.areas[t] / 12.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trip.emplace_back(tr[i], tr[j], (i == j ? 2.0 : 1.0) * a12);
    }
    return from_triplets(mesh, trip);
}

DiscreteForm assemble_mass_region(const Mesh& mesh, const std::vector<int>& elems) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(elems.size() * 9);
    for (int t : elems) {
        const auto& tr = mesh.triangles[t];
        const double a12 = mesh.areas[t] / 12.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trip.emplace_back(tr[i], tr[j], (i == j ? 2.0 : 1.0) * a12);
    }
    return from_triplets(mesh, trip);
}

DiscreteForm assemble_degenerate_stiffness(const Mesh& mesh, const CoefficientField& coeff) {
    coeff.validate();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(mesh.num_triangles() * 9);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto g = element_geometry(mesh, t);
        const auto k = stiffness_local(g.p, g.grad, g.area, coeff);
        const auto& tr = mesh.triangles[t];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) trip.emplace_back(tr[i], tr[j], k[i][j]);
    }
    return from_triplets(mesh, trip);
}

QuadratureReport check_stiffness_quadrature(const Mesh& mesh, const CoefficientField& coeff,
                                            double tol) {
    QuadratureReport rep;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto g = element_geometry(mesh, t);
        const auto coarse = stiffness_local(g.p, g.grad, g.area, coeff);

        // Once-subdivided rule: 4 congruent children, same basis gradients.
        const Vec2 m01 = (g.p[0] + g.p[1]) * 0.5;
        const Vec2 m12 = (g.p[1] + g.p[2]) * 0.5;
        const Vec2 m20 = (g.p[2] + g.p[0]) * 0.5;
        const std::array<std::array<Vec2, 3>, 4> children{{{g.p[0], m01, m20},
                                                           {g.p[1], m12, m01},
                                                           {g.p[2], m20, m12},
                                                           {m01, m12, m20}}};
        std::array<std::array<double, 3>, 3> fine{};
        for (const auto& c : children) {
            const auto part = stiffness_local(c, g.grad, g.area / 4.0, coeff);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) fine[i][j] += part[i][j];
        }
        double scale = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) scale = std::max(scale, std::abs(fine[i][j]));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double dev = std::abs(coarse[i][j] - fine[i][j]) / std::max(scale, 1e-300);
                if (dev > rep.max_rel_deviation) {
                    rep.max_rel_deviation = dev;
                    rep.worst_element = t;
                }
            }
    }
    rep.insufficient = rep.max_rel_deviation > tol;
    return rep;
}

double weighted_h1_norm(const Vector& nodal, const DiscreteForm& stiffness) {
    const Vector vf = stiffness.restrict_free(nodal);
    const double q = vf.dot(stiffness.free * vf);
    if (q < -1e-12 * std::max(1.0, vf.squaredNorm()))
        throw NumericalFailure("weighted_h1_norm: negative quadratic form (broken assembly)");
    return std::sqrt(std::max(q, 0.0));
}

double weighted_l2_squared(const Vector& nodal, double exponent, const Mesh& mesh) {
    const auto& q = TriQuadrature::order5();
    double acc = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tr = mesh.triangles[t];
        for (int n = 0; n < TriQuadrature::num_points; ++n) {
            const auto& l = q.barycentric[n];
            const Vec2 x = mesh.vertices[tr[0]] * l[0] + mesh.vertices[tr[1]] * l[1] +
                           mesh.vertices[tr[2]] * l[2];
            const double z = nodal[tr[0]] * l[0] + nodal[tr[1]] * l[1] + nodal[tr[2]] * l[2];
            acc += q.weights[n] * mesh.areas[t] * std::pow(x.norm(), exponent) * z * z;
        }
    }
    return acc;
}

HardyResult hardy_check(const Vector& nodal, const CoefficientField& coeff, const Mesh& mesh,
                        const DiscreteForm& stiffness) {
    if (!coeff.sanity_mode && !(coeff.alpha > 0.0))
        throw ValidationError("hardy_check: requires alpha > 0");
    HardyResult r;
    r.lhs = coeff.alpha * std::sqrt(weighted_l2_squared(nodal, coeff.alpha - 2.0, mesh));
    r.rhs = weighted_h1_norm(nodal, stiffness);
    r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : 0.0;
    return r;
}

void write_coordinate_list(std::ostream& out, const SparseMat& m) {
    std::vector<std::tuple<int, int, double>> entries;
    entries.reserve(m.nonZeros());
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMat::InnerIterator it(m, k); it; ++it)
            entries.emplace_back(it.row(), it.col(), it.value());
    std::sort(entries.begin(), entries.end());
    out.precision(17);
    for (const auto& [r, c, v] : entries) out << r << " " << c << " " << v << "\n";
}

}  // namespace degctrl
