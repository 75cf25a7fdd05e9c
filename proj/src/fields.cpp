#include "degctrl/fields.hpp"

#include <cmath>

namespace degctrl {

std::uint64_t Rng::next() {
    // splitmix64
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return mag * std::cos(2.0 * M_PI * u2);
}

ScalarField boundary_bump(const Domain& domain) {
    if (const auto* r = std::get_if<RectDomain>(&domain)) {
        const RectDomain rect = *r;
        const double norm = 16.0 / (rect.width() * rect.width() * rect.height() * rect.height());
        return [rect, norm](const Vec2& p) {
            if (!domain_contains(rect, p)) return 0.0;
            return norm * (p.x - rect.x0) * (rect.x1 - p.x) * (p.y - rect.y0) * (rect.y1 - p.y);
        };
    }
    const DiskDomain disk = std::get<DiskDomain>(domain);
    return [disk](const Vec2& p) {
        const double q = 1.0 - (p - disk.center).squared_norm() / (disk.radius * disk.radius);
        return q > 0.0 ? q : 0.0;
    };
}

ScalarField random_smooth_field(Rng& rng, const Domain& domain, int num_bumps) {
    struct Bump {
        Vec2 center;
        double inv_two_w2;
        double amp;
    };
    std::vector<Bump> bumps;
    const double extent = domain_extent(domain);
    for (int k = 0; k < num_bumps; ++k) {
        Vec2 c;
        do {
            if (const auto* r = std::get_if<RectDomain>(&domain)) {
                c = {rng.uniform(r->x0, r->x1), rng.uniform(r->y0, r->y1)};
            } else {
                const auto& d = std::get<DiskDomain>(domain);
                c = {rng.uniform(d.center.x - d.radius, d.center.x + d.radius),
                     rng.uniform(d.center.y - d.radius, d.center.y + d.radius)};
            }
        } while (!domain_contains(domain, c));
        const double w = rng.uniform(0.1, 0.3) * extent;
        bumps.push_back({c, 0.5 / (w * w), rng.uniform(-1.0, 1.0)});
    }
    ScalarField bdry = boundary_bump(domain);
    return [bumps, bdry](const Vec2& p) {
        double v = 0.0;
        for (const auto& b : bumps) v += b.amp * std::exp(-(p - b.center).squared_norm() * b.inv_two_w2);
        return v * bdry(p);
    };
}

ScalarField gaussian_bump(const Domain& domain, const Vec2& center, double width, double amp) {
    ScalarField bdry = boundary_bump(domain);
    const double inv_two_w2 = 0.5 / (width * width);
    return [=](const Vec2& p) {
        return amp * std::exp(-(p - center).squared_norm() * inv_two_w2) * bdry(p);
    };
}

Vector interpolate(const Mesh& mesh, const ScalarField& f) {
    Vector v(mesh.num_vertices());
    for (int n = 0; n < mesh.num_vertices(); ++n)
        v[n] = mesh.node_flags[n] == NodeFlag::Boundary ? 0.0 : f(mesh.vertices[n]);
    return v;
}

Vector interpolate_raw(const Mesh& mesh, const ScalarField& f) {
    Vector v(mesh.num_vertices());
    for (int n = 0; n < mesh.num_vertices(); ++n) v[n] = f(mesh.vertices[n]);
    return v;
}

double l2_error(const Mesh& mesh, const Vector& nodal, const ScalarField& exact) {
    const auto& q = TriQuadrature::order5();
    double acc = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tr = mesh.triangles[t];
        for (int n = 0; n < TriQuadrature::num_points; ++n) {
            const auto& l = q.barycentric[n];
            const Vec2 x = mesh.vertices[tr[0]] * l[0] + mesh.vertices[tr[1]] * l[1] +
                           mesh.vertices[tr[2]] * l[2];
            const double vh = nodal[tr[0]] * l[0] + nodal[tr[1]] * l[1] + nodal[tr[2]] * l[2];
            const double d = vh - exact(x);
            acc += q.weights[n] * mesh.areas[t] * d * d;
        }
    }
    return std::sqrt(acc);
}

}  // namespace degctrl
