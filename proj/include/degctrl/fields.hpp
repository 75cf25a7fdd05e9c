#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "degctrl/forms.hpp"
#include "degctrl/mesh.hpp"

namespace degctrl {

/// Deterministic generator with hand-rolled draws, so identical seeds give
/// byte-identical experiment outputs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next();
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    int uniform_int(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

using ScalarField = std::function<double(const Vec2&)>;

/// Smooth factor vanishing on the domain boundary, positive inside.
ScalarField boundary_bump(const Domain& domain);

/// Sum of random Gaussian bumps multiplied by the boundary bump: smooth,
/// zero trace, evaluable on any mesh of the same domain (refinement studies).
ScalarField random_smooth_field(Rng& rng, const Domain& domain, int num_bumps);

/// Single Gaussian bump times the boundary bump.
ScalarField gaussian_bump(const Domain& domain, const Vec2& center, double width, double amp);

/// Nodal interpolation with boundary nodes clamped to zero.
Vector interpolate(const Mesh& mesh, const ScalarField& f);

/// Interpolation without the boundary clamp (for known-zero-trace fields).
Vector interpolate_raw(const Mesh& mesh, const ScalarField& f);

/// L2 norm of the difference between a P1 field and an analytic function,
/// by the order-5 quadrature rule.
double l2_error(const Mesh& mesh, const Vector& nodal, const ScalarField& exact);

}  // namespace degctrl
