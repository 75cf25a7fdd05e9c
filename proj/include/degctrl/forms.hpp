#pragma once

#include <Eigen/Sparse>
#include <array>
#include <functional>
#include <iosfwd>
#include <string>

#include "degctrl/mesh.hpp"
#include "degctrl/regions.hpp"

namespace degctrl {

using SparseMat = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Diffusion data for Div(|x|^alpha A grad z). A must be symmetric and
/// uniformly elliptic with constant beta. alpha = 0 is admitted only in
/// sanity mode, which unlocks the non-degenerate analytic test problems.
struct CoefficientField {
    double alpha = 1.0;
    std::function<SymMat2(const Vec2&)> A;
    double beta = 1.0;
    bool sanity_mode = false;

    static CoefficientField isotropic(double alpha);
    /// alpha = 0, A = I; only legal entry point for alpha outside (0,2).
    static CoefficientField sanity();
    static CoefficientField constant_matrix(double alpha, const SymMat2& A);
    /// Smooth nonconstant SPD field A(x) = I + (x x^T) / (2(1+|x|^2)).
    static CoefficientField radial_mix(double alpha);

    SymMat2 eval(const Vec2& x) const { return A(x); }
    /// |x|^alpha A(x), the full diffusion tensor.
    SymMat2 diffusion(const Vec2& x) const {
        const double w = alpha == 0.0 ? 1.0 : std::pow(x.norm(), alpha);
        SymMat2 m = A(x);
        m.a11 *= w; m.a12 *= w; m.a22 *= w;
        return m;
    }
    void validate() const;
};

/// Result of randomized ellipticity sampling.
struct EllipticityReport {
    double min_rayleigh = 0.0;      // min over samples of xi^T A xi / |xi|^2
    double min_eigenvalue = 0.0;    // min over sample points of lambda_min(A(x))
    bool satisfied = false;
};

EllipticityReport check_ellipticity(const CoefficientField& coeff, const Mesh& mesh,
                                    int num_samples, std::uint64_t seed);

/// 7-point, degree-5 triangle quadrature rule. All nodes are interior, so
/// integrands singular at a vertex (|x|^{alpha-2} at the origin) stay finite.
struct TriQuadrature {
    static constexpr int num_points = 7;
    std::array<std::array<double, 3>, 7> barycentric;
    std::array<double, 7> weights;  // sum to 1; scale by element area
    static const TriQuadrature& order5();
};

/// Symmetric bilinear form assembled over the whole node set, plus its
/// Dirichlet-eliminated restriction to free (interior) nodes.
struct DiscreteForm {
    SparseMat full;        // all nodes, exactly symmetric as stored
    SparseMat free;        // free nodes only
    const Mesh* mesh = nullptr;

    double entry_sum() const { return Vector::Ones(full.rows()).dot(full * Vector::Ones(full.cols())); }
    /// v^T full v over all nodes.
    double energy(const Vector& v) const { return v.dot(full * v); }
    /// Restriction of a full-length nodal vector to free nodes.
    Vector restrict_free(const Vector& v) const;
    /// Zero-padded extension of a free vector to all nodes.
    Vector extend_full(const Vector& v) const;
};

/// P1 mass matrix; entry sum equals the mesh area exactly.
DiscreteForm assemble_mass(const Mesh& mesh);

/// P1 mass matrix restricted to the omega0-tagged elements (chi_{omega0}).
DiscreteForm assemble_mass_region(const Mesh& mesh, const std::vector<int>& elems);

/// Degenerate stiffness: entries int |x|^alpha A grad(phi_i) . grad(phi_j) dx
/// by the order-5 rule. Row sums over all nodes vanish (constants in kernel).
DiscreteForm assemble_degenerate_stiffness(const Mesh& mesh, const CoefficientField& coeff);

/// Compares the order-5 rule against a once-subdivided rule elementwise.
/// The elements touching the origin vertex carry an intrinsic deviation of
/// order 1e-3 (|x|^alpha has unbounded derivatives there); the default
/// tolerance sits above it so the flag marks genuinely unresolved variation.
struct QuadratureReport {
    double max_rel_deviation = 0.0;
    int worst_element = -1;
    bool insufficient = false;  // raised when deviation exceeds tol
};

QuadratureReport check_stiffness_quadrature(const Mesh& mesh, const CoefficientField& coeff,
                                            double tol = 5e-3);

/// sqrt(v^T K v) over free nodes; the weighted H^1_0 seminorm realized by the
/// stiffness form. Throws NumericalFailure if the quadratic form is negative.
double weighted_h1_norm(const Vector& nodal, const DiscreteForm& stiffness);

struct HardyResult {
    double lhs = 0.0;    // alpha * sqrt(int |x|^{alpha-2} z^2 dx)
    double rhs = 0.0;    // weighted H^1_0 norm of z
    double ratio = 0.0;  // lhs/rhs, 0 when both vanish
};

/// Evaluates both sides of the Hardy-type inequality for a nodal field.
/// The left side uses origin-excluding quadrature (interior rule nodes).
HardyResult hardy_check(const Vector& nodal, const CoefficientField& coeff, const Mesh& mesh,
                        const DiscreteForm& stiffness);

/// int_Omega |x|^{alpha-2} z^2 dx by the order-5 rule on the P1 interpolant.
double weighted_l2_squared(const Vector& nodal, double exponent, const Mesh& mesh);

/// Plain-text coordinate list (row col value per line, sorted by row, col).
void write_coordinate_list(std::ostream& out, const SparseMat& m);

}  // namespace degctrl
