#pragma once

#include <functional>
#include <vector>

#include "degctrl/evolve.hpp"
#include "degctrl/forms.hpp"
#include "degctrl/regions.hpp"

namespace degctrl {

/// Spatial Carleman weight eta = h * zeta with its factors and closed-form
/// evaluators. zeta vanishes on the boundary, is positive inside, and has its
/// unique critical point relocated into the control region; h is the radial
/// cutoff (interior case: vanishes on the eps-ball, offcenter case: quadratic
/// well pinned to zero at the origin only).
struct SpatialWeight {
    RegionCase region_case = RegionCase::Interior;
    double eps = 0.0;

    Vector eta;                    // nodal values
    Vector h_factor;               // nodal values of h
    Vector zeta_factor;            // nodal values of zeta
    std::vector<Vec2> grad_eta;    // nodal gradient (closed-form, sampled)
    double eta_sup = 0.0;          // max |eta| over nodes

    std::function<double(const Vec2&)> eta_fn;
    std::function<Vec2(const Vec2&)> grad_eta_fn;

    double c_star = 0.0;           // recorded min of the verified quadratic form
    double mu = 1.0;               // accepted convexification strength
};

/// Pointwise verification results for a constructed weight.
struct WeightReport {
    double min_quadform = 0.0;       // interior: min |x|^a A grad.grad on Omega\omega0
                                     // offcenter: min of its square on Omega\(omega u Omega_eps)
    Vec2 worst_point;
    double min_boundary_slope = 0.0; // min over boundary edges of -(deta/dn)
    double max_eta_on_eps = 0.0;     // interior: max |eta| over nodes with |x| <= eps and boundary
    double max_grad_on_eps = 0.0;    // interior: max |grad eta| over nodes with |x| <= eps
    bool pass = false;
};

/// Interior-case weight (0 in omega0): eta vanishes on the eps-ball and the
/// boundary, is positive on Omega^eps, and |x|^a A grad(eta).grad(eta) stays
/// bounded below on Omega \ omega0. Throws WeightVerificationFailed if the
/// constructed candidate fails pointwise verification after tuning.
SpatialWeight build_eta_interior(const Mesh& mesh, const RegionTags& tags,
                                 const CoefficientField& coeff);

/// Offcenter-case weight (0 not in omega0): h follows the quadratic/cubic/1
/// radial profile; the quadratic-form bound is enforced on
/// Omega \ (omega u Omega_eps).
SpatialWeight build_eta_offcenter(const Mesh& mesh, const RegionTags& tags,
                                  const CoefficientField& coeff);

/// Re-runs the pointwise checks for an already-built weight.
WeightReport verify_spatial_weight(const Mesh& mesh, const RegionTags& tags,
                                   const CoefficientField& coeff, const SpatialWeight& weight);

/// Radial cutoff profiles (exposed for tests).
double cutoff_interior(double r, double eps);        // 0 / quintic blend / 1
double cutoff_interior_deriv(double r, double eps);
double cutoff_offcenter(double r, double eps);       // 2 r^2/eps^2 / cubic blend / 1
double cutoff_offcenter_deriv(double r, double eps);

struct EpsilonSelection {
    double eps = 0.0;
    bool trivial = false;  // u vanished on Omega \ omega; eps defaults to eps0/9
};

/// Largest eps on the geometric grid {eps0/9 * 2^-k, k >= 1} such that both
///   int_{Omega_eps} u^2        <= 1/4 int_{Omega\(omega u Omega_eps)} u^2
///   int_{Omega_eps} |x|^a A du.du <= 1/4 int_{Omega\(omega u Omega_eps)} |x|^a A du.du
/// hold for the P1 field u (element membership by barycenter). Candidates
/// that would break the tags' case invariants are skipped. Throws
/// NoEpsilonFound when even the finest grid value fails.
EpsilonSelection select_epsilon(const Vector& u, const Mesh& mesh, const RegionTags& tags,
                                const CoefficientField& coeff);

/// Space-time variant: both sides are summed over the slots of the stack.
EpsilonSelection select_epsilon(const SpaceTimeField& u, const Mesh& mesh, const RegionTags& tags,
                                const CoefficientField& coeff);

/// Full Carleman weight system: theta(t) = [t(T-t)]^-4,
/// xi = theta exp(lambda (8|eta|_inf + eta)), sigma = theta exp(10 lambda |eta|_inf) - xi.
/// Evaluation is restricted to the window [delta, T-delta].
struct CarlemanWeights {
    SpatialWeight eta;
    double s = 0.0;
    double lambda = 0.0;
    double T = 0.0;
    double delta = 0.0;

    double theta(double t) const {
        const double q = t * (T - t);
        return 1.0 / (q * q * q * q);
    }
    double xi(double eta_val, double t) const {
        return theta(t) * std::exp(lambda * (8.0 * eta.eta_sup + eta_val));
    }
    double sigma(double eta_val, double t) const {
        return theta(t) * std::exp(10.0 * lambda * eta.eta_sup) - xi(eta_val, t);
    }
};

CarlemanWeights make_weights(const SpatialWeight& eta, double s, double lambda, double T,
                             double delta);

}  // namespace degctrl
