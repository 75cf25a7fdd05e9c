#pragma once

#include <vector>

#include "degctrl/evolve.hpp"
#include "degctrl/weights.hpp"

namespace degctrl {

/// Both sides of a Carleman inequality evaluated on one adjoint trajectory,
/// with every paper constant set to 1. The damped terms act on the
/// transformed field u = exp(-s sigma) w; the control-region term on the
/// right keeps the raw solution w, which is the form the observability
/// argument consumes. All integrals run over the window [delta, T-delta].
struct CarlemanSides {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;       // lhs/rhs; 0 when both vanish

    double term_time = 0.0;      // s^-1 int xi^-1 |u_t|^2
    double term_div = 0.0;       // s^-1 int xi^-1 |Div(|x|^a A grad u)|^2
    double term_state = 0.0;     // s^3 l^4 int xi^3 u^2
    double term_grad_eta = 0.0;  // s l^2 int xi | |x|^a A grad(eta).grad(u) |^2
    double term_grad_full = 0.0; // s l^2 int xi |x|^a A grad(u).grad(u)   (case 2 only)
    double rhs_source = 0.0;     // || exp(-s sigma) f ||^2
    double rhs_omega0 = 0.0;     // s^3 l^4 int_{omega0} xi^3 w^2
    double eps_used = 0.0;       // case 2: the per-solution epsilon
};

/// Interior-case inequality. w must solve the adjoint problem with source f
/// on the same discretization; cw must carry an interior-case weight.
CarlemanSides evaluate_carleman_case1(const System& sys, const SpaceTimeField& w,
                                      const SpaceTimeField& f, const CarlemanWeights& cw,
                                      const RegionTags& tags);

/// Offcenter-case inequality with the extra full-gradient term. The epsilon
/// entering the weight is re-selected per solution from u = exp(-s sigma) w,
/// and the weight is rebuilt with it before the integrals are evaluated.
CarlemanSides evaluate_carleman_case2(const System& sys, const SpaceTimeField& w,
                                      const SpaceTimeField& f, const CarlemanWeights& cw,
                                      const RegionTags& tags);

struct SweepRow {
    int sample = 0;
    double s = 0.0;
    double lambda = 0.0;
    double eps = 0.0;
    double delta = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    bool found = false;
    double s_bar = 0.0;       // smallest grid s at lambda_bar with max ratio <= 1
    double lambda_bar = 0.0;  // smallest grid lambda admitting such an s
};

/// Evaluates the case-1 ratio over a grid of (s, lambda) for a battery of
/// f = 0 adjoint samples and locates the empirical thresholds: the smallest
/// grid lambda admitting an s with max-over-samples ratio <= 1, and the
/// smallest such s. With stop_at_threshold the grid walk ends there.
SweepResult carleman_sweep_case1(const System& sys, const SpatialWeight& eta,
                                 const std::vector<Vector>& terminal_samples,
                                 const std::vector<double>& s_list,
                                 const std::vector<double>& lambda_list, double delta,
                                 bool stop_at_threshold = false);

/// Case-2 per-solution ratios at fixed (s, lambda); records the spread
/// max/min of the ratios as the signature of the solution-dependent constant.
struct Case2Battery {
    std::vector<SweepRow> rows;
    double ratio_min = 0.0;
    double ratio_max = 0.0;
    double spread = 0.0;
};

Case2Battery carleman_battery_case2(const System& sys, const SpatialWeight& eta,
                                    const std::vector<Vector>& terminal_samples, double s,
                                    double lambda, double delta);

}  // namespace degctrl
