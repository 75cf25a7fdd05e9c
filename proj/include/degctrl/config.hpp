#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "degctrl/forms.hpp"
#include "degctrl/geometry.hpp"
#include "degctrl/regions.hpp"

namespace degctrl {

/// Declarative experiment description parsed from key=value text. Keys carry
/// units in their names; unknown keys are rejected; cross-field constraints
/// of the underlying modules are re-validated at load.
struct ExperimentConfig {
    // experiment
    std::string case_name;                 // interior | offcenter | sanity
    std::vector<std::string> stages;       // subset of the run pipeline
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    int threads = 1;

    // domain + mesh
    Domain domain{RectDomain{-1, 1, -1, 1}};
    double mesh_h_target_length = 0.1;
    double mesh_grading_exponent = 1.0;

    // coefficients
    double alpha = 1.0;
    std::string coeff_kind = "identity";   // identity | constant | radial_mix
    SymMat2 coeff_matrix = SymMat2::identity();

    // regions
    RegionSpec omega{BallSpec{{0, 0}, 0.1}};
    RegionSpec omega0{BallSpec{{0, 0}, 0.2}};
    double eps_length = 0.0;
    double eps0_length = 0.0;

    // time
    double T_seconds = 0.0;
    double dt_seconds = 0.0;
    std::optional<double> delta_seconds;   // defaults to 2*dt

    // carleman sweep
    std::vector<double> s_list;
    std::vector<double> lambda_list;
    int carleman_samples = 20;

    // control
    std::vector<double> penalty_list;
    std::optional<Vec2> z0_bump_center;
    double z0_bump_width_length = 0.25;
    double z0_bump_amp = 1.0;
    // target = bump: interpolate the bump directly.
    // target = controlled_endpoint: run the forward problem with the bump as
    // a fixed-in-time reference control and take its terminal state, so the
    // target is reachable by construction.
    std::string target_kind = "bump";
    std::optional<Vec2> target_bump_center;
    double target_bump_width_length = 0.25;
    double target_bump_amp = 0.2;
    double control_terminal_bound_rel = 1e-3;

    // observability
    int observability_samples = 50;

    RegionCase region_case() const;
    CoefficientField coefficients() const;
    double delta_or_default() const { return delta_seconds ? *delta_seconds : 2.0 * dt_seconds; }
};

ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text);

}  // namespace degctrl
