// Acceptance suite: one pass/fail line per criterion, every tolerance pinned
// here in code. Exit code 0 iff all criteria pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "degctrl/carleman.hpp"
#include "degctrl/config.hpp"
#include "degctrl/control.hpp"
#include "degctrl/experiment.hpp"
#include "degctrl/fields.hpp"
#include "degctrl/io.hpp"

using namespace degctrl;
namespace fs = std::filesystem;

namespace {

fs::path g_configs = "configs";
fs::path g_out;

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int k = 1; k < n; ++k) acc += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), pattern, args...);
    return buf;
}

// ---------------------------------------------------------------- criterion 1
Outcome criterion_sanity_convergence() {
    const double half_pi = M_PI / 2.0;
    const RectDomain dom{-half_pi, half_pi, -half_pi, half_pi};
    const ScalarField ic = [](const Vec2& p) { return std::cos(p.x) * std::cos(p.y); };
    const double T = 0.5;
    const ScalarField exact = [T](const Vec2& p) {
        return std::exp(-2.0 * T) * std::cos(p.x) * std::cos(p.y);
    };
    auto run = [&](double h, double dt) {
        const Mesh mesh = build_graded_mesh(dom, h, 1.0);
        const RegionTags tags = tag_regions(mesh, BallSpec{{0.2, 0.0}, 0.2}, BallSpec{{0, 0}, 1.2},
                                            0.1, 1.3, RegionCase::Interior);
        auto sys = make_system(mesh, tags, CoefficientField::sanity(), T, dt);
        const SpaceTimeField g(mesh.num_vertices(), sys->steps, sys->dt);
        const SpaceTimeField z = solve_forward({sys.get(), interpolate(mesh, ic), g});
        return l2_error(mesh, z.values.col(sys->steps), exact);
    };

    std::vector<double> hs{half_pi / 8.0, half_pi / 16.0, half_pi / 32.0};
    std::vector<double> eh;
    for (double h : hs) eh.push_back(run(h, 1e-4));
    const double spatial_order = ls_slope(hs, eh);

    std::vector<double> dts{0.05, 0.025, 0.0125};
    std::vector<double> et;
    for (double dt : dts) et.push_back(run(half_pi / 32.0, dt));
    const double temporal_order = ls_slope(dts, et);

    Outcome out;
    out.pass = spatial_order >= 1.9 && temporal_order >= 0.9;
    out.detail = fmt("spatial order %.3f (>= 1.9), temporal order %.3f (>= 0.9)", spatial_order,
                     temporal_order);
    return out;
}

// ------------------------------------------------------- shared suite for 2+3
struct RandomInstance {
    ScalarField z0_field;
    ScalarField g_field;
    double g_ramp = 0.0;
    ScalarField wT_field;
};

std::vector<RandomInstance> instance_suite(const Domain& domain, int count, std::uint64_t seed) {
    std::vector<RandomInstance> suite;
    Rng rng(seed);
    for (int i = 0; i < count; ++i) {
        RandomInstance inst;
        inst.z0_field = random_smooth_field(rng, domain, 3);
        inst.g_field = random_smooth_field(rng, domain, 2);
        inst.g_ramp = rng.uniform(-1.0, 1.0);
        inst.wT_field = random_smooth_field(rng, domain, 3);
        suite.push_back(std::move(inst));
    }
    return suite;
}

SpaceTimeField control_stack(const Mesh& mesh, const System& sys, const RandomInstance& inst) {
    SpaceTimeField g(mesh.num_vertices(), sys.steps, sys.dt);
    const Vector base = interpolate(mesh, inst.g_field);
    for (int n = 0; n < sys.steps; ++n)
        g.values.col(n) = base * (1.0 + inst.g_ramp * n / sys.steps);
    return g;
}

struct SuiteResult {
    double max_duality = 0.0;
    double max_energy_ratio = 0.0;
};

SuiteResult run_suite(const Mesh& mesh, const std::vector<RandomInstance>& suite) {
    const std::array<double, 3> alphas{0.5, 1.0, 1.5};
    SuiteResult res;
    for (size_t a = 0; a < alphas.size(); ++a) {
        const RegionTags tags = tag_regions(mesh, BallSpec{{0.2, 0.0}, 0.1}, BallSpec{{0, 0}, 0.5},
                                            0.05, 0.9, RegionCase::Interior);
        auto sys = make_system(mesh, tags, CoefficientField::isotropic(alphas[a]), 0.3, 0.03);
        for (size_t i = a; i < suite.size(); i += alphas.size()) {
            const RandomInstance& inst = suite[i];
            const ForwardProblem fp{sys.get(), interpolate(mesh, inst.z0_field),
                                    control_stack(mesh, *sys, inst)};
            const SpaceTimeField z = solve_forward(fp);
            const SpaceTimeField w = solve_adjoint(
                {sys.get(), interpolate(mesh, inst.wT_field),
                 SpaceTimeField(mesh.num_vertices(), sys->steps, sys->dt)});
            res.max_duality = std::max(res.max_duality, duality_residual(fp, z, w).relative);
            res.max_energy_ratio =
                std::max(res.max_energy_ratio, verify_energy_estimate(z, fp).ratio);
        }
    }
    return res;
}

Outcome criterion_duality(const SuiteResult& coarse) {
    Outcome out;
    out.pass = coarse.max_duality <= 1e-10;
    out.detail = fmt("max relative duality residual %.3e (<= 1e-10) over 50 instances",
                     coarse.max_duality);
    return out;
}

Outcome criterion_energy(const SuiteResult& coarse, const SuiteResult& fine) {
    const double rel_change =
        std::abs(fine.max_energy_ratio - coarse.max_energy_ratio) / coarse.max_energy_ratio;
    Outcome out;
    out.pass = std::isfinite(coarse.max_energy_ratio) && coarse.max_energy_ratio > 0.0 &&
               rel_change <= 0.2;
    out.detail = fmt("empirical ratio bound %.4f, refined %.4f, change %.1f%% (<= 20%%)",
                     coarse.max_energy_ratio, fine.max_energy_ratio, 100.0 * rel_change);
    return out;
}

// ---------------------------------------------------------------- criterion 4
Outcome criterion_hardy() {
    // randomized suite
    const Mesh mesh = build_graded_mesh(RectDomain{-1, 1, -1, 1}, 0.1, 2.0);
    const CoefficientField coeff = CoefficientField::isotropic(1.0);
    const DiscreteForm k = assemble_degenerate_stiffness(mesh, coeff);
    Rng rng(404);
    double sup = 0.0;
    bool finite = true;
    for (int i = 0; i < 100; ++i) {
        const Vector v = interpolate(mesh, random_smooth_field(rng, *mesh.domain, 3));
        const HardyResult hr = hardy_check(v, coeff, mesh, k);
        finite = finite && std::isfinite(hr.ratio);
        sup = std::max(sup, hr.ratio);
    }

    // analytic fixture on the unit disk, z = 1 - |x|^2, alpha = 1
    const Mesh disk = build_graded_mesh(DiskDomain{{0, 0}, 1.0}, 0.0075, 2.0);
    const DiscreteForm kd = assemble_degenerate_stiffness(disk, coeff);
    const Vector z = interpolate(disk, [](const Vec2& p) {
        const double q = 1.0 - p.squared_norm();
        return q > 0.0 ? q : 0.0;
    });
    const HardyResult hr = hardy_check(z, coeff, disk, kd);
    const double lhs_oracle = std::sqrt(2.0 * M_PI * simpson(
        [](double r) { const double q = 1.0 - r * r; return q * q; }, 0.0, 1.0, 20000));
    const double rhs_oracle = std::sqrt(2.0 * M_PI * simpson(
        [](double r) { return 4.0 * r * r * r * r; }, 0.0, 1.0, 20000));
    const double lhs_err = std::abs(hr.lhs - lhs_oracle) / lhs_oracle;
    const double rhs_err = std::abs(hr.rhs - rhs_oracle) / rhs_oracle;

    Outcome out;
    out.pass = finite && lhs_err <= 1e-4 && rhs_err <= 1e-4;
    out.detail = fmt("suite sup ratio %.4f (finite), fixture lhs err %.2e rhs err %.2e (<= 1e-4)",
                     sup, lhs_err, rhs_err);
    return out;
}

// ---------------------------------------------------------------- criterion 5
Outcome criterion_weights() {
    std::string detail;
    bool pass = true;
    for (const char* name : {"case1_null.cfg", "case2_approx.cfg"}) {
        const ExperimentConfig cfg = parse_config(g_configs / name);
        Workspace ws = Workspace::build(cfg);
        const CoefficientField coeff = cfg.coefficients();
        const bool interior = ws.tags.region_case == RegionCase::Interior;
        try {
            const SpatialWeight w = interior ? build_eta_interior(ws.mesh, ws.tags, coeff)
                                             : build_eta_offcenter(ws.mesh, ws.tags, coeff);
            const WeightReport rep = verify_spatial_weight(ws.mesh, ws.tags, coeff, w);
            pass = pass && rep.pass && rep.min_quadform > 0.0 && rep.min_boundary_slope > 0.0;
            detail += fmt("%s: min quadform %.3e, min -deta/dn %.3e; ",
                          interior ? "interior" : "offcenter", rep.min_quadform,
                          rep.min_boundary_slope);
        } catch (const std::exception& e) {
            pass = false;
            detail += std::string(name) + " failed: " + e.what() + "; ";
        }
    }
    return {pass, detail};
}

// ---------------------------------------------------------------- criterion 6
Outcome criterion_carleman_case1() {
    const ExperimentConfig cfg = parse_config(g_configs / "case1_null.cfg");
    Workspace ws = Workspace::build(cfg);
    const CoefficientField coeff = cfg.coefficients();
    const double delta = cfg.delta_or_default();

    Rng rng(606);
    std::vector<ScalarField> fields;
    for (int i = 0; i < 20; ++i) fields.push_back(random_smooth_field(rng, cfg.domain, 3));
    auto samples_on = [&](const Mesh& mesh) {
        std::vector<Vector> s;
        for (const auto& f : fields) s.push_back(interpolate(mesh, f));
        return s;
    };

    std::vector<double> lambda_list{0.4, 0.6, 0.9};
    std::vector<double> s_list;
    for (double s = 1e-9; s <= 5e-5; s *= 1.5) s_list.push_back(s);

    const SpatialWeight eta = build_eta_interior(ws.mesh, ws.tags, coeff);
    const SweepResult coarse = carleman_sweep_case1(*ws.system, eta, samples_on(ws.mesh), s_list,
                                                    lambda_list, delta, true);
    if (!coarse.found) return {false, "no threshold found on the coarse grid"};

    // all 20 samples at doubled thresholds
    const CarlemanWeights doubled =
        make_weights(eta, 2.0 * coarse.s_bar, 2.0 * coarse.lambda_bar, ws.system->T, delta);
    const SpaceTimeField no_source(ws.mesh.num_vertices(), ws.system->steps, ws.system->dt);
    double worst = 0.0;
    for (const auto& wT : samples_on(ws.mesh)) {
        const SpaceTimeField w = solve_adjoint({ws.system.get(), wT, no_source});
        worst = std::max(worst,
                         evaluate_carleman_case1(*ws.system, w, no_source, doubled, ws.tags).ratio);
    }

    // one uniform refinement; search near the coarse threshold
    Mesh fine_mesh = refine_uniform(ws.mesh);
    RegionTags fine_tags = tag_regions(fine_mesh, cfg.omega, cfg.omega0, cfg.eps_length,
                                       cfg.eps0_length, cfg.region_case());
    auto fine_sys = make_system(fine_mesh, fine_tags, coeff, cfg.T_seconds, cfg.dt_seconds);
    const SpatialWeight fine_eta = build_eta_interior(fine_mesh, fine_tags, coeff);
    std::vector<double> fine_s;
    for (double s = coarse.s_bar / 8.0; s <= coarse.s_bar * 8.0; s *= 1.5) fine_s.push_back(s);
    const SweepResult fine = carleman_sweep_case1(*fine_sys, fine_eta, samples_on(fine_mesh),
                                                  fine_s, lambda_list, delta, true);
    if (!fine.found) return {false, "no threshold found near the coarse one after refinement"};

    const double s_change = fine.s_bar / coarse.s_bar;
    const double l_change = fine.lambda_bar / coarse.lambda_bar;
    Outcome out;
    out.pass = worst <= 1.0 && s_change < 2.0 && s_change > 0.5 && l_change < 2.0 &&
               l_change > 0.5;
    out.detail = fmt(
        "thresholds (s=%.3e, lambda=%.2f); max ratio at doubled thresholds %.4f (<= 1); "
        "refinement change s x%.2f lambda x%.2f (< 2)",
        coarse.s_bar, coarse.lambda_bar, worst, s_change, l_change);
    return out;
}

// ---------------------------------------------------------------- criterion 7
Outcome criterion_null_control() {
    const ExperimentConfig cfg = parse_config(g_configs / "case1_null.cfg");
    Workspace ws = Workspace::build(cfg);
    const Vector z0 = config_z0(ws);
    const double z0_norm = std::sqrt(ws.system->dot_mass(z0, z0));
    const ControlResult res = hum_null_control(*ws.system, z0, 1e-6);
    const int cap =
        static_cast<int>(10.0 * std::sqrt(static_cast<double>(ws.mesh.num_free()))) + 1;
    Outcome out;
    out.pass = res.terminal_norm <= 1e-3 * z0_norm && res.identity_residual <= 1e-8 * z0_norm &&
               res.cg_iterations <= cap;
    out.detail = fmt(
        "terminal %.3e (<= %.3e), identity residual %.3e (<= %.3e), cg %d (cap %d)",
        res.terminal_norm, 1e-3 * z0_norm, res.identity_residual, 1e-8 * z0_norm,
        res.cg_iterations, cap);
    return out;
}

// ---------------------------------------------------------------- criterion 8
Outcome criterion_approximate_control() {
    const ExperimentConfig cfg = parse_config(g_configs / "case2_approx.cfg");
    Workspace ws = Workspace::build(cfg);
    const Vector z0 = config_z0(ws);
    const Vector target = config_target(ws);
    const SpaceTimeField no_g(ws.mesh.num_vertices(), ws.system->steps, ws.system->dt);
    const Vector gap =
        target - solve_forward({ws.system.get(), z0, no_g}).values.col(ws.system->steps);
    const double gap_norm = std::sqrt(ws.system->dot_mass(gap, gap));

    bool monotone = true;
    double prev = std::numeric_limits<double>::max();
    double final_rel = 0.0;
    std::string seq;
    for (double pen : {1e-2, 1e-3, 1e-4}) {
        const ControlResult res = approximate_control(*ws.system, z0, target, pen);
        monotone = monotone && res.terminal_norm <= prev * (1.0 + 1e-9);
        prev = res.terminal_norm;
        final_rel = res.terminal_norm / gap_norm;
        seq += fmt("%.4f ", final_rel);
    }
    Outcome out;
    out.pass = monotone && final_rel <= 0.1;
    out.detail = fmt("relative misses [%s] monotone=%d, final %.4f (<= 0.1)", seq.c_str(),
                     monotone ? 1 : 0, final_rel);
    return out;
}

// ---------------------------------------------------------------- criterion 9
Outcome criterion_observability_contrast() {
    CsvWriter csv({"case", "level", "sample", "ratio"});

    // interior: max ratio stable within +-50% under refinement
    const ExperimentConfig cfg1 = parse_config(g_configs / "case1_null.cfg");
    Workspace ws1 = Workspace::build(cfg1);
    Rng rng(909);
    std::vector<ScalarField> fields;
    for (int i = 0; i < 50; ++i) fields.push_back(random_smooth_field(rng, cfg1.domain, 3));
    auto ratios_on = [&](const Mesh& mesh, const System& sys) {
        std::vector<Vector> samples;
        for (const auto& f : fields) samples.push_back(interpolate(mesh, f));
        return observability_ratio(sys, samples);
    };
    const ObservabilityResult coarse = ratios_on(ws1.mesh, *ws1.system);
    for (size_t i = 0; i < coarse.ratios.size(); ++i)
        csv.add_row({1.0, 0.0, static_cast<double>(i), coarse.ratios[i]});

    Mesh fine_mesh = refine_uniform(ws1.mesh);
    RegionTags fine_tags = tag_regions(fine_mesh, cfg1.omega, cfg1.omega0, cfg1.eps_length,
                                       cfg1.eps0_length, cfg1.region_case());
    auto fine_sys = make_system(fine_mesh, fine_tags, cfg1.coefficients(), cfg1.T_seconds,
                                cfg1.dt_seconds);
    const ObservabilityResult fine = ratios_on(fine_mesh, *fine_sys);
    for (size_t i = 0; i < fine.ratios.size(); ++i)
        csv.add_row({1.0, 1.0, static_cast<double>(i), fine.ratios[i]});
    const double change = std::abs(fine.max_ratio - coarse.max_ratio) / coarse.max_ratio;

    // offcenter: concentration at the origin inflates the ratio
    const ExperimentConfig cfg2 = parse_config(g_configs / "case2_approx.cfg");
    Workspace ws2 = Workspace::build(cfg2);
    std::vector<double> level_ratio;
    const std::array<double, 2> widths{0.3, 0.05};
    for (size_t lvl = 0; lvl < widths.size(); ++lvl) {
        Vector wT = interpolate(ws2.mesh, gaussian_bump(cfg2.domain, {0, 0}, widths[lvl], 1.0));
        wT /= std::sqrt(ws2.system->dot_mass(wT, wT));
        const ObservabilityResult r = observability_ratio(*ws2.system, {wT});
        level_ratio.push_back(r.ratios[0]);
        csv.add_row({2.0, static_cast<double>(lvl), 0.0, r.ratios[0]});
    }
    csv.write(g_out / "observability_contrast.csv");

    const double growth = level_ratio[1] / level_ratio[0];
    Outcome out;
    out.pass = change <= 0.5 && growth >= 2.0;
    out.detail = fmt(
        "interior max ratio %.4f -> %.4f (change %.1f%% <= 50%%); offcenter growth x%.2f (>= 2)",
        coarse.max_ratio, fine.max_ratio, 100.0 * change, growth);
    return out;
}

// --------------------------------------------------------------- criterion 10
Outcome criterion_unique_continuation() {
    int flags = 0;
    for (const char* name : {"case1_null.cfg", "case2_approx.cfg"}) {
        const ExperimentConfig cfg = parse_config(g_configs / name);
        Workspace ws = Workspace::build(cfg);
        Rng rng(1010);
        for (int i = 0; i < 100; ++i) {
            const Vector wT = interpolate(ws.mesh, random_smooth_field(rng, cfg.domain, 3));
            if (unique_continuation_probe(*ws.system, wT, 1e-8).flagged) ++flags;
        }
    }
    Outcome out;
    out.pass = flags == 0;
    out.detail = fmt("%d flags over 100 samples per case at threshold 1e-8 (expect 0)", flags);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i];
        if (flag == "--configs") g_configs = argv[i + 1];
        if (flag == "--out") g_out = argv[i + 1];
    }
    if (g_out.empty()) g_out = fs::temp_directory_path() / "degctrl_acceptance";
    fs::create_directories(g_out);

    struct Entry {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };

    SuiteResult coarse_suite, fine_suite;
    {
        const Mesh mesh = build_graded_mesh(RectDomain{-1, 1, -1, 1}, 0.12, 2.0);
        const auto suite = instance_suite(RectDomain{-1, 1, -1, 1}, 50, 202);
        coarse_suite = run_suite(mesh, suite);
        fine_suite = run_suite(refine_uniform(mesh), suite);
    }

    const std::vector<Entry> entries{
        {1, "sanity convergence", criterion_sanity_convergence},
        {2, "discrete duality", [&] { return criterion_duality(coarse_suite); }},
        {3, "energy estimate", [&] { return criterion_energy(coarse_suite, fine_suite); }},
        {4, "hardy inequality", criterion_hardy},
        {5, "weight verification", criterion_weights},
        {6, "carleman case 1 thresholds", criterion_carleman_case1},
        {7, "null control", criterion_null_control},
        {8, "approximate control", criterion_approximate_control},
        {9, "observability contrast", criterion_observability_contrast},
        {10, "unique continuation probe", criterion_unique_continuation},
    };

    int failures = 0;
    for (const auto& e : entries) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = e.run();
        } catch (const std::exception& ex) {
            out.pass = false;
            out.detail = std::string("exception: ") + ex.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %2d (%s): %s [%.1fs]\n", out.pass ? "PASS" : "FAIL", e.id,
                    e.name, out.detail.c_str(), secs);
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    if (failures) std::printf("%d criteria FAILED\n", failures);
    return failures == 0 ? 0 : 1;
}
