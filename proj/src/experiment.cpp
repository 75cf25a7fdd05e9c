#include "degctrl/experiment.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <thread>

#include "degctrl/errors.hpp"
#include "degctrl/fields.hpp"

namespace degctrl {

namespace fs = std::filesystem;

namespace {

// Work pool with deterministic collation: job i writes only slot i of its
// output; the caller assembles results in index order.
void parallel_for(int n, int threads, const std::function<void(int)>& job) {
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace

Workspace Workspace::build(const ExperimentConfig& cfg) {
    Workspace ws;
    ws.cfg = cfg;
    ws.mesh = build_graded_mesh(cfg.domain, cfg.mesh_h_target_length, cfg.mesh_grading_exponent);
    ws.tags = tag_regions(ws.mesh, cfg.omega, cfg.omega0, cfg.eps_length, cfg.eps0_length,
                          cfg.region_case());
    ws.system = make_system(ws.mesh, ws.tags, cfg.coefficients(), cfg.T_seconds, cfg.dt_seconds);
    return ws;
}

Vector config_z0(const Workspace& ws) {
    const auto& cfg = ws.cfg;
    if (cfg.z0_bump_center) {
        return interpolate(ws.mesh, gaussian_bump(cfg.domain, *cfg.z0_bump_center,
                                                  cfg.z0_bump_width_length, cfg.z0_bump_amp));
    }
    Rng rng(cfg.seed);
    return interpolate(ws.mesh, random_smooth_field(rng, cfg.domain, 4));
}

Vector config_target(const Workspace& ws) {
    const auto& cfg = ws.cfg;
    if (!cfg.target_bump_center) return Vector::Zero(ws.mesh.num_vertices());
    const Vector bump = interpolate(ws.mesh, gaussian_bump(cfg.domain, *cfg.target_bump_center,
                                                           cfg.target_bump_width_length,
                                                           cfg.target_bump_amp));
    if (cfg.target_kind == "bump") return bump;
    // controlled_endpoint: terminal state of a reference run driven by the
    // bump as a constant-in-time control, so the target is reachable.
    const System& sys = *ws.system;
    SpaceTimeField g(ws.mesh.num_vertices(), sys.steps, sys.dt);
    for (int n = 0; n < sys.steps; ++n) g.values.col(n) = bump;
    return solve_forward({&sys, config_z0(ws), g}).values.col(sys.steps);
}

void stage_mesh(Workspace& ws, const fs::path& out_dir, Manifest& manifest) {
    const fs::path mesh_file = out_dir / "mesh.txt";
    {
        std::ofstream f(mesh_file);
        write_mesh(f, ws.mesh, &ws.tags.element_mask);
    }
    manifest.record(mesh_file);

    CsvWriter csv({"vertices", "triangles", "free_nodes", "total_area", "min_diameter",
                   "max_diameter", "omega_elems", "omega0_elems"});
    double dmin = std::numeric_limits<double>::max(), dmax = 0.0;
    for (int t = 0; t < ws.mesh.num_triangles(); ++t) {
        dmin = std::min(dmin, ws.mesh.diameter(t));
        dmax = std::max(dmax, ws.mesh.diameter(t));
    }
    csv.add_row({static_cast<double>(ws.mesh.num_vertices()),
                 static_cast<double>(ws.mesh.num_triangles()),
                 static_cast<double>(ws.mesh.num_free()), ws.mesh.total_area(), dmin, dmax,
                 static_cast<double>(ws.tags.omega_elems.size()),
                 static_cast<double>(ws.tags.omega0_elems.size())});
    const fs::path stats = out_dir / "mesh_stats.csv";
    csv.write(stats);
    manifest.record(stats);

    // Assembled forms as coordinate lists, for cross-checks in external tools.
    const fs::path mass_coo = out_dir / "mass.coo.txt";
    {
        std::ofstream f(mass_coo);
        write_coordinate_list(f, assemble_mass(ws.mesh).full);
    }
    manifest.record(mass_coo);
    const fs::path stiff_coo = out_dir / "stiffness.coo.txt";
    {
        std::ofstream f(stiff_coo);
        write_coordinate_list(f, assemble_degenerate_stiffness(ws.mesh, ws.cfg.coefficients()).full);
    }
    manifest.record(stiff_coo);
}

void stage_solve(Workspace& ws, const fs::path& out_dir, Manifest& manifest) {
    const System& sys = *ws.system;
    const Vector z0 = config_z0(ws);
    const SpaceTimeField g(ws.mesh.num_vertices(), sys.steps, sys.dt);
    const SpaceTimeField z = solve_forward({&sys, z0, g});

    const fs::path traj = out_dir / "trajectory.txt";
    write_trajectory(traj, z);
    manifest.record(traj);

    const fs::path norms = out_dir / "norms.csv";
    write_norm_series(norms, sys, z);
    manifest.record(norms);

    const ForwardProblem fp{&sys, z0, g};
    const EnergyEstimate e = verify_energy_estimate(z, fp);
    CsvWriter csv({"lhs", "data_norm", "ratio"});
    csv.add_row({e.lhs, e.data_norm, e.ratio});
    const fs::path energy = out_dir / "energy.csv";
    csv.write(energy);
    manifest.record(energy);
}

void stage_verify_weights(Workspace& ws, const fs::path& out_dir, Manifest& manifest) {
    const bool interior = ws.tags.region_case == RegionCase::Interior;
    const CoefficientField coeff = ws.cfg.coefficients();
    const SpatialWeight w = interior ? build_eta_interior(ws.mesh, ws.tags, coeff)
                                     : build_eta_offcenter(ws.mesh, ws.tags, coeff);
    const WeightReport rep = verify_spatial_weight(ws.mesh, ws.tags, coeff, w);
    if (!rep.pass)
        throw WeightVerificationFailed("verify-weights: checks failed after construction");

    CsvWriter csv({"case_interior", "eps", "eta_sup", "c_star", "min_quadform",
                   "min_boundary_slope", "max_eta_on_eps", "max_grad_on_eps", "mu"});
    csv.add_row({interior ? 1.0 : 0.0, w.eps, w.eta_sup, w.c_star, rep.min_quadform,
                 rep.min_boundary_slope, rep.max_eta_on_eps, rep.max_grad_on_eps, w.mu});
    const fs::path report = out_dir / "weight_report.csv";
    csv.write(report);
    manifest.record(report);

    // Weight field in the trajectory format for plotting.
    SpaceTimeField eta_field(ws.mesh.num_vertices(), 0, 0.0);
    eta_field.values.col(0) = w.eta;
    const fs::path eta_file = out_dir / "eta.txt";
    write_trajectory(eta_file, eta_field);
    manifest.record(eta_file);
}

void stage_carleman_sweep(Workspace& ws, const fs::path& out_dir, Manifest& manifest) {
    const auto& cfg = ws.cfg;
    if (cfg.s_list.empty() || cfg.lambda_list.empty())
        throw ValidationError("carleman-sweep: config must provide s_list and lambda_list");
    const System& sys = *ws.system;
    const CoefficientField coeff = cfg.coefficients();

    Rng rng(cfg.seed);
    std::vector<Vector> samples;
    for (int i = 0; i < cfg.carleman_samples; ++i)
        samples.push_back(interpolate(ws.mesh, random_smooth_field(rng, cfg.domain, 3)));

    CsvWriter csv({"case", "s", "lambda", "eps", "delta", "lhs", "rhs", "ratio", "run_id"});
    const double delta = cfg.delta_or_default();

    if (ws.tags.region_case == RegionCase::Interior) {
        const SpatialWeight eta = build_eta_interior(ws.mesh, ws.tags, coeff);
        const SweepResult sweep =
            carleman_sweep_case1(sys, eta, samples, cfg.s_list, cfg.lambda_list, delta);
        for (const auto& row : sweep.rows)
            csv.add_row({1.0, row.s, row.lambda, row.eps, row.delta, row.lhs, row.rhs, row.ratio,
                         static_cast<double>(row.sample)});
        CsvWriter th({"found", "s_bar", "lambda_bar"});
        th.add_row({sweep.found ? 1.0 : 0.0, sweep.s_bar, sweep.lambda_bar});
        const fs::path thf = out_dir / "carleman_thresholds.csv";
        th.write(thf);
        manifest.record(thf);
    } else {
        const SpatialWeight eta = build_eta_offcenter(ws.mesh, ws.tags, coeff);
        std::vector<std::pair<double, double>> grid;
        for (double lambda : cfg.lambda_list)
            for (double s : cfg.s_list) grid.emplace_back(lambda, s);
        std::vector<Case2Battery> batteries(grid.size());
        parallel_for(static_cast<int>(grid.size()), cfg.threads, [&](int i) {
            batteries[i] =
                carleman_battery_case2(sys, eta, samples, grid[i].second, grid[i].first, delta);
        });
        for (const auto& battery : batteries)
            for (const auto& row : battery.rows)
                csv.add_row({2.0, row.s, row.lambda, row.eps, row.delta, row.lhs, row.rhs,
                             row.ratio, static_cast<double>(row.sample)});
    }
    const fs::path sweep_file = out_dir / "carleman_sweep.csv";
    csv.write(sweep_file);
    manifest.record(sweep_file);
}

void stage_control(Workspace& ws, const fs::path& out_dir, Manifest& manifest) {
    const auto& cfg = ws.cfg;
    if (cfg.penalty_list.empty())
        throw ValidationError("control: config must provide penalty_list");
    const System& sys = *ws.system;
    const Vector z0 = config_z0(ws);

    CsvWriter csv({"case", "penalty", "cg_iters", "terminal_norm", "control_cost",
                   "identity_residual"});
    const bool interior = ws.tags.region_case == RegionCase::Interior;
    const Vector target = config_target(ws);

    for (size_t i = 0; i < cfg.penalty_list.size(); ++i) {
        const double pen = cfg.penalty_list[i];
        const ControlResult res = interior ? hum_null_control(sys, z0, pen)
                                           : approximate_control(sys, z0, target, pen);
        csv.add_row({interior ? 1.0 : 2.0, pen, static_cast<double>(res.cg_iterations),
                     res.terminal_norm, res.control_cost, res.identity_residual});
        if (i + 1 == cfg.penalty_list.size()) {
            const fs::path gfile = out_dir / "control.txt";
            write_trajectory(gfile, res.g);
            manifest.record(gfile);
        }
    }
    const fs::path summary = out_dir / "control_summary.csv";
    csv.write(summary);
    manifest.record(summary);
}

void stage_observability(Workspace& ws, const fs::path& out_dir, Manifest& manifest) {
    const auto& cfg = ws.cfg;
    const System& sys = *ws.system;

    Rng rng(cfg.seed + 17);
    std::vector<Vector> samples;
    for (int i = 0; i < cfg.observability_samples; ++i)
        samples.push_back(interpolate(ws.mesh, random_smooth_field(rng, cfg.domain, 3)));

    const ObservabilityResult obs = observability_ratio(sys, samples);
    CsvWriter csv({"sample", "ratio"});
    for (size_t i = 0; i < obs.ratios.size(); ++i)
        csv.add_row({static_cast<double>(i), obs.ratios[i]});
    const fs::path ratios = out_dir / "observability.csv";
    csv.write(ratios);
    manifest.record(ratios);

    CsvWriter mx({"max_ratio"});
    mx.add_row({obs.max_ratio});
    const fs::path mxf = out_dir / "observability_max.csv";
    mx.write(mxf);
    manifest.record(mxf);
}

void stage_sanity(Workspace& ws, const fs::path& out_dir, Manifest& manifest) {
    // Eigenfunction fixture: z = exp(-2t) cos(x) cos(y) on (-pi/2, pi/2)^2.
    const auto& cfg = ws.cfg;
    if (cfg.case_name != "sanity")
        throw ValidationError("sanity stage: config case must be sanity");

    const ScalarField ic = [](const Vec2& p) { return std::cos(p.x) * std::cos(p.y); };
    const double T = cfg.T_seconds;
    const ScalarField exact = [T](const Vec2& p) {
        return std::exp(-2.0 * T) * std::cos(p.x) * std::cos(p.y);
    };

    CsvWriter csv({"refinement", "h_target", "dt", "l2_error"});
    Mesh mesh = ws.mesh;
    for (int level = 0; level < 3; ++level) {
        RegionTags tags = tag_regions(mesh, cfg.omega, cfg.omega0, cfg.eps_length,
                                      cfg.eps0_length, cfg.region_case());
        auto sys = make_system(mesh, tags, cfg.coefficients(), cfg.T_seconds, cfg.dt_seconds);
        const Vector z0 = interpolate(mesh, ic);
        const SpaceTimeField g(mesh.num_vertices(), sys->steps, sys->dt);
        const SpaceTimeField z = solve_forward({sys.get(), z0, g});
        const double err = l2_error(mesh, z.values.col(sys->steps), exact);
        double dmax = 0.0;
        for (int t = 0; t < mesh.num_triangles(); ++t) dmax = std::max(dmax, mesh.diameter(t));
        csv.add_row({static_cast<double>(level), dmax, cfg.dt_seconds, err});
        if (level < 2) mesh = refine_uniform(mesh);
    }
    const fs::path conv = out_dir / "sanity_convergence.csv";
    csv.write(conv);
    manifest.record(conv);
}

void run_single_stage(const ExperimentConfig& cfg, const std::string& stage,
                      const fs::path& out_dir) {
    fs::create_directories(out_dir);
    Manifest manifest;
    manifest.note("stage", stage);
    manifest.note("seed", std::to_string(cfg.seed));
    Workspace ws = Workspace::build(cfg);
    if (stage == "mesh")
        stage_mesh(ws, out_dir, manifest);
    else if (stage == "solve")
        stage_solve(ws, out_dir, manifest);
    else if (stage == "verify-weights")
        stage_verify_weights(ws, out_dir, manifest);
    else if (stage == "carleman-sweep")
        stage_carleman_sweep(ws, out_dir, manifest);
    else if (stage == "control")
        stage_control(ws, out_dir, manifest);
    else if (stage == "observability")
        stage_observability(ws, out_dir, manifest);
    else if (stage == "sanity")
        stage_sanity(ws, out_dir, manifest);
    else
        throw ValidationError("unknown stage '" + stage + "'");
    manifest.write(out_dir / "manifest.txt");
}

void run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir) {
    if (cfg.stages.empty())
        throw ValidationError("run: config provides no stages");
    fs::create_directories(out_dir);
    Manifest manifest;
    manifest.note("seed", std::to_string(cfg.seed));
    Workspace ws = Workspace::build(cfg);
    for (const auto& stage : cfg.stages) {
        if (stage == "mesh")
            stage_mesh(ws, out_dir, manifest);
        else if (stage == "solve")
            stage_solve(ws, out_dir, manifest);
        else if (stage == "verify-weights")
            stage_verify_weights(ws, out_dir, manifest);
        else if (stage == "carleman-sweep")
            stage_carleman_sweep(ws, out_dir, manifest);
        else if (stage == "control")
            stage_control(ws, out_dir, manifest);
        else if (stage == "observability")
            stage_observability(ws, out_dir, manifest);
        else if (stage == "sanity")
            stage_sanity(ws, out_dir, manifest);
        else
            throw ValidationError("run: unknown stage '" + stage + "' in config");
    }
    manifest.write(out_dir / "manifest.txt");
}

}  // namespace degctrl
