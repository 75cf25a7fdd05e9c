#pragma once

#include <filesystem>
#include <memory>

#include "degctrl/carleman.hpp"
#include "degctrl/config.hpp"
#include "degctrl/control.hpp"
#include "degctrl/io.hpp"
#include "degctrl/weights.hpp"

namespace degctrl {

/// Mesh, tags, and assembled system built once from a config and shared by
/// the pipeline stages.
struct Workspace {
    ExperimentConfig cfg;
    Mesh mesh;
    RegionTags tags;
    std::unique_ptr<System> system;

    static Workspace build(const ExperimentConfig& cfg);
};

/// Pipeline stages; each writes its artifacts into out_dir and records them
/// in the manifest. Stage names match the CLI subcommands.
void stage_mesh(Workspace& ws, const std::filesystem::path& out_dir, Manifest& manifest);
void stage_solve(Workspace& ws, const std::filesystem::path& out_dir, Manifest& manifest);
void stage_verify_weights(Workspace& ws, const std::filesystem::path& out_dir, Manifest& manifest);
void stage_carleman_sweep(Workspace& ws, const std::filesystem::path& out_dir, Manifest& manifest);
void stage_control(Workspace& ws, const std::filesystem::path& out_dir, Manifest& manifest);
void stage_observability(Workspace& ws, const std::filesystem::path& out_dir, Manifest& manifest);
/// Sanity-mode convergence study (alpha = 0 eigenfunction fixture).
void stage_sanity(Workspace& ws, const std::filesystem::path& out_dir, Manifest& manifest);

/// Runs every stage listed in cfg.stages and writes the manifest. Returns the
/// process exit code contract: throws instead of returning nonzero; the CLI
/// maps exception types to exit codes.
void run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Runs a single named stage (the one-subcommand entry points).
void run_single_stage(const ExperimentConfig& cfg, const std::string& stage,
                      const std::filesystem::path& out_dir);

/// Initial state / target fields derived from the config.
Vector config_z0(const Workspace& ws);
Vector config_target(const Workspace& ws);

}  // namespace degctrl
