#include <CLI11.hpp>
#include <iostream>

#include "degctrl/errors.hpp"
#include "degctrl/experiment.hpp"

namespace {

struct CommonOpts {
    std::string config;
    std::string out_dir;
    std::string seed;
    int threads = 0;
};

void attach_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config, "experiment config file")->required();
    cmd->add_option("--out-dir", opts.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", opts.seed, "seed override");
    cmd->add_option("--threads", opts.threads, "worker threads (overrides config)");
}

degctrl::ExperimentConfig load(const CommonOpts& opts) {
    degctrl::ExperimentConfig cfg = degctrl::parse_config(opts.config);
    if (!opts.seed.empty()) cfg.seed = std::stoull(opts.seed);
    if (opts.threads > 0) cfg.threads = opts.threads;
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"degctrl: degenerate parabolic controllability experiments"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string stage;
    for (const char* name : {"mesh", "solve", "carleman-sweep", "control", "observability",
                             "verify-weights", "sanity", "run"}) {
        CLI::App* cmd = app.add_subcommand(name);
        attach_common(cmd, opts);
        cmd->callback([name, &stage] { stage = name; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        const degctrl::ExperimentConfig cfg = load(opts);
        if (stage == "run")
            degctrl::run_experiment(cfg, cfg.out_dir);
        else
            degctrl::run_single_stage(cfg, stage, cfg.out_dir);
    } catch (const degctrl::WeightVerificationFailed& e) {
        std::cerr << "weight verification failure: " << e.what() << "\n";
        return 4;
    } catch (const degctrl::NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const degctrl::NoEpsilonFound& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const degctrl::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
