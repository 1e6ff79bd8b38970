#include "isac/experiment.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Dual-function MIMO transmit covariance design and evaluation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string design;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int trials = 0;
    bool trials_set = false;

    const std::vector<std::string> commands = {"feasibility",      "bounds",
                                               "beampattern",      "solve-optimal",
                                               "solve-suboptimal", "benchmark",
                                               "montecarlo",       "sweep"};
    for (const auto& name : commands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON experiment configuration");
        sub->add_option("--out", out_path, "output table path");
        sub->add_option("--seed", seed, "Monte Carlo / benchmark seed override")
            ->each([&](const std::string&) { seed_set = true; });
        sub->add_option("--trials", trials, "Monte Carlo trial count override")
            ->each([&](const std::string&) { trials_set = true; });
        sub->add_option("--design", design,
                        "design for beampattern/montecarlo "
                        "(isotropic|capacity|sensing|sensing-upper|optimal|suboptimal)");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        isac::ExperimentConfig cfg = config_path.empty()
                                         ? isac::default_scenario()
                                         : isac::load_config_file(config_path);
        isac::RunOverrides overrides;
        if (!out_path.empty()) overrides.out_path = out_path;
        if (seed_set) overrides.seed = seed;
        if (trials_set) overrides.trials = trials;
        if (!design.empty()) overrides.design = design;
        isac::run_command(command, cfg, overrides, std::cout);
        return 0;
    } catch (const isac::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const isac::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 4;
    }
}
