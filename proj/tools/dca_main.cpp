#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dca/dca.hpp"

namespace {

struct CliArgs {
    std::string config_path;
    std::optional<std::size_t> steps;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
};

void add_common_options(CLI::App* sub, CliArgs& args) {
    sub->add_option("--config", args.config_path, "experiment config file (JSON)")
        ->required();
    sub->add_option("--steps", args.steps, "override the number of steps");
    sub->add_option("--seed", args.seed, "override the root seed");
    sub->add_option("--out-dir", args.out_dir, "override the output directory");
}

int run(dca::ExperimentMode mode, const CliArgs& args) {
    auto config = dca::load_experiment_config(args.config_path, mode);
    dca::apply_overrides(config, args.steps, args.seed, args.out_dir);
    dca::run_experiment(config);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"differentiable cellular automata: simulate, interpolate, "
                 "check gradients, and search rule space by gradient descent"};
    app.set_version_flag("--version", std::string("dca ") + dca::kVersion);
    app.require_subcommand(1);

    CliArgs args;
    CLI::App* simulate =
        app.add_subcommand("simulate", "evolve a rule and render the space-time diagram");
    CLI::App* train =
        app.add_subcommand("train", "gradient-descend rule weights against a target");
    CLI::App* gradcheck = app.add_subcommand(
        "gradcheck", "compare propagated gradients against finite differences");
    CLI::App* interpolate = app.add_subcommand(
        "interpolate", "render a family of rules blended between two endpoint rules");
    for (CLI::App* sub : {simulate, train, gradcheck, interpolate})
        add_common_options(sub, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    dca::ExperimentMode mode = dca::ExperimentMode::simulate;
    if (train->parsed()) mode = dca::ExperimentMode::train;
    if (gradcheck->parsed()) mode = dca::ExperimentMode::gradcheck;
    if (interpolate->parsed()) mode = dca::ExperimentMode::interpolate;

    try {
        return run(mode, args);
    } catch (const dca::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const dca::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const dca::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
