#include <CLI11.hpp>
#include <iostream>

#include "qkflow/cli.hpp"
#include "qkflow/core.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"graphical curvature-quotient flows: identity sweeps, flow and translator runs"};
    app.require_subcommand(1);

    qkf::cli::IdentityOptions id_opt;
    CLI::App* identities = app.add_subcommand("identities", "run the identity/inequality sweep");
    identities->add_option("--seed", id_opt.seed, "rng seed");
    identities->add_option("--n-max", id_opt.n_max, "largest vector dimension");
    identities->add_option("--samples", id_opt.samples, "samples per identity and dimension");
    identities->add_option("--tol", id_opt.tol, "relative tolerance");

    std::string config_path, out_dir, run_dir;
    std::uint64_t seed = 0;
    int threads = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run configuration file")->required();
        cmd->add_option("--seed", seed, "override run.seed");
        cmd->add_option("--threads", threads, "worker threads for the grid kernels");
        cmd->add_option("--out-dir", out_dir, "output directory (overrides QKF_OUT_DIR)");
    };
    CLI::App* flow = app.add_subcommand("flow", "integrate a graph flow from a config");
    add_common(flow);
    CLI::App* translator = app.add_subcommand("translator",
                                              "compute a translating profile from a config");
    add_common(translator);

    CLI::App* report = app.add_subcommand("report",
                                          "re-render the monitor report of a finished run");
    report->add_option("--run-dir", run_dir, "directory of a completed flow run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return qkf::cli::kExitUsage;
    }

    qkf::cli::Overrides ov;
    if (flow->count("--seed") || translator->count("--seed")) ov.seed = seed;
    if (flow->count("--threads") || translator->count("--threads")) ov.threads = threads;
    if (flow->count("--out-dir") || translator->count("--out-dir")) ov.out_dir = out_dir;

    try {
        if (identities->parsed()) return qkf::cli::run_identities(id_opt, std::cout);
        if (flow->parsed()) return qkf::cli::run_flow(config_path, ov, std::cout);
        if (translator->parsed()) return qkf::cli::run_translator(config_path, ov, std::cout);
        if (report->parsed()) return qkf::cli::run_report(run_dir, std::cout);
    } catch (const qkf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return qkf::cli::kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return qkf::cli::kExitSolverFailure;
    }
    return qkf::cli::kExitUsage;
}
