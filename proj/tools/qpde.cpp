#include "qpde/cli.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"Phase difference estimation for small Heisenberg spin systems"};
    app.require_subcommand(1);

    std::string config_path;
    qpde::cli::Overrides ov;
    std::uint64_t seed = 0;
    std::string shots, mode, out, schedule;
    double p_depol = 0.0;

    auto* run = app.add_subcommand("run", "estimate the energy gap and write CSV/JSON outputs");
    run->add_option("--config", config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    auto* seed_opt = run->add_option("--seed", seed, "base RNG seed");
    auto* shots_opt = run->add_option("--shots", shots, "shots per point, or 'exact'");
    auto* mode_opt = run->add_option("--mode", mode, "exact, shots or noisy")
                         ->check(CLI::IsMember({"exact", "shots", "noisy"}));
    auto* out_opt = run->add_option("--out", out, "output directory");
    auto* sched_opt = run->add_option("--schedule", schedule, "explicit schedule, e.g. 0.2:30,0.4:60");
    auto* p_opt = run->add_option("--p-depol", p_depol, "depolarizing probability per two-qubit gate")
                      ->check(CLI::Range(0.0, 1.0));

    auto* oracle = app.add_subcommand("oracle", "print the exact spectrum and gap as JSON");
    oracle->add_option("--config", config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);

    auto* optimize = app.add_subcommand("optimize", "report circuit cost before and after compression");
    optimize->add_option("--config", config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    auto* opt_out = optimize->add_option("--out", out, "output directory");
    auto* opt_sched = optimize->add_option("--schedule", schedule, "explicit schedule, e.g. 0.2:30,0.4:60");

    CLI11_PARSE(app, argc, argv);

    try {
        auto cfg = qpde::load_run_config(config_path);
        if (*seed_opt) ov.seed = seed;
        if (*shots_opt) ov.shots = shots;
        if (*mode_opt) ov.mode = mode;
        if (*out_opt || *opt_out) ov.out = out;
        if (*sched_opt || *opt_sched) ov.schedule = schedule;
        if (*p_opt) ov.p_depol = p_depol;
        qpde::cli::apply_overrides(cfg, ov);

        if (*run) {
            return qpde::cli::run_command(cfg, std::cout, std::cerr);
        }
        if (*oracle) {
            return qpde::cli::oracle_command(cfg, std::cout, std::cerr);
        }
        return qpde::cli::optimize_command(cfg, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return qpde::cli::kError;
    }
}
