#pragma once

// Batch commands behind the qpde executable. Each returns a process exit
// status and writes human-facing messages to the given streams.
//
// Output files of `run` (column order is fixed):
//   iterations.csv       t,n_steps,mu_ini,sigma_ini,mu_fit,sigma_fit,mu_upd,sigma_upd,restarted
//   sweeps.csv           iteration_index,delta_eps,p0_sampled,p0_exact
//   optimizer_report.csv t,n_steps,pre_depth,pre_two_qubit_count,pre_gate_count,
//                        post_depth,post_two_qubit_count,post_gate_count
//   summary.json         final estimate, convergence, exact gap, accuracy, seed, config echo

#include "qpde/circuit_optimizer.hpp"
#include "qpde/engine.hpp"
#include "qpde/evolution.hpp"
#include "qpde/run_config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace qpde::cli {

enum ExitCode : int { kConverged = 0, kError = 1, kNotConverged = 2 };

inline constexpr const char* kIterationsHeader =
    "t,n_steps,mu_ini,sigma_ini,mu_fit,sigma_fit,mu_upd,sigma_upd,restarted";
inline constexpr const char* kSweepsHeader = "iteration_index,delta_eps,p0_sampled,p0_exact";
inline constexpr const char* kOptimizerHeader =
    "t,n_steps,pre_depth,pre_two_qubit_count,pre_gate_count,post_depth,post_two_qubit_count,post_gate_count";

/// Shortest decimal form that round-trips the double.
inline std::string num(double x)
{
    char buf[32];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) {
            break;
        }
    }
    return buf;
}

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> shots;  // integer or "exact"
    std::optional<std::string> mode;
    std::optional<std::string> out;
    std::optional<std::string> schedule;
    std::optional<double> p_depol;
};

inline void apply_overrides(RunConfig& cfg, const Overrides& o)
{
    if (o.seed) {
        cfg.sampler.seed = *o.seed;
    }
    if (o.mode) {
        if (*o.mode == "exact") {
            cfg.sampler.mode = SamplerMode::exact;
        } else if (*o.mode == "shots") {
            cfg.sampler.mode = SamplerMode::shots;
        } else if (*o.mode == "noisy") {
            cfg.sampler.mode = SamplerMode::noisy;
        } else {
            throw ConfigError("--mode: expected exact, shots or noisy");
        }
    }
    if (o.shots) {
        if (*o.shots == "exact") {
            cfg.sampler.mode = SamplerMode::exact;
        } else {
            try {
                std::size_t used = 0;
                const long long n = std::stoll(*o.shots, &used);
                if (used != o.shots->size() || n < 1) {
                    throw std::invalid_argument("shots");
                }
                cfg.sampler.shots = static_cast<std::uint64_t>(n);
                if (cfg.sampler.mode == SamplerMode::exact && !o.mode) {
                    cfg.sampler.mode = SamplerMode::shots;
                }
            } catch (const std::exception&) {
                throw ConfigError("--shots: expected a positive integer or 'exact'");
            }
        }
    }
    if (o.p_depol) {
        cfg.sampler.p_depol = *o.p_depol;
    }
    if (o.out) {
        cfg.output_dir = *o.out;
    }
    if (o.schedule) {
        cfg.estimator.explicit_schedule = parse_schedule_flag(*o.schedule);
    }
    try {
        cfg.sampler.validate();
        cfg.estimator.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("override: ") + e.what());
    }
}

struct OptimizerRow {
    ScheduleEntry plan;
    CostReport pre;
    CostReport post;
};

/// Cost of the evolution segment before and after compression.
inline OptimizerRow optimizer_row(const SpinSystem& system, const ScheduleEntry& plan)
{
    const Circuit raw = trotter_circuit(system, TrotterPlan{plan.t, plan.n_steps});
    const Circuit opt = system.n_spins() <= 3 ? collapse_register_block(raw, 3) : fuse_same_support(raw);
    return {plan, cost_report(raw), cost_report(opt)};
}

inline void write_optimizer_report(const std::filesystem::path& file, const std::vector<OptimizerRow>& rows)
{
    std::ofstream os(file);
    os << kOptimizerHeader << "\n";
    for (const auto& r : rows) {
        os << num(r.plan.t) << "," << r.plan.n_steps << "," << r.pre.depth << "," << r.pre.two_qubit_count << ","
           << r.pre.gate_count << "," << r.post.depth << "," << r.post.two_qubit_count << "," << r.post.gate_count
           << "\n";
    }
}

/// Distinct (t, n_steps) pairs in order of first appearance.
inline std::vector<ScheduleEntry> distinct_plans(const std::vector<IterationRecord>& trace)
{
    std::vector<ScheduleEntry> out;
    for (const auto& r : trace) {
        const bool seen = std::any_of(out.begin(), out.end(),
                                      [&](const ScheduleEntry& e) { return e.t == r.t && e.n_steps == r.n_steps; });
        if (!seen) {
            out.push_back({r.t, r.n_steps});
        }
    }
    return out;
}

inline Json summary_json(const RunConfig& cfg, const EstimationResult& res)
{
    Json j;
    j["name"] = cfg.name;
    j["final_mu"] = res.final.mu;
    j["final_sigma"] = res.final.sigma;
    j["converged"] = res.converged;
    j["aborted"] = res.aborted;
    if (!res.diagnostic.empty()) {
        j["diagnostic"] = res.diagnostic;
    }
    j["iterations"] = res.trace.size();
    j["exact_gap"] = res.exact_gap ? Json(*res.exact_gap) : Json(nullptr);
    j["accuracy"] = res.accuracy ? Json(*res.accuracy) : Json(nullptr);
    j["seed"] = cfg.sampler.seed;
    j["config"] = to_json(cfg);
    return j;
}

inline void write_run_outputs(const std::filesystem::path& dir, const RunConfig& cfg, const EstimationResult& res)
{
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / "iterations.csv");
        os << kIterationsHeader << "\n";
        for (const auto& r : res.trace) {
            os << num(r.t) << "," << r.n_steps << "," << num(r.prior.mu) << "," << num(r.prior.sigma) << ","
               << num(r.fit.mu) << "," << num(r.fit.sigma) << "," << num(r.posterior.mu) << ","
               << num(r.posterior.sigma) << "," << (r.restarted ? 1 : 0) << "\n";
        }
    }
    {
        std::ofstream os(dir / "sweeps.csv");
        os << kSweepsHeader << "\n";
        for (std::size_t i = 0; i < res.trace.size(); ++i) {
            for (const auto& p : res.trace[i].sweep) {
                os << i << "," << num(p.delta_eps) << "," << num(p.p0) << "," << num(p.p0_exact) << "\n";
            }
        }
    }
    std::vector<OptimizerRow> rows;
    const auto system = cfg.system();
    for (const auto& plan : distinct_plans(res.trace)) {
        rows.push_back(optimizer_row(system, plan));
    }
    write_optimizer_report(dir / "optimizer_report.csv", rows);
    std::ofstream(dir / "summary.json") << summary_json(cfg, res).dump(2) << "\n";
}

inline int run_command(RunConfig cfg, std::ostream& out, std::ostream& err)
{
    try {
        const auto system = cfg.system();
        const auto res =
            run_estimation(system, cfg.ground, cfg.excited, cfg.resolved_prior(), cfg.estimator, cfg.sampler);
        write_run_outputs(cfg.output_dir, cfg, res);
        out << cfg.name << ": mu = " << num(res.final.mu) << ", sigma = " << num(res.final.sigma) << " after "
            << res.trace.size() << " iteration(s)";
        if (res.exact_gap) {
            out << ", exact gap " << num(*res.exact_gap);
        }
        out << (res.converged ? " [converged]" : " [NOT converged]") << "\n";
        if (res.aborted) {
            err << "aborted: " << res.diagnostic << "\n";
            return kError;
        }
        return res.converged ? kConverged : kNotConverged;
    } catch (const std::exception& e) {
        err << "run failed: " << e.what() << "\n";
        return kError;
    }
}

inline Json oracle_json(const RunConfig& cfg)
{
    const auto system = cfg.system();
    const auto g = exact_gap(system, cfg.ground, cfg.excited);
    Json j;
    j["name"] = cfg.name;
    j["ground"] = to_string(cfg.ground);
    j["excited"] = to_string(cfg.excited);
    j["eigenvalues"] = g.report.eigenvalues;
    j["gap"] = g.gap;
    j["ground_index"] = g.report.ground_index;
    j["excited_index"] = g.report.excited_index;
    j["ground_overlaps"] = g.report.ground_overlaps;
    j["excited_overlaps"] = g.report.excited_overlaps;
    j["ground_tie"] = g.report.ground_tie;
    j["excited_tie"] = g.report.excited_tie;
    j["expectation_gap"] =
        expectation_gap(system, named_state(cfg.ground, cfg.n_spins), named_state(cfg.excited, cfg.n_spins));
    return j;
}

inline int oracle_command(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    try {
        out << oracle_json(cfg).dump(2) << "\n";
        return kConverged;
    } catch (const std::exception& e) {
        err << "oracle failed: " << e.what() << "\n";
        return kError;
    }
}

/// Cost reports for the configured schedule, or for the plans an exact-mode
/// estimation visits when no schedule is configured.
inline int optimize_command(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    try {
        const auto system = cfg.system();
        std::vector<ScheduleEntry> plans;
        if (cfg.estimator.explicit_schedule) {
            plans = *cfg.estimator.explicit_schedule;
        } else {
            SamplerSpec exact = cfg.sampler;
            exact.mode = SamplerMode::exact;
            plans = distinct_plans(
                run_estimation(system, cfg.ground, cfg.excited, cfg.resolved_prior(), cfg.estimator, exact).trace);
        }
        std::vector<OptimizerRow> rows;
        for (const auto& p : plans) {
            rows.push_back(optimizer_row(system, p));
        }
        std::filesystem::create_directories(cfg.output_dir);
        const auto file = std::filesystem::path(cfg.output_dir) / "optimizer_report.csv";
        write_optimizer_report(file, rows);
        out << kOptimizerHeader << "\n";
        for (const auto& r : rows) {
            out << num(r.plan.t) << "," << r.plan.n_steps << "," << r.pre.depth << "," << r.pre.two_qubit_count
                << "," << r.pre.gate_count << "," << r.post.depth << "," << r.post.two_qubit_count << ","
                << r.post.gate_count << "\n";
        }
        return kConverged;
    } catch (const std::exception& e) {
        err << "optimize failed: " << e.what() << "\n";
        return kError;
    }
}

}  // namespace qpde::cli
