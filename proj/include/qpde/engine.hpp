#pragma once

// Quantum phase difference estimation.
//
// The measurement primitive is the interference circuit on one ancilla plus
// the spin register:
//
//   ancilla  : H --*---------*---- Tz(de t) -- H -- measure
//   register : ---Excit-- U(t) -- Excit^dag ----------------
//
// with the register prepared in |Phi0> and Excit|Phi0> = |Phi1>. For
// eigenstate inputs P(0) = 1/2 (1 + cos((dE - de) t)), so scanning the trial
// gap de locates the true gap dE. The estimator wraps that scan in an
// iterative Gaussian refinement: sweep a window, fit a Gaussian to P(0),
// restart when the fitted centre leaves the trusted window, multiply prior and
// fit, and stop once the posterior width falls below a threshold.

#include "qpde/circuit_optimizer.hpp"
#include "qpde/evolution.hpp"
#include "qpde/gaussian_fit.hpp"
#include "qpde/sampling.hpp"
#include "qpde/spin_model.hpp"
#include "qpde/statevector.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpde {

struct GaussianEstimate {
    double mu = 0.0;
    double sigma = 1.0;

    void validate() const
    {
        if (!(sigma > 0.0) || !std::isfinite(mu) || !std::isfinite(sigma)) {
            throw std::invalid_argument("GaussianEstimate: sigma must be positive and finite");
        }
    }
};

enum class PriorShape { gaussian, uniform };

/// Gaussian (mu, sigma), or uniform on [mu - sigma, mu + sigma].
struct PriorSpec {
    PriorShape shape = PriorShape::gaussian;
    double mu = 0.0;
    double sigma = 10.0;

    GaussianEstimate estimate() const { return {mu, sigma}; }
};

struct ScheduleEntry {
    double t = 0.0;
    std::size_t n_steps = 1;
};

enum class EvolutionMode { exact, trotter };

struct EvolutionSpec {
    EvolutionMode mode = EvolutionMode::trotter;
    std::size_t n_steps = 1;
};

struct EstimatorConfig {
    double lambda_restart = 0.6;
    double e_thre = 0.4;
    std::size_t grid_points = 21;
    double initial_t = 0.2;
    double steps_per_unit_time = 150.0;
    std::size_t max_iterations = 12;
    std::optional<std::vector<ScheduleEntry>> explicit_schedule;
    double max_time_growth = 5.0;
    std::size_t max_consecutive_restarts = 3;
    std::size_t fit_attempts = 3;
    EvolutionMode evolution = EvolutionMode::trotter;
    bool compress_evolution = true;

    void validate() const
    {
        if (!(lambda_restart > 0.0 && lambda_restart < 1.0)) {
            throw std::invalid_argument("EstimatorConfig: lambda_restart must lie in (0, 1)");
        }
        if (!(e_thre > 0.0)) {
            throw std::invalid_argument("EstimatorConfig: e_thre must be positive");
        }
        if (grid_points < 5) {
            throw std::invalid_argument("EstimatorConfig: grid_points must be >= 5");
        }
        if (!(initial_t > 0.0)) {
            throw std::invalid_argument("EstimatorConfig: initial_t must be positive");
        }
        if (!(steps_per_unit_time > 0.0)) {
            throw std::invalid_argument("EstimatorConfig: steps_per_unit_time must be positive");
        }
        if (max_iterations < 1) {
            throw std::invalid_argument("EstimatorConfig: max_iterations must be >= 1");
        }
        if (!(max_time_growth >= 1.0)) {
            throw std::invalid_argument("EstimatorConfig: max_time_growth must be >= 1");
        }
        if (fit_attempts < 1) {
            throw std::invalid_argument("EstimatorConfig: fit_attempts must be >= 1");
        }
        if (explicit_schedule) {
            if (explicit_schedule->empty()) {
                throw std::invalid_argument("EstimatorConfig: explicit_schedule must not be empty");
            }
            for (const auto& e : *explicit_schedule) {
                TrotterPlan{e.t, e.n_steps}.validate();
                if (!(e.t > 0.0)) {
                    throw std::invalid_argument("EstimatorConfig: schedule times must be positive");
                }
            }
        }
    }
};

struct SweepPoint {
    double delta_eps = 0.0;
    double p0 = 0.0;
    double p0_exact = 0.0;
};

struct IterationRecord {
    double t = 0.0;
    std::size_t n_steps = 1;
    GaussianEstimate prior;
    GaussianFit fit;
    GaussianEstimate posterior;
    bool restarted = false;          // this row re-runs a sweep after an out-of-window fit
    bool triggered_restart = false;  // this row's fit fell outside the window
    std::vector<SweepPoint> sweep;
};

struct EstimationResult {
    GaussianEstimate final;
    std::vector<IterationRecord> trace;
    bool converged = false;
    bool aborted = false;
    std::string diagnostic;
    std::optional<double> exact_gap;
    std::optional<double> accuracy;
};

/// U = |phi1><phi0| + |phi0><phi1| + (I - |phi0><phi0| - |phi1><phi1|).
/// Swaps the two states and fixes their orthogonal complement; Hermitian and
/// unitary.
inline Matrix build_excitation_unitary(const Statevector& phi0, const Statevector& phi1, double tol = 1e-10)
{
    if (phi0.n_qubits() != phi1.n_qubits()) {
        throw std::invalid_argument("build_excitation_unitary: states differ in size");
    }
    if (std::abs(inner_product(phi0, phi1)) > tol) {
        throw std::invalid_argument("build_excitation_unitary: states are not orthogonal");
    }
    const std::size_t dim = phi0.dimension();
    Matrix u = Matrix::identity(dim);
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = 0; c < dim; ++c) {
            const complex a0 = phi0[r] * std::conj(phi0[c]);
            const complex a1 = phi1[r] * std::conj(phi1[c]);
            const complex x10 = phi1[r] * std::conj(phi0[c]);
            const complex x01 = phi0[r] * std::conj(phi1[c]);
            u(r, c) += x10 + x01 - a0 - a1;
        }
    }
    return u;
}

/// Evolution segment on the spin register.
inline Circuit evolution_circuit(const SpinSystem& system, double t, const EvolutionSpec& evo, bool compress)
{
    if (evo.mode == EvolutionMode::exact) {
        Circuit c(system.n_spins());
        std::vector<std::size_t> targets(system.n_spins());
        for (std::size_t q = 0; q < targets.size(); ++q) {
            targets[q] = q;
        }
        c.add(Gate(exact_evolution(system, t), std::move(targets), {}, "exp(-iHt)", 1e-10));
        return c;
    }
    Circuit c = trotter_circuit(system, TrotterPlan{t, evo.n_steps});
    if (!compress) {
        return c;
    }
    if (system.n_spins() <= 3) {
        return collapse_register_block(c, 3);
    }
    return fuse_same_support(c);
}

/// Full circuit on 1 + n qubits, ancilla = qubit 0.
inline Circuit qpde_circuit(const Matrix& excitation, const Circuit& evolution, double t, double delta_eps)
{
    const std::size_t n = evolution.n_qubits();
    std::vector<std::size_t> reg(n);
    for (std::size_t q = 0; q < n; ++q) {
        reg[q] = q + 1;
    }
    Circuit c(n + 1);
    c.add(Gate::single(gates::hadamard(), 0, "H"));
    c.add(Gate(excitation, reg, {0}, "c-Excit", 1e-10));
    c.append(evolution, 1);
    c.add(Gate(excitation.adjoint(), reg, {0}, "c-Excit^dag", 1e-10));
    c.add(Gate::single(gates::phase(delta_eps * t), 0, "Tz"));
    c.add(Gate::single(gates::hadamard(), 0, "H"));
    return c;
}

/// Evaluates P(0) for many trial gaps at fixed (t, evolution); everything up
/// to the phase gate is computed once.
class QpdeInterferometer {
public:
    QpdeInterferometer(const SpinSystem& system, const Statevector& phi0, const Statevector& phi1, double t,
                       const EvolutionSpec& evo, bool compress = true)
        : t_(t), excitation_(build_excitation_unitary(phi0, phi1)),
          evolution_(evolution_circuit(system, t, evo, compress)),
          initial_(Statevector(1).tensor(phi0)), prefix_(initial_)
    {
        if (phi0.n_qubits() != system.n_spins() || phi1.n_qubits() != system.n_spins()) {
            throw std::invalid_argument("QpdeInterferometer: state size does not match the spin system");
        }
        const Circuit full = qpde_circuit(excitation_, evolution_, t_, 0.0);
        // the last two gates are Tz and H
        for (std::size_t g = 0; g + 2 < full.size(); ++g) {
            prefix_ = apply_gate(std::move(prefix_), full.gates()[g]);
        }
    }

    double p0(double delta_eps) const
    {
        Statevector s = apply_gate(prefix_, Gate::single(gates::phase(delta_eps * t_), 0));
        s = apply_gate(std::move(s), Gate::single(gates::hadamard(), 0));
        return ancilla_p0(s, 0);
    }

    Circuit circuit(double delta_eps) const { return qpde_circuit(excitation_, evolution_, t_, delta_eps); }
    const Statevector& initial_state() const noexcept { return initial_; }
    const Circuit& evolution() const noexcept { return evolution_; }
    double t() const noexcept { return t_; }

private:
    double t_;
    Matrix excitation_;
    Circuit evolution_;
    Statevector initial_;
    Statevector prefix_;
};

/// Literal simulation of the interference circuit.
inline double qpde_p0(const Statevector& phi0, const Statevector& phi1, const SpinSystem& system, double t,
                      double delta_eps, const EvolutionSpec& evo)
{
    if (evo.mode == EvolutionMode::trotter && evo.n_steps < 1) {
        throw std::invalid_argument("qpde_p0: trotter mode needs n_steps >= 1");
    }
    const QpdeInterferometer ifm(system, phi0, phi1, t, evo, false);
    const Circuit c = ifm.circuit(delta_eps);
    return ancilla_p0(run_circuit(ifm.initial_state(), c), 0);
}

/// Closed-form P(0) = 1/2 (1 + sum_jk |c_j|^2 |d_k|^2 cos((E_k - E_j - de) t)),
/// c and d being overlaps of phi0 and phi1 with the eigenstates.
inline double analytic_p0(std::span<const complex> c, std::span<const complex> d, std::span<const double> energies,
                          double t, double delta_eps, double tol = 1e-10)
{
    if (c.size() != energies.size() || d.size() != energies.size()) {
        throw std::invalid_argument("analytic_p0: overlap and spectrum sizes differ");
    }
    double nc = 0.0;
    double nd = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
        nc += std::norm(c[k]);
        nd += std::norm(d[k]);
    }
    if (std::abs(nc - 1.0) > tol || std::abs(nd - 1.0) > tol) {
        throw std::invalid_argument("analytic_p0: overlaps are not normalized");
    }
    double s = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
        const double wj = std::norm(c[j]);
        if (wj == 0.0) {
            continue;
        }
        for (std::size_t k = 0; k < d.size(); ++k) {
            s += wj * std::norm(d[k]) * std::cos((energies[k] - energies[j] - delta_eps) * t);
        }
    }
    return 0.5 * (1.0 + s);
}

/// Overlaps <Psi_k|phi> against the eigenvector columns.
inline std::vector<complex> eigen_overlaps(const Matrix& eigenvectors, const Statevector& phi)
{
    std::vector<complex> out(eigenvectors.cols());
    for (std::size_t k = 0; k < out.size(); ++k) {
        complex acc{};
        for (std::size_t r = 0; r < phi.dimension(); ++r) {
            acc += std::conj(eigenvectors(r, k)) * phi[r];
        }
        out[k] = acc;
    }
    return out;
}

/// Uniform inclusive grid on [mu - sigma, mu + sigma].
inline std::vector<double> sweep_grid(const PriorSpec& prior, std::size_t points)
{
    if (points < 2) {
        throw std::invalid_argument("sweep_grid: need at least 2 points");
    }
    std::vector<double> xs(points);
    const double lo = prior.mu - prior.sigma;
    const double step = 2.0 * prior.sigma / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
        xs[i] = lo + step * static_cast<double>(i);
    }
    xs.back() = prior.mu + prior.sigma;
    return xs;
}

/// One scan of the trial gap over the prior window. Point i of iteration
/// `iteration` (fit attempt `attempt`) draws from its own RNG stream, so the
/// result does not depend on evaluation order.
inline std::vector<SweepPoint> sweep(const QpdeInterferometer& ifm, const PriorSpec& prior,
                                     const EstimatorConfig& config, const SamplerSpec& sampler,
                                     std::size_t iteration = 0, std::size_t attempt = 0)
{
    sampler.validate();
    const auto xs = sweep_grid(prior, config.grid_points);
    std::vector<SweepPoint> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        SweepPoint& sp = out[i];
        sp.delta_eps = xs[i];
        sp.p0_exact = ifm.p0(xs[i]);
        Rng rng = derived_rng(sampler.seed, iteration, i, attempt);
        switch (sampler.mode) {
        case SamplerMode::exact: sp.p0 = sp.p0_exact; break;
        case SamplerMode::shots: sp.p0 = sample_p0(sp.p0_exact, sampler.shots, rng); break;
        case SamplerMode::noisy:
            sp.p0 = noisy_trajectory_p0(ifm.circuit(xs[i]), ifm.initial_state(), 0, sampler.p_depol, sampler.shots,
                                        rng);
            break;
        }
    }
    return out;
}

inline GaussianFit fit_gaussian(std::span<const SweepPoint> points, const FitOptions& opt = {})
{
    std::vector<FitPoint> pts(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        pts[i] = {points[i].delta_eps, points[i].p0};
    }
    return fit_gaussian(std::span<const FitPoint>(pts), opt);
}

/// Product of two Gaussian densities, renormalized.
inline GaussianEstimate multiply_gaussians(const GaussianEstimate& prior, const GaussianEstimate& fit)
{
    prior.validate();
    fit.validate();
    const double vp = prior.sigma * prior.sigma;
    const double vf = fit.sigma * fit.sigma;
    return {(prior.mu * vf + fit.mu * vp) / (vp + vf), std::sqrt(vp * vf / (vp + vf))};
}

/// True when the fitted centre leaves (mu - lambda sigma, mu + lambda sigma).
inline bool check_restart(const PriorSpec& prior, double fit_mu, double lambda)
{
    const double half = lambda * prior.sigma;
    return !(fit_mu > prior.mu - half && fit_mu < prior.mu + half);
}

/// Evolution time covering half a cosine period across the posterior window:
/// t = pi / (2 sigma), rounded to 0.1, at most max_time_growth times the
/// current t. A configured schedule replaces the rule; past its end the last
/// entry repeats.
inline ScheduleEntry next_time(double posterior_sigma, const EstimatorConfig& config, double current_t,
                               std::size_t schedule_index)
{
    if (config.explicit_schedule) {
        const auto& s = *config.explicit_schedule;
        return s[std::min(schedule_index, s.size() - 1)];
    }
    if (!(posterior_sigma > 0.0)) {
        throw std::invalid_argument("next_time: posterior sigma must be positive");
    }
    double t = std::round(10.0 * kPi / (2.0 * posterior_sigma)) / 10.0;
    if (current_t > 0.0) {
        t = std::min(t, config.max_time_growth * current_t);
    }
    t = std::max(t, 0.1);
    return {t, default_trotter_steps(t, config.steps_per_unit_time)};
}

inline ScheduleEntry initial_time(const EstimatorConfig& config)
{
    if (config.explicit_schedule) {
        return config.explicit_schedule->front();
    }
    return {config.initial_t, default_trotter_steps(config.initial_t, config.steps_per_unit_time)};
}

/// mu_ini = <Phi1|H|Phi1> - <Phi0|H|Phi0>.
inline double expectation_gap(const SpinSystem& system, const SpinEigenfunction& phi0, const SpinEigenfunction& phi1)
{
    const Matrix h = build_hamiltonian(system);
    return expectation(h, phi1.coefficients) - expectation(h, phi0.coefficients);
}

/// The iterative sweep / fit / restart / update loop.
inline EstimationResult run_estimation(const SpinSystem& system, const Statevector& phi0, const Statevector& phi1,
                                       const PriorSpec& initial_prior, const EstimatorConfig& config,
                                       const SamplerSpec& sampler)
{
    config.validate();
    sampler.validate();
    initial_prior.estimate().validate();

    EstimationResult result;
    PriorSpec prior = initial_prior;
    ScheduleEntry when = initial_time(config);
    std::size_t schedule_index = 0;
    std::size_t consecutive_restarts = 0;
    bool next_is_restart = false;
    result.final = prior.estimate();

    for (std::size_t iter = 0; iter < config.max_iterations; ++iter) {
        const EvolutionSpec evo{config.evolution, when.n_steps};
        const QpdeInterferometer ifm(system, phi0, phi1, when.t, evo, config.compress_evolution);

        IterationRecord rec;
        rec.t = when.t;
        rec.n_steps = when.n_steps;
        rec.prior = prior.estimate();
        rec.restarted = next_is_restart;

        bool fitted = false;
        for (std::size_t attempt = 0; attempt < config.fit_attempts && !fitted; ++attempt) {
            rec.sweep = sweep(ifm, prior, config, sampler, iter, attempt);
            rec.fit = fit_gaussian(std::span<const SweepPoint>(rec.sweep));
            fitted = rec.fit.converged;
            if (sampler.mode == SamplerMode::exact) {
                break;  // resampling cannot change exact data
            }
        }
        if (!fitted) {
            rec.posterior = rec.prior;
            result.trace.push_back(std::move(rec));
            result.aborted = true;
            result.diagnostic = "Gaussian fit failed at iteration " + std::to_string(iter) +
                                " (t = " + std::to_string(when.t) + ")";
            break;
        }

        const GaussianEstimate fit_est{rec.fit.mu, rec.fit.sigma};
        const bool first_uniform = prior.shape == PriorShape::uniform;
        rec.posterior = first_uniform ? fit_est : multiply_gaussians(rec.prior, fit_est);

        if (check_restart(prior, rec.fit.mu, config.lambda_restart)) {
            rec.triggered_restart = true;
            result.trace.push_back(std::move(rec));
            if (++consecutive_restarts > config.max_consecutive_restarts) {
                result.aborted = true;
                result.diagnostic = "too many consecutive restarts at t = " + std::to_string(when.t);
                break;
            }
            prior.mu = result.trace.back().fit.mu;  // same sigma, same (t, n)
            next_is_restart = true;
            continue;
        }
        consecutive_restarts = 0;
        next_is_restart = false;

        const GaussianEstimate post = rec.posterior;
        result.trace.push_back(std::move(rec));
        result.final = post;
        if (post.sigma < config.e_thre) {
            break;
        }
        prior = PriorSpec{PriorShape::gaussian, post.mu, post.sigma};
        ++schedule_index;
        when = next_time(post.sigma, config, when.t, schedule_index);
    }
    result.converged = result.final.sigma < config.e_thre;
    return result;
}

/// Label-based entry point; also attaches the exact gap and accuracy.
inline EstimationResult run_estimation(const SpinSystem& system, StateLabel phi0_label, StateLabel phi1_label,
                                       const PriorSpec& prior, const EstimatorConfig& config,
                                       const SamplerSpec& sampler)
{
    const auto phi0 = named_state(phi0_label, system.n_spins());
    const auto phi1 = named_state(phi1_label, system.n_spins());
    auto result = run_estimation(system, phi0.state(), phi1.state(), prior, config, sampler);
    const double gap = exact_gap(system, phi0_label, phi1_label).gap;
    result.exact_gap = gap;
    if (gap != 0.0) {
        result.accuracy = 1.0 - std::abs(result.final.mu - gap) / std::abs(gap);
    }
    return result;
}

}  // namespace qpde
