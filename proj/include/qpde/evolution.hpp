#pragma once

#include "qpde/linalg.hpp"
#include "qpde/spin_model.hpp"
#include "qpde/statevector.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qpde {

struct TrotterPlan {
    double t = 0.0;
    std::size_t n_steps = 1;

    void validate() const
    {
        if (!std::isfinite(t) || t < 0.0) {
            throw std::invalid_argument("TrotterPlan: evolution time must be finite and >= 0");
        }
        if (n_steps < 1) {
            throw std::invalid_argument("TrotterPlan: n_steps must be >= 1");
        }
    }
};

/// The 4x4 pair Hamiltonian -2 J S_1.S_2.
inline Matrix pair_hamiltonian(double coupling) { return build_hamiltonian(SpinSystem::two(coupling)); }

/// exp(-i h dt) for h = -2 J S_i.S_j, from the spectral decomposition of h.
/// Triplet states pick up e^{+i J dt / 2}, the singlet e^{-3i J dt / 2}.
inline Matrix pair_term_unitary(double coupling, double dt)
{
    if (!std::isfinite(coupling) || !std::isfinite(dt)) {
        throw std::invalid_argument("pair_term_unitary: non-finite input");
    }
    const auto eig = hermitian_eigendecomposition(pair_hamiltonian(coupling));
    return hermitian_function(eig, [dt](double e) { return std::polar(1.0, -e * dt); });
}

/// First-order product formula: n_steps repetitions of one pair gate per
/// coupling, couplings in ascending (i, j) order.
inline Circuit trotter_circuit(const SpinSystem& system, const TrotterPlan& plan)
{
    plan.validate();
    const double dt = plan.t / static_cast<double>(plan.n_steps);
    Circuit circuit(system.n_spins());
    std::vector<Gate> step;
    step.reserve(system.couplings().size());
    for (const auto& c : system.couplings()) {
        step.push_back(Gate::two(pair_term_unitary(c.value, dt), c.i - 1, c.j - 1,
                                 "U" + std::to_string(c.i) + std::to_string(c.j)));
    }
    for (std::size_t s = 0; s < plan.n_steps; ++s) {
        for (const auto& g : step) {
            circuit.add(g);
        }
    }
    return circuit;
}

/// V diag(e^{-i lambda_k t}) V^dagger.
inline Matrix exact_evolution(const SpinSystem& system, double t)
{
    if (!std::isfinite(t)) {
        throw std::invalid_argument("exact_evolution: non-finite time");
    }
    const auto eig = hermitian_eigendecomposition(build_hamiltonian(system));
    return hermitian_function(eig, [t](double e) { return std::polar(1.0, -e * t); });
}

inline std::size_t default_trotter_steps(double t, double steps_per_unit_time)
{
    // 1e-9 slack keeps products like 150 * 0.2 from rounding up to 31.
    const auto n = static_cast<std::size_t>(std::ceil(steps_per_unit_time * t - 1e-9));
    return std::max<std::size_t>(1, n);
}

}  // namespace qpde
