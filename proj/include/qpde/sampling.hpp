#pragma once

// Finite-shot measurement statistics and a stochastic depolarizing channel
// applied by Pauli insertion along individual trajectories.

#include "qpde/statevector.hpp"

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace qpde {

using Rng = std::mt19937_64;

enum class SamplerMode { exact, shots, noisy };

inline const char* to_string(SamplerMode m)
{
    switch (m) {
    case SamplerMode::exact: return "exact";
    case SamplerMode::shots: return "shots";
    case SamplerMode::noisy: return "noisy";
    }
    return "?";
}

struct SamplerSpec {
    SamplerMode mode = SamplerMode::exact;
    std::uint64_t shots = 5000;
    double p_depol = 0.002;
    std::uint64_t seed = 0;

    void validate() const
    {
        if (mode != SamplerMode::exact && shots < 1) {
            throw std::invalid_argument("SamplerSpec: shots must be >= 1");
        }
        if (!(p_depol >= 0.0 && p_depol <= 1.0)) {
            throw std::invalid_argument("SamplerSpec: p_depol must lie in [0, 1]");
        }
    }
};

/// splitmix64 finalizer; used to derive independent per-stream seeds.
inline std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Deterministic stream for (seed, a, b, c), independent of evaluation order.
inline Rng derived_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0)
{
    return Rng(mix64(mix64(mix64(seed ^ mix64(a)) ^ b) + c));
}

inline double checked_probability(double p)
{
    if (!(p >= -1e-12 && p <= 1.0 + 1e-12)) {
        throw std::invalid_argument("sample_p0: probability " + std::to_string(p) + " outside [0, 1]");
    }
    return std::clamp(p, 0.0, 1.0);
}

/// k / shots with k ~ Binomial(shots, true_p).
inline double sample_p0(double true_p, std::uint64_t shots, Rng& rng)
{
    const double p = checked_probability(true_p);
    if (shots < 1) {
        throw std::invalid_argument("sample_p0: shots must be >= 1");
    }
    std::binomial_distribution<std::uint64_t> dist(shots, p);
    return static_cast<double>(dist(rng)) / static_cast<double>(shots);
}

/// Shot-by-shot trajectory simulation: after every gate touching two or more
/// qubits, with probability p_depol a uniformly random non-identity Pauli
/// string is applied on that gate's support. Each trajectory yields one
/// ancilla measurement. Error-free trajectories share the ideal probability,
/// so only trajectories with at least one insertion are simulated.
inline double noisy_trajectory_p0(const Circuit& circuit, const Statevector& initial, std::size_t ancilla,
                                  double p_depol, std::uint64_t shots, Rng& rng)
{
    if (!(p_depol >= 0.0 && p_depol <= 1.0)) {
        throw std::invalid_argument("noisy_trajectory_p0: p_depol must lie in [0, 1]");
    }
    const double ideal = ancilla_p0(run_circuit(initial, circuit), ancilla);
    if (p_depol == 0.0) {
        return sample_p0(ideal, shots, rng);
    }
    if (shots < 1) {
        throw std::invalid_argument("noisy_trajectory_p0: shots must be >= 1");
    }

    std::vector<std::size_t> sites;
    for (std::size_t g = 0; g < circuit.size(); ++g) {
        if (circuit.gates()[g].support().size() >= 2) {
            sites.push_back(g);
        }
    }

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uint64_t clean = 0;
    std::uint64_t zeros = 0;
    std::vector<std::uint64_t> pauli_at(circuit.size());
    for (std::uint64_t shot = 0; shot < shots; ++shot) {
        bool any = false;
        std::fill(pauli_at.begin(), pauli_at.end(), 0);
        for (auto g : sites) {
            if (unif(rng) < p_depol) {
                const std::size_t k = circuit.gates()[g].support().size();
                std::uniform_int_distribution<std::uint64_t> pick(1, (std::uint64_t{1} << (2 * k)) - 1);
                pauli_at[g] = pick(rng);
                any = true;
            }
        }
        if (!any) {
            ++clean;
            continue;
        }
        Statevector psi = initial;
        for (std::size_t g = 0; g < circuit.size(); ++g) {
            const Gate& gate = circuit.gates()[g];
            psi = apply_gate(std::move(psi), gate);
            if (pauli_at[g] != 0) {
                const auto support = gate.support();
                psi = apply_gate(std::move(psi), Gate(gates::pauli_string(pauli_at[g], support.size()), support));
            }
        }
        std::bernoulli_distribution outcome(ancilla_p0(psi, ancilla));
        if (outcome(rng)) {
            ++zeros;
        }
    }
    if (clean > 0) {
        std::binomial_distribution<std::uint64_t> dist(clean, ideal);
        zeros += dist(rng);
    }
    return static_cast<double>(zeros) / static_cast<double>(shots);
}

}  // namespace qpde
