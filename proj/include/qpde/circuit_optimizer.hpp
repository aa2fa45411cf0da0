#pragma once

// Circuit compression. Heisenberg pair evolutions on a small register close
// under multiplication, so an arbitrarily long Trotter sequence collapses to a
// single register-sized block whose cost does not depend on the step count.

#include "qpde/statevector.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpde {

struct CostReport {
    std::size_t depth = 0;
    std::size_t two_qubit_count = 0;
    std::size_t gate_count = 0;

    friend bool operator==(const CostReport&, const CostReport&) = default;
};

/// Depth over the qubit-dependency DAG; each gate occupies one layer on its
/// support (controls included).
inline CostReport cost_report(const Circuit& circuit)
{
    CostReport r;
    std::vector<std::size_t> layer(circuit.n_qubits(), 0);
    for (const auto& g : circuit.gates()) {
        const auto support = g.support();
        std::size_t start = 0;
        for (auto q : support) {
            start = std::max(start, layer[q]);
        }
        for (auto q : support) {
            layer[q] = start + 1;
        }
        r.depth = std::max(r.depth, start + 1);
        ++r.gate_count;
        if (support.size() == 2) {
            ++r.two_qubit_count;
        }
    }
    return r;
}

/// Merges runs of consecutive gates with identical ordered targets and
/// controls into one gate holding their product.
inline Circuit fuse_same_support(const Circuit& circuit)
{
    Circuit out(circuit.n_qubits());
    const auto& gs = circuit.gates();
    std::size_t i = 0;
    while (i < gs.size()) {
        Matrix acc = gs[i].matrix();
        std::size_t j = i + 1;
        while (j < gs.size() && gs[j].targets() == gs[i].targets() && gs[j].controls() == gs[i].controls()) {
            acc = gs[j].matrix() * acc;
            ++j;
        }
        if (j == i + 1) {
            out.add(gs[i]);
        } else {
            out.add(Gate(std::move(acc), gs[i].targets(), gs[i].controls(), gs[i].label(), 1e-10));
        }
        i = j;
    }
    return out;
}

/// Replaces the whole circuit by one register-wide unitary block.
inline Circuit collapse_register_block(const Circuit& circuit, std::size_t max_qubits = 3)
{
    if (circuit.n_qubits() > max_qubits) {
        throw std::invalid_argument("collapse_register_block: register of " + std::to_string(circuit.n_qubits()) +
                                    " qubits exceeds the " + std::to_string(max_qubits) + "-qubit block limit");
    }
    std::vector<std::size_t> targets(circuit.n_qubits());
    for (std::size_t q = 0; q < targets.size(); ++q) {
        targets[q] = q;
    }
    Circuit out(circuit.n_qubits());
    out.add(Gate(circuit_unitary(circuit), std::move(targets), {}, "block", 1e-10));
    return out;
}

}  // namespace qpde
