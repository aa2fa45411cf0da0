#pragma once

// Dense statevector simulation.
//
// Qubit q (0-based) lives in bit (n_qubits - 1 - q) of the basis index, so
// qubit 0 is the most significant bit. With spin k mapped to qubit k-1 and
// |alpha> -> |0>, |beta> -> |1>, the ket |010> is alpha-beta-alpha.

#include "qpde/linalg.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qpde {

inline constexpr double kNormTol = 1e-12;
inline constexpr double kUnitarityTol = 1e-12;

class Statevector {
public:
    /// |0...0> on n qubits.
    explicit Statevector(std::size_t n_qubits) : n_qubits_(n_qubits), amps_(dimension_for(n_qubits))
    {
        amps_[0] = 1.0;
    }

    Statevector(std::size_t n_qubits, std::vector<complex> amplitudes)
        : n_qubits_(n_qubits), amps_(std::move(amplitudes))
    {
        if (amps_.size() != dimension_for(n_qubits_)) {
            throw std::invalid_argument("Statevector: amplitude count " + std::to_string(amps_.size()) +
                                        " is not 2^" + std::to_string(n_qubits_));
        }
        const double nrm = norm_squared();
        if (std::abs(nrm - 1.0) > kNormTol) {
            throw std::invalid_argument("Statevector: amplitudes not normalized (|psi|^2 = " +
                                        std::to_string(nrm) + ")");
        }
    }

    /// Normalizes arbitrary non-zero amplitudes; length must be a power of two.
    static Statevector normalized(std::vector<complex> amplitudes)
    {
        std::size_t n = 0;
        while ((std::size_t{1} << n) < amplitudes.size()) {
            ++n;
        }
        double nrm = 0.0;
        for (const auto& a : amplitudes) {
            nrm += std::norm(a);
        }
        if (nrm <= 0.0) {
            throw std::invalid_argument("Statevector: zero vector");
        }
        const double inv = 1.0 / std::sqrt(nrm);
        for (auto& a : amplitudes) {
            a *= inv;
        }
        return Statevector(n, std::move(amplitudes));
    }

    static Statevector basis(std::size_t n_qubits, std::size_t index)
    {
        Statevector s(n_qubits);
        if (index >= s.dimension()) {
            throw std::invalid_argument("Statevector::basis: index out of range");
        }
        s.amps_[0] = 0.0;
        s.amps_[index] = 1.0;
        return s;
    }

    std::size_t n_qubits() const noexcept { return n_qubits_; }
    std::size_t dimension() const noexcept { return amps_.size(); }
    std::span<const complex> amplitudes() const noexcept { return amps_; }
    complex operator[](std::size_t i) const { return amps_[i]; }

    double norm_squared() const noexcept
    {
        double s = 0.0;
        for (const auto& a : amps_) {
            s += std::norm(a);
        }
        return s;
    }

    /// |this> (x) |other>, with this on the leading (more significant) qubits.
    Statevector tensor(const Statevector& other) const
    {
        std::vector<complex> out(dimension() * other.dimension());
        for (std::size_t i = 0; i < dimension(); ++i) {
            for (std::size_t j = 0; j < other.dimension(); ++j) {
                out[i * other.dimension() + j] = amps_[i] * other.amps_[j];
            }
        }
        return Statevector(n_qubits_ + other.n_qubits_, std::move(out));
    }

    std::size_t bit_of(std::size_t qubit) const { return n_qubits_ - 1 - qubit; }

private:
    friend Statevector apply_gate(Statevector state, const class Gate& gate);

    static std::size_t dimension_for(std::size_t n)
    {
        if (n == 0 || n > 20) {
            throw std::invalid_argument("Statevector: qubit count must be in [1, 20]");
        }
        return std::size_t{1} << n;
    }

    std::size_t n_qubits_;
    std::vector<complex> amps_;
};

enum class GateKind { single_qubit, two_qubit, controlled_register, register_block };

inline const char* to_string(GateKind k)
{
    switch (k) {
    case GateKind::single_qubit: return "single_qubit";
    case GateKind::two_qubit: return "two_qubit";
    case GateKind::controlled_register: return "controlled_register";
    case GateKind::register_block: return "register_block";
    }
    return "unknown";
}

/// A unitary on an ordered list of target qubits, optionally conditioned on
/// control qubits all being |1>. targets[0] is the most significant qubit of
/// the matrix's index.
class Gate {
public:
    Gate(Matrix matrix, std::vector<std::size_t> targets, std::vector<std::size_t> controls = {},
         std::string label = {}, double unitarity_tol = kUnitarityTol)
        : matrix_(std::move(matrix)), targets_(std::move(targets)), controls_(std::move(controls)),
          label_(std::move(label))
    {
        if (targets_.empty()) {
            throw std::invalid_argument("Gate: no target qubits");
        }
        if (!matrix_.square() || matrix_.rows() != (std::size_t{1} << targets_.size())) {
            throw std::invalid_argument("Gate: matrix dimension does not match " +
                                        std::to_string(targets_.size()) + " target qubit(s)");
        }
        std::vector<std::size_t> all = targets_;
        all.insert(all.end(), controls_.begin(), controls_.end());
        std::sort(all.begin(), all.end());
        if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
            throw std::invalid_argument("Gate: repeated qubit among targets/controls");
        }
        const double err = unitarity_error(matrix_);
        if (err > unitarity_tol) {
            throw std::invalid_argument("Gate: matrix is not unitary (|U^dag U - I|_max = " +
                                        std::to_string(err) + ")");
        }
    }

    static Gate single(const Matrix& m, std::size_t q, std::string label = {})
    {
        return Gate(m, {q}, {}, std::move(label));
    }

    static Gate two(const Matrix& m, std::size_t q0, std::size_t q1, std::string label = {})
    {
        return Gate(m, {q0, q1}, {}, std::move(label));
    }

    const Matrix& matrix() const noexcept { return matrix_; }
    const std::vector<std::size_t>& targets() const noexcept { return targets_; }
    const std::vector<std::size_t>& controls() const noexcept { return controls_; }
    const std::string& label() const noexcept { return label_; }

    /// All qubits touched, controls included.
    std::vector<std::size_t> support() const
    {
        std::vector<std::size_t> s = controls_;
        s.insert(s.end(), targets_.begin(), targets_.end());
        return s;
    }

    GateKind kind() const noexcept
    {
        if (!controls_.empty()) {
            return GateKind::controlled_register;
        }
        if (targets_.size() == 1) {
            return GateKind::single_qubit;
        }
        if (targets_.size() == 2) {
            return GateKind::two_qubit;
        }
        return GateKind::register_block;
    }

    Gate adjoint() const
    {
        return Gate(matrix_.adjoint(), targets_, controls_, label_.empty() ? label_ : label_ + "^dag", 1.0);
    }

    std::size_t max_qubit() const
    {
        std::size_t m = 0;
        for (auto q : support()) {
            m = std::max(m, q);
        }
        return m;
    }

    /// Same gate with every qubit index shifted by offset.
    Gate shifted(std::size_t offset) const
    {
        auto t = targets_;
        auto c = controls_;
        for (auto& q : t) {
            q += offset;
        }
        for (auto& q : c) {
            q += offset;
        }
        return Gate(matrix_, std::move(t), std::move(c), label_, 1.0);
    }

private:
    Matrix matrix_;
    std::vector<std::size_t> targets_;
    std::vector<std::size_t> controls_;
    std::string label_;
};

class Circuit {
public:
    explicit Circuit(std::size_t n_qubits) : n_qubits_(n_qubits)
    {
        if (n_qubits == 0) {
            throw std::invalid_argument("Circuit: qubit count must be positive");
        }
    }

    Circuit& add(Gate g)
    {
        if (g.max_qubit() >= n_qubits_) {
            throw std::invalid_argument("Circuit: gate touches qubit " + std::to_string(g.max_qubit()) +
                                        " on a " + std::to_string(n_qubits_) + "-qubit register");
        }
        gates_.push_back(std::move(g));
        return *this;
    }

    Circuit& append(const Circuit& other, std::size_t offset = 0)
    {
        for (const auto& g : other.gates()) {
            add(offset == 0 ? g : g.shifted(offset));
        }
        return *this;
    }

    std::size_t n_qubits() const noexcept { return n_qubits_; }
    const std::vector<Gate>& gates() const noexcept { return gates_; }
    std::size_t size() const noexcept { return gates_.size(); }
    bool empty() const noexcept { return gates_.empty(); }

private:
    std::size_t n_qubits_;
    std::vector<Gate> gates_;
};

/// U|psi> for the gate's embedded unitary.
inline Statevector apply_gate(Statevector state, const Gate& gate)
{
    if (gate.max_qubit() >= state.n_qubits()) {
        throw std::invalid_argument("apply_gate: gate targets qubit " + std::to_string(gate.max_qubit()) +
                                    " on a " + std::to_string(state.n_qubits()) + "-qubit state");
    }
    const auto& targets = gate.targets();
    const std::size_t k = targets.size();
    const std::size_t sub = std::size_t{1} << k;

    std::size_t control_mask = 0;
    for (auto q : gate.controls()) {
        control_mask |= std::size_t{1} << state.bit_of(q);
    }
    std::size_t target_mask = 0;
    std::vector<std::size_t> target_bits(k);
    for (std::size_t i = 0; i < k; ++i) {
        // targets[0] is the matrix's most significant bit
        target_bits[i] = std::size_t{1} << state.bit_of(targets[i]);
        target_mask |= target_bits[i];
    }
    std::vector<std::size_t> offsets(sub);
    for (std::size_t m = 0; m < sub; ++m) {
        std::size_t off = 0;
        for (std::size_t i = 0; i < k; ++i) {
            if (m & (std::size_t{1} << (k - 1 - i))) {
                off |= target_bits[i];
            }
        }
        offsets[m] = off;
    }

    const Matrix& u = gate.matrix();
    std::vector<complex> in(sub);
    auto& amps = state.amps_;
    for (std::size_t base = 0; base < amps.size(); ++base) {
        if ((base & target_mask) != 0 || (base & control_mask) != control_mask) {
            continue;
        }
        for (std::size_t m = 0; m < sub; ++m) {
            in[m] = amps[base | offsets[m]];
        }
        for (std::size_t r = 0; r < sub; ++r) {
            complex acc{};
            for (std::size_t c = 0; c < sub; ++c) {
                acc += u(r, c) * in[c];
            }
            amps[base | offsets[r]] = acc;
        }
    }
    return state;
}

inline Statevector run_circuit(Statevector state, const Circuit& circuit)
{
    if (circuit.n_qubits() != state.n_qubits()) {
        throw std::invalid_argument("run_circuit: circuit and state qubit counts differ");
    }
    for (const auto& g : circuit.gates()) {
        state = apply_gate(std::move(state), g);
    }
    return state;
}

/// <a|b>
inline complex inner_product(const Statevector& a, const Statevector& b)
{
    if (a.n_qubits() != b.n_qubits()) {
        throw std::invalid_argument("inner_product: qubit counts differ");
    }
    complex acc{};
    for (std::size_t i = 0; i < a.dimension(); ++i) {
        acc += std::conj(a[i]) * b[i];
    }
    return acc;
}

/// Probability that measuring `ancilla` yields |0>.
inline double ancilla_p0(const Statevector& state, std::size_t ancilla)
{
    if (ancilla >= state.n_qubits()) {
        throw std::invalid_argument("ancilla_p0: ancilla index " + std::to_string(ancilla) + " out of range");
    }
    const std::size_t bit = std::size_t{1} << state.bit_of(ancilla);
    double p = 0.0;
    for (std::size_t i = 0; i < state.dimension(); ++i) {
        if ((i & bit) == 0) {
            p += std::norm(state[i]);
        }
    }
    return std::clamp(p, 0.0, 1.0);
}

/// Whole-register unitary of a circuit, built column by column.
inline Matrix circuit_unitary(const Circuit& circuit)
{
    const std::size_t dim = std::size_t{1} << circuit.n_qubits();
    Matrix u(dim, dim);
    for (std::size_t c = 0; c < dim; ++c) {
        auto col = run_circuit(Statevector::basis(circuit.n_qubits(), c), circuit);
        for (std::size_t r = 0; r < dim; ++r) {
            u(r, c) = col[r];
        }
    }
    return u;
}

namespace gates {

inline Matrix hadamard()
{
    const double h = 1.0 / std::sqrt(2.0);
    return Matrix{{h, h}, {h, -h}};
}

inline Matrix pauli_x() { return Matrix{{0.0, 1.0}, {1.0, 0.0}}; }
inline Matrix pauli_y() { return Matrix{{0.0, complex(0, -1)}, {complex(0, 1), 0.0}}; }
inline Matrix pauli_z() { return Matrix{{1.0, 0.0}, {0.0, -1.0}}; }

/// diag(1, e^{i phi})
inline Matrix phase(double phi) { return Matrix{{1.0, 0.0}, {0.0, std::polar(1.0, phi)}}; }

/// Tensor product of single-qubit Paulis indexed 0..3 = I, X, Y, Z; code
/// digit i (base 4, most significant first) selects the factor for qubit i.
inline Matrix pauli_string(std::size_t code, std::size_t n_qubits)
{
    Matrix m = Matrix::identity(1);
    for (std::size_t i = 0; i < n_qubits; ++i) {
        const std::size_t digit = (code >> (2 * (n_qubits - 1 - i))) & 3u;
        switch (digit) {
        case 0: m = kron(m, Matrix::identity(2)); break;
        case 1: m = kron(m, pauli_x()); break;
        case 2: m = kron(m, pauli_y()); break;
        default: m = kron(m, pauli_z()); break;
        }
    }
    return m;
}

}  // namespace gates

}  // namespace qpde
