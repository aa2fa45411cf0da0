#pragma once

// Heisenberg spin-1/2 model: H = -2 sum_{i<j} J_ij S_i . S_j.
//
// Spin k (1-based) is qubit k-1; |alpha> = |0>, |beta> = |1>.

#include "qpde/linalg.hpp"
#include "qpde/statevector.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qpde {

struct Coupling {
    std::size_t i;  // 1-based, i < j
    std::size_t j;
    double value;
};

class SpinSystem {
public:
    SpinSystem(std::size_t n_spins, std::vector<Coupling> couplings) : n_spins_(n_spins), couplings_(std::move(couplings))
    {
        if (n_spins_ < 1 || n_spins_ > 5) {
            throw std::invalid_argument("SpinSystem: spin count must be in [1, 5], got " + std::to_string(n_spins_));
        }
        for (auto& c : couplings_) {
            if (c.i > c.j) {
                std::swap(c.i, c.j);
            }
            if (c.i < 1 || c.j > n_spins_ || c.i == c.j) {
                throw std::invalid_argument("SpinSystem: invalid coupling pair (" + std::to_string(c.i) + "," +
                                            std::to_string(c.j) + ") for " + std::to_string(n_spins_) + " spins");
            }
            if (!std::isfinite(c.value)) {
                throw std::invalid_argument("SpinSystem: non-finite coupling value");
            }
        }
        // Term order within a Trotter step follows this (i, j) ordering.
        std::sort(couplings_.begin(), couplings_.end(),
                  [](const Coupling& a, const Coupling& b) { return std::pair(a.i, a.j) < std::pair(b.i, b.j); });
        for (std::size_t k = 1; k < couplings_.size(); ++k) {
            if (couplings_[k].i == couplings_[k - 1].i && couplings_[k].j == couplings_[k - 1].j) {
                throw std::invalid_argument("SpinSystem: duplicate coupling pair (" + std::to_string(couplings_[k].i) +
                                            "," + std::to_string(couplings_[k].j) + ")");
            }
        }
    }

    /// Three spins with J12, J23, J13 (zero entries are kept; they contribute nothing).
    static SpinSystem three(double j12, double j23, double j13)
    {
        std::vector<Coupling> c;
        if (j12 != 0.0) c.push_back({1, 2, j12});
        if (j23 != 0.0) c.push_back({2, 3, j23});
        if (j13 != 0.0) c.push_back({1, 3, j13});
        return SpinSystem(3, std::move(c));
    }

    static SpinSystem two(double j12) { return SpinSystem(2, {{1, 2, j12}}); }

    std::size_t n_spins() const noexcept { return n_spins_; }
    std::size_t dimension() const noexcept { return std::size_t{1} << n_spins_; }
    const std::vector<Coupling>& couplings() const noexcept { return couplings_; }

    double coupling(std::size_t i, std::size_t j) const
    {
        if (i > j) {
            std::swap(i, j);
        }
        for (const auto& c : couplings_) {
            if (c.i == i && c.j == j) {
                return c.value;
            }
        }
        return 0.0;
    }

private:
    std::size_t n_spins_;
    std::vector<Coupling> couplings_;
};

/// -2 J S_i.S_j = -(J/2)(XX + YY + ZZ) on the pair, built directly on basis bits.
inline Matrix build_hamiltonian(const SpinSystem& system)
{
    const std::size_t n = system.n_spins();
    const std::size_t dim = system.dimension();
    Matrix h(dim, dim);
    for (const auto& c : system.couplings()) {
        const std::size_t bi = std::size_t{1} << (n - c.i);
        const std::size_t bj = std::size_t{1} << (n - c.j);
        for (std::size_t b = 0; b < dim; ++b) {
            const bool same = ((b & bi) != 0) == ((b & bj) != 0);
            h(b, b) += same ? -0.5 * c.value : 0.5 * c.value;
            if (!same) {
                h(b ^ bi ^ bj, b) += -c.value;
            }
        }
    }
    return h;
}

/// Total spin component operator S_a = sum_k sigma_a^(k) / 2, a in {x, y, z}.
inline Matrix total_spin_component(std::size_t n, char axis)
{
    Matrix pauli;
    switch (axis) {
    case 'x': pauli = gates::pauli_x(); break;
    case 'y': pauli = gates::pauli_y(); break;
    case 'z': pauli = gates::pauli_z(); break;
    default: throw std::invalid_argument("total_spin_component: axis must be x, y or z");
    }
    const std::size_t dim = std::size_t{1} << n;
    Matrix s(dim, dim);
    for (std::size_t k = 0; k < n; ++k) {
        Matrix term = Matrix::identity(1);
        for (std::size_t q = 0; q < n; ++q) {
            term = kron(term, q == k ? pauli : Matrix::identity(2));
        }
        s += term * complex(0.5);
    }
    return s;
}

inline Matrix spin_squared(std::size_t n)
{
    if (n < 1) {
        throw std::invalid_argument("spin_squared: need at least one spin");
    }
    const Matrix sx = total_spin_component(n, 'x');
    const Matrix sy = total_spin_component(n, 'y');
    const Matrix sz = total_spin_component(n, 'z');
    return sx * sx + sy * sy + sz * sz;
}

inline Matrix spin_z(std::size_t n) { return total_spin_component(n, 'z'); }

/// Simultaneous S^2 / S_z eigenvector X(n, s, ms; d). Spin quantum numbers
/// are stored doubled (two_s = 2s) so half-integers stay exact.
struct SpinEigenfunction {
    std::size_t n = 0;
    int two_s = 0;
    int two_ms = 0;
    std::size_t d = 1;
    std::vector<double> coefficients;
    std::string label;

    double s() const { return two_s / 2.0; }
    double ms() const { return two_ms / 2.0; }

    Statevector state() const
    {
        return Statevector(n, std::vector<complex>(coefficients.begin(), coefficients.end()));
    }
};

/// Every coupling path (S_1 = 1/2, S_2, ..., S_n = s), doubled, that reaches
/// total spin s. Paths are ordered lexicographically with larger intermediate
/// spins first, so d = 1 is the path through the highest intermediate spins.
inline std::vector<std::vector<int>> branching_paths(std::size_t n, int two_s)
{
    std::vector<std::vector<int>> out;
    if (n == 0) {
        return out;
    }
    std::vector<int> path{1};
    auto rec = [&](auto&& self) -> void {
        if (path.size() == n) {
            if (path.back() == two_s) {
                out.push_back(path);
            }
            return;
        }
        const int cur = path.back();
        for (int next : {cur + 1, cur - 1}) {
            if (next < 0) {
                continue;
            }
            path.push_back(next);
            self(self);
            path.pop_back();
        }
    };
    rec(rec);
    return out;
}

namespace detail {

// X built along the first `len` entries of `path`, magnetic number two_m.
// Inner levels always use the raising form so sibling children share one
// phase convention; only the outermost level switches to the lowering form
// for negative M', which is the convention of the tabulated eigenfunctions.
// Entries with |m| > S are the zero vector; the recurrence coefficients that
// multiply them vanish, which keeps the boundary cases uniform.
inline std::vector<double> build_eigenfunction(const std::vector<int>& path, std::size_t len, int two_m,
                                               bool top = false)
{
    const int two_s = path[len - 1];
    const std::size_t dim = std::size_t{1} << len;
    if (std::abs(two_m) > two_s || (two_s - two_m) % 2 != 0) {
        return std::vector<double>(dim, 0.0);
    }
    if (len == 1) {
        // X(1, 1/2, +1/2) = |alpha> = |0>, X(1, 1/2, -1/2) = |beta> = |1>
        return two_m > 0 ? std::vector<double>{1.0, 0.0} : std::vector<double>{0.0, 1.0};
    }
    const int two_prev = path[len - 2];
    const double S = two_prev / 2.0;
    const double norm = std::sqrt(2.0 * S + 1.0);
    const bool up = two_s == two_prev + 1;
    std::vector<double> out(dim, 0.0);
    // The new spin is appended as the least significant qubit.
    auto append = [&](const std::vector<double>& xa, double ca, const std::vector<double>& xb, double cb) {
        for (std::size_t b = 0; b < dim / 2; ++b) {
            out[2 * b] += ca * xa[b];
            out[2 * b + 1] += cb * xb[b];
        }
    };
    if (two_m >= 0 || !top) {
        // raising form: M' = M + 1/2, alpha on X(N-1, S, M), beta on X(N-1, S, M+1)
        const int two_M = two_m - 1;
        const double M = two_M / 2.0;
        const double ca = up ? std::sqrt(std::max(0.0, S + M + 1.0)) : -std::sqrt(std::max(0.0, S - M));
        const double cb = up ? std::sqrt(std::max(0.0, S - M)) : std::sqrt(std::max(0.0, S + M + 1.0));
        append(build_eigenfunction(path, len - 1, two_M), ca / norm, build_eigenfunction(path, len - 1, two_M + 2),
               cb / norm);
    } else {
        // lowering form: M' = M - 1/2, beta on X(N-1, S, M), alpha on X(N-1, S, M-1)
        const int two_M = two_m + 1;
        const double M = two_M / 2.0;
        const double cb = up ? std::sqrt(std::max(0.0, S - M + 1.0)) : -std::sqrt(std::max(0.0, S + M));
        const double ca = up ? std::sqrt(std::max(0.0, S + M)) : std::sqrt(std::max(0.0, S - M + 1.0));
        append(build_eigenfunction(path, len - 1, two_M - 2), ca / norm, build_eigenfunction(path, len - 1, two_M),
               cb / norm);
    }
    return out;
}

inline int doubled_half_integer(double x, const char* what)
{
    const double twice = 2.0 * x;
    const double r = std::round(twice);
    if (std::abs(twice - r) > 1e-9) {
        throw std::invalid_argument(std::string("spin_eigenfunction: ") + what + " must be a multiple of 1/2");
    }
    return static_cast<int>(r);
}

}  // namespace detail

inline std::size_t degeneracy(std::size_t n, double s)
{
    return branching_paths(n, detail::doubled_half_integer(s, "s")).size();
}

/// X(n, s, ms; d) from the angular-momentum addition recurrence, d 1-based.
inline SpinEigenfunction spin_eigenfunction(std::size_t n, double s, double ms, std::size_t d = 1)
{
    if (n < 1 || n > 5) {
        throw std::invalid_argument("spin_eigenfunction: spin count must be in [1, 5]");
    }
    const int two_s = detail::doubled_half_integer(s, "s");
    const int two_ms = detail::doubled_half_integer(ms, "ms");
    if (two_s < 0 || std::abs(two_ms) > two_s || (two_s - two_ms) % 2 != 0) {
        throw std::invalid_argument("spin_eigenfunction: |ms| <= s with integer s - ms required");
    }
    const auto paths = branching_paths(n, two_s);
    if (paths.empty()) {
        throw std::invalid_argument("spin_eigenfunction: total spin s = " + std::to_string(s) +
                                    " is unreachable with " + std::to_string(n) + " spins");
    }
    if (d < 1 || d > paths.size()) {
        throw std::invalid_argument("spin_eigenfunction: degeneracy index " + std::to_string(d) +
                                    " outside [1, " + std::to_string(paths.size()) + "]");
    }
    SpinEigenfunction x;
    x.n = n;
    x.two_s = two_s;
    x.two_ms = two_ms;
    x.d = d;
    x.coefficients = detail::build_eigenfunction(paths[d - 1], n, two_ms, true);
    std::ostringstream os;
    os << "X(" << n << "," << x.s() << "," << x.ms() << ";" << d << ")";
    x.label = os.str();
    return x;
}

/// The full spin-eigenfunction basis for n spins: s descending, then d, then
/// ms descending. For three spins this is Q(3/2..-3/2), D1(+-1/2), D2(+-1/2).
inline std::vector<SpinEigenfunction> spin_eigenbasis(std::size_t n)
{
    std::vector<SpinEigenfunction> out;
    for (int two_s = static_cast<int>(n); two_s >= 0; two_s -= 2) {
        const auto count = branching_paths(n, two_s).size();
        for (std::size_t d = 1; d <= count; ++d) {
            for (int two_ms = two_s; two_ms >= -two_s; two_ms -= 2) {
                out.push_back(spin_eigenfunction(n, two_s / 2.0, two_ms / 2.0, d));
            }
        }
    }
    return out;
}

enum class StateLabel { T, S, Q, D1, D2, D1_supp, D2_supp };

inline const char* to_string(StateLabel l)
{
    switch (l) {
    case StateLabel::T: return "T";
    case StateLabel::S: return "S";
    case StateLabel::Q: return "Q";
    case StateLabel::D1: return "D1";
    case StateLabel::D2: return "D2";
    case StateLabel::D1_supp: return "D1_supp";
    case StateLabel::D2_supp: return "D2_supp";
    }
    return "?";
}

inline std::optional<StateLabel> parse_state_label(const std::string& s)
{
    for (auto l : {StateLabel::T, StateLabel::S, StateLabel::Q, StateLabel::D1, StateLabel::D2, StateLabel::D1_supp,
                   StateLabel::D2_supp}) {
        if (s == to_string(l)) {
            return l;
        }
    }
    return std::nullopt;
}

inline std::size_t spins_for(StateLabel l)
{
    return (l == StateLabel::T || l == StateLabel::S) ? 2 : 3;
}

/// Preparation states used by the phase-difference circuits.
///
/// T, S, Q, D1, D2 are the two- and three-spin states the experiments prepare:
///   T  = (|01> + |10>)/sqrt2          S  = (|01> - |10>)/sqrt2
///   Q  = |000>
///   D1 = (2|010> - |100> - |001>)/sqrt6
///   D2 = (|001> - |100>)/sqrt2
/// D1_supp / D2_supp are the recurrence eigenfunctions X(3,1/2,1/2;1|2), which
/// put the distinguished spin last instead of in the middle.
inline SpinEigenfunction named_state(StateLabel label, std::size_t n_spins)
{
    if (spins_for(label) != n_spins) {
        throw std::invalid_argument(std::string("named_state: label ") + to_string(label) + " requires " +
                                    std::to_string(spins_for(label)) + " spins, got " + std::to_string(n_spins));
    }
    SpinEigenfunction x;
    x.n = n_spins;
    x.label = to_string(label);
    x.coefficients.assign(std::size_t{1} << n_spins, 0.0);
    auto& c = x.coefficients;
    const double r2 = 1.0 / std::sqrt(2.0);
    const double r6 = 1.0 / std::sqrt(6.0);
    switch (label) {
    case StateLabel::T:
        x.two_s = 2;
        c[0b01] = r2;
        c[0b10] = r2;
        break;
    case StateLabel::S:
        x.two_s = 0;
        c[0b01] = r2;
        c[0b10] = -r2;
        break;
    case StateLabel::Q:
        x.two_s = 3;
        x.two_ms = 3;
        c[0b000] = 1.0;
        break;
    case StateLabel::D1:
        x.two_s = 1;
        x.two_ms = 1;
        c[0b010] = 2.0 * r6;
        c[0b100] = -r6;
        c[0b001] = -r6;
        break;
    case StateLabel::D2:
        x.two_s = 1;
        x.two_ms = 1;
        x.d = 2;
        c[0b001] = r2;
        c[0b100] = -r2;
        break;
    case StateLabel::D1_supp: {
        auto e = spin_eigenfunction(3, 0.5, 0.5, 1);
        e.label = x.label;
        return e;
    }
    case StateLabel::D2_supp: {
        auto e = spin_eigenfunction(3, 0.5, 0.5, 2);
        e.label = x.label;
        return e;
    }
    }
    return x;
}

inline double expectation(const Matrix& h, std::span<const double> v)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        for (std::size_t j = 0; j < v.size(); ++j) {
            acc += v[i] * h(i, j).real() * v[j];
        }
    }
    return acc;
}

/// B = V^dagger H V for V whose columns are the given basis functions.
inline Matrix to_spin_eigenbasis(const Matrix& h, const std::vector<SpinEigenfunction>& basis, double tol = 1e-10)
{
    const std::size_t dim = h.rows();
    if (!h.square() || basis.size() != dim) {
        throw std::invalid_argument("to_spin_eigenbasis: basis must be complete (" + std::to_string(dim) +
                                    " functions)");
    }
    Matrix v(dim, dim);
    for (std::size_t k = 0; k < dim; ++k) {
        if (basis[k].coefficients.size() != dim) {
            throw std::invalid_argument("to_spin_eigenbasis: basis function dimension mismatch");
        }
        for (std::size_t r = 0; r < dim; ++r) {
            v(r, k) = basis[k].coefficients[r];
        }
    }
    if (max_abs_diff(v.adjoint() * v, Matrix::identity(dim)) > tol) {
        throw std::invalid_argument("to_spin_eigenbasis: basis is not orthonormal");
    }
    return v.adjoint() * h * v;
}

struct SpectrumReport {
    std::vector<double> eigenvalues;
    Matrix eigenvectors;
    std::map<std::pair<std::string, std::string>, double> gaps;
    std::vector<double> ground_overlaps;   // |<eigenstate_k|ground>|^2
    std::vector<double> excited_overlaps;  // |<eigenstate_k|excited>|^2
    std::size_t ground_index = 0;
    std::size_t excited_index = 0;
    bool ground_tie = false;
    bool excited_tie = false;
};

struct GapResult {
    SpectrumReport report;
    double gap = 0.0;
};

namespace detail {

inline std::vector<double> overlaps(const Matrix& eigenvectors, std::span<const double> v)
{
    std::vector<double> out(eigenvectors.cols());
    for (std::size_t k = 0; k < eigenvectors.cols(); ++k) {
        complex acc{};
        for (std::size_t r = 0; r < v.size(); ++r) {
            acc += std::conj(eigenvectors(r, k)) * v[r];
        }
        out[k] = std::norm(acc);
    }
    return out;
}

// Largest overlap; ties within tol go to the lowest index (lowest energy).
inline std::pair<std::size_t, bool> max_overlap(const std::vector<double>& w, double tol = 1e-9)
{
    std::size_t best = 0;
    for (std::size_t k = 1; k < w.size(); ++k) {
        if (w[k] > w[best] + tol) {
            best = k;
        }
    }
    bool tie = false;
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (k != best && std::abs(w[k] - w[best]) <= tol) {
            tie = true;
        }
    }
    return {best, tie};
}

}  // namespace detail

/// Exact-diagonalization gap between the eigenstates that best overlap the
/// two named preparation states.
inline GapResult exact_gap(const SpinSystem& system, StateLabel ground, StateLabel excited)
{
    const auto g = named_state(ground, system.n_spins());
    const auto e = named_state(excited, system.n_spins());
    const auto eig = hermitian_eigendecomposition(build_hamiltonian(system));

    GapResult out;
    auto& r = out.report;
    r.eigenvalues = eig.eigenvalues;
    r.eigenvectors = eig.eigenvectors;
    r.ground_overlaps = detail::overlaps(eig.eigenvectors, g.coefficients);
    r.excited_overlaps = detail::overlaps(eig.eigenvectors, e.coefficients);
    std::tie(r.ground_index, r.ground_tie) = detail::max_overlap(r.ground_overlaps);
    std::tie(r.excited_index, r.excited_tie) = detail::max_overlap(r.excited_overlaps);
    out.gap = r.eigenvalues[r.excited_index] - r.eigenvalues[r.ground_index];
    r.gaps[{to_string(ground), to_string(excited)}] = out.gap;
    return out;
}

}  // namespace qpde
