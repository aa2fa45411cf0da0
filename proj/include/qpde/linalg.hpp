#pragma once

// Dense complex matrices at desk scale (dimension <= 64) and a cyclic Jacobi
// eigensolver for Hermitian input.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qpde {

using complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Row-major dense complex matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    Matrix(std::initializer_list<std::initializer_list<complex>> rows)
    {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) {
                throw std::invalid_argument("Matrix: ragged initializer");
            }
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static Matrix identity(std::size_t n)
    {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            m(i, i) = 1.0;
        }
        return m;
    }

    static Matrix diagonal(std::span<const complex> d)
    {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) {
            m(i, i) = d[i];
        }
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const complex> data() const noexcept { return data_; }

    std::vector<complex> column(std::size_t c) const
    {
        std::vector<complex> v(rows_);
        for (std::size_t r = 0; r < rows_; ++r) {
            v[r] = (*this)(r, c);
        }
        return v;
    }

    Matrix adjoint() const
    {
        Matrix m(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t c = 0; c < cols_; ++c) {
                m(c, r) = std::conj((*this)(r, c));
            }
        }
        return m;
    }

    Matrix& operator+=(const Matrix& o)
    {
        require_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) {
            data_[i] += o.data_[i];
        }
        return *this;
    }

    Matrix& operator-=(const Matrix& o)
    {
        require_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) {
            data_[i] -= o.data_[i];
        }
        return *this;
    }

    Matrix& operator*=(complex s)
    {
        for (auto& x : data_) {
            x *= s;
        }
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, complex s) { return a *= s; }
    friend Matrix operator*(complex s, Matrix a) { return a *= s; }

    friend Matrix operator*(const Matrix& a, const Matrix& b)
    {
        if (a.cols_ != b.rows_) {
            throw std::invalid_argument("Matrix product: inner dimensions differ");
        }
        Matrix m(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const complex aik = a(i, k);
                if (aik == complex{}) {
                    continue;
                }
                for (std::size_t j = 0; j < b.cols_; ++j) {
                    m(i, j) += aik * b(k, j);
                }
            }
        }
        return m;
    }

    std::vector<complex> apply(std::span<const complex> v) const
    {
        if (v.size() != cols_) {
            throw std::invalid_argument("Matrix-vector product: dimension mismatch");
        }
        std::vector<complex> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) {
            complex acc{};
            for (std::size_t c = 0; c < cols_; ++c) {
                acc += (*this)(r, c) * v[c];
            }
            out[r] = acc;
        }
        return out;
    }

private:
    void require_same_shape(const Matrix& o) const
    {
        if (rows_ != o.rows_ || cols_ != o.cols_) {
            throw std::invalid_argument("Matrix: shape mismatch");
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<complex> data_;
};

inline Matrix kron(const Matrix& a, const Matrix& b)
{
    Matrix m(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            for (std::size_t k = 0; k < b.rows(); ++k) {
                for (std::size_t l = 0; l < b.cols(); ++l) {
                    m(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
                }
            }
        }
    }
    return m;
}

/// Largest entrywise modulus of a - b.
inline double max_abs_diff(const Matrix& a, const Matrix& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("max_abs_diff: shape mismatch");
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    }
    return m;
}

inline double unitarity_error(const Matrix& u)
{
    if (!u.square()) {
        return INFINITY;
    }
    return max_abs_diff(u.adjoint() * u, Matrix::identity(u.rows()));
}

inline double hermiticity_error(const Matrix& a)
{
    if (!a.square()) {
        return INFINITY;
    }
    return max_abs_diff(a, a.adjoint());
}

struct EigenDecomposition {
    std::vector<double> eigenvalues;  // ascending
    Matrix eigenvectors;              // column k pairs with eigenvalues[k]
};

/// Cyclic Jacobi diagonalization of a complex Hermitian matrix.
///
/// Each rotation first removes the phase of the pivot A(p,q) with a diagonal
/// unitary, then zeroes the (now real) pivot with a plane rotation. Sweeps run
/// until the off-diagonal Frobenius mass falls below machine resolution of the
/// diagonal. Eigenpairs are returned sorted by eigenvalue.
inline EigenDecomposition hermitian_eigendecomposition(const Matrix& input, double hermitian_tol = 1e-12)
{
    if (!input.square()) {
        throw std::invalid_argument("hermitian_eigendecomposition: matrix is not square");
    }
    if (input.rows() > 64) {
        throw std::invalid_argument("hermitian_eigendecomposition: dimension exceeds 64");
    }
    if (hermiticity_error(input) > hermitian_tol) {
        throw std::invalid_argument("hermitian_eigendecomposition: matrix is not Hermitian");
    }
    const std::size_t n = input.rows();
    Matrix a = input;
    // Symmetrize so round-off in the input does not leak into the rotations.
    for (std::size_t i = 0; i < n; ++i) {
        a(i, i) = a(i, i).real();
        for (std::size_t j = i + 1; j < n; ++j) {
            const complex avg = 0.5 * (a(i, j) + std::conj(a(j, i)));
            a(i, j) = avg;
            a(j, i) = std::conj(avg);
        }
    }
    Matrix v = Matrix::identity(n);

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                s += std::norm(a(i, j));
            }
        }
        return std::sqrt(s);
    };
    auto diag_scale = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s = std::max(s, std::abs(a(i, i)));
        }
        return std::max(s, 1.0);
    };

    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        if (off_norm() <= 1e-15 * diag_scale()) {
            break;
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const complex apq = a(p, q);
                const double r = std::abs(apq);
                if (r < 1e-300) {
                    continue;
                }
                const complex phase = apq / r;  // e^{i phi}
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = 0.5 * std::atan2(2.0 * r, app - aqq);
                const double c = std::cos(theta);
                const double s = std::sin(theta);
                // G = D R with D = diag(1, e^{-i phi}), R = [[c, -s], [s, c]]:
                // column p of G is (c, s e^{-i phi}), column q is (-s, c e^{-i phi}).
                const complex g_pp = c;
                const complex g_qp = s * std::conj(phase);
                const complex g_pq = -s;
                const complex g_qq = c * std::conj(phase);

                // A <- A G (columns p, q)
                for (std::size_t k = 0; k < n; ++k) {
                    const complex akp = a(k, p);
                    const complex akq = a(k, q);
                    a(k, p) = akp * g_pp + akq * g_qp;
                    a(k, q) = akp * g_pq + akq * g_qq;
                }
                // A <- G^dagger A (rows p, q)
                for (std::size_t k = 0; k < n; ++k) {
                    const complex apk = a(p, k);
                    const complex aqk = a(q, k);
                    a(p, k) = std::conj(g_pp) * apk + std::conj(g_qp) * aqk;
                    a(q, k) = std::conj(g_pq) * apk + std::conj(g_qq) * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
                for (std::size_t k = 0; k < n; ++k) {
                    const complex vkp = v(k, p);
                    const complex vkq = v(k, q);
                    v(k, p) = vkp * g_pp + vkq * g_qp;
                    v(k, q) = vkp * g_pq + vkq * g_qq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });

    EigenDecomposition out{std::vector<double>(n), Matrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.eigenvalues[k] = a(order[k], order[k]).real();
        for (std::size_t r = 0; r < n; ++r) {
            out.eigenvectors(r, k) = v(r, order[k]);
        }
    }
    return out;
}

/// Spectral norm, via the largest eigenvalue of A^dagger A.
inline double operator_norm(const Matrix& a)
{
    const auto eig = hermitian_eigendecomposition(a.adjoint() * a, 1e-9);
    return std::sqrt(std::max(0.0, eig.eigenvalues.back()));
}

/// f(A) = V f(Lambda) V^dagger for a Hermitian A.
template <typename F>
Matrix hermitian_function(const EigenDecomposition& eig, F&& f)
{
    const std::size_t n = eig.eigenvalues.size();
    Matrix out(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const complex fk = f(eig.eigenvalues[k]);
        for (std::size_t i = 0; i < n; ++i) {
            const complex vik = eig.eigenvectors(i, k) * fk;
            for (std::size_t j = 0; j < n; ++j) {
                out(i, j) += vik * std::conj(eig.eigenvectors(j, k));
            }
        }
    }
    return out;
}

}  // namespace qpde
