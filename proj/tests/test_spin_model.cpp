#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace qpde;
using testutil::diff;

namespace {

double vec_diff(const std::vector<double>& a, const std::vector<double>& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST(SpinSystem, Validation)
{
    EXPECT_THROW(SpinSystem(0, {}), std::invalid_argument);
    EXPECT_THROW(SpinSystem(6, {}), std::invalid_argument);
    EXPECT_THROW(SpinSystem(3, {{1, 4, 1.0}}), std::invalid_argument);
    EXPECT_THROW(SpinSystem(3, {{2, 2, 1.0}}), std::invalid_argument);
    EXPECT_THROW(SpinSystem(3, {{1, 2, 1.0}, {2, 1, 0.5}}), std::invalid_argument);
    EXPECT_THROW(SpinSystem(2, {{1, 2, NAN}}), std::invalid_argument);
    EXPECT_DOUBLE_EQ(SpinSystem(3, {{3, 1, 2.0}}).coupling(1, 3), 2.0);
}

TEST(Hamiltonian, TwoSpinMatrix)
{
    const Matrix h = build_hamiltonian(SpinSystem::two(1.0));
    const Matrix expect{{-0.5, 0, 0, 0}, {0, 0.5, -1, 0}, {0, -1, 0.5, 0}, {0, 0, 0, -0.5}};
    EXPECT_LT(max_abs_diff(h, expect), 1e-15);
}

TEST(Hamiltonian, ZeroCouplingsGiveZeroMatrix)
{
    EXPECT_LT(max_abs_diff(build_hamiltonian(SpinSystem(3, {})), Matrix(8, 8)), 1e-15);
}

TEST(Hamiltonian, AsymmetricChainSingleFlipBlock)
{
    const Matrix h = build_hamiltonian(SpinSystem::three(1.0, 1.1, 0.0));
    const std::size_t idx[3] = {0b001, 0b010, 0b100};
    const double expect[3][3] = {{0.05, -1.1, 0}, {-1.1, 1.05, -1}, {0, -1, -0.05}};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) EXPECT_NEAR(h(idx[r], idx[c]).real(), expect[r][c], 1e-14);
}

TEST(Hamiltonian, MatchesPauliKroneckerOracle)
{
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (std::size_t n : {2u, 3u, 4u}) {
        for (int k = 0; k < 10; ++k) {
            std::vector<Coupling> cs;
            for (std::size_t i = 1; i <= n; ++i)
                for (std::size_t j = i + 1; j <= n; ++j) cs.push_back({i, j, u(rng)});
            const SpinSystem s(n, cs);
            EXPECT_LT(diff(build_hamiltonian(s), oracle::heisenberg(n, testutil::bonds_of(s))), 1e-14);
        }
    }
}

TEST(Hamiltonian, MatchesAMatrixClosedForms)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int k = 0; k < 1000; ++k) {
        const double j12 = u(rng), j23 = u(rng), j13 = u(rng);
        const Matrix h = build_hamiltonian(SpinSystem(3, {{1, 2, j12}, {2, 3, j23}, {1, 3, j13}}));
        const oracle::Mat a = oracle::a_matrix(j12, j23, j13);
        double m = 0.0;
        for (std::size_t r = 0; r < 8; ++r)
            for (std::size_t c = 0; c < 8; ++c)
                m = std::max(m, std::abs(h(oracle::kAOrder[r], oracle::kAOrder[c]) - a(r, c)));
        ASSERT_LT(m, 1e-12) << "J = " << j12 << ", " << j23 << ", " << j13;
    }
}

TEST(SpinSquared, KnownEigenvalues)
{
    EXPECT_LT(max_abs_diff(spin_squared(1), Matrix::identity(2) * complex(0.75)), 1e-14);
    const auto t = testutil::T();
    const auto s2t = spin_squared(2).apply(t.amplitudes());
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(s2t[i] - 2.0 * t[i]), 0.0, 1e-14);
    const auto q = spin_squared(3).apply(testutil::Q().amplitudes());
    EXPECT_NEAR(q[0].real(), 15.0 / 4.0, 1e-14);
}

TEST(SpinEigenfunction, SupplementaryListReproducedExactly)
{
    const double r2 = 1.0 / std::sqrt(2.0), r3 = 1.0 / std::sqrt(3.0), r6 = 1.0 / std::sqrt(6.0);
    struct Case {
        std::size_t n;
        double s, ms;
        std::size_t d;
        std::vector<double> c;
    };
    // alpha = 0, beta = 1, first spin leftmost
    const std::vector<Case> cases{
        {2, 1, 1, 1, {1, 0, 0, 0}},
        {2, 1, 0, 1, {0, r2, r2, 0}},
        {2, 1, -1, 1, {0, 0, 0, 1}},
        {2, 0, 0, 1, {0, r2, -r2, 0}},
        {3, 1.5, 1.5, 1, {1, 0, 0, 0, 0, 0, 0, 0}},
        {3, 1.5, 0.5, 1, {0, r3, r3, 0, r3, 0, 0, 0}},
        {3, 1.5, -0.5, 1, {0, 0, 0, r3, 0, r3, r3, 0}},
        {3, 1.5, -1.5, 1, {0, 0, 0, 0, 0, 0, 0, 1}},
        {3, 0.5, 0.5, 1, {0, 2 * r6, -r6, 0, -r6, 0, 0, 0}},
        {3, 0.5, -0.5, 1, {0, 0, 0, -r6, 0, -r6, 2 * r6, 0}},
        {3, 0.5, 0.5, 2, {0, 0, r2, 0, -r2, 0, 0, 0}},
        {3, 0.5, -0.5, 2, {0, 0, 0, r2, 0, -r2, 0, 0}},
    };
    for (const auto& c : cases) {
        const auto x = spin_eigenfunction(c.n, c.s, c.ms, c.d);
        EXPECT_LT(vec_diff(x.coefficients, c.c), 1e-12) << x.label;
    }
}

TEST(SpinEigenfunction, EigenvaluesAndOrthonormality)
{
    for (std::size_t n = 1; n <= 5; ++n) {
        const auto basis = spin_eigenbasis(n);
        ASSERT_EQ(basis.size(), std::size_t{1} << n);
        const Matrix s2 = spin_squared(n);
        const Matrix sz = spin_z(n);
        for (std::size_t a = 0; a < basis.size(); ++a) {
            const auto& x = basis[a];
            const auto v = std::vector<complex>(x.coefficients.begin(), x.coefficients.end());
            const auto s2v = s2.apply(v);
            const auto szv = sz.apply(v);
            for (std::size_t i = 0; i < v.size(); ++i) {
                EXPECT_NEAR(std::abs(s2v[i] - x.s() * (x.s() + 1) * v[i]), 0.0, 1e-12) << x.label;
                EXPECT_NEAR(std::abs(szv[i] - x.ms() * v[i]), 0.0, 1e-12) << x.label;
            }
            for (std::size_t b = 0; b < basis.size(); ++b) {
                double dot = 0.0;
                for (std::size_t i = 0; i < v.size(); ++i) dot += x.coefficients[i] * basis[b].coefficients[i];
                EXPECT_NEAR(dot, a == b ? 1.0 : 0.0, 1e-12);
            }
        }
    }
}

TEST(SpinEigenfunction, InvalidArgumentsRejected)
{
    EXPECT_THROW(spin_eigenfunction(3, 1.0, 0.0), std::invalid_argument);
    EXPECT_THROW(spin_eigenfunction(3, 0.5, 1.5), std::invalid_argument);
    EXPECT_THROW(spin_eigenfunction(3, 0.5, 0.5, 3), std::invalid_argument);
    EXPECT_THROW(spin_eigenfunction(2, 0.25, 0.25), std::invalid_argument);
    EXPECT_EQ(degeneracy(3, 0.5), 2u);
    EXPECT_EQ(degeneracy(4, 0.0), 2u);
    EXPECT_EQ(degeneracy(5, 0.5), 5u);
}

TEST(NamedState, MainTextStates)
{
    EXPECT_DOUBLE_EQ(named_state(StateLabel::Q, 3).coefficients[0], 1.0);
    const auto d1 = named_state(StateLabel::D1, 3).state();
    const auto d2 = named_state(StateLabel::D2, 3).state();
    EXPECT_NEAR(std::abs(inner_product(d1, testutil::D1()) - 1.0), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(inner_product(d2, testutil::D2()) - 1.0), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(inner_product(named_state(StateLabel::T, 2).state(), testutil::T()) - 1.0), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(inner_product(named_state(StateLabel::S, 2).state(), testutil::S()) - 1.0), 0.0, 1e-14);
    EXPECT_THROW(named_state(StateLabel::Q, 2), std::invalid_argument);
}

TEST(NamedState, LinearChainEigenstates)
{
    const Matrix h = build_hamiltonian(SpinSystem::three(1, 1, 0));
    const auto d2 = named_state(StateLabel::D2, 3).coefficients;
    const auto d1 = named_state(StateLabel::D1, 3).coefficients;
    const auto hd2 = h.apply(std::vector<complex>(d2.begin(), d2.end()));
    const auto hd1 = h.apply(std::vector<complex>(d1.begin(), d1.end()));
    for (std::size_t i = 0; i < 8; ++i) {
        EXPECT_NEAR(std::abs(hd2[i]), 0.0, 1e-14);
        EXPECT_NEAR(std::abs(hd1[i] - 2.0 * d1[i]), 0.0, 1e-14);
    }
}

TEST(NamedState, LabelParsing)
{
    EXPECT_EQ(parse_state_label("D2"), StateLabel::D2);
    EXPECT_FALSE(parse_state_label("D3").has_value());
}

TEST(SpinEigenbasis, CommutesWithHamiltonian)
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const Matrix s2 = spin_squared(3);
    for (int k = 0; k < 1000; ++k) {
        const Matrix h = build_hamiltonian(SpinSystem(3, {{1, 2, u(rng)}, {2, 3, u(rng)}, {1, 3, u(rng)}}));
        ASSERT_LT(max_abs_diff(h * s2, s2 * h), 1e-10);
    }
}

TEST(SpinEigenbasis, BMatrixClosedForms)
{
    // Basis: Q(3/2, 1/2, -1/2, -3/2), D1(1/2, -1/2), D2(1/2, -1/2).
    // With the listed eigenfunctions the ms = -1/2 doublet coupling has the
    // opposite sign of the ms = +1/2 one (global spin flip maps D2 to -D2).
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const auto basis = spin_eigenbasis(3);
    for (int k = 0; k < 1000; ++k) {
        const double j12 = u(rng), j23 = u(rng), j13 = u(rng);
        const Matrix b = to_spin_eigenbasis(build_hamiltonian(SpinSystem(3, {{1, 2, j12}, {2, 3, j23}, {1, 3, j13}})),
                                            basis);
        const auto f = oracle::b_forms(j12, j23, j13);
        Matrix expect(8, 8);
        for (std::size_t i = 0; i < 4; ++i) expect(i, i) = f.qq;
        expect(4, 4) = expect(5, 5) = f.d1d1;
        expect(6, 6) = expect(7, 7) = f.d2d2;
        expect(4, 6) = expect(6, 4) = f.d1d2;
        expect(5, 7) = expect(7, 5) = -f.d1d2;
        ASSERT_LT(max_abs_diff(b, expect), 1e-12) << "J = " << j12 << ", " << j23 << ", " << j13;
    }
}

TEST(SpinEigenbasis, SpecialCases)
{
    const auto basis = spin_eigenbasis(3);
    const Matrix b = to_spin_eigenbasis(build_hamiltonian(SpinSystem::three(1.0, 1.3, 1.3)), basis);
    EXPECT_NEAR(std::abs(b(4, 6)), 0.0, 1e-14);
    const Matrix c = to_spin_eigenbasis(build_hamiltonian(SpinSystem::three(1, 1, 0)), basis);
    EXPECT_NEAR(c(6, 6).real(), 1.5, 1e-14);

    const Matrix two = to_spin_eigenbasis(build_hamiltonian(SpinSystem::two(1.0)), spin_eigenbasis(2));
    const std::vector<complex> d{-0.5, -0.5, -0.5, 1.5};
    EXPECT_LT(max_abs_diff(two, Matrix::diagonal(d)), 1e-14);
}

TEST(ExactGap, PaperValues)
{
    EXPECT_NEAR(exact_gap(SpinSystem::two(1), StateLabel::T, StateLabel::S).gap, 2.0, 1e-9);
    EXPECT_NEAR(exact_gap(SpinSystem::three(1, 1, 0), StateLabel::Q, StateLabel::D2).gap, 1.0, 1e-9);
    EXPECT_NEAR(exact_gap(SpinSystem::three(1, 1, 1), StateLabel::Q, StateLabel::D2).gap, 3.0, 1e-9);
    EXPECT_NEAR(exact_gap(SpinSystem::three(1, 1, 2), StateLabel::Q, StateLabel::D1).gap, 3.0, 1e-9);
    EXPECT_NEAR(exact_gap(SpinSystem::three(1, 1, 2), StateLabel::Q, StateLabel::D2).gap, 5.0, 1e-9);
    EXPECT_NEAR(exact_gap(SpinSystem::three(1, 1.1, 0), StateLabel::Q, StateLabel::D1).gap, 3.15, 0.005);
}

TEST(ExactGap, AsymmetricChainMatchesDoubletBlock)
{
    // <D1|H|D1>, <D2|H|D2>, <D1|H|D2> for J12 = 1, J23 = 1.1, J13 = 0, then
    // the upper eigenvalue of that 2x2 block minus E_Q
    const double j12 = 1.0, j23 = 1.1, j13 = 0.0;
    const Matrix h = build_hamiltonian(SpinSystem::three(j12, j23, j13));
    const auto d1 = testutil::D1(), d2 = testutil::D2();
    auto elem = [&](const Statevector& a, const Statevector& b) {
        const auto hb = h.apply(b.amplitudes());
        complex acc = 0.0;
        for (std::size_t i = 0; i < hb.size(); ++i) acc += std::conj(a[i]) * hb[i];
        return acc.real();
    };
    const double a = elem(d1, d1), d = elem(d2, d2), c = elem(d1, d2);
    const double upper = 0.5 * (a + d) + std::sqrt(0.25 * (a - d) * (a - d) + c * c);
    const double eq = -(j12 + j23 + j13) / 2.0;
    const auto g = exact_gap(SpinSystem::three(j12, j23, j13), StateLabel::Q, StateLabel::D1);
    EXPECT_NEAR(g.gap, upper - eq, 1e-12);
    EXPECT_NEAR(g.gap, 3.1536, 5e-5);
    EXPECT_FALSE(g.report.excited_tie);
}

TEST(ExactGap, FrustratedTriangleTieIsReported)
{
    // Q is a member of the degenerate quartet; the lowest index wins the tie
    const auto g = exact_gap(SpinSystem::three(1, 1, 1), StateLabel::Q, StateLabel::D2);
    EXPECT_GE(g.gap, 0.0);
    EXPECT_NEAR(g.report.eigenvalues[g.report.ground_index], -1.5, 1e-12);
}
