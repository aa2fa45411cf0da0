#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace qpde;

namespace {

std::vector<FitPoint> gaussian_points(double mu, double sigma, double amp, double off, double lo, double hi,
                                      std::size_t n)
{
    std::vector<FitPoint> pts;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = lo + (hi - lo) * double(i) / double(n - 1);
        pts.push_back({x, off + amp * std::exp(-0.5 * (x - mu) * (x - mu) / (sigma * sigma))});
    }
    return pts;
}

const SamplerSpec kExact{SamplerMode::exact, 5000, 0.0, 0};

}  // namespace

TEST(Excitation, TripletSingletActsAsZOnFirstSpin)
{
    const Matrix u = build_excitation_unitary(testutil::T(), testutil::S());
    const Matrix z = kron(gates::pauli_z(), Matrix::identity(2));
    for (std::size_t r : {1u, 2u})
        for (std::size_t c : {1u, 2u}) EXPECT_NEAR(std::abs(u(r, c) - z(r, c)), 0.0, 1e-14);
}

TEST(Excitation, SwapsAndIsInvolution)
{
    const auto q = testutil::Q(), d2 = testutil::D2();
    const Matrix u = build_excitation_unitary(q, d2);
    EXPECT_LT(unitarity_error(u), 1e-13);
    EXPECT_LT(max_abs_diff(u * u, Matrix::identity(8)), 1e-13);
    const auto uq = Statevector(3, u.apply(q.amplitudes()));
    EXPECT_NEAR(std::abs(inner_product(d2, uq)), 1.0, 1e-14);
}

TEST(Excitation, RejectsNonOrthogonalStates)
{
    EXPECT_THROW(build_excitation_unitary(testutil::T(), testutil::T()), std::invalid_argument);
}

TEST(QpdeP0, PaperCases)
{
    const auto sys = SpinSystem::two(1.0);
    const EvolutionSpec exact{EvolutionMode::exact, 1};
    for (double t : {0.2, 1.0, 3.3}) EXPECT_NEAR(qpde_p0(testutil::T(), testutil::S(), sys, t, 2.0, exact), 1.0, 1e-12);
    EXPECT_NEAR(qpde_p0(testutil::T(), testutil::S(), sys, 0.5, 2.0 - 2.0 * kPi, exact), 0.0, 1e-12);
    EXPECT_NEAR(qpde_p0(testutil::T(), testutil::S(), sys, 0.2, 0.0, exact), 0.5 * (1 + std::cos(0.4)), 1e-12);
    EXPECT_NEAR(0.5 * (1 + std::cos(0.4)), 0.96053, 1e-5);
}

TEST(QpdeP0, TrotterAndCompressedMatchLiteral)
{
    const auto sys = SpinSystem::three(1, 1.1, 0);
    const auto q = testutil::Q(), d1 = testutil::D1();
    for (double de : {-2.0, 1.0, 3.15}) {
        const double literal = qpde_p0(q, d1, sys, 1.2, de, {EvolutionMode::trotter, 180});
        const QpdeInterferometer compressed(sys, q, d1, 1.2, {EvolutionMode::trotter, 180}, true);
        EXPECT_NEAR(compressed.p0(de), literal, 1e-12);
    }
}

TEST(AnalyticP0, SingleComponentIsCosine)
{
    const std::vector<complex> c{1.0, 0.0}, d{0.0, 1.0};
    const std::vector<double> e{-1.0, 2.0};
    for (double de : {-3.0, 0.0, 1.5})
        EXPECT_NEAR(analytic_p0(c, d, e, 0.7, de), 0.5 * (1 + std::cos((3.0 - de) * 0.7)), 1e-15);
}

TEST(AnalyticP0, ZeroTimeIsOne)
{
    const std::vector<complex> c{0.6, 0.8}, d{0.8, -0.6};
    EXPECT_NEAR(analytic_p0(c, d, std::vector<double>{0.3, 1.9}, 0.0, 4.2), 1.0, 1e-15);
}

TEST(AnalyticP0, AsymmetricChainHasTwoWeightedComponents)
{
    const auto sys = SpinSystem::three(1, 1.1, 0);
    const auto eig = hermitian_eigendecomposition(build_hamiltonian(sys));
    const auto d = eigen_overlaps(eig.eigenvectors, testutil::D1());
    const auto c = eigen_overlaps(eig.eigenvectors, testutil::Q());
    std::vector<std::pair<double, double>> comps;  // (gap, weight)
    for (std::size_t k = 0; k < d.size(); ++k)
        if (std::norm(d[k]) > 1e-12) comps.push_back({eig.eigenvalues[k] - eig.eigenvalues[0], std::norm(d[k])});
    ASSERT_EQ(comps.size(), 2u);
    std::sort(comps.begin(), comps.end());
    EXPECT_NEAR(comps[1].first, 3.1536, 1e-4);
    EXPECT_NEAR(comps[1].second, 0.9983, 1e-4);
    EXPECT_NEAR(comps[0].second, 0.0017, 1e-4);
    (void)c;
}

TEST(AnalyticP0, MatchesCircuitOverRandomCases)
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> uj(-2.0, 2.0), ut(0.0, 5.0), ue(-10.0, 10.0);
    for (int k = 0; k < 100; ++k) {
        const SpinSystem sys(3, {{1, 2, uj(rng)}, {2, 3, uj(rng)}, {1, 3, uj(rng)}});
        const auto eig = hermitian_eigendecomposition(build_hamiltonian(sys));
        const std::size_t j = rng() % 8;
        std::size_t l = rng() % 8;
        if (l == j) l = (l + 1) % 8;
        const Statevector p0(3, eig.eigenvectors.column(j)), p1(3, eig.eigenvectors.column(l));
        const double t = ut(rng), de = ue(rng);
        const double circ = qpde_p0(p0, p1, sys, t, de, {EvolutionMode::exact, 1});
        const double ana = analytic_p0(eigen_overlaps(eig.eigenvectors, p0), eigen_overlaps(eig.eigenvectors, p1),
                                       eig.eigenvalues, t, de);
        ASSERT_NEAR(circ, ana, 1e-9);
    }
}

TEST(Sweep, GridAndExactMode)
{
    EXPECT_EQ(sweep_grid(PriorSpec{PriorShape::gaussian, 0, 10}, 3), (std::vector<double>{-10, 0, 10}));
    EstimatorConfig cfg;
    const QpdeInterferometer ifm(SpinSystem::two(1.0), testutil::T(), testutil::S(), 0.2, {EvolutionMode::trotter, 1});
    const auto pts = sweep(ifm, PriorSpec{}, cfg, kExact);
    ASSERT_EQ(pts.size(), 21u);
    std::size_t arg = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        EXPECT_EQ(pts[i].p0, pts[i].p0_exact);
        if (pts[i].p0 > pts[arg].p0) arg = i;
    }
    EXPECT_LE(std::abs(pts[arg].delta_eps - 2.0), 1.0);
}

TEST(Sweep, ShotModeIsSeedDeterministic)
{
    EstimatorConfig cfg;
    const QpdeInterferometer ifm(SpinSystem::two(1.0), testutil::T(), testutil::S(), 0.4, {EvolutionMode::trotter, 1});
    const SamplerSpec s{SamplerMode::shots, 500, 0.0, 123};
    const auto a = sweep(ifm, PriorSpec{}, cfg, s, 2);
    const auto b = sweep(ifm, PriorSpec{}, cfg, s, 2);
    const auto c = sweep(ifm, PriorSpec{}, cfg, s, 3);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].p0, b[i].p0);
        differs |= a[i].p0 != c[i].p0;
    }
    EXPECT_TRUE(differs);
}

TEST(FitGaussian, RecoversExactParameters)
{
    const auto pts = gaussian_points(2.0, 1.0, 0.5, 0.5, -3.0, 7.0, 21);
    const auto f = fit_gaussian(std::span<const FitPoint>(pts));
    ASSERT_TRUE(f.converged);
    EXPECT_NEAR(f.mu, 2.0, 1e-6);
    EXPECT_NEAR(f.sigma, 1.0, 1e-6);
    EXPECT_NEAR(f.amplitude, 0.5, 1e-6);
    EXPECT_NEAR(f.offset, 0.5, 1e-6);
}

TEST(FitGaussian, ConstantDataFallsBack)
{
    std::vector<FitPoint> pts;
    for (int i = 0; i < 21; ++i) pts.push_back({-10.0 + i, 0.5});
    const auto f = fit_gaussian(std::span<const FitPoint>(pts));
    EXPECT_FALSE(f.converged);
    EXPECT_TRUE(f.fallback);
    EXPECT_NEAR(f.sigma, 5.0, 1e-12);  // half the prior sigma of 10
}

TEST(FitGaussian, CosineSweepPeak)
{
    std::vector<FitPoint> pts;
    for (int i = 0; i < 21; ++i) {
        const double x = -10.0 + i;
        pts.push_back({x, 0.5 * (1 + std::cos((2.0 - x) * 0.2))});
    }
    const auto f = fit_gaussian(std::span<const FitPoint>(pts));
    ASSERT_TRUE(f.converged);
    EXPECT_NEAR(f.mu, 2.0, 0.1);
}

TEST(FitGaussian, RandomRecoveryProperty)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> um(-3.0, 3.0), us(0.8, 3.0), ua(0.3, 0.9);
    for (int k = 0; k < 200; ++k) {
        const double mu = um(rng), sigma = us(rng), amp = ua(rng), off = 0.05;
        const auto pts = gaussian_points(mu, sigma, amp, off, -6.0, 6.0, 21);
        const auto f = fit_gaussian(std::span<const FitPoint>(pts));
        ASSERT_TRUE(f.converged);
        EXPECT_NEAR(f.mu, mu, 1e-5);
        EXPECT_NEAR(f.sigma, sigma, 1e-5);
    }
}

TEST(MultiplyGaussians, ClosedForms)
{
    const auto same = multiply_gaussians({1.3, 0.7}, {1.3, 0.7});
    EXPECT_NEAR(same.mu, 1.3, 1e-15);
    EXPECT_NEAR(same.sigma, 0.7 / std::sqrt(2.0), 1e-15);
    const auto p = multiply_gaussians({0, 10}, {2, 5});
    EXPECT_NEAR(p.mu, 1.6, 1e-14);
    EXPECT_NEAR(p.sigma, std::sqrt(20.0), 1e-14);

    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> um(-5, 5), us(0.01, 20);
    for (int k = 0; k < 1000; ++k) {
        const double mf = um(rng), sf = us(rng);
        const auto post = multiply_gaussians({0, 10}, {mf, sf});
        const auto ref = oracle::gaussian_product(0, 10, mf, sf);
        EXPECT_LT(post.sigma, 10.0);
        EXPECT_NEAR(post.mu, ref.first, 1e-12);
        EXPECT_NEAR(post.sigma, ref.second, 1e-12);
    }
    EXPECT_THROW(multiply_gaussians({0, 0}, {1, 1}), std::invalid_argument);
}

TEST(CheckRestart, WindowRule)
{
    const PriorSpec prior{PriorShape::gaussian, 0, 10};
    EXPECT_TRUE(check_restart(prior, 7.0, 0.6));
    EXPECT_FALSE(check_restart(prior, 5.9, 0.6));
    EXPECT_TRUE(check_restart(prior, -6.0, 0.6));
}

TEST(NextTime, HalfCycleRule)
{
    EstimatorConfig cfg;
    EXPECT_NEAR(next_time(3.92, cfg, 0.2, 1).t, 0.4, 1e-12);
    const auto e = next_time(4.06, cfg, 0.2, 1);
    EXPECT_NEAR(e.t, 0.4, 1e-12);
    EXPECT_EQ(e.n_steps, 60u);
    EXPECT_NEAR(next_time(0.01, cfg, 0.2, 1).t, 1.0, 1e-12);  // growth cap
    EXPECT_NEAR(next_time(1000.0, cfg, 0.2, 1).t, 0.1, 1e-12);
}

TEST(NextTime, ExplicitScheduleVerbatimThenRepeat)
{
    EstimatorConfig cfg;
    cfg.explicit_schedule = std::vector<ScheduleEntry>{{0.2, 30}, {0.4, 60}};
    EXPECT_EQ(next_time(1.0, cfg, 0.2, 1).n_steps, 60u);
    EXPECT_EQ(next_time(1.0, cfg, 0.4, 5).n_steps, 60u);
    EXPECT_EQ(initial_time(cfg).n_steps, 30u);
}

TEST(RunEstimation, TwoSpinIdealConverges)
{
    const auto r = run_estimation(SpinSystem::two(1.0), StateLabel::T, StateLabel::S, PriorSpec{}, EstimatorConfig{},
                                  kExact);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.final.mu, 2.0, 0.05);
    EXPECT_LT(r.final.sigma, 0.4);
}

TEST(RunEstimation, TwoSpinShotsWithinFifteenPercent)
{
    const auto r = run_estimation(SpinSystem::two(1.0), StateLabel::T, StateLabel::S, PriorSpec{}, EstimatorConfig{},
                                  SamplerSpec{SamplerMode::shots, 5000, 0.0, 1});
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.final.mu, 2.0, 0.3);
}

TEST(RunEstimation, AsymmetricChainUniformPrior)
{
    const auto sys = SpinSystem::three(1, 1.1, 0);
    const double mu0 = expectation_gap(sys, named_state(StateLabel::Q, 3), named_state(StateLabel::D1, 3));
    EXPECT_NEAR(mu0, 3.15, 1e-12);
    EstimatorConfig cfg;
    cfg.initial_t = 1.2;
    const auto r = run_estimation(sys, StateLabel::Q, StateLabel::D1, PriorSpec{PriorShape::uniform, mu0, 1.15}, cfg,
                                  kExact);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.final.mu, 3.1536, 0.05);
    // first posterior is the fit itself
    EXPECT_EQ(r.trace.front().posterior.mu, r.trace.front().fit.mu);
}

TEST(RunEstimation, TraceInvariants)
{
    const auto r = run_estimation(SpinSystem::three(1, 1, 2), StateLabel::Q, StateLabel::D2, PriorSpec{},
                                  EstimatorConfig{}, SamplerSpec{SamplerMode::shots, 5000, 0.0, 4});
    ASSERT_FALSE(r.trace.empty());
    for (const auto& rec : r.trace) {
        if (!rec.triggered_restart) {
            EXPECT_LE(rec.posterior.sigma, rec.prior.sigma);
        }
        for (const auto& p : rec.sweep) {
            EXPECT_GE(p.p0, 0.0);
            EXPECT_LE(p.p0, 1.0);
        }
    }
    if (r.converged) {
        EXPECT_LT(r.final.sigma, 0.4);
    }
}

TEST(RunEstimation, RestartKeepsSigmaAndTime)
{
    // prior far from the true gap forces an out-of-window fit
    const auto r = run_estimation(SpinSystem::two(1.0), StateLabel::T, StateLabel::S,
                                  PriorSpec{PriorShape::gaussian, 6.0, 5.0}, EstimatorConfig{}, kExact);
    ASSERT_GE(r.trace.size(), 2u);
    ASSERT_TRUE(r.trace[0].triggered_restart);
    EXPECT_TRUE(r.trace[1].restarted);
    EXPECT_EQ(r.trace[1].prior.sigma, r.trace[0].prior.sigma);
    EXPECT_EQ(r.trace[1].prior.mu, r.trace[0].fit.mu);
    EXPECT_EQ(r.trace[1].t, r.trace[0].t);
    EXPECT_EQ(r.trace[1].n_steps, r.trace[0].n_steps);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.final.mu, 2.0, 0.05);
}

TEST(RunEstimation, ConfigValidation)
{
    EstimatorConfig bad;
    bad.lambda_restart = 1.2;
    EXPECT_THROW(run_estimation(SpinSystem::two(1.0), StateLabel::T, StateLabel::S, PriorSpec{}, bad, kExact),
                 std::invalid_argument);
    EXPECT_THROW(run_estimation(SpinSystem::two(1.0), StateLabel::T, StateLabel::S,
                                PriorSpec{PriorShape::gaussian, 0, -1}, EstimatorConfig{}, kExact),
                 std::invalid_argument);
}
