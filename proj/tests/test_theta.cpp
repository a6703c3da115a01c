#include <gtest/gtest.h>

#include <random>

#include "paralab/theta.hpp"
#include "paralab/weyl.hpp"

using namespace paralab;

namespace {

// Unfactorised d-dimensional kernel over the cube |n|_inf <= R.
cplx ksigma_brute(const KernelParams& p, const std::vector<double>& x, double t, int R) {
    cplx s = 0;
    const double c = p.sigma / (double(p.N) * p.N);
    if (p.d == 1) {
        for (int n = -R; n <= R; ++n) s += std::exp(-c * n * n) * std::polar(1.0, two_pi * (n * n * t + n * x[0]));
        return s;
    }
    for (int n1 = -R; n1 <= R; ++n1)
        for (int n2 = -R; n2 <= R; ++n2) {
            const double m = double(n1) * n1 + double(n2) * n2;
            s += std::exp(-c * m) * std::polar(1.0, two_pi * (m * t + n1 * x[0] + n2 * x[1]));
        }
    return s;
}

}  // namespace

TEST(KSigma, Examples) {
    const cplx v = ksigma_direct({100.0, 1, 1}, TorusPoint({0.37}, 0.21));
    EXPECT_NEAR(std::abs(v - cplx(1.0, 0.0)), 0.0, 1e-12 + 2 * std::exp(-100.0));

    const cplx z = ksigma_direct({1.0, 2, 1}, TorusPoint({0.0}, 0.0));
    double want = 0;
    for (int n = -60; n <= 60; ++n) want += std::exp(-n * n / 4.0);
    EXPECT_NEAR(z.real(), want, 1e-12);
    EXPECT_NEAR(z.imag(), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(ksigma_poisson({1.0, 2, 1}, TorusPoint({0.0}, 1.0)) - z), 0.0, 1e-10);
}

TEST(KSigma, ConjugateSymmetry) {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const KernelParams p{0.7, 6, 2};
    for (int i = 0; i < 100; ++i) {
        const double x1 = u(gen), x2 = u(gen), t = u(gen);
        const cplx a = ksigma_direct(p, TorusPoint({x1, x2}, t));
        const cplx b = ksigma_direct(p, TorusPoint({-x1, -x2}, -t));
        EXPECT_LE(std::abs(a - std::conj(b)), 1e-11 * std::max(1.0, std::abs(a)));
    }
}

TEST(KSigma, FactorisedSumMatchesUnfactorisedSum) {
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int d : {1, 2}) {
        const KernelParams p{1.0, 3, d};
        const int R = truncation_radius(p, 1e-12);
        for (int i = 0; i < 10; ++i) {
            std::vector<double> x(d);
            for (auto& v : x) v = u(gen);
            const double t = u(gen);
            const cplx want = ksigma_brute(p, x, t, R);
            EXPECT_LE(std::abs(ksigma_direct(p, TorusPoint(x, t)) - want), 1e-10);
        }
    }
}

TEST(KSigma, TruncationTailIsBelowTolerance) {
    for (double sigma : {0.5, 2.0})
        for (int N : {2, 16}) {
            const KernelParams p{sigma, N, 1};
            const int R = truncation_radius(p, 1e-12);
            double tail = 0;
            for (int n = R + 1; n < R + 10 * N + 100; ++n) tail += 2 * std::exp(-sigma * double(n) * n / (double(N) * N));
            EXPECT_LT(tail, 1e-12);
            EXPECT_GE(2 * std::exp(-sigma * double(R) * R / (double(N) * N)), 1e-16);
        }
}

TEST(KSigma, PoissonIdentity) {
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int d : {1, 2})
        for (double sigma : {0.5, 1.0, 2.0})
            for (int N : {2, 4, 8, 16})
                for (int i = 0; i < 20; ++i) {
                    std::vector<double> x(d);
                    for (auto& v : x) v = u(gen);
                    const TorusPoint pt(x, 1.0 - u(gen));
                    const KernelParams p{sigma, N, d};
                    const cplx a = ksigma_direct(p, pt), b = ksigma_poisson(p, pt);
                    EXPECT_LE(std::abs(a - b), 1e-8 * std::max(1.0, std::abs(a))) << d << ' ' << sigma << ' ' << N;
                }
    // The documented example point.
    const KernelParams p{1.0, 4, 1};
    const TorusPoint pt({0.3}, 0.5);
    EXPECT_LE(std::abs(ksigma_direct(p, pt) - ksigma_poisson(p, pt)), 1e-8 * std::max(1.0, std::abs(ksigma_direct(p, pt))));
}

TEST(KSigma, PoissonQEqualsOneIsJacobiImage) {
    // q = 1: a single Gauss factor 1 and z = sigma/N^2 - 2 pi i beta.
    const KernelParams p{1.0, 5, 1};
    const double beta = 0.013, x = 0.21;
    const cplx z(p.damping(), -two_pi * beta);
    cplx s = 0;
    for (int k = -40; k <= 40; ++k) s += std::exp(-std::numbers::pi * std::numbers::pi * (x - k) * (x - k) / z);
    s *= std::sqrt(std::numbers::pi) / std::sqrt(z);
    EXPECT_LE(std::abs(ksigma_poisson(p, {1, 1, beta, 5}, {x}) - s), 1e-12 * std::abs(s));
}

TEST(KSigma, TwoDimensionalPoissonFactorises) {
    const KernelParams p2{1.0, 6, 2}, p1{1.0, 6, 1};
    const RationalApprox ra{2, 5, 0.004, 6};
    const cplx v = ksigma_poisson(p2, ra, {0.17, 0.62});
    const cplx w = ksigma_poisson(p1, ra, {0.17}) * ksigma_poisson(p1, ra, {0.62});
    EXPECT_LE(std::abs(v - w), 1e-13 * std::abs(v));
    EXPECT_THROW(ksigma_poisson(p1, {2, 4, 0.0, 6}, {0.1}), std::invalid_argument);
}

TEST(KarcNorm, ThresholdAndArguments) {
    EXPECT_THROW(karc_lp_norm({1.0, 8, 1}, 1, 1, 4.0), std::domain_error);
    EXPECT_THROW(karc_lp_norm({1.0, 8, 1}, 2, 4, 8.0), std::invalid_argument);
    EXPECT_THROW(karc_lp_norm({1.0, 8, 1}, 1, 9, 8.0), std::invalid_argument);
}

TEST(KarcNorm, InnerMeanMatchesDirectQuadrature) {
    // theta_lp_mean for even p against a fine Riemann sum of |theta|^p.
    const KernelParams p{1.0, 4, 1};
    const int R = truncation_radius(p, 1e-12);
    const double t = 0.2371;
    const double got = theta_lp_mean(p, R, t, 6.0);
    double want = 0;
    const int M = 4096;
    for (int i = 0; i < M; ++i) want += std::pow(std::abs(theta_1d_direct(p.damping(), R, double(i) / M, t)), 6.0);
    want /= M;
    EXPECT_NEAR(got, want, 1e-9 * want);
}

TEST(KarcNorm, StableConstantAndNarrowArcs) {
    std::vector<KarcCase> cases;
    for (int N : {8, 16, 32}) cases.push_back({N, 1, 1});
    const auto audit = karc_audit(1.0, 1, 8.0, cases);
    EXPECT_TRUE(audit.pass) << audit.to_json().dump();
    for (int N : {8, 16}) {
        const auto wide = karc_lp_norm({1.0, N, 1}, 1, 1, 8.0);
        const auto narrow = karc_lp_norm({1.0, N, 1}, 1, N, 8.0);
        EXPECT_LT(narrow.norm, wide.norm);
    }
}

TEST(KarcNorm, ArcSumAudit) {
    const auto audit = arc_sum_audit(1.0, 1, 8.0, {4, 8, 16});
    EXPECT_TRUE(audit.pass) << audit.to_json().dump();
}

TEST(Weyl, Examples) {
    EXPECT_NEAR(std::abs(weyl_sum(0.0, 0.0, 37) - cplx(37, 0)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(weyl_sum(0.5, 0.0, 2)), 0.0, 1e-15);
    // i + 1 + i + 1
    const cplx w = weyl_sum(0.25, 0.0, 4);
    EXPECT_NEAR(w.real(), 2.0, 1e-14);
    EXPECT_NEAR(w.imag(), 2.0, 1e-14);
    EXPECT_THROW(weyl_sum(0.1, 0.0, 0), std::invalid_argument);
}

TEST(Weyl, RecurrenceMatchesPerTermEvaluation) {
    std::mt19937_64 gen(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (i64 N : {1, 1023, 1024, 1025, 5000, 100000}) {
        const double t = u(gen), x = u(gen);
        CompensatedComplexSum s;
        for (i64 n = 1; n <= N; ++n) s.add(unit_phase(frac_mul(t, double(n) * n) + frac_mul(x, double(n))));
        const cplx want = s.value();
        EXPECT_LE(std::abs(weyl_sum(t, x, N) - want), 1e-9 * std::max(std::abs(want), std::sqrt(double(N))));
    }
}

TEST(Weyl, BoundAudit) {
    const auto t0 = weyl_bound_audit({1.0}, {0.0}, {10, 100});
    EXPECT_NEAR(t0.constant("C"), 1.0, 1e-12);

    std::vector<i64> Ns;
    for (int e = 7; e <= 14; ++e) Ns.push_back(i64{1} << e);
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    const auto g = weyl_bound_audit({golden}, {0.0, 0.3}, Ns);
    EXPECT_TRUE(g.pass) << g.to_json().dump();
    for (std::size_t i = 0; i < g.rows(); ++i) {
        const double N = g.parameter_grid[i][2];
        EXPECT_LT(g.lhs[i], 3.0 * std::sqrt(N * std::log(N)));
    }

    const auto rational = weyl_bound_audit({1.0 / 7, 3.0 / 11, 5.0 / 13}, {0.0}, {64, 256, 1024});
    EXPECT_TRUE(rational.pass);
}
