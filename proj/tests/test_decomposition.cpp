#include <gtest/gtest.h>

#include <random>

#include "paralab/decomposition.hpp"

using namespace paralab;

TEST(Bump, SupportAndPositivity) {
    EXPECT_EQ(bump(0.0), 0.0);
    EXPECT_EQ(bump(bump_lo), 0.0);
    EXPECT_EQ(bump(bump_hi), 0.0);
    EXPECT_EQ(bump(0.5), 0.0);
    EXPECT_NEAR(bump(bump_center), std::exp(-4.0), 1e-16);
    for (int i = 1; i < 100; ++i) {
        const double s = bump_lo + (bump_hi - bump_lo) * i / 100.0;
        EXPECT_GT(bump(s), 0.0);
        EXPECT_NEAR(bump(s), bump(2 * bump_center - s), 1e-15);
    }
}

TEST(Bump, FourierTransform) {
    // F phi(0) equals a fine midpoint rule for int phi.
    double riemann = 0;
    const int M = 200000;
    for (int i = 0; i < M; ++i) riemann += bump(bump_lo + (bump_hi - bump_lo) * (i + 0.5) / M);
    riemann *= (bump_hi - bump_lo) / M;
    EXPECT_GT(phi_integral(), 0.0);
    EXPECT_NEAR(phi_integral(), riemann, 1e-14);

    // Conjugate symmetry and a direct complex midpoint rule at xi = 37.5.
    const double xi = 37.5;
    cplx direct = 0;
    for (int i = 0; i < M; ++i) {
        const double s = bump_lo + (bump_hi - bump_lo) * (i + 0.5) / M;
        direct += bump(s) * std::polar(1.0, -two_pi * s * xi);
    }
    direct *= (bump_hi - bump_lo) / M;
    EXPECT_LT(std::abs(phi_fourier(xi) - direct), 1e-13);
    EXPECT_LT(std::abs(phi_fourier(-xi) - std::conj(phi_fourier(xi))), 1e-15);

    // Faster than polynomial decay: xi^3 |F phi(xi)| keeps falling once xi
    // exceeds the inverse support width, down to the 1e-12 quadrature floor.
    double prev = std::numeric_limits<double>::infinity();
    for (double x : {1e3, 4e3, 1.6e4}) {
        const double v = std::abs(phi_fourier(x)) * x * x * x;
        EXPECT_LT(v, prev) << x;
        prev = v;
    }
    EXPECT_LT(std::abs(phi_fourier(5e4)), 1e-12);
}

TEST(BigPhi, FourierCoefficients) {
    const i64 Q = 5;
    const double zero = big_phi_fourier_zero(Q);
    double want = 0;
    for (i64 q = Q; q < 2 * Q; ++q) want += double(euler_phi(q)) / double(q * q);
    EXPECT_NEAR(zero, want * phi_integral(), 1e-18);
    EXPECT_GT(zero, 0.0);
    EXPECT_NEAR(std::abs(big_phi_fourier(0, Q) - zero), 0.0, 1e-18);
    for (i64 k : {1, 7, 60, 1234}) {
        EXPECT_LT(std::abs(big_phi_fourier(-k, Q) - std::conj(big_phi_fourier(k, Q))), 1e-18);
        // (Fest) with the a-sum done term by term.
        cplx direct = 0;
        for (i64 q = Q; q < 2 * Q; ++q)
            for (i64 a = 1; a <= q; ++a)
                if (std::gcd(a, q) == 1)
                    direct += std::polar(1.0, -two_pi * double((a * k) % q) / double(q)) / double(q * q) *
                              phi_fourier(double(k) / double(q * q));
        EXPECT_LT(std::abs(big_phi_fourier(k, Q) - direct), 1e-17);
    }
}

TEST(BigPhi, FourierCoefficientMatchesQuadratureOfPhi) {
    // Phihat(k) = int_0^1 Phi(t) e^{-2 pi i k t} dt, bump by bump.
    const i64 Q = 3;
    for (i64 k : {0, 1, 5, 40}) {
        cplx s = 0;
        const int M = 4000;
        for (i64 q = Q; q < 2 * Q; ++q)
            for (i64 a = 1; a <= q; ++a) {
                if (std::gcd(a, q) != 1) continue;
                const double q2 = double(q * q);
                const double lo = double(a) / q + bump_lo / q2, hi = double(a) / q + bump_hi / q2;
                for (int i = 0; i < M; ++i) {
                    const double t = lo + (hi - lo) * (i + 0.5) / M;
                    s += big_phi(t, Q) * std::polar(1.0, -two_pi * k * t) * (hi - lo) / double(M);
                }
            }
        EXPECT_LT(std::abs(s - big_phi_fourier(k, Q)), 1e-12) << k;
    }
}

TEST(Decomposition, RejectsQOutsideRange) {
    EXPECT_THROW(kernel_decompose({1.0, 4, 1}, 3), std::invalid_argument);
    EXPECT_THROW(kernel_decompose({1.0, 4, 1}, 17), std::invalid_argument);
}

TEST(Decomposition, SecondPieceVanishesOnParaboloid) {
    for (i64 Q : {16, 64, 256}) {
        const auto dec = kernel_decompose({1.0, 16, 1}, Q);
        for (int n = -16; n <= 16; ++n) {
            const int nn[1] = {n};
            EXPECT_EQ(dec.k2_hat(nn, i64(n) * n), cplx(0.0, 0.0));
            EXPECT_NE(dec.k2_hat(nn, i64(n) * n + 1), cplx(0.0, 0.0));
        }
    }
    const auto dec2 = kernel_decompose({1.0, 3, 2}, 3);
    for (int a = -3; a <= 3; ++a)
        for (int b = -3; b <= 3; ++b) {
            const int nn[2] = {a, b};
            EXPECT_EQ(dec2.k2_hat(nn, i64(a) * a + i64(b) * b), cplx(0.0, 0.0));
        }
}

TEST(Decomposition, TableMatchesCheckedCoefficients) {
    const auto dec = kernel_decompose({1.0, 4, 1}, 6);
    for (i64 k : {1, 2, 3, 9, 12, 16}) EXPECT_LT(std::abs(dec.phi_hat(k) - big_phi_fourier(k, 6)), 1e-18);
    EXPECT_THROW(dec.phi_hat(17), std::out_of_range);
}

TEST(Decomposition, FirstPieceVanishesOffBumps) {
    const auto dec = kernel_decompose({1.0, 4, 1}, 4);
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int off = 0;
    for (int i = 0; i < 2000; ++i) {
        const double t = u(gen);
        bool inside = false;
        for (i64 q = 4; q < 8; ++q)
            for (i64 a = 1; a <= q; ++a) {
                const double b = (t - double(a) / q) * q * q;
                if (std::gcd(a, q) == 1 && b > bump_lo && b < bump_hi) inside = true;
            }
        if (!inside) {
            ++off;
            EXPECT_EQ(dec.k1(TorusPoint({0.3}, t)), cplx(0.0, 0.0));
        }
    }
    EXPECT_GT(off, 1000);
}

TEST(Decomposition, PiecesReconstructKernel) {
    // With the Fourier table long enough for Phi's series to converge, the
    // two pieces add back to K_sigma.
    const auto dec = kernel_decompose({1.0, 2, 1}, 2, 120000);
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> ts;
    for (int i = 0; i < 10; ++i) ts.push_back(u(gen));
    // Points inside bumps, where K_{1,Q} is nonzero.
    for (auto [a, q] : {std::pair<i64, i64>{1, 2}, {1, 3}, {2, 3}}) ts.push_back(double(a) / q + 0.0075 / double(q * q));
    for (double t : ts) {
        const TorusPoint p({u(gen)}, t);
        const cplx k = ksigma_direct(dec.params(), p);
        const cplx sum = dec.k1(p) + dec.k2_from_table(p);
        EXPECT_LE(std::abs(sum - k), 1e-8 * std::max(1.0, std::abs(k))) << t;
    }
}

TEST(Decomposition, BoundsAreStableAcrossNAndQ) {
    const auto audit = decomposition_audit(1.0, 1, {8, 16}, {1.0, 1.5, 2.0}, 0.1);
    EXPECT_TRUE(audit.pass) << audit.to_json().dump();
    EXPECT_EQ(audit.rows(), 12u);
    const auto back = BoundAudit::from_json(audit.to_json());
    EXPECT_EQ(back.lhs, audit.lhs);
    EXPECT_EQ(back.constant("C1"), audit.constant("C1"));
}

TEST(Decomposition, FourierTableJson) {
    const auto dec = kernel_decompose({1.0, 3, 1}, 3);
    const auto j = dec.fourier_table_json();
    EXPECT_EQ(j["k_max"], 9);
    EXPECT_EQ(j["phi_hat"].size(), 10u);
    EXPECT_DOUBLE_EQ(j["phi_hat0"].get<double>(), dec.phi_hat0());
}
