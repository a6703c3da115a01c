#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "paralab/operators.hpp"

using namespace paralab;

namespace {

oracle::Seq to_seq(const SequenceField& f) {
    oracle::Seq s;
    for (i64 n = f.lo(); n <= f.hi(); ++n)
        if (f.at(n) != cplx{}) s[long(n)] = f.at(n);
    return s;
}

// Compares f against the oracle on [lo, hi] and checks f vanishes off its support.
void expect_matches(const SequenceField& f, const oracle::Seq& want, long lo, long hi, double tol = 1e-12) {
    for (long n = lo; n <= hi; ++n) {
        const cplx w = oracle::seq_at(want, n);
        EXPECT_LE(std::abs(f.at(n) - w), tol * std::max(1.0, std::abs(w))) << "n = " << n;
    }
    for (const auto& [n, v] : want) EXPECT_TRUE(f.in_support(n)) << "missing support at " << n;
}

SequenceField gaussian(i64 lo, std::size_t len, std::uint64_t seed) { return SequenceField::gaussian(lo, len, seed); }

}  // namespace

TEST(SequenceField, BasicsAndCsvRoundTrip) {
    const auto f = gaussian(-3, 7, 1);
    EXPECT_EQ(f.hi(), 3);
    EXPECT_EQ(f.at(-4), cplx{});
    EXPECT_EQ(f.shifted(5).at(2), f.at(-3));
    std::stringstream ss;
    f.write_csv(ss);
    const auto g = SequenceField::read_csv(ss);
    EXPECT_EQ(g.lo(), f.lo());
    EXPECT_EQ(g.values(), f.values());
    std::stringstream bad("index,re,im\n0,1,0\n2,1,0\n");
    EXPECT_THROW(SequenceField::read_csv(bad), std::runtime_error);
    EXPECT_THROW(norm_ratio(f, {SequenceField{}}), std::invalid_argument);
    const auto s = SequenceField::delta(-2) + SequenceField::delta(3);
    EXPECT_EQ(s.lo(), -2);
    EXPECT_EQ(s.size(), 6u);
    EXPECT_DOUBLE_EQ(s.l2_norm(), std::sqrt(2.0));
}

TEST(MultilinearAverage, Examples) {
    // d = 1, M = 1: a single term f1(n-1) f2(n-1).
    const auto f1 = gaussian(0, 5, 2), f2 = gaussian(-2, 9, 3);
    const auto a = multilinear_average({1}, {f1, f2});
    for (i64 n = -5; n <= 10; ++n) EXPECT_EQ(a.at(n), f1.at(n - 1) * f2.at(n - 1));
    // Interior of a common run of ones averages to 1.
    const auto one = SequenceField::ones(-1000, 2001);
    const auto b = multilinear_average({3, 5}, {one, one, one});
    EXPECT_NEAR(b.at(0).real(), 1.0, 1e-15);
    // d = 1, M = 2, delta inputs: value 1/2 at n = 1 only.
    const auto c = multilinear_average({2}, {SequenceField::delta(0), SequenceField::delta(0)});
    for (i64 n = -5; n <= 10; ++n) EXPECT_EQ(c.at(n), n == 1 ? cplx{0.5} : cplx{});
    EXPECT_THROW(multilinear_average({0}, {f1, f2}), std::invalid_argument);
    EXPECT_THROW(multilinear_average({1, 1}, {f1, f2}), std::invalid_argument);
    EXPECT_TRUE(multilinear_average({2}, {f1, SequenceField{}}).empty());
}

TEST(MultilinearAverage, MatchesDirectSum) {
    std::uint64_t seed = 10;
    for (const auto& M : std::vector<ScaleTuple>{{1}, {3}, {7}, {2, 3}, {4, 1}, {2, 2, 3}}) {
        std::vector<SequenceField> f;
        for (std::size_t j = 0; j <= M.size(); ++j) f.push_back(gaussian(i64(3 * j) - 4, 6 + j, seed++));
        const auto got = multilinear_average(M, f);
        std::vector<oracle::Seq> fs;
        for (const auto& g : f) fs.push_back(to_seq(g));
        expect_matches(got, oracle::average(std::vector<long>(M.begin(), M.end()), fs, -20, 120), -20, 120);
    }
}

TEST(MultilinearAverage, OutputSupportIsExactHull) {
    // Support endpoints are attained by some nonzero term for generic inputs.
    const auto f1 = gaussian(0, 4, 5), f2 = gaussian(1, 6, 6);
    const auto a = multilinear_average({4}, {f1, f2});
    ASSERT_FALSE(a.empty());
    EXPECT_NE(a.at(a.lo()), cplx{});
    EXPECT_NE(a.at(a.hi()), cplx{});
    // Disjoint reach gives an empty output.
    EXPECT_TRUE(multilinear_average({1}, {SequenceField::delta(0), SequenceField::delta(50)}).empty());
}

TEST(MultilinearAverage, Multilinearity) {
    std::mt19937_64 gen(7);
    std::normal_distribution<double> g;
    const ScaleTuple M{3, 2};
    std::vector<SequenceField> f{gaussian(0, 8, 1), gaussian(-2, 9, 2), gaussian(-5, 20, 3)};
    const auto base = multilinear_average(M, f);
    for (std::size_t slot = 0; slot < f.size(); ++slot) {
        const cplx alpha{g(gen), g(gen)}, beta{g(gen), g(gen)};
        const auto h = gaussian(f[slot].lo(), f[slot].size(), 100 + slot);
        auto fh = f, mix = f;
        fh[slot] = h;
        mix[slot] = f[slot].scaled(alpha) + h.scaled(beta);
        const auto lhs = multilinear_average(M, mix);
        const auto rhs = base.scaled(alpha) + multilinear_average(M, fh).scaled(beta);
        for (i64 n = lhs.lo(); n <= lhs.hi(); ++n)
            EXPECT_LE(std::abs(lhs.at(n) - rhs.at(n)), 1e-10 * std::max(1.0, std::abs(rhs.at(n))));
    }
}

TEST(MultilinearAverage, ShiftEquivarianceAndSupBound) {
    const ScaleTuple M{4, 3};
    std::vector<SequenceField> f{gaussian(0, 8, 11), gaussian(-2, 9, 12), gaussian(-5, 20, 13)};
    const auto base = multilinear_average(M, f);
    for (i64 s : {-7, 1, 1000}) {
        std::vector<SequenceField> g;
        for (const auto& x : f) g.push_back(x.shifted(s));
        const auto out = multilinear_average(M, g);
        EXPECT_EQ(out.lo(), base.lo() + s);
        EXPECT_EQ(out.values(), base.values());
    }
    double bound = 1;
    for (const auto& x : f) bound *= x.linf_norm();
    EXPECT_LE(base.linf_norm(), bound);
}

TEST(Admissibility, Examples) {
    for (int K : {1, 2, 3}) EXPECT_TRUE(admissibility_check(3, K, {8, 8, 8}, 1.0));
    EXPECT_FALSE(admissibility_check(2, 2, {1, 100}, 10.0));
    EXPECT_TRUE(admissibility_check(2, 1, {1, 100}, 1.0));
    EXPECT_TRUE(admissibility_check(2, 2, {10, 100}, 10.0));
    EXPECT_THROW(admissibility_check(2, 3, {1, 1}, 1.0), std::invalid_argument);
}

TEST(Admissibility, MatchesSubsetSearch) {
    // Oracle: try every K-subset of coordinates.
    std::mt19937_64 gen(3);
    std::uniform_int_distribution<int> u(1, 40);
    for (int trial = 0; trial < 300; ++trial) {
        const int d = 1 + trial % 4;
        for (int K = 1; K <= d; ++K) {
            ScaleTuple t;
            for (int j = 0; j < d; ++j) t.push_back(u(gen));
            const double C = 1.0 + (trial % 5);
            const i64 mx = *std::max_element(t.begin(), t.end());
            bool want = false;
            for (unsigned mask = 0; mask < (1u << d); ++mask) {
                if (__builtin_popcount(mask) != K) continue;
                bool ok = true;
                for (int j = 0; j < d; ++j)
                    if ((mask >> j & 1u) && double(mx) > C * double(t[j])) ok = false;
                want = want || ok;
            }
            EXPECT_EQ(admissibility_check(d, K, t, C), want);
        }
    }
}

TEST(ScaleFamily, ConstructionAndCondition) {
    EXPECT_THROW(ScaleFamily(2, 2, {{1, 100}}, 10.0), std::invalid_argument);
    EXPECT_THROW(ScaleFamily(2, 1, {}, 1.0), std::invalid_argument);
    const auto fam = ScaleFamily::dyadic(2, 2, 3, 2.0);
    for (const auto& t : fam.scales()) EXPECT_TRUE(admissibility_check(2, 2, t, 2.0));
    EXPECT_EQ(fam.scales().size(), 4u + 6u);  // diagonal plus one-step neighbours
    // K > 2d/(d+4): always for d <= 3, K = 1; fails for d = 8, K = 1.
    for (int d = 1; d <= 3; ++d) EXPECT_TRUE(ScaleFamily::dyadic(d, 1, 1, 2.0).theorem4_condition());
    EXPECT_TRUE(ScaleFamily::diagonal(8, 0).theorem4_condition());
    EXPECT_FALSE(ScaleFamily(8, 1, {ScaleTuple(8, 1)}, 1.0).theorem4_condition());
    EXPECT_TRUE(ScaleFamily(8, 2, {ScaleTuple(8, 1)}, 1.0).theorem4_condition());
    EXPECT_FALSE(ScaleFamily(4, 1, {ScaleTuple(4, 1)}, 1.0).theorem4_condition());  // 2d/(d+4) = 1
}

TEST(MaximalFunction, Examples) {
    const std::vector<SequenceField> f{gaussian(0, 10, 1), gaussian(-30, 40, 2)};
    const auto single = maximal_function(ScaleFamily(1, 1, {{4}}, 1.0), f);
    const auto a = multilinear_average({4}, f);
    for (i64 n = a.lo(); n <= a.hi(); ++n) {
        EXPECT_DOUBLE_EQ(single.sup.at(n).real(), std::abs(a.at(n)));
        EXPECT_DOUBLE_EQ(single.square.at(n).real(), std::abs(a.at(n)));
    }
    // Delta inputs, family {1, 2}: A_1 = delta_1, A_2 = delta_1 / 2.
    const auto d = maximal_function(ScaleFamily(1, 1, {{1}, {2}}, 2.0), {SequenceField::delta(0), SequenceField::delta(0)});
    for (i64 n = -3; n <= 6; ++n) {
        EXPECT_EQ(d.sup.at(n).real(), n == 1 ? 1.0 : 0.0);
        EXPECT_NEAR(d.square.at(n).real(), n == 1 ? std::sqrt(1.25) : 0.0, 1e-15);
    }
}

TEST(MaximalFunction, DominatesEachScale) {
    std::vector<SequenceField> f;
    for (int j = 0; j < 3; ++j) f.push_back(gaussian(0, 30, 40 + j).abs());
    const auto fam = ScaleFamily::dyadic(2, 1, 3, 8.0);
    const auto T = maximal_function(fam, f);
    for (const auto& M : fam.scales()) {
        const auto a = multilinear_average(M, f);
        for (i64 n = a.lo(); n <= a.hi(); ++n) {
            EXPECT_GE(T.sup.at(n).real(), std::abs(a.at(n)));
            EXPECT_GE(T.square.at(n).real() * (1 + 1e-15), T.sup.at(n).real());
        }
    }
}

TEST(TmBilinear, ExamplesAndOracle) {
    const auto f1 = gaussian(-4, 12, 1), f2 = gaussian(-40, 90, 2);
    const auto t1 = tm_bilinear(f1, f2, 1);
    for (i64 n = -10; n <= 20; ++n) EXPECT_NEAR(t1.at(n).real(), std::abs(f1.at(n - 1) * f2.at(n - 1)), 1e-15);
    for (i64 M : {1, 2, 4, 8})
        for (int sign : {1, -1}) {
            const auto got = tm_bilinear(f1, f2, M, sign > 0 ? DyadicSide::positive : DyadicSide::negative);
            for (const auto& v : got.values()) {
                EXPECT_GE(v.real(), 0.0);
                EXPECT_EQ(v.imag(), 0.0);
            }
            expect_matches(got, oracle::tm(to_seq(f1), to_seq(f2), M, sign, -100, 400), -100, 400);
        }
    EXPECT_THROW(tm_bilinear(f1, f2, 3), std::invalid_argument);
}

TEST(KernelTransform, ExamplesAndOracle) {
    const auto f1 = gaussian(-5, 11, 3), f2 = gaussian(-20, 30, 4);
    for (const auto& K : {Kernel::inverse(), Kernel::abs_inverse()}) {
        const auto got = kernel_transform(f1, f2, K);
        const long R = kernel_truncation_radius(f1, f2);
        // One more ring of m contributes nothing.
        expect_matches(got, oracle::kernel(to_seq(f1), to_seq(f2), K.value, R + 3, -100, 200), -100, 200);
    }
    // f2 beyond every reachable n - m^2: empty sum.
    EXPECT_TRUE(kernel_transform(SequenceField::delta(0), SequenceField::delta(5), Kernel::inverse()).empty());
    Kernel bad{"bad", [](i64) { return 1.0; }, 1.0};
    EXPECT_THROW(kernel_transform(f1, f2, bad), std::invalid_argument);
}

TEST(KernelTransform, DyadicMajorisationAndBilinearity) {
    const auto f1 = gaussian(-8, 40, 5), f2 = gaussian(-60, 100, 6);
    for (const auto& K : {Kernel::inverse(), Kernel::abs_inverse()}) {
        const auto T = kernel_transform(f1, f2, K);
        const auto maj = dyadic_majorant(f1, f2, K.envelope);
        for (i64 n = T.lo(); n <= T.hi(); ++n) EXPECT_LE(std::abs(T.at(n)), maj.at(n).real() * (1 + 1e-12) + 1e-300);
    }
    const cplx alpha{0.3, -1.2};
    const auto h = gaussian(-8, 40, 9);
    const auto lhs = kernel_transform(f1.scaled(alpha) + h, f2, Kernel::inverse());
    const auto rhs = kernel_transform(f1, f2, Kernel::inverse()).scaled(alpha) + kernel_transform(h, f2, Kernel::inverse());
    for (i64 n = lhs.lo(); n <= lhs.hi(); ++n) EXPECT_LE(std::abs(lhs.at(n) - rhs.at(n)), 1e-10 * std::max(1.0, std::abs(rhs.at(n))));
    // Shift equivariance.
    const auto a = kernel_transform(f1, f2, Kernel::inverse());
    const auto b = kernel_transform(f1.shifted(17), f2.shifted(17), Kernel::inverse());
    EXPECT_EQ(b.lo(), a.lo() + 17);
    EXPECT_EQ(b.values(), a.values());
}

TEST(OperatorNorm, SingleScaleIsFiniteAndStable) {
    NormEstimateOptions opt;
    opt.trials = 4;
    const auto e = maximal_norm_estimate(ScaleFamily(1, 1, {{1}}, 1.0), opt);
    EXPECT_TRUE(std::isfinite(e.best_ratio));
    EXPECT_NEAR(e.best_ratio, 1.0, 1e-15);  // product of shifts: |f1 f2| <= |f1|_2 |f2|_2
    EXPECT_TRUE(e.stable);
    EXPECT_EQ(e.per_window.size(), 7u);
    opt.trials = 0;
    EXPECT_THROW(maximal_norm_estimate(ScaleFamily(1, 1, {{1}}, 1.0), opt), std::invalid_argument);
    opt.trials = 1;
    opt.window_log2 = {15};
    EXPECT_THROW(maximal_norm_estimate(ScaleFamily(1, 1, {{1}}, 1.0), opt), std::invalid_argument);
}

TEST(OperatorNorm, GrowingWindowStability) {
    for (int d : {1, 2}) {
        const auto fam = ScaleFamily::dyadic(d, 1, d == 1 ? 5 : 3, 8.0);
        const auto e = maximal_norm_estimate(fam);
        EXPECT_TRUE(e.theorem4_condition);
        EXPECT_LT(e.stability, 2.0);
        EXPECT_TRUE(e.stable);
        for (const auto& [w, r] : e.per_window_random) EXPECT_LE(r, e.best_ratio);
    }
    const auto k = kernel_norm_estimate(Kernel::inverse());
    EXPECT_TRUE(k.stable);
}

TEST(OperatorNorm, DeterministicAcrossThreads) {
    NormEstimateOptions a, b;
    a.window_log2 = b.window_log2 = {8, 9};
    a.trials = b.trials = 6;
    b.threads = 3;
    const auto x = tm_norm_estimate(8, a), y = tm_norm_estimate(8, b);
    EXPECT_EQ(x.to_json().dump(), y.to_json().dump());
}

TEST(OperatorNorm, ViolatingFamilyIsFlagged) {
    NormEstimateOptions opt;
    opt.window_log2 = {6, 7};
    opt.trials = 1;
    const auto e = maximal_norm_estimate(ScaleFamily(4, 1, {ScaleTuple(4, 1), ScaleTuple{2, 1, 1, 1}}, 2.0), opt);
    EXPECT_FALSE(e.theorem4_condition);
    EXPECT_FALSE(e.stable);
}

TEST(TmDecay, Audit) {
    const auto a = tm_decay_audit({4, 8, 16, 32, 64}, 10, 10);
    EXPECT_TRUE(a.pass) << a.details.dump();
    EXPECT_LE(a.constant("slope"), -0.35);
    // The aligned delta witness gives exactly 1/M.
    for (std::size_t i = 0; i < a.rows(); ++i) EXPECT_GE(a.lhs[i], 1.0 / a.parameter_grid[i][0]);
}

TEST(TorusMultilinear, Examples) {
    const auto one = CoefficientField::delta0(LatticeBox::cube(1, 0));
    const auto a = torus_multilinear_check({one, one, one}, 4.0 / 3.0);
    EXPECT_TRUE(a.pass);
    EXPECT_NEAR(a.constant("ratio"), 1.0, 1e-14);
    // M = 1, p = 1: Cauchy-Schwarz.
    const auto f = CoefficientField::random_unit(LatticeBox::cube(1, 3), 1);
    const auto g = CoefficientField::random_unit(LatticeBox::cube(1, 5), 2);
    const auto b = torus_multilinear_check({f, g}, 1.0);
    EXPECT_TRUE(b.pass);
    EXPECT_LE(b.constant("ratio"), 1.0);
    EXPECT_THROW(torus_multilinear_check({f, g}, 1.5), std::invalid_argument);
    EXPECT_THROW(torus_multilinear_check({f}, 1.0), std::invalid_argument);
}

TEST(TorusMultilinear, MatchesFineRiemannSum) {
    // M = 1, p = 1: mean of |F1 F2| on a 20000-point grid.
    const auto f = CoefficientField::random_unit(LatticeBox::cube(1, 3), 5);
    const auto g = CoefficientField::random_unit(LatticeBox::cube(1, 4), 6);
    const int R = 20000;
    double s = 0;
    for (int r = 0; r < R; ++r) {
        const double x = double(r) / R;
        s += std::abs(oracle::naive_exp_sum_1d(f.coeffs(), 3, x, 0.0) * oracle::naive_exp_sum_1d(g.coeffs(), 4, x, 0.0));
    }
    const auto a = torus_multilinear_check({f, g}, 1.0);
    EXPECT_TRUE(a.details["converged"]);
    EXPECT_NEAR(a.lhs.back(), s / R, 1e-5 * s / R);
    EXPECT_GE(a.rows(), 2u);
}

TEST(TorusMultilinear, RandomDegreeFourAtEndpoint) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        std::vector<CoefficientField> F;
        for (int j = 0; j < 3; ++j) F.push_back(CoefficientField::random_unit(LatticeBox::cube(1, 4), 10 * seed + j));
        const auto a = torus_multilinear_check(F, 4.0 / 3.0);
        EXPECT_TRUE(a.pass) << a.constant("ratio");
        EXPECT_LE(a.constant("ratio"), 1.0 + 1e-9);
    }
    // Three-fold product at p = 3/2.
    std::vector<CoefficientField> F;
    for (int j = 0; j < 4; ++j) F.push_back(CoefficientField::random_unit(LatticeBox::cube(1, 1), 50 + j));
    EXPECT_TRUE(torus_multilinear_check(F, 1.5, 2).pass);
}
