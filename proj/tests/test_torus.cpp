#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "paralab/grid_io.hpp"
#include "paralab/torus.hpp"

using namespace paralab;

TEST(LatticeBox, EnumeratesLexicographically) {
    const auto b1 = build_lattice_box(1, {2});
    EXPECT_EQ(b1.size(), 5u);
    std::vector<int> got;
    for (const auto& p : b1.points()) got.push_back(p[0]);
    EXPECT_EQ(got, (std::vector<int>{-2, -1, 0, 1, 2}));

    EXPECT_EQ(build_lattice_box(2, {1, 1}).size(), 9u);
    EXPECT_EQ(build_lattice_box(2, {2, 3}).size(), 35u);

    const auto b = build_lattice_box(2, {2, 3});
    EXPECT_EQ(b.points(), oracle::box_points({2, 3}));
    for (std::size_t i = 0; i < b.size(); ++i) EXPECT_EQ(b.index_of(b.point(i)), i);
}

TEST(LatticeBox, RejectsBadInput) {
    EXPECT_THROW(build_lattice_box(2, {1}), std::invalid_argument);
    EXPECT_THROW(build_lattice_box(1, {-1}), std::invalid_argument);
    EXPECT_THROW(build_lattice_box(0, {}), std::invalid_argument);
}

TEST(CoefficientField, NormaliseGivesUnitMass) {
    const auto box = LatticeBox::cube(2, 3);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto f = CoefficientField::random_unit(box, seed);
        EXPECT_NEAR(f.l2_norm_sq(), 1.0, 4e-16);
    }
    EXPECT_THROW(CoefficientField(box).normalized(), std::domain_error);
}

TEST(EvalExpSum, Examples) {
    const auto box = LatticeBox::cube(2, 2);
    const auto delta = CoefficientField::delta0(box);
    EXPECT_EQ(eval_exp_sum(delta, TorusPoint({0.3, 0.7}, 0.11)), cplx(1.0, 0.0));

    const auto ones = CoefficientField::ones(LatticeBox::cube(2, 3));
    EXPECT_NEAR(std::abs(eval_exp_sum(ones, TorusPoint({0.0, 0.0}, 0.0)) - 49.0), 0.0, 1e-12);

    const auto ones1 = CoefficientField::ones(LatticeBox::cube(1, 1));
    const cplx v = eval_exp_sum(ones1, TorusPoint({0.5}, 0.0));
    EXPECT_NEAR(v.real(), -1.0, 1e-15);
    EXPECT_NEAR(v.imag(), 0.0, 1e-15);
}

TEST(EvalExpSum, MatchesNaiveOneDimensionalSum) {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto field = CoefficientField::random_unit(LatticeBox::cube(1, 6), 3);
    for (int i = 0; i < 50; ++i) {
        const double x = u(gen), t = u(gen);
        const cplx got = eval_exp_sum(field, TorusPoint({x}, t));
        const cplx want = oracle::naive_exp_sum_1d(field.coeffs(), 6, x, t);
        EXPECT_LT(std::abs(got - want), 1e-13);
    }
}

TEST(SampleGrid, Examples) {
    const auto box = LatticeBox::cube(1, 1);
    const auto ones = CoefficientField::ones(box);
    const auto g = sample_grid(ones, {8, 16});
    const std::vector<int> node{4, 0};
    EXPECT_NEAR(g.samples[g.flat_index(node)].real(), -1.0, 1e-14);
    EXPECT_NEAR(g.samples[g.flat_index(node)].imag(), 0.0, 1e-14);

    const auto gd = sample_grid(CoefficientField::delta0(LatticeBox::cube(2, 2)), {5, 7, 9});
    for (const auto& s : gd.samples) EXPECT_NEAR(std::abs(s - cplx(1.0, 0.0)), 0.0, 1e-14);
}

TEST(SampleGrid, ParsevalOnAliasingFreeGrid) {
    for (int d = 1; d <= 2; ++d)
        for (int n = 1; n <= 3; ++n) {
            const auto box = LatticeBox::cube(d, n);
            const auto f = CoefficientField::random_unit(box, 100 + 10 * d + n);
            const auto g = sample_grid(f, aliasing_free_resolution(box, 1));
            const auto l2 = lp_norm(g, 2.0);
            EXPECT_TRUE(l2.exact);
            EXPECT_NEAR(l2.value * l2.value, 1.0, 1e-10);
        }
}

TEST(SampleGrid, FftAndDirectPathsAgreeWithPointwise) {
    const auto box = build_lattice_box(2, {2, 3});
    const auto f = CoefficientField::random_unit(box, 42);
    const std::vector<int> res{7, 9, 31};
    const auto gf = sample_grid(f, res, {GridMethod::fft});
    const auto gdirect = sample_grid(f, res, {GridMethod::direct});
    double scale = 0;
    for (const auto& s : gdirect.samples) scale = std::max(scale, std::abs(s));
    for (std::size_t i = 0; i < gf.samples.size(); ++i)
        EXPECT_LE(std::abs(gf.samples[i] - gdirect.samples[i]), 1e-9 * scale);

    std::mt19937_64 gen(9);
    for (int i = 0; i < 100; ++i) {
        const std::vector<int> node{static_cast<int>(gen() % 7), static_cast<int>(gen() % 9),
                                    static_cast<int>(gen() % 31)};
        const cplx want = eval_exp_sum(f, gf.node_point(node));
        EXPECT_LE(relative_error(gf.samples[gf.flat_index(node)], want, 1e-3), 1e-9);
    }
}

TEST(SampleGrid, MemoryCapAndBadResolution) {
    const auto f = CoefficientField::ones(LatticeBox::cube(1, 1));
    EXPECT_THROW(sample_grid(f, {1024, 1024}, {GridMethod::automatic, 1000}), std::length_error);
    EXPECT_THROW(sample_grid(f, {0, 4}), std::invalid_argument);
    EXPECT_THROW(sample_grid(f, {4}), std::invalid_argument);
}

TEST(LpNorm, Examples) {
    const auto box = LatticeBox::cube(1, 1);
    const auto ones = CoefficientField::ones(box);
    // Brute-force count of (n1,n2,m1,m2) in {-1,0,1}^4 with equal sums and
    // equal sums of squares.
    const double count = oracle::even_moment({1}, ones.coeffs(), 2);
    EXPECT_DOUBLE_EQ(count, 15.0);
    const auto l4 = lp_norm_of(ones, 4.0);
    EXPECT_TRUE(l4.exact);
    EXPECT_NEAR(std::pow(l4.value, 4), 15.0, 15.0 * 1e-12);

    const auto rect = build_lattice_box(2, {2, 3});
    const auto l2 = lp_norm_of(CoefficientField::ones(rect), 2.0);
    EXPECT_NEAR(l2.value, std::sqrt(35.0), 1e-12);

    EXPECT_THROW(lp_norm_of(ones, 0.0), std::invalid_argument);
    EXPECT_THROW(lp_norm_of(ones, -1.0), std::invalid_argument);
}

TEST(LpNorm, EvenNormMatchesBruteForceCount) {
    struct Case {
        std::vector<int> radii;
        int k;
    };
    for (const auto& c : {Case{{1}, 2}, Case{{2}, 2}, Case{{2}, 3}, Case{{1, 1}, 2}, Case{{1, 1}, 3}, Case{{1, 2}, 2}}) {
        const LatticeBox box(static_cast<int>(c.radii.size()), c.radii);
        const auto f = CoefficientField::random_unit(box, 5);
        const double want = oracle::even_moment(c.radii, f.coeffs(), c.k);
        const double got = std::pow(lp_norm_of(f, 2.0 * c.k).value, 2.0 * c.k);
        EXPECT_NEAR(got, want, 1e-9 * want);
    }
}

TEST(LpNorm, NonEvenExponentIsTaggedEstimate) {
    const auto f = CoefficientField::random_unit(LatticeBox::cube(1, 2), 11);
    const auto l3 = lp_norm_of(f, 3.0);
    EXPECT_FALSE(l3.exact);
    EXPECT_LT(l3.refinement_delta, 1e-6);
    // Between the exact L^2 and L^4 norms.
    EXPECT_GE(l3.value, lp_norm_of(f, 2.0).value - 1e-12);
    EXPECT_LE(l3.value, lp_norm_of(f, 4.0).value + 1e-12);
}

TEST(LpNorm, TranslationInvariance) {
    const auto box = build_lattice_box(2, {2, 1});
    const auto f = CoefficientField::random_unit(box, 77);
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double p : {2.0, 4.0, 6.0}) {
        const double base = lp_norm_of(f, p).value;
        const std::vector<double> x0{u(gen), u(gen)};
        EXPECT_NEAR(lp_norm_of(f.modulated(x0), p).value, base, 1e-10 * base);
    }
    // Grid estimates for odd p are only invariant under shifts by grid nodes.
    const auto res = aliasing_free_resolution(box, 2);
    const std::vector<double> node_shift{3.0 / (4 * res[0]), 7.0 / (4 * res[1])};
    const double base3 = lp_norm_of(f, 3.0).value;
    EXPECT_NEAR(lp_norm_of(f.modulated(node_shift), 3.0).value, base3, 1e-10 * base3);
}

TEST(GridIo, RoundTripsBitExactly) {
    const auto f = CoefficientField::random_unit(build_lattice_box(2, {1, 2}), 3);
    const auto g = sample_grid(f, aliasing_free_resolution(f.box(), 1));
    const auto dir = std::filesystem::temp_directory_path() / "paralab_grid_io_test";
    std::filesystem::create_directories(dir);
    write_grid(g, dir / "grid");
    EXPECT_EQ(std::filesystem::file_size(dir / "grid.bin"), g.samples.size() * 16);
    const auto back = read_grid(dir / "grid");
    EXPECT_EQ(back.resolution, g.resolution);
    EXPECT_EQ(back.box, g.box);
    EXPECT_EQ(back.aliasing_free_for, g.aliasing_free_for);
    EXPECT_EQ(back.samples, g.samples);
    std::filesystem::remove_all(dir);
}
