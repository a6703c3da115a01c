#ifndef PARALAB_TORUS_HPP
#define PARALAB_TORUS_HPP

// Lattice boxes, coefficient fields and evaluation of the paraboloid
// exponential sum
//
//     F(x, t) = sum_{n in box} a_n e^{2 pi i (n.x + |n|^2 t)}
//
// pointwise, on uniform grids of T^{d+1}, and through L^p norms of the grid.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "paralab/fft.hpp"
#include "paralab/numeric.hpp"

namespace paralab {

/// Default ceiling on the number of complex samples a grid may hold (1 GiB).
inline constexpr std::size_t default_grid_cap = std::size_t{1} << 26;

class LatticeBox {
public:
    LatticeBox(int d, std::vector<int> radii) : d_(d), radii_(std::move(radii)) {
        if (d_ < 1) throw std::invalid_argument("LatticeBox: dimension must be >= 1");
        if (static_cast<int>(radii_.size()) != d_)
            throw std::invalid_argument("LatticeBox: expected " + std::to_string(d_) + " radii, got " +
                                        std::to_string(radii_.size()));
        size_ = 1;
        for (int r : radii_) {
            if (r < 0) throw std::invalid_argument("LatticeBox: negative radius");
            const auto side = static_cast<std::size_t>(2 * static_cast<std::int64_t>(r) + 1);
            if (size_ > std::numeric_limits<std::size_t>::max() / side)
                throw std::overflow_error("LatticeBox: cardinality overflows size_t");
            size_ *= side;
        }
    }

    /// The cube S_{d,N}.
    static LatticeBox cube(int d, int n) { return LatticeBox(d, std::vector<int>(static_cast<std::size_t>(std::max(d, 0)), n)); }

    int dimension() const { return d_; }
    const std::vector<int>& radii() const { return radii_; }
    int radius(int j) const { return radii_[static_cast<std::size_t>(j)]; }
    std::size_t size() const { return size_; }
    int side(int j) const { return 2 * radii_[static_cast<std::size_t>(j)] + 1; }

    /// sum_j N_j^2, the largest |n|^2 in the box.
    std::int64_t max_norm_sq() const {
        std::int64_t s = 0;
        for (int r : radii_) s += static_cast<std::int64_t>(r) * r;
        return s;
    }

    int max_radius() const { return *std::max_element(radii_.begin(), radii_.end()); }

    bool contains(std::span<const int> n) const {
        if (static_cast<int>(n.size()) != d_) return false;
        for (int j = 0; j < d_; ++j)
            if (std::abs(n[j]) > radii_[j]) return false;
        return true;
    }

    /// Lexicographic position; the first coordinate is the most significant.
    std::size_t index_of(std::span<const int> n) const {
        if (!contains(n)) throw std::out_of_range("LatticeBox: point outside box");
        std::size_t idx = 0;
        for (int j = 0; j < d_; ++j) idx = idx * static_cast<std::size_t>(side(j)) + static_cast<std::size_t>(n[j] + radii_[j]);
        return idx;
    }

    std::vector<int> point(std::size_t index) const {
        if (index >= size_) throw std::out_of_range("LatticeBox: index out of range");
        std::vector<int> n(static_cast<std::size_t>(d_));
        for (int j = d_ - 1; j >= 0; --j) {
            const auto s = static_cast<std::size_t>(side(j));
            n[j] = static_cast<int>(index % s) - radii_[j];
            index /= s;
        }
        return n;
    }

    /// Visits every point in lexicographic order as f(index, point).
    template <typename F>
    void for_each(F&& f) const {
        std::vector<int> n(static_cast<std::size_t>(d_));
        for (int j = 0; j < d_; ++j) n[j] = -radii_[j];
        for (std::size_t idx = 0; idx < size_; ++idx) {
            f(idx, std::span<const int>(n));
            for (int j = d_ - 1; j >= 0; --j) {
                if (++n[j] <= radii_[j]) break;
                n[j] = -radii_[j];
            }
        }
    }

    std::vector<std::vector<int>> points() const {
        std::vector<std::vector<int>> out;
        out.reserve(size_);
        for_each([&](std::size_t, std::span<const int> n) { out.emplace_back(n.begin(), n.end()); });
        return out;
    }

    bool operator==(const LatticeBox& o) const { return d_ == o.d_ && radii_ == o.radii_; }

private:
    int d_;
    std::vector<int> radii_;
    std::size_t size_ = 0;
};

inline LatticeBox build_lattice_box(int d, std::vector<int> radii) { return LatticeBox(d, std::move(radii)); }

inline std::int64_t norm_sq(std::span<const int> n) {
    std::int64_t s = 0;
    for (int v : n) s += static_cast<std::int64_t>(v) * v;
    return s;
}

/// Coefficients a_n on a lattice box, stored densely in lattice order.
class CoefficientField {
public:
    explicit CoefficientField(LatticeBox box) : box_(std::move(box)), a_(box_.size(), cplx{0.0, 0.0}) {}
    CoefficientField(LatticeBox box, std::vector<cplx> coeffs) : box_(std::move(box)), a_(std::move(coeffs)) {
        if (a_.size() != box_.size()) throw std::invalid_argument("CoefficientField: coefficient count != box size");
    }

    static CoefficientField ones(const LatticeBox& box) { return {box, std::vector<cplx>(box.size(), cplx{1.0, 0.0})}; }

    static CoefficientField delta0(const LatticeBox& box) {
        CoefficientField f(box);
        f.set(std::vector<int>(static_cast<std::size_t>(box.dimension()), 0), 1.0);
        return f;
    }

    /// Independent standard complex Gaussians, normalised to unit l2 mass.
    static CoefficientField random_unit(const LatticeBox& box, std::uint64_t seed) {
        std::mt19937_64 gen(seed);
        std::normal_distribution<double> g(0.0, 1.0);
        std::vector<cplx> a(box.size());
        for (auto& v : a) {
            const double re = g(gen);
            const double im = g(gen);
            v = {re, im};
        }
        return CoefficientField(box, std::move(a)).normalized();
    }

    const LatticeBox& box() const { return box_; }
    const std::vector<cplx>& coeffs() const { return a_; }
    std::vector<cplx>& coeffs() { return a_; }

    cplx at(std::span<const int> n) const { return box_.contains(n) ? a_[box_.index_of(n)] : cplx{}; }
    void set(std::span<const int> n, cplx v) { a_[box_.index_of(n)] = v; }
    void set(const std::vector<int>& n, cplx v) { set(std::span<const int>(n), v); }

    double l2_norm_sq() const {
        CompensatedSum s;
        for (const auto& v : a_) s.add(std::norm(v));
        return s.value();
    }

    CoefficientField normalized() const {
        const double n2 = l2_norm_sq();
        if (!(n2 > 0.0)) throw std::domain_error("CoefficientField: cannot normalise the zero field");
        const double inv = 1.0 / std::sqrt(n2);
        CoefficientField out = *this;
        for (auto& v : out.a_) v *= inv;
        return out;
    }

    /// a_n -> a_n e^{2 pi i n.x0}.
    CoefficientField modulated(std::span<const double> x0) const {
        if (static_cast<int>(x0.size()) != box_.dimension())
            throw std::invalid_argument("CoefficientField::modulated: dimension mismatch");
        CoefficientField out = *this;
        box_.for_each([&](std::size_t idx, std::span<const int> n) {
            double ph = 0.0;
            for (std::size_t j = 0; j < n.size(); ++j) ph += frac_mul(x0[j], n[j]);
            out.a_[idx] *= unit_phase(ph);
        });
        return out;
    }

private:
    LatticeBox box_;
    std::vector<cplx> a_;
};

/// A point (x, t) of T^d x T with every coordinate reduced into [0, 1).
struct TorusPoint {
    std::vector<double> x;
    double t = 0.0;

    TorusPoint() = default;
    TorusPoint(std::vector<double> xs, double tt) : x(std::move(xs)), t(mod1(tt)) {
        for (auto& v : x) v = mod1(v);
    }
};

/// Direct compensated evaluation of F at one point.
inline cplx eval_exp_sum(const CoefficientField& field, const TorusPoint& p) {
    const auto& box = field.box();
    if (static_cast<int>(p.x.size()) != box.dimension())
        throw std::invalid_argument("eval_exp_sum: point dimension mismatch");
    CompensatedComplexSum acc;
    const auto& a = field.coeffs();
    box.for_each([&](std::size_t idx, std::span<const int> n) {
        if (a[idx] == cplx{}) return;
        double ph = frac_mul(p.t, static_cast<double>(norm_sq(n)));
        for (std::size_t j = 0; j < n.size(); ++j) ph += frac_mul(p.x[j], n[j]);
        acc.add(a[idx] * unit_phase(ph));
    });
    return acc.value();
}

/// Smallest resolution on which equal-weight averaging integrates |F|^{2k}
/// exactly: R_j = 2k N_j + 1 in space and R_t = 2k sum_j N_j^2 + 1 in time.
inline std::vector<int> aliasing_free_resolution(const LatticeBox& box, int k) {
    if (k < 1) throw std::invalid_argument("aliasing_free_resolution: k must be >= 1");
    std::vector<int> r;
    for (int n : box.radii()) r.push_back(2 * k * n + 1);
    const std::int64_t rt = 2 * static_cast<std::int64_t>(k) * box.max_norm_sq() + 1;
    if (rt > std::numeric_limits<int>::max()) throw std::overflow_error("aliasing_free_resolution: time extent overflows");
    r.push_back(static_cast<int>(rt));
    return r;
}

/// Largest k for which the resolution is aliasing free for |F|^{2k}; 0 if none.
inline int aliasing_free_order(const LatticeBox& box, std::span<const int> res) {
    int best = std::numeric_limits<int>::max();
    for (int j = 0; j < box.dimension(); ++j) {
        if (box.radius(j) == 0) continue;
        best = std::min(best, (res[j] - 1) / (2 * box.radius(j)));
    }
    const std::int64_t m = box.max_norm_sq();
    if (m > 0) best = static_cast<int>(std::min<std::int64_t>(best, (res.back() - 1) / (2 * m)));
    if (best == std::numeric_limits<int>::max()) best = 1 << 20;  // constant field: every grid is exact
    return best;
}

/// Samples of F on the uniform grid (j_1/R_1, ..., j_d/R_d, j_t/R_t), stored
/// row-major with the time index fastest.
struct GridField {
    LatticeBox box;
    std::vector<int> resolution;
    std::vector<cplx> samples;
    std::optional<int> aliasing_free_for;  // even exponent 2k integrated exactly
    double coefficient_l2_sq = 0.0;

    std::size_t flat_index(std::span<const int> node) const {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < resolution.size(); ++i)
            idx = idx * static_cast<std::size_t>(resolution[i]) + static_cast<std::size_t>(node[i]);
        return idx;
    }

    TorusPoint node_point(std::span<const int> node) const {
        std::vector<double> x;
        for (std::size_t j = 0; j + 1 < resolution.size(); ++j) x.push_back(static_cast<double>(node[j]) / resolution[j]);
        return {std::move(x), static_cast<double>(node.back()) / resolution.back()};
    }
};

enum class GridMethod { automatic, fft, direct };

struct GridOptions {
    GridMethod method = GridMethod::automatic;
    std::size_t memory_cap = default_grid_cap;
};

inline std::size_t checked_grid_size(std::span<const int> res, std::size_t cap) {
    std::size_t total = 1;
    for (int r : res) {
        if (r < 1) throw std::invalid_argument("sample_grid: resolution entries must be >= 1");
        if (total > cap / static_cast<std::size_t>(r))
            throw std::length_error("sample_grid: grid exceeds the configured memory cap");
        total *= static_cast<std::size_t>(r);
    }
    return total;
}

inline GridField sample_grid(const CoefficientField& field, std::vector<int> resolution, GridOptions opt = {}) {
    const auto& box = field.box();
    if (static_cast<int>(resolution.size()) != box.dimension() + 1)
        throw std::invalid_argument("sample_grid: resolution must have d+1 entries");
    const std::size_t total = checked_grid_size(resolution, opt.memory_cap);

    GridField g{box, resolution, {}, std::nullopt, field.l2_norm_sq()};
    const int order = aliasing_free_order(box, resolution);
    if (order >= 1) g.aliasing_free_for = 2 * order;

    GridMethod method = opt.method;
    if (method == GridMethod::automatic)
        method = (total * box.size() <= 4096) ? GridMethod::direct : GridMethod::fft;

    const int d = box.dimension();
    if (method == GridMethod::fft) {
        // Folding frequencies modulo the resolution is exact at grid nodes.
        g.samples.assign(total, cplx{});
        const auto& a = field.coeffs();
        std::vector<int> node(static_cast<std::size_t>(d + 1));
        box.for_each([&](std::size_t idx, std::span<const int> n) {
            for (int j = 0; j < d; ++j) node[j] = static_cast<int>(((n[j] % resolution[j]) + resolution[j]) % resolution[j]);
            node[d] = static_cast<int>(norm_sq(n) % resolution[d]);
            g.samples[g.flat_index(node)] += a[idx];
        });
        fft_inplace(g.samples, resolution, FftSign::backward);
    } else {
        g.samples.resize(total);
        std::vector<int> node(static_cast<std::size_t>(d + 1), 0);
        for (std::size_t i = 0; i < total; ++i) {
            g.samples[i] = eval_exp_sum(field, g.node_point(node));
            for (int j = d; j >= 0; --j) {
                if (++node[j] < resolution[j]) break;
                node[j] = 0;
            }
        }
    }
    return g;
}

struct LpNorm {
    double value = 0.0;
    bool exact = false;            // true when the grid integrates |F|^p exactly
    double refinement_delta = 0.0; // |change| under resolution doubling; 0 when exact
};

/// (mean over the grid of |F|^p)^{1/p}.
inline LpNorm lp_norm(const GridField& g, double p) {
    if (!(p > 0.0)) throw std::invalid_argument("lp_norm: p must be positive");
    const double rp = std::round(p);
    const bool even = (rp == p) && (static_cast<long>(rp) % 2 == 0);
    std::vector<double> powers(g.samples.size());
    for (std::size_t i = 0; i < g.samples.size(); ++i) {
        const double m2 = std::norm(g.samples[i]);
        if (even) {
            double v = 1.0;
            for (long e = 0; e < static_cast<long>(rp) / 2; ++e) v *= m2;
            powers[i] = v;
        } else {
            powers[i] = std::pow(m2, p / 2.0);
        }
    }
    const double mean = pairwise_sum(powers) / static_cast<double>(powers.size());
    LpNorm out;
    out.value = std::pow(mean, 1.0 / p);
    out.exact = even && g.aliasing_free_for && *g.aliasing_free_for >= static_cast<int>(rp);
    return out;
}

/// L^p norm of F: exact on the aliasing-free grid for even p, otherwise a
/// grid estimate at 4x the p = 4 aliasing bound with the change under one
/// doubling reported as an error proxy.
inline LpNorm lp_norm_of(const CoefficientField& field, double p, GridOptions opt = {}) {
    if (!(p > 0.0)) throw std::invalid_argument("lp_norm: p must be positive");
    const double rp = std::round(p);
    if (rp == p && static_cast<long>(rp) % 2 == 0) {
        const int k = static_cast<int>(rp) / 2;
        return lp_norm(sample_grid(field, aliasing_free_resolution(field.box(), k), opt), p);
    }
    auto res = aliasing_free_resolution(field.box(), 2);
    for (auto& r : res) r *= 4;
    const LpNorm coarse = lp_norm(sample_grid(field, res, opt), p);
    for (auto& r : res) r *= 2;
    LpNorm fine = lp_norm(sample_grid(field, res, opt), p);
    fine.exact = false;
    fine.refinement_delta = std::abs(fine.value - coarse.value);
    return fine;
}

}  // namespace paralab

#endif  // PARALAB_TORUS_HPP
