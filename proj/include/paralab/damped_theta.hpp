#ifndef PARALAB_DAMPED_THETA_HPP
#define PARALAB_DAMPED_THETA_HPP

// Representation counts recovered from the damped theta function
//
//     F(x, t + i eps) = sum_{n in box} e^{-2 pi eps |n|^2} e^{2 pi i (n.x + |n|^2 t)},
//
// whose k-th power has Fourier coefficient e^{-2 pi eps m} |S_k(l, m)| at
// (l, m). Sampling, the discrete transform and the undamping run in MPFR at a
// precision covering the factor e^{2 pi eps m_max}, so the recovered counts do
// not depend on eps.

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "paralab/ledger.hpp"
#include "paralab/numeric.hpp"
#include "paralab/torus.hpp"

namespace paralab {

namespace detail {

/// Flat array of MPFR complex numbers (re at 2i, im at 2i+1); owns its limbs.
class MpComplexArray {
public:
    MpComplexArray(std::size_t n, mpfr_prec_t prec) : v_(2 * n) {
        for (auto& x : v_) mpfr_init2(&x, prec), mpfr_set_zero(&x, 1);
    }
    ~MpComplexArray() {
        for (auto& x : v_) mpfr_clear(&x);
    }
    MpComplexArray(const MpComplexArray&) = delete;
    MpComplexArray& operator=(const MpComplexArray&) = delete;

    mpfr_ptr re(std::size_t i) { return &v_[2 * i]; }
    mpfr_ptr im(std::size_t i) { return &v_[2 * i + 1]; }
    std::size_t size() const { return v_.size() / 2; }

private:
    std::vector<__mpfr_struct> v_;
};

class MpScratch {
public:
    explicit MpScratch(mpfr_prec_t prec) {
        for (auto* x : {a, b, c, d}) mpfr_init2(x, prec);
    }
    ~MpScratch() {
        for (auto* x : {a, b, c, d}) mpfr_clear(x);
    }
    MpScratch(const MpScratch&) = delete;
    MpScratch& operator=(const MpScratch&) = delete;
    mpfr_t a, b, c, d;
};

/// (zr, zi) += (xr, xi)(yr, yi).
inline void mp_mul_add(mpfr_ptr zr, mpfr_ptr zi, mpfr_srcptr xr, mpfr_srcptr xi, mpfr_srcptr yr, mpfr_srcptr yi,
                       MpScratch& s) {
    mpfr_mul(s.a, xi, yi, MPFR_RNDN);
    mpfr_sub(zr, zr, s.a, MPFR_RNDN);
    mpfr_fma(zr, xr, yr, zr, MPFR_RNDN);
    mpfr_fma(zi, xr, yi, zi, MPFR_RNDN);
    mpfr_fma(zi, xi, yr, zi, MPFR_RNDN);
}

/// (xr, xi) *= (yr, yi).
inline void mp_mul(mpfr_ptr xr, mpfr_ptr xi, mpfr_srcptr yr, mpfr_srcptr yi, MpScratch& s) {
    mpfr_mul(s.a, xr, yr, MPFR_RNDN);
    mpfr_mul(s.b, xi, yi, MPFR_RNDN);
    mpfr_mul(s.c, xr, yi, MPFR_RNDN);
    mpfr_mul(s.d, xi, yr, MPFR_RNDN);
    mpfr_sub(xr, s.a, s.b, MPFR_RNDN);
    mpfr_add(xi, s.c, s.d, MPFR_RNDN);
}

/// e^{-2 pi i r / R} for r = 0..R-1.
inline void mp_roots(MpComplexArray& out, int R, mpfr_prec_t prec) {
    mpfr_t ang;
    mpfr_init2(ang, prec);
    for (int r = 0; r < R; ++r) {
        mpfr_const_pi(ang, MPFR_RNDN);
        mpfr_mul_si(ang, ang, -2 * static_cast<long>(r), MPFR_RNDN);
        mpfr_div_si(ang, ang, R, MPFR_RNDN);
        mpfr_sin_cos(out.im(r), out.re(r), ang, MPFR_RNDN);
    }
    mpfr_clear(ang);
}

/// In-place forward DFT with 1/R normalisation along one axis of a row-major
/// array of the given shape.
inline void mp_dft_axis(MpComplexArray& data, std::span<const int> shape, std::size_t axis, mpfr_prec_t prec) {
    const int R = shape[axis];
    std::size_t stride = 1;
    for (std::size_t i = axis + 1; i < shape.size(); ++i) stride *= static_cast<std::size_t>(shape[i]);
    const std::size_t block = stride * static_cast<std::size_t>(R);
    const std::size_t total = data.size();

    MpComplexArray roots(static_cast<std::size_t>(R), prec);
    mp_roots(roots, R, prec);
    MpComplexArray line(static_cast<std::size_t>(R), prec);
    MpScratch s(prec);

    for (std::size_t base = 0; base < total; base += block)
        for (std::size_t off = 0; off < stride; ++off) {
            for (int m = 0; m < R; ++m) {
                mpfr_set_zero(line.re(m), 1);
                mpfr_set_zero(line.im(m), 1);
                for (int b = 0; b < R; ++b) {
                    const std::size_t src = base + off + static_cast<std::size_t>(b) * stride;
                    const auto r = static_cast<std::size_t>((static_cast<i64>(m) * b) % R);
                    mp_mul_add(line.re(m), line.im(m), data.re(src), data.im(src), roots.re(r), roots.im(r), s);
                }
            }
            for (int m = 0; m < R; ++m) {
                const std::size_t dst = base + off + static_cast<std::size_t>(m) * stride;
                mpfr_div_si(data.re(dst), line.re(m), R, MPFR_RNDN);
                mpfr_div_si(data.im(dst), line.im(m), R, MPFR_RNDN);
            }
        }
}

}  // namespace detail

/// Counts e^{2 pi eps m} F^k(., . + i eps)^(l, m) on the full (l, m) range.
struct DampedReconstruction {
    LatticeBox sum_box;
    i64 max_m = 0;
    double epsilon = 0.0;
    long precision_bits = 0;
    std::vector<double> values;  // index (row of l) * (max_m + 1) + m

    double at(std::span<const int> l, i64 m) const {
        if (!sum_box.contains(l) || m < 0 || m > max_m) return 0.0;
        return values[sum_box.index_of(l) * static_cast<std::size_t>(max_m + 1) + static_cast<std::size_t>(m)];
    }
};

/// Bits needed so the undamped coefficients keep absolute error far below 1e-9.
inline long damped_precision_bits(const LatticeBox& box, int k, double eps) {
    const double mmax = static_cast<double>(k) * static_cast<double>(box.max_norm_sq());
    const double grid = std::log2(static_cast<double>(box.size())) * k + std::log2(mmax + 1.0) + 2.0 * box.dimension();
    return static_cast<long>(std::ceil(two_pi * eps * mmax / std::log(2.0) + grid + 80.0));
}

inline DampedReconstruction damped_reconstruction(const LatticeBox& box, int k, double eps) {
    if (k < 1) throw std::invalid_argument("damped_reconstruction: k must be >= 1");
    if (!(eps > 0.0)) throw std::invalid_argument("damped_reconstruction: eps must be positive");
    const int d = box.dimension();
    const LatticeBox sbox = MomentLedger<i64>::sum_box_of(box, k);
    const i64 mmax = static_cast<i64>(k) * box.max_norm_sq();
    const mpfr_prec_t prec = damped_precision_bits(box, k, eps);

    // Grid: sum_box sides in space, mmax + 1 in time; aliasing-free for F^k.
    std::vector<int> shape;
    for (int j = 0; j < d; ++j) shape.push_back(sbox.side(j));
    shape.push_back(static_cast<int>(mmax + 1));
    std::size_t total = 1;
    for (int s : shape) total *= static_cast<std::size_t>(s);
    if (total > (std::size_t{1} << 22)) throw std::length_error("damped_reconstruction: grid exceeds the memory cap");
    const int M = shape.back();

    mpfr_t tmp, eps_mp;
    mpfr_init2(tmp, prec);
    mpfr_init2(eps_mp, prec);
    mpfr_set_d(eps_mp, eps, MPFR_RNDN);
    detail::MpScratch s(prec);

    // Per axis j: f_j(x, t) = sum_{|n| <= N_j} e^{-2 pi eps n^2} e^{2 pi i (n x + n^2 t)} on the grid.
    std::vector<std::unique_ptr<detail::MpComplexArray>> factor;
    for (int j = 0; j < d; ++j) {
        const int R = shape[j], N = box.radius(j);
        detail::MpComplexArray rx(static_cast<std::size_t>(R), prec), rt(static_cast<std::size_t>(M), prec);
        detail::mp_roots(rx, R, prec);
        detail::mp_roots(rt, M, prec);
        auto f = std::make_unique<detail::MpComplexArray>(static_cast<std::size_t>(R) * M, prec);
        detail::MpComplexArray term(1, prec);
        for (int n = -N; n <= N; ++n) {
            const i64 n2 = static_cast<i64>(n) * n;
            // damping e^{-2 pi eps n^2}
            mpfr_const_pi(tmp, MPFR_RNDN);
            mpfr_mul(tmp, tmp, eps_mp, MPFR_RNDN);
            mpfr_mul_si(tmp, tmp, -2 * n2, MPFR_RNDN);
            mpfr_exp(tmp, tmp, MPFR_RNDN);
            for (int a = 0; a < R; ++a)
                for (int b = 0; b < M; ++b) {
                    // Roots are e^{-2 pi i r / R}; use -phase to get e^{+2 pi i .}.
                    const auto px = static_cast<std::size_t>(((-static_cast<i64>(n) * a) % R + R) % R);
                    const auto pt = static_cast<std::size_t>(((-(n2 % M) * b) % M + M) % M);
                    mpfr_set(term.re(0), rx.re(px), MPFR_RNDN);
                    mpfr_set(term.im(0), rx.im(px), MPFR_RNDN);
                    detail::mp_mul(term.re(0), term.im(0), rt.re(pt), rt.im(pt), s);
                    const std::size_t i = static_cast<std::size_t>(a) * M + b;
                    mpfr_fma(f->re(i), term.re(0), tmp, f->re(i), MPFR_RNDN);
                    mpfr_fma(f->im(i), term.im(0), tmp, f->im(i), MPFR_RNDN);
                }
        }
        // f_j <- f_j^k
        detail::MpComplexArray base(1, prec);
        for (std::size_t i = 0; i < f->size(); ++i) {
            mpfr_set(base.re(0), f->re(i), MPFR_RNDN);
            mpfr_set(base.im(0), f->im(i), MPFR_RNDN);
            for (int e = 1; e < k; ++e) detail::mp_mul(f->re(i), f->im(i), base.re(0), base.im(0), s);
        }
        factor.push_back(std::move(f));
    }

    // G(x, t) = prod_j f_j(x_j, t)^k.
    detail::MpComplexArray grid(total, prec);
    std::vector<int> node(static_cast<std::size_t>(d + 1), 0);
    for (std::size_t i = 0; i < total; ++i) {
        const int b = node[d];
        std::size_t src = static_cast<std::size_t>(node[0]) * M + b;
        mpfr_set(grid.re(i), factor[0]->re(src), MPFR_RNDN);
        mpfr_set(grid.im(i), factor[0]->im(src), MPFR_RNDN);
        for (int j = 1; j < d; ++j) {
            src = static_cast<std::size_t>(node[j]) * M + b;
            detail::mp_mul(grid.re(i), grid.im(i), factor[j]->re(src), factor[j]->im(src), s);
        }
        for (int j = d; j >= 0; --j) {
            if (++node[j] < shape[j]) break;
            node[j] = 0;
        }
    }
    factor.clear();

    // Time transform, undamping by e^{2 pi eps m}, then the spatial transforms.
    detail::mp_dft_axis(grid, shape, static_cast<std::size_t>(d), prec);
    {
        detail::MpComplexArray undamp(static_cast<std::size_t>(M), prec);
        for (int m = 0; m < M; ++m) {
            mpfr_const_pi(undamp.re(m), MPFR_RNDN);
            mpfr_mul(undamp.re(m), undamp.re(m), eps_mp, MPFR_RNDN);
            mpfr_mul_si(undamp.re(m), undamp.re(m), 2 * static_cast<long>(m), MPFR_RNDN);
            mpfr_exp(undamp.re(m), undamp.re(m), MPFR_RNDN);
        }
        for (std::size_t i = 0; i < total; ++i) {
            const auto m = i % static_cast<std::size_t>(M);
            mpfr_mul(grid.re(i), grid.re(i), undamp.re(m), MPFR_RNDN);
            mpfr_mul(grid.im(i), grid.im(i), undamp.re(m), MPFR_RNDN);
        }
    }
    for (int j = d - 1; j >= 0; --j) detail::mp_dft_axis(grid, shape, static_cast<std::size_t>(j), prec);

    DampedReconstruction out{sbox, mmax, eps, static_cast<long>(prec), {}};
    out.values.assign(sbox.size() * static_cast<std::size_t>(M), 0.0);
    // Spatial frequency l sits at index l mod side.
    sbox.for_each([&](std::size_t row, std::span<const int> l) {
        std::size_t base = 0;
        for (int j = 0; j < d; ++j) base = base * static_cast<std::size_t>(shape[j]) + static_cast<std::size_t>((l[j] + shape[j]) % shape[j]);
        for (int m = 0; m < M; ++m)
            out.values[row * static_cast<std::size_t>(M) + m] = mpfr_get_d(grid.re(base * M + m), MPFR_RNDN);
    });
    mpfr_clear(tmp);
    mpfr_clear(eps_mp);
    return out;
}

struct MaxRepresentation {
    int d = 0, N = 0, k = 0;
    double epsilon = 0.0;
    i64 max_count = 0;            // max_(l, m) |S_k(l, m)|, the K_{2k}^{2k} bound
    std::vector<int> argmax_l;
    i64 argmax_m = 0;
    double reconstructed_max = 0.0;
    double max_deviation = 0.0;   // max |reconstruction - ledger| over all (l, m)
    long precision_bits = 0;
    bool identity_holds = false;  // max_deviation <= 1e-9
};

/// max_(l, m) e^{2 pi eps m} F^k(., . + i eps)^(l, m) checked entry by entry
/// against the exact ledger.
inline MaxRepresentation max_representation(int d, int N, int k, double eps) {
    const LatticeBox box = LatticeBox::cube(d, N);
    const auto ledger = representation_count(box, k);
    const auto rec = damped_reconstruction(box, k, eps);
    MaxRepresentation out;
    out.d = d, out.N = N, out.k = k, out.epsilon = eps, out.precision_bits = rec.precision_bits;
    out.reconstructed_max = -1.0;
    rec.sum_box.for_each([&](std::size_t, std::span<const int> l) {
        for (i64 m = 0; m <= rec.max_m; ++m) {
            const double v = rec.at(l, m);
            const i64 c = ledger.at(l, m);
            out.max_deviation = std::max(out.max_deviation, std::abs(v - static_cast<double>(c)));
            out.reconstructed_max = std::max(out.reconstructed_max, v);
            if (c > out.max_count) {
                out.max_count = c;
                out.argmax_l.assign(l.begin(), l.end());
                out.argmax_m = m;
            }
        }
    });
    out.identity_holds = out.max_deviation <= 1e-9;
    return out;
}

}  // namespace paralab

#endif  // PARALAB_DAMPED_THETA_HPP
