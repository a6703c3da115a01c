#ifndef PARALAB_BUMP_HPP
#define PARALAB_BUMP_HPP

// The bump phi supported on [1/200, 1/100], its real-line Fourier transform,
// and the periodic sum of rescaled bumps
//
//     Phi(t) = sum_{Q <= q < 2Q} sum_{a in P_q} phi(q^2 (t - a/q))
//
// with Fourier coefficients Phihat(k) = sum_q c_q(k)/q^2 F phi(k/q^2).

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

#include "paralab/arithmetic.hpp"
#include "paralab/numeric.hpp"

namespace paralab {

inline constexpr double bump_lo = 1.0 / 200.0;
inline constexpr double bump_hi = 1.0 / 100.0;
inline constexpr double bump_center = 0.5 * (bump_lo + bump_hi);
inline constexpr double bump_half_width = 0.5 * (bump_hi - bump_lo);

/// phi(s) = exp(-1/(u(1-u))) with u = 200 (s - 1/200) in (0, 1); 0 elsewhere.
/// Smooth, nonnegative, symmetric about 3/400, peak e^{-4}.
inline double bump(double s) {
    const double u = (s - bump_lo) / (bump_hi - bump_lo);
    if (!(u > 0.0 && u < 1.0)) return 0.0;
    return std::exp(-1.0 / (u * (1.0 - u)));
}

/// F phi(xi) = int phi(s) e^{-2 pi i s xi} ds, written as
/// e^{-2 pi i c xi} 2 int_0^h phi(c + v) cos(2 pi v xi) dv about the center c.
/// Absolute quadrature error below 1e-12.
inline cplx phi_fourier(double xi) {
    auto f = [xi](double v) { return bump(bump_center + v) * std::cos(two_pi * v * xi); };
    // Termination is err <= tol * int|f|, and int|f| <= int phi ~ 1.8e-5 over the half support.
    double err = 0.0;
    const double r =
        2.0 * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, bump_half_width, 15, 1e-8, &err);
    if (2.0 * err > 1e-12) throw std::runtime_error("phi_fourier: quadrature did not reach 1e-12");
    return r * unit_phase(-frac_mul(bump_center, xi));
}

/// F phi(0) = int phi.
inline double phi_integral() {
    static const double v = phi_fourier(0.0).real();
    return v;
}

/// Phi(t) for t on the circle. The supports a/q + [1/(200q^2), 1/(100q^2)]
/// are pairwise disjoint, so at most one term is nonzero per q.
inline double big_phi(double t, i64 Q) {
    if (Q < 1) throw std::invalid_argument("big_phi: Q must be >= 1");
    t = mod1(t);
    double s = 0.0;
    for (i64 q = Q; q < 2 * Q; ++q) {
        const double qd = static_cast<double>(q);
        auto a = static_cast<i64>(std::floor(t * qd));
        double beta = t - static_cast<double>(a) / qd;
        if (a == 0) a = q;  // the bump of a = q sits just past 1
        if (std::gcd(a, q) != 1) continue;
        s += bump(beta * qd * qd);
    }
    return s;
}

/// Phihat(0) = sum_q phi(q)/q^2 F phi(0).
inline double big_phi_fourier_zero(i64 Q) {
    if (Q < 1) throw std::invalid_argument("big_phi_fourier: Q must be >= 1");
    CompensatedSum s;
    for (i64 q = Q; q < 2 * Q; ++q) s.add(static_cast<double>(euler_phi(q)) / (static_cast<double>(q) * q));
    return s.value() * phi_integral();
}

/// Phihat(k) with the a-sum evaluated by the doubly checked ramanujan_sum.
inline cplx big_phi_fourier(i64 k, i64 Q) {
    if (Q < 1) throw std::invalid_argument("big_phi_fourier: Q must be >= 1");
    CompensatedComplexSum s;
    for (i64 q = Q; q < 2 * Q; ++q) {
        const i64 c = ramanujan_sum(q, k);
        if (c == 0) continue;
        const double q2 = static_cast<double>(q) * q;
        s.add(static_cast<double>(c) / q2 * phi_fourier(static_cast<double>(k) / q2));
    }
    return s.value();
}

/// Memoised F phi(k/q^2) per (k, q); safe for concurrent readers.
class BumpProfile {
public:
    cplx fourier(i64 k, i64 q) {
        const std::lock_guard lock(mu_);
        const auto key = std::make_pair(k, q);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        const double q2 = static_cast<double>(q) * q;
        const cplx v = phi_fourier(static_cast<double>(k) / q2);
        cache_.emplace(key, v);
        return v;
    }
    std::size_t size() const {
        const std::lock_guard lock(mu_);
        return cache_.size();
    }

private:
    mutable std::mutex mu_;
    std::map<std::pair<i64, i64>, cplx> cache_;
};

}  // namespace paralab

#endif  // PARALAB_BUMP_HPP
