#ifndef PARALAB_THETA_HPP
#define PARALAB_THETA_HPP

// The damped paraboloid kernel
//
//     K_sigma(x, t) = sum_{n in Z^d} e^{-sigma |n|^2 / N^2} e^{2 pi i (|n|^2 t + n.x)}
//
// evaluated directly and through Poisson summation around a rational a/q,
// plus the L^p norms of its restrictions to the arcs J_{a/q}. The kernel is a
// product over coordinates of one-dimensional theta functions; every routine
// here works with that factorisation.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "paralab/audit.hpp"
#include "paralab/circle.hpp"
#include "paralab/fft.hpp"
#include "paralab/numeric.hpp"
#include "paralab/torus.hpp"

namespace paralab {

struct KernelParams {
    double sigma = 1.0;
    int N = 1;
    int d = 1;

    void validate() const {
        if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("KernelParams: sigma must be positive");
        if (N < 1) throw std::invalid_argument("KernelParams: N must be >= 1");
        if (d < 1) throw std::invalid_argument("KernelParams: d must be >= 1");
    }
    /// sigma / N^2, the damping per unit of |n|^2.
    double damping() const { return sigma / (static_cast<double>(N) * N); }
};

/// sum_{n in Z} e^{-sigma n^2 / N^2}, an upper bound for every |theta(x, t)|.
inline double theta_mass(const KernelParams& p) {
    const double c = p.damping();
    // 1 + 2 sum_{n>=1} e^{-c n^2} <= 1 + sqrt(pi / c)
    return 1.0 + std::sqrt(std::numbers::pi / c);
}

/// Smallest R such that dropping |n|_inf > R changes K_sigma by less than tol.
/// Uses sum_{|n|>R} e^{-c n^2} <= sqrt(pi/c) erfc(R sqrt(c)) in one coordinate
/// and |prod a_j - prod b_j| <= d M^{d-1} max |a_j - b_j| with M = theta_mass.
inline int truncation_radius(const KernelParams& p, double tol) {
    p.validate();
    if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("truncation_radius: tol must lie in (0, 1)");
    const double c = p.damping();
    const double scale = p.d * std::pow(theta_mass(p), p.d - 1) * std::sqrt(std::numbers::pi / c);
    int R = static_cast<int>(std::sqrt(std::max(0.0, std::log(scale / tol)) / c));
    while (scale * std::erfc(R * std::sqrt(c)) >= tol) ++R;
    while (R > 0 && scale * std::erfc((R - 1) * std::sqrt(c)) < tol) --R;
    return R;
}

/// One coordinate factor sum_{|n| <= R} e^{-c n^2} e^{2 pi i (n^2 t + n x)}.
inline cplx theta_1d_direct(double c, int R, double x, double t) {
    CompensatedComplexSum s;
    for (int n = -R; n <= R; ++n) {
        const double n2 = static_cast<double>(n) * n;
        s.add(std::exp(-c * n2) * unit_phase(frac_mul(t, n2) + frac_mul(x, n)));
    }
    return s.value();
}

/// K_sigma at p by direct summation, truncated so the dropped tail is < tol.
inline cplx ksigma_direct(const KernelParams& params, const TorusPoint& pt, double tol = 1e-12) {
    params.validate();
    if (static_cast<int>(pt.x.size()) != params.d) throw std::invalid_argument("ksigma_direct: point dimension mismatch");
    const int R = truncation_radius(params, tol);
    cplx prod = 1.0;
    for (double xj : pt.x) prod *= theta_1d_direct(params.damping(), R, xj, pt.t);
    return prod;
}

/// Complex damping z = sigma/N^2 - 2 pi i beta of the Poisson form.
inline cplx poisson_z(const KernelParams& p, double beta) { return {p.damping(), -two_pi * beta}; }

/// One coordinate of the Poisson form:
/// sqrt(pi)/(q sqrt z) sum_k e^{-pi^2 (x - k/q)^2 / z} G(a, k; q),
/// with the k-sum cut where the Gaussian modulus drops below 1e-14.
inline cplx theta_1d_poisson(const KernelParams& p, const std::vector<cplx>& gauss, i64 q, double beta, double x) {
    const cplx z = poisson_z(p, beta);
    const cplx inv_z = 1.0 / z;
    const double decay = std::numbers::pi * std::numbers::pi * inv_z.real();  // modulus is e^{-decay (x-k/q)^2}
    const double qd = static_cast<double>(q);
    const double reach = std::sqrt(std::log(1e14) / decay);  // |x - k/q| beyond which terms are < 1e-14
    const auto k_lo = static_cast<i64>(std::floor((x - reach) * qd));
    const auto k_hi = static_cast<i64>(std::ceil((x + reach) * qd));
    CompensatedComplexSum s;
    const cplx a = -std::numbers::pi * std::numbers::pi * inv_z;
    for (i64 k = k_lo; k <= k_hi; ++k) {
        const double dx = x - static_cast<double>(k) / qd;
        const cplx g = gauss[static_cast<std::size_t>(((k % q) + q) % q)];
        s.add(std::exp(a * (dx * dx)) * g);
    }
    return std::sqrt(std::numbers::pi) / (qd * std::sqrt(z)) * s.value();
}

/// K_sigma(x, a/q + beta) by the Poisson-summation closed form.
inline cplx ksigma_poisson(const KernelParams& params, const RationalApprox& ra, const std::vector<double>& x) {
    params.validate();
    if (static_cast<int>(x.size()) != params.d) throw std::invalid_argument("ksigma_poisson: point dimension mismatch");
    if (ra.q < 1 || ra.a < 0 || std::gcd(ra.a, ra.q) != 1 || !std::isfinite(ra.beta))
        throw std::invalid_argument("ksigma_poisson: invalid rational approximation");
    const auto gauss = gauss_sums_all_k(ra.a, ra.q);
    cplx prod = 1.0;
    for (double xj : x) prod *= theta_1d_poisson(params, gauss, ra.q, ra.beta, mod1(xj));
    return prod;
}

/// Poisson form at t using the Dirichlet approximation of level N.
inline cplx ksigma_poisson(const KernelParams& params, const TorusPoint& pt) {
    const double t = pt.t == 0.0 ? 1.0 : pt.t;
    return ksigma_poisson(params, dirichlet_approx(t, params.N), pt.x);
}

/// int_0^1 |theta(x, t)|^p dx, averaged over a power-of-two grid of at least
/// p R + 1 nodes (exact for even integer p up to the truncation tail).
inline double theta_lp_mean(const KernelParams& params, int R, double t, double p) {
    int M = 64;
    while (M < static_cast<int>(std::ceil(p * R)) + 1) M *= 2;
    std::vector<cplx> v(static_cast<std::size_t>(M), cplx{});
    const double c = params.damping();
    for (int n = -R; n <= R; ++n) {
        const double n2 = static_cast<double>(n) * n;
        v[static_cast<std::size_t>(((n % M) + M) % M)] += std::exp(-c * n2) * unit_phase(frac_mul(t, n2));
    }
    const int shape[1] = {M};
    fft_inplace(v, shape, FftSign::backward);
    std::vector<double> powers(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) powers[i] = std::pow(std::abs(v[i]), p);
    return pairwise_sum(powers) / M;
}

struct KarcNorm {
    double norm = 0.0;        // ||K_sigma 1_{J_{a/q}}||_{L^p(T^{d+1})}
    double norm_p = 0.0;      // norm^p
    double rhs_shape = 0.0;   // N^{d-(d+2)/p} / q^{d/2-d/p}
    double quad_error = 0.0;  // quadrature error estimate for norm_p
};

inline double karc_threshold(int d) { return 2.0 * (d + 1) / d; }

/// ||K_{a/q}||_p with K_{a/q} = K_sigma 1_{J_{a/q}}(t).
inline KarcNorm karc_lp_norm(const KernelParams& params, i64 a, i64 q, double p, double tol = 1e-12) {
    params.validate();
    if (!(p > karc_threshold(params.d)))
        throw std::domain_error("karc_lp_norm: p must exceed 2(d+1)/d");
    if (q < 1 || q > params.N || a < 1 || a > q || std::gcd(a, q) != 1)
        throw std::invalid_argument("karc_lp_norm: need 1 <= a <= q <= N with gcd(a, q) = 1");
    const int R = truncation_radius(params, tol);
    const double center = static_cast<double>(a) / static_cast<double>(q);
    const double half = 1.0 / (static_cast<double>(params.N) * static_cast<double>(q));
    auto integrand = [&](double beta) { return std::pow(theta_lp_mean(params, R, center + beta, p), params.d); };

    // Breakpoints at the peak width c/(2 pi) times powers of 4.
    std::vector<double> cuts{0.0};
    for (double w = params.damping() / two_pi; w < half; w *= 4.0) cuts.push_back(w);
    cuts.push_back(half);
    double total = 0.0, err = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        for (double sgn : {1.0, -1.0}) {
            double e = 0.0;
            const double lo = sgn > 0 ? cuts[i] : -cuts[i + 1];
            const double hi = sgn > 0 ? cuts[i + 1] : -cuts[i];
            total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, lo, hi, 10, 1e-8, &e);
            err += e;
        }
    KarcNorm out;
    out.norm_p = total;
    out.norm = std::pow(total, 1.0 / p);
    out.quad_error = err;
    const int d = params.d;
    out.rhs_shape = std::pow(params.N, d - (d + 2.0) / p) / std::pow(static_cast<double>(q), d / 2.0 - d / p);
    return out;
}

struct KarcCase {
    int N = 1;
    i64 a = 1;
    i64 q = 1;
};

/// Per-N fitted constant max ||K_{a/q}||_p / shape; passes when those
/// constants stay within a factor `stability` of each other.
inline BoundAudit karc_audit(double sigma, int d, double p, const std::vector<KarcCase>& cases, double stability = 3.0) {
    BoundAudit audit;
    audit.name = "arc_kernel_lp";
    audit.parameter_names = {"N", "a", "q", "p", "sigma", "d"};
    std::map<int, double> per_n;
    for (const auto& c : cases) {
        const auto r = karc_lp_norm({sigma, c.N, d}, c.a, c.q, p);
        audit.add_row({static_cast<double>(c.N), static_cast<double>(c.a), static_cast<double>(c.q), p, sigma,
                       static_cast<double>(d)},
                      r.norm, r.rhs_shape);
        double& slot = per_n[c.N];
        slot = std::max(slot, r.norm / r.rhs_shape);
    }
    std::vector<double> consts;
    for (const auto& [n, c] : per_n) {
        audit.set_constant("C_N=" + std::to_string(n), c);
        consts.push_back(c);
    }
    audit.set_constant("C", consts.empty() ? 0.0 : *std::max_element(consts.begin(), consts.end()));
    audit.pass = !consts.empty() && spread(consts) < stability;
    audit.details = {{"spread", spread(consts)}, {"stability_threshold", stability}};
    return audit;
}

/// sum over every arc J_{a/q}, q <= N, of ||K_{a/q}||_p^p against N^{dp-d-2}.
inline BoundAudit arc_sum_audit(double sigma, int d, double p, const std::vector<int>& N_list, double stability = 3.0) {
    BoundAudit audit;
    audit.name = "arc_kernel_sum";
    audit.parameter_names = {"N", "p", "sigma", "d"};
    std::vector<double> consts;
    for (int N : N_list) {
        CompensatedSum s;
        for (i64 q = 1; q <= N; ++q)
            for (i64 a = 1; a <= q; ++a)
                if (std::gcd(a, q) == 1) s.add(karc_lp_norm({sigma, N, d}, a, q, p).norm_p);
        const double shape = std::pow(static_cast<double>(N), d * p - d - 2.0);
        audit.add_row({static_cast<double>(N), p, sigma, static_cast<double>(d)}, s.value(), shape);
        consts.push_back(s.value() / shape);
    }
    audit.set_constant("C", consts.empty() ? 0.0 : *std::max_element(consts.begin(), consts.end()));
    audit.pass = !consts.empty() && spread(consts) < stability;
    audit.details = {{"per_N_constants", consts}, {"spread", spread(consts)}, {"stability_threshold", stability}};
    return audit;
}

}  // namespace paralab

#endif  // PARALAB_THETA_HPP
