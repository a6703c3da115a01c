#ifndef PARALAB_DECOMPOSITION_HPP
#define PARALAB_DECOMPOSITION_HPP

// Split K_sigma = K_{1,Q} + K_{2,Q} with
//
//     K_{1,Q}(x, t) = K_sigma(x, t) Phi(t) / Phihat(0),
//     Khat_{2,Q}(n, m) = -e^{-sigma |n|^2/N^2} Phihat(m - |n|^2) / Phihat(0)  (m != |n|^2),
//
// and Khat_{2,Q}(n, |n|^2) = 0. Phihat is tabulated for |k| <= k_max.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "paralab/arithmetic.hpp"
#include "paralab/audit.hpp"
#include "paralab/bump.hpp"
#include "paralab/fft.hpp"
#include "paralab/theta.hpp"

namespace paralab {

class KernelDecomposition {
public:
    /// k_max = 0 selects the default d N^2 (the range of |n|^2 over the box |n|_inf <= N).
    KernelDecomposition(KernelParams params, i64 Q, i64 k_max = 0) : params_(params), Q_(Q) {
        params_.validate();
        const i64 N = params_.N;
        if (Q < N || Q > N * N) throw std::invalid_argument("kernel_decompose: Q must lie in [N, N^2]");
        k_max_ = k_max > 0 ? k_max : static_cast<i64>(params_.d) * N * N;
        phi_hat0_ = big_phi_fourier_zero(Q);
        const ArithmeticTable table(2 * Q);
        table_.assign(static_cast<std::size_t>(k_max_ + 1), cplx{});
        table_[0] = phi_hat0_;
        for (i64 k = 1; k <= k_max_; ++k) {
            CompensatedComplexSum s;
            for (i64 q = Q; q < 2 * Q; ++q) {
                const i64 c = table.ramanujan(q, k);
                if (c == 0) continue;
                const double q2 = static_cast<double>(q) * q;
                s.add(static_cast<double>(c) / q2 * phi_fourier(static_cast<double>(k) / q2));
            }
            table_[static_cast<std::size_t>(k)] = s.value();
        }
    }

    const KernelParams& params() const { return params_; }
    i64 Q() const { return Q_; }
    i64 k_max() const { return k_max_; }
    double phi_hat0() const { return phi_hat0_; }

    /// Phihat(k) for |k| <= k_max; Phihat(-k) = conj Phihat(k) since Phi is real.
    cplx phi_hat(i64 k) const {
        const i64 ak = k < 0 ? -k : k;
        if (ak > k_max_) throw std::out_of_range("KernelDecomposition: |k| beyond the tabulated range");
        const cplx v = table_[static_cast<std::size_t>(ak)];
        return k < 0 ? std::conj(v) : v;
    }

    double phi(double t) const { return big_phi(t, Q_); }

    cplx k1(const TorusPoint& p, double tol = 1e-12) const { return ksigma_direct(params_, p, tol) * (phi(p.t) / phi_hat0_); }

    /// Khat_{2,Q}(n, m); exactly zero on the paraboloid m = |n|^2.
    cplx k2_hat(std::span<const int> n, i64 m) const {
        if (static_cast<int>(n.size()) != params_.d) throw std::invalid_argument("k2_hat: dimension mismatch");
        i64 n2 = 0;
        for (int v : n) n2 += static_cast<i64>(v) * v;
        if (m == n2) return 0.0;
        return -std::exp(-params_.damping() * static_cast<double>(n2)) * phi_hat(m - n2) / phi_hat0_;
    }

    /// K_{2,Q}(x, t) synthesised term by term from the Fourier table over
    /// |n|_inf <= R (truncation radius for tol) and |m - |n|^2| <= k_max.
    cplx k2_from_table(const TorusPoint& p, double tol = 1e-12) const {
        if (static_cast<int>(p.x.size()) != params_.d) throw std::invalid_argument("k2_from_table: dimension mismatch");
        const int R = truncation_radius(params_, tol);
        const auto box = LatticeBox::cube(params_.d, R);
        // e^{2 pi i k t} for k = -k_max..k_max
        std::vector<cplx> time_phase(static_cast<std::size_t>(2 * k_max_ + 1));
        for (i64 k = -k_max_; k <= k_max_; ++k) time_phase[static_cast<std::size_t>(k + k_max_)] = unit_phase(frac_mul(p.t, static_cast<double>(k)));
        CompensatedComplexSum total;
        box.for_each([&](std::size_t, std::span<const int> n) {
            const i64 n2 = norm_sq(n);
            double ph = frac_mul(p.t, static_cast<double>(n2));
            for (std::size_t j = 0; j < n.size(); ++j) ph += frac_mul(p.x[j], n[j]);
            const cplx base = unit_phase(ph);
            CompensatedComplexSum inner;
            for (i64 k = -k_max_; k <= k_max_; ++k) {
                if (k == 0) continue;
                inner.add(k2_hat(n, n2 + k) * time_phase[static_cast<std::size_t>(k + k_max_)]);
            }
            total.add(base * inner.value());
        });
        return total.value();
    }

    nlohmann::json fourier_table_json() const {
        nlohmann::json rows = nlohmann::json::array();
        for (i64 k = 0; k <= k_max_; ++k) rows.push_back({k, table_[k].real(), table_[k].imag()});
        return {{"sigma", params_.sigma}, {"N", params_.N}, {"d", params_.d}, {"Q", Q_},
                {"phi_hat0", phi_hat0_}, {"k_max", k_max_}, {"phi_hat", rows}};
    }

private:
    KernelParams params_;
    i64 Q_;
    i64 k_max_ = 0;
    double phi_hat0_ = 0.0;
    std::vector<cplx> table_;
};

inline KernelDecomposition kernel_decompose(const KernelParams& params, i64 Q, i64 k_max = 0) {
    return KernelDecomposition(params, Q, k_max);
}

/// Integer Q = floor(N^e) clamped into [N, N^2].
inline i64 q_from_exponent(int N, double e) {
    const i64 Q = static_cast<i64>(std::floor(std::pow(static_cast<double>(N), e) + 1e-9));
    return std::clamp<i64>(Q, N, static_cast<i64>(N) * N);
}

struct K1Sampling {
    int max_q = 64;           // denominators sampled from [Q, 2Q), evenly spaced, ends included
    int a_per_q = 4;          // numerators: 1, q-1 and evenly spread coprime values
    int beta_points = 9;      // points across each bump support
    int oversample = 10;      // x grid has at least oversample * (2N + 1) nodes
};

struct K1Sup {
    double sup = 0.0;  // max |K_{1,Q}| over the samples
    double t_at = 0.0;
    i64 q_at = 0, a_at = 0;
    std::size_t samples = 0;
};

/// sup |K_{1,Q}| over t inside sampled bumps and x on an oversampled grid.
/// |K_sigma(x, t)| = prod_j |theta(x_j, t)|, so the x-sup is (sup_x |theta|)^d.
inline K1Sup k1_sup(const KernelDecomposition& dec, const K1Sampling& s = {}, double tol = 1e-12) {
    const auto& kp = dec.params();
    const int R = truncation_radius(kp, tol);
    int M = 64;
    while (M < std::max(2 * R + 1, s.oversample * (2 * kp.N + 1))) M *= 2;
    const i64 Q = dec.Q();
    std::vector<i64> qs;
    if (Q <= s.max_q) {
        for (i64 q = Q; q < 2 * Q; ++q) qs.push_back(q);
    } else {
        for (int i = 0; i < s.max_q; ++i) qs.push_back(Q + (Q - 1) * i / (s.max_q - 1));
    }
    K1Sup out;
    const double c = kp.damping();
    const int shape[1] = {M};
    std::vector<cplx> v(static_cast<std::size_t>(M));
    for (i64 q : qs) {
        std::vector<i64> as;
        std::vector<i64> coprime;
        for (i64 a = 1; a <= q; ++a)
            if (std::gcd(a, q) == 1) coprime.push_back(a);
        for (int j = 0; j < s.a_per_q && j < static_cast<int>(coprime.size()); ++j)
            as.push_back(coprime[static_cast<std::size_t>(j) * (coprime.size() - 1) / std::max(1, s.a_per_q - 1)]);
        std::sort(as.begin(), as.end());
        as.erase(std::unique(as.begin(), as.end()), as.end());
        const double q2 = static_cast<double>(q) * q;
        for (i64 a : as)
            for (int b = 0; b < s.beta_points; ++b) {
                const double u = (b + 1.0) / (s.beta_points + 1.0);
                const double beta = (bump_lo + u * (bump_hi - bump_lo)) / q2;
                const double t = static_cast<double>(a) / static_cast<double>(q) + beta;
                const double weight = dec.phi(t) / dec.phi_hat0();
                std::fill(v.begin(), v.end(), cplx{});
                for (int n = -R; n <= R; ++n) {
                    const double n2 = static_cast<double>(n) * n;
                    v[static_cast<std::size_t>(((n % M) + M) % M)] += std::exp(-c * n2) * unit_phase(frac_mul(t, n2));
                }
                fft_inplace(v, shape, FftSign::backward);
                double mx = 0.0;
                for (const auto& z : v) mx = std::max(mx, std::abs(z));
                const double val = std::pow(mx, kp.d) * weight;
                ++out.samples;
                if (val > out.sup) out = {val, t, q, a, out.samples};
            }
    }
    return out;
}

/// max over tabulated (n, m) of |Khat_{2,Q}|; the weight e^{-sigma|n|^2/N^2}
/// is largest at n = 0, so this is max_{0 < |k| <= k_max} |Phihat(k)| / Phihat(0).
inline std::pair<double, i64> k2_sup(const KernelDecomposition& dec) {
    double best = 0.0;
    i64 arg = 0;
    for (i64 k = 1; k <= dec.k_max(); ++k) {
        const double v = std::abs(dec.phi_hat(k)) / dec.phi_hat0();
        if (v > best) {
            best = v;
            arg = k;
        }
    }
    return {best, arg};
}

/// Stability of C1 = sup|K_{1,Q}| / Q^{d/2} and C2 = sup|Khat_{2,Q}| Q / N^eps
/// over N_list x {floor(N^e) : e in q_exponents}. Passes when each family of
/// constants spans less than a factor `stability`.
inline BoundAudit decomposition_audit(double sigma, int d, const std::vector<int>& N_list,
                                      const std::vector<double>& q_exponents, double epsilon = 0.1,
                                      double stability = 3.0, const K1Sampling& sampling = {}) {
    BoundAudit audit;
    audit.name = "kernel_decomposition";
    audit.epsilon = epsilon;
    audit.parameter_names = {"N", "Q", "bound"};  // bound 1: (K1) row, bound 2: (K2) row
    std::vector<double> c1, c2;
    nlohmann::json cells = nlohmann::json::array();
    for (int N : N_list)
        for (double e : q_exponents) {
            const i64 Q = q_from_exponent(N, e);
            const KernelDecomposition dec({sigma, N, d}, Q);
            const auto s1 = k1_sup(dec, sampling);
            const auto [s2, k_at] = k2_sup(dec);
            const double shape1 = std::pow(static_cast<double>(Q), d / 2.0);
            const double shape2 = std::pow(static_cast<double>(N), epsilon) / static_cast<double>(Q);
            audit.add_row({static_cast<double>(N), static_cast<double>(Q), 1.0}, s1.sup, shape1);
            audit.add_row({static_cast<double>(N), static_cast<double>(Q), 2.0}, s2, shape2);
            c1.push_back(s1.sup / shape1);
            c2.push_back(s2 / shape2);
            cells.push_back({{"N", N}, {"Q", Q}, {"C1", c1.back()}, {"C2", c2.back()}, {"k1_t", s1.t_at},
                             {"k1_q", s1.q_at}, {"k1_a", s1.a_at}, {"k1_samples", s1.samples}, {"k2_k", k_at},
                             {"phi_hat0", dec.phi_hat0()}});
        }
    audit.set_constant("C1", c1.empty() ? 0.0 : *std::max_element(c1.begin(), c1.end()));
    audit.set_constant("C2", c2.empty() ? 0.0 : *std::max_element(c2.begin(), c2.end()));
    audit.set_constant("C1_spread", spread(c1));
    audit.set_constant("C2_spread", spread(c2));
    audit.pass = !c1.empty() && spread(c1) < stability && spread(c2) < stability;
    audit.details = {{"cells", cells}, {"stability_threshold", stability}};
    return audit;
}

}  // namespace paralab

#endif  // PARALAB_DECOMPOSITION_HPP
