#ifndef PARALAB_ARITHMETIC_HPP
#define PARALAB_ARITHMETIC_HPP

// Multiplicative number theory on machine integers: Moebius, Euler phi,
// divisors, Ramanujan sums and the divisor count d(n, Q).

#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "paralab/numeric.hpp"

namespace paralab {


/// Prime factorisation by trial division as (prime, exponent) pairs.
inline std::vector<std::pair<i64, int>> factorize(i64 n) {
    if (n < 1) throw std::invalid_argument("factorize: n must be positive");
    std::vector<std::pair<i64, int>> f;
    for (i64 p = 2; p * p <= n; ++p) {
        if (n % p) continue;
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        f.emplace_back(p, e);
    }
    if (n > 1) f.emplace_back(n, 1);
    return f;
}

inline int mobius(i64 n) {
    int mu = 1;
    for (const auto& [p, e] : factorize(n)) {
        if (e > 1) return 0;
        mu = -mu;
    }
    return mu;
}

inline i64 euler_phi(i64 n) {
    i64 r = n;
    for (const auto& [p, e] : factorize(n)) r = r / p * (p - 1);
    return r;
}

/// Positive divisors in increasing order.
inline std::vector<i64> divisors(i64 n) {
    if (n == 0) throw std::invalid_argument("divisors: n must be nonzero");
    n = n < 0 ? -n : n;
    std::vector<i64> small, large;
    for (i64 d = 1; d * d <= n; ++d) {
        if (n % d) continue;
        small.push_back(d);
        if (d != n / d) large.push_back(n / d);
    }
    small.insert(small.end(), large.rbegin(), large.rend());
    return small;
}

/// c_q(n) = sum_{d | gcd(n, q)} d mu(q/d). Exact; n = 0 gives phi(q).
inline i64 ramanujan_sum_mobius(i64 q, i64 n) {
    if (q < 1) throw std::invalid_argument("ramanujan_sum: q must be >= 1");
    const i64 g = std::gcd(q, n < 0 ? -n : n);  // gcd(q, 0) = q
    i64 s = 0;
    for (i64 d : divisors(g)) s += d * mobius(q / d);
    return s;
}

/// c_q(n) by summing e^{2 pi i a n / q} over reduced residues; unrounded.
inline cplx ramanujan_sum_direct(i64 q, i64 n) {
    if (q < 1) throw std::invalid_argument("ramanujan_sum: q must be >= 1");
    const i64 r = ((n % q) + q) % q;
    CompensatedComplexSum s;
    for (i64 a = 1; a <= q; ++a) {
        if (std::gcd(a, q) != 1) continue;
        const auto an = static_cast<i64>((static_cast<__int128>(a) * r) % q);
        s.add(unit_phase(static_cast<double>(an) / static_cast<double>(q)));
    }
    return s.value();
}

/// c_q(n), evaluated by direct summation and by the Moebius identity; the
/// two must agree or a std::logic_error is thrown.
inline i64 ramanujan_sum(i64 q, i64 n) {
    const cplx direct = ramanujan_sum_direct(q, n);
    const double rounded = std::round(direct.real());
    if (std::abs(direct.real() - rounded) > 1e-6 || std::abs(direct.imag()) > 1e-6)
        throw std::logic_error("ramanujan_sum: direct sum is not an integer for q=" + std::to_string(q));
    const i64 exact = ramanujan_sum_mobius(q, n);
    if (static_cast<i64>(rounded) != exact)
        throw std::logic_error("ramanujan_sum: direct and Moebius evaluations disagree for q=" + std::to_string(q) +
                               ", n=" + std::to_string(n));
    return exact;
}

/// Number of positive divisors of |n| that are <= Q (inclusive) or < Q.
inline i64 divisor_count(i64 n, double Q, bool inclusive = true) {
    if (n == 0) throw std::invalid_argument("divisor_count: n must be nonzero");
    i64 c = 0;
    for (i64 d : divisors(n)) {
        const double dd = static_cast<double>(d);
        if (inclusive ? dd <= Q : dd < Q) ++c;
    }
    return c;
}

/// Moebius function and Euler phi tabulated up to a limit by a linear sieve.
class ArithmeticTable {
public:
    explicit ArithmeticTable(i64 limit) : mu_(static_cast<std::size_t>(limit + 1), 0), phi_(static_cast<std::size_t>(limit + 1), 0) {
        if (limit < 1) throw std::invalid_argument("ArithmeticTable: limit must be >= 1");
        std::vector<i64> primes;
        std::vector<bool> composite(static_cast<std::size_t>(limit + 1), false);
        mu_[1] = 1;
        phi_[1] = 1;
        for (i64 i = 2; i <= limit; ++i) {
            if (!composite[i]) {
                primes.push_back(i);
                mu_[i] = -1;
                phi_[i] = i - 1;
            }
            for (i64 p : primes) {
                if (i * p > limit) break;
                composite[i * p] = true;
                if (i % p == 0) {
                    mu_[i * p] = 0;
                    phi_[i * p] = phi_[i] * p;
                    break;
                }
                mu_[i * p] = -mu_[i];
                phi_[i * p] = phi_[i] * (p - 1);
            }
        }
    }

    i64 limit() const { return static_cast<i64>(mu_.size()) - 1; }
    int mu(i64 n) const { return mu_.at(static_cast<std::size_t>(n)); }
    i64 phi(i64 n) const { return phi_.at(static_cast<std::size_t>(n)); }

    /// c_q(n) = mu(q/g) phi(q) / phi(q/g) with g = gcd(q, n) (Hoelder's form
    /// of the Moebius identity); requires q <= limit.
    i64 ramanujan(i64 q, i64 n) const {
        const i64 g = std::gcd(q, n < 0 ? -n : n);
        const i64 r = q / g;
        const int m = mu(r);
        if (m == 0) return 0;
        return m * (phi(q) / phi(r));
    }

private:
    std::vector<int> mu_;
    std::vector<i64> phi_;
};

}  // namespace paralab

#endif  // PARALAB_ARITHMETIC_HPP
