#ifndef PARALAB_CIRCLE_HPP
#define PARALAB_CIRCLE_HPP

// Circle-method arithmetic: Dirichlet approximation, the arcs J_{a/q} and
// their overlap, Gauss sums, and the audit of the Ramanujan-sum bound
//
//     sum_{Q <= q < 2Q} |c_q(n)| <= C_eps d(n, Q) Q^{1+eps}.
//
// Points of (0,1] are treated as points of the circle R/Z, so the arc around
// 1/1 also covers (0, 1/N).

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "paralab/arithmetic.hpp"
#include "paralab/audit.hpp"
#include "paralab/fft.hpp"
#include "paralab/numeric.hpp"

namespace paralab {

/// Exact fraction with positive denominator; ordering by cross multiplication.
struct Rational {
    i64 num = 0;
    i64 den = 1;

    Rational() = default;
    Rational(i64 n, i64 d) : num(n), den(d) {
        if (d == 0) throw std::domain_error("Rational: zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const i64 g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

    friend std::strong_ordering operator<=>(const Rational& x, const Rational& y) {
        const __int128 l = static_cast<__int128>(x.num) * y.den;
        const __int128 r = static_cast<__int128>(y.num) * x.den;
        return l < r ? std::strong_ordering::less : (l > r ? std::strong_ordering::greater : std::strong_ordering::equal);
    }
    friend bool operator==(const Rational& x, const Rational& y) { return (x <=> y) == 0; }
};

struct RationalApprox {
    i64 a = 1;
    i64 q = 1;
    double beta = 0.0;  // t - a/q, taken on the circle
    i64 N = 1;
};

namespace detail {
using boost::multiprecision::cpp_int;

/// t = mantissa * 2^-shift exactly, for t in (0, 1].
inline void dyadic(double t, cpp_int& mantissa, unsigned& shift) {
    int e = 0;
    const double m = std::frexp(t, &e);
    mantissa = cpp_int(static_cast<i64>(std::ldexp(m, 53)));
    shift = static_cast<unsigned>(53 - e);
}
}  // namespace detail

/// Exact check of every RationalApprox invariant for the point t:
/// 1 <= a <= q <= N, gcd(a, q) = 1 and dist_{R/Z}(t, a/q) <= 1/(N q).
inline bool verify_dirichlet(double t, const RationalApprox& r) {
    if (!(r.a >= 1 && r.a <= r.q && r.q <= r.N)) return false;
    if (std::gcd(r.a, r.q) != 1) return false;
    detail::cpp_int m;
    unsigned s = 0;
    detail::dyadic(t, m, s);
    const detail::cpp_int scale = detail::cpp_int(1) << s;
    for (i64 wrap = -1; wrap <= 1; ++wrap) {
        detail::cpp_int diff = m * r.q - detail::cpp_int(r.a + wrap * r.q) * scale;
        if (diff < 0) diff = -diff;
        if (diff * r.N <= scale) return true;
    }
    return false;
}

/// Dirichlet approximation of t at level N: the valid (a, q) with the
/// smallest q, ties broken by the smallest |beta|.
inline RationalApprox dirichlet_approx(double t, i64 N) {
    if (!(t > 0.0 && t <= 1.0)) throw std::domain_error("dirichlet_approx: t must lie in (0, 1]");
    if (N < 1) throw std::invalid_argument("dirichlet_approx: N must be >= 1");
    const double slack = 1.0 + 1e-9;
    for (i64 q = 1; q <= N; ++q) {
        const double qd = static_cast<double>(q);
        const auto a0 = static_cast<i64>(std::floor(t * qd));
        RationalApprox best{};
        bool found = false;
        for (i64 a : {a0, a0 + 1}) {
            if (a < 1 || a > q) continue;
            double beta = t - static_cast<double>(a) / qd;
            if (q == 1) beta = beta < -0.5 ? beta + 1.0 : beta;
            if (std::abs(beta) * static_cast<double>(N) * qd > slack) continue;
            const RationalApprox cand{a, q, beta, N};
            if (!verify_dirichlet(t, cand)) continue;
            if (!found || std::abs(beta) < std::abs(best.beta)) best = cand;
            found = true;
        }
        if (found) return best;
    }
    throw std::logic_error("dirichlet_approx: no approximation found (arithmetic bug)");
}

struct Arc {
    i64 a = 1;
    i64 q = 1;
    bool major = false;

    Rational center() const { return {a, q}; }
    /// Open interval (a/q - 1/(Nq), a/q + 1/(Nq)).
    Rational lo(i64 N) const { return {a * N - 1, N * q}; }
    Rational hi(i64 N) const { return {a * N + 1, N * q}; }
};

struct ArcPartition {
    i64 N = 1;
    std::vector<Arc> arcs;

    std::size_t major_count() const {
        return static_cast<std::size_t>(std::count_if(arcs.begin(), arcs.end(), [](const Arc& a) { return a.major; }));
    }
};

/// Major iff q < N/10, decided exactly as 10 q < N.
inline bool is_major(i64 q, i64 N) { return 10 * q < N; }

inline ArcPartition arc_partition(i64 N) {
    if (N < 1) throw std::invalid_argument("arc_partition: N must be >= 1");
    ArcPartition p{N, {}};
    for (i64 q = 1; q <= N; ++q)
        for (i64 a = 1; a <= q; ++a)
            if (std::gcd(a, q) == 1) p.arcs.push_back({a, q, is_major(q, N)});
    return p;
}

/// Does t (a point of the circle) lie in the open arc?
inline bool arc_contains(const Arc& arc, i64 N, double t) {
    double dist = std::abs(mod1(t) - arc.center().to_double());
    dist = std::min(dist, 1.0 - dist);
    return dist * static_cast<double>(N) * static_cast<double>(arc.q) < 1.0;
}

struct CoverageSweep {
    i64 max_count = 0;  // sup over (0,1] of the number of arcs containing a point
    i64 min_count = 0;  // inf over (0,1]
};

/// Exact endpoint sweep of sum_J 1_J over (0,1] for the given arcs.
inline CoverageSweep sweep_arcs(std::span<const Arc> arcs, i64 N) {
    struct Event {
        Rational x;
        int delta;
    };
    std::vector<Event> ev;
    ev.reserve(2 * arcs.size() + 2);
    for (const Arc& arc : arcs) {
        if (N * arc.q == 1) {  // length 2: the whole circle, counted once
            ev.push_back({Rational(0, 1), +1});
            ev.push_back({Rational(2, 1), -1});
            continue;
        }
        ev.push_back({arc.lo(N), +1});
        ev.push_back({arc.hi(N), -1});
        if (arc.a == arc.q) {  // the arc around 1 wraps to (-1/N, 1/N)
            ev.push_back({Rational(-1, N * arc.q), +1});
            ev.push_back({Rational(1, N * arc.q), -1});
        }
    }
    std::sort(ev.begin(), ev.end(), [](const Event& l, const Event& r) {
        const auto c = l.x <=> r.x;
        if (c != 0) return c < 0;
        return l.delta < r.delta;  // open intervals: ends before starts
    });

    const Rational zero(0, 1), one(1, 1);
    CoverageSweep out{0, std::numeric_limits<i64>::max()};
    if (ev.empty() || ev.front().x > zero) out.min_count = 0;
    i64 count = 0;
    std::size_t i = 0;
    while (i < ev.size()) {
        const Rational x = ev[i].x;
        std::size_t j = i;
        while (j < ev.size() && ev[j].x == x && ev[j].delta < 0) count += ev[j++].delta;
        if (x > zero && x <= one) out.min_count = std::min(out.min_count, count);  // the point x itself
        while (j < ev.size() && ev[j].x == x) count += ev[j++].delta;
        // open gap (x, next)
        const bool gap_in_unit = x < one && (j == ev.size() || ev[j].x > zero);
        if (gap_in_unit) {
            out.max_count = std::max(out.max_count, count);
            out.min_count = std::min(out.min_count, count);
        }
        i = j;
    }
    if (ev.empty() || ev.back().x < one) out.min_count = 0;
    return out;
}

struct OverlapReport {
    i64 major_max = 0;
    i64 minor_max = 0;
    i64 combined_max = 0;
    i64 min_coverage = 0;
};

inline OverlapReport arc_overlap(const ArcPartition& p) {
    std::vector<Arc> major, minor;
    for (const Arc& a : p.arcs) (a.major ? major : minor).push_back(a);
    OverlapReport r;
    r.major_max = major.empty() ? 0 : sweep_arcs(major, p.N).max_count;
    r.minor_max = minor.empty() ? 0 : sweep_arcs(minor, p.N).max_count;
    const auto all = sweep_arcs(p.arcs, p.N);
    r.combined_max = all.max_count;
    r.min_coverage = all.min_count;
    return r;
}

/// ||sum_major 1_J||_inf + ||sum_minor 1_J||_inf <= 100 with disjoint major
/// arcs and full coverage of (0,1].
inline BoundAudit overlap_audit(const ArcPartition& p) {
    const OverlapReport r = arc_overlap(p);
    BoundAudit a;
    a.name = "arc_overlap";
    a.parameter_names = {"N"};
    a.add_row({static_cast<double>(p.N)}, static_cast<double>(r.major_max + r.minor_max), 100.0);
    a.set_constant("major_max", static_cast<double>(r.major_max));
    a.set_constant("minor_max", static_cast<double>(r.minor_max));
    a.set_constant("combined_max", static_cast<double>(r.combined_max));
    a.set_constant("min_coverage", static_cast<double>(r.min_coverage));
    a.pass = r.major_max <= 1 && r.major_max + r.minor_max <= 100 && r.min_coverage >= 1;
    a.details = {{"arcs", p.arcs.size()}, {"major_arcs", p.major_count()}};
    return a;
}

/// One-dimensional Gauss sum sum_{l mod q} e^{2 pi i (a l^2 + k l)/q}.
inline cplx gauss_sum_1d(i64 a, i64 q, i64 k) {
    if (q < 1) throw std::invalid_argument("gauss_sum: q must be >= 1");
    if (std::gcd(a, q) != 1) throw std::invalid_argument("gauss_sum: gcd(a, q) must be 1");
    const i64 am = ((a % q) + q) % q, km = ((k % q) + q) % q;
    CompensatedComplexSum s;
    for (i64 l = 0; l < q; ++l) {
        const auto e = static_cast<i64>((static_cast<__int128>(am) * l % q * l + static_cast<__int128>(km) * l) % q);
        s.add(unit_phase(static_cast<double>(e) / static_cast<double>(q)));
    }
    return s.value();
}

/// d-dimensional Gauss sum over Z_q^d as the product of one-dimensional sums.
inline cplx gauss_sum(i64 a, i64 q, std::span<const i64> k) {
    if (k.empty()) throw std::invalid_argument("gauss_sum: k must have length d >= 1");
    cplx prod = 1.0;
    for (i64 kj : k) prod *= gauss_sum_1d(a, q, kj);
    return prod;
}

/// All one-dimensional Gauss sums G(a, k; q), k = 0..q-1, via one FFT of
/// the sequence e^{2 pi i a l^2 / q}.
inline std::vector<cplx> gauss_sums_all_k(i64 a, i64 q) {
    if (q < 1) throw std::invalid_argument("gauss_sum: q must be >= 1");
    if (std::gcd(a, q) != 1) throw std::invalid_argument("gauss_sum: gcd(a, q) must be 1");
    std::vector<cplx> v(static_cast<std::size_t>(q));
    const i64 am = ((a % q) + q) % q;
    for (i64 l = 0; l < q; ++l)
        v[l] = unit_phase(static_cast<double>(static_cast<i64>(static_cast<__int128>(am) * l % q * l % q)) / static_cast<double>(q));
    const int shape[1] = {static_cast<int>(q)};
    fft_inplace(v, shape, FftSign::backward);
    return v;
}

struct Lemma6Options {
    bool inclusive = true;      // d(n, Q) counts divisors <= Q
    std::size_t monotone_from = 1;  // index into Q_list where the non-increasing check starts
};

/// For each Q: C(Q) = max_n sum_{Q<=q<2Q} |c_q(n)| / (d(n,Q) Q^{1+eps}).
/// Passes when C(Q) is non-increasing from Q_list[monotone_from] on.
inline BoundAudit lemma6_audit(const std::vector<i64>& Q_list, const std::vector<i64>& n_list, double epsilon,
                               Lemma6Options opt = {}) {
    if (Q_list.empty() || n_list.empty()) throw std::invalid_argument("lemma6_audit: empty parameter grid");
    for (i64 Q : Q_list)
        if (Q < 1) throw std::invalid_argument("lemma6_audit: Q must be >= 1");
    for (i64 n : n_list)
        if (n == 0) throw std::invalid_argument("lemma6_audit: n must be nonzero");
    BoundAudit audit;
    audit.name = "ramanujan_divisor_bound";
    audit.epsilon = epsilon;
    audit.parameter_names = {"Q", "n", "d_n_Q", "d_n_Q_strict"};
    std::vector<double> per_q;
    for (i64 Q : Q_list) {
        double cq = 0.0;
        for (i64 n : n_list) {
            i64 lhs = 0;
            for (i64 q = Q; q < 2 * Q; ++q) lhs += std::abs(ramanujan_sum_mobius(q, n));
            const i64 dn = divisor_count(n, static_cast<double>(Q), opt.inclusive);
            const i64 dn_other = divisor_count(n, static_cast<double>(Q), !opt.inclusive);
            const double shape = static_cast<double>(dn) * std::pow(static_cast<double>(Q), 1.0 + epsilon);
            audit.add_row({static_cast<double>(Q), static_cast<double>(n), static_cast<double>(opt.inclusive ? dn : dn_other),
                           static_cast<double>(opt.inclusive ? dn_other : dn)},
                          static_cast<double>(lhs), shape);
            cq = std::max(cq, static_cast<double>(lhs) / shape);
        }
        per_q.push_back(cq);
        audit.set_constant("C_Q=" + std::to_string(Q), cq);
    }
    audit.set_constant("C_eps", *std::max_element(per_q.begin(), per_q.end()));
    bool monotone = true;
    for (std::size_t i = std::max<std::size_t>(opt.monotone_from, 1); i < per_q.size(); ++i)
        if (per_q[i] > per_q[i - 1] * (1.0 + 1e-12)) monotone = false;
    audit.pass = monotone;
    audit.details = {{"per_Q_constants", per_q}, {"Q_list", Q_list}, {"inclusive_divisor_count", opt.inclusive},
                     {"monotone_from_Q", Q_list[std::min(opt.monotone_from, Q_list.size() - 1)]}};
    return audit;
}

/// |G(a, k; q)| <= (2q)^{d/2} for every q <= q_max, a coprime to q and k in
/// Z_q^d. The d-dimensional sum factorises, so its sup over k is the d-th
/// power of the one-dimensional sup. One row per (q, d); tol is relative.
inline BoundAudit gauss_bound_audit(i64 q_max, const std::vector<int>& dims, double tol = 1e-9) {
    if (q_max < 1) throw std::invalid_argument("gauss_bound_audit: q_max must be >= 1");
    if (dims.empty()) throw std::invalid_argument("gauss_bound_audit: no dimensions");
    for (int d : dims)
        if (d < 1) throw std::invalid_argument("gauss_bound_audit: d must be >= 1");
    BoundAudit audit;
    audit.name = "gauss_sum_bound";
    audit.parameter_names = {"q", "d", "a_at", "k_at"};
    double worst = 0.0;
    for (i64 q = 1; q <= q_max; ++q) {
        double mx = 0.0;
        i64 a_at = 1, k_at = 0;
        for (i64 a = 1; a <= q; ++a) {
            if (std::gcd(a, q) != 1) continue;
            const auto all = gauss_sums_all_k(a, q);
            for (i64 k = 0; k < q; ++k)
                if (std::abs(all[static_cast<std::size_t>(k)]) > mx) mx = std::abs(all[static_cast<std::size_t>(k)]), a_at = a, k_at = k;
        }
        for (int d : dims) {
            const double lhs = std::pow(mx, d), rhs = std::pow(2.0 * static_cast<double>(q), d / 2.0);
            audit.add_row({static_cast<double>(q), static_cast<double>(d), static_cast<double>(a_at), static_cast<double>(k_at)},
                          lhs, rhs);
            worst = std::max(worst, lhs / rhs);
        }
    }
    // Equality case q = 4, a = 1, k = 0: G = 2 + 2i.
    const double witness = q_max >= 4 ? std::abs(gauss_sum_1d(1, 4, 0)) / std::sqrt(8.0) : 0.0;
    audit.set_constant("C", worst);
    audit.set_constant("equality_witness_ratio", witness);
    audit.pass = worst <= 1.0 + tol && (q_max < 4 || std::abs(witness - 1.0) <= tol);
    audit.details = {{"q_max", q_max}, {"dims", dims}, {"tolerance", tol}};
    return audit;
}

}  // namespace paralab

#endif  // PARALAB_CIRCLE_HPP
