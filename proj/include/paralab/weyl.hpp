#ifndef PARALAB_WEYL_HPP
#define PARALAB_WEYL_HPP

// Quadratic Weyl sums sum_{n=1}^N e^{2 pi i (t n^2 + x n)} and the audit of
//
//     |sum| <= C max{ N/sqrt(q), sqrt(N log q), sqrt(q log q) },
//
// with (a, q) the Dirichlet approximation of t at level N.

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "paralab/audit.hpp"
#include "paralab/circle.hpp"
#include "paralab/numeric.hpp"

namespace paralab {

inline constexpr i64 weyl_renormalise_every = 1024;

/// Phase recurrence: e_{n+1} = e_n r_n, r_{n+1} = r_n e^{4 pi i t}. Both
/// rotors are recomputed from exact reduced phases every 1024 steps.
inline cplx weyl_sum(double t, double x, i64 N) {
    if (N < 1) throw std::invalid_argument("weyl_sum: N must be >= 1");
    if (N >= (i64{1} << 26)) throw std::invalid_argument("weyl_sum: N must be < 2^26 so n^2 is exact");
    const cplx step2 = unit_phase(frac_mul(t, 2.0));
    CompensatedComplexSum s;
    cplx e{}, r{};
    for (i64 n = 1; n <= N; ++n) {
        if ((n - 1) % weyl_renormalise_every == 0) {
            const double nd = static_cast<double>(n);
            e = unit_phase(frac_mul(t, nd * nd) + frac_mul(x, nd));
            r = unit_phase(frac_mul(t, 2.0 * nd + 1.0) + x);
        } else {
            e *= r;
            r *= step2;
        }
        s.add(e);
    }
    return s.value();
}

/// max{ N/sqrt(q), sqrt(N log q), sqrt(q log q) }.
inline double weyl_shape(i64 N, i64 q) {
    const double n = static_cast<double>(N), qd = static_cast<double>(q), lq = std::log(qd);
    return std::max({n / std::sqrt(qd), std::sqrt(n * lq), std::sqrt(qd * lq)});
}

/// Per-N fitted constant max |weyl_sum| / shape over the (t, x) grid; passes
/// when the per-N constants span less than a factor `stability`.
inline BoundAudit weyl_bound_audit(const std::vector<double>& t_list, const std::vector<double>& x_list,
                                   const std::vector<i64>& N_list, double stability = 3.0) {
    if (t_list.empty() || x_list.empty() || N_list.empty()) throw std::invalid_argument("weyl_bound_audit: empty grid");
    BoundAudit audit;
    audit.name = "weyl_sum_bound";
    audit.parameter_names = {"t", "x", "N", "a", "q"};
    std::map<i64, double> per_n;
    for (i64 N : N_list)
        for (double t0 : t_list)
            for (double x : x_list) {
                const double t = mod1(t0) == 0.0 ? 1.0 : mod1(t0);
                const auto ra = dirichlet_approx(t, N);
                const double lhs = std::abs(weyl_sum(t, x, N));
                const double shape = weyl_shape(N, ra.q);
                audit.add_row({t, x, static_cast<double>(N), static_cast<double>(ra.a), static_cast<double>(ra.q)}, lhs,
                              shape);
                double& c = per_n[N];
                c = std::max(c, lhs / shape);
            }
    std::vector<double> consts;
    for (const auto& [n, c] : per_n) {
        audit.set_constant("C_N=" + std::to_string(n), c);
        consts.push_back(c);
    }
    audit.set_constant("C", *std::max_element(consts.begin(), consts.end()));
    audit.pass = spread(consts) < stability;
    audit.details = {{"spread", spread(consts)}, {"stability_threshold", stability}, {"dirichlet_level", "N"}};
    return audit;
}

}  // namespace paralab

#endif  // PARALAB_WEYL_HPP
