#ifndef PARALAB_LEVELSET_HPP
#define PARALAB_LEVELSET_HPP

// Level sets E_lambda = {(x, t) : |F(x, t)| > lambda} measured on uniform
// grids, the two-constant level-set inequality
//
//     lambda^2 |E|^2 <= C1 Q^{d/2} |E|^2 + C2 N^eps / Q |E|   (Q >= N),
//
// and the decay |E_lambda| <= C N^eps lambda^{-2(d+2)/d} that follows from it
// for lambda >= C N^{d/4}.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "paralab/audit.hpp"
#include "paralab/numeric.hpp"
#include "paralab/torus.hpp"

namespace paralab {

/// Sorted |F| over the nodes of one grid.
class MagnitudeSample {
public:
    MagnitudeSample() = default;
    MagnitudeSample(const CoefficientField& field, const std::vector<int>& resolution, GridOptions opt = {}) {
        const GridField g = sample_grid(field, resolution, opt);
        mags_.reserve(g.samples.size());
        for (const auto& v : g.samples) mags_.push_back(std::abs(v));
        std::sort(mags_.begin(), mags_.end());
    }

    /// Fraction of nodes with |F| > lambda.
    double measure_above(double lambda) const {
        const auto it = std::upper_bound(mags_.begin(), mags_.end(), lambda);
        return static_cast<double>(mags_.end() - it) / static_cast<double>(mags_.size());
    }
    double sup() const { return mags_.empty() ? 0.0 : mags_.back(); }
    /// Mean of |F|^p over the nodes.
    double mean_power(double p) const {
        std::vector<double> v(mags_.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::pow(mags_[i], p);
        return pairwise_sum(v) / static_cast<double>(v.size());
    }
    std::size_t size() const { return mags_.size(); }

private:
    std::vector<double> mags_;
};

/// Default level-set grid: the p = 4 aliasing-free resolution.
inline std::vector<int> default_level_resolution(const LatticeBox& box) { return aliasing_free_resolution(box, 2); }

inline std::vector<int> doubled(std::vector<int> r) {
    for (auto& v : r) v *= 2;
    return r;
}

struct LevelSetProfile {
    std::vector<double> lambda_grid;
    std::vector<double> measures;          // at `resolution`
    std::vector<int> resolution;
    std::vector<double> refinement_delta;  // |measure at doubled resolution - measure|
    double sup_abs = 0.0;                  // max |F| over the grid nodes
    bool unit_norm = true;

    nlohmann::json to_json() const {
        return {{"lambda_grid", lambda_grid}, {"measures", measures},       {"resolution", resolution},
                {"refinement_delta", refinement_delta}, {"sup_abs", sup_abs}, {"unit_norm", unit_norm}};
    }
};

/// lambda_i = i * top / points, i = 1..points.
inline std::vector<double> uniform_lambda_grid(double top, int points) {
    if (points < 1 || !(top > 0.0)) throw std::invalid_argument("uniform_lambda_grid: need points >= 1 and top > 0");
    std::vector<double> g;
    for (int i = 1; i <= points; ++i) g.push_back(top * i / points);
    return g;
}

inline LevelSetProfile level_set_profile(const CoefficientField& field, const std::vector<double>& lambda_grid,
                                         const std::vector<int>& resolution, GridOptions opt = {}) {
    if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end()))
        throw std::invalid_argument("level_set_profile: lambda grid must be increasing");
    LevelSetProfile out;
    out.lambda_grid = lambda_grid;
    out.resolution = resolution;
    out.unit_norm = std::abs(field.l2_norm_sq() - 1.0) <= 1e-9;
    if (!out.unit_norm) std::clog << "warning: level_set_profile on a field with l2 mass " << field.l2_norm_sq() << '\n';
    const MagnitudeSample coarse(field, resolution, opt), fine(field, doubled(resolution), opt);
    out.sup_abs = coarse.sup();
    for (double l : lambda_grid) {
        const double m = coarse.measure_above(l);
        out.measures.push_back(m);
        out.refinement_delta.push_back(std::abs(fine.measure_above(l) - m));
    }
    return out;
}

/// Layer-cake identity ||F||_p^p = int_0^inf p lambda^{p-1} |E_lambda| d lambda
/// over a profile on [0, sup |F|]. |E| is nonincreasing, so on each cell the
/// integral lies between the right and left endpoint values times the cell's
/// increment of lambda^p.
struct LayerCake {
    double lower = 0.0, upper = 0.0;  // monotone bracket of the integral
    double integral = 0.0;            // bracket midpoint
    double lp_power = 0.0;            // lp_norm^p of the field
    double refinement_delta = 0.0;    // change of the grid mean of |F|^p under doubling
    double tolerance = 0.0;           // half bracket width plus refinement delta
    bool consistent = false;
};

inline LayerCake layer_cake_check(const CoefficientField& field, double p, const std::vector<int>& resolution,
                                  int points = 4096, GridOptions opt = {}) {
    const MagnitudeSample coarse(field, resolution, opt), fine(field, doubled(resolution), opt);
    const double top = coarse.sup() * (1.0 + 1e-12);
    CompensatedSum lo, hi;
    double prev_pow = 0.0, prev_measure = coarse.measure_above(0.0);
    for (int i = 1; i <= points; ++i) {
        const double l = top * i / points;
        const double lp = std::pow(l, p), m = coarse.measure_above(l);
        lo.add(m * (lp - prev_pow));
        hi.add(prev_measure * (lp - prev_pow));
        prev_pow = lp, prev_measure = m;
    }
    LayerCake out;
    out.lower = lo.value();
    out.upper = hi.value();
    out.integral = 0.5 * (out.lower + out.upper);
    out.lp_power = std::pow(lp_norm_of(field, p, opt).value, p);
    out.refinement_delta = std::abs(fine.mean_power(p) - coarse.mean_power(p));
    out.tolerance = 0.5 * (out.upper - out.lower) + out.refinement_delta;
    out.consistent = std::abs(out.integral - out.lp_power) <= out.tolerance;
    return out;
}

// ---------------------------------------------------------------------------
// Two-constant level-set inequality.

/// Default Q list: N 2^j up to N^2.
inline std::vector<double> default_q_list(int N) {
    std::vector<double> q;
    for (double v = N; v <= static_cast<double>(N) * N; v *= 2) q.push_back(v);
    if (q.back() < static_cast<double>(N) * N) q.push_back(static_cast<double>(N) * N);
    return q;
}

struct LevelRow {
    double lambda, measure;
};

/// Minimal C2 for fixed C1: max over rows and Q of
/// (lambda^2 - C1 Q^{d/2})_+ |E| Q / N^eps. An empty Q list means every
/// Q >= N; the maximiser in Q is then (lambda^2 / (C1 (1 + d/2)))^{2/d},
/// clamped to N.
inline double minimal_c2(const std::vector<LevelRow>& rows, const std::vector<double>& Q_list, int d, int N,
                         double n_eps, double c1) {
    double c2 = 0.0;
    auto visit = [&](const LevelRow& r, double Q) {
        const double slack = r.lambda * r.lambda - c1 * std::pow(Q, d / 2.0);
        if (slack > 0.0) c2 = std::max(c2, slack * r.measure * Q / n_eps);
    };
    for (const auto& r : rows) {
        if (!Q_list.empty()) {
            for (double Q : Q_list) visit(r, Q);
        } else if (c1 > 0.0) {
            visit(r, std::max<double>(N, std::pow(r.lambda * r.lambda / (c1 * (1.0 + d / 2.0)), 2.0 / d)));
        } else {
            return std::numeric_limits<double>::infinity();
        }
    }
    return c2;
}

struct Theorem2Fit {
    double C1 = 0.0, C2 = 0.0;  // knee: the frontier point with C1 = C2
    double c1_zero = 0.0;       // smallest C1 with C2 = 0
    std::vector<std::pair<double, double>> frontier;  // (C1, minimal C2) on a log grid
    std::size_t rows = 0;
};

/// Scans C1 over a log grid below c1_zero, then bisects for the balanced knee.
/// An empty Q list fits the inequality for every Q >= N.
inline Theorem2Fit theorem2_fit(const std::vector<LevelRow>& rows, const std::vector<double>& Q_list, int d, int N,
                                double eps, int scan_points = 33) {
    Theorem2Fit fit;
    fit.rows = rows.size();
    if (rows.empty()) return fit;
    const double n_eps = std::pow(static_cast<double>(N), eps);
    const double qmin = Q_list.empty() ? static_cast<double>(N) : *std::min_element(Q_list.begin(), Q_list.end());
    for (const auto& r : rows) fit.c1_zero = std::max(fit.c1_zero, r.lambda * r.lambda / std::pow(qmin, d / 2.0));
    fit.c1_zero *= 1.0 + 8 * std::numeric_limits<double>::epsilon();  // absorbs the rounding of lambda^2 / Q^{d/2}
    for (int i = 0; i < scan_points; ++i) {
        const double c1 = fit.c1_zero * std::pow(10.0, -4.0 * (scan_points - 1 - i) / (scan_points - 1));
        fit.frontier.emplace_back(c1, minimal_c2(rows, Q_list, d, N, n_eps, c1));
    }
    // C2(C1) - C1 is decreasing; it is positive at C1 -> 0 and negative at c1_zero.
    double lo = 0.0, hi = fit.c1_zero;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (minimal_c2(rows, Q_list, d, N, n_eps, mid) > mid ? lo : hi) = mid;
    }
    fit.C1 = hi;
    fit.C2 = minimal_c2(rows, Q_list, d, N, n_eps, hi);
    return fit;
}

inline std::vector<LevelRow> level_rows(const MagnitudeSample& s, const std::vector<double>& lambda_grid) {
    std::vector<LevelRow> rows;
    for (double l : lambda_grid)
        if (const double m = s.measure_above(l); m > 0.0) rows.push_back({l, m});
    return rows;
}

struct Theorem2Options {
    std::vector<double> Q_list;         // empty: default_q_list(N)
    std::vector<double> lambda_grid;    // empty: uniform over (0, sup |F|]
    int lambda_points = 64;
    std::vector<int> resolution;        // empty: default_level_resolution
    double epsilon = 0.1;
    double refinement_tolerance = 1.25; // knee may move by at most this factor under doubling
};

/// One field: rows (lambda, Q) with |E| > 0, lhs lambda^2 |E|^2, rhs shape
/// C1 Q^{d/2} |E|^2 + C2 N^eps |E| / Q at the knee. Passes when the knee at
/// doubled resolution stays within the refinement tolerance.
inline BoundAudit theorem2_audit(const CoefficientField& field, Theorem2Options opt = {}) {
    const LatticeBox& box = field.box();
    const int d = box.dimension(), N = box.max_radius();
    if (opt.Q_list.empty()) opt.Q_list = default_q_list(N);
    for (double Q : opt.Q_list)
        if (Q < N) throw std::invalid_argument("theorem2_audit: every Q must be >= N");
    if (opt.resolution.empty()) opt.resolution = default_level_resolution(box);
    const MagnitudeSample coarse(field, opt.resolution), fine(field, doubled(opt.resolution));
    if (opt.lambda_grid.empty()) opt.lambda_grid = uniform_lambda_grid(coarse.sup(), opt.lambda_points);

    const auto rows = level_rows(coarse, opt.lambda_grid);
    const auto fit = theorem2_fit(rows, opt.Q_list, d, N, opt.epsilon);
    const auto fit_fine = theorem2_fit(level_rows(fine, opt.lambda_grid), opt.Q_list, d, N, opt.epsilon);

    BoundAudit audit;
    audit.name = "level_set_two_constant";
    audit.epsilon = opt.epsilon;
    audit.parameter_names = {"lambda", "Q", "measure"};
    const double n_eps = std::pow(static_cast<double>(N), opt.epsilon);
    std::size_t crossover_rows = 0;
    for (const auto& r : rows)
        for (double Q : opt.Q_list) {
            const double qd = std::pow(Q, d / 2.0);
            if (fit.C1 * qd >= r.lambda * r.lambda) ++crossover_rows;
            audit.add_row({r.lambda, Q, r.measure}, r.lambda * r.lambda * r.measure * r.measure,
                          fit.C1 * qd * r.measure * r.measure + fit.C2 * n_eps * r.measure / Q);
        }
    audit.set_constant("C1", fit.C1);
    audit.set_constant("C2", fit.C2);
    audit.set_constant("C1_fine", fit_fine.C1);
    audit.set_constant("C2_fine", fit_fine.C2);
    audit.set_constant("C1_zero", fit.c1_zero);
    const double change = (fit.C1 > 0 && fit_fine.C1 > 0) ? std::max(fit.C1 / fit_fine.C1, fit_fine.C1 / fit.C1) : 1.0;
    audit.pass = rows.empty() || change <= opt.refinement_tolerance;
    nlohmann::json frontier = nlohmann::json::array();
    for (const auto& [a, b] : fit.frontier) frontier.push_back({a, b});
    audit.details = {{"N", N},
                     {"d", d},
                     {"knee", "C1 = C2 on the minimal frontier"},
                     {"frontier", frontier},
                     {"refinement_change", change},
                     {"refinement_tolerance", opt.refinement_tolerance},
                     {"rows_past_crossover", crossover_rows},
                     {"resolution", opt.resolution},
                     {"vacuous_rows_skipped", opt.lambda_grid.size() - rows.size()}};
    return audit;
}

/// Knees of `fields_per_N` random unit fields at each N (d fixed). Per-N
/// constant is the largest knee C1 = C2 over the fields; passes when every
/// field is refinement-stable and the per-N constants span less than
/// `stability` at both resolutions.
inline BoundAudit theorem2_scaling_audit(int d, const std::vector<int>& N_list, int fields_per_N, std::uint64_t seed,
                                         double eps = 0.1, double stability = 5.0) {
    BoundAudit audit;
    audit.name = "level_set_two_constant_scaling";
    audit.epsilon = eps;
    audit.parameter_names = {"N", "field", "C1", "C2", "C1_fine"};
    std::vector<double> per_n, per_n_fine;
    bool refine_ok = true;
    nlohmann::json cells = nlohmann::json::array();
    for (int N : N_list) {
        double worst = 0.0, worst_fine = 0.0;
        for (int f = 0; f < fields_per_N; ++f) {
            const auto field = CoefficientField::random_unit(
                LatticeBox::cube(d, N), derive_seed(seed, static_cast<std::uint64_t>(N) * 1000003u + static_cast<unsigned>(f)));
            Theorem2Options opt;
            opt.epsilon = eps;
            const auto a = theorem2_audit(field, opt);
            refine_ok = refine_ok && a.pass;
            const double c1 = a.constant("C1"), c2 = a.constant("C2"), c1f = a.constant("C1_fine");
            audit.add_row({static_cast<double>(N), static_cast<double>(f), c1, c2, c1f}, std::max(c1, c2), 1.0);
            worst = std::max(worst, std::max(c1, c2));
            worst_fine = std::max(worst_fine, std::max(c1f, a.constant("C2_fine")));
        }
        audit.set_constant("C_N=" + std::to_string(N), worst);
        per_n.push_back(worst);
        per_n_fine.push_back(worst_fine);
        cells.push_back({{"N", N}, {"knee", worst}, {"knee_fine", worst_fine}});
    }
    audit.set_constant("C", *std::max_element(per_n.begin(), per_n.end()));
    audit.pass = refine_ok && spread(per_n) < stability && spread(per_n_fine) < stability;
    audit.details = {{"spread", spread(per_n)},     {"spread_fine", spread(per_n_fine)}, {"stability_threshold", stability},
                     {"refinement_stable", refine_ok}, {"fields_per_N", fields_per_N}, {"seed", seed},
                     {"cells", cells}};
    return audit;
}

/// Rows lambda >= sqrt(2 C1) N^{d/4} (so that Q = (lambda^2 / (2 C1))^{2/d}
/// is admissible), lhs |E|, rhs shape N^eps lambda^{-2(d+2)/d}. The fitted
/// constant must not exceed 2 C2 (2 C1)^{2/d}, the value the two-constant
/// inequality implies at that Q. C1, C2 are the knee of the inequality fitted
/// over every Q >= N, since that Q is unbounded in lambda. Without rows the
/// audit passes vacuously.
inline BoundAudit corollary1_audit(const CoefficientField& field, double eps = 0.1, Theorem2Options opt = {}) {
    const LatticeBox& box = field.box();
    const int d = box.dimension(), N = box.max_radius();
    if (opt.resolution.empty()) opt.resolution = default_level_resolution(box);
    const MagnitudeSample s(field, opt.resolution);
    if (opt.lambda_grid.empty()) opt.lambda_grid = uniform_lambda_grid(std::max(s.sup(), 1e-300), opt.lambda_points);
    const auto knee = theorem2_fit(level_rows(s, opt.lambda_grid), {}, d, N, eps);
    const double C1 = knee.C1, C2 = knee.C2;

    const double exponent = 2.0 * (d + 2) / d;
    const double lambda0 = std::sqrt(2.0 * C1) * std::pow(static_cast<double>(N), d / 4.0);
    const double n_eps = std::pow(static_cast<double>(N), eps);
    BoundAudit audit;
    audit.name = "level_set_decay";
    audit.epsilon = eps;
    audit.parameter_names = {"lambda"};
    for (double l : opt.lambda_grid) {
        if (l < lambda0) continue;
        const double m = s.measure_above(l);
        if (m <= 0.0) continue;
        audit.add_row({l}, m, n_eps * std::pow(l, -exponent));
    }
    const double fitted = audit.rows() ? audit.minimal_constant() : 0.0;
    const double implied = 2.0 * C2 * std::pow(2.0 * C1, 2.0 / d);
    audit.set_constant("C1_prime", fitted);
    audit.set_constant("implied", implied);
    audit.set_constant("lambda0", lambda0);
    audit.pass = audit.rows() == 0 || fitted <= implied;
    audit.details = {{"exponent", exponent}, {"vacuous", audit.rows() == 0}, {"C1", C1}, {"C2", C2}};
    return audit;
}

}  // namespace paralab

#endif  // PARALAB_LEVELSET_HPP
