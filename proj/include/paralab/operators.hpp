#ifndef PARALAB_OPERATORS_HPP
#define PARALAB_OPERATORS_HPP

// Multilinear averages along (m, m^2) on Z, K-admissible maximal functions,
// the dyadic pieces T_M and the truncated kernel transform, plus empirical
// operator-norm lower bounds and the torus multilinear estimate.
//
// Every norm estimate is a certified lower bound: the stored witness attains
// best_ratio. Stability across window lengths is a heuristic, reported apart.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "paralab/audit.hpp"
#include "paralab/numeric.hpp"
#include "paralab/sequence.hpp"
#include "paralab/torus.hpp"

namespace paralab {

using ScaleTuple = std::vector<i64>;

namespace detail {

inline void check_scales(const ScaleTuple& M) {
    if (M.empty()) throw std::invalid_argument("scale tuple must be nonempty");
    for (i64 m : M)
        if (m < 1) throw std::invalid_argument("scales must be >= 1");
}

inline bool is_power_of_two(i64 v) { return v >= 1 && (v & (v - 1)) == 0; }

// out(n) += w * f1(n - a) * f2(n - b) for every n where both factors are in
// support; out must already cover that range.
inline void add_shifted_product(SequenceField& out, const SequenceField& f1, i64 a, const SequenceField& f2, i64 b,
                                cplx w) {
    const i64 lo = std::max({f1.lo() + a, f2.lo() + b, out.lo()});
    const i64 hi = std::min({f1.hi() + a, f2.hi() + b, out.hi()});
    for (i64 n = lo; n <= hi; ++n) out.ref(n) += w * f1.at(n - a) * f2.at(n - b);
}

}  // namespace detail

/// A_M(f_1..f_{d+1})(n) = (M_1..M_d)^{-1} sum_{1<=m_j<=M_j}
///   f_1(n-m_1)..f_d(n-m_d) f_{d+1}(n - |m|^2).
/// The output interval is the hull of the n at which some term has every
/// factor in support; it is empty when no such n exists.
inline SequenceField multilinear_average(const ScaleTuple& M, const std::vector<SequenceField>& f) {
    detail::check_scales(M);
    const std::size_t d = M.size();
    if (f.size() != d + 1) throw std::invalid_argument("multilinear_average: need d + 1 fields");
    for (const auto& g : f)
        if (g.empty()) return {};
    // Calls visit(m, |m|^2, a, b) for every tuple whose factors are all in
    // support on the nonempty range [a, b].
    auto for_each_tuple = [&](auto&& visit) {
        ScaleTuple m(d, 1);
        while (true) {
            i64 s = 0;
            i64 a = f[d].lo(), b = f[d].hi();
            for (std::size_t j = 0; j < d; ++j) s += m[j] * m[j];
            a += s, b += s;
            for (std::size_t j = 0; j < d; ++j) {
                a = std::max(a, f[j].lo() + m[j]);
                b = std::min(b, f[j].hi() + m[j]);
            }
            if (a <= b) visit(m, s, a, b);
            std::size_t pos = 0;
            while (pos < d && ++m[pos] > M[pos]) m[pos++] = 1;
            if (pos == d) break;
        }
    };
    i64 lo = std::numeric_limits<i64>::max(), hi = std::numeric_limits<i64>::min();
    for_each_tuple([&](const ScaleTuple&, i64, i64 a, i64 b) { lo = std::min(lo, a), hi = std::max(hi, b); });
    if (lo > hi) return {};
    SequenceField out = SequenceField::zeros(lo, static_cast<std::size_t>(hi - lo + 1));
    for_each_tuple([&](const ScaleTuple& m, i64 s, i64 a, i64 b) {
        for (i64 n = a; n <= b; ++n) {
            cplx prod = f[d].at(n - s);
            for (std::size_t j = 0; j < d; ++j) prod *= f[j].at(n - m[j]);
            out.ref(n) += prod;
        }
    });
    double vol = 1.0;
    for (i64 v : M) vol *= static_cast<double>(v);
    for (auto& v : out.values()) v /= vol;
    return out;
}

/// True iff some K coordinates all satisfy max <= C * coordinate, i.e. the
/// K-th largest coordinate times C is at least the largest.
inline bool admissibility_check(int d, int K, const ScaleTuple& tuple, double C) {
    if (K < 1 || K > d) throw std::invalid_argument("admissibility_check: need 1 <= K <= d");
    if (static_cast<int>(tuple.size()) != d) throw std::invalid_argument("admissibility_check: tuple length != d");
    ScaleTuple s = tuple;
    std::sort(s.begin(), s.end(), std::greater<>());
    return static_cast<long double>(s.front()) <= static_cast<long double>(C) * static_cast<long double>(s[K - 1]);
}

/// Explicit finite K-admissible family of scale tuples with constant C.
class ScaleFamily {
public:
    ScaleFamily(int d, int K, std::vector<ScaleTuple> scales, double C) : d_(d), K_(K), C_(C), scales_(std::move(scales)) {
        if (d < 1 || K < 1 || K > d) throw std::invalid_argument("ScaleFamily: need d >= 1 and 1 <= K <= d");
        if (!(C > 0)) throw std::invalid_argument("ScaleFamily: admissibility constant must be positive");
        if (scales_.empty()) throw std::invalid_argument("ScaleFamily: empty family");
        for (const auto& t : scales_) {
            if (static_cast<int>(t.size()) != d) throw std::invalid_argument("ScaleFamily: tuple length != d");
            detail::check_scales(t);
            if (!admissibility_check(d, K, t, C)) throw std::invalid_argument("ScaleFamily: inadmissible tuple");
        }
    }

    /// Every tuple of powers of two up to 2^max_log2 that passes the test.
    static ScaleFamily dyadic(int d, int K, int max_log2, double C) {
        if (d < 1 || max_log2 < 0) throw std::invalid_argument("ScaleFamily::dyadic: bad arguments");
        std::vector<ScaleTuple> out;
        std::vector<int> e(static_cast<std::size_t>(d), 0);
        while (true) {
            ScaleTuple t;
            for (int x : e) t.push_back(i64{1} << x);
            if (admissibility_check(d, K, t, C)) out.push_back(std::move(t));
            std::size_t pos = 0;
            while (pos < e.size() && ++e[pos] > max_log2) e[pos++] = 0;
            if (pos == e.size()) break;
        }
        return {d, K, std::move(out), C};
    }

    /// Diagonal dyadic scales (N, .., N), N = 1, 2, .., 2^max_log2.
    static ScaleFamily diagonal(int d, int max_log2) {
        std::vector<ScaleTuple> out;
        for (int x = 0; x <= max_log2; ++x) out.emplace_back(static_cast<std::size_t>(d), i64{1} << x);
        return {d, d, std::move(out), 1.0};
    }

    int d() const { return d_; }
    int K() const { return K_; }
    double admissibility_constant() const { return C_; }
    const std::vector<ScaleTuple>& scales() const { return scales_; }

    /// K > 2d/(d+4), the regime with a uniform L^2 bound.
    bool theorem4_condition() const { return K_ * (d_ + 4) > 2 * d_; }

    nlohmann::json to_json() const {
        return {{"d", d_}, {"K", K_}, {"C", C_}, {"scales", scales_}, {"theorem4_condition", theorem4_condition()}};
    }

private:
    int d_, K_;
    double C_;
    std::vector<ScaleTuple> scales_;
};

struct MaximalOutput {
    SequenceField sup;     // sup over the family of |A_M|
    SequenceField square;  // (sum over the family of |A_M|^2)^{1/2} >= sup
};

inline MaximalOutput maximal_function(const ScaleFamily& family, const std::vector<SequenceField>& f) {
    if (f.size() != static_cast<std::size_t>(family.d()) + 1)
        throw std::invalid_argument("maximal_function: need d + 1 fields");
    SequenceField sup, sq;
    for (const auto& M : family.scales()) {
        const SequenceField a = multilinear_average(M, f).abs();
        SequenceField a2 = a;
        for (auto& v : a2.values()) v *= v;
        sq = sq + a2;
        if (sup.empty()) {
            sup = a;
            continue;
        }
        SequenceField merged = sup + SequenceField::zeros(a.lo(), a.size());
        for (i64 n = a.lo(); n <= a.hi(); ++n) merged.ref(n) = std::max(merged.at(n).real(), a.at(n).real());
        sup = std::move(merged);
    }
    for (auto& v : sq.values()) v = std::sqrt(v.real());
    return {std::move(sup), std::move(sq)};
}

/// Which half of the dyadic block: m in [M, 2M) or m in (-2M, -M].
enum class DyadicSide { positive, negative };

/// T_M(f1, f2)(n) = M^{-1} sum_{m ~ M} |f1(n - m) f2(n - m^2)|, M a power of two.
inline SequenceField tm_bilinear(const SequenceField& f1, const SequenceField& f2, i64 M,
                                 DyadicSide side = DyadicSide::positive) {
    if (!detail::is_power_of_two(M)) throw std::invalid_argument("tm_bilinear: M must be a power of two");
    if (f1.empty() || f2.empty()) return {};
    const i64 top = 2 * M - 1;
    const bool pos = side == DyadicSide::positive;
    const i64 lo = std::max(pos ? f1.lo() + M : f1.lo() - top, f2.lo() + M * M);
    const i64 hi = std::min(pos ? f1.hi() + top : f1.hi() - M, f2.hi() + top * top);
    if (lo > hi) return {};
    SequenceField out = SequenceField::zeros(lo, static_cast<std::size_t>(hi - lo + 1));
    const SequenceField a1 = f1.abs(), a2 = f2.abs();
    const cplx w = 1.0 / static_cast<double>(M);
    for (i64 m = M; m <= top; ++m) detail::add_shifted_product(out, a1, pos ? m : -m, a2, m * m, w);
    return out;
}

/// Kernel with |K(n)| <= envelope / |n| for n != 0.
struct Kernel {
    std::string name;
    std::function<double(i64)> value;
    double envelope = 1.0;

    static Kernel inverse() {
        return {"inverse", [](i64 n) { return 1.0 / static_cast<double>(n); }, 1.0};
    }
    static Kernel abs_inverse() {
        return {"abs_inverse", [](i64 n) { return 1.0 / static_cast<double>(n < 0 ? -n : n); }, 1.0};
    }
    static Kernel from_string(const std::string& s) {
        if (s == "inverse") return inverse();
        if (s == "abs_inverse") return abs_inverse();
        throw std::invalid_argument("unknown kernel: " + s);
    }
};

/// Largest |m| with (n - m) in supp f1 and (n - m^2) in supp f2 for some n:
/// m^2 - m ranges over differences of the two supports.
inline i64 kernel_truncation_radius(const SequenceField& f1, const SequenceField& f2) {
    if (f1.empty() || f2.empty()) return 0;
    const i64 span = f1.hi() - f2.lo();
    if (span < 0) return 0;
    i64 r = static_cast<i64>(std::sqrt(static_cast<double>(span))) + 2;
    while (r > 0 && r * r - r > span) --r;
    return r;
}

/// T(f1, f2)(n) = sum_{m != 0} K(m) f1(n - m) f2(n - m^2), summed over every
/// m that can contribute. Throws if K leaves its envelope on that range.
inline SequenceField kernel_transform(const SequenceField& f1, const SequenceField& f2, const Kernel& K) {
    const i64 R = kernel_truncation_radius(f1, f2);
    if (R == 0) return {};
    i64 lo = std::numeric_limits<i64>::max(), hi = std::numeric_limits<i64>::min();
    for (i64 m = -R; m <= R; ++m) {
        if (m == 0) continue;
        const double k = K.value(m);
        if (!(std::abs(k) * static_cast<double>(m < 0 ? -m : m) <= K.envelope * (1 + 1e-12)))
            throw std::invalid_argument("kernel_transform: kernel " + K.name + " violates its 1/|n| envelope at n = " +
                                        std::to_string(m));
        const i64 a = std::max(f1.lo() + m, f2.lo() + m * m), b = std::min(f1.hi() + m, f2.hi() + m * m);
        if (a <= b) lo = std::min(lo, a), hi = std::max(hi, b);
    }
    if (lo > hi) return {};
    SequenceField out = SequenceField::zeros(lo, static_cast<std::size_t>(hi - lo + 1));
    for (i64 m = -R; m <= R; ++m)
        if (m != 0) detail::add_shifted_product(out, f1, m, f2, m * m, K.value(m));
    return out;
}

/// C sum_M (T_M^+ + T_M^-)(f1, f2): since |K(m)| <= C/|m| <= C/M on |m| ~ M,
/// this majorises |kernel_transform| pointwise.
inline SequenceField dyadic_majorant(const SequenceField& f1, const SequenceField& f2, double envelope) {
    const i64 R = kernel_truncation_radius(f1, f2);
    SequenceField out;
    for (i64 M = 1; M <= R; M *= 2)
        out = out + tm_bilinear(f1, f2, M, DyadicSide::positive) + tm_bilinear(f1, f2, M, DyadicSide::negative);
    return out.scaled(envelope);
}

// ---------------------------------------------------------------------------
// Operator-norm lower bounds.

struct NormEstimateOptions {
    std::vector<int> window_log2{6, 7, 8, 9, 10, 11, 12};
    int trials = 8;
    std::uint64_t seed = 1;
    double stability_threshold = 2.0;
    int max_window_log2 = 14;
    unsigned threads = 1;
};

struct OperatorNormEstimate {
    std::string tag;
    int trials = 0;
    std::uint64_t seed = 0;
    double best_ratio = 0.0;
    std::string witness;             // "random", "ones" or "delta"
    std::uint64_t witness_seed = 0;  // per-trial seed for a random witness
    int witness_window_log2 = 0;
    std::vector<std::pair<int, double>> per_window;         // best over every witness
    std::vector<std::pair<int, double>> per_window_random;  // best over random trials
    double stability = 1.0;  // max/min of per_window
    bool stable = false;     // stability below the threshold
    bool theorem4_condition = true;
    nlohmann::json parameters = nlohmann::json::object();

    nlohmann::json to_json() const {
        nlohmann::json pw = nlohmann::json::array(), pr = nlohmann::json::array();
        for (const auto& [w, r] : per_window) pw.push_back({{"window_log2", w}, {"best_ratio", r}});
        for (const auto& [w, r] : per_window_random) pr.push_back({{"window_log2", w}, {"best_ratio", r}});
        return {{"operator", tag},
                {"trials", trials},
                {"seed", seed},
                {"best_ratio", best_ratio},
                {"certified", "lower bound attained by the stored witness"},
                {"witness", {{"kind", witness}, {"seed", witness_seed}, {"window_log2", witness_window_log2}}},
                {"per_window", pw},
                {"per_window_random", pr},
                {"stability_heuristic", {{"spread", stability}, {"stable", stable}}},
                {"theorem4_condition", theorem4_condition},
                {"parameters", parameters}};
    }
};

/// One operator under test: its arity, where each input window starts for a
/// window of length L, and aligned delta inputs giving a nonzero output.
struct OperatorUnderTest {
    std::string tag;
    std::size_t arity = 2;
    std::function<SequenceField(const std::vector<SequenceField>&)> apply;
    std::function<std::vector<i64>(i64)> window_starts;
    std::vector<SequenceField> deltas;
};

/// Random complex Gaussian inputs (per-trial seeds derived from the master
/// seed), all-ones windows and the aligned deltas, for each window length.
inline OperatorNormEstimate estimate_operator_norm(const OperatorUnderTest& op, const NormEstimateOptions& opt) {
    if (opt.trials < 1) throw std::invalid_argument("operator_norm_estimate: trials must be >= 1");
    if (opt.window_log2.empty()) throw std::invalid_argument("operator_norm_estimate: no windows");
    for (int w : opt.window_log2)
        if (w < 0 || w > opt.max_window_log2)
            throw std::invalid_argument("operator_norm_estimate: window 2^" + std::to_string(w) + " exceeds the cap 2^" +
                                        std::to_string(opt.max_window_log2));
    OperatorNormEstimate est;
    est.tag = op.tag;
    est.trials = opt.trials;
    est.seed = opt.seed;
    est.best_ratio = -1.0;
    auto consider = [&](double r, const char* kind, std::uint64_t s, int w) {
        if (r > est.best_ratio) est.best_ratio = r, est.witness = kind, est.witness_seed = s, est.witness_window_log2 = w;
    };
    const double delta_ratio = norm_ratio(op.apply(op.deltas), op.deltas);
    for (int w : opt.window_log2) {
        const i64 L = i64{1} << w;
        const auto starts = op.window_starts(L);
        std::vector<double> ratios(static_cast<std::size_t>(opt.trials));
        std::vector<std::uint64_t> seeds(ratios.size());
        auto run = [&](unsigned shard, unsigned nshards) {
            for (std::size_t t = shard; t < ratios.size(); t += nshards) {
                seeds[t] = derive_seed(opt.seed, (static_cast<std::uint64_t>(w) << 32) | t);
                std::vector<SequenceField> in;
                for (std::size_t j = 0; j < op.arity; ++j)
                    in.push_back(SequenceField::gaussian(starts[j], static_cast<std::size_t>(L), derive_seed(seeds[t], j)));
                ratios[t] = norm_ratio(op.apply(in), in);
            }
        };
        const unsigned nt = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(ratios.size())));
        if (nt == 1) {
            run(0, 1);
        } else {
            std::vector<std::thread> pool;
            for (unsigned s = 0; s < nt; ++s) pool.emplace_back(run, s, nt);
            for (auto& th : pool) th.join();
        }
        double best_random = 0.0;
        for (std::size_t t = 0; t < ratios.size(); ++t) {
            best_random = std::max(best_random, ratios[t]);
            consider(ratios[t], "random", seeds[t], w);
        }
        std::vector<SequenceField> ones;
        for (std::size_t j = 0; j < op.arity; ++j) ones.push_back(SequenceField::ones(starts[j], static_cast<std::size_t>(L)));
        const double ones_ratio = norm_ratio(op.apply(ones), ones);
        consider(ones_ratio, "ones", 0, w);
        consider(delta_ratio, "delta", 0, w);
        est.per_window_random.emplace_back(w, best_random);
        est.per_window.emplace_back(w, std::max({best_random, ones_ratio, delta_ratio}));
    }
    std::vector<double> bests;
    for (const auto& pw : est.per_window) bests.push_back(pw.second);
    est.stability = spread(bests);
    est.stable = est.stability < opt.stability_threshold;
    return est;
}

/// Norm estimate for the maximal function over a family. Stability is only
/// claimed when the family satisfies K > 2d/(d+4).
inline OperatorNormEstimate maximal_norm_estimate(const ScaleFamily& family, const NormEstimateOptions& opt = {}) {
    const int d = family.d();
    OperatorUnderTest op;
    op.tag = "maximal";
    op.arity = static_cast<std::size_t>(d) + 1;
    op.apply = [&family](const std::vector<SequenceField>& f) { return maximal_function(family, f).sup; };
    op.window_starts = [d](i64) { return std::vector<i64>(static_cast<std::size_t>(d) + 1, 0); };
    // m = (1, .., 1) at n = 1.
    for (int j = 0; j < d; ++j) op.deltas.push_back(SequenceField::delta(0));
    op.deltas.push_back(SequenceField::delta(1 - d));
    auto est = estimate_operator_norm(op, opt);
    est.theorem4_condition = family.theorem4_condition();
    est.stable = est.stable && est.theorem4_condition;
    est.parameters = family.to_json();
    return est;
}

/// Norm estimate for T_M. The second window is centred on the shifts n - m^2
/// of the middle of the block, where the two inputs interact.
inline OperatorNormEstimate tm_norm_estimate(i64 M, const NormEstimateOptions& opt = {}) {
    if (!detail::is_power_of_two(M)) throw std::invalid_argument("tm_norm_estimate: M must be a power of two");
    OperatorUnderTest op;
    op.tag = "tm_bilinear";
    op.apply = [M](const std::vector<SequenceField>& f) { return tm_bilinear(f[0], f[1], M); };
    const i64 mid = M + M / 2;
    op.window_starts = [mid](i64) { return std::vector<i64>{0, mid - mid * mid}; };
    // m = M at n = M.
    op.deltas = {SequenceField::delta(0), SequenceField::delta(M - M * M)};
    auto est = estimate_operator_norm(op, opt);
    est.parameters = {{"M", M}};
    return est;
}

inline OperatorNormEstimate kernel_norm_estimate(const Kernel& K, const NormEstimateOptions& opt = {}) {
    OperatorUnderTest op;
    op.tag = "kernel_transform";
    op.apply = [K](const std::vector<SequenceField>& f) { return kernel_transform(f[0], f[1], K); };
    op.window_starts = [](i64) { return std::vector<i64>{0, 0}; };
    // m = 1 at n = 1.
    op.deltas = {SequenceField::delta(0), SequenceField::delta(0)};
    auto est = estimate_operator_norm(op, opt);
    est.parameters = {{"kernel", K.name}, {"envelope", K.envelope}};
    return est;
}

/// Best T_M ratio against M^{-1/2+eps} over a dyadic M list. Passes when the
/// log-log slope of the best ratio is at most max_slope.
inline BoundAudit tm_decay_audit(const std::vector<i64>& M_list, int trials = 50, int window_log2 = 12,
                                 std::uint64_t seed = 1, double eps = 0.1, double max_slope = -0.35) {
    if (M_list.size() < 2) throw std::invalid_argument("tm_decay_audit: need at least two M");
    BoundAudit audit;
    audit.name = "tm_decay";
    audit.epsilon = eps;
    audit.parameter_names = {"M"};
    std::vector<double> ms, best, random;
    nlohmann::json cells = nlohmann::json::array();
    for (i64 M : M_list) {
        NormEstimateOptions opt;
        opt.window_log2 = {window_log2};
        opt.trials = trials;
        opt.seed = derive_seed(seed, static_cast<std::uint64_t>(M));
        const auto est = tm_norm_estimate(M, opt);
        const double m = static_cast<double>(M);
        audit.add_row({m}, est.best_ratio, std::pow(m, -0.5 + eps));
        ms.push_back(m);
        best.push_back(est.best_ratio);
        random.push_back(est.per_window_random.front().second);
        cells.push_back({{"M", M}, {"best_ratio", est.best_ratio}, {"best_random_ratio", random.back()},
                         {"witness", est.witness}, {"witness_seed", est.witness_seed}});
    }
    const double slope = log_log_fit(ms, best).slope;
    audit.set_constant("slope", slope);
    audit.set_constant("C", audit.minimal_constant());
    audit.pass = slope <= max_slope;
    audit.details = {{"trials", trials},           {"window_log2", window_log2},
                     {"seed", seed},               {"max_slope", max_slope},
                     {"random_slope", log_log_fit(ms, random).slope},
                     {"cells", cells}};
    return audit;
}

// ---------------------------------------------------------------------------
// Torus multilinear estimate.

/// ||F_1(x_1)..F_M(x_M) F_{M+1}(x_1+..+x_M)||_{L^p(T^M)} <= prod ||F_j||_{L^2(T)}
/// for 1 <= p <= 2M/(M+1). F_j(x) = sum_n a_n e^{2 pi i n x} with a_n taken
/// from one-dimensional coefficient fields. The L^p norm is a grid mean
/// starting at R = oversample * (2 max degree + 1). |G|^p has kinks at zeros
/// of G, so the grid is doubled until two successive means agree to rel_tol
/// or the next grid would exceed grid_cap. Pass uses the finest grid.
inline BoundAudit torus_multilinear_check(const std::vector<CoefficientField>& F, double p, int oversample = 4,
                                          double rel_tol = 1e-6, std::size_t grid_cap = std::size_t{1} << 22) {
    if (F.size() < 2) throw std::invalid_argument("torus_multilinear_check: need M + 1 >= 2 functions");
    const int M = static_cast<int>(F.size()) - 1;
    const double p_max = 2.0 * M / (M + 1.0);
    if (!(p >= 1.0 && p <= p_max * (1 + 1e-15)))
        throw std::invalid_argument("torus_multilinear_check: p must lie in [1, 2M/(M+1)]");
    if (oversample < 1) throw std::invalid_argument("torus_multilinear_check: oversample must be >= 1");
    int deg = 0;
    double rhs = 1.0;
    for (const auto& f : F) {
        if (f.box().dimension() != 1) throw std::invalid_argument("torus_multilinear_check: fields must be one-dimensional");
        rhs *= std::sqrt(f.l2_norm_sq());
    }
    for (int j = 0; j < M; ++j) deg = std::max(deg, F[static_cast<std::size_t>(j)].box().radius(0) + F.back().box().radius(0));
    auto grid_size = [M](int R) {
        long double t = 1;
        for (int j = 0; j < M; ++j) t *= R;
        return t;
    };

    auto lp_at = [&](int R) {
        std::size_t total = 1;
        for (int j = 0; j < M; ++j) {
            if (total > grid_cap / static_cast<std::size_t>(R)) throw std::length_error("torus_multilinear_check: grid too large");
            total *= static_cast<std::size_t>(R);
        }
        // Samples F_j(r / R).
        std::vector<std::vector<cplx>> samples;
        for (const auto& f : F) {
            std::vector<cplx> s(static_cast<std::size_t>(R));
            const int N = f.box().radius(0);
            for (int r = 0; r < R; ++r) {
                CompensatedComplexSum acc;
                for (int n = -N; n <= N; ++n)
                    acc.add(f.coeffs()[static_cast<std::size_t>(n + N)] *
                            unit_phase(static_cast<double>((static_cast<i64>(n) * r) % R) / R));
                s[static_cast<std::size_t>(r)] = acc.value();
            }
            samples.push_back(std::move(s));
        }
        std::vector<int> idx(static_cast<std::size_t>(M), 0);
        CompensatedSum acc;
        while (true) {
            int sum = 0;
            double prod = 1.0;
            for (int j = 0; j < M; ++j) {
                prod *= std::abs(samples[static_cast<std::size_t>(j)][static_cast<std::size_t>(idx[j])]);
                sum = (sum + idx[j]) % R;
            }
            prod *= std::abs(samples.back()[static_cast<std::size_t>(sum)]);
            acc.add(std::pow(prod, p));
            std::size_t pos = 0;
            while (pos < idx.size() && ++idx[pos] == R) idx[pos++] = 0;
            if (pos == idx.size()) break;
        }
        return std::pow(acc.value() / static_cast<double>(total), 1.0 / p);
    };

    int R = oversample * (2 * deg + 1);
    if (grid_size(R) > static_cast<long double>(grid_cap)) throw std::length_error("torus_multilinear_check: grid too large");
    BoundAudit audit;
    audit.name = "torus_multilinear";
    audit.parameter_names = {"p", "resolution"};
    double prev = lp_at(R), fine = prev;
    audit.add_row({p, static_cast<double>(R)}, prev, rhs);
    bool converged = false;
    while (grid_size(2 * R) <= static_cast<long double>(grid_cap)) {
        R *= 2;
        fine = lp_at(R);
        audit.add_row({p, static_cast<double>(R)}, fine, rhs);
        const double delta = std::abs(fine - prev);
        prev = fine;
        if (delta <= rel_tol * std::max(fine, 1e-300)) {
            converged = true;
            break;
        }
    }
    const double delta = audit.rows() > 1 ? std::abs(audit.lhs.back() - audit.lhs[audit.rows() - 2]) : 0.0;
    const double ratio = rhs > 0 ? fine / rhs : (fine > 0 ? std::numeric_limits<double>::infinity() : 0.0);
    audit.set_constant("ratio", ratio);
    audit.set_constant("refinement_delta", delta);
    audit.pass = fine <= rhs * (1 + 1e-9);
    audit.details = {{"M", M}, {"p_max", p_max}, {"max_degree", deg}, {"oversample", oversample}, {"converged", converged}};
    return audit;
}

}  // namespace paralab

#endif  // PARALAB_OPERATORS_HPP
