#ifndef PARALAB_STRICHARTZ_HPP
#define PARALAB_STRICHARTZ_HPP

// Certified lower bounds for the best constant K_{p,d,N} in
// ||F||_p <= K ||a||_2 over fields on S_{d,N}: every unit-norm witness gives
// K >= ||F||_p. The restriction constant A_{p,d,N} is K^2.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "paralab/audit.hpp"
#include "paralab/ledger.hpp"
#include "paralab/torus.hpp"

namespace paralab {

enum class WitnessStrategy { constant, random, delta };

inline std::string to_string(WitnessStrategy s) {
    switch (s) {
        case WitnessStrategy::constant: return "constant";
        case WitnessStrategy::random: return "random";
        case WitnessStrategy::delta: return "delta";
    }
    return "?";
}

inline WitnessStrategy witness_strategy_from_string(const std::string& s) {
    if (s == "constant") return WitnessStrategy::constant;
    if (s == "random") return WitnessStrategy::random;
    if (s == "delta") return WitnessStrategy::delta;
    throw std::invalid_argument("unknown witness strategy: " + s);
}

/// Unit-norm witness coefficients.
inline CoefficientField witness_field(int d, int N, WitnessStrategy s, std::uint64_t seed = 1) {
    const LatticeBox box = LatticeBox::cube(d, N);
    switch (s) {
        case WitnessStrategy::constant: return CoefficientField::ones(box).normalized();
        case WitnessStrategy::random: return CoefficientField::random_unit(box, seed);
        case WitnessStrategy::delta: return CoefficientField::delta0(box);
    }
    throw std::invalid_argument("witness_field: bad strategy");
}

struct StrichartzEstimate {
    double p = 2.0;
    int d = 1, N = 0;
    double lower_bound = 0.0;           // ||F||_p of the best witness
    std::string method;                 // "exact-even" or "grid"
    double restriction_constant = 0.0;  // lower_bound^2
    WitnessStrategy witness = WitnessStrategy::constant;
    std::vector<std::pair<WitnessStrategy, double>> per_strategy;
};

/// ||F||_p for a unit-norm field: exact ledger moment for even p, otherwise
/// the grid estimate.
inline double witness_norm(const CoefficientField& f, double p, std::string* method = nullptr) {
    if (!(p >= 2.0)) throw std::invalid_argument("strichartz_estimate: p must be >= 2");
    const double rp = std::round(p);
    if (rp == p && static_cast<long>(rp) % 2 == 0) {
        if (method) *method = "exact-even";
        return std::pow(even_moment(f, static_cast<int>(rp) / 2), 1.0 / p);
    }
    if (method) *method = "grid";
    return lp_norm_of(f, p).value;
}

/// Max over the requested witness strategies.
inline StrichartzEstimate strichartz_estimate(double p, int d, int N, const std::vector<WitnessStrategy>& strategies,
                                              std::uint64_t seed = 1) {
    if (strategies.empty()) throw std::invalid_argument("strichartz_estimate: no strategies");
    if (!(p >= 2.0)) throw std::invalid_argument("strichartz_estimate: p must be >= 2");
    StrichartzEstimate out;
    out.p = p, out.d = d, out.N = N;
    out.lower_bound = -1.0;
    for (auto s : strategies) {
        const double v = witness_norm(witness_field(d, N, s, seed), p, &out.method);
        out.per_strategy.emplace_back(s, v);
        if (v > out.lower_bound) out.lower_bound = v, out.witness = s;
    }
    out.restriction_constant = out.lower_bound * out.lower_bound;
    return out;
}

inline StrichartzEstimate strichartz_estimate(double p, int d, int N, WitnessStrategy s, std::uint64_t seed = 1) {
    return strichartz_estimate(p, d, N, std::vector<WitnessStrategy>{s}, seed);
}

inline StrichartzEstimate strichartz_estimate(double p, int d, int N) {
    return strichartz_estimate(p, d, N, {WitnessStrategy::constant, WitnessStrategy::random, WitnessStrategy::delta});
}

/// K_{p,d,N}^p <= C N^d K_{p-2,d,N}^{p-2} + C N^{dp/2 - d - 2 + eps} with both
/// K replaced by witness lower bounds (K_2 = 1 exactly). Only a one-sided
/// consistency check: the true constants are not computable. C_N is the
/// ratio at N; passes when no C_N exceeds `growth` times the first one.
inline BoundAudit corollary3_audit(int p, int d, const std::vector<int>& N_list, double eps = 0.1,
                                   double growth = 3.0, std::uint64_t seed = 1) {
    if (p < 4 || p % 2 != 0) throw std::invalid_argument("corollary3_audit: p must be an even integer >= 4");
    if (N_list.empty()) throw std::invalid_argument("corollary3_audit: empty N list");
    const std::vector<WitnessStrategy> all{WitnessStrategy::constant, WitnessStrategy::random, WitnessStrategy::delta};
    BoundAudit audit;
    audit.name = "moment_recurrence";
    audit.epsilon = eps;
    audit.parameter_names = {"N", "K_p_pow", "K_pm2_pow"};
    std::vector<double> per_n, first_term;
    nlohmann::json cells = nlohmann::json::array();
    for (int N : N_list) {
        const double n = static_cast<double>(N);
        const double lhs = std::pow(strichartz_estimate(p, d, N, all, seed).lower_bound, p);
        const double lower = (p == 4) ? 1.0 : std::pow(strichartz_estimate(p - 2, d, N, all, seed).lower_bound, p - 2);
        const double first = std::pow(n, d) * lower;
        const double second = std::pow(n, d * p / 2.0 - d - 2.0 + eps);
        audit.add_row({n, lhs, lower}, lhs, first + second);
        per_n.push_back(lhs / (first + second));
        first_term.push_back(lhs / first);
        audit.set_constant("C_N=" + std::to_string(N), per_n.back());
        cells.push_back({{"N", N}, {"C", per_n.back()}, {"C_first_term", first_term.back()}});
    }
    audit.set_constant("C", *std::max_element(per_n.begin(), per_n.end()));
    audit.set_constant("C_first_term", *std::max_element(first_term.begin(), first_term.end()));
    const double worst_growth = *std::max_element(per_n.begin(), per_n.end()) / per_n.front();
    audit.pass = worst_growth < growth;
    audit.details = {{"p", p}, {"d", d}, {"growth", worst_growth}, {"growth_threshold", growth},
                     {"witnesses", "constant, random, delta"}, {"seed", seed}, {"cells", cells},
                     {"note", "lower bounds on both sides; consistency check only"}};
    return audit;
}

/// ||S||_p for unit coefficients on prod_j [-N_j, N_j] with p = 2(d+2)/d:
/// exact ledger moment when p is an even integer, grid estimate otherwise.
inline double box_sum_norm(const LatticeBox& box, std::string* method = nullptr, const LedgerOptions& opt = {}) {
    const int d = box.dimension();
    const double p = 2.0 * (d + 2) / d;
    if (d <= 2) {
        if (method) *method = "exact-even";
        return std::pow(static_cast<double>(unit_even_moment(box, (d + 2) / d, opt)), 1.0 / p);
    }
    if (method) *method = "grid";
    std::clog << "warning: p = 2(d+2)/d is not an even integer for d = " << d << "; using grid quadrature\n";
    return lp_norm_of(CoefficientField::ones(box), p).value;
}

/// Slope of log ||S_N||_p against log N on square boxes; passes when it lies
/// in [d/2 - 0.05, d/2 + 0.2].
inline BoundAudit theorem3_exponent_fit(int d, const std::vector<int>& N_list, const LedgerOptions& opt = {}) {
    if (d < 1) throw std::invalid_argument("theorem3_exponent_fit: d must be >= 1");
    if (N_list.size() < 2) throw std::invalid_argument("theorem3_exponent_fit: need at least two N");
    BoundAudit audit;
    audit.name = "box_sum_exponent";
    audit.parameter_names = {"N"};
    std::vector<double> ns, norms;
    std::string method;
    for (int N : N_list) {
        const double v = box_sum_norm(LatticeBox::cube(d, N), &method, opt);
        const double n = static_cast<double>(N);
        audit.add_row({n}, v, std::pow(n, d / 2.0));
        ns.push_back(n);
        norms.push_back(v);
    }
    const double slope = log_log_fit(ns, norms).slope;
    const double lo = d / 2.0 - 0.05, hi = d / 2.0 + 0.2;
    audit.set_constant("slope", slope);
    audit.set_constant("C", audit.minimal_constant());
    audit.pass = slope >= lo && slope <= hi;
    audit.details = {{"p", 2.0 * (d + 2) / d}, {"d", d}, {"method", method}, {"slope_window", {lo, hi}}};
    return audit;
}

/// One-row audit of ||S||_p <= C (N_1..N_d)^{d/(2(d+2))} max N_j^{d/(d+2)}
/// on a rectangular box.
inline BoundAudit theorem3_rectangular(const std::vector<int>& radii, const LedgerOptions& opt = {}) {
    const int d = static_cast<int>(radii.size());
    const LatticeBox box(d, radii);
    std::string method;
    const double v = box_sum_norm(box, &method, opt);
    double prod = 1.0;
    for (int r : radii) prod *= r;
    const double rhs = std::pow(prod, d / (2.0 * (d + 2))) * std::pow(static_cast<double>(box.max_radius()), d / (d + 2.0));
    BoundAudit audit;
    audit.name = "box_sum_rectangular";
    audit.parameter_names.clear();
    for (int j = 1; j <= d; ++j) audit.parameter_names.push_back("N" + std::to_string(j));
    std::vector<double> params(radii.begin(), radii.end());
    audit.add_row(params, v, rhs);
    audit.set_constant("C", v / rhs);
    audit.pass = std::isfinite(v / rhs);
    audit.details = {{"p", 2.0 * (d + 2) / d}, {"method", method}};
    return audit;
}

}  // namespace paralab

#endif  // PARALAB_STRICHARTZ_HPP
