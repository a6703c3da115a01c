// paralab: command-line front end. Each subcommand runs one library
// operation, prints a one-line JSON summary and records its artifacts plus a
// run manifest in the results store. Exit codes: 0 pass, 1 audit failure or
// integrity error, 2 usage error.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "paralab/circle.hpp"
#include "paralab/damped_theta.hpp"
#include "paralab/decomposition.hpp"
#include "paralab/grid_io.hpp"
#include "paralab/ledger.hpp"
#include "paralab/levelset.hpp"
#include "paralab/operators.hpp"
#include "paralab/store.hpp"
#include "paralab/strichartz.hpp"
#include "paralab/theta.hpp"
#include "paralab/weyl.hpp"

using namespace paralab;
using nlohmann::json;

namespace {

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// What a subcommand hands back: a summary, named artifacts and a verdict.
struct Outcome {
    json summary = json::object();
    std::vector<std::pair<std::string, std::string>> artifacts;
    bool pass = true;
    bool store = true;

    void add(const std::string& name, const std::string& content) { artifacts.emplace_back(name, content); }
    void add_audit(const std::string& stem, const BoundAudit& a) {
        add(stem + ".audit.json", a.to_json().dump(2) + "\n");
        add(stem + ".audit.csv", a.to_csv());
        pass = pass && a.pass;
    }
};

json complex_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}, {"abs", std::abs(z)}}; }

CoefficientField make_field(const LatticeBox& box, const std::string& kind, std::uint64_t seed) {
    if (kind == "ones") return CoefficientField::ones(box).normalized();
    if (kind == "delta") return CoefficientField::delta0(box);
    if (kind == "random") return CoefficientField::random_unit(box, seed);
    throw UsageError("unknown field kind: " + kind);
}

std::vector<int> to_int(const std::vector<i64>& v) { return {v.begin(), v.end()}; }

std::string grid_bytes(const GridField& g) {
    std::ostringstream os(std::ios::binary);
    for (const auto& s : g.samples) {
        detail::write_le_double(os, s.real());
        detail::write_le_double(os, s.imag());
    }
    return os.str();
}

// Parameters of every subcommand share one struct; CLI11 binds into it.
struct Params {
    int d = 1, N = 4, k = 2, b = 2, K = 1, max_log2 = 5, trials = 8, lambda_points = 64, fields = 10;
    int window_log2 = 12, window_cap = 14, oversample = 4, degree = 4, M_torus = 2;
    i64 a = 1, q = 4, n = 2, q_max = 256, n_max = 10000, n_samples = 10000, M = 16;
    double sigma = 1.0, eps = 0.1, t = 0.0, p = 4.0, C = 2.0, stability = 3.0, tol = 1e-12,
           refinement_tolerance = 1.25, damped = 0.0;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::size_t max_entries = std::size_t{1} << 25, memory_cap = default_grid_cap;
    std::string field = "ones", name, op = "maximal", kernel = "inverse";
    std::vector<double> x, t_list, Q_list, q_exponents{1.0, 1.5, 2.0};
    std::vector<i64> radii, kvec{0}, N_list, M_list{16, 32, 64, 128, 256, 512}, windows{6, 7, 8, 9, 10, 11, 12};
    std::vector<int> dims{1, 2};
    std::vector<std::string> ids, inputs;
    bool audit_overlap = false, audit_bound = false, write_csv = false, grid = false, all = false, no_grid_check = false,
         scaling = false, eps_sensitivity = false, audit = false;
};

// ---------------------------------------------------------------------------
// Subcommands.

Outcome run_lattice(const Params& P) {
    const LatticeBox box = P.radii.empty() ? LatticeBox::cube(P.d, P.N) : LatticeBox(int(P.radii.size()), to_int(P.radii));
    Outcome o;
    o.summary = {{"d", box.dimension()}, {"radii", box.radii()}, {"size", box.size()}, {"max_norm_sq", box.max_norm_sq()},
                 {"aliasing_free_resolution", aliasing_free_resolution(box, P.k)}, {"k", P.k}};
    if (P.write_csv) {
        if (box.size() > (std::size_t{1} << 22)) throw UsageError("lattice: too many points for --csv (limit 2^22)");
        std::ostringstream os;
        for (int j = 1; j <= box.dimension(); ++j) os << 'n' << j << ',';
        os << "norm_sq\n";
        box.for_each([&](std::size_t, std::span<const int> n) {
            for (int v : n) os << v << ',';
            os << norm_sq(n) << '\n';
        });
        o.add("lattice.csv", os.str());
    }
    o.add("lattice.json", o.summary.dump(2) + "\n");
    return o;
}

Outcome run_sum(const Params& P) {
    const LatticeBox box = LatticeBox::cube(P.d, P.N);
    const auto f = make_field(box, P.field, P.seed);
    Outcome o;
    std::vector<double> x = P.x.empty() ? std::vector<double>(std::size_t(P.d), 0.0) : P.x;
    if (int(x.size()) != P.d) throw UsageError("sum: --x needs d entries");
    const cplx v = eval_exp_sum(f, TorusPoint(x, P.t));
    o.summary = {{"d", P.d}, {"N", P.N}, {"field", P.field}, {"x", x}, {"t", P.t}, {"value", complex_json(v)}};
    GridOptions gopt;
    gopt.memory_cap = P.memory_cap;
    const LpNorm lp = lp_norm_of(f, P.p, gopt);
    o.summary["lp"] = {{"p", P.p}, {"value", lp.value}, {"exact", lp.exact}, {"refinement_delta", lp.refinement_delta}};
    if (P.grid) {
        const GridField g = sample_grid(f, aliasing_free_resolution(box, 2), gopt);
        o.add("grid.bin", grid_bytes(g));
        o.add("grid.json", grid_header(g).dump(2) + "\n");
    }
    o.add("sum.json", o.summary.dump(2) + "\n");
    return o;
}

Outcome run_arcs(const Params& P) {
    const ArcPartition part = arc_partition(P.N);
    Outcome o;
    o.summary = {{"N", P.N}, {"arcs", part.arcs.size()}, {"major_arcs", part.major_count()}};
    if (P.write_csv) {
        std::ostringstream os;
        os << "a,q,major,lo_num,lo_den,hi_num,hi_den\n";
        for (const Arc& a : part.arcs) {
            const Rational lo = a.lo(P.N), hi = a.hi(P.N);
            os << a.a << ',' << a.q << ',' << (a.major ? 1 : 0) << ',' << lo.num << ',' << lo.den << ',' << hi.num << ','
               << hi.den << '\n';
        }
        o.add("arcs.csv", os.str());
    }
    if (P.t != 0.0) {
        const auto ra = dirichlet_approx(P.t, P.N);
        o.summary["dirichlet"] = {{"t", P.t}, {"a", ra.a}, {"q", ra.q}, {"beta", ra.beta}, {"verified", verify_dirichlet(P.t, ra)},
                                  {"major", is_major(ra.q, P.N)}};
        o.pass = verify_dirichlet(P.t, ra);
    }
    if (P.audit_overlap) {
        const auto a = overlap_audit(part);
        o.summary["overlap"] = a.constant("major_max") + a.constant("minor_max");
        o.summary["major_max"] = a.constant("major_max");
        o.summary["min_coverage"] = a.constant("min_coverage");
        o.add_audit("overlap", a);
    }
    o.summary["pass"] = o.pass;
    return o;
}

Outcome run_gauss(const Params& P) {
    Outcome o;
    const cplx g = gauss_sum(P.a, P.q, P.kvec);
    const double bound = std::pow(2.0 * double(P.q), double(P.kvec.size()) / 2.0);
    o.summary = {{"a", P.a}, {"q", P.q}, {"k", P.kvec}, {"value", complex_json(g)}, {"bound", bound},
                 {"within_bound", std::abs(g) <= bound * (1 + 1e-9)}};
    o.pass = std::abs(g) <= bound * (1 + 1e-9);
    if (P.audit_bound) {
        const auto a = gauss_bound_audit(P.q_max, P.dims);
        o.summary["audit"] = {{"q_max", P.q_max}, {"C", a.constant("C")}, {"pass", a.pass}};
        o.add_audit("gauss_bound", a);
    }
    o.summary["pass"] = o.pass;
    return o;
}

Outcome run_ramanujan(const Params& P) {
    Outcome o;
    const i64 exact = ramanujan_sum_mobius(P.q, P.n);
    const cplx direct = ramanujan_sum_direct(P.q, P.n);
    o.pass = std::abs(direct - cplx(double(exact), 0.0)) <= 1e-6;
    o.summary = {{"q", P.q}, {"n", P.n}, {"value", exact}, {"direct", complex_json(direct)}, {"pass", o.pass}};
    return o;
}

Outcome run_kernel(const Params& P) {
    Outcome o;
    const KernelParams kp{P.sigma, P.N, P.d};
    kp.validate();
    std::vector<double> x = P.x.empty() ? std::vector<double>(std::size_t(P.d), 0.0) : P.x;
    if (int(x.size()) != P.d) throw UsageError("kernel: --x needs d entries");
    const TorusPoint pt(x, P.t);
    const cplx direct = ksigma_direct(kp, pt, P.tol);
    const cplx poisson = ksigma_poisson(kp, pt);
    const double rel = relative_error(poisson, direct, 1.0);
    o.pass = rel <= 1e-8;
    o.summary = {{"sigma", P.sigma}, {"N", P.N}, {"d", P.d}, {"x", x}, {"t", P.t}, {"direct", complex_json(direct)},
                 {"poisson", complex_json(poisson)}, {"relative_error", rel}};
    if (P.audit) {
        const std::vector<int> Ns = P.N_list.empty() ? std::vector<int>{8, 16, 32} : to_int(P.N_list);
        const auto a = decomposition_audit(P.sigma, P.d, Ns, P.q_exponents, P.eps, P.stability);
        o.summary["decomposition"] = {{"C1", a.constant("C1")}, {"C2", a.constant("C2")}, {"pass", a.pass}};
        o.add_audit("decomposition", a);
    }
    o.summary["pass"] = o.pass;
    return o;
}

Outcome run_weyl(const Params& P) {
    Outcome o;
    const std::vector<double> ts = P.t_list.empty() ? std::vector<double>{std::sqrt(2.0) - 1.0} : P.t_list;
    const std::vector<double> xs = P.x.empty() ? std::vector<double>{0.0} : P.x;
    const std::vector<i64> Ns = P.N_list.empty() ? std::vector<i64>{1000} : P.N_list;
    const auto a = weyl_bound_audit(ts, xs, Ns, P.stability);
    json vals = json::array();
    for (std::size_t i = 0; i < a.rows(); ++i)
        vals.push_back({{"t", a.parameter_grid[i][0]}, {"x", a.parameter_grid[i][1]}, {"N", a.parameter_grid[i][2]},
                        {"q", a.parameter_grid[i][4]}, {"abs", a.lhs[i]}, {"shape", a.rhs_shape[i]}});
    o.summary = {{"values", vals}, {"C", a.constant("C")}};
    o.add_audit("weyl", a);
    o.summary["pass"] = o.pass;
    return o;
}

Outcome run_moments(const Params& P) {
    Outcome o;
    const LatticeBox box = LatticeBox::cube(P.d, P.N);
    LedgerOptions lo;
    lo.max_entries = P.max_entries;
    lo.threads = P.threads;
    o.summary = {{"d", P.d}, {"N", P.N}, {"k", P.k}, {"field", P.field}};
    double moment = 0.0;
    CoefficientField f = P.field == "ones" ? CoefficientField::ones(box) : make_field(box, P.field, P.seed);
    if (P.field == "ones") {
        const std::uint64_t m = unit_even_moment(box, P.k, lo);
        o.summary["even_moment"] = m;
        moment = double(m);
    } else {
        moment = even_moment(f, P.k, lo);
        o.summary["even_moment"] = moment;
    }
    if (!P.no_grid_check) {
        GridOptions g;
        g.memory_cap = P.memory_cap;
        const double grid = std::pow(lp_norm_of(f, 2.0 * P.k, g).value, 2.0 * P.k);
        const double rel = std::abs(grid - moment) / std::max(moment, 1e-300);
        o.summary["grid_lp_power"] = grid;
        o.summary["relative_error"] = rel;
        o.pass = rel <= 1e-9;
    }
    if (P.damped > 0.0) {
        const auto r = max_representation(P.d, P.N, P.k, P.damped);
        o.summary["max_representation"] = {{"epsilon", r.epsilon}, {"max_count", r.max_count}, {"argmax_l", r.argmax_l},
                                           {"argmax_m", r.argmax_m}, {"reconstructed_max", r.reconstructed_max},
                                           {"max_deviation", r.max_deviation}, {"precision_bits", r.precision_bits},
                                           {"identity_holds", r.identity_holds}};
        o.pass = o.pass && r.identity_holds;
    }
    if (P.write_csv) {
        std::ostringstream os;
        if (P.field == "ones")
            representation_count(box, P.k, lo).write_csv(os);
        else
            weighted_ledger(f, P.k, lo).write_csv(os);
        o.add("ledger.csv", os.str());
    }
    o.summary["pass"] = o.pass;
    o.add("moments.json", o.summary.dump(2) + "\n");
    return o;
}

Outcome run_vinogradov(const Params& P) {
    Outcome o;
    const auto J = vinogradov_J(P.k, P.N, P.b, P.max_entries);
    o.summary = {{"k", P.k}, {"N", P.N}, {"b", P.b}, {"J", J}};
    return o;
}

Outcome run_levelset(const Params& P) {
    Outcome o;
    Theorem2Options opt;
    opt.Q_list = P.Q_list;
    opt.lambda_points = P.lambda_points;
    opt.epsilon = P.eps;
    opt.refinement_tolerance = P.refinement_tolerance;
    if (P.scaling) {
        const std::vector<int> Ns = P.N_list.empty() ? std::vector<int>{8, 16, 32} : to_int(P.N_list);
        const auto a = theorem2_scaling_audit(P.d, Ns, P.fields, P.seed, P.eps);
        o.summary = {{"d", P.d}, {"N_list", Ns}, {"fields", P.fields}, {"pass", a.pass}, {"details", a.details}};
        o.add_audit("level_set_scaling", a);
        return o;
    }
    const LatticeBox box = LatticeBox::cube(P.d, P.N);
    const auto f = make_field(box, P.field, P.seed);
    const auto res = default_level_resolution(box);
    const MagnitudeSample s(f, res);
    const auto profile = level_set_profile(f, uniform_lambda_grid(s.sup(), P.lambda_points), res);
    o.add("profile.json", profile.to_json().dump(2) + "\n");
    const auto lc = layer_cake_check(f, P.p, res);
    o.add("layer_cake.json", json{{"p", P.p}, {"lower", lc.lower}, {"upper", lc.upper}, {"integral", lc.integral},
                                  {"lp_power", lc.lp_power}, {"tolerance", lc.tolerance}, {"consistent", lc.consistent}}
                                 .dump(2) + "\n");
    const auto t2 = theorem2_audit(f, opt);
    const auto c1 = corollary1_audit(f, P.eps, opt);
    o.add_audit("level_set", t2);
    o.add_audit("level_set_decay", c1);
    o.pass = o.pass && lc.consistent;
    o.summary = {{"d", P.d}, {"N", P.N}, {"field", P.field}, {"sup_abs", profile.sup_abs},
                 {"C1", t2.constant("C1")}, {"C2", t2.constant("C2")}, {"layer_cake_consistent", lc.consistent},
                 {"pass", o.pass}};
    return o;
}

// Named audits; `eps` is threaded through the ones that carry an N^eps factor.
BoundAudit named_audit(const Params& P, double eps) {
    const std::string& n = P.name;
    auto Nl = [&](std::vector<int> def) { return P.N_list.empty() ? def : to_int(P.N_list); };
    if (n == "overlap") {
        BoundAudit all;
        all.name = "arc_overlap";
        all.parameter_names = {"N"};
        all.pass = true;
        for (int N : Nl({50, 100, 500, 1000})) {
            const auto a = overlap_audit(arc_partition(N));
            all.add_row({double(N)}, a.lhs[0], a.rhs_shape[0]);
            all.set_constant("overlap_N=" + std::to_string(N), a.lhs[0]);
            all.pass = all.pass && a.pass;
        }
        return all;
    }
    if (n == "gauss") return gauss_bound_audit(P.q_max, P.dims);
    if (n == "lemma6") {
        std::vector<i64> Qs;
        for (double q : P.Q_list.empty() ? std::vector<double>{16, 32, 64, 128, 256} : P.Q_list) Qs.push_back(i64(q));
        // n_samples >= n_max enumerates 1..n_max; otherwise a seeded sample.
        std::vector<i64> ns;
        if (P.n_samples >= P.n_max) {
            for (i64 v = 1; v <= P.n_max; ++v) ns.push_back(v);
        } else {
            std::mt19937_64 gen(P.seed);
            std::uniform_int_distribution<i64> u(1, P.n_max);
            for (i64 i = 0; i < P.n_samples; ++i) ns.push_back(u(gen));
        }
        return lemma6_audit(Qs, ns, eps);
    }
    if (n == "decomposition") return decomposition_audit(P.sigma, P.d, Nl({8, 16, 32}), P.q_exponents, eps, P.stability);
    if (n == "arc-sum") return arc_sum_audit(P.sigma, P.d, P.p, Nl({4, 8, 16}), P.stability);
    if (n == "weyl") {
        std::vector<i64> Ns;
        for (int v : Nl({100, 1000, 10000})) Ns.push_back(v);
        return weyl_bound_audit(P.t_list.empty() ? std::vector<double>{std::sqrt(2.0) - 1.0, 0.5, 1.0 / 3.0} : P.t_list,
                                P.x.empty() ? std::vector<double>{0.0} : P.x, Ns, P.stability);
    }
    if (n == "theorem2") return theorem2_scaling_audit(P.d, Nl({8, 16, 32}), P.fields, P.seed, eps);
    if (n == "corollary1") {
        const auto f = make_field(LatticeBox::cube(P.d, P.N), P.field, P.seed);
        return corollary1_audit(f, eps);
    }
    if (n == "corollary3") return corollary3_audit(int(P.p), P.d, Nl({4, 8, 16, 32}), eps, 3.0, P.seed);
    if (n == "theorem3") {
        LedgerOptions lo;
        lo.max_entries = P.max_entries;
        lo.threads = P.threads;
        return theorem3_exponent_fit(P.d, Nl(P.d == 1 ? std::vector<int>{8, 16, 32, 64, 128} : std::vector<int>{4, 8, 16, 32}), lo);
    }
    if (n == "tm-decay") return tm_decay_audit(P.M_list, P.trials, P.window_log2, P.seed, eps);
    if (n == "torus") {
        std::vector<CoefficientField> F;
        for (int j = 0; j <= P.M_torus; ++j)
            F.push_back(CoefficientField::random_unit(LatticeBox::cube(1, P.degree), derive_seed(P.seed, std::uint64_t(j))));
        const double p = P.p > 2.0 * P.M_torus / (P.M_torus + 1.0) ? 2.0 * P.M_torus / (P.M_torus + 1.0) : P.p;
        return torus_multilinear_check(F, p, P.oversample);
    }
    throw UsageError("unknown audit name: " + n);
}

Outcome run_audit(const Params& P) {
    Outcome o;
    const auto primary = named_audit(P, P.eps);
    o.add_audit(P.name, primary);
    json consts = json::object();
    for (std::size_t i = 0; i < primary.constant_names.size(); ++i) consts[primary.constant_names[i]] = primary.fitted_constants[i];
    o.summary = {{"audit", P.name}, {"eps", P.eps}, {"fitted_constants", consts}, {"pass", primary.pass}};
    if (P.eps_sensitivity) {
        json sens = json::array();
        for (double e : {0.05, 0.1, 0.2}) {
            const auto a = named_audit(P, e);
            o.add(P.name + ".eps=" + format_double(e) + ".audit.json.txt", a.to_json().dump(2) + "\n");
            json c = json::object();
            for (std::size_t i = 0; i < a.constant_names.size(); ++i) c[a.constant_names[i]] = a.fitted_constants[i];
            sens.push_back({{"eps", e}, {"fitted_constants", c}, {"pass", a.pass}});
        }
        o.summary["eps_sensitivity"] = sens;
    }
    return o;
}

Outcome run_maximal(const Params& P) {
    Outcome o;
    NormEstimateOptions opt;
    opt.window_log2 = to_int(P.windows);
    opt.trials = P.trials;
    opt.seed = P.seed;
    opt.max_window_log2 = P.window_cap;
    opt.threads = P.threads;
    if (!P.inputs.empty()) {
        std::vector<SequenceField> in;
        for (const auto& path : P.inputs) {
            std::ifstream is(path);
            if (!is) throw UsageError("cannot open input " + path);
            in.push_back(SequenceField::read_csv(is));
        }
        SequenceField out;
        std::ostringstream os;
        if (P.op == "maximal") {
            const auto fam = ScaleFamily::dyadic(P.d, P.K, P.max_log2, P.C);
            const auto r = maximal_function(fam, in);
            std::ostringstream sq;
            r.square.write_csv(sq);
            o.add("square_function.csv", sq.str());
            out = r.sup;
        } else if (P.op == "tm") {
            if (in.size() != 2) throw UsageError("tm needs two inputs");
            out = tm_bilinear(in[0], in[1], P.M);
        } else {
            if (in.size() != 2) throw UsageError("kernel needs two inputs");
            out = kernel_transform(in[0], in[1], Kernel::from_string(P.kernel));
        }
        out.write_csv(os);
        o.add("output.csv", os.str());
        o.summary = {{"op", P.op}, {"ratio", norm_ratio(out, in)}, {"output_l2", out.l2_norm()}};
        return o;
    }
    OperatorNormEstimate e;
    if (P.op == "maximal") {
        e = maximal_norm_estimate(ScaleFamily::dyadic(P.d, P.K, P.max_log2, P.C), opt);
        // Stability is only claimed inside the K > 2d/(d+4) regime.
        o.pass = !e.theorem4_condition || e.stable;
    } else if (P.op == "tm") {
        e = tm_norm_estimate(P.M, opt);
        o.pass = e.stable;
    } else if (P.op == "kernel") {
        e = kernel_norm_estimate(Kernel::from_string(P.kernel), opt);
        o.pass = e.stable;
    } else {
        throw UsageError("unknown operator: " + P.op);
    }
    o.add("norm_estimate.json", e.to_json().dump(2) + "\n");
    o.summary = {{"op", P.op}, {"best_ratio", e.best_ratio}, {"witness", e.witness}, {"stability", e.stability},
                 {"stable", e.stable}, {"theorem4_condition", e.theorem4_condition}, {"pass", o.pass}};
    return o;
}

Outcome run_report(const Params& P, const ResultsStore& store) {
    Outcome o;
    std::vector<std::string> ids = P.ids;
    if (P.all)
        for (const auto& m : store.list())
            if (m.subcommand != "report") ids.push_back(m.id);
    const Report r = build_report(store, ids);
    o.add("report.json", r.json.dump(2) + "\n");
    o.add("report.csv", r.csv);
    std::size_t audits = 0;
    bool all_pass = true;
    for (const auto& run : r.json["runs"])
        for (const auto& a : run["audits"]) {
            ++audits;
            all_pass = all_pass && a["pass"].get<bool>();
        }
    o.summary = {{"runs", ids.size()}, {"audits", audits}, {"all_pass", all_pass}, {"slope_table", r.json["slope_table"]}};
    return o;
}

json option_values(const CLI::App* sub) {
    json j = json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        const auto& names = opt->get_lnames();
        if (names.empty() || names.front() == "help") continue;
        if (opt->count() > 0) {
            const auto& res = opt->results();
            j[names.front()] = res.size() == 1 ? json(res.front()) : json(res);
        } else if (!opt->get_default_str().empty()) {
            j[names.front()] = opt->get_default_str();
        }
    }
    for (const CLI::Option* opt : sub->get_options())
        if (opt->get_lnames().empty() && opt->get_positional() && opt->count() > 0) j[opt->get_name()] = opt->results();
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"paralab: discrete restriction and paraboloid exponential-sum audits"};
    app.require_subcommand(1, 1);
    std::string store_root;
    bool no_store = false, pretty = false;
    app.add_option("--store", store_root, "results store root (default $PARALAB_STORE or ./paralab-store)");
    app.add_flag("--no-store", no_store, "do not record artifacts or a manifest");
    app.add_flag("--pretty", pretty, "indent the JSON summary");

    Params P;
    auto dflag = [&](CLI::App* s, int hi = 8) { s->add_option("--d", P.d, "dimension")->check(CLI::Range(1, hi))->capture_default_str(); };
    auto nflag = [&](CLI::App* s, int lo = 0, int hi = 1 << 20) {
        s->add_option("--N", P.N, "box radius / truncation")->check(CLI::Range(lo, hi))->capture_default_str();
    };
    auto seedflag = [&](CLI::App* s) { s->add_option("--seed", P.seed, "master seed")->capture_default_str(); };
    auto epsflag = [&](CLI::App* s) { s->add_option("--eps", P.eps, "epsilon in N^eps factors")->check(CLI::Range(1e-6, 1.0))->capture_default_str(); };
    auto threadflag = [&](CLI::App* s) { s->add_option("--threads", P.threads, "worker threads")->check(CLI::Range(1u, 256u))->capture_default_str(); };
    auto fieldflag = [&](CLI::App* s) {
        s->add_option("--field", P.field, "coefficients: ones, delta or random")
            ->check(CLI::IsMember({"ones", "delta", "random"}))
            ->capture_default_str();
    };
    auto nlist = [&](CLI::App* s) { s->add_option("--N-list", P.N_list, "comma separated N values")->delimiter(',')->check(CLI::Range(i64{1}, i64{1} << 20)); };
    auto capflag = [&](CLI::App* s) {
        s->add_option("--memory-cap", P.memory_cap, "grid sample cap")->check(CLI::Range(std::size_t{1}, std::size_t{1} << 32))->capture_default_str();
    };
    auto entriesflag = [&](CLI::App* s) {
        s->add_option("--max-entries", P.max_entries, "ledger entry cap")->check(CLI::Range(std::size_t{1}, std::size_t{1} << 32))->capture_default_str();
    };

    auto* lattice = app.add_subcommand("lattice", "lattice box summary and point list");
    dflag(lattice);
    nflag(lattice);
    lattice->add_option("--radii", P.radii, "per-axis radii (overrides --d/--N)")->delimiter(',')->check(CLI::Range(i64{0}, i64{1} << 20));
    lattice->add_option("--k", P.k, "moment order for the aliasing-free grid")->check(CLI::Range(1, 16))->capture_default_str();
    lattice->add_flag("--csv", P.write_csv, "write lattice.csv");

    auto* sum = app.add_subcommand("sum", "evaluate F(x, t) and its L^p norm");
    dflag(sum, 4);
    nflag(sum);
    fieldflag(sum);
    seedflag(sum);
    capflag(sum);
    sum->add_option("--x", P.x, "spatial point")->delimiter(',');
    sum->add_option("--t", P.t, "time coordinate")->capture_default_str();
    sum->add_option("--p", P.p, "L^p exponent")->check(CLI::Range(0.5, 64.0))->capture_default_str();
    sum->add_flag("--grid", P.grid, "write the aliasing-free grid (little-endian binary)");

    auto* arcs = app.add_subcommand("arcs", "major/minor arc partition");
    nflag(arcs, 1, 20000);
    arcs->add_flag("--audit-overlap", P.audit_overlap, "run the overlap audit");
    arcs->add_flag("--csv", P.write_csv, "write arcs.csv");
    arcs->add_option("--t", P.t, "Dirichlet approximation of t in (0, 1]")->check(CLI::Range(0.0, 1.0));

    auto* gauss = app.add_subcommand("gauss", "Gauss sum G(a, k; q)");
    gauss->add_option("--a", P.a, "numerator, coprime to q")->capture_default_str();
    gauss->add_option("--q", P.q, "modulus")->check(CLI::Range(i64{1}, i64{1} << 24))->capture_default_str();
    gauss->add_option("--k", P.kvec, "frequency vector (length d)")->delimiter(',');
    gauss->add_flag("--audit-bound", P.audit_bound, "audit |G| <= (2q)^{d/2} for all q <= --q-max");
    gauss->add_option("--q-max", P.q_max, "largest modulus audited")->check(CLI::Range(i64{1}, i64{4096}))->capture_default_str();
    gauss->add_option("--dims", P.dims, "dimensions audited")->delimiter(',')->check(CLI::Range(1, 8));

    auto* raman = app.add_subcommand("ramanujan", "Ramanujan sum c_q(n)");
    raman->add_option("--q", P.q, "modulus")->check(CLI::Range(i64{1}, i64{1} << 24))->capture_default_str();
    raman->add_option("--n", P.n, "argument")->capture_default_str();

    auto* kernel = app.add_subcommand("kernel", "theta kernel, direct and by Poisson summation");
    dflag(kernel, 3);
    nflag(kernel, 1, 1 << 16);
    kernel->add_option("--sigma", P.sigma, "Gaussian damping")->check(CLI::Range(1e-6, 1e6))->capture_default_str();
    kernel->add_option("--x", P.x, "spatial point")->delimiter(',');
    kernel->add_option("--t", P.t, "time coordinate")->capture_default_str();
    kernel->add_option("--tol", P.tol, "theta truncation tolerance")->check(CLI::Range(1e-300, 1e-3))->capture_default_str();
    kernel->add_flag("--audit", P.audit, "run the K1/K2 decomposition audit over --N-list");
    nlist(kernel);
    kernel->add_option("--q-exponents", P.q_exponents, "Q = N^e exponents")->delimiter(',')->check(CLI::Range(1.0, 2.0));
    kernel->add_option("--stability", P.stability, "allowed spread of fitted constants")->check(CLI::Range(1.0, 1e6))->capture_default_str();
    epsflag(kernel);

    auto* weyl = app.add_subcommand("weyl", "quadratic Weyl sums against their rational-approximation bound");
    weyl->add_option("--t", P.t_list, "t values")->delimiter(',');
    weyl->add_option("--x", P.x, "x values")->delimiter(',');
    nlist(weyl);
    weyl->add_option("--stability", P.stability, "allowed spread of per-N constants")->check(CLI::Range(1.0, 1e6))->capture_default_str();

    auto* moments = app.add_subcommand("moments", "exact even moments from the representation ledger");
    dflag(moments, 4);
    nflag(moments, 0, 4096);
    moments->add_option("--k", P.k, "moment order (p = 2k)")->check(CLI::Range(1, 8))->capture_default_str();
    fieldflag(moments);
    seedflag(moments);
    threadflag(moments);
    entriesflag(moments);
    capflag(moments);
    moments->add_flag("--csv", P.write_csv, "write the sorted ledger as ledger.csv");
    moments->add_flag("--no-grid-check", P.no_grid_check, "skip the aliasing-free grid cross-check");
    moments->add_option("--damped", P.damped, "also reconstruct S_k from the theta function damped by this epsilon")
        ->check(CLI::Range(1e-6, 10.0));

    auto* vino = app.add_subcommand("vinogradov", "Vinogradov mean value J_k(N, b)");
    vino->add_option("--k", P.k, "degree")->check(CLI::Range(1, 8))->capture_default_str();
    nflag(vino, 1, 1 << 16);
    vino->add_option("--b", P.b, "half the number of variables")->check(CLI::Range(1, 8))->capture_default_str();
    entriesflag(vino);

    auto* level = app.add_subcommand("levelset", "level-set profile and two-constant audit");
    dflag(level, 2);
    nflag(level, 1, 1 << 12);
    fieldflag(level);
    seedflag(level);
    epsflag(level);
    level->add_option("--lambda-points", P.lambda_points, "lambda grid size")->check(CLI::Range(1, 1 << 16))->capture_default_str();
    level->add_option("--Q-list", P.Q_list, "Q values (default N 2^j up to N^2)")->delimiter(',')->check(CLI::Range(1.0, 1e12));
    level->add_option("--p", P.p, "layer-cake exponent")->check(CLI::Range(1.0, 64.0))->capture_default_str();
    level->add_option("--refinement-tolerance", P.refinement_tolerance, "allowed knee drift under doubling")
        ->check(CLI::Range(1.0, 100.0))
        ->capture_default_str();
    level->add_flag("--scaling", P.scaling, "knee spread across --N-list with --fields random fields each");
    level->add_option("--fields", P.fields, "random fields per N")->check(CLI::Range(1, 1000))->capture_default_str();
    nlist(level);

    auto* audit = app.add_subcommand("audit", "run a named audit");
    audit->add_option("--name", P.name, "audit")
        ->required()
        ->check(CLI::IsMember({"overlap", "gauss", "lemma6", "decomposition", "arc-sum", "weyl", "theorem2", "corollary1",
                               "corollary3", "theorem3", "tm-decay", "torus"}));
    dflag(audit, 4);
    nflag(audit, 1, 1 << 12);
    nlist(audit);
    fieldflag(audit);
    seedflag(audit);
    epsflag(audit);
    threadflag(audit);
    entriesflag(audit);
    audit->add_option("--p", P.p, "exponent")->check(CLI::Range(1.0, 64.0))->capture_default_str();
    audit->add_option("--sigma", P.sigma, "Gaussian damping")->check(CLI::Range(1e-6, 1e6))->capture_default_str();
    audit->add_option("--Q-list", P.Q_list, "Q values")->delimiter(',')->check(CLI::Range(1.0, 1e12));
    audit->add_option("--q-max", P.q_max, "largest Gauss modulus")->check(CLI::Range(i64{1}, i64{4096}))->capture_default_str();
    audit->add_option("--dims", P.dims, "Gauss audit dimensions")->delimiter(',')->check(CLI::Range(1, 8));
    audit->add_option("--q-exponents", P.q_exponents, "Q = N^e exponents")->delimiter(',')->check(CLI::Range(1.0, 2.0));
    audit->add_option("--n-max", P.n_max, "largest sampled n")->check(CLI::Range(i64{1}, i64{1} << 40))->capture_default_str();
    audit->add_option("--n-samples", P.n_samples, "number of sampled n")->check(CLI::Range(i64{1}, i64{1} << 20))->capture_default_str();
    audit->add_option("--t", P.t_list, "t values")->delimiter(',');
    audit->add_option("--x", P.x, "x values")->delimiter(',');
    audit->add_option("--M-list", P.M_list, "dyadic M values")->delimiter(',')->check(CLI::Range(i64{1}, i64{1} << 14));
    audit->add_option("--trials", P.trials, "random trials")->check(CLI::Range(1, 100000))->capture_default_str();
    audit->add_option("--window-log2", P.window_log2, "window length 2^w")->check(CLI::Range(0, 14))->capture_default_str();
    audit->add_option("--M", P.M_torus, "torus product arity M")->check(CLI::Range(1, 4))->capture_default_str();
    audit->add_option("--degree", P.degree, "torus polynomial degree")->check(CLI::Range(0, 64))->capture_default_str();
    audit->add_option("--oversample", P.oversample, "torus grid oversampling")->check(CLI::Range(1, 64))->capture_default_str();
    audit->add_option("--fields", P.fields, "random fields per N")->check(CLI::Range(1, 1000))->capture_default_str();
    audit->add_option("--stability", P.stability, "allowed spread")->check(CLI::Range(1.0, 1e6))->capture_default_str();
    audit->add_flag("--eps-sensitivity", P.eps_sensitivity, "rerun at eps in {0.05, 0.1, 0.2}");

    auto* maximal = app.add_subcommand("maximal", "operator-norm estimates for the discrete multilinear operators");
    maximal->add_option("--op", P.op, "maximal, tm or kernel")->check(CLI::IsMember({"maximal", "tm", "kernel"}))->capture_default_str();
    dflag(maximal, 4);
    maximal->add_option("--K", P.K, "admissibility order")->check(CLI::Range(1, 4))->capture_default_str();
    maximal->add_option("--C", P.C, "admissibility constant")->check(CLI::Range(1.0, 1e12))->capture_default_str();
    maximal->add_option("--max-log2", P.max_log2, "largest dyadic scale 2^j")->check(CLI::Range(0, 10))->capture_default_str();
    maximal->add_option("--M", P.M, "dyadic M for tm")->check(CLI::Range(i64{1}, i64{1} << 14))->capture_default_str();
    maximal->add_option("--kernel", P.kernel, "inverse or abs_inverse")->check(CLI::IsMember({"inverse", "abs_inverse"}))->capture_default_str();
    maximal->add_option("--trials", P.trials, "random trials per window")->check(CLI::Range(1, 100000))->capture_default_str();
    maximal->add_option("--windows", P.windows, "window exponents w (length 2^w)")->delimiter(',')->check(CLI::Range(i64{0}, i64{14}));
    maximal->add_option("--window-cap", P.window_cap, "largest allowed window exponent")->check(CLI::Range(0, 20))->capture_default_str();
    maximal->add_option("--inputs", P.inputs, "CSV sequences (index,re,im) to apply the operator to")->delimiter(',');
    seedflag(maximal);
    threadflag(maximal);

    auto* report = app.add_subcommand("report", "consolidated report over stored runs");
    report->add_option("ids", P.ids, "run ids");
    report->add_flag("--all", P.all, "every stored run");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "maximal" && P.K > P.d) {
        std::cerr << "usage error: --K must not exceed --d\n";
        return 2;
    }
    if (name == "gauss" && P.kvec.empty()) P.kvec = {0};

    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    std::unique_ptr<ResultsStore> store;
    try {
        if (!no_store || name == "report") store = std::make_unique<ResultsStore>(store_root.empty() ? ResultsStore::default_root() : std::filesystem::path(store_root));
        if (name == "lattice") out = run_lattice(P);
        else if (name == "sum") out = run_sum(P);
        else if (name == "arcs") out = run_arcs(P);
        else if (name == "gauss") out = run_gauss(P);
        else if (name == "ramanujan") out = run_ramanujan(P);
        else if (name == "kernel") out = run_kernel(P);
        else if (name == "weyl") out = run_weyl(P);
        else if (name == "moments") out = run_moments(P);
        else if (name == "vinogradov") out = run_vinogradov(P);
        else if (name == "levelset") out = run_levelset(P);
        else if (name == "audit") out = run_audit(P);
        else if (name == "maximal") out = run_maximal(P);
        else if (name == "report") out = run_report(P, *store);
    } catch (const IntegrityError& e) {
        std::cerr << "integrity error: " << e.what() << '\n';
        return 1;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::length_error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const int code = out.pass ? 0 : 1;

    json summary = out.summary;
    if (store && !no_store) {
        try {
            RunManifest m;
            m.id = store->begin_run(name);
            for (int i = 1; i < argc; ++i) m.command_line.emplace_back(argv[i]);
            m.subcommand = name;
            m.parameters = option_values(sub);
            m.seed = P.seed;
            m.timestamp = utc_timestamp();
            m.wall_time_s = wall;
            m.exit_code = code;
            for (const auto& [fname, content] : out.artifacts) m.outputs.push_back(store->write_artifact(m.id, fname, content));
            store->commit(m);
            summary["run_id"] = m.id;
        } catch (const std::exception& e) {
            std::cerr << "error: cannot record the run: " << e.what() << '\n';
            return 1;
        }
    }
    std::cout << (pretty ? summary.dump(2) : summary.dump()) << '\n';
    return code;
}
