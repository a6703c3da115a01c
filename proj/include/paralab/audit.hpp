#ifndef PARALAB_AUDIT_HPP
#define PARALAB_AUDIT_HPP

// BoundAudit: the record every inequality audit produces. Each row pairs a
// measured left-hand side with the right-hand-side shape it is compared to;
// fitted constants are the smallest values making the inequality hold on the
// rows they summarise.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace paralab {

/// Shortest round-trip decimal form of a double; keeps CSV output stable.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

struct BoundAudit {
    std::string name;
    double epsilon = 0.0;
    std::vector<std::string> parameter_names;
    std::vector<std::vector<double>> parameter_grid;
    std::vector<double> lhs;
    std::vector<double> rhs_shape;
    std::vector<std::string> constant_names;
    std::vector<double> fitted_constants;
    bool pass = false;
    nlohmann::json details = nlohmann::json::object();

    void add_row(std::vector<double> params, double l, double r) {
        if (params.size() != parameter_names.size())
            throw std::invalid_argument("BoundAudit::add_row: parameter count mismatch in " + name);
        parameter_grid.push_back(std::move(params));
        lhs.push_back(l);
        rhs_shape.push_back(r);
    }

    std::size_t rows() const { return lhs.size(); }

    double ratio(std::size_t i) const {
        if (rhs_shape[i] > 0) return lhs[i] / rhs_shape[i];
        return lhs[i] > 0 ? std::numeric_limits<double>::infinity() : 0.0;
    }

    /// max_i lhs_i / rhs_i over the rows selected by pred(row).
    template <typename Pred>
    double minimal_constant(Pred&& pred) const {
        double c = 0.0;
        for (std::size_t i = 0; i < rows(); ++i)
            if (pred(i)) c = std::max(c, ratio(i));
        return c;
    }
    double minimal_constant() const {
        return minimal_constant([](std::size_t) { return true; });
    }

    void set_constant(const std::string& cname, double value) {
        for (std::size_t i = 0; i < constant_names.size(); ++i)
            if (constant_names[i] == cname) {
                fitted_constants[i] = value;
                return;
            }
        constant_names.push_back(cname);
        fitted_constants.push_back(value);
    }

    double constant(const std::string& cname) const {
        for (std::size_t i = 0; i < constant_names.size(); ++i)
            if (constant_names[i] == cname) return fitted_constants[i];
        throw std::out_of_range("BoundAudit: no constant named " + cname);
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["name"] = name;
        j["epsilon"] = epsilon;
        j["parameter_names"] = parameter_names;
        j["grid"] = parameter_grid;
        j["lhs"] = lhs;
        j["rhs_shape"] = rhs_shape;
        nlohmann::json consts = nlohmann::json::object();
        for (std::size_t i = 0; i < constant_names.size(); ++i) consts[constant_names[i]] = fitted_constants[i];
        j["fitted_constants"] = consts;
        j["pass"] = pass;
        j["details"] = details;
        return j;
    }

    static BoundAudit from_json(const nlohmann::json& j) {
        BoundAudit a;
        a.name = j.at("name").get<std::string>();
        a.epsilon = j.at("epsilon").get<double>();
        a.parameter_names = j.at("parameter_names").get<std::vector<std::string>>();
        a.parameter_grid = j.at("grid").get<std::vector<std::vector<double>>>();
        a.lhs = j.at("lhs").get<std::vector<double>>();
        a.rhs_shape = j.at("rhs_shape").get<std::vector<double>>();
        for (const auto& [k, v] : j.at("fitted_constants").items()) {
            a.constant_names.push_back(k);
            a.fitted_constants.push_back(v.get<double>());
        }
        a.pass = j.at("pass").get<bool>();
        a.details = j.value("details", nlohmann::json::object());
        return a;
    }

    /// One CSV row per grid point: parameters, lhs, rhs_shape, ratio.
    std::string to_csv() const {
        std::ostringstream os;
        for (const auto& p : parameter_names) os << p << ',';
        os << "lhs,rhs_shape,ratio\n";
        for (std::size_t i = 0; i < rows(); ++i) {
            for (double v : parameter_grid[i]) os << format_double(v) << ',';
            os << format_double(lhs[i]) << ',' << format_double(rhs_shape[i]) << ',' << format_double(ratio(i)) << '\n';
        }
        return os.str();
    }
};

/// max/min of a list of positive constants; 1 for a single entry.
inline double spread(const std::vector<double>& v) {
    if (v.empty()) return 1.0;
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    if (*lo <= 0) return std::numeric_limits<double>::infinity();
    return *hi / *lo;
}

}  // namespace paralab

#endif  // PARALAB_AUDIT_HPP
