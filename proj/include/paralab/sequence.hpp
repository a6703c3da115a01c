#ifndef PARALAB_SEQUENCE_HPP
#define PARALAB_SEQUENCE_HPP

// Finitely supported sequences f : Z -> C stored on an integer interval
// [lo, lo + size). Index arithmetic is exact in i64; an empty value array is
// the zero sequence.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "paralab/audit.hpp"
#include "paralab/numeric.hpp"

namespace paralab {

class SequenceField {
public:
    SequenceField() = default;
    SequenceField(i64 lo, std::vector<cplx> values) : lo_(lo), v_(std::move(values)) {}

    static SequenceField zeros(i64 lo, std::size_t len) { return {lo, std::vector<cplx>(len)}; }
    static SequenceField ones(i64 lo, std::size_t len) { return {lo, std::vector<cplx>(len, cplx{1.0, 0.0})}; }
    static SequenceField delta(i64 at) { return {at, {cplx{1.0, 0.0}}}; }

    /// Independent standard complex Gaussians on [lo, lo + len).
    static SequenceField gaussian(i64 lo, std::size_t len, std::uint64_t seed) {
        std::mt19937_64 gen(seed);
        std::normal_distribution<double> g(0.0, 1.0);
        std::vector<cplx> v(len);
        for (auto& x : v) {
            const double re = g(gen);
            const double im = g(gen);
            x = {re, im};
        }
        return {lo, std::move(v)};
    }

    bool empty() const { return v_.empty(); }
    std::size_t size() const { return v_.size(); }
    i64 lo() const { return lo_; }
    /// Last index of the support interval; lo - 1 when empty.
    i64 hi() const { return lo_ + static_cast<i64>(v_.size()) - 1; }
    const std::vector<cplx>& values() const { return v_; }
    std::vector<cplx>& values() { return v_; }

    bool in_support(i64 n) const { return n >= lo_ && n <= hi(); }
    cplx at(i64 n) const { return in_support(n) ? v_[static_cast<std::size_t>(n - lo_)] : cplx{}; }
    cplx& ref(i64 n) {
        if (!in_support(n)) throw std::out_of_range("SequenceField::ref: index outside support");
        return v_[static_cast<std::size_t>(n - lo_)];
    }

    double l2_norm() const {
        CompensatedSum s;
        for (const auto& x : v_) s.add(std::norm(x));
        return std::sqrt(s.value());
    }
    double linf_norm() const {
        double m = 0.0;
        for (const auto& x : v_) m = std::max(m, std::abs(x));
        return m;
    }

    /// (tau_s f)(n) = f(n - s).
    SequenceField shifted(i64 s) const { return {lo_ + s, v_}; }
    SequenceField scaled(cplx c) const {
        SequenceField out = *this;
        for (auto& x : out.v_) x *= c;
        return out;
    }
    SequenceField abs() const {
        SequenceField out = *this;
        for (auto& x : out.v_) x = std::abs(x);
        return out;
    }

    /// Pointwise sum over the union of the two supports.
    SequenceField operator+(const SequenceField& o) const {
        if (empty()) return o;
        if (o.empty()) return *this;
        const i64 lo = std::min(lo_, o.lo_), hi = std::max(this->hi(), o.hi());
        SequenceField out = zeros(lo, static_cast<std::size_t>(hi - lo + 1));
        for (i64 n = lo; n <= hi; ++n) out.v_[static_cast<std::size_t>(n - lo)] = at(n) + o.at(n);
        return out;
    }

    /// CSV with header index,re,im; one row per support point.
    void write_csv(std::ostream& os) const {
        os << "index,re,im\n";
        for (std::size_t i = 0; i < v_.size(); ++i)
            os << lo_ + static_cast<i64>(i) << ',' << format_double(v_[i].real()) << ',' << format_double(v_[i].imag()) << '\n';
    }

    /// Inverse of write_csv; indices must be consecutive and increasing.
    static SequenceField read_csv(std::istream& is) {
        std::string line;
        if (!std::getline(is, line) || line != "index,re,im") throw std::runtime_error("SequenceField CSV: bad header");
        SequenceField out;
        bool first = true;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            std::istringstream row(line);
            std::string a, b, c;
            if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c))
                throw std::runtime_error("SequenceField CSV: malformed row: " + line);
            const i64 n = std::stoll(a);
            if (first) {
                out.lo_ = n;
                first = false;
            } else if (n != out.hi() + 1) {
                throw std::runtime_error("SequenceField CSV: indices not consecutive at " + a);
            }
            out.v_.emplace_back(std::stod(b), std::stod(c));
        }
        return out;
    }

private:
    i64 lo_ = 0;
    std::vector<cplx> v_;
};

/// ||out||_2 / prod ||f_j||_2. The zero vector is outside the ratio's domain.
inline double norm_ratio(const SequenceField& out, const std::vector<SequenceField>& inputs) {
    double den = 1.0;
    for (const auto& f : inputs) {
        const double n = f.l2_norm();
        if (!(n > 0.0)) throw std::invalid_argument("norm_ratio: zero input");
        den *= n;
    }
    return out.l2_norm() / den;
}

}  // namespace paralab

#endif  // PARALAB_SEQUENCE_HPP
