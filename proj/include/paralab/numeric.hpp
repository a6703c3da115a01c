#ifndef PARALAB_NUMERIC_HPP
#define PARALAB_NUMERIC_HPP

// Small numerical helpers shared by every module: compensated and pairwise
// summation, accurate phase reduction, seed derivation and log-log fits.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace paralab {

using cplx = std::complex<double>;
using i64 = std::int64_t;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Neumaier (improved Kahan) accumulator.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

class CompensatedComplexSum {
public:
    void add(cplx v) {
        re_.add(v.real());
        im_.add(v.imag());
    }
    cplx value() const { return {re_.value(), im_.value()}; }

private:
    CompensatedSum re_;
    CompensatedSum im_;
};

/// Pairwise summation with a fixed split so the reduction tree depends only on
/// the length of the input.
template <typename T>
T pairwise_sum(std::span<const T> v) {
    constexpr std::size_t leaf = 64;
    if (v.size() <= leaf) {
        T s{};
        for (const T& x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

template <typename T>
T pairwise_sum(const std::vector<T>& v) {
    return pairwise_sum(std::span<const T>(v));
}

/// x mod 1 in [0, 1).
inline double mod1(double x) {
    double f = x - std::floor(x);
    if (f >= 1.0) f -= 1.0;
    return f;
}

/// Fractional part of t*n, accurate to a few ulps of 1 as long as |n| < 2^53.
/// The rounding error of the product is recovered with an fma.
inline double frac_mul(double t, double n) {
    const double p = t * n;
    const double err = std::fma(t, n, -p);
    const double fp = p - std::floor(p);
    return mod1(fp + err);
}

/// e^{2 pi i f}. The argument is folded to [-1/2, 1/2) first.
inline cplx unit_phase(double f) {
    f = mod1(f);
    if (f >= 0.5) f -= 1.0;
    const double a = two_pi * f;
    return {std::cos(a), std::sin(a)};
}

/// SplitMix64 finaliser; used to derive independent per-trial seeds from a
/// master seed so results do not depend on scheduling.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(master ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares fit y = slope * x + intercept.
inline LineFit least_squares(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("least_squares: need at least two paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("least_squares: degenerate abscissae");
    const double s = sxy / sxx;
    return {s, my - s * mx};
}

/// Slope of log(y) against log(x).
inline LineFit log_log_fit(std::span<const double> x, std::span<const double> y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0 || y[i] <= 0) throw std::domain_error("log_log_fit: nonpositive data");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return least_squares(lx, ly);
}

inline double relative_error(cplx got, cplx want, double floor = 0.0) {
    const double scale = std::max(std::abs(want), floor);
    if (scale == 0.0) return std::abs(got);
    return std::abs(got - want) / scale;
}

}  // namespace paralab

#endif  // PARALAB_NUMERIC_HPP
