#ifndef PARALAB_LEDGER_HPP
#define PARALAB_LEDGER_HPP

// Representation ledgers S_k(l, m): for each l in the k-fold sum box and each
// m >= 0, the (weighted) number of k-tuples of box points n_1..n_k with
// n_1 + .. + n_k = l and |n_1|^2 + .. + |n_k|^2 = m. Even moments follow from
//
//     ||F||_{2k}^{2k} = sum_{(l, m)} |sum_{S_k(l, m)} a_{n_1} .. a_{n_k}|^2.

#include <algorithm>
#include <atomic>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "paralab/audit.hpp"
#include "paralab/numeric.hpp"
#include "paralab/torus.hpp"

namespace paralab {

struct LedgerOptions {
    std::size_t max_entries = std::size_t{1} << 25;  // stored (l, m) entries
    unsigned threads = 1;                            // output shards keyed by row index mod threads
};

/// Sparse ledger of order k over `box`. Rows are indexed by l in the sum box
/// prod_j [-k N_j, k N_j] (lexicographic), each row sorted by m.
template <typename W>
class MomentLedger {
public:
    using Row = std::vector<std::pair<i64, W>>;

    MomentLedger(LatticeBox box, int k) : box_(std::move(box)), k_(k), sum_box_(sum_box_of(box_, k)), rows_(sum_box_.size()) {}

    const LatticeBox& box() const { return box_; }
    int order() const { return k_; }
    const LatticeBox& sum_box() const { return sum_box_; }
    i64 max_m() const { return static_cast<i64>(k_) * box_.max_norm_sq(); }

    const Row& row(std::size_t i) const { return rows_[i]; }
    Row& row(std::size_t i) { return rows_[i]; }
    std::size_t row_count() const { return rows_.size(); }

    W at(std::span<const int> l, i64 m) const {
        if (!sum_box_.contains(l)) return W{};
        const Row& r = rows_[sum_box_.index_of(l)];
        auto it = std::lower_bound(r.begin(), r.end(), m, [](const auto& e, i64 v) { return e.first < v; });
        return (it != r.end() && it->first == m) ? it->second : W{};
    }
    W at(const std::vector<int>& l, i64 m) const { return at(std::span<const int>(l), m); }

    std::size_t entry_count() const {
        std::size_t n = 0;
        for (const auto& r : rows_) n += r.size();
        return n;
    }

    W total() const {
        W s{};
        for (const auto& r : rows_)
            for (const auto& e : r) s += e.second;
        return s;
    }

    double sum_abs_sq() const {
        CompensatedSum s;
        for (const auto& r : rows_)
            for (const auto& e : r) s.add(std::norm(std::complex<double>(e.second)));
        return s.value();
    }

    /// f(l, m, weight) in (l lexicographic, m ascending) order.
    template <typename F>
    void for_each(F&& f) const {
        sum_box_.for_each([&](std::size_t idx, std::span<const int> l) {
            for (const auto& [m, w] : rows_[idx]) f(l, m, w);
        });
    }

    /// Sorted CSV: l_1..l_d, m, then count (integer ledgers) or re, im.
    void write_csv(std::ostream& os) const {
        const int d = box_.dimension();
        for (int j = 1; j <= d; ++j) os << 'l' << j << ',';
        if constexpr (std::is_integral_v<W>)
            os << "m,count\n";
        else
            os << "m,re,im\n";
        for_each([&](std::span<const int> l, i64 m, const W& w) {
            for (int v : l) os << v << ',';
            os << m << ',';
            if constexpr (std::is_integral_v<W>)
                os << w << '\n';
            else
                os << format_double(w.real()) << ',' << format_double(w.imag()) << '\n';
        });
    }

    static LatticeBox sum_box_of(const LatticeBox& box, int k) {
        if (k < 1) throw std::invalid_argument("MomentLedger: order k must be >= 1");
        std::vector<int> r;
        for (int v : box.radii()) r.push_back(k * v);
        return LatticeBox(box.dimension(), std::move(r));
    }

private:
    LatticeBox box_;
    int k_;
    LatticeBox sum_box_;
    std::vector<Row> rows_;
};

namespace detail {

template <typename W>
MomentLedger<W> first_order_ledger(const LatticeBox& box, const std::vector<W>& a) {
    MomentLedger<W> out(box, 1);
    box.for_each([&](std::size_t idx, std::span<const int> n) {
        if (a[idx] != W{}) out.row(out.sum_box().index_of(n)).emplace_back(norm_sq(n), a[idx]);
    });
    return out;
}

/// Computes every row of A * B into a dense m-scratch and hands it to
/// emit(shard, row_index, scratch, lo, hi); the scratch is zeroed afterwards.
/// Rows are split across shards by row index mod `threads`.
template <typename W, typename Emit>
void convolve_rows(const MomentLedger<W>& A, const MomentLedger<W>& B, unsigned threads, Emit&& emit) {
    if (!(A.box() == B.box())) throw std::invalid_argument("convolve: ledgers over different boxes");
    const int d = A.box().dimension();
    const LatticeBox out_box = MomentLedger<W>::sum_box_of(A.box(), A.order() + B.order());
    const i64 mmax = static_cast<i64>(A.order() + B.order()) * A.box().max_norm_sq();

    std::vector<std::pair<std::size_t, std::vector<int>>> live;
    A.sum_box().for_each([&](std::size_t idx, std::span<const int> l) {
        if (!A.row(idx).empty()) live.emplace_back(idx, std::vector<int>(l.begin(), l.end()));
    });

    threads = std::max(1u, threads);
    auto work = [&](unsigned shard) {
        std::vector<W> scratch(static_cast<std::size_t>(mmax + 1), W{});
        std::vector<int> lb(static_cast<std::size_t>(d));
        out_box.for_each([&](std::size_t c, std::span<const int> l) {
            if (c % threads != shard) return;
            i64 lo = mmax + 1, hi = -1;
            for (const auto& [ia, la] : live) {
                bool inside = true;
                for (int j = 0; j < d && inside; ++j) {
                    lb[j] = l[j] - la[j];
                    inside = std::abs(lb[j]) <= B.sum_box().radius(j);
                }
                if (!inside) continue;
                const auto& rb = B.row(B.sum_box().index_of(lb));
                if (rb.empty()) continue;
                const auto& ra = A.row(ia);
                lo = std::min(lo, ra.front().first + rb.front().first);
                hi = std::max(hi, ra.back().first + rb.back().first);
                for (const auto& [ma, wa] : ra)
                    for (const auto& [mb, wb] : rb) scratch[static_cast<std::size_t>(ma + mb)] += wa * wb;
            }
            if (hi < lo) return;
            emit(shard, c, scratch, lo, hi);
            std::fill(scratch.begin() + lo, scratch.begin() + hi + 1, W{});
        });
    };
    if (threads == 1) {
        work(0);
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned s = 0; s < threads; ++s) pool.emplace_back(work, s);
    for (auto& t : pool) t.join();
}

/// Stored product ledger A * B.
template <typename W>
MomentLedger<W> convolve(const MomentLedger<W>& A, const MomentLedger<W>& B, const LedgerOptions& opt) {
    MomentLedger<W> out(A.box(), A.order() + B.order());
    std::atomic<std::size_t> entries{0};
    std::atomic<bool> over{false};
    convolve_rows(A, B, opt.threads, [&](unsigned, std::size_t c, const std::vector<W>& s, i64 lo, i64 hi) {
        if (over.load(std::memory_order_relaxed)) return;
        auto& row = out.row(c);
        for (i64 m = lo; m <= hi; ++m)
            if (s[static_cast<std::size_t>(m)] != W{}) row.emplace_back(m, s[static_cast<std::size_t>(m)]);
        if (entries.fetch_add(row.size()) + row.size() > opt.max_entries) over = true;
    });
    if (over) throw std::length_error("ledger: entry count exceeds the memory cap");
    return out;
}

template <typename W>
MomentLedger<W> ledger_of_order(const MomentLedger<W>& first, int k, const LedgerOptions& opt) {
    if (k < 1) throw std::invalid_argument("ledger: order k must be >= 1");
    MomentLedger<W> cur = first;
    for (int j = 2; j <= k; ++j) cur = convolve(cur, first, opt);
    return cur;
}

inline void check_order(int k) {
    if (k < 1) throw std::invalid_argument("ledger: order k must be >= 1");
}

}  // namespace detail

/// Integer ledger |S_k(l, m)| for unit coefficients.
inline MomentLedger<i64> representation_count(const LatticeBox& box, int k, const LedgerOptions& opt = {}) {
    detail::check_order(k);
    return detail::ledger_of_order(detail::first_order_ledger(box, std::vector<i64>(box.size(), 1)), k, opt);
}

/// Weighted ledger sum_{S_k(l, m)} a_{n_1} .. a_{n_k}.
inline MomentLedger<cplx> weighted_ledger(const CoefficientField& field, int k, const LedgerOptions& opt = {}) {
    detail::check_order(k);
    return detail::ledger_of_order(detail::first_order_ledger(field.box(), field.coeffs()), k, opt);
}

namespace detail {

/// sum |(A * B)(l, m)|^2 without storing the product; half ledgers of orders
/// ceil(k/2) and floor(k/2) meet in the middle. Partials are kept per row and
/// reduced in row order, so the result does not depend on the thread count.
template <typename W, typename Acc, typename Sq>
Acc streamed_square_sum(const MomentLedger<W>& first, int k, const LedgerOptions& opt, Sq&& sq) {
    const MomentLedger<W> A = ledger_of_order(first, (k + 1) / 2, opt);
    const MomentLedger<W> B = (k / 2 == (k + 1) / 2) ? A : ledger_of_order(first, k / 2, opt);
    const unsigned threads = std::max(1u, opt.threads);
    std::vector<Acc> per_row(MomentLedger<W>::sum_box_of(A.box(), k).size(), Acc{});
    convolve_rows(A, B, threads, [&](unsigned, std::size_t c, const std::vector<W>& s, i64 lo, i64 hi) {
        for (i64 m = lo; m <= hi; ++m) sq(per_row[c], s[static_cast<std::size_t>(m)]);
    });
    Acc total{};
    for (const auto& p : per_row) total += p;
    return total;
}

struct SumOfNorms {
    CompensatedSum s;
    SumOfNorms& operator+=(const SumOfNorms& o) {
        s.add(o.s.value());
        return *this;
    }
};

}  // namespace detail

/// ||F||_{2k}^{2k} by weighted ledger convolution.
inline double even_moment(const CoefficientField& field, int k, const LedgerOptions& opt = {}) {
    detail::check_order(k);
    if (k == 1) return field.l2_norm_sq();
    const auto first = detail::first_order_ledger(field.box(), field.coeffs());
    return detail::streamed_square_sum<cplx, detail::SumOfNorms>(first, k, opt, [](detail::SumOfNorms& acc, cplx w) {
               if (w != cplx{}) acc.s.add(std::norm(w));
           }).s.value();
}

/// sum_{(l, m)} |S_k(l, m)|^2 exactly; this is ||S_N||_{2k}^{2k} for unit
/// coefficients. Throws std::overflow_error beyond 2^64 - 1.
inline std::uint64_t unit_even_moment(const LatticeBox& box, int k, const LedgerOptions& opt = {}) {
    detail::check_order(k);
    if (k == 1) return box.size();
    const auto first = detail::first_order_ledger(box, std::vector<i64>(box.size(), 1));
    const unsigned __int128 v = detail::streamed_square_sum<i64, unsigned __int128>(
        first, k, opt, [](unsigned __int128& acc, i64 w) { acc += static_cast<unsigned __int128>(w) * static_cast<unsigned __int128>(w); });
    if (v > std::numeric_limits<std::uint64_t>::max()) throw std::overflow_error("unit_even_moment: exceeds 64 bits");
    return static_cast<std::uint64_t>(v);
}

/// J_k(N, b): 2b-tuples in [1, N] with sum n_i^j = sum m_i^j for j = 1..k,
/// as sum_v r_b(v)^2 over the b-fold convolution of the moment curve
/// (n, n^2, .., n^k).
inline std::uint64_t vinogradov_J(int k, int N, int b, std::size_t max_entries = std::size_t{1} << 24) {
    if (k < 1 || N < 1 || b < 1) throw std::invalid_argument("vinogradov_J: k, N, b must be >= 1");
    // b N^k must fit comfortably in 63 bits.
    long double top = static_cast<long double>(b);
    for (int j = 0; j < k; ++j) top *= N;
    if (top > 4.0e18L) throw std::overflow_error("vinogradov_J: power sums exceed 64 bits");

    using Key = std::vector<i64>;
    std::vector<Key> curve;
    for (i64 n = 1; n <= N; ++n) {
        Key v(static_cast<std::size_t>(k));
        i64 p = 1;
        for (int j = 0; j < k; ++j) v[j] = (p *= n);
        curve.push_back(std::move(v));
    }
    std::map<Key, std::uint64_t> r;
    for (const auto& v : curve) r[v] = 1;
    for (int step = 2; step <= b; ++step) {
        std::map<Key, std::uint64_t> next;
        for (const auto& [v, c] : r)
            for (const auto& w : curve) {
                Key s = v;
                for (int j = 0; j < k; ++j) s[j] += w[j];
                next[s] += c;
            }
        if (next.size() > max_entries) throw std::length_error("vinogradov_J: entry count exceeds the memory cap");
        r = std::move(next);
    }
    unsigned __int128 total = 0;
    for (const auto& [v, c] : r) total += static_cast<unsigned __int128>(c) * c;
    if (total > std::numeric_limits<std::uint64_t>::max()) throw std::overflow_error("vinogradov_J: exceeds 64 bits");
    return static_cast<std::uint64_t>(total);
}

}  // namespace paralab

#endif  // PARALAB_LEDGER_HPP
