#pragma once

// 50-50 theory: the centered-moment and span invariants, the five-column
// three-output algebra, the four-column alternating family, and the
// double-diagonal gadgets whose hit probabilities have closed forms.

#include "pachinko/ballot.hpp"
#include "pachinko/distribution.hpp"
#include "pachinko/grid.hpp"

#include <array>
#include <set>
#include <vector>

namespace pachinko {

struct CheckReport {
    enum class Status { Pass, Fail, Inapplicable };
    Status status = Status::Pass;
    std::string detail;

    bool passed() const { return status == Status::Pass; }
};

// Sum_i i*p_i must vanish for any distribution a 50-50 Pachinko produces.
// The identity is proved for arrangements where every ball drops, so a
// nonzero rest mass makes the check inapplicable rather than a failure.
inline CheckReport check_centered(const Distribution& d) {
    if (!d.rest_mass().is_zero())
        return {CheckReport::Status::Inapplicable, "rest mass " + d.rest_mass().to_binary() + " is nonzero"};
    Moment m = first_moment(d);
    if (m.is_zero()) return {CheckReport::Status::Pass, ""};
    return {CheckReport::Status::Fail, "first moment is " + m.to_string() + ", not 0"};
}

// k > 1 outputs must span strictly between k and 2k columns with no two
// consecutive empty columns inside the span.
inline CheckReport check_span(const Distribution& d) {
    std::size_t k = d.output_count();
    if (k <= 1) return {CheckReport::Status::Pass, ""};
    long long lo = d.entries().begin()->first;
    long long hi = d.entries().rbegin()->first;
    long long span = hi - lo + 1;
    if (!(span > static_cast<long long>(k) && span < 2 * static_cast<long long>(k)))
        return {CheckReport::Status::Fail,
                std::to_string(k) + " outputs span " + std::to_string(span) + " columns"};
    for (long long c = lo; c < hi; ++c)
        if (!d.entries().count(c) && !d.entries().count(c + 1))
            return {CheckReport::Status::Fail,
                    "columns " + std::to_string(c) + " and " + std::to_string(c + 1) + " are both empty"};
    return {CheckReport::Status::Pass, ""};
}

// ---------------------------------------------------------------------------
// Three-output Pachinkos on five columns: transformations A, B, C acting on
// the per-column probability 5-vector, applied right-to-left with a final A.

using Vec5 = std::array<Dyadic, 5>;
using Mat5 = std::array<std::array<Dyadic, 5>, 5>;

namespace three_output {

// Entries given as (numerator, exponent) pairs; -,- marks zero.
inline Mat5 make_mat(const int (&spec)[5][5][2]) {
    Mat5 m;
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c)
            m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
                Dyadic{BigInt(spec[r][c][0]), static_cast<unsigned>(spec[r][c][1])};
    return m;
}

inline const Mat5& matrix_a() {
    static const int spec[5][5][2] = {{{1, 0}, {1, 1}, {1, 2}, {0, 0}, {0, 0}},
                                      {{0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}},
                                      {{0, 0}, {1, 1}, {1, 1}, {1, 1}, {0, 0}},
                                      {{0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}},
                                      {{0, 0}, {0, 0}, {1, 2}, {1, 1}, {1, 0}}};
    static const Mat5 m = make_mat(spec);
    return m;
}
inline const Mat5& matrix_b() {
    static const int spec[5][5][2] = {{{1, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}},
                                      {{0, 0}, {1, 0}, {1, 1}, {0, 0}, {0, 0}},
                                      {{0, 0}, {0, 0}, {1, 2}, {1, 1}, {0, 0}},
                                      {{0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}},
                                      {{0, 0}, {0, 0}, {1, 2}, {1, 1}, {1, 0}}};
    static const Mat5 m = make_mat(spec);
    return m;
}
inline const Mat5& matrix_c() {
    static const int spec[5][5][2] = {{{1, 0}, {1, 1}, {1, 2}, {0, 0}, {0, 0}},
                                      {{0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}},
                                      {{0, 0}, {1, 1}, {1, 2}, {0, 0}, {0, 0}},
                                      {{0, 0}, {0, 0}, {1, 1}, {1, 0}, {0, 0}},
                                      {{0, 0}, {0, 0}, {0, 0}, {0, 0}, {1, 0}}};
    static const Mat5 m = make_mat(spec);
    return m;
}

// Ball input vectors: starting in column two, three, or four.
inline std::vector<Vec5> start_vectors() {
    auto v = [](int a2, int a4) {
        Vec5 x{};
        if (a2 == 2) {
            x[0] = Dyadic::pow2(1);
            x[2] = Dyadic::pow2(1);
        } else {
            x[2] = a4 ? Dyadic::pow2(1) : Dyadic::one();
            if (a4) x[4] = Dyadic::pow2(1);
        }
        return x;
    };
    return {v(2, 0), v(3, 0), v(3, 1)};
}

inline Vec5 act(const Mat5& m, const Vec5& v) {
    Vec5 out;
    for (int r = 0; r < 5; ++r) {
        Dyadic acc;
        for (int c = 0; c < 5; ++c) acc += m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] * v[static_cast<std::size_t>(c)];
        out[static_cast<std::size_t>(r)] = acc;
    }
    return out;
}

}  // namespace three_output

// All distributions A (T_1 ... T_j) x with T_i in {A, B, C}, x a start
// vector and j at most `depth`.
inline std::set<Vec5> three_output_enumerate(unsigned depth) {
    using namespace three_output;
    std::set<Vec5> result;
    std::vector<Vec5> frontier = start_vectors();
    const std::vector<const Mat5*> mats = {&matrix_a(), &matrix_b(), &matrix_c()};
    for (unsigned d = 0;; ++d) {
        for (const Vec5& v : frontier) result.insert(act(matrix_a(), v));
        if (d == depth) break;
        std::vector<Vec5> next;
        next.reserve(frontier.size() * 3);
        for (const Vec5& v : frontier)
            for (const Mat5* m : mats) next.push_back(act(*m, v));
        frontier = std::move(next);
    }
    return result;
}

// Four-column three-output family: k alternating hit pins in two adjacent
// pin columns.  k = 2j+1 gives <sum 2^{-2i+1}, 0, 2^-k, sum 2^{-2i}>,
// k = 2j gives <sum 2^{-2i+1}, 2^-k, 0, sum 2^{-2i}>.
inline std::array<Dyadic, 4> four_column_family(unsigned k) {
    if (k == 0) throw ValidationError("four_column_family needs k >= 1");
    unsigned j = k / 2;
    Dyadic first, last;
    for (unsigned i = 1; i <= (k % 2 ? j + 1 : j); ++i) first += Dyadic::pow2(2 * i - 1);
    for (unsigned i = 1; i <= j; ++i) last += Dyadic::pow2(2 * i);
    if (k % 2) return {first, Dyadic::zero(), Dyadic::pow2(k), last};
    return {first, Dyadic::pow2(k), Dyadic::zero(), last};
}

// The matching layout: pins alternate between columns 0 and 1, outputs fall
// in columns -1, 0, 1, 2.
inline GridPachinko four_column_layout(unsigned k) {
    GridPachinko g;
    for (unsigned i = 1; i <= k; ++i) g.place(static_cast<int>(i), (i % 2) ? 0 : 1, PinType::N);
    return g;
}

// ---------------------------------------------------------------------------
// Double-diagonal prefix of the shifted-distribution construction.  The kth
// pin of the first diagonal is hit with probability 2^{1-k}, the kth pin of
// the second with k 2^{-k}; a triple tap at spots q-1, q, q+1 of the third
// diagonal realizes hit probabilities (q-1)2^{-q}, (2q-1)2^{-1-q} and
// 3q 2^{-2-q}.

struct DoubleDiagonal {
    GridPachinko grid;
    GridCell first_diag(unsigned k) const { return {static_cast<int>(k), static_cast<long long>(k) - 1}; }
    GridCell second_diag(unsigned k) const { return {static_cast<int>(k) + 1, static_cast<long long>(k) - 2}; }
    GridCell tap(unsigned spot) const { return {static_cast<int>(spot) + 2, static_cast<long long>(spot) - 3}; }
};

inline DoubleDiagonal double_diagonal(unsigned length, unsigned tap_q = 0) {
    if (length < 1) throw ValidationError("double_diagonal needs length >= 1");
    DoubleDiagonal d;
    for (unsigned k = 1; k <= length; ++k) d.grid.place(static_cast<int>(k), static_cast<long long>(k) - 1, PinType::N);
    for (unsigned k = 1; k <= length; ++k)
        d.grid.place(static_cast<int>(k) + 1, static_cast<long long>(k) - 2, PinType::N);
    if (tap_q > 0) {
        if (tap_q < 2 || tap_q + 1 > length)
            throw ValidationError("triple tap needs 2 <= q and q+1 <= length");
        for (unsigned spot = tap_q - 1; spot <= tap_q + 1; ++spot) {
            GridCell c = d.tap(spot);
            d.grid.place(c.row, c.col, PinType::N);
        }
    }
    return d;
}

}  // namespace pachinko
