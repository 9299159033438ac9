#pragma once

// 50-50 approximation constructions.
//
// approximate_probability: the double-truncated concentrator.  Empty the
// columns m and m-n of a full Pachinko deep enough that almost no mass is
// still in flight; the centered moment then pins the column m-n mass near
// m/n.  Only the strip strictly between the emptied columns ever carries
// pins, so the grid is rows x (n-1) cells.
//
// approximate_distribution: a recursive series of such splitters.  Each
// level splits the leftmost target off to the left absorber and recurses
// on the rescaled remainder under the right absorber; the separation (the
// splitter's denominator) is chosen to equal one minus the remainder
// window's offset, which makes the windows land adjacent without any
// shifting.  Only the innermost pair needs a leftward transport gadget: a
// strip walk absorbed at the target column, with a pin-free junk barrier
// far enough right that the escaping mass stays under budget.

#include "pachinko/ballot.hpp"
#include "pachinko/distribution.hpp"
#include "pachinko/grid.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace pachinko {

struct ApproxBudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline Rational to_rational(const Dyadic& d) { return Rational(d.numerator(), BigInt(1) << d.exponent()); }

// Continued-fraction convergents of p in [0, 1]; the first with error at
// most `tol` and 0 < num < den, or p itself reduced.
inline std::pair<BigInt, BigInt> convergent_for(const Rational& p, const Rational& tol) {
    BigInt a = p.numerator(), b = p.denominator();
    BigInt h0 = 0, k0 = 1, h1 = 1, k1 = 0;
    while (b != 0) {
        BigInt q = a / b;
        BigInt h2 = q * h1 + h0, k2 = q * k1 + k0;
        h0 = h1;
        k0 = k1;
        h1 = h2;
        k1 = k2;
        BigInt r = a - q * b;
        a = b;
        b = r;
        if (h1 > 0 && h1 < k1 && boost::abs(Rational(h1, k1) - p) <= tol) return {h1, k1};
    }
    return {p.numerator(), p.denominator()};
}

// All-N pins on every lattice cell of rows 1..rows whose column lies
// strictly between lo and hi and is reachable from the entry column.
inline void fill_strip(GridPachinko& g, long long entry, long long lo, long long hi, int rows, int row_offset) {
    for (int r = 1; r <= rows; ++r)
        for (long long c = std::max(lo + 1, entry - r + 1); c <= std::min(hi - 1, entry + r - 1); ++c)
            if (cell_on_lattice(r, c - entry)) g.place(r + row_offset, c, PinType::N);
}

// Rows after which the in-flight mass of a width-L two-absorber strip
// drops below t: the walk mixes with spectral gap ~ pi^2 / (2 L^2).
inline int strip_depth_estimate(long long width, const Rational& t) {
    double tol = boost::rational_cast<double>(t);
    double rows = 0.21 * static_cast<double>(width * width) * std::log(2.0 / std::max(tol, 1e-12));
    return static_cast<int>(rows) + 2 * static_cast<int>(width) + 2;
}

inline Dyadic in_flight(const Distribution& d, long long lo, long long hi) {
    Dyadic t;
    for (const auto& [c, m] : d.entries())
        if (c > lo && c < hi) t += m;
    return t;
}

}  // namespace detail

struct ApproxProbability {
    GridPachinko grid;
    long long target_column = 0;
    Dyadic achieved;
    long long other_column = 0;  // the split's second output
    Dyadic other_achieved;
};

// A 50-50 Pachinko with one output column whose exact mass lies in
// (p - eps, p + eps); verification against the exact DP is part of the
// operation, not just its tests.
inline ApproxProbability approximate_probability(const Rational& p, const Rational& eps,
                                                 long long row_budget = 400000) {
    if (p < 0 || p > 1 || eps <= 0) throw ValidationError("approximate_probability needs p in [0,1], eps > 0");
    ApproxProbability out;
    if (p <= eps / 3) {  // an empty column already qualifies
        out.target_column = 2;
        out.other_column = 0;
        out.other_achieved = Dyadic::one();
        return out;
    }
    if (1 - p <= eps / 3) {
        out.target_column = 0;
        out.achieved = Dyadic::one();
        out.other_column = 2;
        return out;
    }

    auto [mb, nb] = detail::convergent_for(p, eps / 3);
    long long m = mb.convert_to<long long>();
    long long n = nb.convert_to<long long>();
    long long M = std::min(m, n - m);  // concentrate the cheaper column
    bool direct = M == m;

    Rational t = eps / (3 * std::max(m, n - m));
    for (int attempt = 0; attempt < 25; ++attempt, t /= 2) {
        auto j = depth_for_epsilon(static_cast<unsigned>(M), t);
        long long rows = M + 2 * static_cast<long long>(j);
        if (rows > row_budget)
            throw ApproxBudgetError("approximate_probability needs a " + std::to_string(rows) +
                                    "-row concentrator for p=" + p.numerator().str() + "/" +
                                    p.denominator().str() + "; raise the row budget to allow it");
        GridPachinko g;
        detail::fill_strip(g, 0, M - n, M, static_cast<int>(rows), 0);
        Distribution d = simulate_grid(g);
        long long target = direct ? M - n : M;
        long long other = direct ? M : M - n;
        Dyadic got = d.at(target);
        Rational got_q = detail::to_rational(got);
        if (got_q > p - eps && got_q < p + eps) {
            out.grid = std::move(g);
            out.target_column = target;
            out.achieved = got;
            out.other_column = other;
            out.other_achieved = d.at(other);
            return out;
        }
    }
    throw InternalError("approximate_probability failed to verify after tightening");
}

struct ApproxDistribution {
    GridPachinko grid;
    long long first_column = 0;  // targets occupy first_column .. first_column+n-1
    std::vector<Dyadic> achieved;
};

namespace detail {

struct SeriesPiece {
    GridPachinko grid;
    long long window_lo = 0;  // leftmost target column, relative to the input
    int rows = 0;
};

// One splitter level: left absorber B = m - n1 carries ~ f of the incoming
// mass, right absorber S = m the rest.  n1 is dictated by the caller.
struct LevelSplit {
    GridPachinko grid;
    long long left, right;
    int rows;
};

inline LevelSplit build_split(const Rational& f, long long n1, const Rational& t, long long row_budget) {
    LevelSplit out;
    Rational scaled = f * n1;
    long long m = boost::rational_cast<long long>(scaled + Rational(1, 2));  // round to nearest
    m = std::clamp<long long>(m, 1, n1 - 1);
    out.left = m - n1;
    out.right = m;
    int rows = strip_depth_estimate(n1, t);
    for (int attempt = 0;; ++attempt) {
        if (rows > row_budget) throw ApproxBudgetError("series splitter exceeded the row budget");
        GridPachinko g;
        fill_strip(g, 0, out.left, out.right, rows, 0);
        Distribution d = simulate_grid(g);
        if (to_rational(in_flight(d, out.left, out.right)) <= t) {
            out.grid = std::move(g);
            out.rows = rows;
            return out;
        }
        if (attempt >= 8) throw InternalError("splitter in-flight did not converge");
        rows += rows / 2;
    }
}

// Transport the stream at `from` to `from - dd` with loss at most
// junk + t: pins fill (target, from + width); the pin-free column at
// from + width absorbs what escapes right.
struct Transport {
    GridPachinko grid;
    int rows;
};

// Built entry-relative: the stream enters at column 0 and is absorbed at
// column -dd; callers plant it under the source column via merge_piece.
inline Transport build_transport(long long dd, const Rational& junk, const Rational& t, long long row_budget) {
    long long width = boost::rational_cast<long long>(Rational(dd) / junk) + 1;
    int rows = strip_depth_estimate(dd + width, t);
    for (int attempt = 0;; ++attempt) {
        if (rows > row_budget) throw ApproxBudgetError("transport gadget exceeded the row budget");
        GridPachinko g;
        fill_strip(g, 0, -dd, width, rows, 0);
        Distribution d = simulate_grid(g);
        if (to_rational(in_flight(d, -dd, width)) <= t) {
            Transport out{std::move(g), rows};
            return out;
        }
        if (attempt >= 8) throw InternalError("transport in-flight did not converge");
        rows += rows / 2;
    }
}

// Plant `piece` (built with its entry at column 0) under global column
// dcol, below `after_rows` rows.  Lattice parity must be preserved, so an
// extra pass-through row is inserted when the offsets disagree; the mass
// just falls one row further.
inline void merge_piece(GridPachinko& into, const GridPachinko& piece, long long dcol, int after_rows) {
    int drow = after_rows + (((after_rows + dcol) % 2 != 0) ? 1 : 0);
    for (const auto& [cell, type] : piece.cells()) into.place(cell.row + drow, cell.col + dcol, type);
}

// pad: lower bound for the innermost splitter's denominator; raising it
// widens every window and with it every level's separation.
inline SeriesPiece build_series(const std::vector<Rational>& ps, const Rational& stage_eps, long long pad,
                                long long row_budget) {
    SeriesPiece out;
    std::size_t n = ps.size();
    if (n == 1) return out;  // mass 1 sits at the input column

    Rational f = ps[0];
    Rational rest_total = 1 - f;
    if (rest_total <= 0) {
        // Degenerate: everything is in the first target; the empty grid
        // leaves mass 1 at column 0 and zeros to its right.
        return out;
    }
    std::vector<Rational> rest;
    for (std::size_t i = 1; i < n; ++i) rest.push_back(ps[i] / rest_total);

    if (n == 2) {
        // Innermost pair: split, then transport the right output adjacent.
        long long n1 = std::max<long long>({2, pad, f.denominator().convert_to<long long>()});
        // Exact fraction when the denominator divides n1.
        if (n1 % f.denominator().convert_to<long long>() != 0)
            n1 = ((n1 / f.denominator().convert_to<long long>()) + 1) * f.denominator().convert_to<long long>();
        LevelSplit split = build_split(f, n1, stage_eps, row_budget);
        out.grid = split.grid;
        long long dd = split.right - (split.left + 1);
        int rows_used = split.rows;
        if (dd > 0) {
            Transport move = build_transport(dd, stage_eps, stage_eps, row_budget);
            merge_piece(out.grid, move.grid, split.right, rows_used);
            rows_used += move.rows + 1;
        }
        out.window_lo = split.left;
        out.rows = rows_used;
        return out;
    }

    SeriesPiece sub = build_series(rest, stage_eps, pad, row_budget);
    long long n1 = 1 - sub.window_lo;
    if (n1 < 2) throw InternalError("series separation degenerated");
    LevelSplit split = build_split(f, n1, stage_eps, row_budget);
    // Adjacency: the remainder window must start right after the left
    // absorber, i.e. at split.left + 1 = split.right + sub.window_lo.
    if (split.right + sub.window_lo != split.left + 1)
        throw InternalError("series windows failed to align");
    out.grid = split.grid;
    merge_piece(out.grid, sub.grid, split.right, split.rows);
    out.window_lo = split.left;
    out.rows = split.rows + sub.rows + 1;
    return out;
}

}  // namespace detail

// Consecutive outputs within eps of each p_i, junk outputs each below eps;
// verified exactly before returning.
inline ApproxDistribution approximate_distribution(const std::vector<Rational>& ps, const Rational& eps,
                                                   long long row_budget = 400000) {
    if (ps.empty()) throw ValidationError("approximate_distribution needs at least one probability");
    Rational sum = 0;
    for (const Rational& p : ps) {
        if (p < 0 || p > 1) throw ValidationError("probabilities must lie in [0, 1]");
        sum += p;
    }
    if (sum != 1) throw ValidationError("probabilities must sum to exactly 1");
    if (eps <= 0) throw ValidationError("eps must be positive");

    std::size_t n = ps.size();
    Rational stage = eps / static_cast<long long>(4 * n);
    long long pad = 2;
    for (int attempt = 0; attempt < 8; ++attempt) {
        detail::SeriesPiece piece = detail::build_series(ps, stage, pad, row_budget);
        Distribution d = simulate_grid(piece.grid);
        bool ok = true;
        ApproxDistribution out;
        out.first_column = piece.window_lo;
        for (std::size_t i = 0; i < n && ok; ++i) {
            Dyadic got = d.at(piece.window_lo + static_cast<long long>(i));
            Rational got_q = detail::to_rational(got);
            ok = got_q > ps[i] - eps && got_q < ps[i] + eps;
            out.achieved.push_back(got);
        }
        for (const auto& [c, m] : d.entries()) {
            if (c >= piece.window_lo && c < piece.window_lo + static_cast<long long>(n)) continue;
            if (detail::to_rational(m) >= eps) ok = false;  // junk outputs stay below eps
        }
        if (ok) {
            out.grid = std::move(piece.grid);
            return out;
        }
        pad *= 2;
        stage /= 2;
    }
    throw InternalError("approximate_distribution failed to verify after tightening");
}

}  // namespace pachinko
