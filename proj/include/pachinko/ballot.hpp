#pragma once

// Ballot numbers B(m, j) count the input-ball paths reaching pin
// (m-1, m+2j) of an m-truncated Pachinko.  B(1, j) are the Catalan numbers.

#include "pachinko/dyadic.hpp"
#include "pachinko/grid.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/rational.hpp>

#include <map>
#include <stdexcept>

namespace pachinko {

using Rational = boost::rational<BigInt>;

inline BigInt binomial(unsigned n, unsigned k) {
    if (k > n) return 0;
    BigInt r = 1;
    for (unsigned i = 0; i < k; ++i) {
        r *= n - i;
        r /= i + 1;
    }
    return r;
}

// Closed form B(m, j) = m/(2j+m) * C(2j+m, j).
inline BigInt ballot(unsigned m, unsigned j) {
    if (m == 0) return j == 0 ? BigInt(1) : BigInt(0);
    BigInt c = binomial(2 * j + m, j);
    c *= m;
    c /= 2 * j + m;
    return c;
}

// Memoized recurrence B(m, j) = B(m-1, j) + B(m+1, j-1), B(m, 0) = 1,
// B(0, j) = 0 for j >= 1.
class BallotTable {
  public:
    const BigInt& operator()(unsigned m, unsigned j) {
        auto key = std::pair{m, j};
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        BigInt v;
        if (j == 0)
            v = (m == 0) ? 1 : 1;  // single straight path (and B(0,0) = 1 by convention)
        else if (m == 0)
            v = 0;
        else
            v = (*this)(m - 1, j) + (*this)(m + 1, j - 1);
        return memo_.emplace(key, std::move(v)).first->second;
    }

  private:
    std::map<std::pair<unsigned, unsigned>, BigInt> memo_;
};

// All-N Pachinko with pins on every reachable lattice cell of rows 1..k.
inline GridPachinko full_pachinko(unsigned k) {
    GridPachinko g;
    for (unsigned r = 1; r <= k; ++r)
        for (long long c = -(static_cast<long long>(r) - 1); c <= static_cast<long long>(r) - 1; c += 2)
            g.place(static_cast<int>(r), c, PinType::N);
    return g;
}

// Full k-Pachinko with column m emptied.  k == m is allowed and vacuous:
// column m holds no pins before row m+1.
inline GridPachinko truncated_pachinko(unsigned m, unsigned k) {
    if (!(k >= m && m > 0)) throw ValidationError("truncated Pachinko needs k >= m > 0");
    GridPachinko g;
    for (unsigned r = 1; r <= k; ++r)
        for (long long c = -(static_cast<long long>(r) - 1); c <= static_cast<long long>(r) - 1; c += 2)
            if (c != static_cast<long long>(m)) g.place(static_cast<int>(r), c, PinType::N);
    return g;
}

// Mass an m-truncated (m+2j)-Pachinko leaves in column m:
// sum_{i<=j} B(m, i) / 2^{m+2i}.
inline Dyadic truncated_column_mass(unsigned m, unsigned j) {
    Dyadic sum;
    for (unsigned i = 0; i <= j; ++i) sum += Dyadic{ballot(m, i), m + 2 * i};
    return sum;
}

// 1 - truncated_column_mass(m, j) is the probability a fair +-1 walk of
// N = m+2j steps never reaches +m, which by reflection is the central strip
//   tail(m, N) = sum_{s=-m}^{m-1}, s == N (mod 2)} C(N, (N+s)/2) / 2^N,
// only m binomial terms.  That lets the depth search run without summing
// ballot terms one by one.
inline bool truncated_tail_below(unsigned m, unsigned long long n_rows, const Rational& eps) {
    auto strip_terms = [&](auto&& coef) {
        for (long long s = -static_cast<long long>(m); s < static_cast<long long>(m); ++s) {
            if (((n_rows + s) & 1) != 0) continue;
            unsigned long long k = (n_rows + s) / 2;
            coef(k);
        }
    };
    if (n_rows <= 40000) {
        BigInt strip = 0;
        strip_terms([&](unsigned long long k) { strip += binomial(static_cast<unsigned>(n_rows), static_cast<unsigned>(k)); });
        // strip / 2^N < eps  <=>  strip * eps.den < eps.num << N
        return strip * eps.denominator() < (eps.numerator() << static_cast<unsigned>(n_rows));
    }
    // Certified comparison in 100-digit floats; the margin guard keeps the
    // decision sound (a knife-edge case would need ~1e-60 relative slack).
    using F = boost::multiprecision::cpp_bin_float_100;
    F log2e = boost::multiprecision::log2(F(eps.numerator().convert_to<F>() / eps.denominator().convert_to<F>()));
    F strip = 0;
    const F ln2 = boost::multiprecision::log(F(2));
    strip_terms([&](unsigned long long k) {
        F lg = boost::math::lgamma(F(n_rows + 1)) - boost::math::lgamma(F(k + 1)) - boost::math::lgamma(F(n_rows - k + 1));
        strip += boost::multiprecision::exp(lg - F(n_rows) * ln2);
    });
    F logt = boost::multiprecision::log2(strip);
    F margin = boost::multiprecision::abs(logt - log2e);
    if (margin < F("1e-40")) throw std::runtime_error("truncated_tail_below: comparison too close to certify");
    return logt < log2e;
}

// Smallest j such that the m-truncated (m+2j)-Pachinko leaves mass
// greater than 1 - eps in column m.  The paper bounds this depth with
// B(m, j+1)/2^{m+2(j+1)} <= eps, but that under-counts the tail (it is a
// whole series, not one term), so the search compares the exact tail.
inline unsigned long long depth_for_epsilon(unsigned m, const Rational& eps) {
    if (m == 0 || eps <= 0 || eps >= 1) throw ValidationError("depth_for_epsilon needs m >= 1, eps in (0,1)");
    auto tail_ok = [&](unsigned long long j) { return truncated_tail_below(m, m + 2 * j, eps); };
    if (tail_ok(0)) return 0;
    unsigned long long hi = 1;
    while (!tail_ok(hi)) hi *= 2;
    unsigned long long lo = hi / 2;
    while (hi - lo > 1) {
        unsigned long long mid = lo + (hi - lo) / 2;
        (tail_ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace pachinko
