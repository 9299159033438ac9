#include "pachinko/distribution.hpp"
#include "pachinko/dyadic.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <boost/rational.hpp>

#include <random>
#include <sstream>

using namespace pachinko;
using Rat = boost::rational<BigInt>;

namespace {

Rat to_rational(const Dyadic& d) { return Rat(d.numerator(), BigInt(1) << d.exponent()); }

Dyadic dy(unsigned long long num, unsigned exp) { return Dyadic{BigInt(num), exp}; }

// Row k of Pascal's triangle over 2^k on columns -k, -k+2, ..., k.
Distribution binomial_row(unsigned k) {
    Distribution d;
    BigInt c = 1;
    for (unsigned i = 0; i <= k; ++i) {
        d.add(-static_cast<long long>(k) + 2 * static_cast<long long>(i), Dyadic{c, k});
        c = c * (k - i) / (i + 1);
    }
    return d;
}

}  // namespace

TEST_CASE("dyadic addition is exact and canonical") {
    CHECK(dy(1, 1) + dy(1, 2) == dy(3, 2));   // 1/2 + 1/4 = 3/4
    CHECK(Dyadic::zero() + dy(5, 3) == dy(5, 3));
    CHECK(dy(3, 3) + dy(1, 3) == dy(1, 1));   // 3/8 + 1/8 = 1/2, carries renormalize
}

TEST_CASE("halving") {
    CHECK(Dyadic::one().half() == dy(1, 1));
    CHECK(dy(3, 2).half() == dy(3, 3));
    CHECK(Dyadic::zero().half() == Dyadic::zero());
}

TEST_CASE("binary parsing") {
    CHECK(parse_binary(".1011") == dy(11, 4));
    CHECK(parse_binary(".11") == dy(3, 2));
    CHECK(parse_binary("1.") == Dyadic::one());
    CHECK(parse_binary("0") == Dyadic::zero());
    CHECK(parse_binary("0.11") == dy(3, 2));
    CHECK_THROWS_AS(parse_binary(".1021"), ParseError);
    CHECK_THROWS_AS(parse_binary("x"), ParseError);
    CHECK_THROWS_AS(parse_binary(""), ParseError);
    CHECK_THROWS_MATCHES(parse_binary(".12"), ParseError,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("'2'")));
}

TEST_CASE("binary formatting round trips") {
    CHECK(Dyadic::zero().to_binary() == "0");
    CHECK(Dyadic::one().to_binary() == "1.");
    CHECK(dy(3, 2).to_binary() == ".11");
    for (unsigned b = 1; b <= 12; ++b) {
        for (unsigned long long n = 0; n >> b == 0; ++n) {
            Dyadic d = dy(n, b);
            CAPTURE(n, b);
            REQUIRE(parse_binary(d.to_binary()) == d);
        }
    }
}

TEST_CASE("canonicalization is idempotent and exponents stay minimal") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 2000; ++i) {
        unsigned exp = static_cast<unsigned>(rng() % 40);
        Dyadic d{BigInt(rng() % (1ull << 20)), exp};
        Dyadic again{d.numerator(), d.exponent()};
        CHECK(again == d);
        // Fully reduced: an even numerator can only remain at exponent 0.
        if ((d.numerator() & 1) == 0) CHECK(d.exponent() == 0);
        if (d.is_zero()) CHECK(d.exponent() == 0);
    }
}

TEST_CASE("add and multiply agree with rational arithmetic on random pairs") {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 10000; ++i) {
        Dyadic a{BigInt(rng() % 4096), static_cast<unsigned>(rng() % 16)};
        Dyadic b{BigInt(rng() % 4096), static_cast<unsigned>(rng() % 16)};
        REQUIRE(to_rational(a + b) == to_rational(a) + to_rational(b));
        REQUIRE(to_rational(a * b) == to_rational(a) * to_rational(b));
        REQUIRE(to_rational(a.half()) == to_rational(a) / 2);
        Dyadic hi = a >= b ? a : b;
        Dyadic lo = a >= b ? b : a;
        REQUIRE(to_rational(hi - lo) == to_rational(hi) - to_rational(lo));
        REQUIRE((a < b) == (to_rational(a) < to_rational(b)));
    }
}

TEST_CASE("first moment") {
    Distribution d;
    d.add(-1, dy(1, 1));
    d.add(1, dy(1, 1));
    CHECK(first_moment(d).is_zero());

    CHECK(first_moment(binomial_row(3)).is_zero());

    Distribution e;
    e.add(-1, dy(1, 2));
    e.add(3, dy(3, 2));
    Moment m = first_moment(e);
    CHECK(m == Moment{BigInt(2), 0});
}

TEST_CASE("statistical distance") {
    Distribution a = binomial_row(2);
    CHECK(statistical_distance(a, a).is_zero());

    Distribution b, c;
    b.add(0, Dyadic::one());
    c.add(0, dy(3, 2));
    c.add(2, dy(1, 2));
    CHECK(statistical_distance(b, c) == dy(1, 2));

    // Brute-force oracle: scan every column either side touches.
    Distribution b2 = binomial_row(2);
    Distribution b3 = binomial_row(3);
    Dyadic expected;
    for (long long col = -8; col <= 8; ++col) expected = std::max(expected, Dyadic::abs_diff(b2.at(col), b3.at(col)));
    CHECK(statistical_distance(b2, b3) == expected);
    CHECK(statistical_distance(b2, b3) == statistical_distance(b3, b2));
}

TEST_CASE("distribution text format round trips") {
    Distribution d;
    d.add(-1, dy(1, 2));
    d.add(3, dy(5, 3));
    d.add_rest(dy(1, 3));
    std::string text = d.to_text();
    std::istringstream in(text);
    Distribution back = Distribution::from_text(in);
    CHECK(back == d);
    CHECK(text == "-1: .01\n3: .101\nrest: .001\n");

    std::istringstream bad("1: .2\n");
    CHECK_THROWS_AS(Distribution::from_text(bad), ParseError);
    std::istringstream bad2("q: .1\n");
    CHECK_THROWS_AS(Distribution::from_text(bad2), ParseError);
}

TEST_CASE("totals and completeness") {
    Distribution d = binomial_row(5);
    CHECK(d.is_complete());
    CHECK(d.total().is_one());
    Distribution e;
    e.add(0, dy(1, 1));
    e.add_rest(dy(1, 1));
    CHECK(e.is_complete());
    CHECK(e.output_count() == 1);
}
