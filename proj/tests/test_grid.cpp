#include "pachinko/ballot.hpp"
#include "pachinko/distribution.hpp"
#include "pachinko/grid.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

using namespace pachinko;

namespace {
Dyadic dy(unsigned long long n, unsigned e) { return Dyadic{BigInt(n), e}; }

GridPachinko random_grid(std::mt19937_64& rng, int rows, double fill) {
    GridPachinko g;
    std::uniform_real_distribution<double> u(0, 1);
    const PinType kinds[4] = {PinType::N, PinType::L, PinType::R, PinType::S};
    for (int r = 1; r <= rows; ++r)
        for (long long c = -r; c <= r; ++c)
            if (cell_on_lattice(r, c) && u(rng) < fill) g.place(r, c, kinds[rng() % 4]);
    return g;
}
}  // namespace

TEST_CASE("lattice parity") {
    CHECK(cell_on_lattice(1, 0));
    CHECK_FALSE(cell_on_lattice(1, 1));
    CHECK(cell_on_lattice(2, -1));
    CHECK(cell_on_lattice(3, 0));
    CHECK_FALSE(cell_on_lattice(0, 1));
    GridPachinko g;
    CHECK_THROWS_AS(g.place(1, 1, PinType::N), ValidationError);
}

TEST_CASE("single N-pin splits evenly") {
    GridPachinko g;
    g.place(1, 0, PinType::N);
    Distribution d = simulate_grid(g);
    CHECK(d.at(-1) == dy(1, 1));
    CHECK(d.at(1) == dy(1, 1));
    CHECK(d.output_count() == 2);
    CHECK(d.rest_mass().is_zero());
}

TEST_CASE("quarter/three-quarter layout") {
    // N at (1,0); N at (2,-1); R at (3,0) gives <1/4, 0, 3/4> over columns -2, +1.
    GridPachinko g;
    g.place(1, 0, PinType::N);
    g.place(2, -1, PinType::N);
    g.place(3, 0, PinType::R);
    Distribution d = simulate_grid(g);
    CHECK(d.at(-2) == dy(1, 2));
    CHECK(d.at(1) == dy(3, 2));
    CHECK(d.output_count() == 2);
    CHECK(d.is_complete());
}

TEST_CASE("full Pachinko outputs binomial rows") {
    for (unsigned k = 1; k <= 8; ++k) {
        Distribution d = simulate_grid(full_pachinko(k));
        CAPTURE(k);
        REQUIRE(d.output_count() == k + 1);
        for (unsigned i = 0; i <= k; ++i) {
            long long col = -static_cast<long long>(k) + 2 * static_cast<long long>(i);
            REQUIRE(d.at(col) == Dyadic{binomial(k, i), k});
        }
        REQUIRE(first_moment(d).is_zero());
    }
}

TEST_CASE("L, R and S pins route deterministically") {
    GridPachinko g;
    g.place(1, 0, PinType::L);
    CHECK(simulate_grid(g).at(-1).is_one());
    GridPachinko h;
    h.place(1, 0, PinType::R);
    CHECK(simulate_grid(h).at(1).is_one());
    GridPachinko s;
    s.place(1, 0, PinType::S);
    Distribution d = simulate_grid(s);
    CHECK(d.rest_mass().is_one());
    CHECK(d.output_count() == 0);
}

TEST_CASE("empty grid drops straight through") {
    Distribution d = simulate_grid(GridPachinko{});
    CHECK(d.at(0).is_one());
    CHECK(d.output_count() == 1);
}

TEST_CASE("conservation holds on random mixed grids") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        GridPachinko g = random_grid(rng, 1 + static_cast<int>(rng() % 10), 0.5);
        Distribution d = simulate_grid(g);
        REQUIRE(d.total().is_one());
        for (const auto& [c, m] : d.entries()) REQUIRE(!m.is_zero());
    }
}

TEST_CASE("unreachable pin warning") {
    // After N at (1,0), mass sits in columns -1 and +1 at row 2; a pin at
    // (3, 0) gets mass back, but a pin at (2, 1) with an L above it at (2,-1)?
    // Simplest: S pins at (2,-1) and (2,1) absorb everything, so (3, 0) is dry.
    GridPachinko g;
    g.place(1, 0, PinType::N);
    g.place(2, -1, PinType::S);
    g.place(2, 1, PinType::S);
    g.place(3, 0, PinType::N);
    GridReport rep = validate(g);
    REQUIRE(rep.warnings.size() == 1);
    CHECK(rep.warnings[0].find("(3, 0)") != std::string::npos);
    CHECK(rep.ok);

    GridReport clean = validate(GridPachinko{});
    CHECK(clean.ok);
    CHECK(clean.warnings.empty());
}

TEST_CASE("grid text format round trips") {
    std::mt19937_64 rng(5);
    GridPachinko g = random_grid(rng, 6, 0.4);
    std::string text = g.to_text();
    std::istringstream in(text);
    GridPachinko back = GridPachinko::from_text(in);
    CHECK(back == g);

    std::istringstream bad("grid v1\n1 0 Q\n");
    CHECK_THROWS_AS(GridPachinko::from_text(bad), ParseError);
    std::istringstream bad2("nope\n");
    CHECK_THROWS_AS(GridPachinko::from_text(bad2), ParseError);
    std::istringstream bad3("grid v1\n1 1 N\n");
    CHECK_THROWS_AS(GridPachinko::from_text(bad3), ValidationError);
}

TEST_CASE("ballot numbers: closed form, recurrence and lattice paths agree") {
    BallotTable table;
    CHECK(ballot(1, 2) == 2);  // Catalan
    CHECK(ballot(2, 2) == 5);
    for (unsigned m = 1; m <= 12; ++m)
        for (unsigned j = 0; m + 2 * j <= 40; ++j) {
            CAPTURE(m, j);
            REQUIRE(table(m, j) == ballot(m, j));
        }

    // Lattice path count: ways to reach pin (m-1, m+2j) inside the
    // m-truncated Pachinko, counted by a direct DP over the grid.
    for (unsigned m = 1; m <= 6; ++m)
        for (unsigned j = 0; j <= 6; ++j) {
            unsigned k = m + 2 * j;
            GridPachinko g = truncated_pachinko(m, k);
            std::map<long long, BigInt> ways;
            ways[0] = 1;
            // Count arrivals at row k: route through rows 1..k-1 only.
            for (unsigned r = 1; r < k; ++r) {
                std::map<long long, BigInt> next;
                for (auto& [c, w] : ways) {
                    if (g.at(static_cast<int>(r), c)) {
                        next[c - 1] += w;
                        next[c + 1] += w;
                    } else if (c == static_cast<long long>(m)) {
                        // fell into the empty column; never comes back
                    } else {
                        next[c] += w;
                    }
                }
                ways = std::move(next);
            }
            auto it = ways.find(static_cast<long long>(m) - 1);
            BigInt paths = (it == ways.end()) ? BigInt(0) : it->second;
            CAPTURE(m, j, k);
            REQUIRE(paths == ballot(m, j));
        }
}

TEST_CASE("truncated Pachinko column mass matches the ballot sum") {
    for (unsigned m = 1; m <= 3; ++m)
        for (unsigned j = 0; j <= 4; ++j) {
            unsigned k = m + 2 * j;
            Distribution d = simulate_grid(truncated_pachinko(m, k));
            CAPTURE(m, j);
            REQUIRE(d.at(static_cast<long long>(m)) == truncated_column_mass(m, j));
        }
}

TEST_CASE("truncated column mass increases toward 1") {
    for (unsigned m : {1u, 2u, 3u}) {
        Dyadic prev;
        for (unsigned j = 0; j <= 8; ++j) {
            Dyadic cur = truncated_column_mass(m, j);
            REQUIRE(cur > prev);
            REQUIRE(cur < Dyadic::one());
            prev = cur;
        }
    }
}

TEST_CASE("depth_for_epsilon meets the 1-eps bound") {
    struct Case {
        unsigned m;
        Rational eps;
        bool dp_check;  // full-grid DP is cubic in depth; skip it when deep
    } cases[] = {{1, Rational(1, 8), true}, {2, Rational(1, 16), true}, {3, Rational(1, 32), false}};
    for (const auto& cse : cases) {
        auto j = depth_for_epsilon(cse.m, cse.eps);
        CAPTURE(cse.m, j);
        // Exact ballot partial sum (tied to the grid DP in the test above).
        Dyadic mass = truncated_column_mass(cse.m, static_cast<unsigned>(j));
        if (cse.dp_check)
            REQUIRE(simulate_grid(truncated_pachinko(cse.m, cse.m + 2 * static_cast<unsigned>(j))).at(cse.m) == mass);
        Dyadic gap = Dyadic::one() - mass;
        Rational gap_q(gap.numerator(), BigInt(1) << gap.exponent());
        REQUIRE(gap_q < cse.eps);
        // Minimality: one row pair less must miss the bound.
        if (j > 0) {
            Dyadic less = truncated_column_mass(cse.m, static_cast<unsigned>(j) - 1);
            Dyadic gap2 = Dyadic::one() - less;
            REQUIRE(Rational(gap2.numerator(), BigInt(1) << gap2.exponent()) >= cse.eps);
        }
    }

    // Loose targets need no depth at all: mass 2^-m already exceeds 1 - eps.
    CHECK(depth_for_epsilon(1, Rational(3, 4)) == 0);

    // Monotone in eps.
    unsigned long long prev = depth_for_epsilon(2, Rational(1, 4));
    for (int sh = 3; sh <= 12; ++sh) {
        auto j = depth_for_epsilon(2, Rational(1, BigInt(1) << sh));
        REQUIRE(j >= prev);
        prev = j;
    }

    // The big-depth float path agrees with the exact path near its cutoff.
    for (unsigned m : {1u, 2u}) {
        Rational eps(1, 1000);
        auto j = depth_for_epsilon(m, eps);
        CHECK(truncated_tail_below(m, m + 2 * j, eps));
        CHECK_FALSE(truncated_tail_below(m, m + 2 * (j - 1), eps));
    }
}

TEST_CASE("per-pin hit probabilities from the DP") {
    GridSimResult sim = simulate_grid_full(full_pachinko(3));
    CHECK(sim.hit.at(GridCell{1, 0}).is_one());
    CHECK(sim.hit.at(GridCell{2, -1}) == dy(1, 1));
    CHECK(sim.hit.at(GridCell{3, 0}) == dy(1, 1));
    CHECK(sim.hit.at(GridCell{3, 2}) == dy(1, 2));
}
