#pragma once

// Exhaustive 50-50 searches.  Both walk the grid row by row over frontier
// flow states; only cells that actually carry mass get a pin/no-pin choice,
// which collapses layouts differing in unreachable pins (the naive
// 2^(n(n+1)/2) space) to the states that matter.  Frontiers are memoized:
// flow independence makes the frontier a sufficient statistic.

#include "pachinko/distribution.hpp"
#include "pachinko/dyadic.hpp"
#include "pachinko/grid.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

namespace pachinko {

struct SearchBudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// Compact frontier for search: masses here have numerator < 2^32 and
// exponent <= 60 as long as rows stay at desk scale.
struct SearchFrontier {
    // packed entries: (col + 512) << 40 | exp << 32 | num, ascending by col
    std::vector<std::uint64_t> packed;

    static std::uint64_t pack(long long col, unsigned exp, std::uint64_t num) {
        return (static_cast<std::uint64_t>(col + 512) << 40) | (static_cast<std::uint64_t>(exp) << 32) | num;
    }
    static long long col_of(std::uint64_t e) { return static_cast<long long>(e >> 40) - 512; }
    static unsigned exp_of(std::uint64_t e) { return static_cast<unsigned>((e >> 32) & 0xFF); }
    static std::uint64_t num_of(std::uint64_t e) { return e & 0xFFFFFFFFULL; }

    std::string key() const {
        return std::string(reinterpret_cast<const char*>(packed.data()), packed.size() * sizeof(std::uint64_t));
    }
    SearchFrontier mirrored() const {
        SearchFrontier m;
        m.packed.reserve(packed.size());
        for (auto it = packed.rbegin(); it != packed.rend(); ++it)
            m.packed.push_back(pack(-col_of(*it), exp_of(*it), num_of(*it)));
        return m;
    }
};

// Advance one row: `mask` selects which choice cells get an N-pin.
inline SearchFrontier advance(const SearchFrontier& f, const std::vector<std::size_t>& choice_cells,
                              unsigned mask) {
    std::map<long long, std::pair<std::uint64_t, unsigned>> acc;  // col -> (num, exp)
    auto add = [&](long long col, std::uint64_t num, unsigned exp) {
        auto [it, fresh] = acc.try_emplace(col, num, exp);
        if (fresh) return;
        auto& [n0, e0] = it->second;
        unsigned e = std::max(e0, exp);
        n0 = (n0 << (e - e0)) + (num << (e - exp));
        while (n0 % 2 == 0 && e > 0) {
            n0 >>= 1;
            --e;
        }
        e0 = e;
    };
    std::size_t pick = 0;
    for (std::size_t i = 0; i < f.packed.size(); ++i) {
        std::uint64_t e = f.packed[i];
        long long col = SearchFrontier::col_of(e);
        std::uint64_t num = SearchFrontier::num_of(e);
        unsigned exp = SearchFrontier::exp_of(e);
        bool pinned = pick < choice_cells.size() && choice_cells[pick] == i && ((mask >> pick) & 1);
        if (pick < choice_cells.size() && choice_cells[pick] == i) ++pick;
        if (pinned) {
            add(col - 1, num, exp + 1);
            add(col + 1, num, exp + 1);
        } else {
            add(col, num, exp);
        }
    }
    SearchFrontier out;
    out.packed.reserve(acc.size());
    for (auto& [col, ne] : acc) out.packed.push_back(SearchFrontier::pack(col, ne.second, ne.first));
    return out;
}

inline std::vector<std::size_t> choice_cells_for_row(const SearchFrontier& f, int row) {
    std::vector<std::size_t> cells;
    for (std::size_t i = 0; i < f.packed.size(); ++i)
        if (cell_on_lattice(row, SearchFrontier::col_of(f.packed[i]))) cells.push_back(i);
    return cells;
}

}  // namespace detail

struct SearchResult {
    unsigned rows = 0;
    std::set<Dyadic> computable;
    std::set<Dyadic> uncomputable;                 // restricted to <= rows bits of precision
    std::map<Dyadic, GridPachinko> witnesses;      // one layout per computable value
};

// Exhaust every N-pin placement on the reachable cells of rows 1..max_rows
// and collect all attainable output-column probabilities.
inline SearchResult enumerate_probabilities(unsigned max_rows, unsigned budget = 6, int jobs = 1) {
    if (max_rows == 0) throw ValidationError("enumerate_probabilities needs at least one row");
    if (max_rows > budget)
        throw SearchBudgetError("enumerate over " + std::to_string(max_rows) + " rows needs roughly 2^" +
                                std::to_string(max_rows * (max_rows + 1) / 2) +
                                " layouts before deduplication; raise the budget to allow it");

    struct Shard {
        std::set<Dyadic> computable;
        std::map<Dyadic, GridPachinko> witnesses;
        std::unordered_set<std::string> visited;
    };

    // Choices for the first row (a single massy cell) are enumerated here
    // and distributed across workers; each worker runs a full DFS below its
    // roots with its own memo table.
    detail::SearchFrontier start;
    start.packed.push_back(detail::SearchFrontier::pack(0, 0, 1));

    struct Root {
        detail::SearchFrontier frontier;
        int row;
        GridPachinko partial;
    };
    std::vector<Root> roots;
    {
        auto cells = detail::choice_cells_for_row(start, 1);
        for (unsigned mask = 0; mask < (1u << cells.size()); ++mask) {
            Root r{detail::advance(start, cells, mask), 2, GridPachinko{}};
            if (mask & 1) r.partial.place(1, 0, PinType::N);
            roots.push_back(std::move(r));
        }
    }

    jobs = std::max(1, jobs);
    std::vector<Shard> shards(static_cast<std::size_t>(jobs));

    auto run_root = [&](Shard& shard, const Root& root) {
        // Depth-first over rows; explicit stack carries the partial layout.
        struct Node {
            detail::SearchFrontier frontier;
            int row;
            std::vector<std::size_t> cells;
            unsigned next_mask;
        };
        std::vector<Node> stack;
        std::vector<std::pair<int, std::vector<long long>>> chosen;  // per depth: pinned columns
        auto record = [&](const detail::SearchFrontier& f, const GridPachinko& base) {
            for (std::uint64_t e : f.packed) {
                Dyadic v{BigInt(detail::SearchFrontier::num_of(e)), detail::SearchFrontier::exp_of(e)};
                if (shard.computable.insert(v).second) {
                    GridPachinko w = base;
                    for (const auto& [row, cols] : chosen)
                        for (long long c : cols) w.place(row, c, PinType::N);
                    shard.witnesses.emplace(v, std::move(w));
                }
            }
        };

        auto open = [&](detail::SearchFrontier f, int row) -> bool {
            if (!shard.visited.insert(std::to_string(row) + "|" + f.key()).second) return false;
            if (row > static_cast<int>(max_rows)) {
                record(f, root.partial);
                return false;
            }
            Node n{std::move(f), row, {}, 0};
            n.cells = detail::choice_cells_for_row(n.frontier, row);
            stack.push_back(std::move(n));
            chosen.emplace_back(row, std::vector<long long>{});
            return true;
        };

        // Stopping with fewer rows equals choosing no pins in the remaining
        // rows, which the mask-0 branches cover; values are recorded at the
        // max_rows horizon only.
        open(root.frontier, root.row);
        while (!stack.empty()) {
            Node& top = stack.back();
            if (top.next_mask >= (1u << top.cells.size())) {
                stack.pop_back();
                chosen.pop_back();
                continue;
            }
            unsigned mask = top.next_mask++;
            chosen.back().second.clear();
            for (std::size_t b = 0; b < top.cells.size(); ++b)
                if ((mask >> b) & 1)
                    chosen.back().second.push_back(
                        detail::SearchFrontier::col_of(top.frontier.packed[top.cells[b]]));
            open(detail::advance(top.frontier, top.cells, mask), top.row + 1);
        }
    };

    auto worker = [&](int w) {
        for (std::size_t r = static_cast<std::size_t>(w); r < roots.size(); r += static_cast<std::size_t>(jobs))
            run_root(shards[static_cast<std::size_t>(w)], roots[r]);
    };
    if (jobs == 1) {
        worker(0);
    } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < jobs; ++w) threads.emplace_back(worker, w);
        for (auto& t : threads) t.join();
    }

    SearchResult res;
    res.rows = max_rows;
    res.computable.insert(Dyadic::zero());  // a column with no output
    for (auto& shard : shards) {
        res.computable.insert(shard.computable.begin(), shard.computable.end());
        for (auto& [v, w] : shard.witnesses) res.witnesses.emplace(v, w);
    }
    // Candidates: all dyadics of at most max_rows fractional bits in [0, 1].
    for (unsigned b = 0; b <= max_rows; ++b)
        for (std::uint64_t num = 1; num >> b == 0; num += 2) {
            Dyadic v{BigInt(num), b};
            if (v > Dyadic::one()) continue;
            if (!res.computable.count(v)) res.uncomputable.insert(v);
        }
    return res;
}

struct UniformSearchStats {
    unsigned long long states = 0;
    bool budget_hit = false;
    bool symmetric_witness = false;
};

// Search for an all-N grid whose output is exactly 2^k entries of 1/2^k.
// Layered breadth-first search over deduplicated frontiers: a fast pass
// restricted to mirror-symmetric layouts (uniform targets are symmetric,
// and symmetric witnesses exist at small depths), then an unrestricted pass
// under the same state budget.  Absent means not found within the budget.
inline std::optional<GridPachinko> find_uniform(unsigned k, unsigned max_rows = 12,
                                                std::size_t state_budget = 4000000,
                                                UniformSearchStats* stats = nullptr) {
    if (k == 0) return GridPachinko{};  // one output of mass 1
    const std::uint64_t want_count = 1ull << k;
    const long long span_cap = (1ll << (k + 1)) - 1;

    auto is_target = [&](const detail::SearchFrontier& f) {
        if (f.packed.size() != want_count) return false;
        for (std::uint64_t e : f.packed)
            if (detail::SearchFrontier::num_of(e) != 1 || detail::SearchFrontier::exp_of(e) != k) return false;
        return true;
    };

    struct Entry {
        detail::SearchFrontier frontier;
        int parent = -1;                 // index into the previous layer
        std::vector<long long> pinned;   // pinned columns of the row leading here
    };

    UniformSearchStats local_stats;
    UniformSearchStats& st = stats ? *stats : local_stats;

    auto run_pass = [&](bool symmetric_only) -> std::optional<GridPachinko> {
        detail::SearchFrontier start;
        start.packed.push_back(detail::SearchFrontier::pack(0, 0, 1));
        std::vector<std::vector<Entry>> layers;
        layers.push_back({Entry{start, -1, {}}});

        for (int row = 1; row <= static_cast<int>(max_rows); ++row) {
            std::vector<Entry> next;
            std::unordered_set<std::string> seen;
            int rows_left = static_cast<int>(max_rows) - row;
            const std::vector<Entry>& cur = layers.back();
            for (std::size_t pi = 0; pi < cur.size(); ++pi) {
                const detail::SearchFrontier& f = cur[pi].frontier;
                auto cells = detail::choice_cells_for_row(f, row);
                std::vector<std::size_t> mask_cells;  // independent choice bits
                if (symmetric_only) {
                    for (std::size_t ci : cells)
                        if (detail::SearchFrontier::col_of(f.packed[ci]) >= 0) mask_cells.push_back(ci);
                } else {
                    mask_cells = cells;
                }
                for (unsigned m = 0; m < (1u << mask_cells.size()); ++m) {
                    unsigned mask = 0;
                    std::vector<long long> pinned;
                    if (symmetric_only) {
                        for (std::size_t b = 0; b < mask_cells.size(); ++b) {
                            if (!((m >> b) & 1)) continue;
                            long long col = detail::SearchFrontier::col_of(f.packed[mask_cells[b]]);
                            for (std::size_t ci = 0; ci < cells.size(); ++ci) {
                                long long c2 = detail::SearchFrontier::col_of(f.packed[cells[ci]]);
                                if (c2 == col || c2 == -col) {
                                    if (!(mask & (1u << ci))) pinned.push_back(c2);
                                    mask |= 1u << ci;
                                }
                            }
                        }
                    } else {
                        mask = m;
                        for (std::size_t b = 0; b < cells.size(); ++b)
                            if ((m >> b) & 1) pinned.push_back(detail::SearchFrontier::col_of(f.packed[cells[b]]));
                    }
                    detail::SearchFrontier g = detail::advance(f, cells, mask);
                    long long span = detail::SearchFrontier::col_of(g.packed.back()) -
                                     detail::SearchFrontier::col_of(g.packed.front()) + 1;
                    if (span > span_cap) continue;
                    if (span + 2 * rows_left < static_cast<long long>(want_count)) continue;
                    unsigned max_exp = 0;
                    for (auto e : g.packed) max_exp = std::max(max_exp, detail::SearchFrontier::exp_of(e));
                    // Each merge shaves one exponent level per row at best.
                    if (max_exp > k && max_exp - k > static_cast<unsigned>(rows_left) && !is_target(g)) continue;

                    if (is_target(g)) {
                        GridPachinko out;
                        for (long long c : pinned) out.place(row, c, PinType::N);
                        int p = static_cast<int>(pi);
                        for (int r = row - 1; r >= 1; --r) {
                            const Entry& e = layers[static_cast<std::size_t>(r)][static_cast<std::size_t>(p)];
                            for (long long c : e.pinned) out.place(r, c, PinType::N);
                            p = e.parent;
                        }
                        st.symmetric_witness = symmetric_only;
                        return out;
                    }
                    std::string key = symmetric_only ? g.key() : std::min(g.key(), g.mirrored().key());
                    if (!seen.insert(std::move(key)).second) continue;
                    ++st.states;
                    if (st.states > state_budget) {
                        st.budget_hit = true;
                        return std::nullopt;
                    }
                    next.push_back(Entry{std::move(g), static_cast<int>(pi), std::move(pinned)});
                }
            }
            if (next.empty()) break;
            layers.push_back(std::move(next));
        }
        return std::nullopt;
    };

    if (auto found = run_pass(true)) return found;
    if (st.budget_hit) return std::nullopt;
    return run_pass(false);
}

}  // namespace pachinko
