#pragma once

// Triangular-lattice Pachinkos with N/L/R/S pins.  Probability flow is
// independent of geometry here, so simulation is a top-down exact DP over
// half-unit columns.  The ball enters in column 0 above row 1; a cell
// (row, col) is on the lattice exactly when row + col is odd.

#include "pachinko/distribution.hpp"
#include "pachinko/dyadic.hpp"

#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace pachinko {

enum class PinType : char { N = 'N', L = 'L', R = 'R', S = 'S' };

struct GridCell {
    int row;       // >= 1, increasing downward
    long long col; // half-unit columns, input at 0
    friend auto operator<=>(const GridCell&, const GridCell&) = default;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline bool cell_on_lattice(int row, long long col) {
    return row >= 1 && ((static_cast<long long>(row) + col) % 2 != 0);
}

class GridPachinko {
  public:
    using Cells = std::map<GridCell, PinType>;

    GridPachinko() = default;

    void place(int row, long long col, PinType t) {
        if (!cell_on_lattice(row, col))
            throw ValidationError("cell (" + std::to_string(row) + ", " + std::to_string(col) +
                                  ") is off the lattice: row + col must be odd and row >= 1");
        cells_[GridCell{row, col}] = t;
    }

    std::optional<PinType> at(int row, long long col) const {
        auto it = cells_.find(GridCell{row, col});
        if (it == cells_.end()) return std::nullopt;
        return it->second;
    }

    const Cells& cells() const { return cells_; }
    bool empty() const { return cells_.empty(); }

    int max_row() const {
        int r = 0;
        for (const auto& [c, t] : cells_) r = std::max(r, c.row);
        return r;
    }

    std::pair<long long, long long> col_range() const {
        long long lo = 0, hi = 0;
        for (const auto& [c, t] : cells_) {
            lo = std::min(lo, c.col);
            hi = std::max(hi, c.col);
        }
        return {lo, hi};
    }

    // Translate all pins horizontally; parity forces even shifts.
    GridPachinko shifted(long long delta_col, int delta_row = 0) const {
        GridPachinko g;
        for (const auto& [c, t] : cells_) g.place(c.row + delta_row, c.col + delta_col, t);
        return g;
    }

    GridPachinko mirrored() const {
        GridPachinko g;
        for (const auto& [c, t] : cells_) {
            PinType t2 = t;
            if (t == PinType::L) t2 = PinType::R;
            else if (t == PinType::R) t2 = PinType::L;
            g.place(c.row, -c.col, t2);
        }
        return g;
    }

    friend bool operator==(const GridPachinko&, const GridPachinko&) = default;

    std::string to_text() const {
        std::ostringstream os;
        auto [lo, hi] = col_range();
        os << "grid v1\n";
        os << "rows " << max_row() << " cols " << lo << ".." << hi << "\n";
        for (const auto& [c, t] : cells_) os << c.row << " " << c.col << " " << static_cast<char>(t) << "\n";
        return os.str();
    }

    static GridPachinko from_text(std::istream& in) {
        std::string line;
        if (!std::getline(in, line) || line != "grid v1") throw ParseError("expected 'grid v1' header");
        GridPachinko g;
        int lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            std::istringstream ls(line);
            std::string first;
            ls >> first;
            if (first == "rows") continue;  // advisory size line
            int row;
            long long col;
            char type;
            std::istringstream ls2(line);
            if (!(ls2 >> row >> col >> type))
                throw ParseError("grid line " + std::to_string(lineno) + ": expected '<row> <col> <type>'");
            switch (type) {
                case 'N': g.place(row, col, PinType::N); break;
                case 'L': g.place(row, col, PinType::L); break;
                case 'R': g.place(row, col, PinType::R); break;
                case 'S': g.place(row, col, PinType::S); break;
                default:
                    throw ParseError("grid line " + std::to_string(lineno) + ": unknown pin type '" +
                                     std::string(1, type) + "'");
            }
        }
        return g;
    }

  private:
    Cells cells_;
};

// Per-column mass at one row frontier.
using FlowState = std::map<long long, Dyadic>;

struct GridSimResult {
    Distribution output;
    // Incoming mass per pin cell, i.e. the probability the ball hits it.
    std::map<GridCell, Dyadic> hit;
};

inline GridSimResult simulate_grid_full(const GridPachinko& g) {
    GridSimResult res;
    FlowState flow;
    flow[0] = Dyadic::one();
    int last = g.max_row();
    for (int row = 1; row <= last; ++row) {
        FlowState next;
        for (auto& [col, mass] : flow) {
            auto pin = g.at(row, col);
            if (!pin) {
                next[col] += mass;
                continue;
            }
            res.hit[GridCell{row, col}] += mass;
            switch (*pin) {
                case PinType::N: {
                    Dyadic h = mass.half();
                    next[col - 1] += h;
                    next[col + 1] += h;
                    break;
                }
                case PinType::L: next[col - 1] += mass; break;
                case PinType::R: next[col + 1] += mass; break;
                case PinType::S: res.output.add_rest(mass); break;
            }
        }
        flow = std::move(next);
    }
    for (auto& [col, mass] : flow) res.output.add(col, mass);
    return res;
}

inline Distribution simulate_grid(const GridPachinko& g) { return simulate_grid_full(g).output; }

struct GridReport {
    bool ok = true;
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
};

// Structural validation plus a DP reachability scan for pins no mass can hit.
inline GridReport validate(const GridPachinko& g) {
    GridReport rep;
    GridSimResult sim = simulate_grid_full(g);
    for (const auto& [cell, t] : g.cells()) {
        if (!sim.hit.count(cell))
            rep.warnings.push_back("pin at (" + std::to_string(cell.row) + ", " + std::to_string(cell.col) +
                                   ") is unreachable: no mass arrives there");
    }
    return rep;
}

}  // namespace pachinko
