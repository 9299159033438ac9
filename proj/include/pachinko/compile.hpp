#pragma once

// Compile a Grid Pachinko to the general model.  Every gadget receives its
// ball exactly on the cell's lattice line and re-emits on the neighbor
// lattice lines, so dead-center splits stay exact all the way down:
//
//   N: split pin on the line, then one steer pin per side moving the
//      half-unit exit outward onto the neighbor line (3 pins),
//   L/R: one deflecting pin just off the line plus one steer (2 pins),
//   S: two pins straddling the line at equal height (2 pins).
//
// Steers sit 0.5 - delta away from their incoming stream, so delta must
// stay clearly below 1/2; rows are spaced 1.8 + delta apart to keep each
// steer a full ball width away from the next row's split pin.  Bottom-row
// cells skip their steers when delta is small enough that the nearest
// lattice line is unambiguous.

#include "pachinko/geometry.hpp"
#include "pachinko/grid.hpp"
#include "pachinko/pgraph.hpp"

#include <vector>

namespace pachinko {

struct CompiledGrid {
    Pachinko pachinko;
    double column_pitch = 0;  // lattice line spacing per half-unit column
    std::size_t source_pins = 0;

    Distribution propagate_columns() const {
        return to_distribution(propagate(build_graph_fast(pachinko)), column_pitch);
    }
};

inline CompiledGrid compile_to_general(const GridPachinko& g, double delta = 0.25) {
    if (!(delta > 0 && delta <= 0.45))
        throw ValidationError("compile_to_general needs 0 < delta <= 0.45; at 1/2 a steer pin would sit "
                              "dead-center under its stream");
    const double W = 0.5 + delta;   // column pitch
    const double H = 1.8 + delta;   // row pitch
    const double D = 0.9;           // steer depth below the cell pin
    const int bottom = g.max_row();
    const bool lean_bottom = delta <= 0.25;  // single-pin gadgets on the last row

    std::vector<Vec2> pins;
    for (const auto& [cell, type] : g.cells()) {
        const double A = static_cast<double>(cell.col) * W;
        const double y = -static_cast<double>(cell.row) * H;
        const bool last = cell.row == bottom && lean_bottom;
        switch (type) {
            case PinType::N:
                pins.push_back({A, y});
                if (!last) {
                    pins.push_back({A - delta, y - D});
                    pins.push_back({A + delta, y - D});
                }
                break;
            case PinType::L:
                pins.push_back({A + delta / 4, y});
                if (!last) pins.push_back({A - delta, y - D});
                break;
            case PinType::R:
                pins.push_back({A - delta / 4, y});
                if (!last) pins.push_back({A + delta, y - D});
                break;
            case PinType::S:
                pins.push_back({A - delta / 4, y});
                pins.push_back({A + delta / 4, y});
                break;
        }
    }
    CompiledGrid out{Pachinko(std::move(pins)), W, g.cells().size()};
    return out;
}

}  // namespace pachinko
