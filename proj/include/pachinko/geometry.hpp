#pragma once

// The general model: point pins in the vertical plane, a unit-diameter ball
// entering at abscissa 0 from above.  Geometry runs in doubles with a single
// tolerance for equality predicates; exact symmetric cases (dead-center
// hits, half-unit offsets) are snapped so grid-derived instances split
// exactly.

#include "pachinko/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pachinko {

// Equality tolerance for contact, dead-center and tie predicates.  Arc
// endpoints are circle-line intersections, irrational even for rational
// pins, so exact predicates are not an option here.
constexpr double kTol = 1e-9;
constexpr double kBallRadius = 0.5;

struct Vec2 {
    double x = 0;
    double y = 0;
    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
    Vec2 perp() const { return {-y, x}; }
};

inline double dist(Vec2 a, Vec2 b) { return (a - b).norm(); }

struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Normalized Pachinko: the input falls at x = 0 with a unit-diameter ball.
class Pachinko {
  public:
    Pachinko() = default;
    explicit Pachinko(std::vector<Vec2> pins) : pins_(std::move(pins)) {
        for (std::size_t i = 0; i < pins_.size(); ++i)
            for (std::size_t j = i + 1; j < pins_.size(); ++j)
                if (dist(pins_[i], pins_[j]) <= kTol)
                    throw GeometryError("coincident pins at (" + std::to_string(pins_[i].x) + ", " +
                                        std::to_string(pins_[i].y) + ")");
    }

    const std::vector<Vec2>& pins() const { return pins_; }
    std::size_t size() const { return pins_.size(); }
    const Vec2& pin(std::size_t i) const { return pins_[i]; }

    std::string to_text() const {
        std::ostringstream os;
        os << "pachinko v1\n";
        os.precision(17);
        for (const Vec2& p : pins_) os << "pin " << p.x << " " << p.y << "\n";
        return os.str();
    }

    // Accepts `pin <x> <y>` lines and an optional `input <x>`; the loader
    // normalizes by translating so the input abscissa becomes 0.
    static Pachinko from_text(std::istream& in) {
        std::string line;
        if (!std::getline(in, line) || line != "pachinko v1") throw ParseError("expected 'pachinko v1' header");
        std::vector<Vec2> pins;
        double input_x = 0;
        int lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            std::istringstream ls(line);
            std::string word;
            ls >> word;
            if (word == "pin") {
                Vec2 p;
                if (!(ls >> p.x >> p.y))
                    throw ParseError("pachinko line " + std::to_string(lineno) + ": expected 'pin <x> <y>'");
                pins.push_back(p);
            } else if (word == "input") {
                if (!(ls >> input_x))
                    throw ParseError("pachinko line " + std::to_string(lineno) + ": expected 'input <x>'");
            } else {
                throw ParseError("pachinko line " + std::to_string(lineno) + ": unknown keyword '" + word + "'");
            }
        }
        for (Vec2& p : pins) p.x -= input_x;
        return Pachinko(std::move(pins));
    }

  private:
    std::vector<Vec2> pins_;
};

// Height of the ball center when a vertical fall at abscissa fx first
// touches pin p, assuming |fx - p.x| < 1/2.
inline double contact_height(Vec2 p, double fx) {
    double dx = fx - p.x;
    return p.y + std::sqrt(kBallRadius * kBallRadius - dx * dx);
}

// A fall at fx is obstructed by p only strictly inside the half-unit band;
// an offset within tolerance of 1/2 is a tangent graze and never obstructs.
inline bool fall_touches(Vec2 p, double fx) { return std::abs(fx - p.x) < kBallRadius - kTol; }

// Intersections of the two radius-1/2 circles around a and b, or nothing if
// they are disjoint, tangent (within tolerance) or coincident.
inline std::optional<std::pair<Vec2, Vec2>> circle_intersections(Vec2 a, Vec2 b) {
    double d = dist(a, b);
    if (d <= kTol || d >= 2 * kBallRadius - kTol) return std::nullopt;
    Vec2 u = (1.0 / d) * (b - a);
    double half = d / 2;
    double h = std::sqrt(kBallRadius * kBallRadius - half * half);
    Vec2 mid = a + half * u;
    return std::make_pair(mid + h * u.perp(), mid - h * u.perp());
}

// Pins sorted by abscissa for half-unit band queries.
class PinIndex {
  public:
    explicit PinIndex(const Pachinko& p) : pins_(&p.pins()) {
        order_.resize(pins_->size());
        for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
        std::sort(order_.begin(), order_.end(), [&](int a, int b) { return (*pins_)[a].x < (*pins_)[b].x; });
        xs_.reserve(order_.size());
        for (int i : order_) xs_.push_back((*pins_)[i].x);
    }

    // Visit pins with |pin.x - x| <= radius.
    template <typename F>
    void for_near(double x, double radius, F&& f) const {
        auto lo = std::lower_bound(xs_.begin(), xs_.end(), x - radius);
        auto hi = std::upper_bound(xs_.begin(), xs_.end(), x + radius);
        for (auto it = lo; it != hi; ++it) f(order_[static_cast<std::size_t>(it - xs_.begin())]);
    }

  private:
    const std::vector<Vec2>* pins_;
    std::vector<int> order_;
    std::vector<double> xs_;
};

}  // namespace pachinko
