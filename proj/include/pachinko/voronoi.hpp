#pragma once

// Voronoi cells (half-plane clipping against a big bounding box) and the
// hittable arc of each pin: the largest piece of its upper unit-diameter
// semicircle lying inside its cell, with endpoints labeled DROP or REST by
// the stuck rule.  Cells only decide reachability; the arc itself is cut
// directly with circle-circle intersections so the graph builders and the
// trajectory simulator land on bit-identical endpoint coordinates.

#include "pachinko/geometry.hpp"
#include "pachinko/trajectory.hpp"

#include <array>
#include <optional>
#include <vector>

namespace pachinko {

struct VoronoiCell {
    int pin = -1;
    std::vector<Vec2> polygon;  // convex, counterclockwise, clipped to a large box
};

namespace detail {

// Keep the half-plane {z : (z - mid) . n <= 0}.
inline std::vector<Vec2> clip_half_plane(const std::vector<Vec2>& poly, Vec2 mid, Vec2 n) {
    std::vector<Vec2> out;
    std::size_t sz = poly.size();
    for (std::size_t i = 0; i < sz; ++i) {
        Vec2 a = poly[i];
        Vec2 b = poly[(i + 1) % sz];
        double da = (a - mid).dot(n);
        double db = (b - mid).dot(n);
        if (da <= 0) out.push_back(a);
        if ((da < 0 && db > 0) || (da > 0 && db < 0)) {
            double t = da / (da - db);
            out.push_back(a + t * (b - a));
        }
    }
    return out;
}

}  // namespace detail

// Cells as intersections of pairwise bisector half-planes; quadratic, which
// is fine at the instance sizes the acceptance suite uses (<= 50 pins).
inline std::vector<VoronoiCell> build_voronoi(const Pachinko& pa) {
    if (pa.size() == 0) throw GeometryError("build_voronoi needs at least one pin");
    double extent = 10;
    for (const Vec2& p : pa.pins()) extent = std::max({extent, std::abs(p.x), std::abs(p.y)});
    double b = 4 * extent;
    std::vector<VoronoiCell> cells;
    cells.reserve(pa.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
        std::vector<Vec2> poly{{-b, -b}, {b, -b}, {b, b}, {-b, b}};
        const Vec2 p = pa.pin(i);
        for (std::size_t j = 0; j < pa.size() && !poly.empty(); ++j) {
            if (j == i) continue;
            const Vec2 q = pa.pin(j);
            poly = detail::clip_half_plane(poly, 0.5 * (p + q), q - p);
        }
        cells.push_back({static_cast<int>(i), std::move(poly)});
    }
    return cells;
}

enum class SiteLabel { Drop, Rest };

struct ArcEndpoint {
    Vec2 pos;
    SiteLabel label = SiteLabel::Drop;
    bool at_semicircle_end = false;
};

struct HittableArc {
    int pin = -1;
    ArcEndpoint left;   // larger angle (toward the -x side of the pin)
    ArcEndpoint right;  // smaller angle
    Vec2 highest;       // the arc point of maximum height
    double angle_lo = 0;
    double angle_hi = 0;
};

namespace detail {

struct KeptInterval {
    double lo, hi;
    Vec2 lo_pos, hi_pos;
    bool lo_is_end, hi_is_end;  // true when the bound is the semicircle end
};

// Remove the open angular range (a, b) from every kept interval.
inline void subtract_interval(std::vector<KeptInterval>& kept, double a, double b, Vec2 a_pos, Vec2 b_pos) {
    std::vector<KeptInterval> out;
    for (const KeptInterval& k : kept) {
        if (b <= k.lo + 1e-15 || a >= k.hi - 1e-15) {
            out.push_back(k);
            continue;
        }
        if (a > k.lo) out.push_back({k.lo, a, k.lo_pos, a_pos, k.lo_is_end, false});
        if (b < k.hi) out.push_back({b, k.hi, b_pos, k.hi_pos, false, k.hi_is_end});
    }
    kept = std::move(out);
}

// Maximum-height point of cell /\ disk, preferring strictly-interior points
// on ties: when that winner is off the circle the pin cannot be reached
// from above.
struct CellTop {
    double y = -std::numeric_limits<double>::infinity();
    bool on_circle = false;
    bool valid = false;
};

inline CellTop cell_top_in_disk(const VoronoiCell& cell, Vec2 p) {
    CellTop best;
    auto offer = [&](Vec2 z, bool on_circle) {
        if (!best.valid || z.y > best.y + kTol) {
            best = {z.y, on_circle, true};
        } else if (z.y > best.y - kTol && !on_circle) {
            best.on_circle = false;
        }
    };
    const auto& poly = cell.polygon;
    std::size_t sz = poly.size();
    Vec2 top{p.x, p.y + kBallRadius};
    bool top_inside = sz > 0;
    for (std::size_t i = 0; i < sz; ++i) {
        Vec2 a = poly[i];
        Vec2 b = poly[(i + 1) % sz];
        double da = dist(a, p);
        if (da < kBallRadius - kTol)
            offer(a, false);
        else if (da <= kBallRadius + kTol)
            offer(a, true);
        // segment /\ circle
        Vec2 d = b - a;
        double A = d.dot(d);
        double B = 2 * d.dot(a - p);
        double C = (a - p).dot(a - p) - kBallRadius * kBallRadius;
        double disc = B * B - 4 * A * C;
        if (disc >= 0 && A > 0) {
            double sq = std::sqrt(disc);
            std::array<double, 2> cuts{(-B - sq) / (2 * A), (-B + sq) / (2 * A)};
            std::optional<Vec2> first;
            for (double t : cuts) {
                if (t < -kTol || t > 1 + kTol) continue;
                Vec2 z = a + t * d;
                offer(z, true);
                if (first && std::abs(first->y - z.y) <= kTol)
                    offer(0.5 * (*first + z), false);  // horizontal chord: interior tie
                first = z;
            }
        }
        // is the semicircle top inside this cell?
        Vec2 edge_n = (b - a).perp();
        if ((top - a).dot(edge_n) < -kTol) top_inside = false;
    }
    if (top_inside) offer(top, true);
    return best;
}

}  // namespace detail

// The largest upper-semicircle arc of `pin` inside its Voronoi cell, absent
// when the cell's highest in-disk point leaves the semicircle (the pin can
// never be reached from above).
inline std::optional<HittableArc> hittable_arc(const Pachinko& pa, int pin, const std::vector<VoronoiCell>& cells) {
    constexpr double kPi = 3.14159265358979323846;
    const Vec2 p = pa.pin(static_cast<std::size_t>(pin));
    Vec2 right_end{p.x + kBallRadius, p.y};
    Vec2 left_end{p.x - kBallRadius, p.y};
    std::vector<detail::KeptInterval> kept{{0.0, kPi, right_end, left_end, true, true}};

    for (std::size_t j = 0; j < pa.size(); ++j) {
        if (static_cast<int>(j) == pin) continue;
        const Vec2 q = pa.pin(j);
        auto inter = circle_intersections(p, q);
        if (!inter) continue;
        auto [z1, z2] = *inter;
        double a1 = std::atan2(z1.y - p.y, z1.x - p.x);
        double a2 = std::atan2(z2.y - p.y, z2.x - p.x);
        double phi_q = std::atan2(q.y - p.y, q.x - p.x);
        // Blocked arc is the one between a1 and a2 containing the direction
        // toward q.  Work in unnormalized angles around phi_q.
        auto near_phi = [&](double a) {
            while (a < phi_q - kPi) a += 2 * kPi;
            while (a > phi_q + kPi) a -= 2 * kPi;
            return a;
        };
        double lo = near_phi(a1), hi = near_phi(a2);
        Vec2 lo_pos = z1, hi_pos = z2;
        if (lo > hi) {
            std::swap(lo, hi);
            std::swap(lo_pos, hi_pos);
        }
        // The blocked range may cross 0 or 2pi; subtract both unwrapped copies.
        for (double shift : {-2 * kPi, 0.0, 2 * kPi})
            detail::subtract_interval(kept, lo + shift, hi + shift, lo_pos, hi_pos);
    }

    if (kept.empty()) return std::nullopt;

    // Highest kept point.
    auto interval_top = [&](const detail::KeptInterval& k) {
        if (k.lo <= kPi / 2 && kPi / 2 <= k.hi) return p.y + kBallRadius;
        return std::max(k.lo_pos.y, k.hi_pos.y);
    };
    const detail::KeptInterval* best = &kept.front();
    for (const auto& k : kept)
        if (interval_top(k) > interval_top(*best) + 1e-15) best = &k;

    double top_y = interval_top(*best);
    if (top_y < p.y + kTol) return std::nullopt;  // arc never rises above the equator

    detail::CellTop cell_top = detail::cell_top_in_disk(cells[static_cast<std::size_t>(pin)], p);
    if (!cell_top.valid) return std::nullopt;
    if (cell_top.y > top_y + kTol || (cell_top.y > top_y - kTol && !cell_top.on_circle))
        return std::nullopt;  // cell rises above the semicircle: blocked from above

    HittableArc arc;
    arc.pin = pin;
    arc.angle_lo = best->lo;
    arc.angle_hi = best->hi;
    if (best->lo <= kPi / 2 && kPi / 2 <= best->hi)
        arc.highest = {p.x, p.y + kBallRadius};
    else
        arc.highest = best->lo_pos.y >= best->hi_pos.y ? best->lo_pos : best->hi_pos;

    auto make_endpoint = [&](Vec2 pos, bool is_end) {
        ArcEndpoint e;
        e.pos = pos;
        e.at_semicircle_end = is_end;
        if (is_end) {
            e.label = SiteLabel::Drop;
            return e;
        }
        std::vector<int> contacts;
        for (std::size_t j = 0; j < pa.size(); ++j)
            if (std::abs(dist(pa.pin(j), pos) - kBallRadius) <= kTol) contacts.push_back(static_cast<int>(j));
        auto r = detail::resolve_contacts(pa, pos, contacts);
        e.label = r.kind == detail::ContactResolution::Kind::Stuck ? SiteLabel::Rest : SiteLabel::Drop;
        return e;
    };
    arc.right = make_endpoint(best->lo_pos, best->lo_is_end);
    arc.left = make_endpoint(best->hi_pos, best->hi_is_end);
    return arc;
}

}  // namespace pachinko
