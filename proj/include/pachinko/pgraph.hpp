#pragma once

// The Pachinko graph: a planar DAG over {input, pins, drop sites, rest
// sites} whose arcs capture every possible ball transition.  Two builders
// produce it: the fast one drives the inductive action-site construction
// with Voronoi-derived hittable arcs, the naive oracle replays the same
// induction with linear scans and direct trajectory queries.  They must
// emit identical graphs.
//
// Each arc remembers the abscissa of the vertical fall that produced it,
// which is all propagation needs: a ball arriving at a pin dead-center
// splits evenly, otherwise it continues on the side of its fall line.
// Simultaneous contacts become chain arcs carrying an explicit
// continuation (next link, forced side, or rest).

#include "pachinko/distribution.hpp"
#include "pachinko/dyadic.hpp"
#include "pachinko/geometry.hpp"
#include "pachinko/trajectory.hpp"
#include "pachinko/voronoi.hpp"

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace pachinko {

struct InternalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class VertexKind { Input, Pin, Drop, Rest };
enum class ArcCase { Direct, Rest, Chain };
enum class ExitSide { None, Left, Right };

struct GraphVertex {
    VertexKind kind;
    Vec2 pos;      // Input (0, +inf); Drop (x, -inf); Rest at the stuck ball's bottom
    int pin = -1;  // original pin index for Pin vertices
};

struct GraphArc {
    int from = -1;
    int to = -1;
    ArcCase kind = ArcCase::Direct;
    ExitSide side = ExitSide::None;  // which exit of `from` this arc leaves through
    double fall_x = 0;               // abscissa of the fall producing the transition
    int chain_id = -1;
    enum class Cont { None, Next, GoLeft, GoRight, Stuck } cont = Cont::None;
};

struct PachinkoGraph {
    std::vector<GraphVertex> vertices;
    std::vector<GraphArc> arcs;
    static constexpr int kInput = 0;

    int vertex_of_pin(int original_pin) const {
        for (std::size_t i = 0; i < vertices.size(); ++i)
            if (vertices[i].kind == VertexKind::Pin && vertices[i].pin == original_pin) return static_cast<int>(i);
        return -1;
    }
};

namespace detail {

struct Site {
    double x;
    double y;
    int owner;          // owning graph vertex
    int owner_pin;      // original pin index, -1 for the input site
    ExitSide side;
    SiteLabel label;
};

// Shared assembly state for both builders; the builders differ only in how
// they pick which sites a pin consumes and where its exits land.
class GraphAssembler {
  public:
    explicit GraphAssembler(const Pachinko& pa) : pa_(pa) {
        order_.resize(pa.size());
        for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
        std::sort(order_.begin(), order_.end(), [&](int a, int b) {
            const Vec2& u = pa.pin(static_cast<std::size_t>(a));
            const Vec2& v = pa.pin(static_cast<std::size_t>(b));
            if (std::abs(u.y - v.y) > kTol) return u.y > v.y;  // top first
            return u.x < v.x;                                  // ties left before right
        });
        g_.vertices.push_back({VertexKind::Input, {0, std::numeric_limits<double>::infinity()}, -1});
        vertex_of_pin_.assign(pa.size(), -1);
        for (int pin : order_) {
            g_.vertices.push_back({VertexKind::Pin, pa.pin(static_cast<std::size_t>(pin)), pin});
            vertex_of_pin_[static_cast<std::size_t>(pin)] = static_cast<int>(g_.vertices.size()) - 1;
        }

        need_left_.assign(pa.size(), false);
        need_right_.assign(pa.size(), false);
        entry_left_.assign(pa.size(), Vec2{});
        entry_right_.assign(pa.size(), Vec2{});

        sites_.emplace(0.0, Site{0.0, std::numeric_limits<double>::infinity(), PachinkoGraph::kInput, -1,
                                 ExitSide::None, SiteLabel::Drop});
    }

    const std::vector<int>& processing_order() const { return order_; }
    const Pachinko& pachinko() const { return pa_; }

    int vertex_id(int original_pin) const { return vertex_of_pin_[static_cast<std::size_t>(original_pin)]; }

    std::multimap<double, Site>& sites() { return sites_; }

    // Record a single-contact consumption: arc from the site owner to the
    // pin, plus exit-side activation per the arrival direction.
    void consume_single(const Site& a, int pin) {
        const Vec2 P = pa_.pin(static_cast<std::size_t>(pin));
        double h = contact_height(P, a.x);
        g_.arcs.push_back({a.owner, vertex_id(pin), ArcCase::Direct, a.side, a.x, -1, GraphArc::Cont::None});
        double dx = a.x - P.x;
        if (dx <= kTol) flag(pin, ExitSide::Left, std::abs(dx) <= kTol ? Vec2{P.x, P.y + kBallRadius} : Vec2{a.x, h});
        if (dx >= -kTol) flag(pin, ExitSide::Right, std::abs(dx) <= kTol ? Vec2{P.x, P.y + kBallRadius} : Vec2{a.x, h});
    }

    // Record a simultaneous-contact event: chain arcs through the contacts
    // ordered by pin height, ending stuck or rolling on around the lowest.
    void consume_chain(const Site& a, const std::vector<int>& contacts) {
        const int id = next_chain_id_++;
        const Vec2 P0 = pa_.pin(static_cast<std::size_t>(contacts.front()));
        Vec2 center{a.x, contact_height(P0, a.x)};
        auto r = resolve_contacts(pa_, center, contacts);
        if (r.kind == ContactResolution::Kind::Coin)
            throw InternalError("coin resolution inside a simultaneous-contact chain");

        GraphArc::Cont final_cont;
        if (r.kind == ContactResolution::Kind::Stuck) {
            final_cont = GraphArc::Cont::Stuck;
        } else {
            if (r.pivot != contacts.back())
                throw InternalError("chain continuation pivot is not the lowest contact");
            final_cont = r.dir > 0 ? GraphArc::Cont::GoLeft : GraphArc::Cont::GoRight;
        }

        int prev = a.owner;
        ExitSide side = a.side;
        for (std::size_t i = 0; i < contacts.size(); ++i) {
            GraphArc::Cont cont = i + 1 < contacts.size() ? GraphArc::Cont::Next : final_cont;
            g_.arcs.push_back({prev, vertex_id(contacts[i]), ArcCase::Chain, side, a.x, id, cont});
            prev = vertex_id(contacts[i]);
            side = ExitSide::None;
        }

        if (r.kind == ContactResolution::Kind::Stuck) {
            int rest = rest_vertex({center.x, center.y - kBallRadius});
            for (int c : contacts)
                g_.arcs.push_back({vertex_id(c), rest, ArcCase::Rest, ExitSide::None, a.x, id, GraphArc::Cont::None});
        } else {
            int pivot = contacts.back();
            const Vec2 Q = pa_.pin(static_cast<std::size_t>(pivot));
            (void)Q;
            flag(pivot, r.dir > 0 ? ExitSide::Left : ExitSide::Right, center);
        }
    }

    // Install the flagged exits of `pin` as new active sites.
    void install_exit(int pin, ExitSide side, ArcEndpoint e) {
        sites_.emplace(e.pos.x, Site{e.pos.x, e.pos.y, vertex_id(pin), pin, side, e.label});
    }

    bool needs(int pin, ExitSide side) const {
        return side == ExitSide::Left ? need_left_[static_cast<std::size_t>(pin)]
                                      : need_right_[static_cast<std::size_t>(pin)];
    }
    Vec2 entry(int pin, ExitSide side) const {
        return side == ExitSide::Left ? entry_left_[static_cast<std::size_t>(pin)]
                                      : entry_right_[static_cast<std::size_t>(pin)];
    }

    // Leftover sites become drop sites (merged per abscissa) and rest sites
    // (merged per position, half a unit below the stopped ball center).
    PachinkoGraph finish() {
        std::vector<Site> rest_sites;
        std::optional<double> drop_x;
        int drop_vertex = -1;
        for (auto& [x, site] : sites_) {
            if (site.label == SiteLabel::Rest) {
                rest_sites.push_back(site);
                continue;
            }
            if (!drop_x || x > *drop_x + kTol) {
                drop_x = x;
                g_.vertices.push_back({VertexKind::Drop, {x, -std::numeric_limits<double>::infinity()}, -1});
                drop_vertex = static_cast<int>(g_.vertices.size()) - 1;
            }
            g_.arcs.push_back({site.owner, drop_vertex, ArcCase::Direct, site.side, site.x, -1, GraphArc::Cont::None});
        }
        for (const Site& s : rest_sites) {
            int rv = rest_vertex({s.x, s.y - kBallRadius});
            g_.arcs.push_back({s.owner, rv, ArcCase::Rest, s.side, s.x, -1, GraphArc::Cont::None});
        }
        return std::move(g_);
    }

  private:
    void flag(int pin, ExitSide side, Vec2 entry) {
        auto& need = side == ExitSide::Left ? need_left_ : need_right_;
        auto& entries = side == ExitSide::Left ? entry_left_ : entry_right_;
        if (!need[static_cast<std::size_t>(pin)]) {
            need[static_cast<std::size_t>(pin)] = true;
            entries[static_cast<std::size_t>(pin)] = entry;
        }
    }

    int rest_vertex(Vec2 pos) {
        for (std::size_t i = 0; i < g_.vertices.size(); ++i)
            if (g_.vertices[i].kind == VertexKind::Rest && dist(g_.vertices[i].pos, pos) <= kTol)
                return static_cast<int>(i);
        g_.vertices.push_back({VertexKind::Rest, pos, -1});
        return static_cast<int>(g_.vertices.size()) - 1;
    }

    const Pachinko& pa_;
    std::vector<int> order_;
    std::vector<int> vertex_of_pin_;
    PachinkoGraph g_;
    std::multimap<double, Site> sites_;
    std::vector<bool> need_left_, need_right_;
    std::vector<Vec2> entry_left_, entry_right_;
    int next_chain_id_ = 0;
};

// Simultaneous-contact set for a fall from (x, y): pins tied for the
// highest contact, ordered top pin first (ties left first).
inline std::vector<int> simultaneous_set(const Pachinko& pa, const PinIndex& index, double x, double y,
                                         int exclude_pin) {
    std::vector<int> out;
    double best = -std::numeric_limits<double>::infinity();
    index.for_near(x, kBallRadius, [&](int i) {
        if (i == exclude_pin) return;
        const Vec2& p = pa.pin(static_cast<std::size_t>(i));
        if (!fall_touches(p, x)) return;
        double h = contact_height(p, x);
        if (h > y + kTol) return;
        if (h > best + kTol) {
            best = h;
            out.clear();
        }
        if (h > best - kTol) out.push_back(i);
    });
    std::sort(out.begin(), out.end(), [&](int a, int b) {
        const Vec2& u = pa.pin(static_cast<std::size_t>(a));
        const Vec2& v = pa.pin(static_cast<std::size_t>(b));
        if (std::abs(u.y - v.y) > kTol) return u.y > v.y;
        return u.x < v.x;
    });
    return out;
}

}  // namespace detail

// O(n log n)-flavored construction: pins by decreasing height, sorted site
// list queried per half-unit band, Voronoi hittable arcs for entries and
// exits.
inline PachinkoGraph build_graph_fast(const Pachinko& pa) {
    detail::GraphAssembler asmb(pa);
    if (pa.size() == 0) return asmb.finish();
    PinIndex index(pa);
    std::vector<VoronoiCell> cells = build_voronoi(pa);
    std::vector<std::optional<HittableArc>> arcs(pa.size());
    for (std::size_t i = 0; i < pa.size(); ++i) arcs[i] = hittable_arc(pa, static_cast<int>(i), cells);

    constexpr double kAngTol = 1e-9;
    for (int pin : asmb.processing_order()) {
        const Vec2 P = pa.pin(static_cast<std::size_t>(pin));
        const auto& arc = arcs[static_cast<std::size_t>(pin)];
        if (arc) {
            auto& sites = asmb.sites();
            auto lo = sites.lower_bound(P.x - (kBallRadius - kTol));
            auto hi = sites.upper_bound(P.x + (kBallRadius - kTol));
            std::vector<std::multimap<double, detail::Site>::iterator> consumed;
            for (auto it = lo; it != hi; ++it) {
                const detail::Site& a = it->second;
                if (a.label != SiteLabel::Drop) continue;
                if (!fall_touches(P, a.x)) continue;
                if (a.owner_pin == pin) continue;  // the ball just released this pin
                double h = contact_height(P, a.x);
                if (h > a.y + kTol) continue;
                double theta = std::atan2(h - P.y, a.x - P.x);
                if (theta < arc->angle_lo - kAngTol || theta > arc->angle_hi + kAngTol) continue;
                consumed.push_back(it);
            }
            for (auto it : consumed) {
                detail::Site a = it->second;
                asmb.sites().erase(it);
                std::vector<int> S = detail::simultaneous_set(pa, index, a.x, a.y, a.owner_pin);
                if (S.size() <= 1) {
                    if (S.empty() || S.front() != pin)
                        throw InternalError("fast builder consumed a site whose first contact is another pin");
                    asmb.consume_single(a, pin);
                } else {
                    if (S.front() != pin)
                        throw InternalError("simultaneous set not headed by the processed pin");
                    asmb.consume_chain(a, S);
                }
            }
        }
        for (ExitSide side : {ExitSide::Left, ExitSide::Right}) {
            if (!asmb.needs(pin, side)) continue;
            if (!arc) throw InternalError("activated pin has no hittable arc");
            asmb.install_exit(pin, side, side == ExitSide::Left ? arc->left : arc->right);
        }
    }
    return asmb.finish();
}

// Quadratic oracle: same induction, but consumption is decided by direct
// trajectory queries (highest contact from each site) and exits by rolling
// the ball around the pin from the recorded entry point.
inline PachinkoGraph build_graph_naive(const Pachinko& pa) {
    detail::GraphAssembler asmb(pa);
    if (pa.size() == 0) return asmb.finish();
    PinIndex index(pa);
    TrajectorySimulator sim(pa);

    for (int pin : asmb.processing_order()) {
        const Vec2 P = pa.pin(static_cast<std::size_t>(pin));
        auto& sites = asmb.sites();
        std::vector<std::multimap<double, detail::Site>::iterator> consumed;
        std::vector<std::vector<int>> contact_sets;
        for (auto it = sites.begin(); it != sites.end(); ++it) {  // linear scan, no order tricks
            const detail::Site& a = it->second;
            if (a.label != SiteLabel::Drop) continue;
            if (!fall_touches(P, a.x)) continue;
            if (a.owner_pin == pin) continue;  // the ball just released this pin
            std::vector<int> S = sim.first_contacts(a.x, a.y, a.owner_pin);
            if (std::find(S.begin(), S.end(), pin) == S.end()) continue;
            if (S.front() != pin)
                throw InternalError("naive builder reached a site whose simultaneous set is headed elsewhere");
            consumed.push_back(it);
            contact_sets.push_back(std::move(S));
        }
        for (std::size_t k = 0; k < consumed.size(); ++k) {
            detail::Site a = consumed[k]->second;
            asmb.sites().erase(consumed[k]);
            if (contact_sets[k].size() == 1)
                asmb.consume_single(a, pin);
            else
                asmb.consume_chain(a, contact_sets[k]);
        }
        for (ExitSide side : {ExitSide::Left, ExitSide::Right}) {
            if (!asmb.needs(pin, side)) continue;
            Vec2 entry = asmb.entry(pin, side);
            int dir = side == ExitSide::Left ? +1 : -1;
            auto stop = sim.sweep(pin, entry, dir);
            ArcEndpoint e;
            if (stop.left_contact) {
                e.pos = stop.exit;
                e.at_semicircle_end = true;
                e.label = SiteLabel::Drop;
            } else {
                e.pos = stop.center;
                std::vector<int> touching = sim.pins_touching(stop.center);
                auto r = detail::resolve_contacts(pa, stop.center, touching);
                e.label = r.kind == detail::ContactResolution::Kind::Stuck ? SiteLabel::Rest : SiteLabel::Drop;
            }
            asmb.install_exit(pin, side, e);
        }
    }
    return asmb.finish();
}

// ---------------------------------------------------------------------------
// Structural checks (acyclicity, out-degree, descent, span, planarity).

struct InvariantReport {
    bool ok = true;
    std::vector<std::string> violations;

    void fail(std::string v) {
        ok = false;
        violations.push_back(std::move(v));
    }
};

namespace detail {

inline double clamp_y(const PachinkoGraph& g, int v) {
    double min_y = 0, max_y = 0;
    for (const auto& vx : g.vertices) {
        if (std::isfinite(vx.pos.y)) {
            min_y = std::min(min_y, vx.pos.y);
            max_y = std::max(max_y, vx.pos.y);
        }
    }
    double y = g.vertices[static_cast<std::size_t>(v)].pos.y;
    if (y == std::numeric_limits<double>::infinity()) return max_y + 1;
    if (y == -std::numeric_limits<double>::infinity()) return min_y - 1;
    return y;
}

inline int orient(Vec2 a, Vec2 b, Vec2 c) {
    double d = (b - a).x * (c - a).y - (b - a).y * (c - a).x;
    if (d > 1e-12) return 1;
    if (d < -1e-12) return -1;
    return 0;
}

inline bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
    return o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

}  // namespace detail

inline InvariantReport check_invariants(const PachinkoGraph& g) {
    InvariantReport rep;
    std::size_t n = g.vertices.size();

    // Acyclicity by Kahn's algorithm.
    std::vector<int> indeg(n, 0);
    for (const auto& a : g.arcs) ++indeg[static_cast<std::size_t>(a.to)];
    std::vector<int> queue;
    for (std::size_t i = 0; i < n; ++i)
        if (indeg[i] == 0) queue.push_back(static_cast<int>(i));
    std::size_t seen = 0;
    while (!queue.empty()) {
        int v = queue.back();
        queue.pop_back();
        ++seen;
        for (const auto& a : g.arcs)
            if (a.from == v && --indeg[static_cast<std::size_t>(a.to)] == 0) queue.push_back(a.to);
    }
    if (seen != n) rep.fail("cycle: " + std::to_string(n - seen) + " vertices on directed cycles");

    // Out-degree at most two.
    std::vector<int> outdeg(n, 0);
    for (const auto& a : g.arcs) ++outdeg[static_cast<std::size_t>(a.from)];
    for (std::size_t i = 0; i < n; ++i)
        if (outdeg[i] > 2)
            rep.fail("out-degree " + std::to_string(outdeg[i]) + " at vertex " + std::to_string(i));

    // Descent and horizontal reach per arc.
    for (std::size_t i = 0; i < g.arcs.size(); ++i) {
        const auto& a = g.arcs[i];
        const auto& u = g.vertices[static_cast<std::size_t>(a.from)];
        const auto& v = g.vertices[static_cast<std::size_t>(a.to)];
        if (!(u.pos.y > v.pos.y - kTol))
            rep.fail("arc " + std::to_string(i) + " does not descend");
        double span = std::abs(u.pos.x - v.pos.x);
        if (std::isfinite(u.pos.y) && std::isfinite(v.pos.y) && span >= 1 + kTol)
            rep.fail("arc " + std::to_string(i) + " spans " + std::to_string(span) + " >= 1 horizontally");
    }

    // Planarity of the straight-line embedding (infinite ends clamped).
    for (std::size_t i = 0; i < g.arcs.size(); ++i)
        for (std::size_t j = i + 1; j < g.arcs.size(); ++j) {
            const auto& a = g.arcs[i];
            const auto& b = g.arcs[j];
            if (a.from == b.from || a.from == b.to || a.to == b.from || a.to == b.to) continue;
            Vec2 a1{g.vertices[static_cast<std::size_t>(a.from)].pos.x, detail::clamp_y(g, a.from)};
            Vec2 a2{g.vertices[static_cast<std::size_t>(a.to)].pos.x, detail::clamp_y(g, a.to)};
            Vec2 b1{g.vertices[static_cast<std::size_t>(b.from)].pos.x, detail::clamp_y(g, b.from)};
            Vec2 b2{g.vertices[static_cast<std::size_t>(b.to)].pos.x, detail::clamp_y(g, b.to)};
            if (detail::segments_cross(a1, a2, b1, b2))
                rep.fail("arcs " + std::to_string(i) + " and " + std::to_string(j) + " cross");
        }
    return rep;
}

// ---------------------------------------------------------------------------
// Exact probability propagation (Theorem 3 routing over fall abscissae).

struct Propagation {
    std::vector<Dyadic> vertex_mass;  // hit probability per vertex
    std::vector<Dyadic> arc_mass;
    std::map<double, Dyadic> drops;   // drop abscissa -> mass
    std::vector<std::pair<Vec2, Dyadic>> rests;
    Dyadic rest_total;
};

inline Propagation propagate(const PachinkoGraph& g) {
    Propagation out;
    std::size_t n = g.vertices.size();
    out.vertex_mass.assign(n, Dyadic::zero());
    out.arc_mass.assign(g.arcs.size(), Dyadic::zero());

    // Vertex ids are already topological for built graphs, but hand-made
    // graphs go through a real topological sort.
    std::vector<int> order(n);
    {
        std::vector<int> indeg(n, 0);
        for (const auto& a : g.arcs) ++indeg[static_cast<std::size_t>(a.to)];
        std::vector<int> stack;
        for (std::size_t i = 0; i < n; ++i)
            if (indeg[i] == 0) stack.push_back(static_cast<int>(i));
        std::size_t pos = 0;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            order[pos++] = v;
            for (const auto& a : g.arcs)
                if (a.from == v && --indeg[static_cast<std::size_t>(a.to)] == 0) stack.push_back(a.to);
        }
        if (pos != n) throw InternalError("propagate: graph has a cycle");
    }

    std::vector<std::vector<int>> in_arcs(n), out_arcs(n);
    for (std::size_t i = 0; i < g.arcs.size(); ++i) {
        in_arcs[static_cast<std::size_t>(g.arcs[i].to)].push_back(static_cast<int>(i));
        out_arcs[static_cast<std::size_t>(g.arcs[i].from)].push_back(static_cast<int>(i));
    }

    auto push_side = [&](int v, ExitSide side, const Dyadic& m) {
        for (int ai : out_arcs[static_cast<std::size_t>(v)]) {
            if (g.arcs[static_cast<std::size_t>(ai)].side == side) {
                out.arc_mass[static_cast<std::size_t>(ai)] += m;
                return;
            }
        }
        throw InternalError("mass conservation failure: no " +
                            std::string(side == ExitSide::Left ? "left" : "right") + " exit at vertex " +
                            std::to_string(v));
    };
    auto push_tagged = [&](int v, ArcCase kind, int chain, const Dyadic& m) {
        for (int ai : out_arcs[static_cast<std::size_t>(v)]) {
            const auto& a = g.arcs[static_cast<std::size_t>(ai)];
            if (a.kind == kind && a.chain_id == chain) {
                out.arc_mass[static_cast<std::size_t>(ai)] += m;
                return;
            }
        }
        throw InternalError("mass conservation failure: missing chain continuation at vertex " + std::to_string(v));
    };

    for (int v : order) {
        const auto& vx = g.vertices[static_cast<std::size_t>(v)];
        Dyadic total;
        if (vx.kind == VertexKind::Input) {
            total = Dyadic::one();
            out.vertex_mass[static_cast<std::size_t>(v)] = total;
            for (int ai : out_arcs[static_cast<std::size_t>(v)]) out.arc_mass[static_cast<std::size_t>(ai)] += total;
            continue;
        }
        for (int ai : in_arcs[static_cast<std::size_t>(v)]) total += out.arc_mass[static_cast<std::size_t>(ai)];
        out.vertex_mass[static_cast<std::size_t>(v)] = total;
        if (vx.kind == VertexKind::Drop) {
            if (!total.is_zero()) out.drops[vx.pos.x] += total;
            continue;
        }
        if (vx.kind == VertexKind::Rest) {
            if (!total.is_zero()) {
                out.rests.emplace_back(vx.pos, total);
                out.rest_total += total;
            }
            continue;
        }
        // Pin: route each in-arc's mass per its fall line or its chain tag.
        for (int ai : in_arcs[static_cast<std::size_t>(v)]) {
            const auto& a = g.arcs[static_cast<std::size_t>(ai)];
            const Dyadic& m = out.arc_mass[static_cast<std::size_t>(ai)];
            if (m.is_zero()) continue;
            switch (a.cont) {
                case GraphArc::Cont::Next: push_tagged(v, ArcCase::Chain, a.chain_id, m); break;
                case GraphArc::Cont::Stuck: push_tagged(v, ArcCase::Rest, a.chain_id, m); break;
                case GraphArc::Cont::GoLeft: push_side(v, ExitSide::Left, m); break;
                case GraphArc::Cont::GoRight: push_side(v, ExitSide::Right, m); break;
                case GraphArc::Cont::None: {
                    double dx = a.fall_x - vx.pos.x;
                    if (std::abs(dx) <= kTol) {
                        Dyadic h = m.half();
                        push_side(v, ExitSide::Left, h);
                        push_side(v, ExitSide::Right, h);
                    } else if (dx < 0) {
                        push_side(v, ExitSide::Left, m);
                    } else {
                        push_side(v, ExitSide::Right, m);
                    }
                    break;
                }
            }
        }
    }

    Dyadic sum = out.rest_total;
    for (const auto& [x, m] : out.drops) sum += m;
    if (!sum.is_one()) throw InternalError("mass conservation failure: outputs sum to " + sum.to_binary());
    return out;
}

// Map general-model drop abscissae onto integer half-unit columns at the
// given column pitch; abscissae settle between lattice lines get the
// nearest line (compile-derived layouts keep a wide margin).
inline Distribution to_distribution(const Propagation& p, double column_pitch) {
    Distribution d;
    for (const auto& [x, m] : p.drops) {
        double c = x / column_pitch;
        long long col = std::llround(c);
        d.add(col, m);
    }
    d.add_rest(p.rest_total);
    return d;
}

// ---------------------------------------------------------------------------
// Canonical comparison and the text dump format.

namespace detail {

struct CanonVertex {
    VertexKind kind;
    Vec2 pos;
    int id;
};

inline bool pos_less(Vec2 a, Vec2 b) {
    if (a.x < b.x - kTol) return true;
    if (a.x > b.x + kTol) return false;
    return a.y < b.y - kTol;
}

}  // namespace detail

// Set equality of vertices and of arcs (endpoints + case tag), tolerant to
// vertex numbering but not to geometry.
inline bool graphs_equal(const PachinkoGraph& a, const PachinkoGraph& b) {
    if (a.vertices.size() != b.vertices.size() || a.arcs.size() != b.arcs.size()) return false;
    auto canon = [](const PachinkoGraph& g) {
        std::vector<detail::CanonVertex> vs;
        for (std::size_t i = 0; i < g.vertices.size(); ++i)
            vs.push_back({g.vertices[i].kind, g.vertices[i].pos, static_cast<int>(i)});
        std::sort(vs.begin(), vs.end(), [](const auto& u, const auto& v) {
            if (u.kind != v.kind) return u.kind < v.kind;
            return detail::pos_less(u.pos, v.pos);
        });
        std::vector<int> remap(g.vertices.size());
        for (std::size_t i = 0; i < vs.size(); ++i) remap[static_cast<std::size_t>(vs[i].id)] = static_cast<int>(i);
        std::vector<std::tuple<int, int, int>> arcs;
        for (const auto& arc : g.arcs)
            arcs.emplace_back(remap[static_cast<std::size_t>(arc.from)], remap[static_cast<std::size_t>(arc.to)],
                              static_cast<int>(arc.kind));
        std::sort(arcs.begin(), arcs.end());
        return std::pair{vs, arcs};
    };
    auto [va, aa] = canon(a);
    auto [vb, ab] = canon(b);
    for (std::size_t i = 0; i < va.size(); ++i) {
        if (va[i].kind != vb[i].kind) return false;
        bool both_inf = !std::isfinite(va[i].pos.y) && !std::isfinite(vb[i].pos.y);
        if (std::abs(va[i].pos.x - vb[i].pos.x) > kTol) return false;
        if (!both_inf && std::abs(va[i].pos.y - vb[i].pos.y) > kTol) return false;
    }
    return aa == ab;
}

inline std::string dump_graph(const PachinkoGraph& g) {
    std::ostringstream os;
    os.precision(17);
    auto kind_name = [](VertexKind k) {
        switch (k) {
            case VertexKind::Input: return "input";
            case VertexKind::Pin: return "pin";
            case VertexKind::Drop: return "drop";
            case VertexKind::Rest: return "rest";
        }
        return "?";
    };
    auto case_name = [](ArcCase c) {
        switch (c) {
            case ArcCase::Direct: return "direct";
            case ArcCase::Rest: return "rest";
            case ArcCase::Chain: return "chain";
        }
        return "?";
    };
    for (std::size_t i = 0; i < g.vertices.size(); ++i)
        os << "v " << i << " " << kind_name(g.vertices[i].kind) << " " << g.vertices[i].pos.x << " "
           << g.vertices[i].pos.y << "\n";
    for (const auto& a : g.arcs) os << "a " << a.from << " " << a.to << " " << case_name(a.kind) << "\n";
    return os.str();
}

}  // namespace pachinko
