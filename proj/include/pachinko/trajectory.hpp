#pragma once

// Single-ball event simulation of the general model: free fall to first
// contact, rotation about a pivot, pivot hand-off to the obstructing pin
// horizontally closest to the center, stuck detection, and termination at a
// drop or rest site.  This is the physical oracle the graph builders and
// the exact propagation are tested against.

#include "pachinko/geometry.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <thread>
#include <vector>

namespace pachinko {

struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using CoinSource = std::function<bool()>;  // true = roll right

struct TrajEvent {
    enum class Kind { Fall, Hit, Coin, Pivot, Exit, Stuck, Drop };
    Kind kind;
    double x = 0;
    double y = 0;
    int pin = -1;
};

struct TrajectoryResult {
    enum class Outcome { Dropped, Stuck };
    Outcome outcome = Outcome::Dropped;
    double drop_x = 0;        // valid when dropped
    Vec2 rest_point{};        // bottom of the ball at rest, valid when stuck
    std::vector<int> contacts;  // pins in order of first touch
    std::vector<TrajEvent> events;
    int coin_flips = 0;
    bool degenerate = false;  // hit the unspecified multi-center corner case
};

namespace detail {

struct ContactResolution {
    enum class Kind { Stuck, Rotate, Coin };
    Kind kind;
    int pivot = -1;
    int dir = 0;  // +1 rolls left (angle toward pi), -1 rolls right (toward 0)
    bool degenerate = false;
};

// The stuck rule: touching pins strictly on both sides of the center stop
// the ball; otherwise it rotates away from the contacts around the one
// horizontally closest to the center.
inline ContactResolution resolve_contacts(const Pachinko& pa, Vec2 center, const std::vector<int>& contacts) {
    bool left = false, right = false;
    int centered = 0;
    for (int i : contacts) {
        double dx = pa.pin(static_cast<std::size_t>(i)).x - center.x;
        if (dx < -kTol)
            left = true;
        else if (dx > kTol)
            right = true;
        else
            ++centered;
    }
    if (left && right) return {ContactResolution::Kind::Stuck, -1, 0, false};
    if (!left && !right) {
        if (centered >= 2) return {ContactResolution::Kind::Stuck, -1, 0, true};
        return {ContactResolution::Kind::Coin, contacts.front(), 0, false};
    }
    int pivot = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i : contacts) {
        const Vec2& p = pa.pin(static_cast<std::size_t>(i));
        double d = std::abs(p.x - center.x);
        bool better;
        if (pivot < 0) {
            better = true;
        } else if (d < best - kTol) {
            better = true;
        } else if (d <= best + kTol) {
            const Vec2& cur = pa.pin(static_cast<std::size_t>(pivot));
            better = p.y > cur.y + kTol || (std::abs(p.y - cur.y) <= kTol && p.x < cur.x);
        } else {
            better = false;
        }
        if (better) {
            best = std::min(best, d);
            pivot = i;
        }
    }
    return {ContactResolution::Kind::Rotate, pivot, left ? -1 : +1, false};
}

}  // namespace detail

class TrajectorySimulator {
  public:
    explicit TrajectorySimulator(const Pachinko& p) : pa_(p), index_(p) {}

    TrajectoryResult run(CoinSource coin, long long event_budget = 1000000, bool keep_events = false) const {
        TrajectoryResult res;
        double fx = 0;
        double fy = std::numeric_limits<double>::infinity();
        long long events = 0;
        auto note = [&](TrajEvent e) {
            if (keep_events) res.events.push_back(e);
        };

        // Falling state loop; rotation is nested inside.
        for (;;) {
            if (++events > event_budget)
                throw BudgetError("trajectory exceeded the event budget of " + std::to_string(event_budget));
            note({TrajEvent::Kind::Fall, fx, fy, -1});

            std::vector<int> touched = first_contacts(fx, fy);
            if (touched.empty()) {
                res.outcome = TrajectoryResult::Outcome::Dropped;
                res.drop_x = fx;
                note({TrajEvent::Kind::Drop, fx, 0, -1});
                return res;
            }
            Vec2 center{fx, contact_height(pa_.pin(static_cast<std::size_t>(touched.front())), fx)};
            for (int i : touched) {
                res.contacts.push_back(i);
                note({TrajEvent::Kind::Hit, center.x, center.y, i});
            }

            detail::ContactResolution r = detail::resolve_contacts(pa_, center, touched);
            if (r.degenerate) res.degenerate = true;
            if (r.kind == detail::ContactResolution::Kind::Stuck) {
                res.outcome = TrajectoryResult::Outcome::Stuck;
                res.rest_point = center - Vec2{0, kBallRadius};
                note({TrajEvent::Kind::Stuck, res.rest_point.x, res.rest_point.y, -1});
                return res;
            }
            if (r.kind == detail::ContactResolution::Kind::Coin) {
                ++res.coin_flips;
                bool right = coin();
                note({TrajEvent::Kind::Coin, center.x, center.y, r.pivot});
                r.dir = right ? -1 : +1;
            }

            // Rotation loop around successive pivots.
            int pivot = r.pivot;
            int dir = r.dir;
            for (;;) {
                if (++events > event_budget)
                    throw BudgetError("trajectory exceeded the event budget of " + std::to_string(event_budget));
                note({TrajEvent::Kind::Pivot, center.x, center.y, pivot});
                SweepStop stop = sweep(pivot, center, dir);
                if (stop.left_contact) {
                    // Ball left the pivot; resume falling from the exit.
                    fx = stop.exit.x;
                    fy = stop.exit.y;
                    note({TrajEvent::Kind::Exit, fx, fy, pivot});
                    break;
                }
                center = stop.center;
                std::vector<int> touching = pins_touching(center);
                for (int i : touching)
                    if (i != pivot) {
                        res.contacts.push_back(i);
                        note({TrajEvent::Kind::Hit, center.x, center.y, i});
                    }
                detail::ContactResolution rr = detail::resolve_contacts(pa_, center, touching);
                if (rr.degenerate) res.degenerate = true;
                if (rr.kind == detail::ContactResolution::Kind::Stuck) {
                    res.outcome = TrajectoryResult::Outcome::Stuck;
                    res.rest_point = center - Vec2{0, kBallRadius};
                    note({TrajEvent::Kind::Stuck, res.rest_point.x, res.rest_point.y, -1});
                    return res;
                }
                if (rr.kind == detail::ContactResolution::Kind::Coin) {
                    ++res.coin_flips;
                    rr.dir = coin() ? -1 : +1;
                    note({TrajEvent::Kind::Coin, center.x, center.y, rr.pivot});
                }
                pivot = rr.pivot;
                dir = rr.dir;
            }
        }
    }

    // All pins achieving the highest contact along a fall at fx from center
    // height fy (ties within tolerance are simultaneous contacts).  A pin
    // the ball just released still touches at the start of the fall, so the
    // caller may exclude it.
    std::vector<int> first_contacts(double fx, double fy, int exclude_pin = -1) const {
        std::vector<int> out;
        double best = -std::numeric_limits<double>::infinity();
        index_.for_near(fx, kBallRadius, [&](int i) {
            if (i == exclude_pin) return;
            const Vec2& p = pa_.pin(static_cast<std::size_t>(i));
            if (!fall_touches(p, fx)) return;
            double h = contact_height(p, fx);
            if (h > fy + kTol) return;
            if (h > best + kTol) {
                best = h;
                out.clear();
            }
            if (h > best - kTol) out.push_back(i);
        });
        sort_by_height(out);
        return out;
    }

    struct SweepStop {
        bool left_contact = false;  // true: clean exit, resume fall at `exit`
        Vec2 exit{};
        Vec2 center{};  // blocking position when a contact stops the sweep
    };

    std::vector<int> pins_touching(Vec2 center) const {
        std::vector<int> out;
        index_.for_near(center.x, kBallRadius + kTol, [&](int i) {
            if (std::abs(dist(pa_.pin(static_cast<std::size_t>(i)), center) - kBallRadius) <= kTol) out.push_back(i);
        });
        sort_by_height(out);
        return out;
    }

    // Rotate around `pivot` from `center` in direction `dir` until another
    // pin blocks the rotation or the pivot stops obstructing descent.
    SweepStop sweep(int pivot, Vec2 center, int dir) const {
        const Vec2 P = pa_.pin(static_cast<std::size_t>(pivot));
        constexpr double kPi = 3.14159265358979323846;
        constexpr double kAngEps = 1e-12;
        double a0 = std::atan2(center.y - P.y, center.x - P.x);
        if (a0 < 0) a0 += 2 * kPi;

        double target;
        if (a0 <= kPi + kAngEps) {
            target = dir > 0 ? kPi : 0.0;
        } else {
            // Below the equator the ball can only settle under the pivot.
            target = 1.5 * kPi;
            dir = a0 < target ? +1 : -1;
        }

        double best_phi = target;
        bool found = false;
        index_.for_near(P.x, 2 * kBallRadius, [&](int qi) {
            if (qi == pivot) return;
            const Vec2& q = pa_.pin(static_cast<std::size_t>(qi));
            auto inter = circle_intersections(P, q);
            if (!inter) return;
            for (Vec2 z : {inter->first, inter->second}) {
                double phi = std::atan2(z.y - P.y, z.x - P.x);
                if (phi < 0) phi += 2 * kPi;
                bool ahead = dir > 0 ? (phi > a0 + kAngEps && phi < target - kAngEps)
                                     : (phi < a0 - kAngEps && phi > target + kAngEps);
                if (!ahead) continue;
                // Approaching test: motion must shrink the distance to q.
                Vec2 tangent{-std::sin(phi), std::cos(phi)};
                double deriv = dir * tangent.dot(z - q);
                if (deriv >= -kAngEps) continue;
                bool better = dir > 0 ? (phi < best_phi) : (phi > best_phi);
                if (!found || better) {
                    best_phi = phi;
                    found = true;
                }
            }
        });

        SweepStop stop;
        if (found) {
            stop.center = P + Vec2{kBallRadius * std::cos(best_phi), kBallRadius * std::sin(best_phi)};
            return stop;
        }
        stop.left_contact = true;
        if (target == 1.5 * kPi)
            stop.exit = {P.x, P.y - kBallRadius};
        else
            stop.exit = {dir > 0 ? P.x - kBallRadius : P.x + kBallRadius, P.y};
        return stop;
    }

  private:
    void sort_by_height(std::vector<int>& v) const {
        std::sort(v.begin(), v.end(), [&](int a, int b) {
            const Vec2& pa = pa_.pin(static_cast<std::size_t>(a));
            const Vec2& pb = pa_.pin(static_cast<std::size_t>(b));
            if (std::abs(pa.y - pb.y) > kTol) return pa.y > pb.y;
            return pa.x < pb.x;
        });
    }

    const Pachinko& pa_;
    PinIndex index_;
};

inline TrajectoryResult sample_trajectory(const Pachinko& p, CoinSource coin, long long event_budget = 1000000,
                                          bool keep_events = false) {
    return TrajectorySimulator(p).run(std::move(coin), event_budget, keep_events);
}

// Deterministic per-ball coin stream: ball b of seed s draws bits from
// splitmix64(s, b), so results are independent of trial order and threads.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

class CoinStream {
  public:
    CoinStream(std::uint64_t seed, std::uint64_t ball) : state_(splitmix64(seed ^ splitmix64(ball))) {}
    bool operator()() {
        if (bits_left_ == 0) {
            state_ = splitmix64(state_);
            buffer_ = state_;
            bits_left_ = 64;
        }
        bool b = buffer_ & 1;
        buffer_ >>= 1;
        --bits_left_;
        return b;
    }

  private:
    std::uint64_t state_;
    std::uint64_t buffer_ = 0;
    int bits_left_ = 0;
};

struct Histogram {
    std::map<double, long long> drops;                    // keyed by drop abscissa
    std::map<std::pair<double, double>, long long> rests; // keyed by rest point
    long long trials = 0;

    long long rest_total() const {
        long long t = 0;
        for (auto& [k, v] : rests) t += v;
        return t;
    }
};

inline Histogram monte_carlo(const Pachinko& p, long long trials, std::uint64_t seed, int jobs = 1,
                             long long event_budget = 1000000) {
    if (trials < 1) throw GeometryError("monte_carlo needs at least one trial");
    jobs = std::max(1, jobs);
    TrajectorySimulator sim(p);
    std::vector<Histogram> parts(static_cast<std::size_t>(jobs));
    auto worker = [&](int w) {
        Histogram& h = parts[static_cast<std::size_t>(w)];
        for (long long b = w; b < trials; b += jobs) {
            CoinStream coin(seed, static_cast<std::uint64_t>(b));
            TrajectoryResult r = sim.run(coin, event_budget);
            if (r.outcome == TrajectoryResult::Outcome::Dropped)
                ++h.drops[r.drop_x];
            else
                ++h.rests[{r.rest_point.x, r.rest_point.y}];
        }
    };
    if (jobs == 1) {
        worker(0);
    } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < jobs; ++w) threads.emplace_back(worker, w);
        for (auto& t : threads) t.join();
    }
    Histogram total;
    total.trials = trials;
    for (auto& part : parts) {
        for (auto& [k, v] : part.drops) total.drops[k] += v;
        for (auto& [k, v] : part.rests) total.rests[k] += v;
    }
    return total;
}

}  // namespace pachinko
