#pragma once

// Harris graphical construction for the interface dynamics. Up/down arrows
// are rate-1/2 Poisson streams per site, materialized deterministically per
// (seed, site, cell, direction); an arrow at x acts only when
// xi(x-1) == xi(x+1), setting xi(x) to xi(x-1) +- 1. Boundary behavior is
// driven by nondecreasing vertex paths: at a path event the interface is
// joined with the cone at the new vertex. Several interfaces evolved in
// lockstep against the same arrows and clocks realize the couplings, and the
// order relations they are supposed to satisfy are checked event by event.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <vector>

#include "fbssep/common.hpp"
#include "fbssep/lattice.hpp"
#include "fbssep/rng.hpp"

namespace fbssep {

struct ArrowEvent {
    double t;
    Site x;
    bool up;
};

// Tie-breaking for simultaneous timestamps: site index, then down before up.
// A.s. irrelevant, but keeps the evolution a total order.
struct ArrowLater {
    bool operator()(const ArrowEvent& a, const ArrowEvent& b) const {
        if (a.t != b.t) return a.t > b.t;
        if (a.x != b.x) return a.x > b.x;
        return a.up && !b.up;
    }
};

// Yields the arrows of a growable site range in time order, one unit cell at
// a time. Growing the range mid-cell fetches the remaining arrows of the new
// sites, which is sound because a site outside every member's window cannot
// have been involved earlier.
class ArrowCursor {
  public:
    ArrowCursor(const ArrowStream& arrows, double t0, Site lo, Site hi)
        : arrows_(arrows), t_(t0), lo_(lo), hi_(hi),
          cell_(static_cast<std::int64_t>(std::floor(t0))) {
        for (Site x = lo_; x <= hi_; ++x) fetch_site(x, t_);
    }

    // Next arrow with time in [current, t_end); advances the clock.
    std::optional<ArrowEvent> next(double t_end) {
        for (;;) {
            if (!heap_.empty() && heap_.top().t < t_end) {
                ArrowEvent e = heap_.top();
                heap_.pop();
                t_ = e.t;
                return e;
            }
            if (!heap_.empty()) {  // top is at or past t_end, keep it for later
                t_ = t_end;
                return std::nullopt;
            }
            if (static_cast<double>(cell_ + 1) < t_end) {
                ++cell_;
                for (Site x = lo_; x <= hi_; ++x) fetch_site(x, static_cast<double>(cell_));
            } else {
                t_ = t_end;
                return std::nullopt;
            }
        }
    }

    void ensure_range(Site lo, Site hi) {
        while (lo_ > lo) fetch_site(--lo_, t_, true);
        while (hi_ < hi) fetch_site(++hi_, t_, true);
    }

  private:
    void fetch_site(Site x, double from, bool strict = false) {
        for (bool up : {false, true})
            for (double t : arrows_.cell_arrows(x, cell_, up))
                if (strict ? t > from : t >= from) heap_.push({t, x, up});
    }

    const ArrowStream& arrows_;
    double t_;
    Site lo_, hi_;
    std::int64_t cell_;
    std::priority_queue<ArrowEvent, std::vector<ArrowEvent>, ArrowLater> heap_;
};

// Boundary update of one coupled member: either join with a cone (vertex
// path event) or the seen-from-the-vertex variant, a translation followed by
// a join with the cone at the origin.
struct BoundaryAction {
    double t;
    bool centered = false;
    Vertex v;  // join vertex, or the translation for centered updates
};

struct CoupledMember {
    Interface xi;
    std::vector<BoundaryAction> actions;
    std::size_t next_action = 0;
};

struct EngineEvent {
    double t;
    bool is_arrow;
    Site site = 0;   // arrows only
    bool up = false;
    bool changed = false;  // some member changed state
};

// Lockstep evolution of coupled members over [t0, t1] against shared arrows.
// hook(const EngineEvent&) fires after each applied event (or batch of
// boundary actions sharing a timestamp).
template <class Hook>
inline void evolve_coupled(std::vector<CoupledMember>& members, const ArrowStream& arrows,
                           double t0, double t1, Hook&& hook) {
    if (members.empty() || t1 < t0) throw std::invalid_argument("evolve_coupled: bad arguments");
    auto lo_of = [&]() {
        Site lo = std::numeric_limits<Site>::max();
        for (const auto& m : members) lo = std::min(lo, m.xi.left());
        return lo;
    };
    auto hi_of = [&]() {
        Site hi = std::numeric_limits<Site>::min();
        for (const auto& m : members) hi = std::max(hi, m.xi.right());
        return hi;
    };
    ArrowCursor cursor(arrows, t0, lo_of(), hi_of());
    const double inf = std::numeric_limits<double>::infinity();
    for (;;) {
        double ta = inf;
        for (const auto& m : members)
            if (m.next_action < m.actions.size())
                ta = std::min(ta, m.actions[m.next_action].t);
        const double stop = std::min(ta, t1);
        if (auto a = cursor.next(stop)) {
            bool changed = false;
            for (auto& m : members) changed = m.xi.apply_arrow(a->x, a->up) || changed;
            if (changed) cursor.ensure_range(lo_of(), hi_of());
            hook(EngineEvent{a->t, true, a->x, a->up, changed});
            continue;
        }
        if (ta > t1) return;  // no boundary action left in [t0, t1]
        for (auto& m : members) {
            while (m.next_action < m.actions.size() && m.actions[m.next_action].t == ta) {
                const BoundaryAction& act = m.actions[m.next_action];
                if (act.centered)
                    m.xi = cone_join(translate(m.xi, act.v.v1, act.v.v2), Vertex{0, 0});
                else
                    m.xi = cone_join(m.xi, act.v);
                ++m.next_action;
            }
        }
        cursor.ensure_range(lo_of(), hi_of());
        hook(EngineEvent{ta, false, 0, false, true});
        if (ta >= t1) return;
    }
}

// T_{[s,t]}: pure corner-flip evolution, no boundary motion.
inline Interface harris_evolve(const Interface& xi, const ArrowStream& arrows, double s,
                               double t) {
    std::vector<CoupledMember> ms{{xi, {}, 0}};
    evolve_coupled(ms, arrows, s, t, [](const EngineEvent&) {});
    return ms[0].xi;
}

inline std::vector<BoundaryAction> actions_from_path(const VertexPath& z) {
    std::vector<BoundaryAction> acts;
    acts.reserve(z.size());
    for (const auto& e : z) acts.push_back({e.t, false, e.v});
    return acts;
}

// T^z: corner flips between the path's jump times, cone join at each jump.
inline Interface evolve_with_vertex_path(const Interface& xi, const VertexPath& z,
                                         const ArrowStream& arrows, double T) {
    validate_path(z);
    std::vector<CoupledMember> ms{{xi, actions_from_path(z), 0}};
    evolve_coupled(ms, arrows, 0.0, T, [](const EngineEvent&) {});
    return ms[0].xi;
}

// ---------------------------------------------------------------------------
// Standard vertex paths built from the killing clocks.
struct StandardPaths {
    VertexPath constant;   // O: frozen at v(xi)
    VertexPath running;    // R: jumps (+1,1) at births, (-1,1) at deaths
    VertexPath delta_minus;  // R frozen at n delta over [n delta, (n+1) delta)
    VertexPath delta_plus;   // anticipates R_{(n+1) delta}
};

inline StandardPaths standard_paths(const Interface& xi, const KillingClocks& clocks,
                                    double delta, double T) {
    if (delta <= 0.0) throw std::invalid_argument("standard_paths: delta must be > 0");
    StandardPaths out;
    const Vertex v0 = vertex(xi);
    if (!vertex_proper(v0))
        throw std::invalid_argument("standard_paths: interface must have a proper vertex");

    const auto n_periods = static_cast<std::int64_t>(std::floor(T / delta)) + 1;
    const double horizon = delta * static_cast<double>(n_periods);
    const auto events = clocks.events_up_to(horizon);

    // cumulative R_t at every clock event
    std::vector<std::pair<double, Vertex>> running;
    Vertex v = v0;
    for (const auto& e : events) {
        v = Vertex{v.v1 + (e.birth ? 1 : -1), v.v2 + 1};
        running.emplace_back(e.t, v);
    }
    for (const auto& [t, vv] : running)
        if (t <= T) out.running.push_back({t, vv});

    auto value_at = [&](double t) {  // R_t (right-continuous)
        Vertex r = v0;
        for (const auto& [tt, vv] : running) {
            if (tt > t) break;
            r = vv;
        }
        return r;
    };
    Vertex prev_minus = v0;
    for (std::int64_t n = 1; n * delta <= T; ++n) {
        const Vertex rv = value_at(static_cast<double>(n) * delta);
        if (!(rv == prev_minus)) {
            out.delta_minus.push_back({static_cast<double>(n) * delta, rv});
            prev_minus = rv;
        }
    }
    Vertex prev_plus = v0;
    for (std::int64_t n = 0; n * delta <= T; ++n) {
        const Vertex rv = value_at(static_cast<double>(n + 1) * delta);
        if (!(rv == prev_plus)) {
            out.delta_plus.push_back({static_cast<double>(n) * delta, rv});
            prev_plus = rv;
        }
    }
    return out;
}

// Path value at time t (right-continuous, v0 before the first event).
inline Vertex path_value(const VertexPath& z, const Vertex& v0, double t) {
    Vertex v = v0;
    for (const auto& e : z) {
        if (e.t > t) break;
        v = e.v;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Couplings with built-in order verification.

struct OrderViolation {
    double t;
    int pair;  // order failed between members pair and pair+1
};

struct CoupledBundleResult {
    std::vector<Interface> finals;
    std::vector<OrderViolation> violations;
    std::size_t events = 0;
    std::int64_t births = 0;
    std::int64_t deaths = 0;
};

// Event log row for CSV export: (time, site, kind, member).
struct InterfaceLogRow {
    double t;
    Site site;
    char kind;  // 'u' up arrow, 'd' down arrow, 'b' boundary
    int member;
};

// Evolves the given members in lockstep and checks after every event that
// members[0] <= members[1] <= ... pointwise. Arrows can only break order at
// the flipped site; boundary events trigger a full window comparison.
inline CoupledBundleResult run_ordered_bundle(std::vector<CoupledMember> members,
                                              const ArrowStream& arrows, double T,
                                              bool throw_on_violation,
                                              std::vector<InterfaceLogRow>* log = nullptr) {
    CoupledBundleResult res;
    evolve_coupled(members, arrows, 0.0, T, [&](const EngineEvent& ev) {
        ++res.events;
        if (log) {
            if (ev.is_arrow) {
                for (std::size_t i = 0; i < members.size(); ++i)
                    log->push_back({ev.t, ev.site, ev.up ? 'u' : 'd', static_cast<int>(i)});
            } else {
                log->push_back({ev.t, 0, 'b', -1});
            }
        }
        for (std::size_t i = 0; i + 1 < members.size(); ++i) {
            const bool ok = ev.is_arrow
                                ? members[i].xi.at(ev.site) <= members[i + 1].xi.at(ev.site)
                                : interface_leq(members[i].xi, members[i + 1].xi);
            if (!ok) {
                res.violations.push_back({ev.t, static_cast<int>(i)});
                if (throw_on_violation)
                    throw invariant_violation("coupling order violated at t=" +
                                              std::to_string(ev.t) + " between members " +
                                              std::to_string(i) + "," + std::to_string(i + 1));
            }
        }
    });
    for (auto& m : members) res.finals.push_back(std::move(m.xi));
    return res;
}

// delta-lower, true, delta-upper trajectories against shared randomness.
inline CoupledBundleResult coupled_delta_sandwich(const Interface& xi, double j, double delta,
                                                  double T, std::uint64_t seed,
                                                  bool throw_on_violation = true,
                                                  std::vector<InterfaceLogRow>* log = nullptr) {
    const ArrowStream arrows(key_of({seed, 0xA440ULL}));
    const KillingClocks clocks(key_of({seed, 0xC10CULL}), j);
    const auto paths = standard_paths(xi, clocks, delta, T);
    std::vector<CoupledMember> ms;
    ms.push_back({xi, actions_from_path(paths.delta_minus), 0});
    ms.push_back({xi, actions_from_path(paths.running), 0});
    ms.push_back({xi, actions_from_path(paths.delta_plus), 0});
    auto res = run_ordered_bundle(std::move(ms), arrows, T, throw_on_violation, log);
    const Vertex v0 = vertex(xi);
    const Vertex vT = path_value(paths.running, v0, T);
    res.births = ((vT.v2 - v0.v2) + (vT.v1 - v0.v1)) / 2;
    res.deaths = ((vT.v2 - v0.v2) - (vT.v1 - v0.v1)) / 2;
    return res;
}

// The interface process as seen from its vertex: at each death apply
// theta_{(-1,1)}, at each birth theta_{(1,1)}, then join with the cone at
// the origin; corner flips in between.
inline std::vector<BoundaryAction> centered_actions(const std::vector<ClockEvent>& events) {
    std::vector<BoundaryAction> acts;
    acts.reserve(events.size());
    for (const auto& e : events)
        acts.push_back({e.t, true, e.birth ? Vertex{1, 1} : Vertex{-1, 1}});
    return acts;
}

struct CenteredRunResult {
    Interface final_interface;
    std::int64_t births = 0;
    std::int64_t deaths = 0;
    std::size_t events = 0;
};

template <class Hook>
inline CenteredRunResult centered_evolve_hooked(const Interface& xi, double j, double T,
                                                std::uint64_t seed, Hook&& hook) {
    if (!(vertex(xi) == Vertex{0, 0}))
        throw std::invalid_argument("centered_evolve: vertex must be (0,0)");
    const ArrowStream arrows(key_of({seed, 0xA440ULL}));
    const KillingClocks clocks(key_of({seed, 0xC10CULL}), j);
    const auto events = clocks.events_up_to(T);
    std::vector<CoupledMember> ms{{xi, centered_actions(events), 0}};
    CenteredRunResult out;
    for (const auto& e : events)
        (e.birth ? out.births : out.deaths) += 1;
    evolve_coupled(ms, arrows, 0.0, T, [&](const EngineEvent& ev) {
        ++out.events;
        hook(ev, ms[0].xi);
    });
    out.final_interface = std::move(ms[0].xi);
    return out;
}

inline CenteredRunResult centered_evolve(const Interface& xi, double j, double T,
                                         std::uint64_t seed) {
    return centered_evolve_hooked(xi, j, T, seed, [](const EngineEvent&, const Interface&) {});
}

// Thinned-clock coupling of two centered processes at rates J >= J'.
// The rate-J trajectory is dominated by the rate-J' one.
inline CoupledBundleResult coupled_rate_ordering(const Interface& xi, double j, double j_sub,
                                                 double T, std::uint64_t seed,
                                                 bool throw_on_violation = true) {
    if (j_sub > j) throw std::invalid_argument("coupled_rate_ordering: need J' <= J");
    if (!(vertex(xi) == Vertex{0, 0}))
        throw std::invalid_argument("coupled_rate_ordering: vertex must be (0,0)");
    const ArrowStream arrows(key_of({seed, 0xA440ULL}));
    const KillingClocks clocks(key_of({seed, 0xC10CULL}), j);
    std::vector<CoupledMember> ms;
    ms.push_back({xi, centered_actions(clocks.events_up_to(T)), 0});
    ms.push_back({xi, centered_actions(clocks.thinned_events_up_to(T, j_sub)), 0});
    return run_ordered_bundle(std::move(ms), arrows, T, throw_on_violation);
}

// Verifies the height identity for a run started in the cone at the origin:
// at every event, xi_t(0) = 2 B_t + 2 sum_{x>=0} eta_t(x) with eta_t = D(xi_t).
struct HeightIdentityResult {
    bool ok = true;
    std::size_t events_checked = 0;
};

inline HeightIdentityResult height_identity_check(const Interface& xi, double j, double T,
                                                  std::uint64_t seed) {
    if (!(vertex(xi) == Vertex{0, 0}))
        throw std::invalid_argument("height_identity_check: start must be in Y_{(0,0)}");
    const ArrowStream arrows(key_of({seed, 0xA440ULL}));
    const KillingClocks clocks(key_of({seed, 0xC10CULL}), j);
    const auto events = clocks.events_up_to(T);
    // build the running path R_t
    VertexPath path;
    Vertex v{0, 0};
    for (const auto& e : events) {
        v = Vertex{v.v1 + (e.birth ? 1 : -1), v.v2 + 1};
        path.push_back({e.t, v});
    }
    std::vector<CoupledMember> ms{{xi, actions_from_path(path), 0}};
    HeightIdentityResult res;
    std::size_t deaths_seen = 0;
    std::size_t next_event = 0;
    auto check = [&](double t) {
        while (next_event < events.size() && events[next_event].t <= t) {
            if (!events[next_event].birth) ++deaths_seen;
            ++next_event;
        }
        const Interface& cur = ms[0].xi;
        const Site rbar = std::max<Site>(cur.right(), 0);
        const Height particles_right_twice = rbar - cur.at(rbar) + cur.at(0);
        const Height lhs = cur.at(0);
        const Height rhs = 2 * static_cast<Height>(deaths_seen) + particles_right_twice;
        if (lhs != rhs) res.ok = false;
    };
    evolve_coupled(ms, arrows, 0.0, T, [&](const EngineEvent& ev) {
        check(ev.t);
        ++res.events_checked;
    });
    return res;
}

}  // namespace fbssep
