#include <catch2/catch_amalgamated.hpp>

#include "fbssep/interface_sim.hpp"
#include "fbssep/particle_sim.hpp"

using namespace fbssep;

namespace {

Interface random_interface(std::uint64_t seed, int flips = 30, Site span = 5) {
    Interface xi = Interface::cone({0, 0});
    SplitMix64 g(seed);
    for (int i = 0; i < flips; ++i) {
        const Site x = static_cast<Site>(g.next() % (2 * span + 1)) - span;
        xi.apply_arrow(x, (g.next() & 1) != 0);
    }
    return xi;
}

}  // namespace

TEST_CASE("single arrow updates") {
    // local minimum at 0: heights (1, 0, 1)
    Interface xi = Interface::cone({0, 0});
    SECTION("up-arrow flips the minimum") {
        REQUIRE(xi.apply_arrow(0, true));
        CHECK(xi.at(0) == 2);
        CHECK(xi.at(-1) == 1);
        CHECK(xi.at(1) == 1);
    }
    SECTION("down-arrow is a no-op at the minimum") {
        REQUIRE_FALSE(xi.apply_arrow(0, false));
        CHECK(xi == Interface::cone({0, 0}));
    }
    SECTION("arrows at sloped sites are no-ops") {
        REQUIRE_FALSE(xi.apply_arrow(3, true));
        REQUIRE_FALSE(xi.apply_arrow(-2, false));
    }
}

TEST_CASE("vertex is conserved by the corner-flip evolution") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Interface xi0 = random_interface(seed);
        const Vertex v0 = vertex(xi0);
        const ArrowStream arrows(seed * 13 + 1);
        std::vector<CoupledMember> ms{{xi0, {}, 0}};
        std::size_t events = 0;
        evolve_coupled(ms, arrows, 0.0, 30.0, [&](const EngineEvent& ev) {
            if (ev.changed) {
                REQUIRE(vertex(ms[0].xi) == v0);
                REQUIRE(ms[0].xi.valid());
            }
            ++events;
        });
        CHECK(events > 10);
    }
}

TEST_CASE("harris evolution composes over time intervals") {
    const Interface xi0 = random_interface(3);
    const ArrowStream arrows(99);
    const Interface direct = harris_evolve(xi0, arrows, 0.0, 7.5);
    const Interface split =
        harris_evolve(harris_evolve(xi0, arrows, 0.0, 3.25), arrows, 3.25, 7.5);
    CHECK(direct == split);
}

TEST_CASE("attractivity: order is preserved pathwise") {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        const Interface lower = random_interface(seed);
        Interface upper = cone_join(lower, {1, 3});
        upper.apply_arrow(0, true);
        REQUIRE(interface_leq(lower, upper));
        const ArrowStream arrows(seed + 1000);
        std::vector<CoupledMember> ms{{lower, {}, 0}, {upper, {}, 0}};
        evolve_coupled(ms, arrows, 0.0, 25.0, [&](const EngineEvent& ev) {
            if (ev.is_arrow) REQUIRE(ms[0].xi.at(ev.site) <= ms[1].xi.at(ev.site));
        });
        CHECK(interface_leq(ms[0].xi, ms[1].xi));
    }
}

TEST_CASE("vertex path evolution") {
    const Interface v00 = Interface::cone({0, 0});
    const ArrowStream arrows(7);

    SECTION("constant path equals plain evolution") {
        const Interface a = evolve_with_vertex_path(v00, {}, arrows, 9.0);
        const Interface b = harris_evolve(v00, arrows, 0.0, 9.0);
        CHECK(a == b);
    }
    SECTION("single event joins the cone") {
        const ArrowStream none(1, 0.0);  // no arrows at all
        const Interface res =
            evolve_with_vertex_path(v00, {{0.4, {-1, 1}}}, none, 1.0);
        CHECK(res == Interface::cone({-1, 1}));
    }
    SECTION("vertex tracks the path") {
        VertexPath z{{0.5, {1, 1}}, {1.25, {0, 2}}, {2.0, {0, 4}}};
        std::vector<CoupledMember> ms{{v00, actions_from_path(z), 0}};
        evolve_coupled(ms, arrows, 0.0, 3.0, [&](const EngineEvent&) {});
        CHECK(vertex(ms[0].xi) == Vertex{0, 4});
    }
}

TEST_CASE("standard paths from the clocks") {
    const Interface v00 = Interface::cone({0, 0});
    SECTION("no clock events: all paths constant") {
        const KillingClocks clocks(5, 0.0);
        const auto p = standard_paths(v00, clocks, 1.0, 10.0);
        CHECK(p.constant.empty());
        CHECK(p.running.empty());
        CHECK(p.delta_minus.empty());
        CHECK(p.delta_plus.empty());
    }
    SECTION("jump times follow the freeze/anticipate rules") {
        // find a seed whose first event lands in (0, 1)
        for (std::uint64_t seed = 1; seed < 50; ++seed) {
            const KillingClocks clocks(seed, 0.3);
            const auto ev = clocks.events_up_to(1.0);
            if (ev.size() != 1) continue;
            const auto p = standard_paths(v00, clocks, 1.0, 2.0);
            REQUIRE(!p.running.empty());
            CHECK(p.running.front().t == ev.front().t);
            REQUIRE(!p.delta_minus.empty());
            CHECK(p.delta_minus.front().t == 1.0);
            REQUIRE(!p.delta_plus.empty());
            CHECK(p.delta_plus.front().t == 0.0);
            CHECK(p.delta_plus.front().v == p.delta_minus.front().v);
            break;
        }
    }
    SECTION("cone order O <= z- <= R <= z+ at dyadic times") {
        const KillingClocks clocks(17, 0.6);
        const auto p = standard_paths(v00, clocks, 0.5, 8.0);
        const Vertex v0{0, 0};
        for (double t = 0.0; t <= 8.0; t += 0.125) {
            const Vertex o = v0;
            const Vertex zm = path_value(p.delta_minus, v0, t);
            const Vertex r = path_value(p.running, v0, t);
            const Vertex zp = path_value(p.delta_plus, v0, t);
            CHECK(cone_leq(o, zm));
            CHECK(cone_leq(zm, r));
            CHECK(cone_leq(r, zp));
        }
    }
}

TEST_CASE("delta sandwich has no order violations") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto res =
            coupled_delta_sandwich(Interface::cone({0, 0}), 0.5, 1.0, 10.0, seed, false);
        CHECK(res.violations.empty());
        CHECK(interface_leq(res.finals[0], res.finals[1]));
        CHECK(interface_leq(res.finals[1], res.finals[2]));
    }
}

TEST_CASE("delta sandwich degenerate cases") {
    SECTION("J = 0 leaves all members identical") {
        const auto res = coupled_delta_sandwich(random_interface(4), 0.0, 1.0, 6.0, 3, true);
        CHECK(res.finals[0] == res.finals[1]);
        CHECK(res.finals[1] == res.finals[2]);
        CHECK(res.births == 0);
        CHECK(res.deaths == 0);
    }
    SECTION("large delta: the lower member sees no killing before T") {
        const double T = 5.0;
        const auto res = coupled_delta_sandwich(Interface::cone({0, 0}), 0.8, 64.0, T, 12, true);
        const ArrowStream arrows(key_of({12ULL, 0xA440ULL}));
        CHECK(res.finals[0] == harris_evolve(Interface::cone({0, 0}), arrows, 0.0, T));
    }
}

TEST_CASE("centered evolution") {
    SECTION("no clocks: vertex stays at the origin") {
        const auto res = centered_evolve(Interface::cone({0, 0}), 0.0, 12.0, 5);
        CHECK(vertex(res.final_interface) == Vertex{0, 0});
    }
    SECTION("single death on the bare cone keeps the cone") {
        // max{theta_{(-1,1)} V_o, V_o} = V_o
        const Interface v00 = Interface::cone({0, 0});
        CHECK(cone_join(translate(v00, -1, 1), {0, 0}) == v00);
    }
    SECTION("vertex pinned at the origin along the run") {
        const auto res = centered_evolve_hooked(
            Interface::cone({0, 0}), 0.7, 30.0, 21,
            [&](const EngineEvent&, const Interface& xi) {
                REQUIRE(vertex(xi) == Vertex{0, 0});
            });
        CHECK(res.events > 20);
    }
    SECTION("rejects off-origin starts") {
        CHECK_THROWS_AS(centered_evolve(Interface::cone({1, 1}), 0.5, 1.0, 1),
                        std::invalid_argument);
    }
}

TEST_CASE("rate ordering coupling") {
    SECTION("equal rates give identical trajectories") {
        const auto res = coupled_rate_ordering(Interface::cone({0, 0}), 0.8, 0.8, 15.0, 9);
        CHECK(res.violations.empty());
        CHECK(res.finals[0] == res.finals[1]);
    }
    SECTION("J' = 0 dominates: it never gets pulled to the cone") {
        const auto res = coupled_rate_ordering(Interface::cone({0, 0}), 1.0, 0.0, 10.0, 14);
        CHECK(res.violations.empty());
        const ArrowStream arrows(key_of({14ULL, 0xA440ULL}));
        CHECK(res.finals[1] == harris_evolve(Interface::cone({0, 0}), arrows, 0.0, 10.0));
        CHECK(interface_leq(res.finals[0], res.finals[1]));
    }
    SECTION("strict thinning keeps order over several seeds") {
        for (std::uint64_t seed = 0; seed < 8; ++seed) {
            const auto res = coupled_rate_ordering(Interface::cone({0, 0}), 1.0, 0.5, 12.0, seed);
            CHECK(res.violations.empty());
        }
    }
}

TEST_CASE("height identity") {
    SECTION("time zero identity") {
        for (std::uint64_t s = 0; s < 20; ++s) {
            const Interface xi = random_interface(s);
            const ParticleConfig eta = to_particles(xi);
            Height twice_sum = 0;
            for (Site x = 0; x <= eta.right_boundary(); ++x) twice_sum += 2 * eta.at(x);
            CHECK(xi.at(0) == twice_sum);
        }
    }
    SECTION("exact along random runs") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const auto res = height_identity_check(random_interface(seed), 0.5, 15.0, seed);
            CHECK(res.ok);
            CHECK(res.events_checked > 0);
        }
    }
}

TEST_CASE("interface evolution maps to a valid particle evolution") {
    // every arrow event is an exclusion swap or a no-op; every clock event a
    // birth or death of the mapped configuration
    const Interface xi0 = Interface::cone({0, 0});
    const ArrowStream arrows(key_of({33ULL, 0xA440ULL}));
    const KillingClocks clocks(key_of({33ULL, 0xC10CULL}), 0.6);
    const auto events = clocks.events_up_to(20.0);
    VertexPath path;
    Vertex v{0, 0};
    for (const auto& e : events) {
        v = Vertex{v.v1 + (e.birth ? 1 : -1), v.v2 + 1};
        path.push_back({e.t, v});
    }
    std::vector<CoupledMember> ms{{xi0, actions_from_path(path), 0}};
    ParticleConfig eta = to_particles(xi0);
    std::size_t next_clock = 0;
    evolve_coupled(ms, arrows, 0.0, 20.0, [&](const EngineEvent& ev) {
        if (ev.is_arrow) {
            if (ev.changed) {
                // the flip at x swaps the bond (x-1, x)
                REQUIRE(eta.swap_bond(ev.site - 1));
            }
        } else {
            while (next_clock < events.size() && events[next_clock].t <= ev.t) {
                if (events[next_clock].birth)
                    eta.birth_leftmost();
                else
                    eta.kill_rightmost();
                ++next_clock;
            }
        }
        REQUIRE(to_particles(ms[0].xi) == eta);
    });
}
