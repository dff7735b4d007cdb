#include <catch2/catch_amalgamated.hpp>

#include "fbssep/particle_sim.hpp"

using namespace fbssep;

TEST_CASE("zero-time run is the initial configuration") {
    const auto eta0 = ParticleConfig::from_bits(0, {0, 0, 1});
    const auto traj = simulate_particle(eta0, 0.7, 0.0, 5);
    CHECK(traj.final_config == eta0);
    CHECK(traj.events.empty());
    CHECK(traj.births == 0);
    CHECK(traj.deaths == 0);
}

TEST_CASE("median identity holds pathwise at every event") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        ParticleSimulator sim(ParticleConfig::heaviside(1), 0.5, seed);
        const Site m0 = sim.median2();
        std::size_t checked = 0;
        sim.run_until(50.0, [&](const ParticleEvent&, const ParticleSimulator& s) {
            REQUIRE(s.median2() == median_times2(s.config()));
            REQUIRE(s.median2() == m0 + 2 * (s.births() - s.deaths()));
            ++checked;
        });
        CHECK(checked > 0);
    }
}

TEST_CASE("event logs are deterministic in the seed") {
    const auto eta0 = ParticleConfig::from_bits(0, {0, 1, 0, 1});
    const auto a = simulate_particle(eta0, 0.5, 20.0, 77);
    const auto b = simulate_particle(eta0, 0.5, 20.0, 77);
    REQUIRE(a.events.size() == b.events.size());
    for (std::size_t i = 0; i < a.events.size(); ++i) {
        CHECK(a.events[i].t == b.events[i].t);
        CHECK(a.events[i].kind == b.events[i].kind);
        CHECK(a.events[i].site == b.events[i].site);
    }
    const auto c = simulate_particle(eta0, 0.5, 20.0, 78);
    CHECK(a.events.size() != c.events.size());  // overwhelmingly likely
}

TEST_CASE("birth/death counts are Poisson(J t)") {
    const double j = 0.8, T = 40.0;
    MeanVar a_mv, b_mv;
    for (std::uint64_t r = 0; r < 400; ++r) {
        const auto traj = simulate_particle(ParticleConfig::heaviside(1), j, T, key_of({41, r}));
        a_mv.add(static_cast<double>(traj.births));
        b_mv.add(static_cast<double>(traj.deaths));
    }
    const double mean = j * T;  // = variance
    CHECK_THAT(a_mv.mean, Catch::Matchers::WithinAbs(mean, 4.0 * std::sqrt(mean / 400.0)));
    CHECK_THAT(b_mv.mean, Catch::Matchers::WithinAbs(mean, 4.0 * std::sqrt(mean / 400.0)));
    CHECK_THAT(a_mv.variance() / mean, Catch::Matchers::WithinAbs(1.0, 0.35));
    CHECK_THAT(b_mv.variance() / mean, Catch::Matchers::WithinAbs(1.0, 0.35));
}

TEST_CASE("centered process stays put and keeps its median") {
    std::size_t events = 0;
    ParticleSimulator sim(ParticleConfig::heaviside(1), 4.0, 3, true);
    double width_time = 0.0, t_prev = 0.0;
    Site width_prev = 0;
    sim.run_until(200.0, [&](const ParticleEvent& ev, const ParticleSimulator& s) {
        REQUIRE(median_times2(s.config()) == 1);
        width_time += static_cast<double>(width_prev) * (ev.t - t_prev);
        t_prev = ev.t;
        width_prev = s.config().width();
        ++events;
    });
    width_time += static_cast<double>(width_prev) * (200.0 - t_prev);
    CHECK(events > 100);
    // at J = 4 the stationary width is 1/8; the time average must be small
    CHECK(width_time / 200.0 < 0.5);
}

TEST_CASE("width is nonnegative and zero only at the step profile") {
    ParticleSimulator sim(ParticleConfig::heaviside(1), 0.3, 11);
    sim.run_until(30.0, [&](const ParticleEvent&, const ParticleSimulator& s) {
        REQUIRE(s.config().width() >= 0);
        if (s.config().width() == 0) REQUIRE(s.config().is_heaviside());
    });
}

TEST_CASE("invariant width estimate matches 1/(2J) at moderate effort") {
    const auto est = estimate_invariant_width(0.5, 200.0, 4000.0, 2024);
    CHECK_THAT(est.value, Catch::Matchers::WithinAbs(1.0, 0.12));
    CHECK(est.stderr_ > 0.0);
    CHECK(est.stderr_ < 0.1);
}

TEST_CASE("drift of psi at the step profile") {
    // exact generator value at the step: 1/2 (width term vanishes)
    const auto est = drift_check_psi(ParticleConfig::heaviside(1), 1.0, 0.01, 4000, 9);
    CHECK_THAT(est.value, Catch::Matchers::WithinAbs(0.5, 3.5 * est.stderr_ + 0.02));
}

TEST_CASE("drift of psi at the worked configuration") {
    // eta = step + particle at 2: width 3, J = 1: 1/2 - 3 = -2.5
    const auto eta = ParticleConfig::from_bits(0, {0, 0, 1});
    const auto est = drift_check_psi(eta, 1.0, 0.01, 6000, 10);
    CHECK_THAT(est.value, Catch::Matchers::WithinAbs(-2.5, 3.5 * est.stderr_ + 0.03));
}

TEST_CASE("centered simulation rejects off-median starts") {
    CHECK_THROWS_AS(simulate_centered(ParticleConfig::heaviside(0), 0.5, 1.0, 1),
                    std::invalid_argument);
}

TEST_CASE("snapshots are taken at requested times") {
    const auto traj =
        simulate_particle(ParticleConfig::heaviside(1), 0.5, 10.0, 3, {0.0, 2.5, 10.0});
    REQUIRE(traj.snapshots.size() == 3);
    CHECK(traj.snapshots[0].t == 0.0);
    CHECK(traj.snapshots[0].config == ParticleConfig::heaviside(1));
    CHECK(traj.snapshots[2].config == traj.final_config);
}
