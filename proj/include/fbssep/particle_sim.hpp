#pragma once

// Continuous-time Markov simulation of the exclusion process with boundary
// birth/death: symmetric exchanges at rate 1/2 on every bond in [L-1, R]
// (bonds outside are no-ops), death of the rightmost particle and birth at
// the leftmost hole at rate J each. Event times and outcomes are a
// deterministic function of (eta0, J, T, seed).

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fbssep/common.hpp"
#include "fbssep/lattice.hpp"
#include "fbssep/rng.hpp"
#include "fbssep/stats.hpp"

namespace fbssep {

enum class ParticleEventKind { Exchange, Birth, Death };

struct ParticleEvent {
    double t;
    ParticleEventKind kind;
    Site site;  // left site of the exchanged bond; L resp. R for birth/death
};

struct ParticleSnapshot {
    double t;
    ParticleConfig config;
};

struct ParticleTrajectory {
    ParticleConfig initial;
    ParticleConfig final_config;
    double t_end = 0.0;
    std::int64_t births = 0;  // A_T
    std::int64_t deaths = 0;  // B_T
    std::vector<ParticleEvent> events;       // state-changing events
    std::vector<ParticleSnapshot> snapshots;
};

class ParticleSimulator {
  public:
    ParticleSimulator(ParticleConfig eta0, double j, std::uint64_t seed, bool centered = false,
                      std::uint64_t event_cap = 100000000ULL)
        : eta_(std::move(eta0)),
          j_(j),
          centered_(centered),
          rng_(key_of({seed, 0x9A57ULL})),
          event_cap_(event_cap) {
        if (j_ < 0.0) throw std::invalid_argument("ParticleSimulator: J must be >= 0");
        med2_ = median_times2(eta_);
        if (centered_ && med2_ != 1)
            throw std::invalid_argument("ParticleSimulator: centered mode needs median 1/2");
    }

    const ParticleConfig& config() const { return eta_; }
    double time() const { return t_; }
    std::int64_t births() const { return births_; }
    std::int64_t deaths() const { return deaths_; }
    Site median2() const { return med2_; }

    // Runs until time T. on_event(const ParticleEvent&, const ParticleSimulator&)
    // fires after each state-changing event.
    template <class F>
    void run_until(double T, F&& on_event) {
        while (true) {
            const Site nbonds = eta_.width() + 2;  // bonds in [L-1, R]
            const double total = 0.5 * static_cast<double>(nbonds) + 2.0 * j_;
            const double dt = rng_.exp1() / total;
            if (t_ + dt > T) {
                t_ = T;
                return;
            }
            t_ += dt;
            if (++event_count_ > event_cap_)
                throw std::runtime_error(
                    "ParticleSimulator: event cap exceeded (" + std::to_string(event_cap_) +
                    " events by t=" + std::to_string(t_) + "); raise the cap or shorten the run");
            const double u = rng_.u01() * total;
            if (u < 0.5 * static_cast<double>(nbonds)) {
                const Site bond = eta_.left_boundary() - 1 + static_cast<Site>(u / 0.5);
                if (eta_.swap_bond(bond)) {
                    on_event(ParticleEvent{t_, ParticleEventKind::Exchange, bond}, *this);
                }
            } else if (u < 0.5 * static_cast<double>(nbonds) + j_) {
                const Site r = eta_.right_boundary();
                eta_.kill_rightmost();
                ++deaths_;
                med2_ -= 2;
                if (centered_) {
                    eta_.translate(1);
                    med2_ += 2;
                }
                on_event(ParticleEvent{t_, ParticleEventKind::Death, r}, *this);
            } else {
                const Site l = eta_.left_boundary();
                eta_.birth_leftmost();
                ++births_;
                med2_ += 2;
                if (centered_) {
                    eta_.translate(-1);
                    med2_ -= 2;
                }
                on_event(ParticleEvent{t_, ParticleEventKind::Birth, l}, *this);
            }
        }
    }

  private:
    ParticleConfig eta_;
    double j_;
    bool centered_;
    SplitMix64 rng_;
    std::uint64_t event_cap_;
    std::uint64_t event_count_ = 0;
    double t_ = 0.0;
    std::int64_t births_ = 0;
    std::int64_t deaths_ = 0;
    Site med2_ = 0;
};

namespace detail {

inline ParticleTrajectory run_trajectory(ParticleConfig eta0, double j, double T,
                                         std::uint64_t seed, bool centered,
                                         const std::vector<double>& sample_times) {
    ParticleTrajectory out;
    out.initial = eta0;
    ParticleSimulator sim(std::move(eta0), j, seed, centered);
    std::size_t next_sample = 0;
    auto record_samples_up_to = [&](double t, const ParticleConfig& cfg) {
        while (next_sample < sample_times.size() && sample_times[next_sample] <= t) {
            out.snapshots.push_back({sample_times[next_sample], cfg});
            ++next_sample;
        }
    };
    ParticleConfig prev = sim.config();
    sim.run_until(T, [&](const ParticleEvent& ev, const ParticleSimulator& s) {
        record_samples_up_to(ev.t, prev);
        prev = s.config();
        out.events.push_back(ev);
    });
    record_samples_up_to(T, sim.config());
    out.final_config = sim.config();
    out.t_end = T;
    out.births = sim.births();
    out.deaths = sim.deaths();
    return out;
}

}  // namespace detail

inline ParticleTrajectory simulate_particle(const ParticleConfig& eta0, double j, double T,
                                            std::uint64_t seed,
                                            const std::vector<double>& sample_times = {}) {
    return detail::run_trajectory(eta0, j, T, seed, false, sample_times);
}

inline ParticleTrajectory simulate_centered(const ParticleConfig& eta0, double j, double T,
                                            std::uint64_t seed,
                                            const std::vector<double>& sample_times = {}) {
    if (median_times2(eta0) != 1)
        throw std::invalid_argument("simulate_centered: initial median must be 1/2");
    return detail::run_trajectory(eta0, j, T, seed, true, sample_times);
}

struct WidthEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t batches = 0;
};

// Time average of R - L + 1 over [T_burn, T_burn + T_avg] along the centered
// process started from the step profile; standard error from batch means.
inline WidthEstimate estimate_invariant_width(double j, double t_burn, double t_avg,
                                              std::uint64_t seed, std::size_t n_batches = 100) {
    if (j <= 0.0) throw std::invalid_argument("estimate_invariant_width: J must be > 0");
    if (t_burn <= 0.0 || t_avg <= 0.0)
        throw std::invalid_argument("estimate_invariant_width: times must be > 0");
    ParticleSimulator sim(ParticleConfig::heaviside(1), j, seed, true);
    sim.run_until(t_burn, [](const ParticleEvent&, const ParticleSimulator&) {});

    const double batch_len = t_avg / static_cast<double>(n_batches);
    std::vector<double> batch_integral(n_batches, 0.0);
    double t_prev = t_burn;
    Site width_prev = sim.config().width();
    auto accumulate = [&](double upto) {
        // spread the piecewise-constant width over the batches it spans
        double a = t_prev;
        while (a < upto - 1e-15) {
            const auto idx_raw = static_cast<std::size_t>((a - t_burn) / batch_len);
            const std::size_t idx = idx_raw >= n_batches ? n_batches - 1 : idx_raw;
            const double cell_end = t_burn + batch_len * static_cast<double>(idx + 1);
            const double b = std::min(upto, cell_end);
            batch_integral[idx] += static_cast<double>(width_prev) * (b - a);
            a = b;
        }
        t_prev = upto;
    };
    sim.run_until(t_burn + t_avg, [&](const ParticleEvent& ev, const ParticleSimulator& s) {
        accumulate(ev.t);
        width_prev = s.config().width();
    });
    accumulate(t_burn + t_avg);

    std::vector<double> means;
    means.reserve(n_batches);
    for (double v : batch_integral) means.push_back(v / batch_len);
    MeanVar mv;
    for (double m : means) mv.add(m);
    return {mv.mean, mv.stderror(), n_batches};
}

struct DriftEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t replicas = 0;
};

// Monte Carlo estimate of (E[psi(eta_dt)] - psi(eta0)) / dt, which for small
// dt approximates the generator applied to psi: 1/2 - J (R - L + 1).
inline DriftEstimate drift_check_psi(const ParticleConfig& eta0, double j, double dt,
                                     std::size_t replicas, std::uint64_t seed) {
    if (dt <= 0.0) throw std::invalid_argument("drift_check_psi: dt must be > 0");
    const auto psi0 = static_cast<double>(lyapunov_psi(eta0));
    MeanVar mv;
    for (std::size_t r = 0; r < replicas; ++r) {
        ParticleSimulator sim(eta0, j, key_of({seed, r, 0xD21FULL}), false);
        sim.run_until(dt, [](const ParticleEvent&, const ParticleSimulator&) {});
        mv.add((static_cast<double>(lyapunov_psi(sim.config())) - psi0) / dt);
    }
    return {mv.mean, mv.stderror(), replicas};
}

}  // namespace fbssep
