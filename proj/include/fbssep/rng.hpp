#pragma once

// Counter-based random streams. Every stream is keyed by (seed, role tags,
// cell index), so any consumer asking for the points of a given stream in a
// given unit time cell gets the same answer regardless of query order or
// which of several coupled processes asks. This is what makes the shared
// randomness couplings exact.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "fbssep/common.hpp"

namespace fbssep {

struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t s) : state(s) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // strictly positive Exp(1) draw
    double exp1() {
        double u;
        do { u = u01(); } while (u <= 0.0);
        return -std::log(u);
    }
};

inline std::uint64_t mix_key(std::uint64_t h, std::uint64_t v) {
    v *= 0xFF51AFD7ED558CCDULL;
    v ^= v >> 33;
    v *= 0xC4CEB9FE1A85EC53ULL;
    v ^= v >> 29;
    h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    return h;
}

inline std::uint64_t key_of(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x243F6A8885A308D3ULL;
    for (std::uint64_t p : parts) h = mix_key(h, p);
    return h;
}

// Poisson point process of constant rate on [0, inf), materialized one unit
// cell at a time as exponential gaps from a generator keyed by
// (seed, tags..., cell). Points are strictly increasing within a cell.
class PoissonCellStream {
  public:
    PoissonCellStream(std::uint64_t seed, std::uint64_t tag, double rate)
        : seed_(seed), tag_(tag), rate_(rate) {}

    double rate() const { return rate_; }

    std::vector<double> cell_events(std::int64_t cell) const {
        std::vector<double> ts;
        if (rate_ <= 0.0) return ts;
        SplitMix64 g(key_of({seed_, tag_, static_cast<std::uint64_t>(cell), 0x5175ULL}));
        double t = static_cast<double>(cell);
        for (;;) {
            t += g.exp1() / rate_;
            if (t >= static_cast<double>(cell) + 1.0) break;
            ts.push_back(t);
        }
        return ts;
    }

    // Deterministic per-event coin, used for thinning couplings.
    double event_coin(std::int64_t cell, std::size_t index) const {
        SplitMix64 g(key_of({seed_, tag_, static_cast<std::uint64_t>(cell),
                             static_cast<std::uint64_t>(index), 0xC01EULL}));
        return g.u01();
    }

    // All events in [0, tmax], in order.
    std::vector<double> events_up_to(double tmax) const {
        std::vector<double> out;
        if (rate_ <= 0.0 || tmax <= 0.0) return out;
        const std::int64_t last = static_cast<std::int64_t>(std::floor(tmax));
        for (std::int64_t c = 0; c <= last; ++c)
            for (double t : cell_events(c))
                if (t <= tmax) out.push_back(t);
        return out;
    }

  private:
    std::uint64_t seed_;
    std::uint64_t tag_;
    double rate_;
};

// Up/down arrow streams of rate 1/2 per site. The two directions are
// distinct streams; collapsing them into one mark stream would break the
// order preservation of the coupling.
class ArrowStream {
  public:
    explicit ArrowStream(std::uint64_t seed, double rate = 0.5) : seed_(seed), rate_(rate) {}

    double rate() const { return rate_; }
    std::uint64_t seed() const { return seed_; }

    std::vector<double> cell_arrows(Site x, std::int64_t cell, bool up) const {
        PoissonCellStream s(seed_, key_of({static_cast<std::uint64_t>(x), up ? 0xA1ULL : 0xB2ULL}),
                            rate_);
        return s.cell_events(cell);
    }

  private:
    std::uint64_t seed_;
    double rate_;
};

// Birth (A) and death (B) clocks of rate J, independent of the arrows.
struct ClockEvent {
    double t;
    bool birth;  // birth at the leftmost hole / death of the rightmost particle
};

class KillingClocks {
  public:
    KillingClocks(std::uint64_t seed, double j)
        : births_(seed, 0xAAAAULL, j), deaths_(seed, 0xBBBBULL, j), j_(j) {}

    double rate() const { return j_; }

    // Merged births and deaths in [0, tmax], time ordered. Ties broken
    // deterministically (births first), a null event a.s.
    std::vector<ClockEvent> events_up_to(double tmax) const {
        std::vector<ClockEvent> out;
        auto a = births_.events_up_to(tmax);
        auto b = deaths_.events_up_to(tmax);
        out.reserve(a.size() + b.size());
        std::size_t i = 0, k = 0;
        while (i < a.size() || k < b.size()) {
            if (k >= b.size() || (i < a.size() && a[i] <= b[k]))
                out.push_back({a[i++], true});
            else
                out.push_back({b[k++], false});
        }
        return out;
    }

    // Thinned copy: keeps each event independently with probability
    // j_sub / j, using per-event coins keyed off this stream. The result is
    // a rate j_sub clock with A' subset of A, B' subset of B.
    std::vector<ClockEvent> thinned_events_up_to(double tmax, double j_sub) const {
        if (j_sub > j_)
            throw std::invalid_argument("thinned_events_up_to: j_sub must be <= j");
        std::vector<ClockEvent> out;
        if (j_ <= 0.0) return out;
        const double p = j_sub / j_;
        const std::int64_t last = static_cast<std::int64_t>(std::floor(tmax));
        for (std::int64_t c = 0; c <= last; ++c) {
            auto a = births_.cell_events(c);
            for (std::size_t i = 0; i < a.size(); ++i)
                if (a[i] <= tmax && births_.event_coin(c, i) < p) out.push_back({a[i], true});
            auto b = deaths_.cell_events(c);
            for (std::size_t i = 0; i < b.size(); ++i)
                if (b[i] <= tmax && deaths_.event_coin(c, i) < p) out.push_back({b[i], false});
        }
        std::sort(out.begin(), out.end(),
                  [](const ClockEvent& u, const ClockEvent& v) { return u.t < v.t; });
        return out;
    }

  private:
    PoissonCellStream births_;
    PoissonCellStream deaths_;
    double j_;
};

}  // namespace fbssep
