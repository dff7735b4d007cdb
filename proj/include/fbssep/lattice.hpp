#pragma once

// Exact integer-lattice types: particle configurations that are finite
// perturbations of a step profile, +-1 slope height functions coinciding
// with a cone outside a finite window, and the static maps between them.

#include <algorithm>
#include <cstdlib>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fbssep/common.hpp"

namespace fbssep {

// ---------------------------------------------------------------------------
// Vertex of a cone V_v(x) = |x - v1| + v2. Proper vertices have v2 >= 0 and
// v1 + v2 even; translated interfaces may transiently carry v2 < 0.
struct Vertex {
    Site v1 = 0;
    Height v2 = 0;

    friend bool operator==(const Vertex&, const Vertex&) = default;
};

inline bool vertex_parity_ok(const Vertex& v) { return ((v.v1 + v.v2) & 1) == 0; }
inline bool vertex_proper(const Vertex& v) { return v.v2 >= 0 && vertex_parity_ok(v); }

// Cone order: v <= w iff V_v <= V_w pointwise iff w2 - v2 >= |w1 - v1|.
inline bool cone_leq(const Vertex& v, const Vertex& w) {
    return w.v2 - v.v2 >= std::abs(w.v1 - v.v1);
}

inline Height cone_value(const Vertex& v, Site x) { return std::abs(x - v.v1) + v.v2; }

// ---------------------------------------------------------------------------
// ParticleConfig: eta(x) = 1 for x < window_start, 0 for x > window_end,
// stored bits in between. Canonical form: empty window (pure step 1{x<anchor})
// or first bit 0 and last bit 1, so window_start = L(eta), window_end = R(eta).
class ParticleConfig {
  public:
    ParticleConfig() : start_(1) {}  // step at the origin: 1{x<1} = 1{x<=0}

    static ParticleConfig heaviside(Site anchor) {
        ParticleConfig c;
        c.start_ = anchor;
        return c;
    }

    static ParticleConfig from_bits(Site start, std::vector<std::uint8_t> bits) {
        ParticleConfig c;
        c.start_ = start;
        c.bits_ = std::move(bits);
        c.trim();
        return c;
    }

    int at(Site x) const {
        if (x < start_) return 1;
        const Site off = x - start_;
        if (off >= static_cast<Site>(bits_.size())) return 0;
        return bits_[static_cast<std::size_t>(off)];
    }
    int operator()(Site x) const { return at(x); }

    bool is_heaviside() const { return bits_.empty(); }

    // L(eta): leftmost hole.
    Site left_boundary() const { return start_; }
    // R(eta): rightmost particle; for the pure step this is L - 1.
    Site right_boundary() const { return start_ + static_cast<Site>(bits_.size()) - 1; }
    // R - L + 1 >= 0, zero exactly for the pure step.
    Site width() const { return static_cast<Site>(bits_.size()); }

    const std::vector<std::uint8_t>& bits() const { return bits_; }

    // -- mutators used by the simulation ------------------------------------

    // Exchange the contents of sites x and x+1. Returns true if the
    // configuration changed. Only bonds inside [L-1, R] can change anything.
    bool swap_bond(Site x) {
        const int a = at(x), b = at(x + 1);
        if (a == b) return false;
        grow_to(x);
        grow_to(x + 1);
        std::swap(bits_[static_cast<std::size_t>(x - start_)],
                  bits_[static_cast<std::size_t>(x + 1 - start_)]);
        trim();
        return true;
    }

    // Death of the rightmost particle.
    void kill_rightmost() {
        if (bits_.empty()) {
            start_ -= 1;  // step moves left by one
            return;
        }
        bits_.back() = 0;
        trim();
    }

    // Birth at the leftmost hole.
    void birth_leftmost() {
        if (bits_.empty()) {
            start_ += 1;
            return;
        }
        bits_.front() = 1;
        trim();
    }

    void translate(Site k) { start_ += k; }

    ParticleConfig translated(Site k) const {
        ParticleConfig c(*this);
        c.start_ += k;
        return c;
    }

    bool valid() const {
        if (bits_.empty()) return true;
        return bits_.front() == 0 && bits_.back() == 1;
    }

    friend bool operator==(const ParticleConfig& a, const ParticleConfig& b) {
        return a.start_ == b.start_ && a.bits_ == b.bits_;
    }

  private:
    void grow_to(Site x) {
        if (x < start_) {
            bits_.insert(bits_.begin(), static_cast<std::size_t>(start_ - x), 1);
            start_ = x;
        } else if (x > start_ + static_cast<Site>(bits_.size()) - 1) {
            bits_.insert(bits_.end(),
                         static_cast<std::size_t>(x - (start_ + static_cast<Site>(bits_.size())) + 1),
                         0);
        }
    }

    void trim() {
        std::size_t lead = 0;
        while (lead < bits_.size() && bits_[lead] == 1) ++lead;
        if (lead > 0) {
            bits_.erase(bits_.begin(), bits_.begin() + static_cast<std::ptrdiff_t>(lead));
            start_ += static_cast<Site>(lead);
        }
        while (!bits_.empty() && bits_.back() == 0) bits_.pop_back();
    }

    Site start_;
    std::vector<std::uint8_t> bits_;
};

// (L, R) of a configuration.
inline std::pair<Site, Site> boundaries(const ParticleConfig& eta) {
    return {eta.left_boundary(), eta.right_boundary()};
}

// Twice the median: the unique half-integer m with
// #particles right of m == #holes left of m, returned as 2m (exact).
inline Site median_times2(const ParticleConfig& eta) {
    // For the step 1{x<s} the median is s - 1/2. A particle at x >= start
    // shifts the balance point right by one, a hole at x < start shifts it
    // left; scanning the window with prefix sums realizes this exactly:
    // m = s - 1/2 + (#particles >= s) - (#holes < s), and all stored holes
    // are >= s, all stored particles >= s, holes beyond window none.
    // Balance: particles right of m minus holes left of m is monotone in m,
    // so locate m by scanning candidates s + k - 1/2 over the window.
    const Site L = eta.left_boundary();
    const Site R = eta.right_boundary();
    if (eta.is_heaviside()) return 2 * L - 1;  // m = L - 1/2
    // particles strictly right of candidate m = x - 1/2  <=>  sites >= x
    // holes strictly left of m  <=>  sites < x
    // Count over candidates x in [L, R+1].
    Site particles_right = 0;
    for (Site x = L; x <= R; ++x) particles_right += eta.at(x);
    Site holes_left = 0;
    for (Site x = L;; ++x) {
        // candidate m = x - 1/2
        if (particles_right == holes_left) return 2 * x - 1;
        if (x > R + 1)
            throw invariant_violation("median: no balance point found");
        particles_right -= eta.at(x);
        holes_left += 1 - eta.at(x);
    }
}

inline double median(const ParticleConfig& eta) {
    return 0.5 * static_cast<double>(median_times2(eta));
}

// psi(eta) = sum_{x<y} (1-eta(x)) eta(y): the number of (hole, particle)
// inversions, i.e. moves 10 -> 01 needed to reach eta from the step profile.
inline std::int64_t lyapunov_psi(const ParticleConfig& eta) {
    std::int64_t holes_seen = 0;
    std::int64_t psi = 0;
    const Site L = eta.left_boundary(), R = eta.right_boundary();
    for (Site x = L; x <= R; ++x) {
        if (eta.at(x))
            psi += holes_seen;
        else
            ++holes_seen;
    }
    return psi;
}

// psi2(eta) = sum_{x<y<z} (1-eta(x)) (1-eta(y)) eta(z).
inline std::int64_t lyapunov_psi2(const ParticleConfig& eta) {
    std::int64_t holes_seen = 0;
    std::int64_t hole_pairs_seen = 0;
    std::int64_t psi2 = 0;
    const Site L = eta.left_boundary(), R = eta.right_boundary();
    for (Site x = L; x <= R; ++x) {
        if (eta.at(x)) {
            psi2 += hole_pairs_seen;
        } else {
            hole_pairs_seen += holes_seen;
            ++holes_seen;
        }
    }
    return psi2;
}

// N0 = holes strictly left of R, N1 = particles strictly right of L.
// Always N0 + N1 = R - L + 1.
inline std::pair<std::int64_t, std::int64_t> hole_particle_counts(const ParticleConfig& eta) {
    const Site L = eta.left_boundary(), R = eta.right_boundary();
    std::int64_t n0 = 0, n1 = 0;
    for (Site x = L; x < R; ++x) n0 += 1 - eta.at(x);
    for (Site x = L + 1; x <= R; ++x) n1 += eta.at(x);
    return {n0, n1};
}

// Quantiles: position of the b-th rightmost particle and of the a-th
// leftmost hole (tie-free by convention: the site is occupied resp. empty).
inline std::pair<Site, Site> micro_quantiles(const ParticleConfig& eta, std::int64_t a,
                                             std::int64_t b) {
    if (a < 1 || b < 1) throw std::invalid_argument("micro_quantiles: a, b must be >= 1");
    const Site L = eta.left_boundary(), R = eta.right_boundary();
    Site rb = 0;
    {
        std::int64_t count = 0;
        Site x = R;
        for (;;) {
            if (eta.at(x)) {
                if (++count == b) {
                    rb = x;
                    break;
                }
            }
            --x;
            if (x < L) {  // remaining particles are the solid left tail
                rb = x - (b - count - 1);
                break;
            }
        }
    }
    Site la = 0;
    {
        std::int64_t count = 0;
        Site x = L;
        for (;;) {
            if (!eta.at(x)) {
                if (++count == a) {
                    la = x;
                    break;
                }
            }
            ++x;
            if (x > R) {  // remaining holes are the empty right tail
                la = x + (a - count - 1);
                break;
            }
        }
    }
    return {la, rb};
}

// Gamma^{a,b}: erase the b rightmost particles (all particles at x >= R^b)
// and fill the a leftmost holes (all holes at x <= L^a).
inline ParticleConfig gamma_micro(const ParticleConfig& eta, std::int64_t a, std::int64_t b) {
    if (a < 0 || b < 0) throw std::invalid_argument("gamma_micro: a, b must be >= 0");
    if (a == 0 && b == 0) return eta;
    ParticleConfig out = eta;
    for (std::int64_t i = 0; i < b; ++i) out.kill_rightmost();
    for (std::int64_t i = 0; i < a; ++i) out.birth_leftmost();
    return out;
}

// ---------------------------------------------------------------------------
// Interface: heights xi(L..R) with |increments| = 1, x + xi(x) even, and
// xi(x) = xi(L) + (L-x) left of L, xi(x) = xi(R) + (x-R) right of R.
// Canonical (trimmed) window: either a single site (pure cone, L = R = v1)
// or xi(L+1) = xi(L)+1 and xi(R) = xi(R-1)-1.
class Interface {
  public:
    Interface() : left_(0), h_{0} {}  // bare cone V_{(0,0)}

    static Interface cone(const Vertex& v) {
        if (!vertex_parity_ok(v)) throw std::invalid_argument("cone: v1 + v2 must be even");
        Interface xi;
        xi.left_ = v.v1;
        xi.h_ = {v.v2};
        return xi;
    }

    // Builds from heights on [left, left + heights.size() - 1] and trims.
    static Interface from_heights(Site left, std::vector<Height> heights) {
        if (heights.empty()) throw std::invalid_argument("from_heights: empty span");
        Interface xi;
        xi.left_ = left;
        xi.h_ = std::move(heights);
        for (std::size_t i = 0; i + 1 < xi.h_.size(); ++i) {
            const Height d = xi.h_[i + 1] - xi.h_[i];
            if (d != 1 && d != -1)
                throw std::invalid_argument("from_heights: increments must be +-1");
        }
        if (((left + xi.h_.front()) & 1) != 0)
            throw std::invalid_argument("from_heights: x + xi(x) must be even");
        xi.trim();
        return xi;
    }

    Height at(Site x) const {
        if (x < left_) return h_.front() + (left_ - x);
        const Site off = x - left_;
        if (off >= static_cast<Site>(h_.size())) return h_.back() + (off - static_cast<Site>(h_.size()) + 1);
        return h_[static_cast<std::size_t>(off)];
    }
    Height operator()(Site x) const { return at(x); }

    Site left() const { return left_; }
    Site right() const { return left_ + static_cast<Site>(h_.size()) - 1; }
    const std::vector<Height>& heights() const { return h_; }

    bool is_cone() const { return h_.size() == 1; }

    // Arrow update: if xi(x-1) == xi(x+1), set xi(x) to xi(x-1) +- 1.
    // Returns true when the height actually changed.
    bool apply_arrow(Site x, bool up) {
        const Height hl = at(x - 1), hr = at(x + 1);
        if (hl != hr) return false;
        const Height target = up ? hl + 1 : hl - 1;
        if (at(x) == target) return false;
        // x is a strict local extremum, hence inside [left-?, right+?]; the
        // span must cover x-1 .. x+1 after the flip.
        grow_to(x - 1);
        grow_to(x + 1);
        h_[static_cast<std::size_t>(x - left_)] = target;
        trim();
        return true;
    }

    bool valid() const {
        if (h_.empty()) return false;
        for (std::size_t i = 0; i + 1 < h_.size(); ++i) {
            const Height d = h_[i + 1] - h_[i];
            if (d != 1 && d != -1) return false;
        }
        if (((left_ + h_.front()) & 1) != 0) return false;
        if (h_.size() == 1) return true;
        if (h_.size() == 2) return false;  // impossible once trimmed
        return h_[1] == h_[0] + 1 && h_[h_.size() - 1] == h_[h_.size() - 2] - 1;
    }

    friend bool operator==(const Interface& a, const Interface& b) {
        return a.left_ == b.left_ && a.h_ == b.h_;
    }

  private:
    friend Interface cone_join(const Interface&, const Vertex&);
    friend Interface translate(const Interface&, Site, Height);

    void grow_to(Site x) {
        while (x < left_) {
            h_.insert(h_.begin(), h_.front() + 1);
            --left_;
        }
        while (x > right()) h_.push_back(h_.back() + 1);
    }

    void trim() {
        std::size_t a = 0, b = h_.size();
        while (b - a > 1 && h_[a] == h_[a + 1] + 1) ++a;  // left tail slope -1
        while (b - a > 1 && h_[b - 1] == h_[b - 2] + 1) --b;  // right tail slope +1
        if (a > 0 || b < h_.size()) {
            h_ = std::vector<Height>(h_.begin() + static_cast<std::ptrdiff_t>(a),
                                     h_.begin() + static_cast<std::ptrdiff_t>(b));
            left_ += static_cast<Site>(a);
        }
    }

    Site left_;
    std::vector<Height> h_;
};

// Vertex from the window data alone.
inline Vertex vertex(const Interface& xi) {
    const Site l = xi.left(), r = xi.right();
    const Height hl = xi.at(l), hr = xi.at(r);
    return Vertex{(hl - hr + l + r) / 2, (hl + hr + l - r) / 2};
}

// Pointwise order; outside the union of windows both sides are cones whose
// difference is constant on each side, so the window span decides.
inline bool interface_leq(const Interface& a, const Interface& b) {
    const Site lo = std::min(a.left(), b.left());
    const Site hi = std::max(a.right(), b.right());
    for (Site x = lo; x <= hi; ++x)
        if (a.at(x) > b.at(x)) return false;
    return true;
}

// max{xi, V_v}, window recomputed.
inline Interface cone_join(const Interface& xi, const Vertex& v) {
    if (!vertex_parity_ok(v)) throw std::invalid_argument("cone_join: v1 + v2 must be even");
    const Site lo = std::min(xi.left(), v.v1) - 1;
    const Site hi = std::max(xi.right(), v.v1) + 1;
    std::vector<Height> h;
    h.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (Site x = lo; x <= hi; ++x) h.push_back(std::max(xi.at(x), cone_value(v, x)));
    Interface out;
    out.left_ = lo;
    out.h_ = std::move(h);
    out.trim();
    return out;
}

// theta_v xi(x) = xi(x - v1) - v2; requires v1 + v2 even to preserve the
// parity of x + xi(x). May produce a transient vertex with v2 < 0.
inline Interface translate(const Interface& xi, Site v1, Height v2) {
    if (((v1 + v2) & 1) != 0) throw std::invalid_argument("translate: v1 + v2 must be even");
    Interface out = xi;
    out.left_ += v1;
    for (Height& h : out.h_) h -= v2;
    return out;
}

// D: particle at x iff xi(x+1) < xi(x). L(D xi) = L(xi), R(D xi) = R(xi) - 1,
// median(D xi) = v1(xi) - 1/2.
inline ParticleConfig to_particles(const Interface& xi) {
    if (xi.is_cone()) return ParticleConfig::heaviside(xi.left());
    const Site l = xi.left(), r = xi.right();
    std::vector<std::uint8_t> bits;
    bits.reserve(static_cast<std::size_t>(r - l));
    for (Site x = l; x < r; ++x) bits.push_back(xi.at(x + 1) < xi.at(x) ? 1 : 0);
    return ParticleConfig::from_bits(l, std::move(bits));
}

// Inverse of D with the vertical gauge fixed by prescribing v2.
inline Interface to_interface(const ParticleConfig& eta, Height v2) {
    const Site v1 = (median_times2(eta) + 1) / 2;
    if (((v1 + v2) & 1) != 0)
        throw std::invalid_argument("to_interface: v2 incompatible with parity of median + 1/2");
    const Site l = eta.left_boundary();
    const Site r = eta.right_boundary() + 1;  // R(xi) = R(eta) + 1
    if (eta.is_heaviside()) return Interface::cone(Vertex{v1, v2});
    // Right tail: xi(x) = (x - v1) + v2 for x >= r; integrate leftwards with
    // slope 1 - 2 eta(x).
    std::vector<Height> h(static_cast<std::size_t>(r - l + 1));
    h.back() = (r - v1) + v2;
    for (Site x = r - 1; x >= l; --x)
        h[static_cast<std::size_t>(x - l)] =
            h[static_cast<std::size_t>(x + 1 - l)] - (1 - 2 * eta.at(x));
    return Interface::from_heights(l, std::move(h));
}

// ---------------------------------------------------------------------------
// Vertex paths: nondecreasing (cone order) step functions driving the
// boundary updates of the interface dynamics.
struct VertexPathEvent {
    double t;
    Vertex v;
};

using VertexPath = std::vector<VertexPathEvent>;

inline void validate_path(const VertexPath& z) {
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i].t < 0.0) throw std::invalid_argument("vertex path: negative time");
        if (!vertex_proper(z[i].v)) throw std::invalid_argument("vertex path: improper vertex");
        if (i > 0) {
            if (z[i].t <= z[i - 1].t)
                throw std::invalid_argument("vertex path: times must be strictly increasing");
            if (!cone_leq(z[i - 1].v, z[i].v))
                throw std::invalid_argument("vertex path: vertices must be nondecreasing");
        }
    }
}

// ---------------------------------------------------------------------------
// Textual round-trip serialization.
//   ParticleConfig:  "<window_start>:<bits>"      e.g. "0:00101", "1:" (step)
//   Interface:       "<L>:<xi(L)>:<increments>"   e.g. "-1:1:+-", "0:0:" (cone)
inline std::string to_string(const ParticleConfig& eta) {
    std::ostringstream os;
    os << eta.left_boundary() << ':';
    for (auto b : eta.bits()) os << (b ? '1' : '0');
    return os.str();
}

inline ParticleConfig particle_config_from_string(const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("particle config: expected '<anchor>:<bits>'");
    const Site start = std::stoll(s.substr(0, colon));
    std::vector<std::uint8_t> bits;
    for (std::size_t i = colon + 1; i < s.size(); ++i) {
        if (s[i] != '0' && s[i] != '1')
            throw std::invalid_argument("particle config: bits must be 0/1");
        bits.push_back(static_cast<std::uint8_t>(s[i] - '0'));
    }
    ParticleConfig c = ParticleConfig::from_bits(start, bits);
    return c;
}

inline std::string to_string(const Interface& xi) {
    std::ostringstream os;
    os << xi.left() << ':' << xi.at(xi.left()) << ':';
    for (Site x = xi.left(); x < xi.right(); ++x) os << (xi.at(x + 1) > xi.at(x) ? '+' : '-');
    return os.str();
}

inline Interface interface_from_string(const std::string& s) {
    const auto c1 = s.find(':');
    const auto c2 = (c1 == std::string::npos) ? std::string::npos : s.find(':', c1 + 1);
    if (c2 == std::string::npos)
        throw std::invalid_argument("interface: expected '<L>:<height>:<incrs>'");
    const Site left = std::stoll(s.substr(0, c1));
    const Height h0 = std::stoll(s.substr(c1 + 1, c2 - c1 - 1));
    std::vector<Height> h{h0};
    for (std::size_t i = c2 + 1; i < s.size(); ++i) {
        if (s[i] == '+')
            h.push_back(h.back() + 1);
        else if (s[i] == '-')
            h.push_back(h.back() - 1);
        else
            throw std::invalid_argument("interface: increments must be +/-");
    }
    return Interface::from_heights(left, std::move(h));
}

}  // namespace fbssep
