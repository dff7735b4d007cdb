#pragma once

// Grid-based numerics for the macroscopic evolutions. Profiles are stored as
// piecewise-linear functions with analytic tails (densities: 1 to the left,
// 0 to the right; interfaces: |r| + c). The heat step is a single exact
// convolution of the stored interpolant with the Gaussian kernel of variance
// t, evaluated in closed form cell by cell, so the only discretization error
// is the interpolation of the profile itself. Mass surgery (the quantile cut
// operator) places boundaries at exactly interpolated quantiles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "fbssep/common.hpp"
#include "fbssep/stats.hpp"

namespace fbssep {

struct MacroParams {
    double h = 1e-3;           // grid spacing
    double tail_tol = 1e-10;   // tolerance for snapping tails to their limits
    double median_tol = 1e-2;  // allowed |F(0) - Fhat(0)| drift (10 h)
};

enum class DensityClass { Sharp, Smooth };  // finite boundaries vs. heat-smoothed

namespace pl {

// Linear interpolation inside [x.front(), x.back()].
inline double interp(const std::vector<double>& x, const std::vector<double>& y, double r) {
    const auto it = std::upper_bound(x.begin(), x.end(), r);
    if (it == x.begin()) return y.front();
    if (it == x.end()) return y.back();
    const std::size_t k = static_cast<std::size_t>(it - x.begin()) - 1;
    const double u = x[k], v = x[k + 1];
    const double w = (r - u) / (v - u);
    return y[k] * (1.0 - w) + y[k + 1] * w;
}

// integral of the PL over one cell
inline double cell_mass(double u, double v, double yu, double yv) {
    return 0.5 * (yu + yv) * (v - u);
}

}  // namespace pl

// ---------------------------------------------------------------------------
class MacroDensity {
  public:
    MacroParams prm;
    DensityClass tag = DensityClass::Sharp;
    std::vector<double> x;  // strictly increasing breakpoints
    std::vector<double> y;  // values in [0,1]; rho = 1 left of x.front(), 0 right of x.back()

    static MacroDensity heaviside(MacroParams prm = {}) {
        MacroDensity d;
        d.prm = prm;
        d.x = {0.0};
        d.y = {1.0};
        d.tag = DensityClass::Sharp;
        return d;
    }

    bool is_heaviside() const { return x.size() == 1; }

    double at(double r) const {
        if (r < x.front()) return 1.0;
        if (r > x.back()) return 0.0;
        return pl::interp(x, y, r);
    }

    double support_left() const { return x.front(); }
    double support_right() const { return x.back(); }
};

// F(r) = integral of rho over [r, inf).
inline double mass_right(const MacroDensity& d, double r) {
    double f = 0.0;
    for (std::size_t k = d.x.size(); k-- > 1;) {
        const double u = d.x[k - 1], v = d.x[k];
        if (v <= r) break;
        if (u >= r) {
            f += pl::cell_mass(u, v, d.y[k - 1], d.y[k]);
        } else {
            f += pl::cell_mass(r, v, d.at(r), d.y[k]);
            return f;
        }
    }
    if (r < d.x.front()) f += d.x.front() - r;
    return f;
}

// Fhat(r) = integral of (1 - rho) over (-inf, r].
inline double antimass_left(const MacroDensity& d, double r) {
    double f = 0.0;
    for (std::size_t k = 0; k + 1 < d.x.size(); ++k) {
        const double u = d.x[k], v = d.x[k + 1];
        if (u >= r) break;
        if (v <= r) {
            f += (v - u) - pl::cell_mass(u, v, d.y[k], d.y[k + 1]);
        } else {
            f += (r - u) - pl::cell_mass(u, r, d.y[k], d.at(r));
            return f;
        }
    }
    if (r > d.x.back()) f += r - d.x.back();
    return f;
}

inline double median_imbalance(const MacroDensity& d) {
    return mass_right(d, 0.0) - antimass_left(d, 0.0);
}

namespace detail {

// Solve integral_{v-s}^{v} of the cell's linear density == target for s.
inline double solve_back_from(double yu, double yv, double u, double v, double target) {
    const double m = (yv - yu) / (v - u);
    double s;
    if (std::abs(m) < 1e-14) {
        s = target / std::max(yv, 1e-300);
    } else {
        const double disc = std::max(yv * yv - 2.0 * m * target, 0.0);
        s = (yv - std::sqrt(disc)) / m;
    }
    return std::clamp(s, 0.0, v - u);
}

}  // namespace detail

// Unique points with F(r^delta) = delta and Fhat(l^delta) = delta.
inline std::pair<double, double> macro_quantiles(const MacroDensity& d, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("macro_quantiles: delta must be > 0");
    double r_delta;
    {
        double acc = 0.0;  // F at x[k]
        std::size_t k = d.x.size();
        bool found = false;
        while (k-- > 1) {
            const double cell =
                pl::cell_mass(d.x[k - 1], d.x[k], d.y[k - 1], d.y[k]);
            if (acc + cell >= delta) {
                const double s = detail::solve_back_from(d.y[k - 1], d.y[k], d.x[k - 1], d.x[k],
                                                         delta - acc);
                r_delta = d.x[k] - s;
                found = true;
                break;
            }
            acc += cell;
        }
        if (!found) r_delta = d.x.front() - (delta - acc);  // cut in the solid tail
    }
    double l_delta;
    {
        double acc = 0.0;  // Fhat at x[k]
        bool found = false;
        for (std::size_t k = 0; k + 1 < d.x.size(); ++k) {
            const double cell = (d.x[k + 1] - d.x[k]) -
                                pl::cell_mass(d.x[k], d.x[k + 1], d.y[k], d.y[k + 1]);
            if (acc + cell >= delta) {
                // mirrored solve: antimass accumulated forward from x[k]
                const double s = detail::solve_back_from(1.0 - d.y[k + 1], 1.0 - d.y[k],
                                                         -d.x[k + 1], -d.x[k], delta - acc);
                l_delta = d.x[k] + s;
                found = true;
                break;
            }
            acc += cell;
        }
        if (!found) l_delta = d.x.back() + (delta - acc);
        (void)found;
    }
    return {l_delta, r_delta};
}

// Gamma^delta: removes the rightmost delta of mass and restores delta of
// antimass on the left; falls back to the step profile when the right
// quantile is not positive.
inline MacroDensity gamma_macro(const MacroDensity& d, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("gamma_macro: delta must be > 0");
    if (mass_right(d, 0.0) <= delta) return MacroDensity::heaviside(d.prm);
    const auto [l, r] = macro_quantiles(d, delta);
    if (!(l < 0.0 && r > 0.0))
        throw invariant_violation("gamma_macro: quantiles did not straddle the origin");
    MacroDensity out;
    out.prm = d.prm;
    out.tag = DensityClass::Sharp;
    out.x.push_back(l);
    out.y.push_back(d.at(l));
    for (std::size_t k = 0; k < d.x.size(); ++k)
        if (d.x[k] > l && d.x[k] < r) {
            out.x.push_back(d.x[k]);
            out.y.push_back(d.y[k]);
        }
    out.x.push_back(r);
    out.y.push_back(d.at(r));
    if (std::abs(median_imbalance(out)) > d.prm.median_tol)
        throw invariant_violation("gamma_macro: median drifted by " +
                                  std::to_string(median_imbalance(out)));
    return out;
}

// ---------------------------------------------------------------------------
// Exact-kernel heat step machinery.
namespace detail {

// Accumulates the convolution of a compactly supported piecewise-linear
// function with the Gaussian kernel of variance t, evaluated at r.
inline double pl_convolve(const std::vector<double>& x, const std::vector<double>& y, double t,
                          double r, double cutoff) {
    const double sqt = std::sqrt(t);
    double sum = 0.0;
    // restrict to cells within the kernel cutoff
    const auto lo = std::lower_bound(x.begin(), x.end(), r - cutoff);
    std::size_t k = (lo == x.begin()) ? 0 : static_cast<std::size_t>(lo - x.begin()) - 1;
    double u = x[k];
    double phi_u = normal_cdf((u - r) / sqt);
    double pdf_u = normal_pdf((u - r) / sqt) / sqt;
    for (; k + 1 < x.size(); ++k) {
        const double v = x[k + 1];
        if (u > r + cutoff) break;
        const double phi_v = normal_cdf((v - r) / sqt);
        const double pdf_v = normal_pdf((v - r) / sqt) / sqt;
        const double m = (y[k + 1] - y[k]) / (v - u);
        sum += (y[k] + m * (r - u)) * (phi_v - phi_u) + m * t * (pdf_u - pdf_v);
        u = v;
        phi_u = phi_v;
        pdf_u = pdf_v;
    }
    return sum;
}

inline double grid_floor(double r, double h) { return std::floor(r / h) * h; }
inline double grid_ceil(double r, double h) { return std::ceil(r / h) * h; }

}  // namespace detail

// G_t * rho evaluated in closed form; output on grid nodes, tails snapped
// where they agree with 1/0 to within tail_tol.
inline MacroDensity heat_step(const MacroDensity& d, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("heat_step: t must be > 0");
    const double sqt = std::sqrt(t);
    const double spread = 7.5 * sqt;
    const double h = d.prm.h;
    const double lo = detail::grid_floor(d.x.front() - spread, h);
    const double hi = detail::grid_ceil(d.x.back() + spread, h);
    const auto n = static_cast<std::size_t>(std::llround((hi - lo) / h)) + 1;

    std::vector<double> vals(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = lo + h * static_cast<double>(i);
        double v = normal_cdf((d.x.front() - r) / sqt);  // solid left tail
        v += detail::pl_convolve(d.x, d.y, t, r, spread);
        vals[i] = std::clamp(v, 0.0, 1.0);
    }
    // trim to the window where the profile deviates from its tails
    std::size_t a = 0, b = n - 1;
    while (a + 1 < b && 1.0 - vals[a + 1] <= d.prm.tail_tol) ++a;
    while (b > a + 1 && vals[b - 1] <= d.prm.tail_tol) --b;
    MacroDensity out;
    out.prm = d.prm;
    out.tag = DensityClass::Smooth;
    out.x.reserve(b - a + 1);
    out.y.reserve(b - a + 1);
    for (std::size_t i = a; i <= b; ++i) {
        out.x.push_back(lo + h * static_cast<double>(i));
        out.y.push_back(vals[i]);
    }
    out.y.front() = 1.0;
    out.y.back() = 0.0;
    if (std::abs(median_imbalance(out)) > d.prm.median_tol)
        throw invariant_violation("heat_step: median drifted by " +
                                  std::to_string(median_imbalance(out)));
    return out;
}

// ---------------------------------------------------------------------------
class MacroInterface {
  public:
    MacroParams prm;
    std::vector<double> x;
    std::vector<double> y;
    double tail_offset = 0.0;  // phi(r) = |r| + tail_offset outside the window

    double at(double r) const {
        if (r < x.front() || r > x.back()) return std::abs(r) + tail_offset;
        return pl::interp(x, y, r);
    }

    double cone_height() const { return tail_offset; }
};

// phi from rho: phi(r) = r + 2 F(r) on the right half, -r + 2 Fhat(r) on the
// left, which has exact |r| tails for a median-zero density. The result is
// the interface referred to its own cone (tail offset zero).
inline MacroInterface density_to_interface(const MacroDensity& d) {
    MacroInterface out;
    out.prm = d.prm;
    out.tail_offset = 0.0;
    std::vector<double> xs = d.x;
    if (std::none_of(xs.begin(), xs.end(), [](double v) { return v == 0.0; }))
        xs.insert(std::lower_bound(xs.begin(), xs.end(), 0.0), 0.0);
    out.x = xs;
    out.y.reserve(xs.size());
    for (double r : xs) {
        if (r > 0.0)
            out.y.push_back(r + 2.0 * mass_right(d, r));
        else if (r < 0.0)
            out.y.push_back(-r + 2.0 * antimass_left(d, r));
        else
            out.y.push_back(mass_right(d, 0.0) + antimass_left(d, 0.0));
    }
    return out;
}

// rho = (1 - phi') / 2 by centered differences on the grid.
inline MacroDensity interface_to_density(const MacroInterface& phi) {
    const double h = phi.prm.h;
    const double lo = detail::grid_floor(phi.x.front(), h) - h;
    const double hi = detail::grid_ceil(phi.x.back(), h) + h;
    const auto n = static_cast<std::size_t>(std::llround((hi - lo) / h)) + 1;
    MacroDensity out;
    out.prm = phi.prm;
    out.tag = DensityClass::Smooth;
    out.x.reserve(n);
    out.y.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = lo + h * static_cast<double>(i);
        const double slope = (phi.at(r + h) - phi.at(r - h)) / (2.0 * h);
        if (std::abs(slope) > 1.0 + 1e-6)
            throw invariant_violation("interface_to_density: slope " + std::to_string(slope) +
                                      " breaks the Lipschitz bound");
        out.x.push_back(r);
        out.y.push_back(std::clamp(0.5 * (1.0 - slope), 0.0, 1.0));
    }
    // snap tails
    std::size_t a = 0, b = n - 1;
    while (a + 1 < b && 1.0 - out.y[a + 1] <= 1e-9) ++a;
    while (b > a + 1 && out.y[b - 1] <= 1e-9) --b;
    out.x = std::vector<double>(out.x.begin() + static_cast<std::ptrdiff_t>(a),
                                out.x.begin() + static_cast<std::ptrdiff_t>(b + 1));
    out.y = std::vector<double>(out.y.begin() + static_cast<std::ptrdiff_t>(a),
                                out.y.begin() + static_cast<std::ptrdiff_t>(b + 1));
    out.y.front() = 1.0;
    out.y.back() = 0.0;
    return out;
}

// Exact stationary pair: rho linear with slope -2j on [-1/(4j), 1/(4j)],
// phi the tangent parabola 2 j r^2 + 1/(8j) inside, |r| outside.
inline std::pair<MacroDensity, MacroInterface> stationary_profile(double j, MacroParams prm = {}) {
    if (!(j > 0.0)) throw std::invalid_argument("stationary_profile: j must be > 0");
    const double w = 1.0 / (4.0 * j);
    MacroDensity rho;
    rho.prm = prm;
    rho.tag = DensityClass::Sharp;
    MacroInterface phi;
    phi.prm = prm;
    phi.tail_offset = 0.0;
    const auto k_lo = static_cast<std::int64_t>(std::floor(-w / prm.h)) + 1;
    const auto k_hi = static_cast<std::int64_t>(std::ceil(w / prm.h)) - 1;
    rho.x.push_back(-w);
    rho.y.push_back(1.0);
    phi.x.push_back(-w);
    phi.y.push_back(w);
    for (std::int64_t k = k_lo; k <= k_hi; ++k) {
        const double r = prm.h * static_cast<double>(k);
        rho.x.push_back(r);
        rho.y.push_back(0.5 - 2.0 * j * r);
        phi.x.push_back(r);
        phi.y.push_back(2.0 * j * r * r + 1.0 / (8.0 * j));
    }
    rho.x.push_back(w);
    rho.y.push_back(0.0);
    phi.x.push_back(w);
    phi.y.push_back(w);
    return {rho, phi};
}

// G_t * phi with |r| + c tails: cone part in closed form (folded normal),
// compact remainder by the cell convolution.
inline MacroInterface heat_step(const MacroInterface& phi, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("heat_step: t must be > 0");
    const double sqt = std::sqrt(t);
    const double spread = 7.5 * sqt;
    const double h = phi.prm.h;
    const double c = phi.tail_offset;

    // g = phi - cone on the window, with a breakpoint at 0 for the kink
    std::vector<double> gx = phi.x;
    if (gx.front() < 0.0 && gx.back() > 0.0 &&
        std::none_of(gx.begin(), gx.end(), [](double v) { return v == 0.0; }))
        gx.insert(std::lower_bound(gx.begin(), gx.end(), 0.0), 0.0);
    std::vector<double> gy;
    gy.reserve(gx.size());
    for (double r : gx) gy.push_back(phi.at(r) - (std::abs(r) + c));

    const double lo = detail::grid_floor(gx.front() - spread, h);
    const double hi = detail::grid_ceil(gx.back() + spread, h);
    const auto n = static_cast<std::size_t>(std::llround((hi - lo) / h)) + 1;
    MacroInterface out;
    out.prm = phi.prm;
    out.tail_offset = c;
    out.x.reserve(n);
    out.y.reserve(n);
    std::vector<double> vals(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = lo + h * static_cast<double>(i);
        const double z = r / sqt;
        const double folded = r * (1.0 - 2.0 * normal_cdf(-z)) + 2.0 * sqt * normal_pdf(z);
        vals[i] = folded + c + detail::pl_convolve(gx, gy, t, r, spread);
    }
    std::size_t a = 0, b = n - 1;
    auto tail_dev = [&](std::size_t i) {
        const double r = lo + h * static_cast<double>(i);
        return std::abs(vals[i] - (std::abs(r) + c));
    };
    while (a + 1 < b && tail_dev(a + 1) <= phi.prm.tail_tol) ++a;
    while (b > a + 1 && tail_dev(b - 1) <= phi.prm.tail_tol) --b;
    for (std::size_t i = a; i <= b; ++i) {
        const double r = lo + h * static_cast<double>(i);
        out.x.push_back(r);
        out.y.push_back(i == a || i == b ? std::abs(r) + c : vals[i]);
    }
    return out;
}

// max{phi, V_{(0, c_new)}}; kinks at crossings are represented at grid nodes.
inline MacroInterface cone_max(const MacroInterface& phi, double c_new) {
    MacroInterface out = phi;
    if (c_new <= phi.tail_offset) {
        for (std::size_t i = 0; i < out.x.size(); ++i)
            out.y[i] = std::max(out.y[i], std::abs(out.x[i]) + c_new);
        return out;
    }
    out.tail_offset = c_new;
    for (std::size_t i = 0; i < out.x.size(); ++i)
        out.y[i] = std::max(out.y[i], std::abs(out.x[i]) + c_new);
    // window edges must sit on the new cone; they do by construction since
    // the old edge values |r| + c < |r| + c_new
    return out;
}

// sup |a - b| over the union of breakpoints (exact for the stored objects).
inline double sup_distance(const MacroInterface& a, const MacroInterface& b) {
    double worst = std::abs(a.tail_offset - b.tail_offset);
    auto consider = [&](double r) {
        worst = std::max(worst, std::abs(a.at(r) - b.at(r)));
    };
    for (double r : a.x) consider(r);
    for (double r : b.x) consider(r);
    return worst;
}

inline double sup_distance(const MacroDensity& a, const MacroDensity& b) {
    double worst = 0.0;
    const double eps = 1e-9;
    auto consider = [&](double r) {
        worst = std::max(worst, std::abs(a.at(r) - b.at(r)));
    };
    for (const auto& d : {a, b})
        for (double r : d.x) {
            consider(r - eps);
            consider(r);
            consider(r + eps);
        }
    return worst;
}

// signed max of (a - b) over breakpoints: positive means a exceeds b somewhere
inline double max_excess(const MacroInterface& a, const MacroInterface& b) {
    double worst = -std::numeric_limits<double>::infinity();
    auto consider = [&](double r) { worst = std::max(worst, a.at(r) - b.at(r)); };
    for (double r : a.x) consider(r);
    for (double r : b.x) consider(r);
    consider(a.x.front() - 1.0);
    consider(a.x.back() + 1.0);
    return worst;
}

// ---------------------------------------------------------------------------
// Delta evolutions.

struct DensityTrajectory {
    std::vector<double> times;
    std::vector<MacroDensity> profiles;  // recorded post-cut at multiples of delta
};

// Heat flow on [n delta, (n+1) delta), mass cut j delta at the period ends;
// the upper variant applies the first cut already at time zero.
inline DensityTrajectory delta_evolve(const MacroDensity& rho0, double j, double delta, double T,
                                      int sign, const std::vector<double>& extra_times = {}) {
    if (!(delta > 0.0) || T < 0.0 || j < 0.0 || (sign != -1 && sign != +1))
        throw std::invalid_argument("delta_evolve: bad arguments");
    // permanent-collapse guard: from the step profile one period regains
    // sqrt(delta/2pi) of mass; if that cannot pay for the cut, the evolution
    // is stuck at the step profile forever and delta is too large for j
    if (j > 0.0 && std::sqrt(delta / (2.0 * 3.14159265358979323846)) <= j * delta)
        throw std::invalid_argument(
            "delta_evolve: delta too large for j (heat gain per period cannot match the cut); "
            "choose delta < 1/(2 pi j^2)");
    DensityTrajectory out;
    MacroDensity cur = rho0;
    if (sign == +1 && j > 0.0) cur = gamma_macro(cur, j * delta);
    out.times.push_back(0.0);
    out.profiles.push_back(cur);
    std::size_t extra_i = 0;
    const auto n_steps = static_cast<std::int64_t>(std::floor(T / delta + 1e-12));
    for (std::int64_t n = 1; n <= n_steps; ++n) {
        const double t0 = delta * static_cast<double>(n - 1);
        while (extra_i < extra_times.size() && extra_times[extra_i] < delta * n) {
            const double te = extra_times[extra_i];
            if (te > t0) {
                out.times.push_back(te);
                out.profiles.push_back(heat_step(cur, te - t0));
            }
            ++extra_i;
        }
        cur = heat_step(cur, delta);
        if (j > 0.0) cur = gamma_macro(cur, j * delta);
        out.times.push_back(delta * static_cast<double>(n));
        out.profiles.push_back(cur);
    }
    return out;
}

struct InterfaceTrajectory {
    std::vector<double> times;
    std::vector<MacroInterface> profiles;
    std::vector<double> cone_heights;  // 2 j n delta resp. 2 j (n+1) delta
};

// Interface version: heat steps alternated with the rising-cone join. The
// cone gains 2 j delta of height per period (two boundary killings of mass
// j delta each move the centered interface down by 2 j delta, equivalently
// the uncentered cone up by the same amount). The upper variant anticipates
// one period.
inline InterfaceTrajectory delta_interface_evolve(const MacroInterface& phi0, double j,
                                                  double delta, double T, int sign) {
    if (!(delta > 0.0) || T < 0.0 || j < 0.0 || (sign != -1 && sign != +1))
        throw std::invalid_argument("delta_interface_evolve: bad arguments");
    if (std::abs(phi0.tail_offset) > 1e-12)
        throw std::invalid_argument("delta_interface_evolve: phi0 must have |r| tails");
    InterfaceTrajectory out;
    MacroInterface cur = phi0;
    auto cone_at = [&](std::int64_t n) {
        return 2.0 * j * delta * static_cast<double>(sign == +1 ? n + 1 : n);
    };
    if (sign == +1) cur = cone_max(cur, cone_at(0));
    out.times.push_back(0.0);
    out.profiles.push_back(cur);
    out.cone_heights.push_back(cone_at(0));
    const auto n_steps = static_cast<std::int64_t>(std::floor(T / delta + 1e-12));
    for (std::int64_t n = 1; n <= n_steps; ++n) {
        cur = heat_step(cur, delta);
        cur = cone_max(cur, cone_at(n));
        out.times.push_back(delta * static_cast<double>(n));
        out.profiles.push_back(cur);
        out.cone_heights.push_back(cone_at(n));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Barrier squeeze.

struct BarrierLevel {
    double delta;
    // gap between the barriers referred to their own cone levels, i.e. the
    // sup distance of the centered interfaces; bounded by 2 j delta
    double max_aligned_gap = 0.0;
    // mass-transport gap sup_r |F^- - F^+| (and the antimass mirror): the
    // barriers differ by at most one bite of mass, so this is <= j delta;
    // equals half the aligned interface gap
    double max_mass_gap = 0.0;
    double max_raw_gap = 0.0;  // plain sup(upper - lower); ~ 2 j delta in the tails
    std::vector<double> gap_times;     // update times k delta, k >= 1
    std::vector<double> aligned_gaps;  // per update time
    InterfaceTrajectory lower;
    InterfaceTrajectory upper;

    // aligned gap at the latest update time <= t
    double aligned_gap_at(double t) const {
        double g = 0.0;
        for (std::size_t i = 0; i < gap_times.size(); ++i)
            if (gap_times[i] <= t + 1e-12) g = aligned_gaps[i];
        return g;
    }
};

struct BarrierResult {
    MacroInterface estimate;  // midpoint at T after aligning the upper barrier
    std::vector<BarrierLevel> levels;
    double max_nesting_violation = 0.0;  // of the (5.2)-style chain
    double gap_certificate = 0.0;        // aligned gap of the finest level
};

namespace detail {

inline MacroInterface shifted(const MacroInterface& phi, double dy) {
    MacroInterface out = phi;
    out.tail_offset += dy;
    for (double& v : out.y) v += dy;
    return out;
}

}  // namespace detail

inline BarrierResult barrier_limit(const MacroInterface& phi0, double j, double T, double delta0,
                                   int n_levels) {
    if (n_levels < 1) throw std::invalid_argument("barrier_limit: n_levels must be >= 1");
    BarrierResult res;
    for (int lev = 0; lev < n_levels; ++lev) {
        const double delta = delta0 / std::pow(2.0, lev);
        BarrierLevel L;
        L.delta = delta;
        L.lower = delta_interface_evolve(phi0, j, delta, T, -1);
        L.upper = delta_interface_evolve(phi0, j, delta, T, +1);
        for (std::size_t k = 1; k < L.lower.times.size(); ++k) {
            const auto low = detail::shifted(L.lower.profiles[k], -L.lower.cone_heights[k]);
            const auto up = detail::shifted(L.upper.profiles[k], -L.upper.cone_heights[k]);
            const double gap = sup_distance(low, up);
            L.gap_times.push_back(L.lower.times[k]);
            L.aligned_gaps.push_back(gap);
            L.max_aligned_gap = std::max(L.max_aligned_gap, gap);
            L.max_mass_gap = std::max(L.max_mass_gap, 0.5 * gap);
            L.max_raw_gap =
                std::max(L.max_raw_gap, sup_distance(L.lower.profiles[k], L.upper.profiles[k]));
            // the lower barrier must sit below the upper one pointwise
            const double excess = max_excess(L.lower.profiles[k], L.upper.profiles[k]);
            if (excess > 1e-9)
                throw invariant_violation("barrier_limit: lower exceeded upper by " +
                                          std::to_string(excess));
        }
        res.levels.push_back(std::move(L));
    }
    // nesting of the chain at the common time T: lower nondecreasing in the
    // level, each lower below every coarser upper
    for (int lev = 0; lev + 1 < n_levels; ++lev) {
        const auto& coarse = res.levels[static_cast<std::size_t>(lev)];
        const auto& fine = res.levels[static_cast<std::size_t>(lev + 1)];
        const double v1 = max_excess(coarse.lower.profiles.back(), fine.lower.profiles.back());
        const double v2 = max_excess(fine.lower.profiles.back(), coarse.upper.profiles.back());
        const double v3 = max_excess(fine.upper.profiles.back(), coarse.upper.profiles.back());
        res.max_nesting_violation = std::max({res.max_nesting_violation, v1, v2, v3});
    }
    const auto& finest = res.levels.back();
    const auto low = finest.lower.profiles.back();
    const auto up = detail::shifted(finest.upper.profiles.back(),
                                    finest.lower.cone_heights.back() -
                                        finest.upper.cone_heights.back());
    MacroInterface est = low;
    for (std::size_t i = 0; i < est.x.size(); ++i)
        est.y[i] = 0.5 * (low.at(est.x[i]) + up.at(est.x[i]));
    est.tail_offset = low.tail_offset;
    res.estimate = est;
    res.gap_certificate = finest.max_aligned_gap;
    return res;
}

// Lemma-17-style comparison: for j <= j', the lower barriers satisfy
// phi^j_t - 2 j t >= phi^j'_t - 2 j' t (each side referred to its own cone
// rise). Returns the worst violation; <= tol means the ordering holds.
struct JMonotonicityReport {
    bool ok = true;
    double worst_violation = 0.0;
};

inline JMonotonicityReport j_monotonicity_check(const MacroInterface& phi0, double j,
                                                double j_prime, double delta, double T,
                                                double tol = 1e-6) {
    if (j > j_prime) throw std::invalid_argument("j_monotonicity_check: need j <= j'");
    const auto a = delta_interface_evolve(phi0, j, delta, T, -1);
    const auto b = delta_interface_evolve(phi0, j_prime, delta, T, -1);
    JMonotonicityReport rep;
    for (std::size_t k = 0; k < a.times.size(); ++k) {
        const auto lhs = detail::shifted(a.profiles[k], -a.cone_heights[k]);
        const auto rhs = detail::shifted(b.profiles[k], -b.cone_heights[k]);
        const double excess = max_excess(rhs, lhs);  // rhs must stay below lhs
        rep.worst_violation = std::max(rep.worst_violation, excess);
    }
    rep.ok = rep.worst_violation <= tol;
    return rep;
}

}  // namespace fbssep
