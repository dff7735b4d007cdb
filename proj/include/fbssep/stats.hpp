#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "fbssep/common.hpp"

namespace fbssep {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
}

struct MeanVar {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double stddev() const { return std::sqrt(variance()); }
    double stderror() const { return n > 0 ? stddev() / std::sqrt(static_cast<double>(n)) : 0.0; }
};

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double median_of(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median_of: empty");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Batch-means estimate for a time average: value and standard error.
struct BatchEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t batches = 0;
};

inline BatchEstimate batch_means(const std::vector<double>& batch_values) {
    BatchEstimate e;
    MeanVar mv;
    for (double b : batch_values) mv.add(b);
    e.value = mv.mean;
    e.stderr_ = mv.stderror();
    e.batches = mv.n;
    return e;
}

// Regularized incomplete gamma functions (series + continued fraction).
namespace detail {

inline double gamma_p_series(double a, double x) {
    double sum = 1.0 / a, term = sum;
    for (int n = 1; n < 500; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_cf(double a, double x) {
    // Lentz continued fraction for Q(a, x)
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

// P(a,x) = gamma(a,x)/Gamma(a), Q = 1 - P.
inline double gamma_p(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_p: bad arguments");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return detail::gamma_p_series(a, x);
    return 1.0 - detail::gamma_q_cf(a, x);
}
inline double gamma_q(double a, double x) { return 1.0 - gamma_p(a, x); }

// Upper tail of the chi-square distribution with k degrees of freedom.
inline double chi2_sf(double stat, int dof) {
    if (dof <= 0) return 1.0;
    return gamma_q(0.5 * dof, 0.5 * stat);
}

// Two-sample chi-square homogeneity test on integer-valued samples.
// Bins are pooled greedily until each pooled bin holds at least
// `min_expected` counts in both samples combined.
struct Chi2Result {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    int bins = 0;
};

inline Chi2Result chi2_two_sample(const std::vector<std::int64_t>& xs,
                                  const std::vector<std::int64_t>& ys,
                                  double min_expected = 8.0) {
    if (xs.empty() || ys.empty()) throw std::invalid_argument("chi2_two_sample: empty sample");
    std::map<std::int64_t, std::pair<double, double>> counts;
    for (auto v : xs) counts[v].first += 1.0;
    for (auto v : ys) counts[v].second += 1.0;

    std::vector<std::pair<double, double>> pooled;
    double accx = 0.0, accy = 0.0;
    for (const auto& [value, c] : counts) {
        (void)value;
        accx += c.first;
        accy += c.second;
        if (accx + accy >= min_expected) {
            pooled.emplace_back(accx, accy);
            accx = accy = 0.0;
        }
    }
    if (accx + accy > 0.0) {
        if (!pooled.empty()) {
            pooled.back().first += accx;
            pooled.back().second += accy;
        } else {
            pooled.emplace_back(accx, accy);
        }
    }

    Chi2Result r;
    r.bins = static_cast<int>(pooled.size());
    if (r.bins < 2) {
        r.p_value = 1.0;
        return r;
    }
    const double n1 = static_cast<double>(xs.size());
    const double n2 = static_cast<double>(ys.size());
    const double k1 = std::sqrt(n2 / n1), k2 = std::sqrt(n1 / n2);
    double stat = 0.0;
    for (const auto& [o1, o2] : pooled) {
        const double num = k1 * o1 - k2 * o2;
        stat += num * num / (o1 + o2);
    }
    r.statistic = stat;
    r.dof = r.bins - 1;
    r.p_value = chi2_sf(stat, r.dof);
    return r;
}

}  // namespace fbssep
