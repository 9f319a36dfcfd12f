#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "wavepanel/distributions.hpp"
#include "wavepanel/errors.hpp"
#include "wavepanel/rng.hpp"

namespace wavepanel {

inline double mean(std::span<const double> v) {
    if (v.empty()) throw DomainError("mean of empty vector");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Sample variance (n-1 divisor).
inline double sample_variance(std::span<const double> v) {
    if (v.size() < 2) throw DomainError("variance needs at least 2 values");
    double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

inline double sample_sd(std::span<const double> v) { return std::sqrt(sample_variance(v)); }

inline double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DomainError("pearson: length mismatch");
    if (x.size() < 3) throw DomainError("pearson: need at least 3 points");
    double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw DomainError("pearson: degenerate variance");
    double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

// Average ranks (1-based); ties share the mean of their rank range.
inline std::vector<double> average_ranks(std::span<const double> v) {
    size_t n = v.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DomainError("spearman: length mismatch");
    std::vector<double> rx = average_ranks(x);
    std::vector<double> ry = average_ranks(y);
    return pearson(rx, ry);
}

// Type-7 quantile (linear interpolation) on a sorted vector.
inline double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw DomainError("quantile of empty vector");
    if (sorted.size() == 1) return sorted[0];
    double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    size_t lo = static_cast<size_t>(std::floor(h));
    if (lo >= sorted.size() - 1) return sorted[sorted.size() - 1];
    double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

struct Quartiles {
    double q1;
    double median;
    double q3;
};

inline Quartiles quartiles(std::span<const double> v) {
    if (v.empty()) throw DomainError("quartiles of empty vector");
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    return Quartiles{quantile_sorted(s, 0.25), quantile_sorted(s, 0.5), quantile_sorted(s, 0.75)};
}

struct CorrelationResult {
    double estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::string method;  // "pearson" | "spearman"
    size_t n = 0;
    size_t bootstrap_reps = 0;
    std::uint64_t seed = 0;
};

// Basic bootstrap interval [2*est - Q(1-a/2), 2*est - Q(a/2)] for a paired
// statistic. Resample r draws its indices from stream r of the master seed,
// so the interval is bit-identical across runs and schedulings. Resamples
// where the statistic is undefined are redrawn (fresh stream), with a cap of
// 10*reps total attempts.
inline std::pair<double, double> bootstrap_ci(
    std::span<const double> x, std::span<const double> y,
    const std::function<double(std::span<const double>, std::span<const double>)>& statistic,
    size_t reps, double alpha, std::uint64_t seed) {
    if (reps < 1) throw DomainError("bootstrap_ci: reps must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("bootstrap_ci: alpha outside (0,1)");
    if (x.size() != y.size() || x.empty()) throw DomainError("bootstrap_ci: bad sample");
    const size_t n = x.size();
    const double estimate = statistic(x, y);

    std::vector<double> stats;
    stats.reserve(reps);
    std::vector<double> bx(n), by(n);
    size_t attempts = 0;
    const size_t max_attempts = 10 * reps;
    std::uint64_t stream = 0;
    while (stats.size() < reps) {
        if (attempts++ >= max_attempts) {
            throw DomainError("bootstrap failed to converge (too many degenerate resamples)");
        }
        SplitMix64 rng(derive_stream_seed(seed, stream++));
        for (size_t i = 0; i < n; ++i) {
            size_t j = static_cast<size_t>(rng.next_below(n));
            bx[i] = x[j];
            by[i] = y[j];
        }
        try {
            stats.push_back(statistic(bx, by));
        } catch (const DomainError&) {
            continue;  // undefined on this resample; redraw
        }
    }
    std::sort(stats.begin(), stats.end());
    double qlo = quantile_sorted(stats, alpha / 2.0);
    double qhi = quantile_sorted(stats, 1.0 - alpha / 2.0);
    return {2.0 * estimate - qhi, 2.0 * estimate - qlo};
}

inline CorrelationResult correlation_with_ci(std::span<const double> x, std::span<const double> y,
                                             const std::string& method, size_t reps, double alpha,
                                             std::uint64_t seed) {
    CorrelationResult res;
    res.method = method;
    res.n = x.size();
    res.bootstrap_reps = reps;
    res.seed = seed;
    std::function<double(std::span<const double>, std::span<const double>)> stat;
    if (method == "pearson") {
        stat = [](std::span<const double> a, std::span<const double> b) { return pearson(a, b); };
    } else if (method == "spearman") {
        stat = [](std::span<const double> a, std::span<const double> b) { return spearman(a, b); };
    } else {
        throw DomainError("unknown correlation method '" + method + "'");
    }
    res.estimate = stat(x, y);
    auto [lo, hi] = bootstrap_ci(x, y, stat, reps, alpha, seed);
    res.ci_low = lo;
    res.ci_high = hi;
    return res;
}

enum class Alternative { greater, less };

struct WilcoxonResult {
    double statistic = 0.0;  // signed-rank sum W+ (ranks of positive differences)
    double p_value = 1.0;
    size_t n_effective = 0;  // nonzero differences
    Alternative alternative = Alternative::greater;
    bool exact = false;
};

namespace detail {

// P(W+ >= w) for the exact null distribution on n untied ranks.
// Subset-sum counts fit exactly in doubles for n <= 25 (2^25 < 2^53).
inline double wilcoxon_exact_upper_tail(int n, double w) {
    int smax = n * (n + 1) / 2;
    std::vector<double> count(static_cast<size_t>(smax) + 1, 0.0);
    count[0] = 1.0;
    for (int r = 1; r <= n; ++r) {
        for (int s = smax; s >= r; --s) count[s] += count[s - r];
    }
    double total = std::ldexp(1.0, n);
    double tail = 0.0;
    int start = static_cast<int>(std::ceil(w - 1e-9));
    for (int s = std::max(start, 0); s <= smax; ++s) tail += count[s];
    return tail / total;
}

}  // namespace detail

// One-sided paired Wilcoxon signed-rank test. alternative = greater tests
// whether x tends to exceed y. Zero differences are dropped; tied absolute
// differences get average ranks. Exact distribution when n_effective <= 25
// and there are no ties; otherwise normal approximation with tie and
// continuity corrections.
inline WilcoxonResult wilcoxon_one_sided(std::span<const double> x, std::span<const double> y,
                                         Alternative alternative) {
    if (x.size() != y.size()) throw DomainError("wilcoxon: length mismatch");
    std::vector<double> diffs;
    diffs.reserve(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - y[i];
        if (d != 0.0) diffs.push_back(d);
    }
    if (diffs.empty()) throw DomainError("wilcoxon: no nonzero differences");
    size_t n = diffs.size();

    std::vector<double> abs_d(n);
    for (size_t i = 0; i < n; ++i) abs_d[i] = std::fabs(diffs[i]);
    std::vector<double> ranks = average_ranks(abs_d);

    double w_plus = 0.0;
    for (size_t i = 0; i < n; ++i) {
        if (diffs[i] > 0.0) w_plus += ranks[i];
    }

    bool has_ties = false;
    {
        std::vector<double> s(abs_d);
        std::sort(s.begin(), s.end());
        for (size_t i = 1; i < n; ++i) {
            if (s[i] == s[i - 1]) { has_ties = true; break; }
        }
    }

    WilcoxonResult res;
    res.statistic = w_plus;
    res.n_effective = n;
    res.alternative = alternative;

    if (n <= 25 && !has_ties) {
        res.exact = true;
        if (alternative == Alternative::greater) {
            res.p_value = detail::wilcoxon_exact_upper_tail(static_cast<int>(n), w_plus);
        } else {
            double smax = static_cast<double>(n * (n + 1)) / 2.0;
            // P(W+ <= w) = P(W+ >= smax - w) by symmetry
            res.p_value = detail::wilcoxon_exact_upper_tail(static_cast<int>(n), smax - w_plus);
        }
    } else {
        res.exact = false;
        double nn = static_cast<double>(n);
        double mu = nn * (nn + 1.0) / 4.0;
        double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0;
        // tie correction: subtract sum(t^3 - t)/48 over tie groups of |d|
        std::vector<double> s(abs_d);
        std::sort(s.begin(), s.end());
        size_t i = 0;
        while (i < n) {
            size_t j = i;
            while (j + 1 < n && s[j + 1] == s[i]) ++j;
            double t = static_cast<double>(j - i + 1);
            if (t > 1.0) var -= (t * t * t - t) / 48.0;
            i = j + 1;
        }
        if (var <= 0.0) throw DomainError("wilcoxon: zero variance after tie correction");
        double z;
        if (alternative == Alternative::greater) {
            z = (w_plus - mu - 0.5) / std::sqrt(var);
            res.p_value = 1.0 - normal_cdf(z);
        } else {
            z = (w_plus - mu + 0.5) / std::sqrt(var);
            res.p_value = normal_cdf(z);
        }
    }
    if (res.p_value <= 0.0) res.p_value = std::numeric_limits<double>::min();
    if (res.p_value > 1.0) res.p_value = 1.0;
    return res;
}

}  // namespace wavepanel
