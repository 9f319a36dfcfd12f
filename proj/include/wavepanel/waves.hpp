#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "wavepanel/calendar.hpp"
#include "wavepanel/errors.hpp"
#include "wavepanel/panel.hpp"

namespace wavepanel {

// Global phase partition of the analysis window. boundaries[k] is the first
// day of phase k+2, so phase 1 = [window start, boundaries[0] - 1], etc.
struct PhasePartition {
    Date window_start;
    Date window_end;
    std::vector<Date> boundaries;

    size_t n_phases() const { return boundaries.size() + 1; }

    DayInterval phase(size_t k) const {
        Date first = (k == 0) ? window_start : boundaries[k - 1];
        Date last = (k + 1 == n_phases()) ? window_end : boundaries[k].plus_days(-1);
        return DayInterval{first, last};
    }
};

struct WaveInterval {
    std::string country;
    int phase_index = 0;  // 1-based
    DayInterval span;
    DayInterval begin_window;
    DayInterval peak_window;
    Date peak_day;
    double wave_deaths_pm_mean = 0.0;
};

struct WaveSet {
    PhasePartition partition;
    std::vector<WaveInterval> waves;  // country-major, phase order within country
};

// Daily deaths normalized to unit mass over the analysis window; missing
// values count as zero mass.
inline std::vector<double> normalize_deaths(const PanelDataset& ds, int country) {
    const auto& raw = ds.deaths_daily[country];
    std::vector<double> out(raw.size(), 0.0);
    double total = 0.0;
    for (size_t i = 0; i < raw.size(); ++i) {
        double v = std::isnan(raw[i]) ? 0.0 : raw[i];
        out[i] = v;
        total += v;
    }
    if (total <= 0.0) {
        throw DomainError("degenerate country series: " + ds.countries[country] +
                          " has zero total deaths");
    }
    for (double& v : out) v /= total;
    return out;
}

// Pointwise sum of every country's normalized curve; total mass equals the
// number of countries.
inline std::vector<double> pooled_curve(const PanelDataset& ds) {
    std::vector<double> pooled(ds.n_days(), 0.0);
    for (size_t c = 0; c < ds.n_countries(); ++c) {
        std::vector<double> norm = normalize_deaths(ds, static_cast<int>(c));
        for (size_t i = 0; i < pooled.size(); ++i) pooled[i] += norm[i];
    }
    return pooled;
}

// Centered rolling mean; the window shrinks at the edges.
inline std::vector<double> rolling_mean(const std::vector<double>& v, int width) {
    if (width < 1) throw DomainError("rolling_mean: width must be positive");
    int half = width / 2;
    int n = static_cast<int>(v.size());
    std::vector<double> out(v.size());
    for (int i = 0; i < n; ++i) {
        int lo = std::max(0, i - half);
        int hi = std::min(n - 1, i + half);
        double s = 0.0;
        for (int j = lo; j <= hi; ++j) s += v[j];
        out[i] = s / (hi - lo + 1);
    }
    return out;
}

// Phase boundaries at the deepest well-separated interior local minima of the
// smoothed curve. A candidate minimum is a day i with s[i] <= s[i-1] and
// s[i] < s[i+1] (one index per flat trough). The (n_phases - 1) deepest
// candidates at least min_separation days apart become boundaries.
inline PhasePartition find_phase_boundaries(const std::vector<double>& curve, Date window_start,
                                            int smoothing_days, int n_phases,
                                            int min_separation = 60) {
    if (n_phases < 2) throw DomainError("find_phase_boundaries: n_phases must be >= 2");
    if (curve.size() < 3) throw DomainError("find_phase_boundaries: curve too short");
    std::vector<double> s = rolling_mean(curve, smoothing_days);
    int n = static_cast<int>(s.size());

    std::vector<int> candidates;
    for (int i = 1; i + 1 < n; ++i) {
        if (s[i] <= s[i - 1] && s[i] < s[i + 1]) candidates.push_back(i);
    }
    std::sort(candidates.begin(), candidates.end(),
              [&](int a, int b) { return s[a] != s[b] ? s[a] < s[b] : a < b; });

    std::vector<int> chosen;
    for (int idx : candidates) {
        bool ok = true;
        for (int c : chosen) {
            if (std::abs(idx - c) < min_separation) { ok = false; break; }
        }
        if (ok) chosen.push_back(idx);
        if (static_cast<int>(chosen.size()) == n_phases - 1) break;
    }
    if (static_cast<int>(chosen.size()) < n_phases - 1) {
        throw DomainError("insufficient troughs: found " + std::to_string(chosen.size()) +
                          " separated local minima, need " + std::to_string(n_phases - 1));
    }
    std::sort(chosen.begin(), chosen.end());

    PhasePartition part;
    part.window_start = window_start;
    part.window_end = window_start.plus_days(n - 1);
    for (int idx : chosen) part.boundaries.push_back(window_start.plus_days(idx));
    return part;
}

namespace detail {

// Minimal-length contiguous sub-interval of `v` with sum >= frac * total.
// Two-pointer scan; valid because values are nonnegative. Ties on length go
// to the earliest start. Returns {start, end} inclusive indices.
inline std::pair<int, int> minimal_mass_interval(const std::vector<double>& v, double frac) {
    int n = static_cast<int>(v.size());
    double total = 0.0;
    for (double x : v) total += x;
    // Guard against the running-sum drift excluding a valid full interval.
    double target = frac * total - 1e-9 * total;
    int best_len = n + 1, best_start = 0;
    double sum = 0.0;
    int lo = 0;
    for (int hi = 0; hi < n; ++hi) {
        sum += v[hi];
        while (sum - v[lo] >= target && lo < hi) sum -= v[lo++];
        if (sum >= target) {
            int len = hi - lo + 1;
            if (len < best_len) {
                best_len = len;
                best_start = lo;
            }
        }
    }
    return {best_start, best_start + best_len - 1};
}

}  // namespace detail

// The wave inside one phase: the smallest day interval holding at least
// mass_fraction of the country's phase deaths, plus its begin and peak
// decile windows.
inline WaveInterval detect_wave(const PanelDataset& ds, int country, const DayInterval& phase,
                                double mass_fraction = 0.99) {
    if (!(mass_fraction > 0.0 && mass_fraction <= 1.0)) {
        throw DomainError("detect_wave: mass_fraction outside (0,1]");
    }
    int p0 = ds.day_index(phase.first);
    int p1 = ds.day_index(phase.last);
    if (p0 < 0 || p1 >= ds.n_days() || p0 > p1) {
        throw DomainError("detect_wave: phase outside analysis window");
    }
    std::vector<double> v(p1 - p0 + 1);
    double total = 0.0;
    for (int i = p0; i <= p1; ++i) {
        double x = ds.deaths_daily[country][i];
        v[i - p0] = std::isnan(x) ? 0.0 : x;
        total += v[i - p0];
    }
    if (total <= 0.0) {
        throw DomainError("empty phase for country " + ds.countries[country] + " (" +
                          phase.first.to_string() + ".." + phase.last.to_string() + ")");
    }

    auto [s, e] = detail::minimal_mass_interval(v, mass_fraction);

    WaveInterval w;
    w.country = ds.countries[country];
    w.span = DayInterval{phase.first.plus_days(s), phase.first.plus_days(e)};
    int len = e - s + 1;
    int decile = static_cast<int>(std::ceil(0.1 * len));
    if (decile < 1) decile = 1;
    w.begin_window = DayInterval{w.span.first, w.span.first.plus_days(decile - 1)};

    int peak = s;
    for (int i = s; i <= e; ++i) {
        if (v[i] > v[peak]) peak = i;  // earliest day on ties
    }
    w.peak_day = phase.first.plus_days(peak);
    int pk_start = peak, pk_end = peak + decile - 1;
    if (pk_end > e) {  // keep the window inside the wave, length preserved
        pk_end = e;
        pk_start = e - decile + 1;
    }
    w.peak_window = DayInterval{phase.first.plus_days(pk_start), phase.first.plus_days(pk_end)};

    double wave_sum = 0.0;
    for (int i = s; i <= e; ++i) wave_sum += v[i];
    w.wave_deaths_pm_mean = wave_sum / len;
    return w;
}

// One wave per (country, phase). Collects every failure before giving up so
// a single degenerate country reports alongside the rest.
inline WaveSet build_waveset(const PanelDataset& ds, const PhasePartition& partition,
                             double mass_fraction = 0.99) {
    WaveSet ws;
    ws.partition = partition;
    std::string failures;
    for (size_t c = 0; c < ds.n_countries(); ++c) {
        for (size_t p = 0; p < partition.n_phases(); ++p) {
            try {
                WaveInterval w = detect_wave(ds, static_cast<int>(c), partition.phase(p),
                                             mass_fraction);
                w.phase_index = static_cast<int>(p) + 1;
                ws.waves.push_back(std::move(w));
            } catch (const DomainError& err) {
                failures += std::string(failures.empty() ? "" : "; ") + ds.countries[c] +
                            "/phase" + std::to_string(p + 1) + ": " + err.what();
            }
        }
    }
    if (!failures.empty()) throw DomainError("wave detection failed: " + failures);
    return ws;
}

}  // namespace wavepanel
