#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "wavepanel/errors.hpp"
#include "wavepanel/panel.hpp"
#include "wavepanel/rng.hpp"
#include "wavepanel/twfe.hpp"

namespace wavepanel {

// Synthetic weekly-panel generator. The violation knobs realize the two ways
// the additive country+week structure breaks in epidemic data: per-country
// time shifts of the common wave curve, and per-country multiplicative
// scaling of it. mask_reactivity couples masking to the country's own
// (shifted) curve, i.e. masking that responds to the local epidemic.
struct SynthSpec {
    int n_countries = 24;
    int n_weeks = 104;
    std::vector<double> wave_template;  // empty = default two-bump curve
    double country_shift_sd = 0.0;      // weeks
    double country_scale_sd = 0.0;      // log-scale sd of multiplicative factor
    double mask_reactivity = 0.0;
    double true_beta = 0.0;
    double noise_sd = 1.0;
    std::uint64_t seed = 20250101;

    void validate() const {
        if (n_countries < 2) throw DomainError("synth spec: n_countries must be >= 2");
        if (n_weeks < 10) throw DomainError("synth spec: n_weeks must be >= 10");
        if (country_shift_sd < 0.0 || country_scale_sd < 0.0 || noise_sd < 0.0) {
            throw DomainError("synth spec: sds must be nonnegative");
        }
    }
};

// Two Gaussian bumps; mimics the two-trough shape of pooled European
// mortality over 2020-2021.
inline std::vector<double> default_wave_template(int n_weeks) {
    std::vector<double> t(n_weeks, 0.0);
    double c1 = 0.27 * n_weeks, s1 = 0.055 * n_weeks;
    double c2 = 0.65 * n_weeks, s2 = 0.075 * n_weeks;
    for (int w = 0; w < n_weeks; ++w) {
        double d1 = (w - c1) / s1, d2 = (w - c2) / s2;
        t[w] = 40.0 * std::exp(-0.5 * d1 * d1) + 55.0 * std::exp(-0.5 * d2 * d2);
    }
    return t;
}

// Weekly outcome = scale_i * template(t - shift_i) + true_beta * M_it + noise.
// Countries share no additive intercept (a_i = 0): a nonzero a_i would
// accumulate into a country-specific trend in the cumulative outcome and the
// correctly-specified benchmark would no longer have nominal size. Country
// level differences enter through the mask baseline instead. The cumulative
// outcome is the exact prefix sum of the weekly one. Deterministic given the
// seed.
inline PanelDataset synth_panel(const SynthSpec& spec) {
    spec.validate();
    std::vector<double> tmpl =
        spec.wave_template.empty() ? default_wave_template(spec.n_weeks) : spec.wave_template;
    if (static_cast<int>(tmpl.size()) != spec.n_weeks) {
        throw DomainError("synth spec: wave_template length != n_weeks");
    }

    PanelDataset ds;
    ds.week_first = Date::from_ymd(2020, 1, 6);
    ds.week_last = ds.week_first.plus_days(7 * (spec.n_weeks - 1));
    ds.countries.resize(spec.n_countries);
    for (int c = 0; c < spec.n_countries; ++c) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "C%02d", c + 1);
        ds.countries[c] = buf;
    }
    ds.excess_weekly.assign(spec.n_countries, std::vector<double>(spec.n_weeks, 0.0));
    ds.excess_cumulative.assign(spec.n_countries, std::vector<double>(spec.n_weeks, 0.0));
    ds.mask_weekly.assign(spec.n_countries, std::vector<double>(spec.n_weeks, 0.0));

    auto tmpl_at = [&](int w) -> double {
        if (w < 0 || w >= spec.n_weeks) return 0.0;
        return tmpl[w];
    };

    for (int c = 0; c < spec.n_countries; ++c) {
        SplitMix64 rng(derive_stream_seed(spec.seed, static_cast<std::uint64_t>(c)));
        double baseline = 20.0 + 50.0 * rng.next_double();
        double shift_raw = rng.next_normal() * spec.country_shift_sd;
        double shift_cap = 3.0 * spec.country_shift_sd;
        int shift = static_cast<int>(std::llround(std::clamp(shift_raw, -shift_cap, shift_cap)));
        double scale = std::exp(rng.next_normal() * spec.country_scale_sd);

        // Smooth per-country mask drift so exposure always has within
        // variation that week effects cannot absorb.
        double f1 = 1.0 + 2.0 * rng.next_double();
        double f2 = 3.0 + 3.0 * rng.next_double();
        double p1 = rng.next_double() * 6.283185307179586;
        double p2 = rng.next_double() * 6.283185307179586;

        double cum = 0.0;
        for (int w = 0; w < spec.n_weeks; ++w) {
            double local = tmpl_at(w - shift);
            double drift = 6.0 * std::sin(f1 * 6.283185307179586 * w / spec.n_weeks + p1) +
                           3.0 * std::sin(f2 * 6.283185307179586 * w / spec.n_weeks + p2);
            double mask = baseline + spec.mask_reactivity * local + drift;
            mask = std::clamp(mask, 0.0, 100.0);
            ds.mask_weekly[c][w] = mask;

            double y = scale * local + spec.true_beta * mask + spec.noise_sd * rng.next_normal();
            ds.excess_weekly[c][w] = y;
            cum += y;
            ds.excess_cumulative[c][w] = cum;
        }
    }
    return ds;
}

struct FalsifyCell {
    int lag = 0;
    OutcomeKind outcome_kind = OutcomeKind::weekly;
    double mean_beta = 0.0;
    double reject_rate = 0.0;  // share of replications whose 95% CI excludes 0
    std::vector<double> betas;  // raw per-replication estimates
};

struct FalsifyReport {
    SynthSpec spec;
    std::vector<int> lags;
    size_t replications = 0;
    std::vector<FalsifyCell> cells;  // lag-major, weekly then cumulative

    const FalsifyCell& cell(int lag, OutcomeKind kind) const {
        for (const auto& c : cells) {
            if (c.lag == lag && c.outcome_kind == kind) return c;
        }
        throw DomainError("falsify report: no such cell");
    }
};

// Generates `replications` independent panels and fits TWFE at every
// requested lag for both outcome definitions. Per-replication seeds are
// fixed up front, so the report is deterministic and order-independent.
inline FalsifyReport spuriousness_experiment(const SynthSpec& spec, const std::vector<int>& lags,
                                             size_t replications) {
    if (replications < 1) throw DomainError("spuriousness_experiment: replications must be >= 1");
    spec.validate();
    FalsifyReport report;
    report.spec = spec;
    report.lags = lags;
    report.replications = replications;
    for (int lag : lags) {
        for (OutcomeKind kind : {OutcomeKind::weekly, OutcomeKind::cumulative}) {
            FalsifyCell cell;
            cell.lag = lag;
            cell.outcome_kind = kind;
            cell.betas.reserve(replications);
            report.cells.push_back(std::move(cell));
        }
    }

    for (size_t rep = 0; rep < replications; ++rep) {
        SynthSpec rep_spec = spec;
        rep_spec.seed = derive_stream_seed(spec.seed, 0x8000000000000000ULL + rep);
        PanelDataset panel = synth_panel(rep_spec);
        size_t idx = 0;
        for (int lag : lags) {
            for (OutcomeKind kind : {OutcomeKind::weekly, OutcomeKind::cumulative}) {
                TwfeFit fit = twfe_fit(build_lagged_panel(panel, kind, lag));
                FalsifyCell& cell = report.cells[idx++];
                cell.betas.push_back(fit.beta);
                if (fit.ci_low > 0.0 || fit.ci_high < 0.0) cell.reject_rate += 1.0;
            }
        }
    }
    for (auto& cell : report.cells) {
        double s = 0.0;
        for (double b : cell.betas) s += b;
        cell.mean_beta = s / static_cast<double>(replications);
        cell.reject_rate /= static_cast<double>(replications);
    }
    return report;
}

}  // namespace wavepanel
