#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "wavepanel/distributions.hpp"
#include "wavepanel/errors.hpp"
#include "wavepanel/panel.hpp"
#include "wavepanel/stats.hpp"

namespace wavepanel {

enum class OutcomeKind { weekly, cumulative };

inline const char* outcome_name(OutcomeKind k) {
    return k == OutcomeKind::weekly ? "weekly" : "cumulative";
}

// Aligned (exposure, outcome) rows: exposure is mask usage on week t, the
// outcome is measured on week t + lag. A row exists only when both sides are
// observed.
struct LaggedPanel {
    OutcomeKind outcome_kind = OutcomeKind::weekly;
    int lag = 0;
    std::vector<std::string> country_names;  // id -> name
    std::vector<int> country;                // per row
    std::vector<int> week;                   // per row: exposure week index
    std::vector<double> exposure;
    std::vector<double> outcome;

    size_t n_rows() const { return exposure.size(); }
};

struct TwfeFit {
    double beta = 0.0;
    double se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    size_t n_obs = 0;
    size_t n_countries = 0;
    size_t n_weeks = 0;
    int lag = 0;
    OutcomeKind outcome_kind = OutcomeKind::weekly;

    // Row-aligned with the input panel.
    std::vector<std::string> country_names;
    std::vector<int> country;
    std::vector<int> week;
    std::vector<double> residuals;
    std::vector<double> fitted;

    // Identified with sum(a_i) = 0; the grand mean lives in the week effects.
    std::map<int, double> country_effects;
    std::map<int, double> week_effects;
};

inline LaggedPanel build_lagged_panel(const PanelDataset& ds, OutcomeKind kind, int lag) {
    if (lag < -8 || lag > 8) throw DomainError("build_lagged_panel: lag outside [-8, 8]");
    if (ds.mask_weekly.empty()) {
        throw DomainError("build_lagged_panel: weekly mask averages not computed");
    }
    LaggedPanel panel;
    panel.outcome_kind = kind;
    panel.lag = lag;
    panel.country_names = ds.countries;
    const auto& out_table = (kind == OutcomeKind::weekly) ? ds.excess_weekly
                                                          : ds.excess_cumulative;
    const int nw = ds.n_weeks();
    for (size_t c = 0; c < ds.n_countries(); ++c) {
        for (int t = 0; t < nw; ++t) {
            int to = t + lag;
            if (to < 0 || to >= nw) continue;
            double m = ds.mask_weekly[c][t];
            double y = out_table[c][to];
            if (std::isnan(m) || std::isnan(y)) continue;
            panel.country.push_back(static_cast<int>(c));
            panel.week.push_back(t);
            panel.exposure.push_back(m);
            panel.outcome.push_back(y);
        }
    }
    if (panel.n_rows() == 0) {
        throw DomainError("build_lagged_panel: no usable rows at lag " + std::to_string(lag));
    }
    return panel;
}

namespace detail {

// Removes country and week means in place by alternating projections until
// every group mean is below tol. Exact in one sweep for balanced panels;
// missing weeks make repetition necessary.
inline void within_demean(std::vector<double>& v, const std::vector<int>& gi,
                          const std::vector<int>& gj, double tol = 1e-10) {
    int ni = *std::max_element(gi.begin(), gi.end()) + 1;
    int nj = *std::max_element(gj.begin(), gj.end()) + 1;
    std::vector<double> sum_i(ni), cnt_i(ni, 0.0), sum_j(nj), cnt_j(nj, 0.0);
    for (size_t r = 0; r < v.size(); ++r) {
        cnt_i[gi[r]] += 1.0;
        cnt_j[gj[r]] += 1.0;
    }
    for (int pass = 0; pass < 200; ++pass) {
        std::fill(sum_i.begin(), sum_i.end(), 0.0);
        for (size_t r = 0; r < v.size(); ++r) sum_i[gi[r]] += v[r];
        double worst = 0.0;
        for (int g = 0; g < ni; ++g) {
            if (cnt_i[g] > 0.0) {
                sum_i[g] /= cnt_i[g];
                worst = std::max(worst, std::fabs(sum_i[g]));
            }
        }
        for (size_t r = 0; r < v.size(); ++r) v[r] -= sum_i[gi[r]];

        std::fill(sum_j.begin(), sum_j.end(), 0.0);
        for (size_t r = 0; r < v.size(); ++r) sum_j[gj[r]] += v[r];
        for (int g = 0; g < nj; ++g) {
            if (cnt_j[g] > 0.0) {
                sum_j[g] /= cnt_j[g];
                worst = std::max(worst, std::fabs(sum_j[g]));
            }
        }
        for (size_t r = 0; r < v.size(); ++r) v[r] -= sum_j[gj[r]];
        if (worst < tol) break;
    }
}

}  // namespace detail

// Least squares with country and week fixed effects via within-demeaning.
// Cluster-robust (by country) standard errors with the small-sample factor
// G/(G-1) * (N-1)/(N-K), K = parameters of the dummy-encoded model
// (intercept + C-1 + W-1 dummies + slope). 95% CI from t with G-1 degrees of
// freedom.
inline TwfeFit twfe_fit(const LaggedPanel& panel, double alpha = 0.05) {
    const size_t n = panel.n_rows();
    std::vector<int> countries_present(panel.country), weeks_present(panel.week);
    std::sort(countries_present.begin(), countries_present.end());
    countries_present.erase(std::unique(countries_present.begin(), countries_present.end()),
                            countries_present.end());
    std::sort(weeks_present.begin(), weeks_present.end());
    weeks_present.erase(std::unique(weeks_present.begin(), weeks_present.end()),
                        weeks_present.end());
    const size_t G = countries_present.size();
    const size_t W = weeks_present.size();
    if (G < 2 || W < 2) throw DomainError("twfe_fit: need at least 2 countries and 2 weeks");

    std::vector<double> m_dm(panel.exposure), y_dm(panel.outcome);
    detail::within_demean(m_dm, panel.country, panel.week);
    detail::within_demean(y_dm, panel.country, panel.week);

    double sxx = 0.0, sxy = 0.0;
    for (size_t r = 0; r < n; ++r) {
        sxx += m_dm[r] * m_dm[r];
        sxy += m_dm[r] * y_dm[r];
    }
    if (sxx <= 1e-10) throw DomainError("exposure absorbed by fixed effects");
    double beta = sxy / sxx;

    TwfeFit fit;
    fit.beta = beta;
    fit.n_obs = n;
    fit.n_countries = G;
    fit.n_weeks = W;
    fit.lag = panel.lag;
    fit.outcome_kind = panel.outcome_kind;
    fit.country_names = panel.country_names;
    fit.country = panel.country;
    fit.week = panel.week;

    // Within-residuals; these equal the residuals of the full dummy model.
    std::vector<double> resid(n);
    for (size_t r = 0; r < n; ++r) resid[r] = y_dm[r] - beta * m_dm[r];

    // Cluster-robust variance.
    int max_c = *std::max_element(panel.country.begin(), panel.country.end()) + 1;
    std::vector<double> score(max_c, 0.0);
    for (size_t r = 0; r < n; ++r) score[panel.country[r]] += m_dm[r] * resid[r];
    double meat = 0.0;
    for (double u : score) meat += u * u;
    double N = static_cast<double>(n);
    double K = 1.0 + (static_cast<double>(G) - 1.0) + (static_cast<double>(W) - 1.0) + 1.0;
    double ssc = (static_cast<double>(G) / (static_cast<double>(G) - 1.0)) * ((N - 1.0) / (N - K));
    double var = ssc * meat / (sxx * sxx);
    fit.se = std::sqrt(var);
    double tq = student_t_quantile(1.0 - alpha / 2.0, static_cast<double>(G) - 1.0);
    fit.ci_low = beta - tq * fit.se;
    fit.ci_high = beta + tq * fit.se;

    // Recover the fixed effects from Y - beta*M by alternating projections,
    // then normalize: country effects sum to zero, grand mean in the week
    // effects.
    std::vector<double> r0(n);
    for (size_t r = 0; r < n; ++r) r0[r] = panel.outcome[r] - beta * panel.exposure[r];
    std::map<int, double> a, b;
    for (int c : countries_present) a[c] = 0.0;
    for (int w : weeks_present) b[w] = 0.0;
    std::map<int, double> cnt_c, cnt_w;
    for (size_t r = 0; r < n; ++r) {
        cnt_c[panel.country[r]] += 1.0;
        cnt_w[panel.week[r]] += 1.0;
    }
    for (int pass = 0; pass < 500; ++pass) {
        double worst = 0.0;
        std::map<int, double> acc;
        for (int c : countries_present) acc[c] = 0.0;
        for (size_t r = 0; r < n; ++r) acc[panel.country[r]] += r0[r] - b[panel.week[r]];
        for (int c : countries_present) {
            double next = acc[c] / cnt_c[c];
            worst = std::max(worst, std::fabs(next - a[c]));
            a[c] = next;
        }
        std::map<int, double> accw;
        for (int w : weeks_present) accw[w] = 0.0;
        for (size_t r = 0; r < n; ++r) accw[panel.week[r]] += r0[r] - a[panel.country[r]];
        for (int w : weeks_present) {
            double next = accw[w] / cnt_w[w];
            worst = std::max(worst, std::fabs(next - b[w]));
            b[w] = next;
        }
        if (worst < 1e-12) break;
    }
    double abar = 0.0;
    for (int c : countries_present) abar += a[c];
    abar /= static_cast<double>(G);
    for (int c : countries_present) a[c] -= abar;
    for (int w : weeks_present) b[w] += abar;
    fit.country_effects = a;
    fit.week_effects = b;

    fit.residuals.resize(n);
    fit.fitted.resize(n);
    for (size_t r = 0; r < n; ++r) {
        fit.fitted[r] = beta * panel.exposure[r] + a[panel.country[r]] + b[panel.week[r]];
        fit.residuals[r] = panel.outcome[r] - fit.fitted[r];
    }
    return fit;
}

struct LagSweepRow {
    int lag = 0;
    OutcomeKind outcome_kind = OutcomeKind::weekly;
    double beta = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    size_t n_obs = 0;
};

// One row per (lag, outcome kind), both outcome definitions side by side.
inline std::vector<LagSweepRow> lag_sweep(const PanelDataset& ds, const std::vector<int>& lags) {
    if (lags.empty()) throw DomainError("lag_sweep: no lags given");
    std::vector<LagSweepRow> rows;
    for (int lag : lags) {
        for (OutcomeKind kind : {OutcomeKind::weekly, OutcomeKind::cumulative}) {
            TwfeFit fit = twfe_fit(build_lagged_panel(ds, kind, lag));
            rows.push_back(LagSweepRow{lag, kind, fit.beta, fit.ci_low, fit.ci_high, fit.n_obs});
        }
    }
    return rows;
}

struct ResidualSeries {
    std::string country;
    std::vector<int> weeks;
    std::vector<double> residuals;
    double lag1_autocorr = 0.0;
    double runs_p_value = 1.0;
};

namespace detail {

inline double lag1_autocorrelation(const std::vector<int>& weeks,
                                   const std::vector<double>& resid) {
    std::vector<double> x, y;
    for (size_t i = 0; i + 1 < weeks.size(); ++i) {
        if (weeks[i + 1] == weeks[i] + 1) {
            x.push_back(resid[i]);
            y.push_back(resid[i + 1]);
        }
    }
    if (x.size() < 3) return 0.0;
    try {
        return pearson(x, y);
    } catch (const DomainError&) {
        return 0.0;
    }
}

// Wald-Wolfowitz runs test on residual signs, two-sided normal p-value.
inline double runs_test_p(const std::vector<double>& resid) {
    double n_pos = 0.0, n_neg = 0.0;
    int runs = 0;
    int prev = 0;
    for (double r : resid) {
        int s = (r >= 0.0) ? 1 : -1;
        if (s > 0) n_pos += 1.0;
        else n_neg += 1.0;
        if (s != prev) {
            ++runs;
            prev = s;
        }
    }
    double n = n_pos + n_neg;
    if (n_pos == 0.0 || n_neg == 0.0 || n < 3.0) return 1.0;
    double mu = 2.0 * n_pos * n_neg / n + 1.0;
    double var = 2.0 * n_pos * n_neg * (2.0 * n_pos * n_neg - n) / (n * n * (n - 1.0));
    if (var <= 0.0) return 1.0;
    double z = (static_cast<double>(runs) - mu) / std::sqrt(var);
    double p = 2.0 * (1.0 - normal_cdf(std::fabs(z)));
    return std::min(1.0, std::max(p, 0.0));
}

}  // namespace detail

// Residuals-against-time series per country with quantitative structure
// indicators (lag-1 autocorrelation, runs-test p). Under a valid model the
// residuals look like noise around zero; systematic shapes flag violated
// assumptions.
inline std::vector<ResidualSeries> residual_diagnostics(const TwfeFit& fit) {
    std::map<int, ResidualSeries> by_country;
    for (size_t r = 0; r < fit.residuals.size(); ++r) {
        auto& s = by_country[fit.country[r]];
        s.country = fit.country_names[fit.country[r]];
        s.weeks.push_back(fit.week[r]);
        s.residuals.push_back(fit.residuals[r]);
    }
    std::vector<ResidualSeries> out;
    for (auto& [c, s] : by_country) {
        // sort by week
        std::vector<size_t> order(s.weeks.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](size_t a, size_t b) { return s.weeks[a] < s.weeks[b]; });
        ResidualSeries sorted;
        sorted.country = s.country;
        for (size_t i : order) {
            sorted.weeks.push_back(s.weeks[i]);
            sorted.residuals.push_back(s.residuals[i]);
        }
        sorted.lag1_autocorr = detail::lag1_autocorrelation(sorted.weeks, sorted.residuals);
        sorted.runs_p_value = detail::runs_test_p(sorted.residuals);
        out.push_back(std::move(sorted));
    }
    return out;
}

}  // namespace wavepanel
