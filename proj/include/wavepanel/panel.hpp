#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "wavepanel/calendar.hpp"
#include "wavepanel/csv.hpp"
#include "wavepanel/errors.hpp"

namespace wavepanel {

constexpr const char* kDailyHeader[] = {"country", "date", "mask_pct", "covid_deaths_pm"};
constexpr const char* kWeeklyHeader[] = {"country", "week_start", "excess_weekly",
                                         "excess_cumulative"};
constexpr const char* kCovariatesHeader[] = {"country", "vaccination_rate", "hdi",
                                             "cardio_death_rate", "life_expectancy",
                                             "age_adjusted_excess"};

struct CountryCovariates {
    double vaccination_rate = 0.0;
    double hdi = 0.0;
    double cardio_death_rate = 0.0;
    double life_expectancy = 0.0;
    double age_adjusted_excess = 0.0;
};

struct LoadStats {
    size_t daily_rows = 0;
    size_t weekly_rows = 0;
    size_t covariate_rows = 0;
    size_t clamped_negative_deaths = 0;
};

// Canonical in-memory panel. Daily and weekly values live in dense
// per-country arrays over fixed windows; NaN marks a missing value.
// Immutable after load; safe to share read-only across threads.
struct PanelDataset {
    // Daily analysis window (inclusive).
    Date analysis_start = Date::from_ymd(2020, 2, 4);
    Date analysis_end = Date::from_ymd(2021, 12, 31);
    // Weekly window: Mondays, inclusive.
    Date week_first = Date::from_ymd(2020, 1, 6);
    Date week_last = Date::from_ymd(2021, 12, 27);

    std::vector<std::string> countries;  // sorted, unique

    // [country][day], day 0 = analysis_start
    std::vector<std::vector<double>> mask_daily;
    std::vector<std::vector<double>> deaths_daily;
    // [country][week], week 0 starts at week_first
    std::vector<std::vector<double>> excess_weekly;
    std::vector<std::vector<double>> excess_cumulative;
    std::vector<std::vector<double>> mask_weekly;  // derived, see weekly_mask_average

    std::vector<CountryCovariates> covariates;

    LoadStats load_stats;

    int n_days() const { return analysis_end - analysis_start + 1; }
    int n_weeks() const { return (week_last - week_first) / 7 + 1; }
    size_t n_countries() const { return countries.size(); }

    int day_index(Date d) const { return d - analysis_start; }
    Date day_at(int idx) const { return analysis_start.plus_days(idx); }
    int week_index(Date monday) const { return (monday - week_first) / 7; }
    Date week_at(int idx) const { return week_first.plus_days(7 * idx); }

    int country_index(const std::string& name) const {
        auto it = std::lower_bound(countries.begin(), countries.end(), name);
        if (it == countries.end() || *it != name) return -1;
        return static_cast<int>(it - countries.begin());
    }

    // Total COVID-19 deaths per million over the analysis window (missing
    // days contribute nothing).
    double total_deaths_pm(int country) const {
        double s = 0.0;
        for (double v : deaths_daily[country]) {
            if (!std::isnan(v)) s += v;
        }
        return s;
    }
};

namespace detail {

inline std::vector<std::string> header_vec(const char* const* h, size_t n) {
    return std::vector<std::string>(h, h + n);
}

struct RawDaily {
    std::string country;
    Date date;
    double mask_pct;
    double deaths_pm;
};

struct RawWeekly {
    std::string country;
    Date week_start;
    double excess_weekly;
    double excess_cumulative;
};

}  // namespace detail

// Loads and validates the three input files. Throws ParseError /
// ValidationError / ConsistencyError with file and row context.
// Negative daily death values (source revisions) are clamped to 0 and
// counted in load_stats.
inline PanelDataset load_panel(const std::string& daily_path, const std::string& weekly_path,
                               const std::string& covariates_path) {
    PanelDataset ds;

    // --- daily ---
    std::vector<detail::RawDaily> daily;
    {
        CsvReader r(daily_path, detail::header_vec(kDailyHeader, 4));
        std::vector<std::string> row;
        while (r.next_row(row)) {
            detail::RawDaily d;
            d.country = row[0];
            if (d.country.empty()) throw ParseError(r.where() + ": empty country");
            d.date = Date::parse(row[1]);
            d.mask_pct = r.parse_real_or_missing(row[2], "mask_pct");
            d.deaths_pm = r.parse_real_or_missing(row[3], "covid_deaths_pm");
            if (d.date < ds.analysis_start || d.date > ds.analysis_end) {
                throw ValidationError(r.where() + ": date " + d.date.to_string() +
                                      " outside analysis window for " + d.country);
            }
            if (!std::isnan(d.mask_pct) && (d.mask_pct < 0.0 || d.mask_pct > 100.0)) {
                throw ValidationError(r.where() + ": mask_pct " + std::to_string(d.mask_pct) +
                                      " outside [0,100] for " + d.country + " " +
                                      d.date.to_string());
            }
            if (!std::isnan(d.deaths_pm) && d.deaths_pm < 0.0) {
                std::fprintf(stderr,
                             "warning: %s: negative covid_deaths_pm %g clamped to 0 (%s %s)\n",
                             r.where().c_str(), d.deaths_pm, d.country.c_str(),
                             d.date.to_string().c_str());
                d.deaths_pm = 0.0;
                ++ds.load_stats.clamped_negative_deaths;
            }
            daily.push_back(d);
        }
        if (daily.empty()) throw ParseError(daily_path + ": no data rows");
        ds.load_stats.daily_rows = daily.size();
    }

    // --- weekly ---
    std::vector<detail::RawWeekly> weekly;
    {
        CsvReader r(weekly_path, detail::header_vec(kWeeklyHeader, 4));
        std::vector<std::string> row;
        const Date lo = Date::from_ymd(2020, 1, 1), hi = Date::from_ymd(2022, 1, 2);
        while (r.next_row(row)) {
            detail::RawWeekly w;
            w.country = row[0];
            if (w.country.empty()) throw ParseError(r.where() + ": empty country");
            w.week_start = Date::parse(row[1]);
            if (!w.week_start.is_monday()) {
                throw ValidationError(r.where() + ": week_start " + w.week_start.to_string() +
                                      " is not a Monday");
            }
            if (w.week_start < lo || w.week_start > hi) {
                throw ValidationError(r.where() + ": week_start " + w.week_start.to_string() +
                                      " outside [2020-01-01, 2022-01-02]");
            }
            w.excess_weekly = r.parse_real(row[2], "excess_weekly");
            w.excess_cumulative = r.parse_real(row[3], "excess_cumulative");
            weekly.push_back(w);
        }
        if (weekly.empty()) throw ParseError(weekly_path + ": no data rows");
        ds.load_stats.weekly_rows = weekly.size();
    }

    // --- covariates ---
    std::map<std::string, CountryCovariates> covs;
    {
        CsvReader r(covariates_path, detail::header_vec(kCovariatesHeader, 6));
        std::vector<std::string> row;
        while (r.next_row(row)) {
            if (row[0].empty()) throw ParseError(r.where() + ": empty country");
            for (int i = 1; i < 6; ++i) {
                if (row[i].empty()) {
                    throw ValidationError(r.where() + ": missing covariate field for " + row[0]);
                }
            }
            CountryCovariates c;
            c.vaccination_rate = r.parse_real(row[1], "vaccination_rate");
            c.hdi = r.parse_real(row[2], "hdi");
            c.cardio_death_rate = r.parse_real(row[3], "cardio_death_rate");
            c.life_expectancy = r.parse_real(row[4], "life_expectancy");
            c.age_adjusted_excess = r.parse_real(row[5], "age_adjusted_excess");
            if (covs.count(row[0])) {
                throw ValidationError(r.where() + ": duplicate covariate row for " + row[0]);
            }
            covs[row[0]] = c;
        }
        if (covs.empty()) throw ParseError(covariates_path + ": no data rows");
        ds.load_stats.covariate_rows = covs.size();
    }

    // --- country set consistency ---
    std::set<std::string> daily_countries, weekly_countries;
    for (const auto& d : daily) daily_countries.insert(d.country);
    for (const auto& w : weekly) weekly_countries.insert(w.country);
    std::set<std::string> cov_countries;
    for (const auto& [name, _] : covs) cov_countries.insert(name);
    auto check_same = [](const std::set<std::string>& a, const std::set<std::string>& b,
                         const std::string& what) {
        for (const auto& n : a) {
            if (!b.count(n)) {
                throw ConsistencyError("country '" + n + "' present in " + what);
            }
        }
    };
    check_same(daily_countries, weekly_countries, "daily but not weekly file");
    check_same(weekly_countries, daily_countries, "weekly but not daily file");
    check_same(daily_countries, cov_countries, "daily but not covariates file");
    check_same(cov_countries, daily_countries, "covariates but not daily file");

    ds.countries.assign(daily_countries.begin(), daily_countries.end());
    const size_t nc = ds.countries.size();
    const int nd = ds.n_days();
    const int nw = ds.n_weeks();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    ds.mask_daily.assign(nc, std::vector<double>(nd, nan));
    ds.deaths_daily.assign(nc, std::vector<double>(nd, nan));
    ds.excess_weekly.assign(nc, std::vector<double>(nw, nan));
    ds.excess_cumulative.assign(nc, std::vector<double>(nw, nan));
    ds.covariates.resize(nc);

    std::vector<std::vector<bool>> daily_seen(nc, std::vector<bool>(nd, false));
    for (const auto& d : daily) {
        int c = ds.country_index(d.country);
        int i = ds.day_index(d.date);
        if (daily_seen[c][i]) {
            throw ValidationError(daily_path + ": duplicate daily row for " + d.country + " " +
                                  d.date.to_string());
        }
        daily_seen[c][i] = true;
        ds.mask_daily[c][i] = d.mask_pct;
        ds.deaths_daily[c][i] = d.deaths_pm;
    }
    // Contiguity: every (country, day) row must exist; gaps are represented
    // as missing values, not absent rows.
    for (size_t c = 0; c < nc; ++c) {
        for (int i = 0; i < nd; ++i) {
            if (!daily_seen[c][i]) {
                throw ValidationError(daily_path + ": missing daily row for " + ds.countries[c] +
                                      " " + ds.day_at(i).to_string());
            }
        }
    }

    std::vector<std::vector<bool>> weekly_seen(nc, std::vector<bool>(nw, false));
    for (const auto& w : weekly) {
        int c = ds.country_index(w.country);
        int i = ds.week_index(w.week_start);
        if (i < 0 || i >= nw) {
            throw ValidationError(weekly_path + ": week_start " + w.week_start.to_string() +
                                  " outside the weekly grid for " + w.country);
        }
        if (weekly_seen[c][i]) {
            throw ValidationError(weekly_path + ": duplicate weekly row for " + w.country + " " +
                                  w.week_start.to_string());
        }
        weekly_seen[c][i] = true;
        ds.excess_weekly[c][i] = w.excess_weekly;
        ds.excess_cumulative[c][i] = w.excess_cumulative;
    }
    for (size_t c = 0; c < nc; ++c) {
        for (int i = 0; i < nw; ++i) {
            if (!weekly_seen[c][i]) {
                throw ValidationError(weekly_path + ": missing weekly row for " +
                                      ds.countries[c] + " " + ds.week_at(i).to_string());
            }
        }
    }

    for (size_t c = 0; c < nc; ++c) ds.covariates[c] = covs[ds.countries[c]];

    if (nc != 24) {
        throw ValidationError("expected exactly 24 countries, got " + std::to_string(nc));
    }
    return ds;
}

// Fills mask_pct_weekly as the arithmetic mean of non-missing daily mask
// values inside each ISO week (Monday anchored), clipped to the analysis
// window. Weeks with no non-missing overlap stay missing.
inline void weekly_mask_average(PanelDataset& ds) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    ds.mask_weekly.assign(ds.n_countries(), std::vector<double>(ds.n_weeks(), nan));
    for (size_t c = 0; c < ds.n_countries(); ++c) {
        for (int w = 0; w < ds.n_weeks(); ++w) {
            Date monday = ds.week_at(w);
            double sum = 0.0;
            int cnt = 0;
            for (int k = 0; k < 7; ++k) {
                Date d = monday.plus_days(k);
                if (d < ds.analysis_start || d > ds.analysis_end) continue;
                double v = ds.mask_daily[c][ds.day_index(d)];
                if (!std::isnan(v)) {
                    sum += v;
                    ++cnt;
                }
            }
            if (cnt > 0) ds.mask_weekly[c][w] = sum / cnt;
        }
    }
}

// Serializes the dataset back to the three-file CSV layout (used by the
// round-trip checks and by `reproduce-all` to snapshot its input).
inline void write_panel(const PanelDataset& ds, const std::string& daily_path,
                        const std::string& weekly_path, const std::string& covariates_path) {
    {
        std::ofstream out(daily_path);
        out << "country,date,mask_pct,covid_deaths_pm\n";
        for (size_t c = 0; c < ds.n_countries(); ++c) {
            for (int i = 0; i < ds.n_days(); ++i) {
                out << ds.countries[c] << ',' << ds.day_at(i).to_string() << ','
                    << format_real(ds.mask_daily[c][i]) << ','
                    << format_real(ds.deaths_daily[c][i]) << '\n';
            }
        }
    }
    {
        std::ofstream out(weekly_path);
        out << "country,week_start,excess_weekly,excess_cumulative\n";
        for (size_t c = 0; c < ds.n_countries(); ++c) {
            for (int w = 0; w < ds.n_weeks(); ++w) {
                out << ds.countries[c] << ',' << ds.week_at(w).to_string() << ','
                    << format_real(ds.excess_weekly[c][w]) << ','
                    << format_real(ds.excess_cumulative[c][w]) << '\n';
            }
        }
    }
    {
        std::ofstream out(covariates_path);
        out << "country,vaccination_rate,hdi,cardio_death_rate,life_expectancy,age_adjusted_"
               "excess\n";
        for (size_t c = 0; c < ds.n_countries(); ++c) {
            const auto& v = ds.covariates[c];
            out << ds.countries[c] << ',' << format_real(v.vaccination_rate) << ','
                << format_real(v.hdi) << ',' << format_real(v.cardio_death_rate) << ','
                << format_real(v.life_expectancy) << ',' << format_real(v.age_adjusted_excess)
                << '\n';
        }
    }
}

}  // namespace wavepanel
