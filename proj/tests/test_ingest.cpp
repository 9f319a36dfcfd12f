#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "wavepanel/panel.hpp"

using namespace wavepanel;
using Catch::Approx;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("wavepanel_ingest_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

// Complete, valid 24-country inputs with simple synthetic values.
struct FullInputs {
    std::vector<std::string> countries;
    std::string daily, weekly, covariates;

    FullInputs() {
        for (int i = 0; i < 24; ++i) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "C%02d", i + 1);
            countries.push_back(buf);
        }
        Date d0 = Date::from_ymd(2020, 2, 4), d1 = Date::from_ymd(2021, 12, 31);
        std::ostringstream da;
        da << "country,date,mask_pct,covid_deaths_pm\n";
        for (const auto& c : countries) {
            for (Date d = d0; d <= d1; d = d.plus_days(1)) {
                da << c << ',' << d.to_string() << ",60,1.5\n";
            }
        }
        daily = da.str();

        Date w0 = Date::from_ymd(2020, 1, 6), w1 = Date::from_ymd(2021, 12, 27);
        std::ostringstream we;
        we << "country,week_start,excess_weekly,excess_cumulative\n";
        for (const auto& c : countries) {
            for (Date w = w0; w <= w1; w = w.plus_days(7)) {
                we << c << ',' << w.to_string() << ",2.5,10.25\n";
            }
        }
        weekly = we.str();

        std::ostringstream co;
        co << "country,vaccination_rate,hdi,cardio_death_rate,life_expectancy,age_adjusted_"
              "excess\n";
        int i = 0;
        for (const auto& c : countries) {
            co << c << ',' << 60 + i << ",0.9," << 100 + i << ',' << 80 - 0.1 * i << ','
               << 5 + 0.2 * i << '\n';
            ++i;
        }
        covariates = co.str();
    }
};

}  // namespace

TEST_CASE("load_panel accepts a complete 24-country extract") {
    TempDir dir;
    FullInputs in;
    write_file(dir.file("daily.csv"), in.daily);
    write_file(dir.file("weekly.csv"), in.weekly);
    write_file(dir.file("cov.csv"), in.covariates);
    PanelDataset ds = load_panel(dir.file("daily.csv"), dir.file("weekly.csv"), dir.file("cov.csv"));
    CHECK(ds.n_countries() == 24);
    CHECK(ds.n_days() == 697);
    CHECK(ds.n_weeks() == 104);
    CHECK(ds.analysis_start == Date::from_ymd(2020, 2, 4));
    CHECK(ds.analysis_end == Date::from_ymd(2021, 12, 31));
    CHECK(ds.load_stats.daily_rows == 24u * 697u);
    CHECK(ds.load_stats.weekly_rows == 24u * 104u);
    CHECK(ds.mask_daily[0][0] == Approx(60.0));
    CHECK(ds.covariates[0].hdi == Approx(0.9));
}

TEST_CASE("load_panel round trip preserves every field") {
    TempDir dir;
    FullInputs in;
    write_file(dir.file("daily.csv"), in.daily);
    write_file(dir.file("weekly.csv"), in.weekly);
    write_file(dir.file("cov.csv"), in.covariates);
    PanelDataset a = load_panel(dir.file("daily.csv"), dir.file("weekly.csv"), dir.file("cov.csv"));
    write_panel(a, dir.file("d2.csv"), dir.file("w2.csv"), dir.file("c2.csv"));
    PanelDataset b = load_panel(dir.file("d2.csv"), dir.file("w2.csv"), dir.file("c2.csv"));
    REQUIRE(a.countries == b.countries);
    for (size_t c = 0; c < a.n_countries(); ++c) {
        for (int i = 0; i < a.n_days(); ++i) {
            REQUIRE(a.mask_daily[c][i] == b.mask_daily[c][i]);
            REQUIRE(a.deaths_daily[c][i] == b.deaths_daily[c][i]);
        }
        for (int w = 0; w < a.n_weeks(); ++w) {
            REQUIRE(a.excess_weekly[c][w] == b.excess_weekly[c][w]);
            REQUIRE(a.excess_cumulative[c][w] == b.excess_cumulative[c][w]);
        }
        REQUIRE(a.covariates[c].vaccination_rate == b.covariates[c].vaccination_rate);
        REQUIRE(a.covariates[c].age_adjusted_excess == b.covariates[c].age_adjusted_excess);
    }
}

TEST_CASE("empty daily file is a parse error") {
    TempDir dir;
    write_file(dir.file("daily.csv"), "country,date,mask_pct,covid_deaths_pm\n");
    write_file(dir.file("weekly.csv"), "country,week_start,excess_weekly,excess_cumulative\n");
    write_file(dir.file("cov.csv"), "x\n");
    try {
        load_panel(dir.file("daily.csv"), dir.file("weekly.csv"), dir.file("cov.csv"));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("no data rows") != std::string::npos);
    }
}

TEST_CASE("mask_pct out of range names the offending row") {
    TempDir dir;
    write_file(dir.file("daily.csv"),
               "country,date,mask_pct,covid_deaths_pm\nAustria,2020-02-04,101,0\n");
    write_file(dir.file("weekly.csv"), "country,week_start,excess_weekly,excess_cumulative\n");
    write_file(dir.file("cov.csv"), "x\n");
    try {
        load_panel(dir.file("daily.csv"), dir.file("weekly.csv"), dir.file("cov.csv"));
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        std::string msg = e.what();
        CHECK(msg.find("daily.csv:2") != std::string::npos);
        CHECK(msg.find("Austria") != std::string::npos);
    }
}

TEST_CASE("bad date format is a parse error") {
    TempDir dir;
    write_file(dir.file("daily.csv"),
               "country,date,mask_pct,covid_deaths_pm\nAustria,04/02/2020,50,0\n");
    write_file(dir.file("weekly.csv"), "country,week_start,excess_weekly,excess_cumulative\n");
    write_file(dir.file("cov.csv"), "x\n");
    CHECK_THROWS_AS(load_panel(dir.file("daily.csv"), dir.file("weekly.csv"), dir.file("cov.csv")),
                    ParseError);
}

TEST_CASE("negative deaths are clamped and counted") {
    TempDir dir;
    FullInputs in;
    // corrupt one row: negative deaths
    auto pos = in.daily.find("C01,2020-02-04,60,1.5");
    REQUIRE(pos != std::string::npos);
    in.daily.replace(pos, std::string("C01,2020-02-04,60,1.5").size(), "C01,2020-02-04,60,-3.5");
    write_file(dir.file("daily.csv"), in.daily);
    write_file(dir.file("weekly.csv"), in.weekly);
    write_file(dir.file("cov.csv"), in.covariates);
    PanelDataset ds = load_panel(dir.file("daily.csv"), dir.file("weekly.csv"), dir.file("cov.csv"));
    CHECK(ds.load_stats.clamped_negative_deaths == 1);
    CHECK(ds.deaths_daily[0][0] == 0.0);
}

TEST_CASE("country present in one file but not another is a consistency error") {
    TempDir dir;
    FullInputs in;
    // drop C24 from covariates only
    auto pos = in.covariates.find("C24");
    in.covariates.erase(pos);
    write_file(dir.file("daily.csv"), in.daily);
    write_file(dir.file("weekly.csv"), in.weekly);
    write_file(dir.file("cov.csv"), in.covariates);
    try {
        load_panel(dir.file("daily.csv"), dir.file("weekly.csv"), dir.file("cov.csv"));
        FAIL("expected ConsistencyError");
    } catch (const ConsistencyError& e) {
        CHECK(std::string(e.what()).find("C24") != std::string::npos);
    }
}

TEST_CASE("missing daily row violates contiguity") {
    TempDir dir;
    FullInputs in;
    auto pos = in.daily.find("C05,2020-06-01,60,1.5\n");
    REQUIRE(pos != std::string::npos);
    in.daily.erase(pos, std::string("C05,2020-06-01,60,1.5\n").size());
    write_file(dir.file("daily.csv"), in.daily);
    write_file(dir.file("weekly.csv"), in.weekly);
    write_file(dir.file("cov.csv"), in.covariates);
    try {
        load_panel(dir.file("daily.csv"), dir.file("weekly.csv"), dir.file("cov.csv"));
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        std::string msg = e.what();
        CHECK(msg.find("C05") != std::string::npos);
        CHECK(msg.find("2020-06-01") != std::string::npos);
    }
}

TEST_CASE("week_start must be a Monday") {
    TempDir dir;
    write_file(dir.file("daily.csv"),
               "country,date,mask_pct,covid_deaths_pm\nAustria,2020-02-04,50,0\n");
    write_file(dir.file("weekly.csv"),
               "country,week_start,excess_weekly,excess_cumulative\nAustria,2020-01-07,1,1\n");
    write_file(dir.file("cov.csv"), "x\n");
    CHECK_THROWS_AS(load_panel(dir.file("daily.csv"), dir.file("weekly.csv"), dir.file("cov.csv")),
                    ValidationError);
}

TEST_CASE("weekly mask averages") {
    PanelDataset ds;
    ds.analysis_start = Date::from_ymd(2020, 2, 4);
    ds.analysis_end = Date::from_ymd(2020, 3, 2);
    ds.week_first = Date::from_ymd(2020, 2, 10);
    ds.week_last = Date::from_ymd(2020, 2, 24);
    ds.countries = {"A"};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    ds.mask_daily.assign(1, std::vector<double>(ds.n_days(), nan));
    ds.deaths_daily.assign(1, std::vector<double>(ds.n_days(), 0.0));

    // week of 2020-02-10: constant 60
    for (int k = 0; k < 7; ++k) ds.mask_daily[0][ds.day_index(Date::from_ymd(2020, 2, 10)) + k] = 60;
    // week of 2020-02-17: {50, 60, missing x5}
    ds.mask_daily[0][ds.day_index(Date::from_ymd(2020, 2, 17))] = 50;
    ds.mask_daily[0][ds.day_index(Date::from_ymd(2020, 2, 18))] = 60;
    // week of 2020-02-24: all missing

    weekly_mask_average(ds);
    CHECK(ds.mask_weekly[0][0] == Approx(60.0));
    CHECK(ds.mask_weekly[0][1] == Approx(55.0));
    CHECK(std::isnan(ds.mask_weekly[0][2]));
}

TEST_CASE("weekly mask average stays within the daily range") {
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> u(0, 100);
    PanelDataset ds;
    ds.analysis_start = Date::from_ymd(2020, 2, 4);
    ds.analysis_end = Date::from_ymd(2020, 4, 30);
    ds.week_first = Date::from_ymd(2020, 2, 10);
    ds.week_last = Date::from_ymd(2020, 4, 20);
    ds.countries = {"A"};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    ds.mask_daily.assign(1, std::vector<double>(ds.n_days(), nan));
    ds.deaths_daily.assign(1, std::vector<double>(ds.n_days(), 0.0));
    for (int i = 0; i < ds.n_days(); ++i) {
        if (gen() % 4 != 0) ds.mask_daily[0][i] = u(gen);
    }
    weekly_mask_average(ds);
    for (int w = 0; w < ds.n_weeks(); ++w) {
        if (std::isnan(ds.mask_weekly[0][w])) continue;
        double lo = 101, hi = -1;
        for (int k = 0; k < 7; ++k) {
            Date d = ds.week_at(w).plus_days(k);
            if (d < ds.analysis_start || d > ds.analysis_end) continue;
            double v = ds.mask_daily[0][ds.day_index(d)];
            if (!std::isnan(v)) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        CHECK(ds.mask_weekly[0][w] >= lo - 1e-12);
        CHECK(ds.mask_weekly[0][w] <= hi + 1e-12);
    }
}
