#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "test_helpers.hpp"
#include "wavepanel/indices.hpp"

using namespace wavepanel;
using wavepanel::testing::make_daily_panel;
using Catch::Approx;

namespace {

// Hand-built waveset over a 30-day window: one phase split into three, one
// wave per phase with known windows.
WaveSet toy_waveset(const PanelDataset& ds) {
    WaveSet ws;
    ws.partition.window_start = ds.analysis_start;
    ws.partition.window_end = ds.analysis_end;
    ws.partition.boundaries = {ds.analysis_start.plus_days(10), ds.analysis_start.plus_days(20)};
    auto mk = [&](int phase, int s, int e, int bs, int be, int ps, int pe) {
        WaveInterval w;
        w.country = ds.countries[0];
        w.phase_index = phase;
        w.span = {ds.analysis_start.plus_days(s), ds.analysis_start.plus_days(e)};
        w.begin_window = {ds.analysis_start.plus_days(bs), ds.analysis_start.plus_days(be)};
        w.peak_window = {ds.analysis_start.plus_days(ps), ds.analysis_start.plus_days(pe)};
        w.peak_day = ds.analysis_start.plus_days(ps);
        w.wave_deaths_pm_mean = 1.0;
        return w;
    };
    ws.waves.push_back(mk(1, 2, 8, 2, 2, 5, 5));
    ws.waves.push_back(mk(2, 12, 18, 12, 12, 15, 15));
    ws.waves.push_back(mk(3, 22, 28, 22, 22, 25, 25));
    return ws;
}

}  // namespace

TEST_CASE("constant mask series gives equal indices") {
    auto ds = make_daily_panel(30, {std::vector<double>(30, 1.0)},
                               {std::vector<double>(30, 40.0)});
    auto ws = toy_waveset(ds);
    auto table = compute_indices(ds, ws);
    REQUIRE(table.rows.size() == 1);
    const auto& m = table.rows[0];
    CHECK(m.maskall == Approx(40.0));
    CHECK(m.maskinwave == Approx(40.0));
    CHECK(m.maskinterwave == Approx(40.0));
    CHECK(m.maskbeginwave == Approx(40.0));
    CHECK(m.maskpeakwave == Approx(40.0));
}

TEST_CASE("indices equal hand-computed means on a small panel") {
    // mask value = day index, deaths constant
    std::vector<double> mask(30);
    for (int i = 0; i < 30; ++i) mask[i] = i;
    auto ds = make_daily_panel(30, {std::vector<double>(30, 1.0)}, {mask});
    auto ws = toy_waveset(ds);
    auto table = compute_indices(ds, ws);
    const auto& m = table.rows[0];

    // inwave days: 2..8, 12..18, 22..28 -> mean of those day numbers
    double inwave_sum = 0;
    int inwave_n = 0;
    for (int i : {2, 3, 4, 5, 6, 7, 8, 12, 13, 14, 15, 16, 17, 18, 22, 23, 24, 25, 26, 27, 28}) {
        inwave_sum += i;
        ++inwave_n;
    }
    CHECK(m.maskinwave == Approx(inwave_sum / inwave_n));
    CHECK(m.maskall == Approx(29.0 / 2.0));
    CHECK(m.maskbeginwave == Approx((2.0 + 12.0 + 22.0) / 3.0));
    CHECK(m.maskpeakwave == Approx((5.0 + 15.0 + 25.0) / 3.0));
    // interwave: complement of inwave
    double inter_sum = 0;
    int inter_n = 0;
    for (int i = 0; i < 30; ++i) {
        bool in = (i >= 2 && i <= 8) || (i >= 12 && i <= 18) || (i >= 22 && i <= 28);
        if (!in) {
            inter_sum += i;
            ++inter_n;
        }
    }
    CHECK(m.maskinterwave == Approx(inter_sum / inter_n));
    // sanity: maskall sits between inwave and interwave
    CHECK(m.maskall >= std::min(m.maskinwave, m.maskinterwave) - 1e-12);
    CHECK(m.maskall <= std::max(m.maskinwave, m.maskinterwave) + 1e-12);
}

TEST_CASE("maskall is the duration-weighted average of inwave and interwave") {
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> u(0, 100);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> mask(30);
        for (auto& v : mask) v = u(gen);
        auto ds = make_daily_panel(30, {std::vector<double>(30, 1.0)}, {mask});
        auto ws = toy_waveset(ds);
        auto table = compute_indices(ds, ws);
        const auto& m = table.rows[0];
        double w_in = 21.0, w_inter = 9.0;
        double expect = (w_in * m.maskinwave + w_inter * m.maskinterwave) / 30.0;
        CHECK(m.maskall == Approx(expect).margin(1e-12));
    }
}

TEST_CASE("indices are invariant to permuting days within a day set") {
    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> u(0, 100);
    std::vector<double> mask(30);
    for (auto& v : mask) v = u(gen);
    auto ds = make_daily_panel(30, {std::vector<double>(30, 1.0)}, {mask});
    auto ws = toy_waveset(ds);
    auto before = compute_indices(ds, ws).rows[0];

    // permute values within the first wave span (days 2..8)
    std::vector<double> sub(mask.begin() + 2, mask.begin() + 9);
    std::shuffle(sub.begin(), sub.end(), gen);
    std::vector<double> mask2(mask);
    std::copy(sub.begin(), sub.end(), mask2.begin() + 2);
    auto ds2 = make_daily_panel(30, {std::vector<double>(30, 1.0)}, {mask2});
    auto after = compute_indices(ds2, ws).rows[0];
    CHECK(after.maskinwave == Approx(before.maskinwave).margin(1e-12));
    CHECK(after.maskall == Approx(before.maskall).margin(1e-12));
    CHECK(after.maskinterwave == Approx(before.maskinterwave).margin(1e-12));
}

TEST_CASE("shifting mask values shifts every index by the same amount") {
    std::mt19937_64 gen(19);
    std::uniform_real_distribution<double> u(10, 60);
    std::vector<double> mask(30);
    for (auto& v : mask) v = u(gen);
    auto ds = make_daily_panel(30, {std::vector<double>(30, 1.0)}, {mask});
    auto ws = toy_waveset(ds);
    auto base = compute_indices(ds, ws).rows[0];
    double c = 12.5;
    std::vector<double> shifted(mask);
    for (auto& v : shifted) v += c;  // stays inside [0,100]
    auto ds2 = make_daily_panel(30, {std::vector<double>(30, 1.0)}, {shifted});
    auto moved = compute_indices(ds2, ws).rows[0];
    CHECK(moved.maskall == Approx(base.maskall + c).margin(1e-12));
    CHECK(moved.maskinwave == Approx(base.maskinwave + c).margin(1e-12));
    CHECK(moved.maskinterwave == Approx(base.maskinterwave + c).margin(1e-12));
    CHECK(moved.maskbeginwave == Approx(base.maskbeginwave + c).margin(1e-12));
    CHECK(moved.maskpeakwave == Approx(base.maskpeakwave + c).margin(1e-12));
}

TEST_CASE("missing mask days are excluded, not imputed") {
    std::vector<double> mask(30, 50.0);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    mask[5] = nan;   // inside wave 1 peak window? day 5 is the peak window
    mask[15] = 80.0;
    auto ds = make_daily_panel(30, {std::vector<double>(30, 1.0)}, {mask});
    auto ws = toy_waveset(ds);
    auto m = compute_indices(ds, ws).rows[0];
    // peak set {5, 15, 25}: 5 missing -> mean of {80, 50}
    CHECK(m.maskpeakwave == Approx(65.0));
}

TEST_CASE("an index with no mask data at all is an error naming the country") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> mask(30, 50.0);
    for (int i : {2, 12, 22}) mask[i] = nan;  // all begin-window days missing
    auto ds = make_daily_panel(30, {std::vector<double>(30, 1.0)}, {mask});
    auto ws = toy_waveset(ds);
    try {
        compute_indices(ds, ws);
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        std::string msg = e.what();
        CHECK(msg.find("A/maskbeginwave") != std::string::npos);
    }
}

TEST_CASE("wave records carry begin and peak averages") {
    std::vector<double> mask(30, 70.0);
    auto ds = make_daily_panel(30, {std::vector<double>(30, 1.0)}, {mask});
    auto ws = toy_waveset(ds);
    auto records = wave_mask_records(ds, ws);
    REQUIRE(records.size() == 3);
    for (const auto& r : records) {
        CHECK(r.valid);
        CHECK(r.begin_avg == Approx(70.0));
        CHECK(r.peak_avg == Approx(70.0));
        CHECK(r.wave_deaths_pm_mean == Approx(1.0));
    }
}

TEST_CASE("wave record with an all-missing window is marked invalid") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> mask(30, 70.0);
    mask[12] = nan;  // begin window of wave 2 is the single day 12
    auto ds = make_daily_panel(30, {std::vector<double>(30, 1.0)}, {mask});
    auto ws = toy_waveset(ds);
    auto records = wave_mask_records(ds, ws);
    REQUIRE(records.size() == 3);
    CHECK(records[0].valid);
    CHECK_FALSE(records[1].valid);
    CHECK(records[2].valid);
}
