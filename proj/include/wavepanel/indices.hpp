#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "wavepanel/errors.hpp"
#include "wavepanel/panel.hpp"
#include "wavepanel/waves.hpp"

namespace wavepanel {

// The five per-country mask-usage indices, each an average of daily mask
// usage over a wave-derived day set.
struct MaskIndices {
    double maskall = 0.0;
    double maskinwave = 0.0;
    double maskinterwave = 0.0;
    double maskbeginwave = 0.0;
    double maskpeakwave = 0.0;
};

struct MaskIndexTable {
    std::vector<std::string> countries;
    std::vector<MaskIndices> rows;

    std::vector<double> column(const std::string& name) const {
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) {
            if (name == "maskall") out.push_back(r.maskall);
            else if (name == "maskinwave") out.push_back(r.maskinwave);
            else if (name == "maskinterwave") out.push_back(r.maskinterwave);
            else if (name == "maskbeginwave") out.push_back(r.maskbeginwave);
            else if (name == "maskpeakwave") out.push_back(r.maskpeakwave);
            else throw DomainError("unknown mask index '" + name + "'");
        }
        return out;
    }
};

struct WaveMaskRecord {
    std::string country;
    int phase_index = 0;
    double begin_avg = 0.0;
    double peak_avg = 0.0;
    double wave_deaths_pm_mean = 0.0;
    bool valid = true;  // false when a window had no mask data at all
};

namespace detail {

// Mean of non-missing daily mask values over the flagged day set.
inline double masked_mean(const PanelDataset& ds, int country, const std::vector<char>& in_set,
                          const std::string& what) {
    double sum = 0.0;
    int cnt = 0;
    bool any_day = false;
    for (int i = 0; i < ds.n_days(); ++i) {
        if (!in_set[i]) continue;
        any_day = true;
        double v = ds.mask_daily[country][i];
        if (!std::isnan(v)) {
            sum += v;
            ++cnt;
        }
    }
    if (!any_day) {
        throw DomainError("empty day set for " + ds.countries[country] + "/" + what);
    }
    if (cnt == 0) {
        throw DomainError("no mask data in day set for " + ds.countries[country] + "/" + what);
    }
    return sum / cnt;
}

inline void flag_interval(const PanelDataset& ds, const DayInterval& iv, std::vector<char>& set) {
    for (int i = ds.day_index(iv.first); i <= ds.day_index(iv.last); ++i) set[i] = 1;
}

}  // namespace detail

// Computes the five indices for every country. Missing mask days are
// excluded from both numerator and denominator; the interwave day set is the
// per-country complement of the union of that country's waves.
inline MaskIndexTable compute_indices(const PanelDataset& ds, const WaveSet& ws) {
    MaskIndexTable table;
    table.countries = ds.countries;
    table.rows.resize(ds.n_countries());

    for (size_t c = 0; c < ds.n_countries(); ++c) {
        std::vector<char> inwave(ds.n_days(), 0), begin_set(ds.n_days(), 0),
            peak_set(ds.n_days(), 0), all_set(ds.n_days(), 1);
        for (const auto& w : ws.waves) {
            if (w.country != ds.countries[c]) continue;
            detail::flag_interval(ds, w.span, inwave);
            detail::flag_interval(ds, w.begin_window, begin_set);
            detail::flag_interval(ds, w.peak_window, peak_set);
        }
        std::vector<char> interwave(ds.n_days());
        for (int i = 0; i < ds.n_days(); ++i) interwave[i] = !inwave[i];

        MaskIndices& m = table.rows[c];
        int ci = static_cast<int>(c);
        m.maskall = detail::masked_mean(ds, ci, all_set, "maskall");
        m.maskinwave = detail::masked_mean(ds, ci, inwave, "maskinwave");
        m.maskinterwave = detail::masked_mean(ds, ci, interwave, "maskinterwave");
        m.maskbeginwave = detail::masked_mean(ds, ci, begin_set, "maskbeginwave");
        m.maskpeakwave = detail::masked_mean(ds, ci, peak_set, "maskpeakwave");
    }
    return table;
}

// Per-wave begin/peak mask averages with the wave's mean mortality; one
// record per (country, phase). A record whose begin or peak window has no
// mask data at all is marked invalid and skipped downstream with a warning.
inline std::vector<WaveMaskRecord> wave_mask_records(const PanelDataset& ds, const WaveSet& ws) {
    std::vector<WaveMaskRecord> records;
    records.reserve(ws.waves.size());
    for (const auto& w : ws.waves) {
        WaveMaskRecord rec;
        rec.country = w.country;
        rec.phase_index = w.phase_index;
        rec.wave_deaths_pm_mean = w.wave_deaths_pm_mean;
        int c = ds.country_index(w.country);
        std::vector<char> bset(ds.n_days(), 0), pset(ds.n_days(), 0);
        detail::flag_interval(ds, w.begin_window, bset);
        detail::flag_interval(ds, w.peak_window, pset);
        try {
            rec.begin_avg = detail::masked_mean(ds, c, bset, "beginwindow");
            rec.peak_avg = detail::masked_mean(ds, c, pset, "peakwindow");
        } catch (const DomainError& e) {
            std::fprintf(stderr, "warning: wave record %s/phase%d dropped: %s\n",
                         w.country.c_str(), w.phase_index, e.what());
            rec.valid = false;
            rec.begin_avg = rec.peak_avg = std::numeric_limits<double>::quiet_NaN();
        }
        records.push_back(rec);
    }
    return records;
}

}  // namespace wavepanel
