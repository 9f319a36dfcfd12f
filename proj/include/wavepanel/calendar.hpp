#pragma once

#include <chrono>
#include <compare>
#include <cstdio>
#include <string>

#include "wavepanel/errors.hpp"

namespace wavepanel {

// Calendar day stored as days since 1970-01-01 (proleptic Gregorian).
class Date {
public:
    Date() : days_(0) {}
    explicit Date(int days_since_epoch) : days_(days_since_epoch) {}

    static Date from_ymd(int year, int month, int day) {
        namespace ch = std::chrono;
        ch::year_month_day ymd{ch::year{year}, ch::month{static_cast<unsigned>(month)},
                               ch::day{static_cast<unsigned>(day)}};
        if (!ymd.ok()) {
            throw ParseError("invalid calendar day: " + std::to_string(year) + "-" +
                             std::to_string(month) + "-" + std::to_string(day));
        }
        return Date(static_cast<int>(ch::sys_days{ymd}.time_since_epoch().count()));
    }

    // Strict ISO-8601 YYYY-MM-DD.
    static Date parse(const std::string& s) {
        if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
            throw ParseError("bad date format (expected YYYY-MM-DD): '" + s + "'");
        }
        for (int i : {0, 1, 2, 3, 5, 6, 8, 9}) {
            if (s[i] < '0' || s[i] > '9') {
                throw ParseError("bad date format (expected YYYY-MM-DD): '" + s + "'");
            }
        }
        int y = std::stoi(s.substr(0, 4));
        int m = std::stoi(s.substr(5, 2));
        int d = std::stoi(s.substr(8, 2));
        return from_ymd(y, m, d);
    }

    std::string to_string() const {
        namespace ch = std::chrono;
        ch::year_month_day ymd{ch::sys_days{ch::days{days_}}};
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
        return std::string(buf);
    }

    int days_since_epoch() const { return days_; }

    // ISO weekday, 1 = Monday ... 7 = Sunday.
    int iso_weekday() const {
        return ((days_ % 7) + 7 + 3) % 7 + 1;  // 1970-01-01 was a Thursday
    }
    bool is_monday() const { return iso_weekday() == 1; }

    // Monday of the ISO week containing this day.
    Date week_monday() const { return Date(days_ - (iso_weekday() - 1)); }

    Date plus_days(int n) const { return Date(days_ + n); }

    friend int operator-(Date a, Date b) { return a.days_ - b.days_; }
    auto operator<=>(const Date&) const = default;

private:
    int days_;
};

// Inclusive day interval [first, last].
struct DayInterval {
    Date first;
    Date last;

    int length() const { return last - first + 1; }
    bool contains(Date d) const { return first <= d && d <= last; }
    bool contains(const DayInterval& o) const { return first <= o.first && o.last <= last; }
};

}  // namespace wavepanel
