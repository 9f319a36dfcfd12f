#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wavepanel/errors.hpp"

namespace wavepanel {

// Strict line-oriented CSV: no quoting, no embedded commas, LF or CRLF.
// Lines starting with '#' are comments and skipped.
class CsvReader {
public:
    CsvReader(const std::string& path, const std::vector<std::string>& expected_header)
        : path_(path), in_(path) {
        if (!in_) throw ParseError(path + ": cannot open file");
        std::vector<std::string> header;
        if (!next_row(header)) throw ParseError(path + ": empty file (missing header)");
        if (header != expected_header) {
            std::string want;
            for (const auto& h : expected_header) want += (want.empty() ? "" : ",") + h;
            std::string got;
            for (const auto& h : header) got += (got.empty() ? "" : ",") + h;
            throw ParseError(path + ":" + std::to_string(line_no_) +
                             ": bad header, expected '" + want + "' got '" + got + "'");
        }
        n_cols_ = expected_header.size();
    }

    // Reads the next data row; returns false at EOF.
    bool next_row(std::vector<std::string>& out) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            out.clear();
            size_t pos = 0;
            while (true) {
                size_t comma = line.find(',', pos);
                if (comma == std::string::npos) {
                    out.push_back(line.substr(pos));
                    break;
                }
                out.push_back(line.substr(pos, comma - pos));
                pos = comma + 1;
            }
            if (n_cols_ != 0 && out.size() != n_cols_) {
                throw ParseError(path_ + ":" + std::to_string(line_no_) + ": expected " +
                                 std::to_string(n_cols_) + " fields, got " +
                                 std::to_string(out.size()));
            }
            return true;
        }
        return false;
    }

    int line_no() const { return line_no_; }
    const std::string& path() const { return path_; }

    std::string where() const { return path_ + ":" + std::to_string(line_no_); }

    double parse_real(const std::string& field, const std::string& what) const {
        try {
            size_t used = 0;
            double v = std::stod(field, &used);
            if (used != field.size()) throw std::invalid_argument(field);
            return v;
        } catch (const std::exception&) {
            throw ParseError(where() + ": bad " + what + " value '" + field + "'");
        }
    }

    // Empty field means missing.
    double parse_real_or_missing(const std::string& field, const std::string& what) const {
        if (field.empty()) return std::numeric_limits<double>::quiet_NaN();
        return parse_real(field, what);
    }

private:
    std::string path_;
    std::ifstream in_;
    size_t n_cols_ = 0;
    int line_no_ = 0;
};

// Formats a real with up to `max_decimals` digits, trailing zeros trimmed.
inline std::string format_real(double v, int max_decimals = 10) {
    if (std::isnan(v)) return "";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", max_decimals, v);
    std::string s(buf);
    if (s.find('.') != std::string::npos) {
        size_t last = s.find_last_not_of('0');
        if (s[last] == '.') --last;
        s.erase(last + 1);
    }
    if (s == "-0") s = "0";
    return s;
}

inline std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return std::string(buf);
}

}  // namespace wavepanel
