#pragma once

#include <charconv>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ecsim/error.hpp"

namespace ecsim::io {

/// Shortest round-trip decimal form; integral values print without a fraction.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string format_number(long long v) { return std::to_string(v); }

using Cell = std::variant<double, long long, std::string, std::monostate>;

inline std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string format_cell(const Cell& c) {
    struct V {
        std::string operator()(double d) const { return format_number(d); }
        std::string operator()(long long i) const { return format_number(i); }
        std::string operator()(const std::string& s) const { return quote_if_needed(s); }
        std::string operator()(std::monostate) const { return {}; }
    };
    return std::visit(V{}, c);
}

class CsvWriter {
public:
    CsvWriter(std::ostream& os, const std::vector<std::string>& header) : os_(os), width_(header.size()) {
        write_fields(header);
    }

    void row(const std::vector<double>& values) {
        check(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << format_number(values[i]);
        os_ << '\n';
    }

    void cells(const std::vector<Cell>& cells) {
        check(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << format_cell(cells[i]);
        os_ << '\n';
    }

private:
    void check(std::size_t n) const {
        if (n != width_) throw ShapeError("csv row has " + std::to_string(n) + " fields, header has " + std::to_string(width_));
    }
    void write_fields(const std::vector<std::string>& f) {
        for (std::size_t i = 0; i < f.size(); ++i) os_ << (i ? "," : "") << quote_if_needed(f[i]);
        os_ << '\n';
    }

    std::ostream& os_;
    std::size_t width_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw ParseError("csv: no column named " + std::string(name));
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (quoted) throw ParseError("csv: unterminated quote");
    out.push_back(std::move(cur));
    return out;
}

inline CsvTable read_csv(std::istream& is) {
    CsvTable t;
    std::string line;
    if (!std::getline(is, line)) throw ParseError("csv: empty input");
    t.header = split_csv_line(line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != t.header.size()) throw ParseError("csv: ragged row");
        t.rows.push_back(std::move(f));
    }
    return t;
}

inline std::optional<double> parse_number(std::string_view s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ParseError("csv: not a number: " + std::string(s));
    return v;
}

}  // namespace ecsim::io
