#include "soq/csv.hpp"

#include "soq/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>

namespace soq {

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string join_csv(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_escape(fields[i]);
    }
    return out;
}

std::string format_real(double value) {
    if (value == 0) return "0";
    char buf[32];
    int n = std::snprintf(buf, sizeof buf, "%.9g", value);
    return std::string(buf, static_cast<std::size_t>(n));
}

std::string format_exact(double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

std::int64_t parse_int(std::string_view text, std::string_view what) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw DataError("invalid integer for " + std::string(what) + ": '" + std::string(text) + "'");
    }
    return value;
}

double parse_real(std::string_view text, std::string_view what) {
    double value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() || !std::isfinite(value)) {
        throw DataError("invalid number for " + std::string(what) + ": '" + std::string(text) + "'");
    }
    return value;
}

bool CsvReader::next(std::vector<std::string>& fields) {
    fields.clear();
    std::string line;
    if (!std::getline(in_, line)) return false;
    ++line_;
    record_line_ = line_;
    std::string field;
    bool quoted = false;
    std::size_t i = 0;
    while (true) {
        if (i >= line.size()) {
            if (quoted) {
                // Quoted field continues on the next physical line.
                if (!std::getline(in_, line)) throw DataError("unterminated quoted CSV field at line " + std::to_string(record_line_));
                ++line_;
                field += '\n';
                i = 0;
                continue;
            }
            if (!field.empty() && field.back() == '\r') field.pop_back();
            fields.push_back(std::move(field));
            return true;
        }
        char c = line[i++];
        if (quoted) {
            if (c == '"') {
                if (i < line.size() && line[i] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
}

} // namespace soq
