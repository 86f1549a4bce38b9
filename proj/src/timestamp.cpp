#include "soq/timestamp.hpp"

#include "soq/error.hpp"

#include <charconv>
#include <cstdio>

namespace soq {

namespace {

using namespace std::chrono;

bool read_digits(std::string_view text, std::size_t pos, std::size_t count, int& out) {
    if (pos + count > text.size()) return false;
    int value = 0;
    for (std::size_t i = pos; i < pos + count; ++i) {
        char c = text[i];
        if (c < '0' || c > '9') return false;
        value = value * 10 + (c - '0');
    }
    out = value;
    return true;
}

} // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    // 0123456789012345678
    // 2008-07-31T21:42:52
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (text.size() < 19) return std::nullopt;
    if (!read_digits(text, 0, 4, y) || text[4] != '-' || !read_digits(text, 5, 2, mo) ||
        text[7] != '-' || !read_digits(text, 8, 2, d) || (text[10] != 'T' && text[10] != ' ') ||
        !read_digits(text, 11, 2, h) || text[13] != ':' || !read_digits(text, 14, 2, mi) ||
        text[16] != ':' || !read_digits(text, 17, 2, s)) {
        return std::nullopt;
    }
    std::size_t pos = 19;
    int millis = 0;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        int scale = 100;
        std::size_t digits = 0;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            millis += (text[pos] - '0') * scale;
            scale /= 10;
            ++pos;
            ++digits;
        }
        if (digits == 0) return std::nullopt;
    }
    if (pos < text.size() && text[pos] == 'Z') ++pos;
    if (pos != text.size()) return std::nullopt;

    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 60) return std::nullopt;
    return Timestamp{sys_days{ymd}} + hours{h} + minutes{mi} + seconds{s} + milliseconds{millis};
}

Timestamp require_timestamp(std::string_view text) {
    auto t = parse_timestamp(text);
    if (!t) throw DataError("invalid timestamp '" + std::string(text) + "'");
    return *t;
}

std::string format_timestamp(Timestamp t) {
    auto day_point = floor<days>(t);
    year_month_day ymd{day_point};
    auto rest = t - day_point;
    auto h = duration_cast<hours>(rest);
    rest -= h;
    auto mi = duration_cast<minutes>(rest);
    rest -= mi;
    auto s = duration_cast<seconds>(rest);
    rest -= s;
    char buf[40];
    int n = std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                          static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                          static_cast<int>(h.count()), static_cast<int>(mi.count()),
                          static_cast<int>(s.count()));
    std::string out(buf, static_cast<std::size_t>(n));
    if (rest.count() != 0) {
        std::snprintf(buf, sizeof buf, ".%03d", static_cast<int>(rest.count()));
        out += buf;
    }
    return out;
}

double days_between(Timestamp from, Timestamp to) {
    return static_cast<double>((to - from).count()) / static_cast<double>(kMillisPerDay);
}

int day_of_week(Timestamp t) {
    weekday wd{floor<days>(t)};
    return static_cast<int>(wd.iso_encoding()) - 1;
}

int hour_of_day(Timestamp t) {
    auto rest = t - floor<days>(t);
    return static_cast<int>(duration_cast<hours>(rest).count());
}

int calendar_year(Timestamp t) {
    return static_cast<int>(year_month_day{floor<days>(t)}.year());
}

Timestamp year_start(int y) {
    return Timestamp{sys_days{year{y} / January / 1}};
}

} // namespace soq
