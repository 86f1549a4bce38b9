#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace soq {

/// UTC instant, millisecond resolution. Dump timestamps have no zone suffix
/// and are always interpreted as UTC.
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

inline constexpr std::int64_t kMillisPerDay = 86'400'000;

/// Parses `YYYY-MM-DDTHH:MM:SS[.fff][Z]`. A space is accepted in place of `T`.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// Like parse_timestamp but throws DataError naming the text.
Timestamp require_timestamp(std::string_view text);

/// Inverse of parse_timestamp; the fraction is emitted only when non-zero.
std::string format_timestamp(Timestamp t);

/// Fractional days from `from` to `to` (negative when `to` precedes `from`).
double days_between(Timestamp from, Timestamp to);

/// Monday = 0 ... Sunday = 6.
int day_of_week(Timestamp t);
int hour_of_day(Timestamp t);
int calendar_year(Timestamp t);

Timestamp year_start(int year);

} // namespace soq
