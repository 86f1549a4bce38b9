#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace soq {

/// Quotes a field when it contains a comma, quote, or line break.
std::string csv_escape(std::string_view field);
std::string join_csv(const std::vector<std::string>& fields);

/// Nine significant digits, the precision used for exported feature values.
std::string format_real(double value);
/// Shortest text that parses back to the identical double.
std::string format_exact(double value);

/// Throws DataError naming `what` on malformed input.
std::int64_t parse_int(std::string_view text, std::string_view what);
double parse_real(std::string_view text, std::string_view what);

/// RFC 4180-style reader; quoted fields may span lines.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    /// Reads the next record. Returns false at end of input.
    bool next(std::vector<std::string>& fields);
    /// 1-based line number where the last record started.
    std::size_t line() const { return record_line_; }

private:
    std::istream& in_;
    std::size_t line_ = 0;
    std::size_t record_line_ = 0;
};

} // namespace soq
