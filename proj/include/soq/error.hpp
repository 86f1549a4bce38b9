#pragma once

#include <stdexcept>
#include <string>

namespace soq {

/// Input data violates a documented format or precondition.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter or configuration value is out of range.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed XML in a dump file. Carries the byte offset of the failure.
class XmlStreamError : public DataError {
public:
    XmlStreamError(const std::string& what, long long byte_offset)
        : DataError(what + " at byte " + std::to_string(byte_offset)),
          byte_offset_(byte_offset) {}

    long long byte_offset() const noexcept { return byte_offset_; }

private:
    long long byte_offset_;
};

} // namespace soq
