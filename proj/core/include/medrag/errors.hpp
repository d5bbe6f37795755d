#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace medrag {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed XML input; byte_offset points at the failing position in the
// overall input stream.
struct XmlParseError : Error {
    XmlParseError(const std::string& what, std::size_t offset)
        : Error(what), byte_offset(offset) {}
    std::size_t byte_offset;
};

// Network-level failure after all retries were exhausted.
struct TransportError : Error {
    TransportError(const std::string& what, int attempts_made)
        : Error(what), attempts(attempts_made) {}
    int attempts;
};

// The E-Utilities server answered but reported an error of its own.
struct QueryError : Error {
    using Error::Error;
};

struct IndexLoadError : Error {
    enum class Kind { bad_magic, bad_version, mismatch, truncated, bad_data };
    IndexLoadError(Kind k, const std::string& what) : Error(what), kind(k) {}
    Kind kind;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace medrag
