#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wikiwalk {

using NodeId = std::uint32_t;
inline constexpr NodeId kNil = std::numeric_limits<NodeId>::max();

// Malformed or inconsistent input data. The CLI maps it to exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration or arguments. The CLI maps it to exit code 1.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Splits one TSV line on '\t'. Empty trailing fields are kept.
std::vector<std::string_view> split_tabs(std::string_view line);

// Strips a trailing '\r' left by CRLF files.
inline std::string_view chomp(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

}  // namespace wikiwalk
