#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace prforge {

/// A UTC instant with one-second resolution (GitHub reports no finer).
struct Timestamp {
    std::int64_t seconds = 0; // since the Unix epoch

    auto operator<=>(const Timestamp&) const = default;
};

/// Parses ISO-8601 ("2023-04-01T12:30:00Z", "...+02:00", fractional seconds
/// dropped) and normalizes to UTC. Throws prforge::Error("bad_timestamp").
Timestamp parse_timestamp(std::string_view text);

/// Canonical form: "YYYY-MM-DDTHH:MM:SSZ".
std::string format_timestamp(Timestamp ts);

} // namespace prforge
