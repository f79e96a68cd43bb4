#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "discort/common.hpp"

namespace discort {

// One human-thing interaction: who used what, when, where.
// Timestamps are UTC seconds since the Unix epoch.
struct UsageEvent {
    std::string thing;
    std::string user;
    std::int64_t timestamp = 0;
    std::string location;

    bool operator==(const UsageEvent&) const = default;
};

// Parsed usage log plus the entity sets derived from it. Entity index maps
// are sorted lexicographically, so node numbering is reproducible.
struct EventLog {
    std::vector<UsageEvent> events;
    IndexMap things;
    IndexMap users;
    IndexMap locations;
    int time_bins = 24;

    bool operator==(const EventLog&) const = default;
};

// An event with entities resolved to dense indices and the timestamp mapped
// to an absolute day index plus a time-of-day bin in [0, time_bins).
struct DiscretizedEvent {
    std::size_t thing = 0;
    std::size_t user = 0;
    std::size_t location = 0;
    std::int64_t day = 0;
    int bin = 0;
};

// Boolean adjacency over a user set. Parsed input may be directed;
// validate_friendships() returns the symmetrized, diagonal-free relation
// the rest of the engine assumes.
class FriendshipMatrix {
public:
    FriendshipMatrix() = default;
    explicit FriendshipMatrix(IndexMap users);

    const IndexMap& users() const { return users_; }
    bool at(std::size_t i, std::size_t j) const;
    void set(std::size_t i, std::size_t j, bool value = true);
    std::vector<std::size_t> friends_of(std::size_t i) const;
    std::size_t edge_count() const;
    bool empty() const { return users_.empty(); }

private:
    IndexMap users_;
    std::vector<std::uint8_t> adj_;
};

struct ThingMetadata {
    std::string thing;
    std::string description;
    std::vector<std::string> labels;

    bool operator==(const ThingMetadata&) const = default;
};

enum class LogFormat { Csv, Jsonl };

// Picks csv/jsonl by file extension; anything else is an error.
LogFormat detect_log_format(const std::filesystem::path& path);

EventLog parse_event_log(const std::filesystem::path& path, LogFormat format, int time_bins = 24);
EventLog parse_event_log_stream(std::istream& in, LogFormat format, const std::string& source_name,
                                int time_bins = 24);

void write_event_log_csv(const EventLog& log, std::ostream& out);

std::vector<DiscretizedEvent> discretize(const EventLog& log, int tz_offset_seconds = 0);

// Raw friendship edges exactly as listed in the file; may be asymmetric and
// mention users absent from any log. validate_friendships() conforms it.
FriendshipMatrix parse_friendships(const std::filesystem::path& path);
FriendshipMatrix parse_friendships_stream(std::istream& in, const std::string& source_name);

// Restricts the relation to users present in the log (spanning all of them)
// and symmetrizes it: an edge present in either direction is kept, with a
// warning when the input was one-sided.
FriendshipMatrix validate_friendships(const FriendshipMatrix& raw, const EventLog& log);

std::vector<ThingMetadata> parse_metadata(const std::filesystem::path& path);
std::vector<ThingMetadata> parse_metadata_stream(std::istream& in, const std::string& source_name);
void write_metadata_jsonl(const std::vector<ThingMetadata>& metadata, std::ostream& out);
void write_friendships_csv(const FriendshipMatrix& friendships, std::ostream& out);

// Strict ISO-8601 instant: "YYYY-MM-DDTHH:MM:SS" with optional fractional
// seconds (truncated) and optional "Z" or "+HH:MM"/"-HH:MM" offset; a missing
// suffix means UTC. Returns UTC seconds since epoch.
std::int64_t parse_iso8601(std::string_view text);
std::string format_iso8601_utc(std::int64_t seconds);

}  // namespace discort
