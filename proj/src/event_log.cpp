#include "discort/event_log.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace discort {

namespace {

using nlohmann::json;

// Days since 1970-01-01 for a proleptic Gregorian date (Howard Hinnant's
// civil-calendar algorithm).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y += m <= 2;
}

unsigned days_in_month(std::int64_t y, unsigned m) {
    static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2) {
        const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
        return leap ? 29 : 28;
    }
    return kDays[m - 1];
}

bool all_digits(std::string_view s) {
    return !s.empty() &&
           std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

// Full-line '#' comments may appear anywhere in an input file; generated
// artifacts carry a provenance comment at the top.
bool comment_line(const std::string& line) {
    const auto pos = line.find_first_not_of(" \t");
    return pos != std::string::npos && line[pos] == '#';
}

// First non-blank, non-comment line; false at EOF.
bool read_data_line(std::istream& in, std::string& line, std::size_t& line_no) {
    while (read_line(in, line)) {
        ++line_no;
        if (trim(line).empty() || comment_line(line)) continue;
        return true;
    }
    return false;
}

int parse_fixed_digits(std::string_view s) {
    int value = 0;
    for (char c : s) value = value * 10 + (c - '0');
    return value;
}

EventLog finalize_log(std::vector<UsageEvent> events, int time_bins, const std::string& source) {
    if (events.empty()) throw Error(source + ": empty event log");
    std::vector<std::string> things, users, locations;
    for (const auto& e : events) {
        things.push_back(e.thing);
        users.push_back(e.user);
        locations.push_back(e.location);
    }
    EventLog log;
    log.events = std::move(events);
    log.things = IndexMap(std::move(things));
    log.users = IndexMap(std::move(users));
    log.locations = IndexMap(std::move(locations));
    log.time_bins = time_bins;
    return log;
}

EventLog parse_event_log_csv(std::istream& in, const std::string& source, int time_bins) {
    std::string line;
    std::size_t line_no = 0;
    if (!read_data_line(in, line, line_no)) throw Error(source + ": empty event log");
    const auto header = split_csv_row(line, source, line_no);
    static const std::vector<std::string> kColumns = {"thing", "user", "timestamp", "location"};
    std::vector<std::size_t> col(kColumns.size());
    for (std::size_t k = 0; k < kColumns.size(); ++k) {
        std::size_t found = header.size();
        for (std::size_t h = 0; h < header.size(); ++h) {
            if (trim(header[h]) == kColumns[k]) {
                if (found != header.size())
                    fail_at(source, line_no, "duplicate column '" + kColumns[k] + "'");
                found = h;
            }
        }
        if (found == header.size())
            fail_at(source, line_no, "missing required column '" + kColumns[k] + "'");
        col[k] = found;
    }

    std::vector<UsageEvent> events;
    while (read_data_line(in, line, line_no)) {
        const auto fields = split_csv_row(line, source, line_no);
        if (fields.size() != header.size())
            fail_at(source, line_no,
                    "expected " + std::to_string(header.size()) + " fields, got " +
                        std::to_string(fields.size()));
        UsageEvent e;
        e.thing = trim(fields[col[0]]);
        e.user = trim(fields[col[1]]);
        e.location = trim(fields[col[3]]);
        if (e.thing.empty()) fail_at(source, line_no, "empty thing id");
        if (e.user.empty()) fail_at(source, line_no, "empty user id");
        if (e.location.empty()) fail_at(source, line_no, "empty location id");
        try {
            e.timestamp = parse_iso8601(trim(fields[col[2]]));
        } catch (const Error& err) {
            fail_at(source, line_no, err.what());
        }
        events.push_back(std::move(e));
    }
    return finalize_log(std::move(events), time_bins, source);
}

std::string require_string(const json& obj, const char* key, const std::string& source,
                           std::size_t line_no) {
    const auto it = obj.find(key);
    if (it == obj.end()) fail_at(source, line_no, std::string("missing key '") + key + "'");
    if (!it->is_string()) fail_at(source, line_no, std::string("key '") + key + "' must be a string");
    return it->get<std::string>();
}

EventLog parse_event_log_jsonl(std::istream& in, const std::string& source, int time_bins) {
    std::vector<UsageEvent> events;
    std::string line;
    std::size_t line_no = 0;
    while (read_data_line(in, line, line_no)) {
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& err) {
            fail_at(source, line_no, std::string("invalid JSON: ") + err.what());
        }
        if (!obj.is_object()) fail_at(source, line_no, "expected a JSON object");
        UsageEvent e;
        e.thing = require_string(obj, "thing", source, line_no);
        e.user = require_string(obj, "user", source, line_no);
        e.location = require_string(obj, "location", source, line_no);
        const auto ts = obj.find("timestamp");
        if (ts == obj.end()) fail_at(source, line_no, "missing key 'timestamp'");
        if (ts->is_string()) {
            try {
                e.timestamp = parse_iso8601(ts->get<std::string>());
            } catch (const Error& err) {
                fail_at(source, line_no, err.what());
            }
        } else if (ts->is_number_integer()) {
            e.timestamp = ts->get<std::int64_t>();
        } else {
            fail_at(source, line_no, "key 'timestamp' must be an ISO-8601 string or epoch seconds");
        }
        if (e.thing.empty()) fail_at(source, line_no, "empty thing id");
        if (e.user.empty()) fail_at(source, line_no, "empty user id");
        if (e.location.empty()) fail_at(source, line_no, "empty location id");
        events.push_back(std::move(e));
    }
    return finalize_log(std::move(events), time_bins, source);
}

}  // namespace

FriendshipMatrix::FriendshipMatrix(IndexMap users)
    : users_(std::move(users)), adj_(users_.size() * users_.size(), 0) {}

bool FriendshipMatrix::at(std::size_t i, std::size_t j) const {
    return adj_[i * users_.size() + j] != 0;
}

void FriendshipMatrix::set(std::size_t i, std::size_t j, bool value) {
    adj_[i * users_.size() + j] = value ? 1 : 0;
}

std::vector<std::size_t> FriendshipMatrix::friends_of(std::size_t i) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < users_.size(); ++j) {
        if (at(i, j)) out.push_back(j);
    }
    return out;
}

std::size_t FriendshipMatrix::edge_count() const {
    std::size_t count = 0;
    for (std::size_t i = 0; i < users_.size(); ++i) {
        for (std::size_t j = i + 1; j < users_.size(); ++j) {
            if (at(i, j) || at(j, i)) ++count;
        }
    }
    return count;
}

LogFormat detect_log_format(const std::filesystem::path& path) {
    const auto ext = to_lower(path.extension().string());
    if (ext == ".csv") return LogFormat::Csv;
    if (ext == ".jsonl") return LogFormat::Jsonl;
    throw UsageError("cannot infer log format from '" + path.string() +
                     "': expected a .csv or .jsonl extension");
}

EventLog parse_event_log(const std::filesystem::path& path, LogFormat format, int time_bins) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    return parse_event_log_stream(in, format, path.string(), time_bins);
}

EventLog parse_event_log_stream(std::istream& in, LogFormat format, const std::string& source_name,
                                int time_bins) {
    if (time_bins < 1) throw UsageError("time_bins must be at least 1");
    return format == LogFormat::Csv ? parse_event_log_csv(in, source_name, time_bins)
                                    : parse_event_log_jsonl(in, source_name, time_bins);
}

void write_event_log_csv(const EventLog& log, std::ostream& out) {
    out << "thing,user,timestamp,location\n";
    for (const auto& e : log.events) {
        out << csv_escape(e.thing) << ',' << csv_escape(e.user) << ','
            << format_iso8601_utc(e.timestamp) << ',' << csv_escape(e.location) << '\n';
    }
}

std::vector<DiscretizedEvent> discretize(const EventLog& log, int tz_offset_seconds) {
    constexpr std::int64_t kDay = 86400;
    std::vector<DiscretizedEvent> out;
    out.reserve(log.events.size());
    for (const auto& e : log.events) {
        const std::int64_t shifted = e.timestamp + tz_offset_seconds;
        const std::int64_t in_day = ((shifted % kDay) + kDay) % kDay;
        DiscretizedEvent d;
        d.thing = log.things.at(e.thing);
        d.user = log.users.at(e.user);
        d.location = log.locations.at(e.location);
        d.day = (shifted - in_day) / kDay;
        d.bin = static_cast<int>(in_day * log.time_bins / kDay);
        out.push_back(d);
    }
    return out;
}

FriendshipMatrix parse_friendships(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    return parse_friendships_stream(in, path.string());
}

FriendshipMatrix parse_friendships_stream(std::istream& in, const std::string& source_name) {
    std::string line;
    std::size_t line_no = 0;
    if (!read_data_line(in, line, line_no)) throw Error(source_name + ": empty friendship file");
    auto header = split_csv_row(line, source_name, line_no);
    if (header.size() != 2 || trim(header[0]) != "user_a" || trim(header[1]) != "user_b")
        fail_at(source_name, line_no, "expected header 'user_a,user_b'");

    std::vector<std::pair<std::string, std::string>> edges;
    std::vector<std::string> ids;
    while (read_data_line(in, line, line_no)) {
        const auto fields = split_csv_row(line, source_name, line_no);
        if (fields.size() != 2)
            fail_at(source_name, line_no, "expected 2 fields, got " + std::to_string(fields.size()));
        std::string a = trim(fields[0]);
        std::string b = trim(fields[1]);
        if (a.empty() || b.empty()) fail_at(source_name, line_no, "empty user id");
        ids.push_back(a);
        ids.push_back(b);
        edges.emplace_back(std::move(a), std::move(b));
    }

    FriendshipMatrix raw{IndexMap(std::move(ids))};
    for (const auto& [a, b] : edges) raw.set(raw.users().at(a), raw.users().at(b));
    return raw;
}

FriendshipMatrix validate_friendships(const FriendshipMatrix& raw, const EventLog& log) {
    FriendshipMatrix out{log.users};
    std::size_t unknown_users = 0;
    for (const auto& id : raw.users().ids()) {
        if (!log.users.contains(id)) ++unknown_users;
    }

    std::size_t asymmetric = 0;
    std::size_t self_edges = 0;
    const auto& raw_users = raw.users();
    for (std::size_t i = 0; i < raw_users.size(); ++i) {
        const auto oi = log.users.find(raw_users.id(i));
        for (std::size_t j = i; j < raw_users.size(); ++j) {
            const bool ij = raw.at(i, j);
            const bool ji = raw.at(j, i);
            if (!ij && !ji) continue;
            if (i == j) {
                ++self_edges;
                continue;
            }
            const auto oj = log.users.find(raw_users.id(j));
            if (!oi || !oj) continue;
            if (ij != ji) ++asymmetric;
            out.set(*oi, *oj);
            out.set(*oj, *oi);
        }
    }

    if (unknown_users > 0)
        warn(std::to_string(unknown_users) +
             " friendship user(s) do not appear in the event log; their edges were dropped");
    if (asymmetric > 0)
        warn(std::to_string(asymmetric) +
             " friendship pair(s) were listed in one direction only; treated as mutual");
    if (self_edges > 0)
        warn(std::to_string(self_edges) + " self-friendship row(s) ignored");
    return out;
}

std::vector<ThingMetadata> parse_metadata(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    return parse_metadata_stream(in, path.string());
}

std::vector<ThingMetadata> parse_metadata_stream(std::istream& in, const std::string& source_name) {
    std::vector<ThingMetadata> out;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (read_data_line(in, line, line_no)) {
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& err) {
            fail_at(source_name, line_no, std::string("invalid JSON: ") + err.what());
        }
        if (!obj.is_object()) fail_at(source_name, line_no, "expected a JSON object");
        ThingMetadata m;
        m.thing = require_string(obj, "thing", source_name, line_no);
        if (m.thing.empty()) fail_at(source_name, line_no, "empty thing id");
        if (!seen.insert(m.thing).second)
            fail_at(source_name, line_no, "duplicate metadata for thing '" + m.thing + "'");
        if (const auto it = obj.find("description"); it != obj.end()) {
            if (!it->is_string())
                fail_at(source_name, line_no, "key 'description' must be a string");
            m.description = it->get<std::string>();
        }
        if (const auto it = obj.find("labels"); it != obj.end()) {
            if (!it->is_array()) fail_at(source_name, line_no, "key 'labels' must be an array");
            for (const auto& v : *it) {
                if (!v.is_string())
                    fail_at(source_name, line_no, "labels must be strings");
                m.labels.push_back(v.get<std::string>());
            }
        }
        out.push_back(std::move(m));
    }
    return out;
}

void write_metadata_jsonl(const std::vector<ThingMetadata>& metadata, std::ostream& out) {
    for (const auto& m : metadata) {
        json obj;
        obj["thing"] = m.thing;
        obj["description"] = m.description;
        obj["labels"] = m.labels;
        out << obj.dump() << '\n';
    }
}

void write_friendships_csv(const FriendshipMatrix& friendships, std::ostream& out) {
    out << "user_a,user_b\n";
    const auto& users = friendships.users();
    for (std::size_t i = 0; i < users.size(); ++i) {
        for (std::size_t j = i + 1; j < users.size(); ++j) {
            if (friendships.at(i, j) || friendships.at(j, i))
                out << csv_escape(users.id(i)) << ',' << csv_escape(users.id(j)) << '\n';
        }
    }
}

std::int64_t parse_iso8601(std::string_view text) {
    const auto fail = [&]() -> void {
        throw Error("invalid ISO-8601 timestamp '" + std::string(text) + "'");
    };
    // Minimal shape: YYYY-MM-DDTHH:MM:SS
    if (text.size() < 19) fail();
    if (text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[13] != ':' || text[16] != ':')
        fail();
    const auto year_s = text.substr(0, 4);
    const auto month_s = text.substr(5, 2);
    const auto day_s = text.substr(8, 2);
    const auto hour_s = text.substr(11, 2);
    const auto min_s = text.substr(14, 2);
    const auto sec_s = text.substr(17, 2);
    for (const auto part : {year_s, month_s, day_s, hour_s, min_s, sec_s}) {
        if (!all_digits(part)) fail();
    }
    const int year = parse_fixed_digits(year_s);
    const int month = parse_fixed_digits(month_s);
    const int day = parse_fixed_digits(day_s);
    const int hour = parse_fixed_digits(hour_s);
    const int minute = parse_fixed_digits(min_s);
    const int second = parse_fixed_digits(sec_s);
    if (month < 1 || month > 12) fail();
    if (day < 1 || static_cast<unsigned>(day) > days_in_month(year, static_cast<unsigned>(month)))
        fail();
    if (hour > 23 || minute > 59 || second > 59) fail();

    std::size_t pos = 19;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        const std::size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos == start) fail();
        // Fractional seconds are truncated.
    }

    std::int64_t offset = 0;
    if (pos < text.size()) {
        const char c = text[pos];
        if (c == 'Z' || c == 'z') {
            ++pos;
        } else if (c == '+' || c == '-') {
            const int sign = c == '+' ? 1 : -1;
            ++pos;
            if (pos + 2 > text.size()) fail();
            const auto oh = text.substr(pos, 2);
            if (!all_digits(oh)) fail();
            pos += 2;
            if (pos < text.size() && text[pos] == ':') ++pos;
            if (pos + 2 > text.size()) fail();
            const auto om = text.substr(pos, 2);
            if (!all_digits(om)) fail();
            pos += 2;
            const int off_h = parse_fixed_digits(oh);
            const int off_m = parse_fixed_digits(om);
            if (off_h > 23 || off_m > 59) fail();
            offset = sign * (off_h * 3600LL + off_m * 60LL);
        } else {
            fail();
        }
    }
    if (pos != text.size()) fail();

    const std::int64_t days =
        days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
    return days * 86400 + hour * 3600 + minute * 60 + second - offset;
}

std::string format_iso8601_utc(std::int64_t seconds) {
    std::int64_t days = seconds / 86400;
    std::int64_t rem = seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    std::int64_t year = 0;
    unsigned month = 0;
    unsigned day = 0;
    civil_from_days(days, year, month, day);
    const int hour = static_cast<int>(rem / 3600);
    const int minute = static_cast<int>((rem / 60) % 60);
    const int second = static_cast<int>(rem % 60);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02d:%02d:%02dZ",
                  static_cast<long long>(year), month, day, hour, minute, second);
    return buf;
}

}  // namespace discort
