#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace discort {

// Runtime failures (bad input data, non-convergence). CLI maps these to exit 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid flag/config values. CLI maps these to exit 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void warn(const std::string& message);

// Bidirectional map between opaque string identifiers and dense indices.
// Ids are stored sorted lexicographically so matrix layouts are reproducible
// regardless of input order.
class IndexMap {
public:
    IndexMap() = default;
    explicit IndexMap(std::vector<std::string> ids);

    std::size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }
    const std::string& id(std::size_t index) const { return ids_.at(index); }
    const std::vector<std::string>& ids() const { return ids_; }

    std::optional<std::size_t> find(std::string_view id) const;
    std::size_t at(std::string_view id) const;
    bool contains(std::string_view id) const { return find(id).has_value(); }

    bool operator==(const IndexMap& other) const { return ids_ == other.ids_; }

private:
    std::vector<std::string> ids_;
};

// Deterministic 64-bit generator with in-house bounded draws. Sequences
// depend only on the seed, never on the standard library, so generated
// artifacts are reproducible bit-for-bit.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();
    // Uniform in [0, n). n must be > 0.
    std::size_t uniform_index(std::size_t n);
    // Uniform in [0, 1) with 53-bit resolution.
    double uniform_real();
    bool bernoulli(double p);
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(values[i - 1], values[j]);
        }
    }
    // Derives an independent stream, e.g. one per repetition or location.
    Rng fork(std::uint64_t stream) const;

private:
    std::uint64_t state_;
    std::uint64_t inc_;
};

std::uint64_t fnv1a64(std::string_view data);

// Shortest round-trip decimal rendering, used for every double that lands in
// an artifact so that identical values always serialize to identical bytes.
std::string format_double(double value);

std::string to_lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string trim(std::string_view s);

// Throw Error on anything but a complete numeric token.
double parse_double(std::string_view s);
std::int64_t parse_int64(std::string_view s);

[[noreturn]] void fail_at(const std::string& source, std::size_t line, const std::string& what);

// One physical CSV line -> fields. Double quotes wrap fields containing
// commas or quotes; doubled quotes escape. No embedded newlines.
std::vector<std::string> split_csv_row(const std::string& line, const std::string& source,
                                       std::size_t line_no);
std::string csv_escape(const std::string& field);

// getline tolerating trailing '\r' from CRLF files.
bool read_line(std::istream& in, std::string& line);

// Minimal chunked parallel-for. fn(i) must only write to slot i of
// preallocated output; results are then independent of the schedule and a
// jobs=1 run is byte-identical to any jobs>1 run.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace discort
