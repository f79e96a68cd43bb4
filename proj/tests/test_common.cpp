#include <doctest.h>

#include <atomic>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "discort/common.hpp"

using namespace discort;

TEST_CASE("IndexMap sorts, dedupes, and round-trips lookups") {
    IndexMap map({"pan", "stove", "blender", "pan"});
    REQUIRE(map.size() == 3);
    CHECK(map.id(0) == "blender");
    CHECK(map.id(1) == "pan");
    CHECK(map.id(2) == "stove");
    CHECK(map.at("stove") == 2);
    CHECK(map.find("toaster") == std::nullopt);
    CHECK(map.contains("pan"));
    CHECK_FALSE(map.contains("oven"));
    CHECK_THROWS_AS(map.at("oven"), Error);
    for (std::size_t i = 0; i < map.size(); ++i) CHECK(map.at(map.id(i)) == i);
}

TEST_CASE("IndexMap handles the empty set") {
    IndexMap map{std::vector<std::string>{}};
    CHECK(map.size() == 0);
    CHECK(map.empty());
    CHECK_FALSE(map.contains(""));
}

TEST_CASE("fnv1a64 matches the reference test vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("Rng is deterministic for a fixed seed") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng c(42), d(43);
    bool differs = false;
    for (int i = 0; i < 10; ++i) differs |= c.next_u64() != d.next_u64();
    CHECK(differs);
}

TEST_CASE("Rng::uniform_index stays in range and covers it") {
    Rng rng(7);
    std::set<std::size_t> seen;
    for (int i = 0; i < 2000; ++i) {
        const auto v = rng.uniform_index(10);
        REQUIRE(v < 10);
        seen.insert(v);
    }
    CHECK(seen.size() == 10);
}

TEST_CASE("Rng::uniform_real lies in [0,1) with a plausible mean") {
    Rng rng(11);
    double sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double v = rng.uniform_real();
        REQUIRE(v >= 0.0);
        REQUIRE(v < 1.0);
        sum += v;
    }
    CHECK(std::abs(sum / n - 0.5) < 0.02);
}

TEST_CASE("Rng::fork streams are independent of the parent and each other") {
    Rng parent(99);
    Rng f0 = parent.fork(0);
    Rng f1 = parent.fork(1);
    // Forking must not consume parent state.
    Rng parent2(99);
    CHECK(parent.next_u64() == parent2.next_u64());
    CHECK(f0.next_u64() != f1.next_u64());
    // Same fork of the same seed is reproducible.
    Rng parent3(99);
    Rng f0b = parent3.fork(0);
    Rng f0c = Rng(99).fork(0);
    CHECK(f0b.next_u64() == f0c.next_u64());
}

TEST_CASE("Rng::shuffle permutes without losing elements") {
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    auto sorted = v;
    Rng rng(5);
    rng.shuffle(v);
    CHECK(v != sorted);
    auto resorted = v;
    std::sort(resorted.begin(), resorted.end());
    CHECK(resorted == sorted);
}

TEST_CASE("format_double round-trips and prints integers compactly") {
    CHECK(format_double(0.0) == "0");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5) == "-2.5");
    const double values[] = {0.1, 1.0 / 3.0, 1e-9, 123456.789, 2.0 / 3.0};
    for (double v : values) {
        CHECK(parse_double(format_double(v)) == v);
        CHECK(parse_double(format_double(-v)) == -v);
    }
}

TEST_CASE("string helpers behave") {
    CHECK(to_lower("MiXeD 12") == "mixed 12");
    CHECK(trim("  x \t") == "x");
    CHECK(trim("") == "");
    CHECK(split("a,b,,c", ',') == std::vector<std::string>({"a", "b", "", "c"}));
    CHECK(split("", ',') == std::vector<std::string>({""}));
    CHECK(parse_int64("-42") == -42);
    CHECK_THROWS_AS(parse_int64("4x2"), Error);
    CHECK_THROWS_AS(parse_double("abc"), Error);
    CHECK(parse_double("2.5e-3") == 2.5e-3);
}

TEST_CASE("parallel_for visits every index exactly once") {
    for (int jobs : {1, 4}) {
        const std::size_t n = 10007;
        std::vector<std::atomic<int>> hits(n);
        parallel_for(n, jobs, [&](std::size_t i) { hits[i].fetch_add(1); });
        for (std::size_t i = 0; i < n; ++i) REQUIRE(hits[i].load() == 1);
    }
    // Zero-length loop is a no-op.
    parallel_for(0, 4, [](std::size_t) { REQUIRE(false); });
}
