#include "discort/synth.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

#include "discort/common.hpp"
#include "discort/features.hpp"
#include "discort/graph_build.hpp"
#include "discort/rwr.hpp"

using namespace discort;

namespace {

SynthConfig small_config() {
    SynthConfig c;
    c.n_clusters = 2;
    c.things_per_cluster = 3;
    c.users = 4;
    c.locations_per_cluster = 2;
    c.days = 20;
    c.events_per_day = 40;
    c.noise_rate = 0.0;
    c.seed = 11;
    return c;
}

int hour_of(std::int64_t timestamp) {
    return static_cast<int>((timestamp % 86400) / 3600);
}

}  // namespace

TEST_CASE("generate is deterministic per seed and varies across seeds") {
    const auto config = small_config();
    const auto a = generate(config);
    const auto b = generate(config);
    CHECK(a.log == b.log);
    CHECK(a.metadata == b.metadata);
    CHECK(a.friendships.edge_count() == b.friendships.edge_count());
    CHECK(truth_json(a.truth, config) == truth_json(b.truth, config));

    auto other = config;
    other.seed = 12;
    const auto c = generate(other);
    CHECK(a.log.events != c.log.events);
}

TEST_CASE("zero noise keeps every event inside its cluster profile") {
    const auto config = small_config();
    const auto out = generate(config);
    REQUIRE(out.truth.clusters.size() == 2);

    for (const auto& event : out.log.events) {
        const auto c = out.truth.cluster_of_thing(event.thing);
        REQUIRE(c < 2);
        const auto& cluster = out.truth.clusters[c];
        CHECK(std::find(cluster.locations.begin(), cluster.locations.end(), event.location) !=
              cluster.locations.end());
        CHECK(std::find(cluster.users.begin(), cluster.users.end(), event.user) !=
              cluster.users.end());
        const int hour = hour_of(event.timestamp);
        CHECK(std::find(cluster.active_bins.begin(), cluster.active_bins.end(), hour) !=
              cluster.active_bins.end());
    }
}

TEST_CASE("full noise breaks the cluster profile") {
    auto config = small_config();
    config.noise_rate = 1.0;
    const auto out = generate(config);

    bool wrong_location = false, wrong_hour = false;
    for (const auto& event : out.log.events) {
        const auto c = out.truth.cluster_of_thing(event.thing);
        REQUIRE(c < 2);
        const auto& cluster = out.truth.clusters[c];
        if (std::find(cluster.locations.begin(), cluster.locations.end(), event.location) ==
            cluster.locations.end())
            wrong_location = true;
        const int hour = hour_of(event.timestamp);
        if (std::find(cluster.active_bins.begin(), cluster.active_bins.end(), hour) ==
            cluster.active_bins.end())
            wrong_hour = true;
    }
    CHECK(wrong_location);
    CHECK(wrong_hour);
}

TEST_CASE("default config matches the intended shape") {
    const SynthConfig config;
    const auto out = generate(config);
    CHECK(out.log.events.size() == 120u * 168u);
    CHECK(out.log.things.size() == 48);
    CHECK(out.log.users.size() == 10);
    CHECK(out.log.locations.size() == 8);
    CHECK(out.metadata.size() == 48);
    REQUIRE(out.truth.clusters.size() == 4);
    CHECK(out.truth.clusters[0].label == "Kitchen");
    CHECK(out.truth.clusters[3].label == "Garage");
    CHECK(out.truth.clusters[0].active_bins == std::vector<int>({7, 8}));
    CHECK(out.truth.clusters[2].active_bins == std::vector<int>({18, 19}));
    CHECK(std::is_sorted(out.log.events.begin(), out.log.events.end(),
                         [](const UsageEvent& a, const UsageEvent& b) {
                             return a.timestamp < b.timestamp;
                         }));

    // Default density 0.8 plants friendships inside user groups only.
    CHECK(out.friendships.edge_count() > 0);
    for (std::size_t i = 0; i < out.log.users.size(); ++i) {
        for (std::size_t j : out.friendships.friends_of(i)) {
            std::size_t gi = 5, gj = 5;
            for (std::size_t c = 0; c < 4; ++c) {
                const auto& users = out.truth.clusters[c].users;
                if (std::find(users.begin(), users.end(), out.log.users.id(i)) != users.end())
                    gi = c;
                if (std::find(users.begin(), users.end(), out.log.users.id(j)) != users.end())
                    gj = c;
            }
            CHECK(gi == gj);
        }
    }
}

TEST_CASE("friendship density hits its endpoints") {
    auto config = small_config();
    config.friendship_density = 1.0;
    const auto full = generate(config);
    // Groups of 2 users each: exactly one in-group pair per cluster.
    CHECK(full.friendships.edge_count() == 2);

    config.friendship_density = 0.0;
    const auto none = generate(config);
    CHECK(none.friendships.edge_count() == 0);
}

TEST_CASE("metadata carries cluster labels and themed descriptions") {
    const auto out = generate(small_config());
    REQUIRE(out.metadata.size() == 6);
    for (const auto& meta : out.metadata) {
        const auto c = out.truth.cluster_of_thing(meta.thing);
        REQUIRE(c < 2);
        CHECK(meta.labels == std::vector<std::string>{out.truth.clusters[c].label});
        CHECK(!meta.description.empty());
    }

    // Content similarity must recover the clusters on average.
    const auto features = tfidf_features(out.metadata, out.log.things);
    double within = 0.0, cross = 0.0;
    double n_within = 0.0, n_cross = 0.0;
    for (std::size_t i = 0; i < out.log.things.size(); ++i) {
        for (std::size_t j = i + 1; j < out.log.things.size(); ++j) {
            const double cos = features.vectors.row(static_cast<Eigen::Index>(i))
                                   .dot(features.vectors.row(static_cast<Eigen::Index>(j)));
            const bool same = out.truth.cluster_of_thing(out.log.things.id(i)) ==
                              out.truth.cluster_of_thing(out.log.things.id(j));
            (same ? within : cross) += cos;
            (same ? n_within : n_cross) += 1.0;
        }
    }
    CHECK(within / n_within > cross / n_cross);
}

TEST_CASE("planted relevance separates clusters at zero noise") {
    const auto out = generate(small_config());
    const auto events = discretize(out.log);
    const auto rel = periodic_relation(out.log, events, {});
    const auto graph = build_spatiotemporal_graph(out.log, events, rel);
    const auto relevance = relevance_matrix(graph);

    const auto n = out.log.things.size();
    REQUIRE(n == 6);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ci = out.truth.cluster_of_thing(out.log.things.id(i));
        double min_within = 1.0, max_cross = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const auto cj = out.truth.cluster_of_thing(out.log.things.id(j));
            const double r = relevance.r(static_cast<Eigen::Index>(i),
                                         static_cast<Eigen::Index>(j));
            if (ci == cj) {
                min_within = std::min(min_within, r);
            } else {
                max_cross = std::max(max_cross, r);
            }
        }
        CHECK(min_within > max_cross);
    }
}

TEST_CASE("generate validates its config") {
    SynthConfig config;
    SUBCASE("zero counts") {
        config.n_clusters = 0;
        CHECK_THROWS_AS((void)generate(config), Error);
    }
    SUBCASE("more clusters than users") {
        config.n_clusters = 12;
        config.users = 4;
        CHECK_THROWS_AS((void)generate(config), Error);
    }
    SUBCASE("noise out of range") {
        config.noise_rate = 1.5;
        CHECK_THROWS_AS((void)generate(config), Error);
    }
    SUBCASE("bin list size mismatch") {
        config.active_bins = {{7, 8}};
        CHECK_THROWS_AS((void)generate(config), Error);
    }
    SUBCASE("bin out of range") {
        config.active_bins = {{7}, {24}, {3}, {5}};
        CHECK_THROWS_AS((void)generate(config), Error);
    }
    SUBCASE("auto bins are evenly spaced adjacent pairs") {
        config.n_clusters = 3;
        config.users = 9;
        const auto out = generate(config);
        CHECK(out.truth.clusters[0].active_bins == std::vector<int>({0, 1}));
        CHECK(out.truth.clusters[1].active_bins == std::vector<int>({8, 9}));
        CHECK(out.truth.clusters[2].active_bins == std::vector<int>({16, 17}));
    }
}

TEST_CASE("truth JSON round-trips") {
    const auto config = small_config();
    const auto out = generate(config);
    const auto text = truth_json(out.truth, config);
    const auto parsed = parse_truth_json(text);
    REQUIRE(parsed.clusters.size() == out.truth.clusters.size());
    for (std::size_t c = 0; c < parsed.clusters.size(); ++c) {
        CHECK(parsed.clusters[c].label == out.truth.clusters[c].label);
        CHECK(parsed.clusters[c].things == out.truth.clusters[c].things);
        CHECK(parsed.clusters[c].locations == out.truth.clusters[c].locations);
        CHECK(parsed.clusters[c].users == out.truth.clusters[c].users);
        CHECK(parsed.clusters[c].active_bins == out.truth.clusters[c].active_bins);
    }
    CHECK_THROWS_AS((void)parse_truth_json("not json"), Error);
    CHECK_THROWS_AS((void)parse_truth_json("{}"), Error);
}
