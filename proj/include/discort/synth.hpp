#pragma once

#include <cstdint>

#include "discort/event_log.hpp"

namespace discort {

// Planted-structure generator: each cluster owns things, locations, a user
// group, a daily time profile, and a description theme; noise events ignore
// all of that.
struct SynthConfig {
    int n_clusters = 4;
    int things_per_cluster = 12;
    int users = 10;
    int locations_per_cluster = 2;
    // One bin list per cluster. Empty picks a built-in daily profile for four
    // clusters ({7,8}, {12,13}, {18,19}, {21,22}) and evenly spaced adjacent
    // pairs otherwise.
    std::vector<std::vector<int>> active_bins;
    double friendship_density = 0.8;  // within a cluster's user group
    int days = 120;
    int events_per_day = 168;
    double noise_rate = 0.1;
    std::uint64_t seed = 42;
};

struct SynthCluster {
    std::string label;
    std::vector<std::string> things;
    std::vector<std::string> locations;
    std::vector<std::string> users;
    std::vector<int> active_bins;
};

struct SynthTruth {
    std::vector<SynthCluster> clusters;

    // Index into clusters, or clusters.size() when the id is unknown.
    std::size_t cluster_of_thing(const std::string& thing) const;
};

struct SynthOutput {
    EventLog log;
    FriendshipMatrix friendships;
    std::vector<ThingMetadata> metadata;
    SynthTruth truth;
};

SynthOutput generate(const SynthConfig& config);

// A non-empty config_hash is stamped as a top-level "config" key.
std::string truth_json(const SynthTruth& truth, const SynthConfig& config,
                       const std::string& config_hash = "");
SynthTruth parse_truth_json(const std::string& text);

}  // namespace discort
