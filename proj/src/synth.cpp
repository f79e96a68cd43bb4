#include "discort/synth.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>

#include "discort/common.hpp"

namespace discort {

namespace {

// 2024-01-01T00:00:00Z; every generated timestamp is relative to this.
constexpr std::int64_t kEpochStart = 1704067200;
constexpr int kBins = 24;
constexpr std::int64_t kBinSeconds = 86400 / kBins;

const std::vector<std::vector<std::string>> kThemes = {
    {"kettle", "toaster", "skillet", "recipe", "brew", "breakfast", "oven", "spice"},
    {"printer", "monitor", "keyboard", "meeting", "deadline", "ledger", "desk", "memo"},
    {"trowel", "seedling", "compost", "hose", "pruner", "mulch", "lawn", "planter"},
    {"wrench", "drill", "sander", "workbench", "torque", "clamp", "grease", "socket"},
};
const std::vector<std::string> kThemeLabels = {"Kitchen", "Office", "Garden", "Garage"};
const std::vector<std::string> kSharedWords = {"home",  "device", "daily", "use",
                                               "smart", "plug",   "timer", "switch"};

std::string pad2(int value) {
    const auto s = std::to_string(value);
    return s.size() < 2 ? "0" + s : s;
}

std::string cluster_label(int c) {
    if (c < static_cast<int>(kThemeLabels.size())) return kThemeLabels[static_cast<std::size_t>(c)];
    return "Cluster" + std::to_string(c);
}

std::vector<std::string> cluster_theme(int c) {
    if (c < static_cast<int>(kThemes.size())) return kThemes[static_cast<std::size_t>(c)];
    std::vector<std::string> words;
    for (int k = 0; k < 8; ++k)
        words.push_back("zone" + std::to_string(c) + "word" + std::to_string(k));
    return words;
}

void validate(const SynthConfig& c) {
    if (c.n_clusters < 1 || c.things_per_cluster < 1 || c.users < 1 ||
        c.locations_per_cluster < 1 || c.days < 1 || c.events_per_day < 1)
        throw Error("synth counts must all be at least 1");
    if (c.users < c.n_clusters)
        throw Error("synth needs at least one user per cluster");
    if (!(c.noise_rate >= 0.0 && c.noise_rate <= 1.0))
        throw Error("noise_rate must be in [0, 1]");
    if (!(c.friendship_density >= 0.0 && c.friendship_density <= 1.0))
        throw Error("friendship_density must be in [0, 1]");
    if (!c.active_bins.empty()) {
        if (c.active_bins.size() != static_cast<std::size_t>(c.n_clusters))
            throw Error("active_bins must list one bin set per cluster");
        for (const auto& bins : c.active_bins) {
            if (bins.empty()) throw Error("every cluster needs at least one active bin");
            for (int b : bins) {
                if (b < 0 || b >= kBins) throw Error("active bin out of range");
            }
        }
    }
}

std::vector<std::vector<int>> resolve_bins(const SynthConfig& c) {
    if (!c.active_bins.empty()) return c.active_bins;
    // Morning, noon, evening, night for the stock four-cluster layout.
    if (c.n_clusters == 4) return {{7, 8}, {12, 13}, {18, 19}, {21, 22}};
    std::vector<std::vector<int>> bins;
    for (int k = 0; k < c.n_clusters; ++k) {
        const int start = static_cast<int>(static_cast<std::int64_t>(k) * kBins / c.n_clusters);
        bins.push_back({start, (start + 1) % kBins});
    }
    return bins;
}

}  // namespace

std::size_t SynthTruth::cluster_of_thing(const std::string& thing) const {
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        const auto& ts = clusters[c].things;
        if (std::find(ts.begin(), ts.end(), thing) != ts.end()) return c;
    }
    return clusters.size();
}

SynthOutput generate(const SynthConfig& config) {
    validate(config);
    const auto bins = resolve_bins(config);
    Rng rng(config.seed);

    SynthOutput out;
    std::vector<std::vector<std::string>> group_users(static_cast<std::size_t>(config.n_clusters));
    std::vector<std::string> all_users, all_things, all_locations;
    for (int u = 0; u < config.users; ++u) {
        const auto g = static_cast<std::size_t>(static_cast<std::int64_t>(u) * config.n_clusters /
                                                config.users);
        all_users.push_back("u" + pad2(u));
        group_users[g].push_back(all_users.back());
    }
    for (int c = 0; c < config.n_clusters; ++c) {
        SynthCluster cluster;
        cluster.label = cluster_label(c);
        cluster.active_bins = bins[static_cast<std::size_t>(c)];
        cluster.users = group_users[static_cast<std::size_t>(c)];
        for (int t = 0; t < config.things_per_cluster; ++t) {
            cluster.things.push_back("c" + std::to_string(c) + "_t" + pad2(t));
            all_things.push_back(cluster.things.back());
        }
        for (int l = 0; l < config.locations_per_cluster; ++l) {
            cluster.locations.push_back("c" + std::to_string(c) + "_loc" + std::to_string(l));
            all_locations.push_back(cluster.locations.back());
        }
        out.truth.clusters.push_back(std::move(cluster));
    }

    // Friendship draws cover every configured pair so the stream is
    // independent of which users later appear in the log.
    std::vector<std::pair<std::string, std::string>> friend_pairs;
    for (const auto& group : group_users) {
        for (std::size_t i = 0; i < group.size(); ++i) {
            for (std::size_t j = i + 1; j < group.size(); ++j) {
                if (rng.bernoulli(config.friendship_density))
                    friend_pairs.emplace_back(group[i], group[j]);
            }
        }
    }

    const auto total = static_cast<std::int64_t>(config.days) * config.events_per_day;
    const auto span = static_cast<std::int64_t>(config.days) * 86400;
    std::vector<std::string> thing_names, user_names, location_names;
    for (std::int64_t e = 0; e < total; ++e) {
        UsageEvent event;
        if (rng.bernoulli(config.noise_rate)) {
            event.thing = all_things[rng.uniform_index(all_things.size())];
            event.user = all_users[rng.uniform_index(all_users.size())];
            event.location = all_locations[rng.uniform_index(all_locations.size())];
            event.timestamp = kEpochStart + static_cast<std::int64_t>(
                                                rng.uniform_index(static_cast<std::size_t>(span)));
        } else {
            const auto c = rng.uniform_index(static_cast<std::size_t>(config.n_clusters));
            const auto& cluster = out.truth.clusters[c];
            event.thing = cluster.things[rng.uniform_index(cluster.things.size())];
            event.user = cluster.users[rng.uniform_index(cluster.users.size())];
            event.location = cluster.locations[rng.uniform_index(cluster.locations.size())];
            const auto day = rng.uniform_index(static_cast<std::size_t>(config.days));
            const int bin = cluster.active_bins[rng.uniform_index(cluster.active_bins.size())];
            const auto second = rng.uniform_index(static_cast<std::size_t>(kBinSeconds));
            event.timestamp = kEpochStart + static_cast<std::int64_t>(day) * 86400 +
                              static_cast<std::int64_t>(bin) * kBinSeconds +
                              static_cast<std::int64_t>(second);
        }
        out.log.events.push_back(std::move(event));
    }
    std::sort(out.log.events.begin(), out.log.events.end(),
              [](const UsageEvent& a, const UsageEvent& b) {
                  return std::tie(a.timestamp, a.thing, a.user, a.location) <
                         std::tie(b.timestamp, b.thing, b.user, b.location);
              });
    for (const auto& event : out.log.events) {
        thing_names.push_back(event.thing);
        user_names.push_back(event.user);
        location_names.push_back(event.location);
    }
    out.log.things = IndexMap(std::move(thing_names));
    out.log.users = IndexMap(std::move(user_names));
    out.log.locations = IndexMap(std::move(location_names));
    out.log.time_bins = kBins;

    out.friendships = FriendshipMatrix(out.log.users);
    for (const auto& [a, b] : friend_pairs) {
        const auto i = out.log.users.find(a);
        const auto j = out.log.users.find(b);
        if (!i || !j) continue;  // user never made it into the log
        out.friendships.set(*i, *j);
        out.friendships.set(*j, *i);
    }

    for (int c = 0; c < config.n_clusters; ++c) {
        const auto theme = cluster_theme(c);
        for (const auto& thing : out.truth.clusters[static_cast<std::size_t>(c)].things) {
            ThingMetadata meta;
            meta.thing = thing;
            meta.labels = {cluster_label(c)};
            std::vector<std::string> words;
            for (int k = 0; k < 6; ++k) words.push_back(theme[rng.uniform_index(theme.size())]);
            for (int k = 0; k < 3; ++k)
                words.push_back(kSharedWords[rng.uniform_index(kSharedWords.size())]);
            for (std::size_t w = 0; w < words.size(); ++w) {
                if (w > 0) meta.description += ' ';
                meta.description += words[w];
            }
            out.metadata.push_back(std::move(meta));
        }
    }
    return out;
}

std::string truth_json(const SynthTruth& truth, const SynthConfig& config,
                       const std::string& config_hash) {
    nlohmann::ordered_json root;
    if (!config_hash.empty()) root["config"] = config_hash;
    root["seed"] = config.seed;
    root["n_clusters"] = config.n_clusters;
    root["days"] = config.days;
    root["events_per_day"] = config.events_per_day;
    root["noise_rate"] = config.noise_rate;
    root["clusters"] = nlohmann::ordered_json::array();
    for (const auto& cluster : truth.clusters) {
        nlohmann::ordered_json c;
        c["label"] = cluster.label;
        c["active_bins"] = cluster.active_bins;
        c["things"] = cluster.things;
        c["locations"] = cluster.locations;
        c["users"] = cluster.users;
        root["clusters"].push_back(std::move(c));
    }
    return root.dump(2) + "\n";
}

SynthTruth parse_truth_json(const std::string& text) {
    SynthTruth out;
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& ex) {
        throw Error(std::string("truth file is not valid JSON: ") + ex.what());
    }
    if (!root.contains("clusters") || !root["clusters"].is_array())
        throw Error("truth file has no clusters array");
    try {
        for (const auto& c : root["clusters"]) {
            SynthCluster cluster;
            cluster.label = c.at("label").get<std::string>();
            cluster.active_bins = c.at("active_bins").get<std::vector<int>>();
            cluster.things = c.at("things").get<std::vector<std::string>>();
            cluster.locations = c.at("locations").get<std::vector<std::string>>();
            cluster.users = c.at("users").get<std::vector<std::string>>();
            out.clusters.push_back(std::move(cluster));
        }
    } catch (const nlohmann::json::exception& ex) {
        throw Error(std::string("malformed truth file: ") + ex.what());
    }
    return out;
}

}  // namespace discort
