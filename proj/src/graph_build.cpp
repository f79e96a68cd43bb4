#include "discort/graph_build.hpp"

#include <cmath>
#include <vector>

#include "discort/common.hpp"

namespace discort {

namespace {

using Triplet = Eigen::Triplet<double>;

void add_mirrored(std::vector<Triplet>& triplets, std::size_t row, std::size_t col, double value) {
    triplets.emplace_back(static_cast<int>(row), static_cast<int>(col), value);
    triplets.emplace_back(static_cast<int>(col), static_cast<int>(row), value);
}

// Binary user x thing usage indicators.
Eigen::MatrixXd usage_vectors(const EventLog& log, const std::vector<DiscretizedEvent>& events) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(log.users.size()),
                                              static_cast<Eigen::Index>(log.things.size()));
    for (const auto& e : events) {
        b(static_cast<Eigen::Index>(e.user), static_cast<Eigen::Index>(e.thing)) = 1.0;
    }
    return b;
}

}  // namespace

Eigen::MatrixXd jaccard_location_similarity(const EventLog& log,
                                            const std::vector<DiscretizedEvent>& events) {
    const auto n_loc = static_cast<Eigen::Index>(log.locations.size());
    const auto n_things = static_cast<Eigen::Index>(log.things.size());
    Eigen::MatrixXd used = Eigen::MatrixXd::Zero(n_loc, n_things);
    for (const auto& e : events) {
        used(static_cast<Eigen::Index>(e.location), static_cast<Eigen::Index>(e.thing)) = 1.0;
    }
    Eigen::MatrixXd sim = Eigen::MatrixXd::Zero(n_loc, n_loc);
    for (Eigen::Index i = 0; i < n_loc; ++i) {
        for (Eigen::Index j = i; j < n_loc; ++j) {
            double inter = 0.0, uni = 0.0;
            for (Eigen::Index t = 0; t < n_things; ++t) {
                const bool a = used(i, t) != 0.0;
                const bool b = used(j, t) != 0.0;
                inter += (a && b) ? 1.0 : 0.0;
                uni += (a || b) ? 1.0 : 0.0;
            }
            // Every location in the log has at least one event, so the union
            // is never empty.
            const double value = inter / uni;
            sim(i, j) = value;
            sim(j, i) = value;
        }
    }
    return sim;
}

SpatioTemporalGraph build_spatiotemporal_graph(const EventLog& log,
                                               const std::vector<DiscretizedEvent>& events,
                                               const PeriodicRelation& rel) {
    if (events.empty()) throw Error("cannot build a graph from an empty log");
    SpatioTemporalGraph g;
    g.n_locations = log.locations.size();
    g.n_bins = static_cast<std::size_t>(log.time_bins);
    g.n_things = log.things.size();

    const auto n_loc = static_cast<Eigen::Index>(g.n_locations);
    const auto n_bins = static_cast<Eigen::Index>(g.n_bins);
    const auto n_things = static_cast<Eigen::Index>(g.n_things);

    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n_loc, n_things);
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n_bins, n_things);
    for (const auto& e : events) {
        y(static_cast<Eigen::Index>(e.location), static_cast<Eigen::Index>(e.thing)) += 1.0;
        z(static_cast<Eigen::Index>(e.bin), static_cast<Eigen::Index>(e.thing)) += 1.0;
    }
    const Eigen::MatrixXd loc_sim = jaccard_location_similarity(log, events);

    std::vector<Triplet> triplets;
    for (Eigen::Index i = 0; i < n_loc; ++i) {
        triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
        for (Eigen::Index j = i + 1; j < n_loc; ++j) {
            if (loc_sim(i, j) != 0.0)
                add_mirrored(triplets, static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                             loc_sim(i, j));
        }
    }
    for (const auto& [loc, bin] : rel.pairs) {
        if (loc >= g.n_locations || bin < 0 || bin >= log.time_bins)
            throw Error("periodic relation references an unknown location or bin");
        add_mirrored(triplets, g.loc_node(loc), g.bin_node(static_cast<std::size_t>(bin)), 1.0);
    }
    for (Eigen::Index i = 0; i < n_loc; ++i) {
        for (Eigen::Index t = 0; t < n_things; ++t) {
            if (y(i, t) != 0.0)
                add_mirrored(triplets, g.loc_node(static_cast<std::size_t>(i)),
                             g.thing_node(static_cast<std::size_t>(t)), y(i, t));
        }
    }
    for (Eigen::Index b = 0; b < n_bins; ++b) {
        for (Eigen::Index t = 0; t < n_things; ++t) {
            if (z(b, t) != 0.0)
                add_mirrored(triplets, g.bin_node(static_cast<std::size_t>(b)),
                             g.thing_node(static_cast<std::size_t>(t)), z(b, t));
        }
    }

    g.weights.resize(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(g.size()));
    g.weights.setFromTriplets(triplets.begin(), triplets.end());
    return g;
}

Eigen::MatrixXd user_similarity(const EventLog& log,
                                const std::vector<DiscretizedEvent>& events,
                                const FriendshipMatrix& friendships, double alpha_social) {
    if (!std::isfinite(alpha_social)) throw Error("alpha_social must be finite");
    if (friendships.users() != log.users)
        throw Error("friendship matrix must be validated against this log");
    const auto n = static_cast<Eigen::Index>(log.users.size());
    const Eigen::MatrixXd b = usage_vectors(log, events);
    Eigen::VectorXd norms(n);
    for (Eigen::Index i = 0; i < n; ++i) norms(i) = b.row(i).norm();

    const auto cosine = [&](Eigen::Index i, Eigen::Index j) {
        if (norms(i) == 0.0 || norms(j) == 0.0) return 0.0;
        return b.row(i).dot(b.row(j)) / (norms(i) * norms(j));
    };

    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto friends = friendships.friends_of(static_cast<std::size_t>(i));
        if (friends.empty()) continue;
        double denom = 0.0;
        for (std::size_t j : friends) {
            denom += std::exp(alpha_social * cosine(i, static_cast<Eigen::Index>(j)));
        }
        for (std::size_t j : friends) {
            w(i, static_cast<Eigen::Index>(j)) =
                std::exp(alpha_social * cosine(i, static_cast<Eigen::Index>(j))) / denom;
        }
    }
    return w;
}

SocialGraph build_social_graph(const EventLog& log,
                               const std::vector<DiscretizedEvent>& events,
                               const FriendshipMatrix& friendships, double alpha_social) {
    if (events.empty()) throw Error("cannot build a graph from an empty log");
    SocialGraph g;
    g.n_users = log.users.size();
    g.n_things = log.things.size();

    const auto n_users = static_cast<Eigen::Index>(g.n_users);
    const auto n_things = static_cast<Eigen::Index>(g.n_things);

    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_users, n_things);
    for (const auto& e : events) {
        m(static_cast<Eigen::Index>(e.user), static_cast<Eigen::Index>(e.thing)) += 1.0;
    }
    const Eigen::MatrixXd u = user_similarity(log, events, friendships, alpha_social);

    std::vector<Triplet> triplets;
    // The affinity block keeps its per-row normalization, so it goes in
    // directed, not mirrored.
    for (Eigen::Index i = 0; i < n_users; ++i) {
        for (Eigen::Index j = 0; j < n_users; ++j) {
            if (u(i, j) != 0.0) triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), u(i, j));
        }
    }
    for (Eigen::Index i = 0; i < n_users; ++i) {
        for (Eigen::Index t = 0; t < n_things; ++t) {
            if (m(i, t) != 0.0)
                add_mirrored(triplets, g.user_node(static_cast<std::size_t>(i)),
                             g.thing_node(static_cast<std::size_t>(t)), m(i, t));
        }
    }

    g.weights.resize(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(g.size()));
    g.weights.setFromTriplets(triplets.begin(), triplets.end());
    return g;
}

std::string st_node_label(const SpatioTemporalGraph& g, const EventLog& log, std::size_t node) {
    if (node < g.n_locations) return "loc:" + log.locations.id(node);
    if (node < g.n_locations + g.n_bins)
        return "ts:" + std::to_string(node - g.n_locations);
    if (node < g.size()) return "thing:" + log.things.id(node - g.n_locations - g.n_bins);
    throw Error("node index out of range");
}

std::string social_node_label(const SocialGraph& g, const EventLog& log, std::size_t node) {
    if (node < g.n_users) return "user:" + log.users.id(node);
    if (node < g.size()) return "thing:" + log.things.id(node - g.n_users);
    throw Error("node index out of range");
}

}  // namespace discort
