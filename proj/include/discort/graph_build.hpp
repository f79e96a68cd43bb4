#pragma once

#include <Eigen/SparseCore>

#include "discort/event_log.hpp"
#include "discort/periodicity.hpp"

namespace discort {

// Spatio-temporal graph over Loc + Ts + O nodes. Node numbering: locations
// first, then time bins, then things, each block in IndexMap order. Blocks:
//   W_Loc (loc x loc)  Jaccard similarity of thing sets, diagonal 1
//   W_X   (loc x bin)  binary periodic relation
//   W_Y   (loc x thing) usage counts
//   W_Z   (bin x thing) usage counts
// The bin-bin and thing-thing blocks are zero; the matrix is symmetric.
struct SpatioTemporalGraph {
    Eigen::SparseMatrix<double> weights;
    std::size_t n_locations = 0;
    std::size_t n_bins = 0;
    std::size_t n_things = 0;

    std::size_t size() const { return n_locations + n_bins + n_things; }
    std::size_t loc_node(std::size_t i) const { return i; }
    std::size_t bin_node(std::size_t b) const { return n_locations + b; }
    std::size_t thing_node(std::size_t t) const { return n_locations + n_bins + t; }
};

// Social graph over U + O nodes: users first, then things. Blocks:
//   W_U (user x user)  softmax-normalized cosine affinity over friends; each
//                      row with friends sums to 1, so the block is directed
//   W_M (user x thing) usage counts, mirrored into the thing x user block
// The thing-thing block is zero.
struct SocialGraph {
    Eigen::SparseMatrix<double> weights;
    std::size_t n_users = 0;
    std::size_t n_things = 0;

    std::size_t size() const { return n_users + n_things; }
    std::size_t user_node(std::size_t u) const { return u; }
    std::size_t thing_node(std::size_t t) const { return n_users + t; }
};

// W_Loc(i,j) = |things(i) ∩ things(j)| / |things(i) ∪ things(j)|.
Eigen::MatrixXd jaccard_location_similarity(const EventLog& log,
                                            const std::vector<DiscretizedEvent>& events);

SpatioTemporalGraph build_spatiotemporal_graph(const EventLog& log,
                                               const std::vector<DiscretizedEvent>& events,
                                               const PeriodicRelation& rel);

// W_U(i,j) = exp(alpha_social * cos(b_i, b_j)) normalized over i's friends;
// rows of friendless users are zero. b_i is user i's binary thing-usage
// vector; cosine with a zero vector is 0.
Eigen::MatrixXd user_similarity(const EventLog& log,
                                const std::vector<DiscretizedEvent>& events,
                                const FriendshipMatrix& friendships, double alpha_social = 1.0);

SocialGraph build_social_graph(const EventLog& log,
                               const std::vector<DiscretizedEvent>& events,
                               const FriendshipMatrix& friendships, double alpha_social = 1.0);

// Human-readable node label, e.g. "loc:kitchen", "ts:7", "thing:pan".
std::string st_node_label(const SpatioTemporalGraph& g, const EventLog& log, std::size_t node);
// "user:u1" or "thing:pan".
std::string social_node_label(const SocialGraph& g, const EventLog& log, std::size_t node);

}  // namespace discort
