#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "discort/graph_build.hpp"

namespace discort {

// What to do with nodes that have no out-weight: keep the walker in place,
// or scatter it uniformly.
enum class DanglingPolicy { SelfLoop, Uniform };

// Column-stochastic walk matrix: column j is the distribution of the next
// node given the walker sits at j, built by normalizing W's row j.
struct TransitionMatrix {
    Eigen::SparseMatrix<double> p;
    DanglingPolicy dangling = DanglingPolicy::SelfLoop;
    std::vector<std::size_t> dangling_nodes;  // nodes the policy applied to
};

struct RwrParams {
    double c = 0.15;       // restart probability
    double tol = 1e-9;     // L1 residual convergence cutoff
    int max_iter = 1000;
};

TransitionMatrix transition_matrix(const Eigen::SparseMatrix<double>& w,
                                   DanglingPolicy dangling = DanglingPolicy::SelfLoop);

// Steady state of pi = (1-c) P pi + c e_seed by power iteration.
Eigen::VectorXd rwr_steady_state(const TransitionMatrix& p, std::size_t seed,
                                 const RwrParams& params = {});

enum class RelevanceSource { SpatioTemporal, Social, Combined };

// Thing-pair relevance. Row i holds the steady-state probabilities of the
// walk restarted at thing i, restricted to thing nodes: r(i,j) = pi_i(o_j).
struct RelevanceMatrix {
    Eigen::MatrixXd r;
    double restart_c = 0.15;
    RelevanceSource source = RelevanceSource::Combined;
};

// Shared core: per-thing-seed RWR over an arbitrary weight matrix whose
// thing nodes occupy [thing_offset, thing_offset + n_things).
RelevanceMatrix relevance_from_weights(const Eigen::SparseMatrix<double>& w,
                                       std::size_t thing_offset, std::size_t n_things,
                                       RelevanceSource source, const RwrParams& params = {},
                                       DanglingPolicy dangling = DanglingPolicy::SelfLoop,
                                       int jobs = 1);

RelevanceMatrix relevance_matrix(const SpatioTemporalGraph& g, const RwrParams& params = {},
                                 DanglingPolicy dangling = DanglingPolicy::SelfLoop, int jobs = 1);
RelevanceMatrix relevance_matrix(const SocialGraph& g, const RwrParams& params = {},
                                 DanglingPolicy dangling = DanglingPolicy::SelfLoop, int jobs = 1);

// R = alpha * r_st + beta * r_social, elementwise.
RelevanceMatrix combine(const RelevanceMatrix& spatio_temporal, const RelevanceMatrix& social,
                        double alpha, double beta);

struct RgtEdge {
    std::size_t src = 0;
    std::size_t dst = 0;
    double weight = 0.0;

    bool operator==(const RgtEdge&) const = default;
};

// Top-k correlation graph: each thing points at its k most relevant peers.
// Edges are grouped by source (ascending), then descending weight, ties by
// destination index; zero-relevance candidates never become edges.
struct RelationalGraphOfThings {
    std::vector<std::string> things;
    std::vector<RgtEdge> edges;
    int k = 0;
};

RelationalGraphOfThings build_rgt(const RelevanceMatrix& relevance, const IndexMap& things, int k);

}  // namespace discort
