#pragma once

#include <Eigen/Dense>
#include <iosfwd>

#include "discort/event_log.hpp"
#include "discort/rwr.hpp"

namespace discort {

// Ground-truth label assignments aligned with a thing IndexMap.
struct LabelAssignments {
    IndexMap labels;                                 // vocabulary L
    std::vector<std::vector<std::size_t>> of_thing;  // per thing, sorted label ids

    std::size_t total_assignments() const;
};

LabelAssignments collect_labels(const std::vector<ThingMetadata>& metadata,
                                const IndexMap& things);

// Pr(l_k) = (training things carrying l_k) / (total label assignments).
Eigen::VectorXd label_prior(const LabelAssignments& assignments,
                            const std::vector<std::size_t>& train_things);

// Posterior over L for o_star given its relevance to every thing:
// likelihood(l_k) = mean relevance over l_k's training support, times the
// prior, normalized. If o_star is itself a training thing it is left out of
// every support set. When every likelihood-prior product is zero (o_star
// reaches no training thing) the prior is returned unchanged.
Eigen::VectorXd label_posterior(std::size_t o_star, const Eigen::VectorXd& relevance_row,
                                const LabelAssignments& assignments,
                                const std::vector<std::size_t>& train_things,
                                const Eigen::VectorXd& prior);

// One posterior row per thing (leave-one-out for training things).
Eigen::MatrixXd bayes_features(const RelevanceMatrix& relevance,
                               const LabelAssignments& assignments,
                               const std::vector<std::size_t>& train_things);

// Directed weighted modularity, symmetrized: M = B + B^T where
// B_ij = W_ij - w_in(i) w_out(j) / (2m) and 2m = sum of all W entries.
// An RGT with no edges yields the zero matrix.
Eigen::MatrixXd modularity_matrix(const RelationalGraphOfThings& rgt);

// Thing i's row: its components in the top-k_eig positive-eigenvalue
// eigenvectors of the symmetrized modularity matrix, zero-padded when fewer
// positive eigenvalues exist. Each eigenvector's sign is fixed so its
// largest-magnitude entry is positive.
Eigen::MatrixXd modularity_features(const RelationalGraphOfThings& rgt, int k_eig = 8);

struct ContentFeatures {
    std::vector<std::string> vocabulary;  // sorted corpus tokens
    Eigen::MatrixXd vectors;              // n_things x vocabulary size
};

// w = tf * idf^2 with idf = log(|N| / df), |N| = number of non-empty
// descriptions; rows L2-normalized unless normalize is false. Things without
// a (non-empty) description get zero rows.
ContentFeatures tfidf_features(const std::vector<ThingMetadata>& metadata,
                               const IndexMap& things, bool normalize = true);

struct FeatureMatrix {
    Eigen::MatrixXd x;  // n_things x (n_labels + n_eig + n_vocab)
    std::vector<std::string> column_names;
    std::size_t n_labels = 0;
    std::size_t n_eig = 0;
    std::size_t n_vocab = 0;
};

// Concatenate [F_L | F_S | F_C]. Pass a 0-column F_C to drop content
// features. All blocks must have one row per thing.
FeatureMatrix assemble_features(const Eigen::MatrixXd& label_block,
                                const std::vector<std::string>& label_names,
                                const Eigen::MatrixXd& eig_block,
                                const Eigen::MatrixXd& content_block,
                                const std::vector<std::string>& vocabulary);

// CSV with header "thing,<labels...>,<eig_i...>,<vocab...>". Lines starting
// with '#' before the header are ignored on read.
void write_features_csv(const FeatureMatrix& features, const IndexMap& things, std::ostream& out);
FeatureMatrix read_features_csv(std::istream& in, const std::string& source_name,
                                IndexMap* things_out = nullptr);

}  // namespace discort
