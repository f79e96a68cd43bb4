#pragma once

#include <Eigen/Dense>
#include <iosfwd>

#include "discort/features.hpp"

namespace discort {

struct TrainConfig {
    double lambda = 1e-3;  // L2 strength on weights (bias unregularized)
    int iterations = 500;
    double step = 0.1;
    int jobs = 1;
};

// One binary logistic model. always_zero marks a label with no positive
// training example; it scores exactly 0 regardless of features.
struct LabelModel {
    Eigen::VectorXd w;
    double bias = 0.0;
    bool always_zero = false;
};

struct AnnotationModel {
    std::vector<std::string> labels;  // aligned with models
    std::vector<LabelModel> models;
    TrainConfig config;

    std::size_t dim() const;
};

struct ScoredLabel {
    std::string label;
    double score = 0.0;
};

struct Prediction {
    std::string thing;
    std::vector<ScoredLabel> ranked;  // scores non-increasing, ties in label order
    int k_used = 0;
};

// Mean logistic loss plus (lambda/2)|w|^2 over rows of x with 0/1 targets y.
double logistic_loss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                     double bias, double lambda);
void logistic_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& w, double bias, double lambda,
                       Eigen::VectorXd& grad_w, double& grad_bias);

// Full-batch gradient descent from the zero vector.
LabelModel train_binary(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const TrainConfig& config);

// One-vs-rest over the label vocabulary. Rows of x cover all things;
// train_things selects the training rows. Requires at least two distinct
// labels across the training things and at least one label on each of them.
// Labels with no positive training thing get an always_zero model and a
// warning.
AnnotationModel train(const Eigen::MatrixXd& x, const std::vector<std::size_t>& train_things,
                      const LabelAssignments& assignments, const TrainConfig& config = {});

// Sigmoid scores per label, ranked; the top min(k, |L|) are returned.
Prediction predict(const AnnotationModel& model, const std::string& thing,
                   const Eigen::VectorXd& features, int k);

// Versioned text format, first line "discort-model v1". Lines starting with
// '#' after it are ignored on read; a non-empty config_hash is written as one.
void write_annotation_model(const AnnotationModel& model, std::ostream& out,
                            const std::string& config_hash = "");
AnnotationModel read_annotation_model(std::istream& in, const std::string& source_name);

}  // namespace discort
