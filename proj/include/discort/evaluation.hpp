#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>

#include "discort/annotate.hpp"
#include "discort/features.hpp"

namespace discort {

// Per-thing sets of label ids, sorted ascending.
using LabelSets = std::vector<std::vector<std::size_t>>;

struct PerLabelF1 {
    std::string label;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t truth_count = 0;
    std::size_t predicted_count = 0;
};

struct F1Report {
    double micro_f1 = 0.0;
    double macro_f1 = 0.0;
    std::vector<PerLabelF1> per_label;  // labels present in truth or prediction, minus exclusions
    std::size_t n = 0;                  // test things
};

// Pooled over all (thing, label) pairs: 2 TP / (2 TP + FP + FN).
double micro_f1(const LabelSets& truth, const LabelSets& predicted);

// Arithmetic mean of per-label F1 over labels present in the test split
// (truth or prediction), skipping ids listed in exclude.
double macro_f1(const LabelSets& truth, const LabelSets& predicted, std::size_t n_labels,
                const std::vector<std::size_t>& exclude = {});

F1Report f1_report(const LabelSets& truth, const LabelSets& predicted,
                   const std::vector<std::string>& label_names,
                   const std::vector<std::size_t>& exclude = {});

enum class KPolicy {
    TruthCount,  // k = the thing's ground-truth label count
    Fixed,
};

struct ExperimentConfig {
    std::vector<double> fractions = {0.1, 0.2, 0.3, 0.4, 0.5};
    int repetitions = 5;
    std::uint64_t seed = 42;
    double alpha = 0.5;
    double beta = 0.5;
    int rgt_k = 5;
    int k_eig = 8;
    bool use_label_features = true;
    bool use_eig_features = true;
    bool use_content_features = true;
    KPolicy k_policy = KPolicy::TruthCount;
    int fixed_k = 3;
    TrainConfig train;
    int jobs = 1;
};

// Split-independent inputs; relevance matrices are combined per (alpha, beta)
// inside the experiment.
struct ExperimentData {
    IndexMap things;
    RelevanceMatrix rm;  // spatio-temporal relevance, one row per thing
    RelevanceMatrix ru;  // social relevance
    LabelAssignments assignments;
    ContentFeatures content;  // zero columns drop the content block
};

struct ExperimentRow {
    double fraction = 0.0;
    int rep = 0;  // 1-based; -1 marks a per-fraction mean row
    double alpha = 0.0;
    double beta = 0.0;
    F1Report report;
    std::vector<std::string> excluded_labels;  // lost every training positive

    bool is_mean() const { return rep < 0; }
};

struct ExperimentResult {
    std::vector<ExperimentRow> rows;  // file order: reps of a fraction, then its mean
};

// Test things drawn per category: each label contributes
// min(n_c, max(1, round(fraction * n_c))) of its things, drawn without
// replacement; the union is returned sorted.
std::vector<std::size_t> holdout_split(const LabelAssignments& assignments, double fraction,
                                       Rng& rng);

// Per (fraction, repetition): hide the drawn things' labels, rebuild the
// label posteriors, train one-vs-rest on the rest, predict the hidden things
// with k per policy, and score F1. All randomness stems from config.seed.
ExperimentResult holdout_experiment(const ExperimentData& data, const ExperimentConfig& config);

// holdout_experiment once per (alpha, beta) grid point, same seed each time
// so every point sees identical splits.
ExperimentResult alpha_beta_sweep(const ExperimentData& data, const ExperimentConfig& config,
                                  const std::vector<std::pair<double, double>>& grid);

// Columns: fraction,rep,alpha,beta,micro_f1,macro_f1; mean rows say "mean".
void write_report_csv(const ExperimentResult& result, std::ostream& out,
                      const std::string& config_hash = "");

}  // namespace discort
