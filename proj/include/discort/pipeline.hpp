#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "discort/evaluation.hpp"
#include "discort/synth.hpp"

namespace discort {

// Every tunable of the end-to-end run, plus the input/output paths. One flat
// key space shared by the config file and the command line; precedence is
// CLI > file > default.
struct PipelineConfig {
    // paths (not part of the config hash)
    std::string events;
    std::string friendships;
    std::string metadata;
    std::string truth;
    std::string out_dir = "out";

    // ingest
    int time_bins = 24;
    int tz_offset = 0;
    bool dedupe_slot = false;

    // periodicity
    std::string threshold = "perm-max";  // perm-max | mean-std
    int permutations = 100;
    double quantile = 0.99;
    double z = 2.0;
    double theta = 0.5;
    bool fold_daily = false;
    bool binary_sequence = false;

    // graphs
    double alpha_social = 1.0;

    // random walk with restart
    double c = 0.15;
    double tol = 1e-9;
    int max_iter = 1000;
    std::string dangling = "self-loop";  // self-loop | uniform

    // relevance combination and the thing graph
    double alpha = 0.5;
    double beta = 0.5;
    int k = 5;
    int k_eig = 8;

    // training
    double lambda = 1e-3;
    int iterations = 500;
    double step = 0.1;

    // evaluation
    std::vector<double> fractions = {0.1, 0.2, 0.3, 0.4, 0.5};
    int reps = 5;
    std::string feature_blocks = "labels,eig,content";  // normalized on assignment
    std::string k_policy = "truth-count";               // truth-count | fixed
    int fixed_k = 3;

    // synthetic data
    int n_clusters = 4;
    int things_per_cluster = 12;
    int users = 10;
    int locations_per_cluster = 2;
    double friendship_density = 0.8;
    int days = 120;
    int events_per_day = 168;
    double noise_rate = 0.1;
    std::string active_bins;  // "7,8;12,13" one group per cluster, empty = built-in profile

    // shared
    std::uint64_t seed = 42;
    int jobs = 1;

    bool operator==(const PipelineConfig&) const = default;
};

// Assigns one key. context prefixes error messages ("c.toml:3" or "--c").
// Unknown keys and unparseable values throw UsageError.
void apply_config_entry(PipelineConfig& cfg, const std::string& key, const std::string& value,
                        const std::string& context);

// key=value lines; blank lines and '#' comments ignored.
void apply_config_file(PipelineConfig& cfg, std::istream& in, const std::string& source_name);
void apply_config_file(PipelineConfig& cfg, const std::string& path);

// CLI overrides in command-line order; keys are config keys, errors name --key.
void apply_config_overrides(PipelineConfig& cfg,
                            const std::vector<std::pair<std::string, std::string>>& entries);

// Range checks for every field; messages name the flag and the range.
void validate_config(const PipelineConfig& cfg);

// Canonical key=value serialization of the tunables (paths excluded) and its
// FNV-1a hash, 16 hex digits. Stamped into every artifact.
std::string canonical_config(const PipelineConfig& cfg);
std::string config_hash(const PipelineConfig& cfg);

// Views of the config as per-module option structs.
PeriodicityOptions periodicity_options(const PipelineConfig& cfg);
RwrParams rwr_params(const PipelineConfig& cfg);
DanglingPolicy dangling_policy(const PipelineConfig& cfg);
TrainConfig train_config(const PipelineConfig& cfg);
ExperimentConfig experiment_config(const PipelineConfig& cfg);
SynthConfig synth_config(const PipelineConfig& cfg);

struct FeatureFlags {
    bool labels = true;
    bool eig = true;
    bool content = true;
};
FeatureFlags feature_flags(const PipelineConfig& cfg);

// Parsed input files. friendships is validated against the log (symmetrized,
// unknown users dropped).
struct PipelineInputs {
    EventLog log;
    std::vector<DiscretizedEvent> events;  // discretized, slot-deduped if configured
    FriendshipMatrix friendships;
    std::vector<ThingMetadata> metadata;
};

PipelineInputs load_inputs(const PipelineConfig& cfg, bool need_friendships, bool need_metadata);

// One event per (thing, user, location, day, bin); order normalized.
std::vector<DiscretizedEvent> dedupe_slot_events(std::vector<DiscretizedEvent> events);

// Everything from raw events through the top-k thing graph.
struct StageBundle {
    PeriodicRelation rel;
    SpatioTemporalGraph st;
    SocialGraph social;
    RelevanceMatrix rm;        // spatio-temporal
    RelevanceMatrix ru;        // social
    RelevanceMatrix combined;  // alpha rm + beta ru
    RelationalGraphOfThings rgt;
};

StageBundle run_stages(const PipelineInputs& inputs, const PipelineConfig& cfg);

struct FeatureBundle {
    LabelAssignments assignments;
    std::vector<std::size_t> train_things;  // every labeled thing
    ContentFeatures content;
    FeatureMatrix features;
};

FeatureBundle run_feature_stage(const PipelineInputs& inputs, const PipelineConfig& cfg,
                                const StageBundle& stages);

AnnotationModel run_train_stage(const FeatureBundle& features, const PipelineConfig& cfg);

ExperimentResult run_eval_stage(const PipelineInputs& inputs, const PipelineConfig& cfg,
                                const StageBundle& stages);

// rgt.json: versioned, config-stamped, edges as thing-index triples.
std::string rgt_to_json(const RelationalGraphOfThings& rgt, const std::string& config_hash);
RelationalGraphOfThings rgt_from_json(const std::string& text, const std::string& source_name);

// Steady-state vector as "node,score" rows with human-readable node labels.
void write_pi_csv(const Eigen::VectorXd& pi, const std::vector<std::string>& node_labels,
                  std::ostream& out, const std::string& config_hash);

// Sparse weights as "src,dst,weight" rows, ordered by (src, dst) index.
void write_graph_csv(const Eigen::SparseMatrix<double>& w,
                     const std::vector<std::string>& node_labels, std::ostream& out,
                     const std::string& config_hash);

// "k,power" rows plus threshold and dominant-period comment lines.
void write_periodogram_csv(const Periodogram& pgram, double threshold,
                           const std::vector<int>& periods, std::ostream& out,
                           const std::string& config_hash);

// Ranked predictions as "thing,rank,label,score" rows.
void write_predictions_csv(const std::vector<Prediction>& predictions, std::ostream& out,
                           const std::string& config_hash);

}  // namespace discort
