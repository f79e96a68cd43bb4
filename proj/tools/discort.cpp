// discort: correlation mining over thing-usage logs and multi-label thing
// annotation, exposed as composable subcommands with file-based handoff.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "discort/graph_build.hpp"
#include "discort/periodicity.hpp"
#include "discort/pipeline.hpp"
#include "discort/rwr.hpp"

namespace fs = std::filesystem;
using namespace discort;

namespace {

constexpr const char* kVersion = "discort 1.0.0";

struct CliState {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;

    std::string location;                        // periodogram
    std::string seed_thing;                      // rwr
    std::string graph_kind = "spatio-temporal";  // rwr
    std::string model_path;                      // annotate
    std::string features_path;                   // train, annotate
    std::string out_file;                        // single-file outputs, empty = stdout
    int top = 3;                                 // annotate
};

// Every subcommand accepts the full config key set; unused keys are harmless
// and keep the config hash consistent across stages.
void add_config_flags(CLI::App* cmd, CliState& s) {
    cmd->add_option("--config", s.config_path, "key=value config file; CLI flags win")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    // repeated flags are last-wins, mirroring the CLI-beats-file precedence
    const auto opt = [cmd, &s](const std::string& key, const std::string& help) {
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        cmd->add_option_function<std::string>(
               flag, [&s, key](const std::string& v) { s.overrides.emplace_back(key, v); }, help)
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    };
    const auto flag = [cmd, &s](const std::string& key, const std::string& help) {
        std::string name = "--" + key;
        std::replace(name.begin(), name.end(), '_', '-');
        cmd->add_flag_function(
            name, [&s, key](std::int64_t) { s.overrides.emplace_back(key, "true"); }, help);
    };

    opt("events", "usage event log (.csv or .jsonl)");
    opt("friendships", "friendship CSV (user_a,user_b)");
    opt("metadata", "thing metadata JSONL");
    opt("truth", "synthetic ground-truth JSON");
    opt("out_dir", "artifact output directory");

    opt("time_bins", "time bins per day");
    opt("tz_offset", "seconds added to every timestamp before binning");
    flag("dedupe_slot", "count at most one event per (thing,user,location,day,bin)");

    opt("threshold", "period cutoff policy: perm-max | mean-std");
    opt("permutations", "shuffled copies for perm-max");
    opt("quantile", "quantile for perm-max");
    opt("z", "z score for mean-std");
    opt("theta", "high-activity bin cutoff, fraction of the peak");
    flag("fold_daily", "fold the activity sequence into a single day");
    flag("binary_sequence", "0/1 occupancy instead of counts");

    opt("alpha_social", "softmax sharpness of user affinity");

    opt("c", "restart probability");
    opt("tol", "L1 convergence tolerance");
    opt("max_iter", "power-iteration cap");
    opt("dangling", "dangling-node policy: self-loop | uniform");

    opt("alpha", "weight of spatio-temporal relevance");
    opt("beta", "weight of social relevance");
    opt("k", "out-degree of the thing graph");
    opt("k_eig", "eigenvector feature count");

    opt("lambda", "L2 regularization strength");
    opt("iterations", "gradient-descent iterations");
    opt("step", "gradient-descent step size");

    opt("fractions", "holdout fractions, comma-separated");
    opt("reps", "repetitions per fraction");
    opt("feature_blocks", "subset of labels,eig,content");
    opt("k_policy", "prediction size: truth-count | fixed");
    opt("fixed_k", "labels per prediction when k-policy is fixed");

    opt("n_clusters", "synthetic clusters");
    opt("things_per_cluster", "things per synthetic cluster");
    opt("users", "synthetic users");
    opt("locations_per_cluster", "locations per synthetic cluster");
    opt("friendship_density", "in-group friendship probability");
    opt("days", "synthetic observation days");
    opt("events_per_day", "synthetic events per day");
    opt("noise_rate", "fraction of uniform noise events");
    opt("active_bins", "per-cluster bin groups, e.g. 7,8;18,19");

    opt("seed", "root RNG seed");
    opt("jobs", "parallel worker bound (never changes output)");
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    return out;
}

// Route a writer to --out or stdout.
void emit(const std::string& out_file, const std::function<void(std::ostream&)>& fn) {
    if (out_file.empty()) {
        fn(std::cout);
        return;
    }
    auto out = open_out(out_file);
    fn(out);
}

fs::path artifact_path(const PipelineConfig& cfg, const char* name) {
    fs::create_directories(cfg.out_dir);
    return fs::path(cfg.out_dir) / name;
}

// The four pipeline artifacts; the standalone subcommands and `pipeline` go
// through the same writers so their bytes cannot diverge.
void write_rgt_file(const PipelineConfig& cfg, const RelationalGraphOfThings& rgt) {
    auto out = open_out(artifact_path(cfg, "rgt.json"));
    out << rgt_to_json(rgt, config_hash(cfg));
    std::cout << "rgt: " << rgt.things.size() << " things, " << rgt.edges.size() << " edges -> "
              << (fs::path(cfg.out_dir) / "rgt.json").string() << '\n';
}

void write_features_file(const PipelineConfig& cfg, const FeatureBundle& fb, const IndexMap& things) {
    auto out = open_out(artifact_path(cfg, "features.csv"));
    out << "# config," << config_hash(cfg) << '\n';
    write_features_csv(fb.features, things, out);
    std::cout << "features: " << fb.features.x.rows() << " things x " << fb.features.x.cols()
              << " columns -> " << (fs::path(cfg.out_dir) / "features.csv").string() << '\n';
}

void write_model_file(const PipelineConfig& cfg, const AnnotationModel& model) {
    auto out = open_out(artifact_path(cfg, "model.txt"));
    write_annotation_model(model, out, config_hash(cfg));
    std::cout << "train: " << model.labels.size() << " labels, " << model.dim() << " dims -> "
              << (fs::path(cfg.out_dir) / "model.txt").string() << '\n';
}

void write_report_file(const PipelineConfig& cfg, const ExperimentResult& result) {
    auto out = open_out(artifact_path(cfg, "report.csv"));
    write_report_csv(result, out, config_hash(cfg));
    for (const auto& row : result.rows) {
        if (!row.is_mean()) continue;
        std::cout << "eval: fraction " << format_double(row.fraction) << " mean micro_f1 "
                  << format_double(row.report.micro_f1) << " mean macro_f1 "
                  << format_double(row.report.macro_f1) << '\n';
    }
    std::cout << "eval: report -> " << (fs::path(cfg.out_dir) / "report.csv").string() << '\n';
}

int cmd_synth(const PipelineConfig& cfg) {
    const auto sc = synth_config(cfg);
    const auto output = generate(sc);
    const auto hash = config_hash(cfg);
    {
        auto out = open_out(artifact_path(cfg, "events.csv"));
        out << "# config," << hash << '\n';
        write_event_log_csv(output.log, out);
    }
    {
        auto out = open_out(artifact_path(cfg, "friendships.csv"));
        out << "# config," << hash << '\n';
        write_friendships_csv(output.friendships, out);
    }
    {
        auto out = open_out(artifact_path(cfg, "metadata.jsonl"));
        out << "# config," << hash << '\n';
        write_metadata_jsonl(output.metadata, out);
    }
    {
        auto out = open_out(artifact_path(cfg, "truth.json"));
        out << truth_json(output.truth, sc, hash);
    }
    std::cout << "synth: " << output.log.events.size() << " events, "
              << output.log.things.size() << " things, " << output.log.users.size() << " users, "
              << output.log.locations.size() << " locations -> " << cfg.out_dir << '\n';
    return 0;
}

int cmd_ingest(const PipelineConfig& cfg) {
    const auto inputs = load_inputs(cfg, !cfg.friendships.empty(), !cfg.metadata.empty());
    const auto hash = config_hash(cfg);
    {
        auto out = open_out(artifact_path(cfg, "events.csv"));
        out << "# config," << hash << '\n';
        write_event_log_csv(inputs.log, out);
    }
    if (!cfg.friendships.empty()) {
        auto out = open_out(artifact_path(cfg, "friendships.csv"));
        out << "# config," << hash << '\n';
        write_friendships_csv(inputs.friendships, out);
    }
    if (!cfg.metadata.empty()) {
        auto out = open_out(artifact_path(cfg, "metadata.jsonl"));
        out << "# config," << hash << '\n';
        write_metadata_jsonl(inputs.metadata, out);
    }
    std::cout << "ingest: " << inputs.log.events.size() << " events, "
              << inputs.log.things.size() << " things, " << inputs.log.users.size() << " users, "
              << inputs.log.locations.size() << " locations -> " << cfg.out_dir << '\n';
    return 0;
}

int cmd_periodogram(const PipelineConfig& cfg, const CliState& s) {
    const auto inputs = load_inputs(cfg, false, false);
    const auto loc = inputs.log.locations.find(s.location);
    if (!loc) throw Error("unknown location '" + s.location + "'");
    const auto opts = periodicity_options(cfg);
    const auto seq = activity_sequence(inputs.log, inputs.events, *loc, opts.sequence);
    if (seq.values.size() < 2)
        throw Error("location '" + s.location + "' spans fewer than two time slots");
    const auto pgram = periodogram(seq.values);
    const double threshold = power_threshold(seq.values, pgram, opts.threshold);
    const auto periods = dominant_periods(pgram, threshold);
    emit(s.out_file, [&](std::ostream& out) {
        write_periodogram_csv(pgram, threshold, periods, out, config_hash(cfg));
    });
    return 0;
}

int cmd_graph(const PipelineConfig& cfg) {
    const auto inputs = load_inputs(cfg, true, false);
    const auto rel = periodic_relation(inputs.log, inputs.events, periodicity_options(cfg));
    const auto st = build_spatiotemporal_graph(inputs.log, inputs.events, rel);
    const auto social =
        build_social_graph(inputs.log, inputs.events, inputs.friendships, cfg.alpha_social);
    const auto hash = config_hash(cfg);
    {
        std::vector<std::string> labels(st.size());
        for (std::size_t i = 0; i < st.size(); ++i) labels[i] = st_node_label(st, inputs.log, i);
        auto out = open_out(artifact_path(cfg, "st_graph.csv"));
        write_graph_csv(st.weights, labels, out, hash);
    }
    {
        std::vector<std::string> labels(social.size());
        for (std::size_t i = 0; i < social.size(); ++i)
            labels[i] = social_node_label(social, inputs.log, i);
        auto out = open_out(artifact_path(cfg, "social_graph.csv"));
        write_graph_csv(social.weights, labels, out, hash);
    }
    std::cout << "graph: spatio-temporal " << st.size() << " nodes / " << st.weights.nonZeros()
              << " entries, social " << social.size() << " nodes / " << social.weights.nonZeros()
              << " entries -> " << cfg.out_dir << '\n';
    return 0;
}

int cmd_rwr(const PipelineConfig& cfg, const CliState& s) {
    if (s.graph_kind != "spatio-temporal" && s.graph_kind != "social")
        throw UsageError("--graph must be one of spatio-temporal, social, got '" + s.graph_kind +
                         "'");
    const bool social = s.graph_kind == "social";
    const auto inputs = load_inputs(cfg, social, false);
    const auto thing = inputs.log.things.find(s.seed_thing);
    if (!thing) throw Error("unknown thing '" + s.seed_thing + "'");

    Eigen::SparseMatrix<double> weights;
    std::size_t node = 0;
    std::vector<std::string> labels;
    if (social) {
        const auto g =
            build_social_graph(inputs.log, inputs.events, inputs.friendships, cfg.alpha_social);
        weights = g.weights;
        node = g.thing_node(*thing);
        labels.resize(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) labels[i] = social_node_label(g, inputs.log, i);
    } else {
        const auto rel = periodic_relation(inputs.log, inputs.events, periodicity_options(cfg));
        const auto g = build_spatiotemporal_graph(inputs.log, inputs.events, rel);
        weights = g.weights;
        node = g.thing_node(*thing);
        labels.resize(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) labels[i] = st_node_label(g, inputs.log, i);
    }
    const auto tm = transition_matrix(weights, dangling_policy(cfg));
    const auto pi = rwr_steady_state(tm, node, rwr_params(cfg));
    emit(s.out_file,
         [&](std::ostream& out) { write_pi_csv(pi, labels, out, config_hash(cfg)); });
    return 0;
}

int cmd_rgt(const PipelineConfig& cfg) {
    const auto inputs = load_inputs(cfg, true, false);
    const auto stages = run_stages(inputs, cfg);
    write_rgt_file(cfg, stages.rgt);
    return 0;
}

int cmd_features(const PipelineConfig& cfg) {
    const auto inputs = load_inputs(cfg, true, true);
    const auto stages = run_stages(inputs, cfg);
    const auto fb = run_feature_stage(inputs, cfg, stages);
    write_features_file(cfg, fb, inputs.log.things);
    return 0;
}

int cmd_train(const PipelineConfig& cfg, const CliState& s) {
    if (cfg.metadata.empty()) throw UsageError("--metadata is required");
    std::ifstream in(s.features_path);
    if (!in) throw Error("cannot open '" + s.features_path + "'");
    IndexMap things;
    const auto features = read_features_csv(in, s.features_path, &things);
    const auto metadata = parse_metadata(cfg.metadata);
    const auto assignments = collect_labels(metadata, things);
    std::vector<std::size_t> train_things;
    for (std::size_t t = 0; t < things.size(); ++t)
        if (!assignments.of_thing[t].empty()) train_things.push_back(t);
    const auto model = train(features.x, train_things, assignments, train_config(cfg));
    write_model_file(cfg, model);
    return 0;
}

int cmd_annotate(const PipelineConfig& cfg, const CliState& s) {
    if (s.top < 1)
        throw UsageError("--top must be at least 1, got " + std::to_string(s.top));
    std::ifstream min(s.model_path);
    if (!min) throw Error("cannot open '" + s.model_path + "'");
    const auto model = read_annotation_model(min, s.model_path);
    std::ifstream fin(s.features_path);
    if (!fin) throw Error("cannot open '" + s.features_path + "'");
    IndexMap things;
    const auto features = read_features_csv(fin, s.features_path, &things);
    std::vector<Prediction> predictions;
    predictions.reserve(things.size());
    for (std::size_t i = 0; i < things.size(); ++i)
        predictions.push_back(predict(model, things.id(i),
                                      features.x.row(static_cast<Eigen::Index>(i)).transpose(),
                                      s.top));
    emit(s.out_file,
         [&](std::ostream& out) { write_predictions_csv(predictions, out, config_hash(cfg)); });
    return 0;
}

int cmd_eval(const PipelineConfig& cfg) {
    const auto inputs = load_inputs(cfg, true, true);
    const auto stages = run_stages(inputs, cfg);
    const auto result = run_eval_stage(inputs, cfg, stages);
    write_report_file(cfg, result);
    return 0;
}

int cmd_pipeline(const PipelineConfig& cfg) {
    const auto inputs = load_inputs(cfg, true, true);
    const auto stages = run_stages(inputs, cfg);
    write_rgt_file(cfg, stages.rgt);
    const auto fb = run_feature_stage(inputs, cfg, stages);
    write_features_file(cfg, fb, inputs.log.things);
    const auto model = run_train_stage(fb, cfg);
    write_model_file(cfg, model);
    const auto result = run_eval_stage(inputs, cfg, stages);
    write_report_file(cfg, result);
    return 0;
}

std::string single_line(std::string text) {
    for (char& ch : text)
        if (ch == '\n') ch = ' ';
    return text;
}

int run(int argc, char** argv) {
    CLI::App app{"usage-correlation mining and thing annotation"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    CliState s;

    auto* synth = app.add_subcommand("synth", "generate a planted-cluster dataset");
    add_config_flags(synth, s);
    auto* ingest = app.add_subcommand("ingest", "parse, validate, and canonicalize input files");
    add_config_flags(ingest, s);
    auto* pgram =
        app.add_subcommand("periodogram", "periodogram and dominant periods of one location");
    add_config_flags(pgram, s);
    pgram->add_option("--location", s.location, "location id")->required();
    pgram->add_option("--out", s.out_file, "output CSV (default stdout)");
    auto* graph = app.add_subcommand("graph", "build the spatio-temporal and social graphs");
    add_config_flags(graph, s);
    auto* rwr = app.add_subcommand("rwr", "steady-state walk scores from one seed thing");
    add_config_flags(rwr, s);
    rwr->add_option("--seed-thing", s.seed_thing, "thing id the walk restarts at")->required();
    rwr->add_option("--graph", s.graph_kind, "walk graph: spatio-temporal | social");
    rwr->add_option("--out", s.out_file, "output CSV (default stdout)");
    auto* rgt = app.add_subcommand("rgt", "top-k relational graph of things");
    add_config_flags(rgt, s);
    auto* features = app.add_subcommand("features", "assemble the annotation feature matrix");
    add_config_flags(features, s);
    auto* train = app.add_subcommand("train", "fit one-vs-rest label models from features");
    add_config_flags(train, s);
    train->add_option("--features", s.features_path, "features CSV from the features step")
        ->required();
    auto* annotate = app.add_subcommand("annotate", "rank labels for every thing");
    add_config_flags(annotate, s);
    annotate->add_option("--model", s.model_path, "model file from the train step")->required();
    annotate->add_option("--features", s.features_path, "features CSV")->required();
    annotate->add_option("--top", s.top, "labels per thing");
    annotate->add_option("--out", s.out_file, "output CSV (default stdout)");
    auto* eval = app.add_subcommand("eval", "holdout experiment and F1 report");
    add_config_flags(eval, s);
    auto* pipeline =
        app.add_subcommand("pipeline", "run graph building through evaluation in one go");
    add_config_flags(pipeline, s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        throw UsageError(single_line(e.what()));
    }

    PipelineConfig cfg;
    if (!s.config_path.empty()) apply_config_file(cfg, s.config_path);
    apply_config_overrides(cfg, s.overrides);
    validate_config(cfg);

    if (app.got_subcommand(synth)) return cmd_synth(cfg);
    if (app.got_subcommand(ingest)) return cmd_ingest(cfg);
    if (app.got_subcommand(pgram)) return cmd_periodogram(cfg, s);
    if (app.got_subcommand(graph)) return cmd_graph(cfg);
    if (app.got_subcommand(rwr)) return cmd_rwr(cfg, s);
    if (app.got_subcommand(rgt)) return cmd_rgt(cfg);
    if (app.got_subcommand(features)) return cmd_features(cfg);
    if (app.got_subcommand(train)) return cmd_train(cfg, s);
    if (app.got_subcommand(annotate)) return cmd_annotate(cfg, s);
    if (app.got_subcommand(eval)) return cmd_eval(cfg);
    if (app.got_subcommand(pipeline)) return cmd_pipeline(cfg);
    throw UsageError("no subcommand given");
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const UsageError& e) {
        std::cerr << "discort: usage error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "discort: error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "discort: error: " << e.what() << '\n';
        return 1;
    }
}
