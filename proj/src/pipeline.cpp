#include "discort/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "discort/graph_build.hpp"
#include "discort/periodicity.hpp"

namespace discort {

namespace {

// Config keys use '_', flags use '-'; error messages always name the flag.
std::string flag_name(const std::string& key) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    return flag;
}

double config_double(const std::string& value, const std::string& context) {
    try {
        return parse_double(value);
    } catch (const Error&) {
        throw UsageError(context + ": expected a number, got '" + value + "'");
    }
}

int config_int(const std::string& value, const std::string& context) {
    std::int64_t v = 0;
    try {
        v = parse_int64(value);
    } catch (const Error&) {
        throw UsageError(context + ": expected an integer, got '" + value + "'");
    }
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw UsageError(context + ": integer out of range: '" + value + "'");
    return static_cast<int>(v);
}

std::uint64_t config_u64(const std::string& value, const std::string& context) {
    const std::string t = trim(value);
    std::uint64_t v = 0;
    const auto* begin = t.data();
    const auto* end = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v, 10);
    if (ec != std::errc() || ptr != end || t.empty())
        throw UsageError(context + ": expected an unsigned integer, got '" + value + "'");
    return v;
}

bool config_bool(const std::string& value, const std::string& context) {
    const std::string t = to_lower(trim(value));
    if (t == "true" || t == "1") return true;
    if (t == "false" || t == "0") return false;
    throw UsageError(context + ": expected true or false, got '" + value + "'");
}

std::vector<double> config_fractions(const std::string& value, const std::string& context) {
    std::vector<double> out;
    for (const auto& part : split(value, ',')) out.push_back(config_double(trim(part), context));
    if (out.empty()) throw UsageError(context + ": expected a comma-separated list of fractions");
    return out;
}

// "7,8;12,13" -> {{7,8},{12,13}}. Whitespace around numbers is ignored.
std::vector<std::vector<int>> parse_active_bins(const std::string& value,
                                                const std::string& context) {
    std::vector<std::vector<int>> groups;
    if (trim(value).empty()) return groups;
    for (const auto& group : split(value, ';')) {
        std::vector<int> bins;
        for (const auto& part : split(group, ',')) bins.push_back(config_int(trim(part), context));
        if (bins.empty())
            throw UsageError(context + ": empty bin group in '" + value + "'");
        groups.push_back(std::move(bins));
    }
    return groups;
}

std::string format_active_bins(const std::vector<std::vector<int>>& groups) {
    std::string out;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (g > 0) out += ';';
        for (std::size_t i = 0; i < groups[g].size(); ++i) {
            if (i > 0) out += ',';
            out += std::to_string(groups[g][i]);
        }
    }
    return out;
}

const std::vector<std::string> kFeatureBlockOrder = {"labels", "eig", "content"};

// Normalizes to canonical order and rejects unknown block names.
std::string normalize_feature_blocks(const std::string& value, const std::string& context) {
    std::vector<bool> on(kFeatureBlockOrder.size(), false);
    for (const auto& part : split(value, ',')) {
        const std::string t = trim(part);
        const auto it = std::find(kFeatureBlockOrder.begin(), kFeatureBlockOrder.end(), t);
        if (it == kFeatureBlockOrder.end())
            throw UsageError(context + ": unknown feature block '" + t +
                             "' (expected labels, eig, content)");
        on[static_cast<std::size_t>(it - kFeatureBlockOrder.begin())] = true;
    }
    std::string out;
    for (std::size_t i = 0; i < kFeatureBlockOrder.size(); ++i) {
        if (!on[i]) continue;
        if (!out.empty()) out += ',';
        out += kFeatureBlockOrder[i];
    }
    if (out.empty())
        throw UsageError(context + ": at least one feature block is required");
    return out;
}

}  // namespace

void apply_config_entry(PipelineConfig& cfg, const std::string& key, const std::string& value,
                        const std::string& context) {
    if (key == "events") cfg.events = value;
    else if (key == "friendships") cfg.friendships = value;
    else if (key == "metadata") cfg.metadata = value;
    else if (key == "truth") cfg.truth = value;
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "time_bins") cfg.time_bins = config_int(value, context);
    else if (key == "tz_offset") cfg.tz_offset = config_int(value, context);
    else if (key == "dedupe_slot") cfg.dedupe_slot = config_bool(value, context);
    else if (key == "threshold") cfg.threshold = trim(value);
    else if (key == "permutations") cfg.permutations = config_int(value, context);
    else if (key == "quantile") cfg.quantile = config_double(value, context);
    else if (key == "z") cfg.z = config_double(value, context);
    else if (key == "theta") cfg.theta = config_double(value, context);
    else if (key == "fold_daily") cfg.fold_daily = config_bool(value, context);
    else if (key == "binary_sequence") cfg.binary_sequence = config_bool(value, context);
    else if (key == "alpha_social") cfg.alpha_social = config_double(value, context);
    else if (key == "c") cfg.c = config_double(value, context);
    else if (key == "tol") cfg.tol = config_double(value, context);
    else if (key == "max_iter") cfg.max_iter = config_int(value, context);
    else if (key == "dangling") cfg.dangling = trim(value);
    else if (key == "alpha") cfg.alpha = config_double(value, context);
    else if (key == "beta") cfg.beta = config_double(value, context);
    else if (key == "k") cfg.k = config_int(value, context);
    else if (key == "k_eig") cfg.k_eig = config_int(value, context);
    else if (key == "lambda") cfg.lambda = config_double(value, context);
    else if (key == "iterations") cfg.iterations = config_int(value, context);
    else if (key == "step") cfg.step = config_double(value, context);
    else if (key == "fractions") cfg.fractions = config_fractions(value, context);
    else if (key == "reps") cfg.reps = config_int(value, context);
    else if (key == "feature_blocks") cfg.feature_blocks = normalize_feature_blocks(value, context);
    else if (key == "k_policy") cfg.k_policy = trim(value);
    else if (key == "fixed_k") cfg.fixed_k = config_int(value, context);
    else if (key == "n_clusters") cfg.n_clusters = config_int(value, context);
    else if (key == "things_per_cluster") cfg.things_per_cluster = config_int(value, context);
    else if (key == "users") cfg.users = config_int(value, context);
    else if (key == "locations_per_cluster") cfg.locations_per_cluster = config_int(value, context);
    else if (key == "friendship_density") cfg.friendship_density = config_double(value, context);
    else if (key == "days") cfg.days = config_int(value, context);
    else if (key == "events_per_day") cfg.events_per_day = config_int(value, context);
    else if (key == "noise_rate") cfg.noise_rate = config_double(value, context);
    else if (key == "active_bins")
        cfg.active_bins = format_active_bins(parse_active_bins(value, context));
    else if (key == "seed") cfg.seed = config_u64(value, context);
    else if (key == "jobs") cfg.jobs = config_int(value, context);
    else throw UsageError(context + ": unknown key '" + key + "'");
}

void apply_config_file(PipelineConfig& cfg, std::istream& in, const std::string& source_name) {
    std::string line;
    std::size_t line_no = 0;
    while (read_line(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        const std::string context = source_name + ":" + std::to_string(line_no);
        if (eq == std::string::npos)
            throw UsageError(context + ": expected key=value, got '" + t + "'");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw UsageError(context + ": empty key");
        apply_config_entry(cfg, key, value, context);
    }
}

void apply_config_file(PipelineConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    apply_config_file(cfg, in, path);
}

void apply_config_overrides(PipelineConfig& cfg,
                            const std::vector<std::pair<std::string, std::string>>& entries) {
    for (const auto& [key, value] : entries) apply_config_entry(cfg, key, value, flag_name(key));
}

namespace {

[[noreturn]] void range_error(const std::string& key, const std::string& range,
                              const std::string& got) {
    throw UsageError(flag_name(key) + " must be " + range + ", got " + got);
}

void check(bool ok, const std::string& key, const std::string& range, double got) {
    if (!ok) range_error(key, range, format_double(got));
}

void check(bool ok, const std::string& key, const std::string& range, int got) {
    if (!ok) range_error(key, range, std::to_string(got));
}

void check_choice(const std::string& value, const std::string& key,
                  const std::vector<std::string>& allowed) {
    if (std::find(allowed.begin(), allowed.end(), value) != allowed.end()) return;
    std::string range = "one of ";
    for (std::size_t i = 0; i < allowed.size(); ++i) {
        if (i > 0) range += ", ";
        range += allowed[i];
    }
    range_error(key, range, "'" + value + "'");
}

}  // namespace

void validate_config(const PipelineConfig& cfg) {
    check(cfg.time_bins >= 1 && cfg.time_bins <= 86400, "time_bins", "in [1, 86400]",
          cfg.time_bins);
    check(cfg.tz_offset >= -86400 && cfg.tz_offset <= 86400, "tz_offset",
          "in [-86400, 86400] seconds", cfg.tz_offset);
    check_choice(cfg.threshold, "threshold", {"perm-max", "mean-std"});
    check(cfg.permutations >= 1, "permutations", "at least 1", cfg.permutations);
    check(cfg.quantile > 0.0 && cfg.quantile <= 1.0, "quantile", "in (0, 1]", cfg.quantile);
    check(cfg.z >= 0.0, "z", "at least 0", cfg.z);
    check(cfg.theta > 0.0 && cfg.theta <= 1.0, "theta", "in (0, 1]", cfg.theta);
    check(cfg.alpha_social >= 0.0, "alpha_social", "at least 0", cfg.alpha_social);
    check(cfg.c > 0.0 && cfg.c <= 1.0, "c", "in (0, 1]", cfg.c);
    check(cfg.tol > 0.0, "tol", "greater than 0", cfg.tol);
    check(cfg.max_iter >= 1, "max_iter", "at least 1", cfg.max_iter);
    check_choice(cfg.dangling, "dangling", {"self-loop", "uniform"});
    check(cfg.alpha >= 0.0 && cfg.alpha <= 1.0, "alpha", "in [0, 1]", cfg.alpha);
    check(cfg.beta >= 0.0 && cfg.beta <= 1.0, "beta", "in [0, 1]", cfg.beta);
    check(cfg.k >= 1, "k", "at least 1", cfg.k);
    check(cfg.k_eig >= 1, "k_eig", "at least 1", cfg.k_eig);
    check(cfg.lambda >= 0.0, "lambda", "at least 0", cfg.lambda);
    check(cfg.iterations >= 1, "iterations", "at least 1", cfg.iterations);
    check(cfg.step > 0.0, "step", "greater than 0", cfg.step);
    for (const double f : cfg.fractions)
        check(f > 0.0 && f < 1.0, "fractions", "a list of values in (0, 1)", f);
    check(cfg.reps >= 1, "reps", "at least 1", cfg.reps);
    normalize_feature_blocks(cfg.feature_blocks, flag_name("feature_blocks"));
    check_choice(cfg.k_policy, "k_policy", {"truth-count", "fixed"});
    check(cfg.fixed_k >= 1, "fixed_k", "at least 1", cfg.fixed_k);
    check(cfg.n_clusters >= 1, "n_clusters", "at least 1", cfg.n_clusters);
    check(cfg.things_per_cluster >= 1, "things_per_cluster", "at least 1",
          cfg.things_per_cluster);
    check(cfg.users >= cfg.n_clusters, "users", "at least --n-clusters", cfg.users);
    check(cfg.locations_per_cluster >= 1, "locations_per_cluster", "at least 1",
          cfg.locations_per_cluster);
    check(cfg.friendship_density >= 0.0 && cfg.friendship_density <= 1.0, "friendship_density",
          "in [0, 1]", cfg.friendship_density);
    check(cfg.days >= 1, "days", "at least 1", cfg.days);
    check(cfg.events_per_day >= 1, "events_per_day", "at least 1", cfg.events_per_day);
    check(cfg.noise_rate >= 0.0 && cfg.noise_rate <= 1.0, "noise_rate", "in [0, 1]",
          cfg.noise_rate);
    const auto bins = parse_active_bins(cfg.active_bins, flag_name("active_bins"));
    if (!bins.empty() && bins.size() != static_cast<std::size_t>(cfg.n_clusters))
        range_error("active_bins", "one bin group per cluster (" +
                        std::to_string(cfg.n_clusters) + ")",
                    std::to_string(bins.size()) + " groups");
    for (const auto& group : bins)
        for (const int b : group)
            check(b >= 0 && b < 24, "active_bins", "bins in [0, 24)", b);
    check(cfg.jobs >= 1, "jobs", "at least 1", cfg.jobs);
}

std::string canonical_config(const PipelineConfig& cfg) {
    // jobs and paths are deliberately absent: neither may change any output.
    std::ostringstream out;
    out << "active_bins=" << cfg.active_bins << '\n';
    out << "alpha=" << format_double(cfg.alpha) << '\n';
    out << "alpha_social=" << format_double(cfg.alpha_social) << '\n';
    out << "beta=" << format_double(cfg.beta) << '\n';
    out << "binary_sequence=" << (cfg.binary_sequence ? "true" : "false") << '\n';
    out << "c=" << format_double(cfg.c) << '\n';
    out << "dangling=" << cfg.dangling << '\n';
    out << "days=" << cfg.days << '\n';
    out << "dedupe_slot=" << (cfg.dedupe_slot ? "true" : "false") << '\n';
    out << "events_per_day=" << cfg.events_per_day << '\n';
    out << "feature_blocks=" << cfg.feature_blocks << '\n';
    out << "fixed_k=" << cfg.fixed_k << '\n';
    out << "fold_daily=" << (cfg.fold_daily ? "true" : "false") << '\n';
    out << "fractions=";
    for (std::size_t i = 0; i < cfg.fractions.size(); ++i) {
        if (i > 0) out << ',';
        out << format_double(cfg.fractions[i]);
    }
    out << '\n';
    out << "friendship_density=" << format_double(cfg.friendship_density) << '\n';
    out << "iterations=" << cfg.iterations << '\n';
    out << "k=" << cfg.k << '\n';
    out << "k_eig=" << cfg.k_eig << '\n';
    out << "k_policy=" << cfg.k_policy << '\n';
    out << "lambda=" << format_double(cfg.lambda) << '\n';
    out << "locations_per_cluster=" << cfg.locations_per_cluster << '\n';
    out << "max_iter=" << cfg.max_iter << '\n';
    out << "n_clusters=" << cfg.n_clusters << '\n';
    out << "noise_rate=" << format_double(cfg.noise_rate) << '\n';
    out << "permutations=" << cfg.permutations << '\n';
    out << "quantile=" << format_double(cfg.quantile) << '\n';
    out << "reps=" << cfg.reps << '\n';
    out << "seed=" << cfg.seed << '\n';
    out << "step=" << format_double(cfg.step) << '\n';
    out << "theta=" << format_double(cfg.theta) << '\n';
    out << "things_per_cluster=" << cfg.things_per_cluster << '\n';
    out << "threshold=" << cfg.threshold << '\n';
    out << "time_bins=" << cfg.time_bins << '\n';
    out << "tol=" << format_double(cfg.tol) << '\n';
    out << "tz_offset=" << cfg.tz_offset << '\n';
    out << "users=" << cfg.users << '\n';
    out << "z=" << format_double(cfg.z) << '\n';
    return out.str();
}

std::string config_hash(const PipelineConfig& cfg) {
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(canonical_config(cfg));
    return out.str();
}

PeriodicityOptions periodicity_options(const PipelineConfig& cfg) {
    PeriodicityOptions opts;
    opts.threshold.kind = cfg.threshold == "mean-std" ? ThresholdPolicy::Kind::MeanStd
                                                      : ThresholdPolicy::Kind::PermMax;
    opts.threshold.permutations = cfg.permutations;
    opts.threshold.quantile = cfg.quantile;
    opts.threshold.z = cfg.z;
    opts.theta = cfg.theta;
    opts.sequence.fold_daily = cfg.fold_daily;
    opts.sequence.binary = cfg.binary_sequence;
    opts.jobs = cfg.jobs;
    return opts;
}

RwrParams rwr_params(const PipelineConfig& cfg) {
    return RwrParams{cfg.c, cfg.tol, cfg.max_iter};
}

DanglingPolicy dangling_policy(const PipelineConfig& cfg) {
    return cfg.dangling == "uniform" ? DanglingPolicy::Uniform : DanglingPolicy::SelfLoop;
}

TrainConfig train_config(const PipelineConfig& cfg) {
    TrainConfig tc;
    tc.lambda = cfg.lambda;
    tc.iterations = cfg.iterations;
    tc.step = cfg.step;
    tc.jobs = cfg.jobs;
    return tc;
}

FeatureFlags feature_flags(const PipelineConfig& cfg) {
    FeatureFlags flags;
    const auto blocks = split(cfg.feature_blocks, ',');
    const auto has = [&](const char* name) {
        return std::find(blocks.begin(), blocks.end(), name) != blocks.end();
    };
    flags.labels = has("labels");
    flags.eig = has("eig");
    flags.content = has("content");
    return flags;
}

ExperimentConfig experiment_config(const PipelineConfig& cfg) {
    ExperimentConfig ec;
    ec.fractions = cfg.fractions;
    ec.repetitions = cfg.reps;
    ec.seed = cfg.seed;
    ec.alpha = cfg.alpha;
    ec.beta = cfg.beta;
    ec.rgt_k = cfg.k;
    ec.k_eig = cfg.k_eig;
    const auto flags = feature_flags(cfg);
    ec.use_label_features = flags.labels;
    ec.use_eig_features = flags.eig;
    ec.use_content_features = flags.content;
    ec.k_policy = cfg.k_policy == "fixed" ? KPolicy::Fixed : KPolicy::TruthCount;
    ec.fixed_k = cfg.fixed_k;
    ec.train = train_config(cfg);
    ec.jobs = cfg.jobs;
    return ec;
}

SynthConfig synth_config(const PipelineConfig& cfg) {
    SynthConfig sc;
    sc.n_clusters = cfg.n_clusters;
    sc.things_per_cluster = cfg.things_per_cluster;
    sc.users = cfg.users;
    sc.locations_per_cluster = cfg.locations_per_cluster;
    sc.active_bins = parse_active_bins(cfg.active_bins, flag_name("active_bins"));
    sc.friendship_density = cfg.friendship_density;
    sc.days = cfg.days;
    sc.events_per_day = cfg.events_per_day;
    sc.noise_rate = cfg.noise_rate;
    sc.seed = cfg.seed;
    return sc;
}

std::vector<DiscretizedEvent> dedupe_slot_events(std::vector<DiscretizedEvent> events) {
    const auto key = [](const DiscretizedEvent& e) {
        return std::tie(e.thing, e.user, e.location, e.day, e.bin);
    };
    std::sort(events.begin(), events.end(),
              [&](const DiscretizedEvent& a, const DiscretizedEvent& b) { return key(a) < key(b); });
    events.erase(std::unique(events.begin(), events.end(),
                             [&](const DiscretizedEvent& a, const DiscretizedEvent& b) {
                                 return key(a) == key(b);
                             }),
                 events.end());
    return events;
}

PipelineInputs load_inputs(const PipelineConfig& cfg, bool need_friendships, bool need_metadata) {
    if (cfg.events.empty()) throw UsageError("--events is required");
    EventLog log = parse_event_log(cfg.events, detect_log_format(cfg.events), cfg.time_bins);
    auto events = discretize(log, cfg.tz_offset);
    if (cfg.dedupe_slot) events = dedupe_slot_events(std::move(events));

    FriendshipMatrix friendships{log.users};
    if (need_friendships) {
        if (cfg.friendships.empty()) throw UsageError("--friendships is required");
        friendships = validate_friendships(parse_friendships(cfg.friendships), log);
    }

    std::vector<ThingMetadata> metadata;
    if (need_metadata) {
        if (cfg.metadata.empty()) throw UsageError("--metadata is required");
        metadata = parse_metadata(cfg.metadata);
    }
    return PipelineInputs{std::move(log), std::move(events), std::move(friendships),
                          std::move(metadata)};
}

StageBundle run_stages(const PipelineInputs& inputs, const PipelineConfig& cfg) {
    StageBundle s;
    s.rel = periodic_relation(inputs.log, inputs.events, periodicity_options(cfg));
    s.st = build_spatiotemporal_graph(inputs.log, inputs.events, s.rel);
    s.social = build_social_graph(inputs.log, inputs.events, inputs.friendships, cfg.alpha_social);
    const auto params = rwr_params(cfg);
    const auto dangling = dangling_policy(cfg);
    s.rm = relevance_matrix(s.st, params, dangling, cfg.jobs);
    s.ru = relevance_matrix(s.social, params, dangling, cfg.jobs);
    s.combined = combine(s.rm, s.ru, cfg.alpha, cfg.beta);
    s.rgt = build_rgt(s.combined, inputs.log.things, cfg.k);
    return s;
}

FeatureBundle run_feature_stage(const PipelineInputs& inputs, const PipelineConfig& cfg,
                                const StageBundle& stages) {
    FeatureBundle b;
    b.assignments = collect_labels(inputs.metadata, inputs.log.things);
    const std::size_t n = inputs.log.things.size();
    for (std::size_t t = 0; t < n; ++t)
        if (!b.assignments.of_thing[t].empty()) b.train_things.push_back(t);

    b.content = tfidf_features(inputs.metadata, inputs.log.things);

    const auto flags = feature_flags(cfg);
    Eigen::MatrixXd label_block(n, 0);
    std::vector<std::string> label_names;
    if (flags.labels) {
        label_block = bayes_features(stages.combined, b.assignments, b.train_things);
        label_names = b.assignments.labels.ids();
    }
    Eigen::MatrixXd eig_block(n, 0);
    if (flags.eig) eig_block = modularity_features(stages.rgt, cfg.k_eig);
    Eigen::MatrixXd content_block(n, 0);
    std::vector<std::string> vocabulary;
    if (flags.content) {
        content_block = b.content.vectors;
        vocabulary = b.content.vocabulary;
    }
    b.features = assemble_features(label_block, label_names, eig_block, content_block, vocabulary);
    return b;
}

AnnotationModel run_train_stage(const FeatureBundle& features, const PipelineConfig& cfg) {
    return train(features.features.x, features.train_things, features.assignments,
                 train_config(cfg));
}

ExperimentResult run_eval_stage(const PipelineInputs& inputs, const PipelineConfig& cfg,
                                const StageBundle& stages) {
    ExperimentData data{inputs.log.things, stages.rm, stages.ru,
                        collect_labels(inputs.metadata, inputs.log.things),
                        tfidf_features(inputs.metadata, inputs.log.things)};
    return holdout_experiment(data, experiment_config(cfg));
}

std::string rgt_to_json(const RelationalGraphOfThings& rgt, const std::string& config_hash) {
    nlohmann::ordered_json j;
    j["format"] = "discort-rgt v1";
    if (!config_hash.empty()) j["config"] = config_hash;
    j["k"] = rgt.k;
    j["things"] = rgt.things;
    auto edges = nlohmann::ordered_json::array();
    for (const auto& e : rgt.edges) {
        nlohmann::ordered_json edge;
        edge["src"] = e.src;
        edge["dst"] = e.dst;
        edge["weight"] = e.weight;
        edges.push_back(std::move(edge));
    }
    j["edges"] = std::move(edges);
    return j.dump(2) + "\n";
}

RelationalGraphOfThings rgt_from_json(const std::string& text, const std::string& source_name) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(source_name + ": invalid JSON: " + e.what());
    }
    const auto fit = j.is_object() ? j.find("format") : j.end();
    if (fit == j.end() || !fit->is_string() || fit->get<std::string>() != "discort-rgt v1")
        throw Error(source_name + ": not a discort-rgt v1 file");
    RelationalGraphOfThings rgt;
    try {
        rgt.k = j.at("k").get<int>();
        rgt.things = j.at("things").get<std::vector<std::string>>();
        for (const auto& edge : j.at("edges")) {
            RgtEdge e;
            e.src = edge.at("src").get<std::size_t>();
            e.dst = edge.at("dst").get<std::size_t>();
            e.weight = edge.at("weight").get<double>();
            rgt.edges.push_back(e);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(source_name + ": " + e.what());
    }
    for (const auto& e : rgt.edges)
        if (e.src >= rgt.things.size() || e.dst >= rgt.things.size())
            throw Error(source_name + ": edge endpoint out of range");
    return rgt;
}

void write_pi_csv(const Eigen::VectorXd& pi, const std::vector<std::string>& node_labels,
                  std::ostream& out, const std::string& config_hash) {
    if (static_cast<std::size_t>(pi.size()) != node_labels.size())
        throw Error("steady-state vector and node labels disagree in size");
    if (!config_hash.empty()) out << "# config," << config_hash << '\n';
    out << "node,score\n";
    for (std::size_t i = 0; i < node_labels.size(); ++i)
        out << csv_escape(node_labels[i]) << ',' << format_double(pi[static_cast<Eigen::Index>(i)])
            << '\n';
}

void write_graph_csv(const Eigen::SparseMatrix<double>& w,
                     const std::vector<std::string>& node_labels, std::ostream& out,
                     const std::string& config_hash) {
    if (static_cast<std::size_t>(w.rows()) != node_labels.size() ||
        static_cast<std::size_t>(w.cols()) != node_labels.size())
        throw Error("weight matrix and node labels disagree in size");
    std::vector<std::tuple<std::size_t, std::size_t, double>> triplets;
    for (Eigen::Index col = 0; col < w.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(w, col); it; ++it) {
            if (it.value() == 0.0) continue;
            triplets.emplace_back(static_cast<std::size_t>(it.row()),
                                  static_cast<std::size_t>(it.col()), it.value());
        }
    }
    std::sort(triplets.begin(), triplets.end());
    if (!config_hash.empty()) out << "# config," << config_hash << '\n';
    out << "src,dst,weight\n";
    for (const auto& [src, dst, weight] : triplets)
        out << csv_escape(node_labels[src]) << ',' << csv_escape(node_labels[dst]) << ','
            << format_double(weight) << '\n';
}

void write_periodogram_csv(const Periodogram& pgram, double threshold,
                           const std::vector<int>& periods, std::ostream& out,
                           const std::string& config_hash) {
    if (!config_hash.empty()) out << "# config," << config_hash << '\n';
    out << "# n," << pgram.n << '\n';
    out << "# threshold," << format_double(threshold) << '\n';
    out << "# dominant,";
    for (std::size_t i = 0; i < periods.size(); ++i) {
        if (i > 0) out << ';';
        out << periods[i];
    }
    out << '\n';
    out << "k,power\n";
    for (std::size_t k = 0; k < pgram.power.size(); ++k)
        out << k << ',' << format_double(pgram.power[k]) << '\n';
}

void write_predictions_csv(const std::vector<Prediction>& predictions, std::ostream& out,
                           const std::string& config_hash) {
    if (!config_hash.empty()) out << "# config," << config_hash << '\n';
    out << "thing,rank,label,score\n";
    for (const auto& p : predictions) {
        for (std::size_t r = 0; r < p.ranked.size(); ++r)
            out << csv_escape(p.thing) << ',' << r + 1 << ',' << csv_escape(p.ranked[r].label)
                << ',' << format_double(p.ranked[r].score) << '\n';
    }
}

}  // namespace discort
