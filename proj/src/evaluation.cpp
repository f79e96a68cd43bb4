#include "discort/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "discort/common.hpp"
#include "discort/rwr.hpp"

namespace discort {

namespace {

struct LabelCounts {
    std::vector<double> tp, truth, predicted;
};

LabelCounts tally(const LabelSets& truth, const LabelSets& predicted, std::size_t n_labels) {
    if (truth.size() != predicted.size())
        throw Error("truth and prediction cover different numbers of things");
    if (truth.empty()) throw Error("empty test set");
    LabelCounts c;
    c.tp.assign(n_labels, 0.0);
    c.truth.assign(n_labels, 0.0);
    c.predicted.assign(n_labels, 0.0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        for (std::size_t l : truth[i]) {
            if (l >= n_labels) throw Error("label id out of range");
            c.truth[l] += 1.0;
        }
        for (std::size_t l : predicted[i]) {
            if (l >= n_labels) throw Error("label id out of range");
            c.predicted[l] += 1.0;
        }
        std::vector<std::size_t> common;
        std::set_intersection(truth[i].begin(), truth[i].end(), predicted[i].begin(),
                              predicted[i].end(), std::back_inserter(common));
        for (std::size_t l : common) c.tp[l] += 1.0;
    }
    return c;
}

std::size_t max_label_id(const LabelSets& a, const LabelSets& b) {
    std::size_t top = 0;
    for (const auto* sets : {&a, &b}) {
        for (const auto& s : *sets) {
            for (std::size_t l : s) top = std::max(top, l + 1);
        }
    }
    return top;
}

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace

double micro_f1(const LabelSets& truth, const LabelSets& predicted) {
    const auto c = tally(truth, predicted, max_label_id(truth, predicted));
    double tp = 0.0, t = 0.0, p = 0.0;
    for (std::size_t l = 0; l < c.tp.size(); ++l) {
        tp += c.tp[l];
        t += c.truth[l];
        p += c.predicted[l];
    }
    // FP = p - tp, FN = t - tp.
    return safe_div(2.0 * tp, p + t);
}

double macro_f1(const LabelSets& truth, const LabelSets& predicted, std::size_t n_labels,
                const std::vector<std::size_t>& exclude) {
    const auto c = tally(truth, predicted, n_labels);
    const std::set<std::size_t> skip(exclude.begin(), exclude.end());
    double sum = 0.0;
    double present = 0.0;
    for (std::size_t l = 0; l < n_labels; ++l) {
        if (skip.count(l) > 0) continue;
        if (c.truth[l] == 0.0 && c.predicted[l] == 0.0) continue;
        const double precision = safe_div(c.tp[l], c.predicted[l]);
        const double recall = safe_div(c.tp[l], c.truth[l]);
        sum += safe_div(2.0 * precision * recall, precision + recall);
        present += 1.0;
    }
    return safe_div(sum, present);
}

F1Report f1_report(const LabelSets& truth, const LabelSets& predicted,
                   const std::vector<std::string>& label_names,
                   const std::vector<std::size_t>& exclude) {
    const auto c = tally(truth, predicted, label_names.size());
    const std::set<std::size_t> skip(exclude.begin(), exclude.end());
    F1Report out;
    out.n = truth.size();
    out.micro_f1 = micro_f1(truth, predicted);
    double sum = 0.0;
    for (std::size_t l = 0; l < label_names.size(); ++l) {
        if (skip.count(l) > 0) continue;
        if (c.truth[l] == 0.0 && c.predicted[l] == 0.0) continue;
        PerLabelF1 row;
        row.label = label_names[l];
        row.truth_count = static_cast<std::size_t>(c.truth[l]);
        row.predicted_count = static_cast<std::size_t>(c.predicted[l]);
        row.precision = safe_div(c.tp[l], c.predicted[l]);
        row.recall = safe_div(c.tp[l], c.truth[l]);
        row.f1 = safe_div(2.0 * row.precision * row.recall, row.precision + row.recall);
        sum += row.f1;
        out.per_label.push_back(std::move(row));
    }
    out.macro_f1 = safe_div(sum, static_cast<double>(out.per_label.size()));
    return out;
}

std::vector<std::size_t> holdout_split(const LabelAssignments& assignments, double fraction,
                                       Rng& rng) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw Error("holdout fraction must be in (0, 1)");
    std::vector<std::vector<std::size_t>> members(assignments.labels.size());
    for (std::size_t t = 0; t < assignments.of_thing.size(); ++t) {
        for (std::size_t l : assignments.of_thing[t]) members[l].push_back(t);
    }
    std::set<std::size_t> test;
    for (auto& category : members) {
        if (category.empty()) continue;
        const auto want = static_cast<std::size_t>(
            std::max<long long>(1, std::llround(fraction * static_cast<double>(category.size()))));
        const auto take = std::min(want, category.size());
        rng.shuffle(category);
        test.insert(category.begin(), category.begin() + static_cast<std::ptrdiff_t>(take));
    }
    if (test.empty()) throw Error("holdout split selected no things");
    return {test.begin(), test.end()};
}

namespace {

struct SharedBlocks {
    RelevanceMatrix combined;
    Eigen::MatrixXd eig;      // empty when unused
    Eigen::MatrixXd content;  // empty when unused
};

SharedBlocks build_shared(const ExperimentData& data, const ExperimentConfig& config) {
    SharedBlocks s;
    s.combined = combine(data.rm, data.ru, config.alpha, config.beta);
    const auto n = static_cast<Eigen::Index>(data.things.size());
    if (config.use_eig_features) {
        const auto rgt = build_rgt(s.combined, data.things, config.rgt_k);
        s.eig = modularity_features(rgt, config.k_eig);
    } else {
        s.eig.resize(n, 0);
    }
    if (config.use_content_features) {
        s.content = data.content.vectors;
    } else {
        s.content.resize(n, 0);
    }
    return s;
}

ExperimentRow run_rep(const ExperimentData& data, const ExperimentConfig& config,
                      const SharedBlocks& shared, double fraction, int rep, Rng& rng) {
    ExperimentRow row;
    row.fraction = fraction;
    row.rep = rep;
    row.alpha = config.alpha;
    row.beta = config.beta;

    const auto test_things = holdout_split(data.assignments, fraction, rng);
    const std::set<std::size_t> test_set(test_things.begin(), test_things.end());
    std::vector<std::size_t> train_things;
    for (std::size_t t = 0; t < data.assignments.of_thing.size(); ++t) {
        if (!data.assignments.of_thing[t].empty() && test_set.count(t) == 0)
            train_things.push_back(t);
    }

    // Labels whose entire support moved into the test split cannot be
    // learned; they stay out of the macro average for this run.
    std::vector<std::size_t> exclude;
    std::vector<double> train_support(data.assignments.labels.size(), 0.0);
    for (std::size_t t : train_things) {
        for (std::size_t l : data.assignments.of_thing[t]) train_support[l] += 1.0;
    }
    for (std::size_t l = 0; l < train_support.size(); ++l) {
        if (train_support[l] > 0.0) continue;
        bool used = false;
        for (const auto& ls : data.assignments.of_thing) {
            if (std::find(ls.begin(), ls.end(), l) != ls.end()) {
                used = true;
                break;
            }
        }
        if (used) {
            exclude.push_back(l);
            row.excluded_labels.push_back(data.assignments.labels.id(l));
        }
    }

    const auto n = static_cast<Eigen::Index>(data.things.size());
    Eigen::MatrixXd label_block(n, 0);
    if (config.use_label_features)
        label_block = bayes_features(shared.combined, data.assignments, train_things);
    Eigen::MatrixXd x(n, label_block.cols() + shared.eig.cols() + shared.content.cols());
    x << label_block, shared.eig, shared.content;

    const auto model = train(x, train_things, data.assignments, config.train);

    LabelSets truth, predicted;
    for (std::size_t t : test_things) {
        truth.push_back(data.assignments.of_thing[t]);
        const int k = config.k_policy == KPolicy::TruthCount
                          ? static_cast<int>(data.assignments.of_thing[t].size())
                          : config.fixed_k;
        const auto p = predict(model, data.things.id(t),
                               x.row(static_cast<Eigen::Index>(t)).transpose(), k);
        std::vector<std::size_t> ids;
        for (const auto& s : p.ranked) ids.push_back(data.assignments.labels.at(s.label));
        std::sort(ids.begin(), ids.end());
        predicted.push_back(std::move(ids));
    }

    std::vector<std::string> names;
    for (std::size_t l = 0; l < data.assignments.labels.size(); ++l)
        names.push_back(data.assignments.labels.id(l));
    row.report = f1_report(truth, predicted, names, exclude);
    return row;
}

void validate_experiment(const ExperimentData& data, const ExperimentConfig& config) {
    const auto n = static_cast<Eigen::Index>(data.things.size());
    if (n == 0) throw Error("experiment needs at least one thing");
    if (data.rm.r.rows() != n || data.rm.r.cols() != n || data.ru.r.rows() != n ||
        data.ru.r.cols() != n)
        throw Error("relevance matrices do not match the thing set");
    if (data.assignments.of_thing.size() != data.things.size())
        throw Error("label assignments do not match the thing set");
    if (data.content.vectors.cols() > 0 && data.content.vectors.rows() != n)
        throw Error("content features do not match the thing set");
    if (config.repetitions < 1) throw Error("repetitions must be at least 1");
    if (config.fractions.empty()) throw Error("no holdout fractions given");
    if (!config.use_label_features && !config.use_eig_features && !config.use_content_features)
        throw Error("all feature blocks disabled");
    if (config.k_policy == KPolicy::Fixed && config.fixed_k < 1)
        throw Error("fixed k must be at least 1");
    std::set<std::size_t> seen;
    for (const auto& ls : data.assignments.of_thing) seen.insert(ls.begin(), ls.end());
    if (seen.size() < 2) throw Error("experiment needs at least two labels");
}

void append_mean(std::vector<ExperimentRow>& rows, std::size_t first) {
    ExperimentRow mean = rows[first];
    mean.rep = -1;
    mean.excluded_labels.clear();
    mean.report = {};
    mean.report.n = 0;
    for (std::size_t i = first; i < rows.size(); ++i) {
        mean.report.micro_f1 += rows[i].report.micro_f1;
        mean.report.macro_f1 += rows[i].report.macro_f1;
        mean.report.n += rows[i].report.n;
    }
    const auto reps = static_cast<double>(rows.size() - first);
    mean.report.micro_f1 /= reps;
    mean.report.macro_f1 /= reps;
    rows.push_back(std::move(mean));
}

}  // namespace

ExperimentResult holdout_experiment(const ExperimentData& data, const ExperimentConfig& config) {
    validate_experiment(data, config);
    const auto shared = build_shared(data, config);

    ExperimentResult out;
    const Rng root(config.seed);
    for (std::size_t fi = 0; fi < config.fractions.size(); ++fi) {
        const double fraction = config.fractions[fi];
        const auto first = out.rows.size();
        for (int rep = 1; rep <= config.repetitions; ++rep) {
            // One stream per (fraction, repetition), independent of loop order.
            Rng rng = root.fork(fi * 1000003ULL + static_cast<std::uint64_t>(rep));
            out.rows.push_back(run_rep(data, config, shared, fraction, rep, rng));
        }
        for (std::size_t i = first; i < out.rows.size(); ++i) {
            for (const auto& label : out.rows[i].excluded_labels) {
                warn("holdout fraction " + format_double(out.rows[i].fraction) + " rep " +
                     std::to_string(out.rows[i].rep) + ": label '" + label +
                     "' lost every training positive; excluded from the macro average");
            }
        }
        append_mean(out.rows, first);
    }
    return out;
}

ExperimentResult alpha_beta_sweep(const ExperimentData& data, const ExperimentConfig& config,
                                  const std::vector<std::pair<double, double>>& grid) {
    if (grid.empty()) throw Error("empty alpha/beta grid");
    ExperimentResult out;
    for (const auto& [alpha, beta] : grid) {
        ExperimentConfig point = config;
        point.alpha = alpha;
        point.beta = beta;
        auto result = holdout_experiment(data, point);
        out.rows.insert(out.rows.end(), std::make_move_iterator(result.rows.begin()),
                        std::make_move_iterator(result.rows.end()));
    }
    return out;
}

void write_report_csv(const ExperimentResult& result, std::ostream& out,
                      const std::string& config_hash) {
    if (!config_hash.empty()) out << "# config," << config_hash << '\n';
    out << "fraction,rep,alpha,beta,micro_f1,macro_f1\n";
    for (const auto& row : result.rows) {
        out << format_double(row.fraction) << ',';
        if (row.is_mean()) {
            out << "mean";
        } else {
            out << row.rep;
        }
        out << ',' << format_double(row.alpha) << ',' << format_double(row.beta) << ','
            << format_double(row.report.micro_f1) << ',' << format_double(row.report.macro_f1)
            << '\n';
    }
}

}  // namespace discort
