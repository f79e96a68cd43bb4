#include "discort/evaluation.hpp"

#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "discort/common.hpp"

using namespace discort;

namespace {

bool has(const std::vector<std::size_t>& set, std::size_t l) {
    return std::find(set.begin(), set.end(), l) != set.end();
}

// Confusion counting over every (thing, label) cell, written independently of
// the set-intersection path in the library.
double oracle_micro(const LabelSets& truth, const LabelSets& pred, std::size_t n_labels) {
    double tp = 0.0, fp = 0.0, fn = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        for (std::size_t l = 0; l < n_labels; ++l) {
            const bool t = has(truth[i], l);
            const bool p = has(pred[i], l);
            if (t && p) tp += 1.0;
            if (!t && p) fp += 1.0;
            if (t && !p) fn += 1.0;
        }
    }
    const double den = 2.0 * tp + fp + fn;
    return den == 0.0 ? 0.0 : 2.0 * tp / den;
}

double oracle_macro(const LabelSets& truth, const LabelSets& pred, std::size_t n_labels) {
    double sum = 0.0, present = 0.0;
    for (std::size_t l = 0; l < n_labels; ++l) {
        double tp = 0.0, fp = 0.0, fn = 0.0, seen = 0.0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            const bool t = has(truth[i], l);
            const bool p = has(pred[i], l);
            seen += (t || p) ? 1.0 : 0.0;
            if (t && p) tp += 1.0;
            if (!t && p) fp += 1.0;
            if (t && !p) fn += 1.0;
        }
        if (seen == 0.0) continue;
        const double precision = tp + fp == 0.0 ? 0.0 : tp / (tp + fp);
        const double recall = tp + fn == 0.0 ? 0.0 : tp / (tp + fn);
        sum += precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
        present += 1.0;
    }
    return present == 0.0 ? 0.0 : sum / present;
}

LabelSets random_sets(Rng& rng, std::size_t n_things, std::size_t n_labels, double p) {
    LabelSets out(n_things);
    for (auto& set : out) {
        for (std::size_t l = 0; l < n_labels; ++l) {
            if (rng.bernoulli(p)) set.push_back(l);
        }
    }
    return out;
}

// Six things in two planted groups with block-structured relevance and
// indicator content features; trivially separable.
ExperimentData toy_data() {
    ExperimentData d;
    d.things = IndexMap({"a", "b", "c", "d", "e", "f"});
    Eigen::MatrixXd r = Eigen::MatrixXd::Constant(6, 6, 0.01);
    for (Eigen::Index i = 0; i < 6; ++i) {
        for (Eigen::Index j = 0; j < 6; ++j) {
            if (i / 3 == j / 3) r(i, j) = i == j ? 0.9 : 0.3;
        }
    }
    d.rm.r = r;
    d.rm.source = RelevanceSource::SpatioTemporal;
    d.ru.r = r;
    d.ru.source = RelevanceSource::Social;
    d.assignments.labels = IndexMap({"A", "B"});
    d.assignments.of_thing = {{0}, {0}, {0}, {1}, {1}, {1}};
    d.content.vocabulary = {"groupa", "groupb"};
    d.content.vectors = Eigen::MatrixXd::Zero(6, 2);
    for (Eigen::Index i = 0; i < 6; ++i) d.content.vectors(i, i / 3) = 1.0;
    return d;
}

ExperimentConfig toy_config() {
    ExperimentConfig c;
    c.fractions = {1.0 / 3.0};
    c.repetitions = 2;
    c.seed = 7;
    c.rgt_k = 2;
    c.k_eig = 2;
    return c;
}

}  // namespace

TEST_CASE("micro_f1 matches the pooled-count oracle on the two-thing example") {
    // truth {a:{x,y}, b:{x}}, predicted {a:{x}, b:{x,y}}: TP=2, FP=1, FN=1.
    const LabelSets truth = {{0, 1}, {0}};
    const LabelSets pred = {{0}, {0, 1}};
    CHECK(micro_f1(truth, pred) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("micro and macro F1 hit the trivial endpoints") {
    const LabelSets truth = {{0}, {1}, {0, 1}};
    CHECK(micro_f1(truth, truth) == 1.0);
    CHECK(macro_f1(truth, truth, 2) == 1.0);

    const LabelSets nothing = {{}, {}, {}};
    CHECK(micro_f1(truth, nothing) == 0.0);
    CHECK(macro_f1(truth, nothing, 2) == 0.0);
}

TEST_CASE("macro_f1 averages a perfect and a never-predicted label to one half") {
    const LabelSets truth = {{0}, {1}};
    const LabelSets pred = {{0}, {}};
    CHECK(macro_f1(truth, pred, 2) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("micro and macro F1 match brute-force confusion counting") {
    Rng rng(88001);
    for (int round = 0; round < 50; ++round) {
        const std::size_t n = 1 + rng.uniform_index(8);
        const std::size_t labels = 1 + rng.uniform_index(4);
        const auto truth = random_sets(rng, n, labels, 0.45);
        const auto pred = random_sets(rng, n, labels, 0.45);
        CHECK(micro_f1(truth, pred) ==
              doctest::Approx(oracle_micro(truth, pred, labels)).epsilon(1e-14));
        CHECK(macro_f1(truth, pred, labels) ==
              doctest::Approx(oracle_macro(truth, pred, labels)).epsilon(1e-14));
    }
}

TEST_CASE("F1 equals one exactly when predictions equal truth") {
    Rng rng(88002);
    for (int round = 0; round < 30; ++round) {
        auto truth = random_sets(rng, 4 + rng.uniform_index(4), 3, 0.5);
        CHECK(micro_f1(truth, truth) == 1.0);
        CHECK(macro_f1(truth, truth, 3) == 1.0);

        // Flip one membership; both scores must drop below 1.
        auto pred = truth;
        const std::size_t i = rng.uniform_index(pred.size());
        if (has(pred[i], 0)) {
            pred[i].erase(std::find(pred[i].begin(), pred[i].end(), std::size_t{0}));
        } else {
            pred[i].push_back(0);
            std::sort(pred[i].begin(), pred[i].end());
        }
        bool any_truth = false;
        for (const auto& s : truth) any_truth = any_truth || !s.empty();
        if (!any_truth) continue;  // all-empty truth scores 0 either way
        CHECK(micro_f1(truth, pred) < 1.0);
        CHECK(macro_f1(truth, pred, 3) < 1.0);
    }
}

TEST_CASE("F1 is invariant under label relabeling and truth-prediction swap") {
    Rng rng(88003);
    const std::size_t labels = 4;
    const auto truth = random_sets(rng, 10, labels, 0.4);
    const auto pred = random_sets(rng, 10, labels, 0.4);

    const std::vector<std::size_t> perm = {2, 0, 3, 1};
    const auto relabel = [&](const LabelSets& sets) {
        LabelSets out;
        for (const auto& s : sets) {
            std::vector<std::size_t> mapped;
            for (std::size_t l : s) mapped.push_back(perm[l]);
            std::sort(mapped.begin(), mapped.end());
            out.push_back(std::move(mapped));
        }
        return out;
    };
    CHECK(micro_f1(relabel(truth), relabel(pred)) ==
          doctest::Approx(micro_f1(truth, pred)).epsilon(1e-15));
    CHECK(macro_f1(relabel(truth), relabel(pred), labels) ==
          doctest::Approx(macro_f1(truth, pred, labels)).epsilon(1e-15));

    CHECK(micro_f1(pred, truth) == doctest::Approx(micro_f1(truth, pred)).epsilon(1e-15));
    CHECK(macro_f1(pred, truth, labels) ==
          doctest::Approx(macro_f1(truth, pred, labels)).epsilon(1e-15));
}

TEST_CASE("F1 rejects mismatched or empty inputs") {
    CHECK_THROWS_WITH_AS((void)micro_f1({}, {}), "empty test set", Error);
    CHECK_THROWS_AS((void)micro_f1({{0}}, {{0}, {0}}), Error);
    CHECK_THROWS_AS((void)macro_f1({{7}}, {{0}}, 2), Error);  // id out of range
}

TEST_CASE("f1_report lists present labels and averages their f1") {
    const LabelSets truth = {{0, 1}, {0}, {2}};
    const LabelSets pred = {{0}, {0, 1}, {}};
    const auto report = f1_report(truth, pred, {"A", "B", "C", "unused"});
    CHECK(report.n == 3);
    CHECK(report.micro_f1 == doctest::Approx(micro_f1(truth, pred)).epsilon(1e-15));
    REQUIRE(report.per_label.size() == 3);  // "unused" never appears
    CHECK(report.per_label[0].label == "A");
    CHECK(report.per_label[0].precision == 1.0);  // A is a true positive on both things
    CHECK(report.per_label[0].recall == 1.0);
    CHECK(report.per_label[0].truth_count == 2);
    CHECK(report.per_label[0].predicted_count == 2);
    CHECK(report.per_label[1].label == "B");
    CHECK(report.per_label[2].label == "C");
    CHECK(report.per_label[2].f1 == 0.0);
    double mean = 0.0;
    for (const auto& row : report.per_label) mean += row.f1;
    mean /= static_cast<double>(report.per_label.size());
    CHECK(report.macro_f1 == doctest::Approx(mean).epsilon(1e-15));

    SUBCASE("excluded labels disappear from the average") {
        const auto trimmed = f1_report(truth, pred, {"A", "B", "C", "unused"}, {2});
        REQUIRE(trimmed.per_label.size() == 2);
        CHECK(trimmed.per_label[0].label == "A");
        CHECK(trimmed.per_label[1].label == "B");
        CHECK(trimmed.macro_f1 > report.macro_f1);
        CHECK(trimmed.macro_f1 ==
              doctest::Approx(macro_f1(truth, pred, 4, {2})).epsilon(1e-15));
    }
}

TEST_CASE("holdout_split draws at least one thing per category") {
    LabelAssignments a;
    a.labels = IndexMap({"A", "B"});
    a.of_thing.assign(15, {});
    for (std::size_t t = 0; t < 10; ++t) a.of_thing[t] = {0};
    for (std::size_t t = 10; t < 15; ++t) a.of_thing[t] = {1};

    SUBCASE("counts follow round(fraction * category size)") {
        Rng rng(1);
        const auto test = holdout_split(a, 0.2, rng);
        std::size_t from_a = 0, from_b = 0;
        for (std::size_t t : test) (t < 10 ? from_a : from_b) += 1;
        CHECK(from_a == 2);
        CHECK(from_b == 1);
    }
    SUBCASE("tiny fractions still hold out one per category") {
        Rng rng(2);
        const auto test = holdout_split(a, 0.01, rng);
        std::size_t from_a = 0, from_b = 0;
        for (std::size_t t : test) (t < 10 ? from_a : from_b) += 1;
        CHECK(from_a == 1);
        CHECK(from_b == 1);
    }
    SUBCASE("same stream gives the same split") {
        Rng r1(3), r2(3);
        CHECK(holdout_split(a, 0.3, r1) == holdout_split(a, 0.3, r2));
    }
    SUBCASE("fraction bounds") {
        Rng rng(4);
        CHECK_THROWS_AS((void)holdout_split(a, 0.0, rng), Error);
        CHECK_THROWS_AS((void)holdout_split(a, 1.0, rng), Error);
        CHECK_THROWS_AS((void)holdout_split(a, -0.5, rng), Error);
    }
    SUBCASE("results are sorted and unique") {
        Rng rng(5);
        const auto test = holdout_split(a, 0.5, rng);
        CHECK(std::is_sorted(test.begin(), test.end()));
        CHECK(std::adjacent_find(test.begin(), test.end()) == test.end());
    }
}

TEST_CASE("holdout_experiment is perfect and deterministic on the planted toy") {
    const auto data = toy_data();
    const auto config = toy_config();
    const auto result = holdout_experiment(data, config);

    REQUIRE(result.rows.size() == 3);  // 2 reps + mean
    CHECK(result.rows[0].rep == 1);
    CHECK(result.rows[1].rep == 2);
    CHECK(result.rows[2].is_mean());
    for (const auto& row : result.rows) {
        CHECK(row.fraction == doctest::Approx(1.0 / 3.0));
        CHECK(row.alpha == 0.5);
        CHECK(row.beta == 0.5);
        CHECK(row.report.micro_f1 == 1.0);
        CHECK(row.report.macro_f1 == 1.0);
        CHECK(row.excluded_labels.empty());
    }
    CHECK(result.rows[0].report.n == 2);  // one thing per category

    SUBCASE("bit-identical reports across runs") {
        std::stringstream a, b;
        write_report_csv(holdout_experiment(data, config), a, "cafe");
        write_report_csv(holdout_experiment(data, config), b, "cafe");
        CHECK(a.str() == b.str());
        CHECK(a.str().rfind("# config,cafe\n", 0) == 0);
    }
    SUBCASE("feature blocks can be disabled individually") {
        ExperimentConfig bare = config;
        bare.use_label_features = false;
        bare.use_eig_features = false;
        const auto content_only = holdout_experiment(data, bare);
        CHECK(content_only.rows[2].report.micro_f1 == 1.0);  // indicators suffice
        bare.use_content_features = false;
        CHECK_THROWS_AS((void)holdout_experiment(data, bare), Error);
    }
}

TEST_CASE("holdout_experiment excludes labels that lose all training positives") {
    ExperimentData d;
    d.things = IndexMap({"a", "b", "c", "d", "e", "f", "g"});
    Eigen::MatrixXd r = Eigen::MatrixXd::Constant(7, 7, 0.05);
    for (Eigen::Index i = 0; i < 7; ++i) r(i, i) = 0.9;
    d.rm.r = r;
    d.ru.r = r;
    d.assignments.labels = IndexMap({"A", "B", "C"});
    // B has a single support thing; every split sends it to the test set.
    d.assignments.of_thing = {{0}, {0}, {0}, {1}, {2}, {2}, {2}};
    d.content.vectors = Eigen::MatrixXd::Identity(7, 7);
    for (int i = 0; i < 7; ++i) d.content.vocabulary.push_back("w" + std::to_string(i));

    ExperimentConfig config = toy_config();
    config.fractions = {0.3};
    const auto result = holdout_experiment(d, config);
    REQUIRE(result.rows.size() == 3);
    for (const auto& row : result.rows) {
        if (row.is_mean()) continue;
        CHECK(row.excluded_labels == std::vector<std::string>{"B"});
        for (const auto& pl : row.report.per_label) CHECK(pl.label != "B");
    }
}

TEST_CASE("holdout_experiment validates its inputs") {
    const auto data = toy_data();
    auto config = toy_config();
    SUBCASE("bad repetition count") {
        config.repetitions = 0;
        CHECK_THROWS_AS((void)holdout_experiment(data, config), Error);
    }
    SUBCASE("no fractions") {
        config.fractions.clear();
        CHECK_THROWS_AS((void)holdout_experiment(data, config), Error);
    }
    SUBCASE("mismatched relevance") {
        auto bad = data;
        bad.rm.r = Eigen::MatrixXd::Zero(3, 3);
        CHECK_THROWS_AS((void)holdout_experiment(bad, config), Error);
    }
    SUBCASE("single-label data") {
        auto bad = data;
        bad.assignments.of_thing = {{0}, {0}, {0}, {0}, {0}, {0}};
        CHECK_THROWS_AS((void)holdout_experiment(bad, config), Error);
    }
}

TEST_CASE("alpha_beta_sweep runs the grid with shared splits") {
    const auto data = toy_data();
    auto config = toy_config();
    std::vector<std::pair<double, double>> grid;
    for (int i = 1; i <= 9; ++i) grid.push_back({i / 10.0, (10 - i) / 10.0});

    const auto result = alpha_beta_sweep(data, config, grid);
    REQUIRE(result.rows.size() == 9 * 3);  // (2 reps + mean) per point
    for (std::size_t p = 0; p < 9; ++p) {
        for (std::size_t i = 0; i < 3; ++i) {
            const auto& row = result.rows[p * 3 + i];
            CHECK(row.alpha == doctest::Approx(grid[p].first));
            CHECK(row.beta == doctest::Approx(grid[p].second));
            CHECK(row.report.micro_f1 == 1.0);
        }
        // Same seed per point: every point tests the same number of things.
        CHECK(result.rows[p * 3].report.n == result.rows[0].report.n);
    }
    CHECK_THROWS_AS((void)alpha_beta_sweep(data, config, {}), Error);
}

TEST_CASE("report CSV carries rep rows and mean rows") {
    const auto result = holdout_experiment(toy_data(), toy_config());
    std::stringstream out;
    write_report_csv(result, out);
    std::string line;
    std::getline(out, line);
    CHECK(line == "fraction,rep,alpha,beta,micro_f1,macro_f1");
    std::vector<std::string> rows;
    while (std::getline(out, line)) rows.push_back(line);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].rfind("0.3333333333333333,1,0.5,0.5,", 0) == 0);
    CHECK(rows[1].rfind("0.3333333333333333,2,0.5,0.5,", 0) == 0);
    CHECK(rows[2].rfind("0.3333333333333333,mean,0.5,0.5,", 0) == 0);
}
