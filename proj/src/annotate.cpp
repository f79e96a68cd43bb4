#include "discort/annotate.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include "discort/common.hpp"

namespace discort {

namespace {

double sigmoid(double z) { return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : 1.0 - 1.0 / (1.0 + std::exp(z)); }

// log(1 + exp(z)) without overflow for large |z|.
double log1p_exp(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

std::size_t AnnotationModel::dim() const {
    for (const auto& m : models) {
        if (!m.always_zero) return static_cast<std::size_t>(m.w.size());
    }
    return models.empty() ? 0 : static_cast<std::size_t>(models.front().w.size());
}

double logistic_loss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                     double bias, double lambda) {
    if (x.rows() != y.size()) throw Error("target vector does not match the sample count");
    if (x.cols() != w.size()) throw Error("weight vector does not match the feature dimension");
    const Eigen::VectorXd z = x * w + Eigen::VectorXd::Constant(x.rows(), bias);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) loss += log1p_exp(z(i)) - y(i) * z(i);
    return loss / static_cast<double>(x.rows()) + 0.5 * lambda * w.squaredNorm();
}

void logistic_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& w, double bias, double lambda,
                       Eigen::VectorXd& grad_w, double& grad_bias) {
    if (x.rows() != y.size()) throw Error("target vector does not match the sample count");
    if (x.cols() != w.size()) throw Error("weight vector does not match the feature dimension");
    const Eigen::VectorXd z = x * w + Eigen::VectorXd::Constant(x.rows(), bias);
    Eigen::VectorXd residual(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) residual(i) = sigmoid(z(i)) - y(i);
    const double n = static_cast<double>(x.rows());
    grad_w = x.transpose() * residual / n + lambda * w;
    grad_bias = residual.sum() / n;
}

LabelModel train_binary(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const TrainConfig& config) {
    if (config.iterations < 1) throw Error("iterations must be at least 1");
    if (config.step <= 0.0) throw Error("step must be positive");
    if (config.lambda < 0.0) throw Error("lambda must be non-negative");
    LabelModel model;
    model.w = Eigen::VectorXd::Zero(x.cols());
    Eigen::VectorXd grad_w;
    double grad_bias = 0.0;
    for (int it = 0; it < config.iterations; ++it) {
        logistic_gradient(x, y, model.w, model.bias, config.lambda, grad_w, grad_bias);
        model.w -= config.step * grad_w;
        model.bias -= config.step * grad_bias;
    }
    return model;
}

AnnotationModel train(const Eigen::MatrixXd& x, const std::vector<std::size_t>& train_things,
                      const LabelAssignments& assignments, const TrainConfig& config) {
    if (train_things.empty()) throw Error("no training things");
    const auto n_labels = assignments.labels.size();

    std::set<std::size_t> seen;
    for (std::size_t t : train_things) {
        if (t >= assignments.of_thing.size() ||
            static_cast<Eigen::Index>(t) >= x.rows())
            throw Error("training thing index out of range");
        if (assignments.of_thing[t].empty())
            throw Error("training thing '" + std::to_string(t) + "' has no labels");
        seen.insert(assignments.of_thing[t].begin(), assignments.of_thing[t].end());
    }
    if (seen.size() < 2) throw Error("training set covers fewer than two labels");

    Eigen::MatrixXd x_train(static_cast<Eigen::Index>(train_things.size()), x.cols());
    for (std::size_t i = 0; i < train_things.size(); ++i)
        x_train.row(static_cast<Eigen::Index>(i)) =
            x.row(static_cast<Eigen::Index>(train_things[i]));

    AnnotationModel out;
    out.config = config;
    out.labels.reserve(n_labels);
    out.models.assign(n_labels, {});
    for (std::size_t l = 0; l < n_labels; ++l) out.labels.push_back(assignments.labels.id(l));

    // Binary targets per label over the training rows.
    std::vector<Eigen::VectorXd> targets(n_labels,
                                         Eigen::VectorXd::Zero(static_cast<Eigen::Index>(
                                             train_things.size())));
    for (std::size_t i = 0; i < train_things.size(); ++i) {
        for (std::size_t l : assignments.of_thing[train_things[i]])
            targets[l](static_cast<Eigen::Index>(i)) = 1.0;
    }

    std::vector<std::string> failures(n_labels);
    parallel_for(n_labels, config.jobs, [&](std::size_t l) {
        try {
            if (targets[l].sum() == 0.0) {
                out.models[l].w = Eigen::VectorXd::Zero(x.cols());
                out.models[l].always_zero = true;
            } else {
                out.models[l] = train_binary(x_train, targets[l], config);
            }
        } catch (const std::exception& ex) {
            failures[l] = ex.what();
        }
    });
    for (const auto& message : failures) {
        if (!message.empty()) throw Error(message);
    }
    for (std::size_t l = 0; l < n_labels; ++l) {
        if (out.models[l].always_zero)
            warn("label '" + out.labels[l] + "' has no positive training thing; it always scores 0");
    }
    return out;
}

Prediction predict(const AnnotationModel& model, const std::string& thing,
                   const Eigen::VectorXd& features, int k) {
    if (k < 1) throw Error("k must be at least 1");
    if (model.models.empty()) throw Error("model has no labels");
    for (const auto& m : model.models) {
        if (m.w.size() != features.size())
            throw Error("feature dimension " + std::to_string(features.size()) +
                        " does not match the model (" + std::to_string(m.w.size()) + ")");
    }

    std::vector<std::size_t> order(model.models.size());
    std::vector<double> scores(model.models.size());
    for (std::size_t l = 0; l < model.models.size(); ++l) {
        order[l] = l;
        const auto& m = model.models[l];
        scores[l] = m.always_zero ? 0.0 : sigmoid(m.w.dot(features) + m.bias);
    }
    // Stable sort keeps label order on ties.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    Prediction out;
    out.thing = thing;
    out.k_used = std::min<int>(k, static_cast<int>(model.models.size()));
    out.ranked.reserve(static_cast<std::size_t>(out.k_used));
    for (int i = 0; i < out.k_used; ++i)
        out.ranked.push_back({model.labels[order[static_cast<std::size_t>(i)]],
                              scores[order[static_cast<std::size_t>(i)]]});
    return out;
}

void write_annotation_model(const AnnotationModel& model, std::ostream& out,
                            const std::string& config_hash) {
    out << "discort-model v1\n";
    if (!config_hash.empty()) out << "# config," << config_hash << '\n';
    out << "dim," << model.dim() << '\n';
    out << "lambda," << format_double(model.config.lambda) << '\n';
    out << "iterations," << model.config.iterations << '\n';
    out << "step," << format_double(model.config.step) << '\n';
    out << "labels," << model.labels.size() << '\n';
    for (std::size_t l = 0; l < model.labels.size(); ++l) {
        const auto& m = model.models[l];
        out << "label," << csv_escape(model.labels[l]);
        if (m.always_zero) {
            out << ",zero\n";
            continue;
        }
        out << ",fit," << format_double(m.bias);
        for (Eigen::Index j = 0; j < m.w.size(); ++j) out << ',' << format_double(m.w(j));
        out << '\n';
    }
}

AnnotationModel read_annotation_model(std::istream& in, const std::string& source_name) {
    std::string line;
    std::size_t line_no = 0;
    if (!read_line(in, line) || line != "discort-model v1")
        throw Error(source_name + ": not a discort-model v1 file");
    ++line_no;

    AnnotationModel out;
    std::size_t dim = 0;
    std::size_t n_labels = 0;
    bool have_labels = false;
    while (read_line(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_csv_row(line, source_name, line_no);
        const auto& key = fields[0];
        if (key == "dim") {
            if (fields.size() != 2) fail_at(source_name, line_no, "malformed dim line");
            dim = static_cast<std::size_t>(parse_int64(fields[1]));
        } else if (key == "lambda" || key == "step") {
            if (fields.size() != 2) fail_at(source_name, line_no, "malformed " + key + " line");
            (key == "lambda" ? out.config.lambda : out.config.step) = parse_double(fields[1]);
        } else if (key == "iterations") {
            if (fields.size() != 2) fail_at(source_name, line_no, "malformed iterations line");
            out.config.iterations = static_cast<int>(parse_int64(fields[1]));
        } else if (key == "labels") {
            if (fields.size() != 2) fail_at(source_name, line_no, "malformed labels line");
            n_labels = static_cast<std::size_t>(parse_int64(fields[1]));
            have_labels = true;
        } else if (key == "label") {
            if (fields.size() < 3) fail_at(source_name, line_no, "malformed label line");
            LabelModel m;
            if (fields[2] == "zero") {
                if (fields.size() != 3) fail_at(source_name, line_no, "malformed zero label");
                m.w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
                m.always_zero = true;
            } else if (fields[2] == "fit") {
                if (fields.size() != 4 + dim)
                    fail_at(source_name, line_no,
                            "expected " + std::to_string(dim) + " weights");
                try {
                    m.bias = parse_double(fields[3]);
                    m.w.resize(static_cast<Eigen::Index>(dim));
                    for (std::size_t j = 0; j < dim; ++j)
                        m.w(static_cast<Eigen::Index>(j)) = parse_double(fields[4 + j]);
                } catch (const Error& err) {
                    fail_at(source_name, line_no, err.what());
                }
            } else {
                fail_at(source_name, line_no, "unknown label kind '" + fields[2] + "'");
            }
            out.labels.push_back(fields[1]);
            out.models.push_back(std::move(m));
        } else {
            fail_at(source_name, line_no, "unknown key '" + key + "'");
        }
    }
    if (!have_labels || out.labels.size() != n_labels)
        throw Error(source_name + ": label count does not match the header");
    return out;
}

}  // namespace discort
