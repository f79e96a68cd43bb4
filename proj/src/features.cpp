#include "discort/features.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "discort/common.hpp"

namespace discort {

namespace {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char raw : text) {
        const auto c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            if (current.size() >= 2) tokens.push_back(current);
            current.clear();
        }
    }
    if (current.size() >= 2) tokens.push_back(current);
    return tokens;
}

}  // namespace

std::size_t LabelAssignments::total_assignments() const {
    std::size_t total = 0;
    for (const auto& ls : of_thing) total += ls.size();
    return total;
}

LabelAssignments collect_labels(const std::vector<ThingMetadata>& metadata,
                                const IndexMap& things) {
    std::vector<std::string> names;
    for (const auto& m : metadata) {
        for (const auto& l : m.labels) names.push_back(l);
    }
    LabelAssignments out;
    out.labels = IndexMap(std::move(names));
    out.of_thing.assign(things.size(), {});
    for (const auto& m : metadata) {
        const auto thing = things.find(m.thing);
        if (!thing) continue;  // metadata may mention things absent from the log
        std::set<std::size_t> ids;
        for (const auto& l : m.labels) ids.insert(out.labels.at(l));
        out.of_thing[*thing] = {ids.begin(), ids.end()};
    }
    return out;
}

Eigen::VectorXd label_prior(const LabelAssignments& assignments,
                            const std::vector<std::size_t>& train_things) {
    const auto n_labels = static_cast<Eigen::Index>(assignments.labels.size());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(n_labels);
    double total = 0.0;
    for (std::size_t t : train_things) {
        for (std::size_t l : assignments.of_thing.at(t)) {
            counts(static_cast<Eigen::Index>(l)) += 1.0;
            total += 1.0;
        }
    }
    if (total == 0.0) throw Error("no labeled training things");
    return counts / total;
}

Eigen::VectorXd label_posterior(std::size_t o_star, const Eigen::VectorXd& relevance_row,
                                const LabelAssignments& assignments,
                                const std::vector<std::size_t>& train_things,
                                const Eigen::VectorXd& prior) {
    const auto n_labels = static_cast<Eigen::Index>(assignments.labels.size());
    if (prior.size() != n_labels) throw Error("prior size does not match the label vocabulary");

    Eigen::VectorXd sums = Eigen::VectorXd::Zero(n_labels);
    Eigen::VectorXd support = Eigen::VectorXd::Zero(n_labels);
    for (std::size_t t : train_things) {
        if (t == o_star) continue;  // leave-one-out for training things
        const double pi = relevance_row(static_cast<Eigen::Index>(t));
        for (std::size_t l : assignments.of_thing.at(t)) {
            sums(static_cast<Eigen::Index>(l)) += pi;
            support(static_cast<Eigen::Index>(l)) += 1.0;
        }
    }

    Eigen::VectorXd posterior = Eigen::VectorXd::Zero(n_labels);
    for (Eigen::Index l = 0; l < n_labels; ++l) {
        if (support(l) > 0.0) posterior(l) = sums(l) / support(l) * prior(l);
    }
    const double z = posterior.sum();
    if (z == 0.0) return prior;  // o_star reaches no training thing
    return posterior / z;
}

Eigen::MatrixXd bayes_features(const RelevanceMatrix& relevance,
                               const LabelAssignments& assignments,
                               const std::vector<std::size_t>& train_things) {
    const auto n_things = relevance.r.rows();
    if (static_cast<std::size_t>(n_things) != assignments.of_thing.size())
        throw Error("relevance matrix does not match the thing set");
    const auto prior = label_prior(assignments, train_things);
    Eigen::MatrixXd out(n_things, static_cast<Eigen::Index>(assignments.labels.size()));
    for (Eigen::Index i = 0; i < n_things; ++i) {
        out.row(i) = label_posterior(static_cast<std::size_t>(i), relevance.r.row(i).transpose(),
                                     assignments, train_things, prior)
                         .transpose();
    }
    return out;
}

Eigen::MatrixXd modularity_matrix(const RelationalGraphOfThings& rgt) {
    const auto n = static_cast<Eigen::Index>(rgt.things.size());
    if (n == 0) throw Error("modularity matrix needs a non-empty graph");
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : rgt.edges) {
        w(static_cast<Eigen::Index>(e.src), static_cast<Eigen::Index>(e.dst)) += e.weight;
    }
    const double two_m = w.sum();
    if (rgt.edges.empty()) return Eigen::MatrixXd::Zero(n, n);
    if (two_m == 0.0) throw Error("graph has zero total edge weight");

    const Eigen::VectorXd w_out = w.rowwise().sum();
    const Eigen::VectorXd w_in = w.colwise().sum();
    const Eigen::MatrixXd b = w - w_in * w_out.transpose() / two_m;
    return b + b.transpose();
}

Eigen::MatrixXd modularity_features(const RelationalGraphOfThings& rgt, int k_eig) {
    if (k_eig < 1) throw Error("k_eig must be at least 1");
    const Eigen::MatrixXd m = modularity_matrix(rgt);
    const auto n = m.rows();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.info() != Eigen::Success) throw Error("modularity eigensolve did not converge");
    const Eigen::VectorXd& values = solver.eigenvalues();  // ascending
    const Eigen::MatrixXd& vectors = solver.eigenvectors();

    // Strictly positive eigenvalues, largest first, up to numerical noise.
    const double scale = std::max(std::abs(values(0)), std::abs(values(n - 1)));
    const double floor = 1e-12 * scale;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, k_eig);
    int col = 0;
    for (Eigen::Index i = n - 1; i >= 0 && col < k_eig; --i) {
        if (values(i) <= floor) break;
        Eigen::VectorXd v = vectors.col(i);
        // Deterministic sign: the largest-magnitude entry is positive.
        Eigen::Index arg_max = 0;
        v.cwiseAbs().maxCoeff(&arg_max);
        if (v(arg_max) < 0.0) v = -v;
        out.col(col++) = v;
    }
    return out;
}

ContentFeatures tfidf_features(const std::vector<ThingMetadata>& metadata,
                               const IndexMap& things, bool normalize) {
    // Descriptions aligned to the thing index; absent or empty ones stay out
    // of the corpus.
    std::vector<std::vector<std::string>> docs(things.size());
    for (const auto& m : metadata) {
        const auto thing = things.find(m.thing);
        if (thing) docs[*thing] = tokenize(m.description);
    }

    double corpus_size = 0.0;
    std::map<std::string, double> df;
    for (const auto& doc : docs) {
        if (doc.empty()) continue;
        corpus_size += 1.0;
        std::set<std::string> distinct(doc.begin(), doc.end());
        for (const auto& token : distinct) df[token] += 1.0;
    }

    ContentFeatures out;
    for (const auto& [token, count] : df) out.vocabulary.push_back(token);
    out.vectors = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(things.size()),
                                        static_cast<Eigen::Index>(out.vocabulary.size()));
    if (corpus_size == 0.0) return out;

    std::map<std::string, Eigen::Index> column;
    for (std::size_t i = 0; i < out.vocabulary.size(); ++i)
        column[out.vocabulary[i]] = static_cast<Eigen::Index>(i);

    for (std::size_t t = 0; t < docs.size(); ++t) {
        if (docs[t].empty()) continue;
        std::map<std::string, double> tf;
        for (const auto& token : docs[t]) tf[token] += 1.0;
        for (const auto& [token, count] : tf) {
            const double idf = std::log(corpus_size / df.at(token));
            out.vectors(static_cast<Eigen::Index>(t), column.at(token)) = count * idf * idf;
        }
        if (normalize) {
            const double norm = out.vectors.row(static_cast<Eigen::Index>(t)).norm();
            if (norm > 0.0) out.vectors.row(static_cast<Eigen::Index>(t)) /= norm;
        }
    }
    return out;
}

FeatureMatrix assemble_features(const Eigen::MatrixXd& label_block,
                                const std::vector<std::string>& label_names,
                                const Eigen::MatrixXd& eig_block,
                                const Eigen::MatrixXd& content_block,
                                const std::vector<std::string>& vocabulary) {
    const auto n = label_block.rows();
    if (eig_block.rows() != n || content_block.rows() != n)
        throw Error("feature blocks cover different numbers of things");
    if (label_block.cols() != static_cast<Eigen::Index>(label_names.size()))
        throw Error("label block width does not match the label names");
    if (content_block.cols() != static_cast<Eigen::Index>(vocabulary.size()))
        throw Error("content block width does not match the vocabulary");

    FeatureMatrix out;
    out.n_labels = static_cast<std::size_t>(label_block.cols());
    out.n_eig = static_cast<std::size_t>(eig_block.cols());
    out.n_vocab = static_cast<std::size_t>(content_block.cols());
    out.x.resize(n, label_block.cols() + eig_block.cols() + content_block.cols());
    out.x << label_block, eig_block, content_block;
    out.column_names = label_names;
    for (std::size_t i = 1; i <= out.n_eig; ++i)
        out.column_names.push_back("eig_" + std::to_string(i));
    out.column_names.insert(out.column_names.end(), vocabulary.begin(), vocabulary.end());
    return out;
}

void write_features_csv(const FeatureMatrix& features, const IndexMap& things,
                        std::ostream& out) {
    if (static_cast<std::size_t>(features.x.rows()) != things.size())
        throw Error("feature matrix does not match the thing set");
    out << "# dims," << features.n_labels << ',' << features.n_eig << ',' << features.n_vocab
        << '\n';
    out << "thing";
    for (const auto& name : features.column_names) out << ',' << csv_escape(name);
    out << '\n';
    for (Eigen::Index i = 0; i < features.x.rows(); ++i) {
        out << csv_escape(things.id(static_cast<std::size_t>(i)));
        for (Eigen::Index j = 0; j < features.x.cols(); ++j)
            out << ',' << format_double(features.x(i, j));
        out << '\n';
    }
}

FeatureMatrix read_features_csv(std::istream& in, const std::string& source_name,
                                IndexMap* things_out) {
    std::string line;
    std::size_t line_no = 0;
    FeatureMatrix out;
    bool have_dims = false;

    // Leading comment lines; one of them carries the block dimensions.
    while (read_line(in, line)) {
        ++line_no;
        if (line.rfind("# dims,", 0) == 0) {
            const auto parts = split(line.substr(7), ',');
            if (parts.size() != 3) fail_at(source_name, line_no, "malformed dims comment");
            out.n_labels = static_cast<std::size_t>(parse_int64(parts[0]));
            out.n_eig = static_cast<std::size_t>(parse_int64(parts[1]));
            out.n_vocab = static_cast<std::size_t>(parse_int64(parts[2]));
            have_dims = true;
            continue;
        }
        if (!line.empty() && line[0] == '#') continue;
        break;
    }
    if (!have_dims) throw Error(source_name + ": missing '# dims' comment");

    const auto header = split_csv_row(line, source_name, line_no);
    const std::size_t width = out.n_labels + out.n_eig + out.n_vocab;
    if (header.size() != width + 1 || header[0] != "thing")
        fail_at(source_name, line_no, "feature header does not match the dims comment");
    out.column_names.assign(header.begin() + 1, header.end());

    std::vector<std::string> ids;
    std::vector<std::vector<double>> rows;
    while (read_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv_row(line, source_name, line_no);
        if (fields.size() != width + 1)
            fail_at(source_name, line_no, "expected " + std::to_string(width + 1) + " fields");
        ids.push_back(fields[0]);
        std::vector<double> row(width);
        for (std::size_t j = 0; j < width; ++j) {
            try {
                row[j] = parse_double(fields[j + 1]);
            } catch (const Error& err) {
                fail_at(source_name, line_no, err.what());
            }
        }
        rows.push_back(std::move(row));
    }

    IndexMap things(ids);
    if (things.size() != ids.size()) throw Error(source_name + ": duplicate thing rows");
    out.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto row_index = static_cast<Eigen::Index>(things.at(ids[i]));
        for (std::size_t j = 0; j < width; ++j)
            out.x(row_index, static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    if (things_out) *things_out = std::move(things);
    return out;
}

}  // namespace discort
