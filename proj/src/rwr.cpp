#include "discort/rwr.hpp"

#include <algorithm>
#include <cmath>

#include "discort/common.hpp"

namespace discort {

TransitionMatrix transition_matrix(const Eigen::SparseMatrix<double>& w,
                                   DanglingPolicy dangling) {
    const Eigen::Index n = w.rows();
    if (n == 0 || w.cols() != n) throw Error("transition matrix needs a square weight matrix");

    Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < w.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(w, k); it; ++it) {
            if (it.value() < 0.0) throw Error("weight matrix has a negative entry");
            row_sums(it.row()) += it.value();
        }
    }
    if (row_sums.sum() == 0.0) throw Error("weight matrix is all zero");

    TransitionMatrix out;
    out.dangling = dangling;
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(w.nonZeros()) + static_cast<std::size_t>(n));
    // Column j of P is row j of W scaled to sum 1.
    for (int k = 0; k < w.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(w, k); it; ++it) {
            if (it.value() == 0.0) continue;
            triplets.emplace_back(static_cast<int>(it.col()), static_cast<int>(it.row()),
                                  it.value() / row_sums(it.row()));
        }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        if (row_sums(j) > 0.0) continue;
        out.dangling_nodes.push_back(static_cast<std::size_t>(j));
        if (dangling == DanglingPolicy::SelfLoop) {
            triplets.emplace_back(static_cast<int>(j), static_cast<int>(j), 1.0);
        } else {
            const double share = 1.0 / static_cast<double>(n);
            for (Eigen::Index i = 0; i < n; ++i)
                triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), share);
        }
    }
    out.p.resize(n, n);
    out.p.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

Eigen::VectorXd rwr_steady_state(const TransitionMatrix& p, std::size_t seed,
                                 const RwrParams& params) {
    const Eigen::Index n = p.p.rows();
    if (static_cast<Eigen::Index>(seed) >= n) throw Error("rwr seed out of range");
    if (!(params.c > 0.0 && params.c <= 1.0)) throw Error("restart probability must be in (0,1]");
    if (!(params.tol > 0.0)) throw Error("convergence tolerance must be positive");
    if (params.max_iter < 1) throw Error("max_iter must be at least 1");

    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e(static_cast<Eigen::Index>(seed)) = 1.0;
    Eigen::VectorXd pi = e;
    double residual = 0.0;
    for (int iter = 0; iter < params.max_iter; ++iter) {
        Eigen::VectorXd next = (1.0 - params.c) * (p.p * pi) + params.c * e;
        residual = (next - pi).cwiseAbs().sum();
        pi = std::move(next);
        if (residual < params.tol) return pi;
    }
    throw Error("random walk with restart did not converge in " +
                std::to_string(params.max_iter) + " iterations (last L1 residual " +
                format_double(residual) + ")");
}

RelevanceMatrix relevance_from_weights(const Eigen::SparseMatrix<double>& w,
                                       std::size_t thing_offset, std::size_t n_things,
                                       RelevanceSource source, const RwrParams& params,
                                       DanglingPolicy dangling, int jobs) {
    if (n_things == 0) throw Error("graph has no thing nodes");
    const auto p = transition_matrix(w, dangling);
    RelevanceMatrix out;
    out.restart_c = params.c;
    out.source = source;
    out.r.resize(static_cast<Eigen::Index>(n_things), static_cast<Eigen::Index>(n_things));

    // Per-seed runs are independent; each writes only its own row.
    std::vector<std::string> failures(n_things);
    parallel_for(n_things, jobs, [&](std::size_t i) {
        try {
            const auto pi = rwr_steady_state(p, thing_offset + i, params);
            for (std::size_t j = 0; j < n_things; ++j) {
                out.r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    pi(static_cast<Eigen::Index>(thing_offset + j));
            }
        } catch (const std::exception& ex) {
            failures[i] = ex.what();
        }
    });
    for (const auto& message : failures) {
        if (!message.empty()) throw Error(message);
    }
    return out;
}

RelevanceMatrix relevance_matrix(const SpatioTemporalGraph& g, const RwrParams& params,
                                 DanglingPolicy dangling, int jobs) {
    return relevance_from_weights(g.weights, g.thing_node(0), g.n_things,
                                  RelevanceSource::SpatioTemporal, params, dangling, jobs);
}

RelevanceMatrix relevance_matrix(const SocialGraph& g, const RwrParams& params,
                                 DanglingPolicy dangling, int jobs) {
    return relevance_from_weights(g.weights, g.thing_node(0), g.n_things,
                                  RelevanceSource::Social, params, dangling, jobs);
}

RelevanceMatrix combine(const RelevanceMatrix& spatio_temporal, const RelevanceMatrix& social,
                        double alpha, double beta) {
    if (spatio_temporal.r.rows() != social.r.rows() ||
        spatio_temporal.r.cols() != social.r.cols())
        throw Error("relevance matrices have different shapes");
    if (!(alpha >= 0.0 && alpha <= 1.0) || !(beta >= 0.0 && beta <= 1.0))
        throw Error("combination weights must lie in [0,1]");
    RelevanceMatrix out;
    out.r = alpha * spatio_temporal.r + beta * social.r;
    out.restart_c = spatio_temporal.restart_c;
    out.source = RelevanceSource::Combined;
    return out;
}

RelationalGraphOfThings build_rgt(const RelevanceMatrix& relevance, const IndexMap& things,
                                  int k) {
    const auto n = static_cast<std::size_t>(relevance.r.rows());
    if (n != things.size()) throw Error("relevance matrix does not match the thing set");
    if (k < 1) throw Error("rgt neighbor budget k must be at least 1");
    if (static_cast<std::size_t>(k) >= n) {
        warn("k = " + std::to_string(k) + " >= number of things (" + std::to_string(n) +
             "); using " + std::to_string(n - 1));
        k = static_cast<int>(n) - 1;
    }

    RelationalGraphOfThings rgt;
    rgt.k = k;
    rgt.things = things.ids();
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> candidates;
        candidates.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && relevance.r(static_cast<Eigen::Index>(i),
                                      static_cast<Eigen::Index>(j)) > 0.0)
                candidates.push_back(j);
        }
        // Descending relevance; equal scores fall back to identifier order,
        // which is the index order of the sorted IndexMap.
        std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
            const double ra = relevance.r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a));
            const double rb = relevance.r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b));
            if (ra != rb) return ra > rb;
            return a < b;
        });
        if (candidates.size() > static_cast<std::size_t>(k)) candidates.resize(static_cast<std::size_t>(k));
        for (std::size_t j : candidates) {
            rgt.edges.push_back({i, j,
                                 relevance.r(static_cast<Eigen::Index>(i),
                                             static_cast<Eigen::Index>(j))});
        }
    }
    return rgt;
}

}  // namespace discort
