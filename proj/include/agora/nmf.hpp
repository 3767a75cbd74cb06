// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 Agora Contributors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "agora/svd.hpp"
#include "agora/vectorize.hpp"

namespace agora {

struct NmfParams {
    std::size_t topics = 40;
    std::size_t max_sweeps = 500;
    double rel_tol = 1e-5;
    double epsilon = 1e-12;
    std::uint64_t seed = 42;

    void validate(std::size_t docs, std::size_t vocab) const {
        if (topics < 1 || topics > std::min(docs, vocab))
            throw std::invalid_argument("topics must satisfy 1 <= T <= min(D, V); got T=" +
                                        std::to_string(topics) + " with D=" + std::to_string(docs) +
                                        ", V=" + std::to_string(vocab));
        if (rel_tol <= 0.0) throw std::invalid_argument("rel_tol must be positive");
        if (max_sweeps < 1) throw std::invalid_argument("max_sweeps must be positive");
        if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
    }
};

struct TopicModel {
    Eigen::MatrixXd theta; // D×T document-topic
    Eigen::MatrixXd phi;   // T×V topic-term
    Vocabulary vocab;
    std::vector<std::string> doc_ids;
    std::vector<double> objective_history; // value at init, then one per sweep
    bool converged = false;
    std::size_t sweeps_run = 0;
    std::size_t reseeded_topics = 0;
    NmfParams params;

    std::size_t topics() const { return static_cast<std::size_t>(phi.rows()); }
    std::size_t docs() const { return static_cast<std::size_t>(theta.rows()); }
};

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// ½‖X − ΘΦ‖²_F computed without materializing ΘΦ, via
/// ‖X‖² − 2⟨X, ΘΦ⟩ + ⟨ΘᵀΘ, ΦΦᵀ⟩.
inline double objective(const SparseRowMatrix& X, const Eigen::MatrixXd& theta,
                        const Eigen::MatrixXd& phi) {
    const double x_sq = X.squaredNorm();
    double cross = 0.0;
    for (int d = 0; d < X.outerSize(); ++d)
        for (SparseRowMatrix::InnerIterator it(X, d); it; ++it)
            cross += it.value() * theta.row(d).dot(phi.col(it.col()));
    const double prod_sq =
        ((theta.transpose() * theta).cwiseProduct(phi * phi.transpose())).sum();
    return 0.5 * (x_sq - 2.0 * cross + prod_sq);
}

/// NNDSVD initialization: leading component from |u₁|, |v₁|; every later
/// singular pair split into positive/negative parts, keeping the pair
/// with the larger norm product. Zeros floored at epsilon (the "a"
/// variant) so every coordinate stays updatable under HALS.
template <typename MatrixT>
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> nndsvd_init(const MatrixT& X, std::size_t T,
                                                        std::uint64_t seed,
                                                        double epsilon = 1e-12) {
    const SvdFactors f = truncated_svd(X, T, seed);
    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(X.rows(), static_cast<Eigen::Index>(T));
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(T), X.cols());

    if (f.S(0) > 0.0) {
        const double scale = std::sqrt(f.S(0));
        theta.col(0) = scale * f.U.col(0).cwiseAbs();
        phi.row(0) = scale * f.Vt.row(0).cwiseAbs();
    }
    for (Eigen::Index k = 1; k < static_cast<Eigen::Index>(T); ++k) {
        if (f.S(k) <= 0.0) continue; // padded rank-deficient component
        const Eigen::VectorXd u = f.U.col(k);
        const Eigen::RowVectorXd v = f.Vt.row(k);
        const Eigen::VectorXd up = u.cwiseMax(0.0), un = (-u).cwiseMax(0.0);
        const Eigen::RowVectorXd vp = v.cwiseMax(0.0), vn = (-v).cwiseMax(0.0);
        const double n_up = up.norm(), n_un = un.norm();
        const double n_vp = vp.norm(), n_vn = vn.norm();
        const double m_pos = n_up * n_vp, m_neg = n_un * n_vn;
        if (std::max(m_pos, m_neg) == 0.0) continue;
        if (m_pos >= m_neg) {
            const double scale = std::sqrt(f.S(k) * m_pos);
            theta.col(k) = (scale / n_up) * up;
            phi.row(k) = (scale / n_vp) * vp;
        } else {
            const double scale = std::sqrt(f.S(k) * m_neg);
            theta.col(k) = (scale / n_un) * un;
            phi.row(k) = (scale / n_vn) * vn;
        }
    }
    theta = theta.cwiseMax(epsilon);
    phi = phi.cwiseMax(epsilon);
    return {std::move(theta), std::move(phi)};
}

namespace detail {

/// Picks the column of the residual X − ΘΦ with the largest Euclidean
/// norm and rebuilds topic t around it: Θ[:,t] takes the (floored)
/// residual column, Φ[t,:] becomes an indicator of that term.
inline void reseed_topic(const Eigen::SparseMatrix<double>& X_by_col, Eigen::MatrixXd& theta,
                         Eigen::MatrixXd& phi, Eigen::Index t, double epsilon,
                         Eigen::Index& out_column) {
    const Eigen::MatrixXd gram = theta.transpose() * theta; // T×T
    Eigen::Index best_col = 0;
    double best_norm_sq = -1.0;
    for (Eigen::Index j = 0; j < X_by_col.outerSize(); ++j) {
        const Eigen::VectorXd phi_col = phi.col(j);
        double col_sq = phi_col.dot(gram * phi_col); // ‖(ΘΦ)[:,j]‖²
        for (Eigen::SparseMatrix<double>::InnerIterator it(X_by_col, j); it; ++it) {
            const double approx = theta.row(it.row()).dot(phi_col);
            col_sq += it.value() * (it.value() - 2.0 * approx);
        }
        if (col_sq > best_norm_sq) {
            best_norm_sq = col_sq;
            best_col = j;
        }
    }

    Eigen::VectorXd residual = -(theta * phi.col(best_col));
    for (Eigen::SparseMatrix<double>::InnerIterator it(X_by_col, best_col); it; ++it)
        residual(it.row()) += it.value();
    theta.col(t) = residual.cwiseMax(epsilon);
    phi.row(t).setConstant(epsilon);
    phi(t, best_col) = 1.0;
    out_column = best_col;
}

} // namespace detail

/// Frobenius-objective NMF: NNDSVD start, then Fast HALS coordinate
/// descent over topics in fixed ascending order until the relative
/// objective decrease falls below rel_tol. Deterministic given
/// (X, params).
inline TopicModel fit_nmf(const DocTermMatrix& dtm, const Vocabulary& vocab,
                          const NmfParams& params, std::ostream* log = nullptr) {
    const SparseRowMatrix& X = dtm.X;
    params.validate(dtm.docs(), dtm.vocab_size());

    TopicModel model;
    model.vocab = vocab;
    model.doc_ids = dtm.doc_ids;
    model.params = params;

    const auto T = static_cast<Eigen::Index>(params.topics);
    auto [theta, phi] = nndsvd_init(X, params.topics, params.seed, params.epsilon);

    // Compressed-column mirror; the sweeps run on rows, the dead-topic
    // reseed scans columns.
    const Eigen::SparseMatrix<double> X_by_col(X);

    model.objective_history.push_back(objective(X, theta, phi));

    auto reseed = [&](Eigen::Index t) {
        Eigen::Index column = 0;
        detail::reseed_topic(X_by_col, theta, phi, t, params.epsilon, column);
        ++model.reseeded_topics;
        if (log)
            *log << "fit_nmf: reseeded dead topic " << t << " from column " << column << " ('"
                 << vocab.terms[static_cast<std::size_t>(column)] << "')\n";
    };

    for (std::size_t sweep = 1; sweep <= params.max_sweeps; ++sweep) {
        { // Θ half-sweep
            Eigen::MatrixXd a = X * phi.transpose();        // D×T
            Eigen::MatrixXd b = phi * phi.transpose();      // T×T
            for (Eigen::Index t = 0; t < T; ++t) {
                if (b(t, t) < params.epsilon) {
                    reseed(t);
                    a = X * phi.transpose();
                    b = phi * phi.transpose();
                }
                const Eigen::VectorXd delta = (a.col(t) - theta * b.col(t)) / b(t, t);
                theta.col(t) = (theta.col(t) + delta).cwiseMax(params.epsilon);
            }
        }
        { // Φ half-sweep
            Eigen::MatrixXd a = X.transpose() * theta;      // V×T, = (ΘᵀX)ᵀ
            Eigen::MatrixXd b = theta.transpose() * theta;  // T×T
            for (Eigen::Index t = 0; t < T; ++t) {
                if (b(t, t) < params.epsilon) {
                    reseed(t);
                    a = X.transpose() * theta;
                    b = theta.transpose() * theta;
                }
                const Eigen::RowVectorXd delta =
                    (a.col(t).transpose() - b.row(t) * phi) / b(t, t);
                phi.row(t) = (phi.row(t) + delta).cwiseMax(params.epsilon);
            }
        }

        const double prev = model.objective_history.back();
        const double curr = objective(X, theta, phi);
        model.objective_history.push_back(curr);
        model.sweeps_run = sweep;
        const double rel_decrease = (prev - curr) / std::max(prev, params.epsilon);
        if (rel_decrease < params.rel_tol) {
            model.converged = true;
            break;
        }
    }

    if (log)
        *log << "fit_nmf: " << model.sweeps_run << " sweeps, objective "
             << model.objective_history.back() << (model.converged ? "" : " (not converged)")
             << "\n";

    model.theta = std::move(theta);
    model.phi = std::move(phi);
    return model;
}

struct TopicSummary {
    std::size_t topic_id = 0;
    std::vector<std::pair<std::string, double>> terms; // weight descending, ties lexicographic
};

/// Per topic, the n largest Φ[t,·] entries (weight descending, ties by
/// term). Only strictly positive weights qualify.
inline std::vector<TopicSummary> top_terms(const TopicModel& model, std::size_t n = 5) {
    std::vector<TopicSummary> summaries;
    summaries.reserve(model.topics());
    for (std::size_t t = 0; t < model.topics(); ++t) {
        std::vector<std::size_t> order;
        order.reserve(model.vocab.size());
        for (std::size_t w = 0; w < model.vocab.size(); ++w)
            if (model.phi(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(w)) > 0.0)
                order.push_back(w);
        auto better = [&](std::size_t a, std::size_t b) {
            const double wa = model.phi(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(a));
            const double wb = model.phi(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(b));
            if (wa != wb) return wa > wb;
            return model.vocab.terms[a] < model.vocab.terms[b];
        };
        const std::size_t take = std::min(n, order.size());
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                          order.end(), better);
        TopicSummary summary;
        summary.topic_id = t;
        for (std::size_t i = 0; i < take; ++i)
            summary.terms.emplace_back(model.vocab.terms[order[i]],
                                       model.phi(static_cast<Eigen::Index>(t),
                                                 static_cast<Eigen::Index>(order[i])));
        summaries.push_back(std::move(summary));
    }
    return summaries;
}

/// UMass topic coherence over the fitting corpus: for the rank-ordered
/// top-n terms, Σ_{i<j} ln((codoc(wᵢ,wⱼ) + 1) / doc(wⱼ)).
inline std::vector<double> umass_coherence(const TopicModel& model,
                                           const std::vector<TokenDocument>& docs,
                                           std::size_t n = 5) {
    std::unordered_map<std::string, std::vector<std::size_t>> postings;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        for (const auto& token : docs[d].tokens) {
            auto& list = postings[token];
            if (list.empty() || list.back() != d) list.push_back(d);
        }
    }
    auto co_docs = [](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
        std::size_t count = 0, i = 0, j = 0;
        while (i < a.size() && j < b.size()) {
            if (a[i] == b[j]) { ++count; ++i; ++j; }
            else if (a[i] < b[j]) ++i;
            else ++j;
        }
        return count;
    };

    static const std::vector<std::size_t> kEmpty;
    std::vector<double> scores;
    for (const auto& summary : top_terms(model, n)) {
        double score = 0.0;
        for (std::size_t i = 0; i + 1 < summary.terms.size(); ++i) {
            for (std::size_t j = i + 1; j < summary.terms.size(); ++j) {
                auto it_i = postings.find(summary.terms[i].first);
                auto it_j = postings.find(summary.terms[j].first);
                const auto& list_i = it_i == postings.end() ? kEmpty : it_i->second;
                const auto& list_j = it_j == postings.end() ? kEmpty : it_j->second;
                if (list_j.empty()) continue; // term absent from this corpus
                score += std::log((static_cast<double>(co_docs(list_i, list_j)) + 1.0) /
                                  static_cast<double>(list_j.size()));
            }
        }
        scores.push_back(score);
    }
    return scores;
}

} // namespace agora
