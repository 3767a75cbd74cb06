// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 Agora Contributors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "agora/nmf.hpp"

namespace agora {

struct TagSet {
    std::string doc_id;
    std::vector<std::pair<std::string, double>> tags; // score descending, ties lexicographic
};

struct NeighborList {
    std::string entity_id;
    std::vector<std::pair<std::string, double>> neighbors; // distance ascending, ties by id
};

inline std::size_t find_row(const TopicModel& model, const std::string& id) {
    for (std::size_t i = 0; i < model.doc_ids.size(); ++i)
        if (model.doc_ids[i] == id) return i;
    throw std::out_of_range("unknown document id: " + id);
}

/// The candidate tag vocabulary: union of every topic's top-n terms,
/// deduplicated, as ascending vocabulary indices.
inline std::vector<std::size_t> candidate_terms(const TopicModel& model, std::size_t n = 5) {
    std::set<std::size_t> unique;
    for (const auto& summary : top_terms(model, n))
        for (const auto& [term, weight] : summary.terms)
            unique.insert(model.vocab.index.at(term));
    return {unique.begin(), unique.end()};
}

/// Restricted reconstruction scores: score(d, w) = Σ_t Θ[d,t]·Φ[t,w] for
/// each candidate term, aligned with `candidates`.
inline std::vector<double> term_relevance(const TopicModel& model, std::size_t doc_row,
                                          const std::vector<std::size_t>& candidates) {
    if (doc_row >= model.docs()) throw std::out_of_range("document row out of range");
    std::vector<double> scores;
    scores.reserve(candidates.size());
    for (std::size_t w : candidates)
        scores.push_back(model.theta.row(static_cast<Eigen::Index>(doc_row))
                             .dot(model.phi.col(static_cast<Eigen::Index>(w))));
    return scores;
}

inline std::vector<double> term_relevance(const TopicModel& model, const std::string& doc_id,
                                          const std::vector<std::size_t>& candidates) {
    return term_relevance(model, find_row(model, doc_id), candidates);
}

/// Top-n candidate terms by relevance (descending, ties lexicographic);
/// only strictly positive scores qualify, so an all-zero document yields
/// an empty tag set.
inline TagSet auto_tags(const TopicModel& model, std::size_t doc_row,
                        const std::vector<std::size_t>& candidates, std::size_t n = 5) {
    const std::vector<double> scores = term_relevance(model, doc_row, candidates);
    std::vector<std::size_t> order;
    order.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i)
        if (scores[i] > 0.0) order.push_back(i);
    auto better = [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return model.vocab.terms[candidates[a]] < model.vocab.terms[candidates[b]];
    };
    const std::size_t take = std::min(n, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                      order.end(), better);

    TagSet tag_set;
    tag_set.doc_id = model.doc_ids[doc_row];
    for (std::size_t i = 0; i < take; ++i)
        tag_set.tags.emplace_back(model.vocab.terms[candidates[order[i]]], scores[order[i]]);
    return tag_set;
}

inline TagSet auto_tags(const TopicModel& model, const std::string& doc_id, std::size_t n = 5) {
    return auto_tags(model, find_row(model, doc_id), candidate_terms(model), n);
}

inline std::vector<TagSet> all_tag_sets(const TopicModel& model, std::size_t n = 5) {
    const std::vector<std::size_t> candidates = candidate_terms(model);
    std::vector<TagSet> sets;
    sets.reserve(model.docs());
    for (std::size_t d = 0; d < model.docs(); ++d)
        sets.push_back(auto_tags(model, d, candidates, n));
    return sets;
}

namespace detail {

// Plain accumulation loop, kept identical to the brute-force definition
// so results are reproducible to the last bit. No Gram-matrix shortcut.
inline double distance_squared(const Eigen::MatrixXd& theta, std::size_t a, std::size_t b) {
    double sum = 0.0;
    for (Eigen::Index t = 0; t < theta.cols(); ++t) {
        const double diff = theta(static_cast<Eigen::Index>(a), t) -
                            theta(static_cast<Eigen::Index>(b), t);
        sum += diff * diff;
    }
    return sum;
}

} // namespace detail

/// Exact k nearest rows of Θ by Euclidean distance, self excluded,
/// ascending distance with ties broken by ascending neighbor id.
inline NeighborList related_documents(const TopicModel& model, std::size_t doc_row,
                                      std::size_t k = 50) {
    if (doc_row >= model.docs()) throw std::out_of_range("document row out of range");
    std::vector<std::pair<double, std::size_t>> distances;
    distances.reserve(model.docs() > 0 ? model.docs() - 1 : 0);
    for (std::size_t j = 0; j < model.docs(); ++j) {
        if (j == doc_row) continue;
        distances.emplace_back(detail::distance_squared(model.theta, doc_row, j), j);
    }
    auto closer = [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return model.doc_ids[a.second] < model.doc_ids[b.second];
    };
    const std::size_t take = std::min(k, distances.size());
    std::partial_sort(distances.begin(), distances.begin() + static_cast<std::ptrdiff_t>(take),
                      distances.end(), closer);

    NeighborList list;
    list.entity_id = model.doc_ids[doc_row];
    list.neighbors.reserve(take);
    for (std::size_t i = 0; i < take; ++i)
        list.neighbors.emplace_back(model.doc_ids[distances[i].second],
                                    std::sqrt(distances[i].first));
    return list;
}

inline NeighborList related_documents(const TopicModel& model, const std::string& doc_id,
                                      std::size_t k = 50) {
    return related_documents(model, find_row(model, doc_id), k);
}

inline std::vector<NeighborList> all_neighbor_lists(const TopicModel& model, std::size_t k = 50) {
    std::vector<NeighborList> lists;
    lists.reserve(model.docs());
    for (std::size_t d = 0; d < model.docs(); ++d)
        lists.push_back(related_documents(model, d, k));
    return lists;
}

/// The user-clustering variant: an independent vocabulary, TF-IDF and
/// NMF fit over the merged per-user documents.
inline TopicModel build_user_model(const std::vector<TokenDocument>& user_docs,
                                   const NmfParams& params, const VectorizeConfig& vec = {},
                                   std::ostream* log = nullptr) {
    if (user_docs.size() < params.topics)
        throw std::invalid_argument(
            "fewer active users (" + std::to_string(user_docs.size()) + ") than topics (" +
            std::to_string(params.topics) + "); fit with a smaller topic count");
    const Vocabulary vocab = build_vocabulary(user_docs, vec.min_df, vec.max_df_ratio);
    const DocTermMatrix dtm = build_tfidf(user_docs, vocab);
    return fit_nmf(dtm, vocab, params, log);
}

inline NeighborList related_users(const TopicModel& user_model, const std::string& user_id,
                                  std::size_t k = 50) {
    return related_documents(user_model, user_id, k);
}

/// JSON-lines export, one entity per line:
/// {"id": ..., "tags": [{"term": ..., "score": ...}, ...]}
inline void write_tags_jsonl(const std::vector<TagSet>& sets, std::ostream& out) {
    for (const auto& set : sets) {
        nlohmann::json line;
        line["id"] = set.doc_id;
        line["tags"] = nlohmann::json::array();
        for (const auto& [term, score] : set.tags)
            line["tags"].push_back({{"term", term}, {"score", score}});
        out << line.dump() << '\n';
    }
}

/// JSON-lines export, one entity per line:
/// {"id": ..., "neighbors": [{"id": ..., "distance": ...}, ...]}
inline void write_neighbors_jsonl(const std::vector<NeighborList>& lists, std::ostream& out) {
    for (const auto& list : lists) {
        nlohmann::json line;
        line["id"] = list.entity_id;
        line["neighbors"] = nlohmann::json::array();
        for (const auto& [id, distance] : list.neighbors)
            line["neighbors"].push_back({{"id", id}, {"distance", distance}});
        out << line.dump() << '\n';
    }
}

} // namespace agora
