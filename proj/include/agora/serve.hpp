// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 Agora Contributors

#pragma once

#include <charconv>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>

#include <nlohmann/json.hpp>

#include "agora/bundle.hpp"
#include "agora/insights.hpp"
#include "agora/summarize.hpp"

// httplib drags in <resolv.h>, whose _res macro mangles Eigen's headers;
// keep it after every Eigen include.
#include <httplib.h>

namespace agora {

/// Read-only JSON query service over an immutable bundle snapshot.
/// Every response carries the bundle digest for cache validation.
/// `replace()` swaps in a new snapshot atomically between requests.
class QueryService {
public:
    QueryService(AnalysisBundle bundle, std::shared_ptr<const EmbeddingTable> embeddings)
        : snapshot_(std::make_shared<Snapshot>(std::move(bundle), std::move(embeddings))) {}

    void replace(AnalysisBundle bundle, std::shared_ptr<const EmbeddingTable> embeddings) {
        auto next = std::make_shared<Snapshot>(std::move(bundle), std::move(embeddings));
        std::lock_guard<std::mutex> lock(mutex_);
        snapshot_ = std::move(next);
    }

    std::string bundle_digest() const { return current()->bundle.bundle_digest; }

    void attach(httplib::Server& server) {
        server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
            const auto snap = current();
            nlohmann::json j{{"status", "ok"}, {"bundle_digest", snap->bundle.bundle_digest}};
            reply(res, 200, j);
        });

        server.Get("/topics", [this](const httplib::Request&, httplib::Response& res) {
            const auto snap = current();
            nlohmann::json j;
            j["bundle_digest"] = snap->bundle.bundle_digest;
            j["topics"] = nlohmann::json::array();
            for (const auto& topic : snap->bundle.topics) {
                nlohmann::json t{{"id", topic.topic_id}, {"terms", nlohmann::json::array()}};
                for (const auto& [term, weight] : topic.terms)
                    t["terms"].push_back({{"term", term}, {"weight", weight}});
                j["topics"].push_back(std::move(t));
            }
            reply(res, 200, j);
        });

        server.Get(R"(/proposals/([^/]+)/tags)",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       const auto snap = current();
                       const std::string& id = req.matches[1];
                       auto it = snap->tag_row.find(id);
                       if (it == snap->tag_row.end())
                           return error(res, 404, "unknown proposal id: " + id, snap);
                       const TagSet& tags = snap->bundle.tags[it->second];
                       nlohmann::json j;
                       j["bundle_digest"] = snap->bundle.bundle_digest;
                       j["id"] = id;
                       j["tags"] = nlohmann::json::array();
                       for (const auto& [term, score] : tags.tags)
                           j["tags"].push_back({{"term", term}, {"score", score}});
                       reply(res, 200, j);
                   });

        server.Get(R"(/proposals/([^/]+)/related)",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       related(req, res, /*users=*/false);
                   });

        server.Get(R"(/users/([^/]+)/related)",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       related(req, res, /*users=*/true);
                   });

        server.Get(R"(/proposals/([^/]+)/summary)",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       summary(req, res);
                   });
    }

private:
    struct Snapshot {
        AnalysisBundle bundle;
        std::shared_ptr<const EmbeddingTable> embeddings;
        std::unordered_map<std::string, std::size_t> tag_row;
        std::unordered_map<std::string, std::size_t> proposal_neighbor_row;
        std::unordered_map<std::string, std::size_t> user_neighbor_row;

        mutable std::mutex cache_mutex;
        mutable std::map<std::tuple<std::string, std::string, std::size_t>, nlohmann::json>
            summary_cache; // (proposal, method, n) → response body

        Snapshot(AnalysisBundle b, std::shared_ptr<const EmbeddingTable> table)
            : bundle(std::move(b)), embeddings(std::move(table)) {
            for (std::size_t i = 0; i < bundle.tags.size(); ++i)
                tag_row.emplace(bundle.tags[i].doc_id, i);
            for (std::size_t i = 0; i < bundle.proposal_neighbors.size(); ++i)
                proposal_neighbor_row.emplace(bundle.proposal_neighbors[i].entity_id, i);
            for (std::size_t i = 0; i < bundle.user_neighbors.size(); ++i)
                user_neighbor_row.emplace(bundle.user_neighbors[i].entity_id, i);
        }
    };

    std::shared_ptr<const Snapshot> current() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return snapshot_;
    }

    static void reply(httplib::Response& res, int status, const nlohmann::json& body) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    static void error(httplib::Response& res, int status, const std::string& message,
                      const std::shared_ptr<const Snapshot>& snap) {
        reply(res, status,
              nlohmann::json{{"error", message},
                             {"bundle_digest", snap->bundle.bundle_digest}});
    }

    static std::optional<std::size_t> parse_size(const std::string& text) {
        std::size_t value = 0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
        return value;
    }

    void related(const httplib::Request& req, httplib::Response& res, bool users) {
        const auto snap = current();
        const std::string& id = req.matches[1];

        std::size_t k = snap->bundle.insights.neighbors_k;
        if (req.has_param("k")) {
            const auto parsed = parse_size(req.get_param_value("k"));
            if (!parsed || *parsed < 1)
                return error(res, 400, "k must be a positive integer", snap);
            k = *parsed;
        }

        if (users && !snap->bundle.has_user_model)
            return error(res, 404, "no user model in this bundle", snap);
        const auto& row_map = users ? snap->user_neighbor_row : snap->proposal_neighbor_row;
        auto it = row_map.find(id);
        if (it == row_map.end())
            return error(res, 404,
                         std::string("unknown ") + (users ? "user" : "proposal") + " id: " + id,
                         snap);

        const auto& precomputed =
            users ? snap->bundle.user_neighbors[it->second]
                  : snap->bundle.proposal_neighbors[it->second];
        NeighborList fresh;
        const NeighborList* list = &precomputed;
        if (k > precomputed.neighbors.size()) {
            // beyond the precomputed horizon: recompute exactly from Θ
            const TopicModel& model =
                users ? snap->bundle.user_model : snap->bundle.proposal_model;
            fresh = related_documents(model, id, k);
            list = &fresh;
        }

        nlohmann::json j;
        j["bundle_digest"] = snap->bundle.bundle_digest;
        j["id"] = id;
        j["neighbors"] = nlohmann::json::array();
        const std::size_t take = std::min(k, list->neighbors.size());
        for (std::size_t i = 0; i < take; ++i)
            j["neighbors"].push_back({{"id", list->neighbors[i].first},
                                      {"distance", list->neighbors[i].second}});
        reply(res, 200, j);
    }

    void summary(const httplib::Request& req, httplib::Response& res) {
        const auto snap = current();
        const std::string& id = req.matches[1];
        if (!snap->tag_row.count(id)) return error(res, 404, "unknown proposal id: " + id, snap);

        SummaryMethod method = snap->bundle.summarize_defaults.method;
        if (req.has_param("method")) {
            try {
                method = parse_summary_method(req.get_param_value("method"));
            } catch (const std::invalid_argument& e) {
                return error(res, 400, e.what(), snap);
            }
        }
        std::size_t n = snap->bundle.summarize_defaults.sentences;
        if (req.has_param("n")) {
            const auto parsed = parse_size(req.get_param_value("n"));
            if (!parsed || *parsed < 1)
                return error(res, 400, "n must be a positive integer", snap);
            n = *parsed;
        }
        if (method == SummaryMethod::textrank && !snap->embeddings)
            return error(res, 400, "textrank unavailable: no embedding table configured", snap);

        const auto cache_key = std::make_tuple(id, to_string(method), n);
        {
            std::lock_guard<std::mutex> lock(snap->cache_mutex);
            auto it = snap->summary_cache.find(cache_key);
            if (it != snap->summary_cache.end()) return reply(res, 200, it->second);
        }

        Summary result;
        if (snap->bundle.summary_context.has_thread(id)) {
            result = summarize_thread(snap->bundle.summary_context, id, method, n,
                                      snap->embeddings.get(),
                                      snap->bundle.summarize_defaults.pagerank);
        } else { // proposal exists but nobody commented
            result.proposal_id = id;
            result.method = method;
            result.n_requested = n;
        }
        nlohmann::json j = summary_to_json(result);
        j["bundle_digest"] = snap->bundle.bundle_digest;
        {
            std::lock_guard<std::mutex> lock(snap->cache_mutex);
            snap->summary_cache.emplace(cache_key, j);
        }
        reply(res, 200, j);
    }

    mutable std::mutex mutex_;
    std::shared_ptr<const Snapshot> snapshot_;
};

} // namespace agora
