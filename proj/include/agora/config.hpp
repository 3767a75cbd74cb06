// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 Agora Contributors

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "agora/corpus.hpp"
#include "agora/nmf.hpp"
#include "agora/summarize.hpp"
#include "agora/textprep.hpp"
#include "agora/vectorize.hpp"

namespace agora {

inline constexpr int kConfigVersion = 1;

struct SummarizeConfig {
    SummaryMethod method = SummaryMethod::tfidf;
    std::size_t sentences = 3;
    std::string embeddings_path; // optional; required for textrank queries
    PageRankParams pagerank;
};

struct InsightsConfig {
    std::size_t neighbors_k = 50;
    std::size_t topic_terms = 5; // terms per topic, hence 5·T candidates
    std::size_t tags_per_doc = 5;
};

struct PipelineConfig {
    int version = kConfigVersion;

    // data
    std::string proposals_csv;
    std::string comments_csv; // optional
    std::string tags_csv;     // optional
    CsvSchema schema;

    // preprocessing assets
    std::string stopwords_path;      // optional
    std::string lemmas_path;         // optional
    std::string noun_whitelist_path; // optional
    std::size_t min_token_length = 2;
    std::size_t bigram_min_count = 20;
    double bigram_score_threshold = 10.0;

    VectorizeConfig vectorize;
    NmfParams model;      // proposal model
    NmfParams user_model; // user model (inherits from model unless overridden)
    bool user_model_enabled = true;
    InsightsConfig insights;
    SummarizeConfig summarize;

    std::string output_dir = "bundle";

    /// Loads the word lists referenced by the config into a PrepConfig.
    PrepConfig make_prep_config() const {
        PrepConfig prep;
        if (!stopwords_path.empty()) prep.stoplist = load_stoplist(stopwords_path);
        if (!lemmas_path.empty()) prep.lemma_lexicon = load_lemma_lexicon(lemmas_path);
        if (!noun_whitelist_path.empty()) prep.noun_whitelist = load_noun_whitelist(noun_whitelist_path);
        prep.min_token_length = min_token_length;
        prep.bigram_min_count = static_cast<std::uint32_t>(bigram_min_count);
        prep.bigram_score_threshold = bigram_score_threshold;
        prep.validate();
        return prep;
    }

    void validate() const {
        if (proposals_csv.empty())
            throw std::runtime_error("config: data.proposals is required");
        auto must_exist = [](const std::string& path, const std::string& field) {
            if (!path.empty() && !std::filesystem::exists(path))
                throw std::runtime_error("config: " + field + " does not exist: " + path);
        };
        must_exist(proposals_csv, "data.proposals");
        must_exist(comments_csv, "data.comments");
        must_exist(tags_csv, "data.tags");
        must_exist(stopwords_path, "preprocess.stopwords");
        must_exist(lemmas_path, "preprocess.lemmas");
        must_exist(noun_whitelist_path, "preprocess.noun_whitelist");
        must_exist(summarize.embeddings_path, "summarize.embeddings");
        if (model.topics < 1) throw std::runtime_error("config: model.topics must be >= 1");
        if (user_model_enabled && user_model.topics < 1)
            throw std::runtime_error("config: user_model.topics must be >= 1");
        summarize.pagerank.validate();
        if (output_dir.empty()) throw std::runtime_error("config: output must not be empty");
    }
};

namespace detail {

inline std::string resolve_path(const std::filesystem::path& base, const std::string& value) {
    if (value.empty()) return value;
    std::filesystem::path p(value);
    if (p.is_absolute()) return p.string();
    return (base / p).lexically_normal().string();
}

inline void read_nmf_params(const nlohmann::json& j, NmfParams& params) {
    if (j.contains("topics")) params.topics = j.at("topics").get<std::size_t>();
    if (j.contains("max_sweeps")) params.max_sweeps = j.at("max_sweeps").get<std::size_t>();
    if (j.contains("rel_tol")) params.rel_tol = j.at("rel_tol").get<double>();
    if (j.contains("epsilon")) params.epsilon = j.at("epsilon").get<double>();
    if (j.contains("seed")) params.seed = j.at("seed").get<std::uint64_t>();
}

inline void read_columns(const nlohmann::json& j, CsvSchema& schema) {
    if (j.contains("proposals")) {
        const auto& p = j.at("proposals");
        auto& cols = schema.proposals;
        if (p.contains("id")) cols.id = p.at("id").get<std::string>();
        if (p.contains("title")) cols.title = p.at("title").get<std::string>();
        if (p.contains("description")) cols.description = p.at("description").get<std::string>();
        if (p.contains("summary")) cols.summary = p.at("summary").get<std::string>();
        if (p.contains("author_id")) cols.author_id = p.at("author_id").get<std::string>();
        if (p.contains("created_at")) cols.created_at = p.at("created_at").get<std::string>();
        if (p.contains("votes_total")) cols.votes_total = p.at("votes_total").get<std::string>();
        if (p.contains("votes_up")) cols.votes_up = p.at("votes_up").get<std::string>();
        if (p.contains("votes_down")) cols.votes_down = p.at("votes_down").get<std::string>();
    }
    if (j.contains("comments")) {
        const auto& c = j.at("comments");
        auto& cols = schema.comments;
        if (c.contains("id")) cols.id = c.at("id").get<std::string>();
        if (c.contains("proposal_id")) cols.proposal_id = c.at("proposal_id").get<std::string>();
        if (c.contains("author_id")) cols.author_id = c.at("author_id").get<std::string>();
        if (c.contains("body")) cols.body = c.at("body").get<std::string>();
        if (c.contains("created_at")) cols.created_at = c.at("created_at").get<std::string>();
    }
    if (j.contains("tags")) {
        const auto& t = j.at("tags");
        auto& cols = schema.tags;
        if (t.contains("tag")) cols.tag = t.at("tag").get<std::string>();
        if (t.contains("proposal_id")) cols.proposal_id = t.at("proposal_id").get<std::string>();
    }
}

} // namespace detail

/// Parses the JSON config file (// and /* */ comments allowed). Relative
/// paths are resolved against the config file's directory.
inline PipelineConfig load_config(const std::string& config_path) {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open config file: " + config_path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/true,
                                  /*ignore_comments=*/true);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("config parse error in " + config_path + ": " + e.what());
    }

    const std::filesystem::path base = std::filesystem::path(config_path).parent_path();
    PipelineConfig config;

    if (j.contains("version")) config.version = j.at("version").get<int>();
    if (config.version != kConfigVersion)
        throw std::runtime_error("config: unsupported version " + std::to_string(config.version) +
                                 " (expected " + std::to_string(kConfigVersion) + ")");

    if (j.contains("data")) {
        const auto& d = j.at("data");
        if (d.contains("proposals"))
            config.proposals_csv = detail::resolve_path(base, d.at("proposals").get<std::string>());
        if (d.contains("comments"))
            config.comments_csv = detail::resolve_path(base, d.at("comments").get<std::string>());
        if (d.contains("tags"))
            config.tags_csv = detail::resolve_path(base, d.at("tags").get<std::string>());
        if (d.contains("delimiter")) {
            const std::string delim = d.at("delimiter").get<std::string>();
            if (delim.size() != 1)
                throw std::runtime_error("config: data.delimiter must be a single character");
            config.schema.delimiter = delim[0];
        }
        if (d.contains("columns")) detail::read_columns(d.at("columns"), config.schema);
    }

    if (j.contains("preprocess")) {
        const auto& p = j.at("preprocess");
        if (p.contains("stopwords"))
            config.stopwords_path = detail::resolve_path(base, p.at("stopwords").get<std::string>());
        if (p.contains("lemmas"))
            config.lemmas_path = detail::resolve_path(base, p.at("lemmas").get<std::string>());
        if (p.contains("noun_whitelist"))
            config.noun_whitelist_path =
                detail::resolve_path(base, p.at("noun_whitelist").get<std::string>());
        if (p.contains("min_token_length"))
            config.min_token_length = p.at("min_token_length").get<std::size_t>();
        if (p.contains("bigrams")) {
            const auto& b = p.at("bigrams");
            if (b.contains("min_count"))
                config.bigram_min_count = b.at("min_count").get<std::size_t>();
            if (b.contains("score_threshold"))
                config.bigram_score_threshold = b.at("score_threshold").get<double>();
        }
    }

    if (j.contains("vectorize")) {
        const auto& v = j.at("vectorize");
        if (v.contains("min_df")) config.vectorize.min_df = v.at("min_df").get<std::size_t>();
        if (v.contains("max_df_ratio"))
            config.vectorize.max_df_ratio = v.at("max_df_ratio").get<double>();
    }

    if (j.contains("model")) detail::read_nmf_params(j.at("model"), config.model);
    config.user_model = config.model; // inherit, then override
    if (j.contains("user_model")) {
        const auto& u = j.at("user_model");
        if (u.contains("enabled")) config.user_model_enabled = u.at("enabled").get<bool>();
        detail::read_nmf_params(u, config.user_model);
    }

    if (j.contains("insights")) {
        const auto& i = j.at("insights");
        if (i.contains("neighbors")) config.insights.neighbors_k = i.at("neighbors").get<std::size_t>();
        if (i.contains("topic_terms"))
            config.insights.topic_terms = i.at("topic_terms").get<std::size_t>();
        if (i.contains("tags_per_doc"))
            config.insights.tags_per_doc = i.at("tags_per_doc").get<std::size_t>();
    }

    if (j.contains("summarize")) {
        const auto& s = j.at("summarize");
        if (s.contains("method"))
            config.summarize.method = parse_summary_method(s.at("method").get<std::string>());
        if (s.contains("sentences"))
            config.summarize.sentences = s.at("sentences").get<std::size_t>();
        if (s.contains("embeddings"))
            config.summarize.embeddings_path =
                detail::resolve_path(base, s.at("embeddings").get<std::string>());
        if (s.contains("pagerank")) {
            const auto& pr = s.at("pagerank");
            if (pr.contains("damping"))
                config.summarize.pagerank.damping = pr.at("damping").get<double>();
            if (pr.contains("tolerance"))
                config.summarize.pagerank.tolerance = pr.at("tolerance").get<double>();
            if (pr.contains("max_iterations"))
                config.summarize.pagerank.max_iterations =
                    pr.at("max_iterations").get<std::size_t>();
        }
    }

    if (j.contains("output"))
        config.output_dir = detail::resolve_path(base, j.at("output").get<std::string>());

    return config;
}

/// The JSON snapshot stored inside a bundle: resolved paths and the
/// effective parameter values.
inline nlohmann::json config_snapshot(const PipelineConfig& c) {
    nlohmann::json j;
    j["version"] = c.version;
    j["data"] = {{"proposals", c.proposals_csv},
                 {"comments", c.comments_csv},
                 {"tags", c.tags_csv},
                 {"delimiter", std::string(1, c.schema.delimiter)}};
    j["preprocess"] = {{"stopwords", c.stopwords_path},
                       {"lemmas", c.lemmas_path},
                       {"noun_whitelist", c.noun_whitelist_path},
                       {"min_token_length", c.min_token_length},
                       {"bigrams",
                        {{"min_count", c.bigram_min_count},
                         {"score_threshold", c.bigram_score_threshold}}}};
    j["vectorize"] = {{"min_df", c.vectorize.min_df}, {"max_df_ratio", c.vectorize.max_df_ratio}};
    auto nmf_json = [](const NmfParams& p) {
        return nlohmann::json{{"topics", p.topics},
                              {"max_sweeps", p.max_sweeps},
                              {"rel_tol", p.rel_tol},
                              {"epsilon", p.epsilon},
                              {"seed", p.seed}};
    };
    j["model"] = nmf_json(c.model);
    j["user_model"] = nmf_json(c.user_model);
    j["user_model"]["enabled"] = c.user_model_enabled;
    j["insights"] = {{"neighbors", c.insights.neighbors_k},
                     {"topic_terms", c.insights.topic_terms},
                     {"tags_per_doc", c.insights.tags_per_doc}};
    j["summarize"] = {{"method", to_string(c.summarize.method)},
                      {"sentences", c.summarize.sentences},
                      {"embeddings", c.summarize.embeddings_path},
                      {"pagerank",
                       {{"damping", c.summarize.pagerank.damping},
                        {"tolerance", c.summarize.pagerank.tolerance},
                        {"max_iterations", c.summarize.pagerank.max_iterations}}}};
    j["output"] = c.output_dir;
    return j;
}

} // namespace agora
