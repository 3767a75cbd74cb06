// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 Agora Contributors

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agora/config.hpp"
#include "agora/corpus.hpp"
#include "agora/digest.hpp"
#include "agora/insights.hpp"
#include "agora/matrix_io.hpp"
#include "agora/nmf.hpp"
#include "agora/summarize.hpp"
#include "agora/vectorize.hpp"

namespace agora {

inline constexpr int kBundleVersion = 1;

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

/// Everything the query service answers from: fitted models, precomputed
/// tags and neighbor lists, raw comment threads for lazy summarization,
/// and the preprocessing state needed to tokenize sentences at query
/// time. Immutable once built or loaded.
struct AnalysisBundle {
    int format_version = kBundleVersion;
    std::string corpus_digest;
    std::string bundle_digest; // digest of meta.json; cache validator
    nlohmann::json config;     // resolved config snapshot

    PrepConfig prep;
    BigramTable proposal_bigrams;

    TopicModel proposal_model;
    std::vector<TopicSummary> topics;
    std::vector<TagSet> tags;
    std::vector<NeighborList> proposal_neighbors;

    bool has_user_model = false;
    TopicModel user_model;
    std::vector<NeighborList> user_neighbors;

    std::map<std::string, RawDocument> threads;
    SummaryContext summary_context; // rebuilt deterministically from threads

    InsightsConfig insights;
    SummarizeConfig summarize_defaults;

    std::vector<StageTiming> timings; // informational; build_info.json only
};

namespace detail {

inline void write_text_file(const std::filesystem::path& path, const std::string& content,
                            std::map<std::string, std::string>* digests) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
    if (digests) (*digests)[path.filename().string()] = digest_hex(content);
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline std::string bigrams_tsv(const BigramTable& table) {
    std::ostringstream out;
    out.precision(std::numeric_limits<double>::max_digits10);
    for (const auto& [pair, score] : table.scores)
        out << pair.first << '\t' << pair.second << '\t' << score << '\n';
    return out.str();
}

inline BigramTable parse_bigrams_tsv(const std::string& content, std::uint32_t min_count,
                                     double score_threshold) {
    BigramTable table;
    table.min_count = min_count;
    table.score_threshold = score_threshold;
    std::istringstream in(content);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto tab1 = line.find('\t');
        const auto tab2 = line.find('\t', tab1 == std::string::npos ? tab1 : tab1 + 1);
        if (tab1 == std::string::npos || tab2 == std::string::npos)
            throw std::runtime_error("bigram table line " + std::to_string(line_no) +
                                     ": expected first<TAB>second<TAB>score");
        table.scores[{line.substr(0, tab1), line.substr(tab1 + 1, tab2 - tab1 - 1)}] =
            std::stod(line.substr(tab2 + 1));
    }
    return table;
}

inline std::string sorted_lines(const std::unordered_set<std::string>& words) {
    std::vector<std::string> sorted(words.begin(), words.end());
    std::sort(sorted.begin(), sorted.end());
    std::string out;
    for (const auto& w : sorted) {
        out += w;
        out += '\n';
    }
    return out;
}

inline std::string matrix_bytes(const Eigen::MatrixXd& m) {
    std::ostringstream out(std::ios::binary);
    write_matrix(m, out);
    return out.str();
}

inline nlohmann::json model_meta(const TopicModel& model) {
    nlohmann::json j;
    j["topics"] = model.params.topics;
    j["max_sweeps"] = model.params.max_sweeps;
    j["rel_tol"] = model.params.rel_tol;
    j["epsilon"] = model.params.epsilon;
    j["seed"] = model.params.seed;
    j["converged"] = model.converged;
    j["sweeps_run"] = model.sweeps_run;
    j["reseeded_topics"] = model.reseeded_topics;
    j["objective_history"] = model.objective_history;
    j["vocab_corpus_docs"] = model.vocab.corpus_docs;
    return j;
}

inline void model_from_meta(const nlohmann::json& j, TopicModel& model) {
    model.params.topics = j.at("topics").get<std::size_t>();
    model.params.max_sweeps = j.at("max_sweeps").get<std::size_t>();
    model.params.rel_tol = j.at("rel_tol").get<double>();
    model.params.epsilon = j.at("epsilon").get<double>();
    model.params.seed = j.at("seed").get<std::uint64_t>();
    model.converged = j.at("converged").get<bool>();
    model.sweeps_run = j.at("sweeps_run").get<std::size_t>();
    model.reseeded_topics = j.at("reseeded_topics").get<std::size_t>();
    model.objective_history = j.at("objective_history").get<std::vector<double>>();
}

inline std::string doc_ids_lines(const std::vector<std::string>& ids) {
    std::string out;
    for (const auto& id : ids) {
        out += id;
        out += '\n';
    }
    return out;
}

inline std::vector<std::string> parse_lines(const std::string& content) {
    std::vector<std::string> lines;
    std::istringstream in(content);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

inline std::string topics_json(const std::vector<TopicSummary>& topics) {
    nlohmann::json j;
    j["topics"] = nlohmann::json::array();
    for (const auto& topic : topics) {
        nlohmann::json t;
        t["id"] = topic.topic_id;
        t["terms"] = nlohmann::json::array();
        for (const auto& [term, weight] : topic.terms)
            t["terms"].push_back({{"term", term}, {"weight", weight}});
        j["topics"].push_back(std::move(t));
    }
    return j.dump(2) + "\n";
}

inline std::vector<TopicSummary> parse_topics_json(const std::string& content) {
    const nlohmann::json j = nlohmann::json::parse(content);
    std::vector<TopicSummary> topics;
    for (const auto& t : j.at("topics")) {
        TopicSummary summary;
        summary.topic_id = t.at("id").get<std::size_t>();
        for (const auto& term : t.at("terms"))
            summary.terms.emplace_back(term.at("term").get<std::string>(),
                                       term.at("weight").get<double>());
        topics.push_back(std::move(summary));
    }
    return topics;
}

inline std::string tags_jsonl_string(const std::vector<TagSet>& sets) {
    std::ostringstream out;
    write_tags_jsonl(sets, out);
    return out.str();
}

inline std::vector<TagSet> parse_tags_jsonl(const std::string& content) {
    std::vector<TagSet> sets;
    for (const auto& line : parse_lines(content)) {
        if (line.empty()) continue;
        const nlohmann::json j = nlohmann::json::parse(line);
        TagSet set;
        set.doc_id = j.at("id").get<std::string>();
        for (const auto& tag : j.at("tags"))
            set.tags.emplace_back(tag.at("term").get<std::string>(),
                                  tag.at("score").get<double>());
        sets.push_back(std::move(set));
    }
    return sets;
}

inline std::string neighbors_jsonl_string(const std::vector<NeighborList>& lists) {
    std::ostringstream out;
    write_neighbors_jsonl(lists, out);
    return out.str();
}

inline std::vector<NeighborList> parse_neighbors_jsonl(const std::string& content) {
    std::vector<NeighborList> lists;
    for (const auto& line : parse_lines(content)) {
        if (line.empty()) continue;
        const nlohmann::json j = nlohmann::json::parse(line);
        NeighborList list;
        list.entity_id = j.at("id").get<std::string>();
        for (const auto& n : j.at("neighbors"))
            list.neighbors.emplace_back(n.at("id").get<std::string>(),
                                        n.at("distance").get<double>());
        lists.push_back(std::move(list));
    }
    return lists;
}

inline std::string threads_jsonl_string(const std::map<std::string, RawDocument>& threads) {
    std::ostringstream out;
    for (const auto& [pid, doc] : threads) {
        nlohmann::json j;
        j["id"] = pid;
        j["text"] = doc.text;
        out << j.dump() << '\n';
    }
    return out.str();
}

inline std::map<std::string, RawDocument> parse_threads_jsonl(const std::string& content) {
    std::map<std::string, RawDocument> threads;
    for (const auto& line : parse_lines(content)) {
        if (line.empty()) continue;
        const nlohmann::json j = nlohmann::json::parse(line);
        RawDocument doc;
        doc.doc_id = j.at("id").get<std::string>();
        doc.kind = DocKind::thread;
        doc.text = j.at("text").get<std::string>();
        threads.emplace(doc.doc_id, std::move(doc));
    }
    return threads;
}

inline std::string vocab_tsv(const Vocabulary& vocab) {
    std::ostringstream out;
    write_vocabulary(vocab, out);
    return out.str();
}

inline std::string iso8601_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buffer[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buffer;
}

} // namespace detail

/// Writes the bundle directory. All files except build_info.json are
/// byte-deterministic functions of the bundle contents; meta.json lists
/// their digests and its own digest becomes the bundle digest. On
/// failure the partially written directory is removed.
inline void save_bundle(AnalysisBundle& bundle, const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    if (fs::exists(root)) {
        // refuse to clobber a directory that is not a bundle
        if (!fs::is_directory(root) ||
            (!fs::is_empty(root) && !fs::exists(root / "meta.json")))
            throw std::runtime_error("output directory exists and is not a bundle: " + dir);
        fs::remove_all(root);
    }
    fs::create_directories(root);

    try {
        std::map<std::string, std::string> digests;
        auto put = [&](const std::string& name, const std::string& content) {
            detail::write_text_file(root / name, content, &digests);
        };

        put("prep_stopwords.txt", detail::sorted_lines(bundle.prep.stoplist));
        {
            std::vector<std::pair<std::string, std::string>> lemmas(
                bundle.prep.lemma_lexicon.begin(), bundle.prep.lemma_lexicon.end());
            std::sort(lemmas.begin(), lemmas.end());
            std::string out;
            for (const auto& [surface, lemma] : lemmas) out += surface + "\t" + lemma + "\n";
            put("prep_lemmas.tsv", out);
        }
        if (bundle.prep.noun_whitelist)
            put("prep_whitelist.txt", detail::sorted_lines(*bundle.prep.noun_whitelist));

        put("bigrams_proposals.tsv", detail::bigrams_tsv(bundle.proposal_bigrams));
        put("bigrams_threads.tsv", detail::bigrams_tsv(bundle.summary_context.bigrams));

        put("vocab_proposals.tsv", detail::vocab_tsv(bundle.proposal_model.vocab));
        put("docs_proposals.txt", detail::doc_ids_lines(bundle.proposal_model.doc_ids));
        put("theta_proposals.mat", detail::matrix_bytes(bundle.proposal_model.theta));
        put("phi_proposals.mat", detail::matrix_bytes(bundle.proposal_model.phi));

        if (bundle.has_user_model) {
            put("vocab_users.tsv", detail::vocab_tsv(bundle.user_model.vocab));
            put("docs_users.txt", detail::doc_ids_lines(bundle.user_model.doc_ids));
            put("theta_users.mat", detail::matrix_bytes(bundle.user_model.theta));
            put("phi_users.mat", detail::matrix_bytes(bundle.user_model.phi));
            put("neighbors_users.jsonl", detail::neighbors_jsonl_string(bundle.user_neighbors));
        }

        put("topics.json", detail::topics_json(bundle.topics));
        put("tags.jsonl", detail::tags_jsonl_string(bundle.tags));
        put("neighbors_proposals.jsonl",
            detail::neighbors_jsonl_string(bundle.proposal_neighbors));
        put("threads.jsonl", detail::threads_jsonl_string(bundle.threads));

        nlohmann::json meta;
        meta["format_version"] = bundle.format_version;
        meta["corpus_digest"] = bundle.corpus_digest;
        meta["config"] = bundle.config;
        meta["prep"] = {{"min_token_length", bundle.prep.min_token_length},
                        {"bigram_min_count", bundle.prep.bigram_min_count},
                        {"bigram_score_threshold", bundle.prep.bigram_score_threshold},
                        {"has_noun_whitelist", bundle.prep.noun_whitelist.has_value()}};
        meta["proposal_model"] = detail::model_meta(bundle.proposal_model);
        meta["user_model"] =
            bundle.has_user_model ? detail::model_meta(bundle.user_model) : nlohmann::json();
        meta["insights"] = {{"neighbors", bundle.insights.neighbors_k},
                            {"topic_terms", bundle.insights.topic_terms},
                            {"tags_per_doc", bundle.insights.tags_per_doc}};
        meta["summarize"] = {
            {"method", to_string(bundle.summarize_defaults.method)},
            {"sentences", bundle.summarize_defaults.sentences},
            {"embeddings", bundle.summarize_defaults.embeddings_path},
            {"pagerank",
             {{"damping", bundle.summarize_defaults.pagerank.damping},
              {"tolerance", bundle.summarize_defaults.pagerank.tolerance},
              {"max_iterations", bundle.summarize_defaults.pagerank.max_iterations}}}};
        meta["files"] = digests;
        const std::string meta_text = meta.dump(2) + "\n";
        detail::write_text_file(root / "meta.json", meta_text, nullptr);
        bundle.bundle_digest = digest_hex(meta_text);

        nlohmann::json info;
        info["created_at"] = detail::iso8601_now();
        info["stages"] = nlohmann::json::array();
        for (const auto& t : bundle.timings)
            info["stages"].push_back({{"stage", t.stage}, {"seconds", t.seconds}});
        detail::write_text_file(root / "build_info.json", info.dump(2) + "\n", nullptr);
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove_all(root, ec);
        throw;
    }
}

/// Loads and verifies a bundle directory: format version first, then
/// every artifact's digest against meta.json, then the artifacts.
inline AnalysisBundle load_bundle(const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    const std::string meta_text = detail::read_text_file(root / "meta.json");
    const nlohmann::json meta = nlohmann::json::parse(meta_text);

    AnalysisBundle bundle;
    bundle.format_version = meta.at("format_version").get<int>();
    if (bundle.format_version != kBundleVersion)
        throw std::runtime_error("unsupported bundle format version " +
                                 std::to_string(bundle.format_version) + " (expected " +
                                 std::to_string(kBundleVersion) + ")");
    bundle.bundle_digest = digest_hex(meta_text);
    bundle.corpus_digest = meta.at("corpus_digest").get<std::string>();
    bundle.config = meta.at("config");

    std::map<std::string, std::string> contents;
    for (const auto& [name, digest] : meta.at("files").items()) {
        std::string data = detail::read_text_file(root / name);
        const std::string actual = digest_hex(data);
        if (actual != digest.get<std::string>())
            throw std::runtime_error("bundle digest mismatch for " + name + ": expected " +
                                     digest.get<std::string>() + ", got " + actual);
        contents.emplace(name, std::move(data));
    }
    auto content = [&](const std::string& name) -> const std::string& {
        auto it = contents.find(name);
        if (it == contents.end())
            throw std::runtime_error("bundle is missing required file: " + name);
        return it->second;
    };

    const auto& prep_meta = meta.at("prep");
    bundle.prep.min_token_length = prep_meta.at("min_token_length").get<std::size_t>();
    bundle.prep.bigram_min_count = prep_meta.at("bigram_min_count").get<std::uint32_t>();
    bundle.prep.bigram_score_threshold = prep_meta.at("bigram_score_threshold").get<double>();
    for (auto& line : detail::parse_lines(content("prep_stopwords.txt")))
        if (!line.empty()) bundle.prep.stoplist.insert(std::move(line));
    for (const auto& line : detail::parse_lines(content("prep_lemmas.tsv"))) {
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error("bundle prep_lemmas.tsv: malformed line");
        bundle.prep.lemma_lexicon[line.substr(0, tab)] = line.substr(tab + 1);
    }
    if (prep_meta.at("has_noun_whitelist").get<bool>()) {
        std::unordered_set<std::string> whitelist;
        for (auto& line : detail::parse_lines(content("prep_whitelist.txt")))
            if (!line.empty()) whitelist.insert(std::move(line));
        bundle.prep.noun_whitelist = std::move(whitelist);
    }

    bundle.proposal_bigrams =
        detail::parse_bigrams_tsv(content("bigrams_proposals.tsv"),
                                  bundle.prep.bigram_min_count,
                                  bundle.prep.bigram_score_threshold);

    detail::model_from_meta(meta.at("proposal_model"), bundle.proposal_model);
    {
        std::istringstream vocab_in(content("vocab_proposals.tsv"));
        bundle.proposal_model.vocab = read_vocabulary(
            vocab_in, meta.at("proposal_model").at("vocab_corpus_docs").get<std::size_t>());
        bundle.proposal_model.doc_ids = detail::parse_lines(content("docs_proposals.txt"));
        std::istringstream theta_in(content("theta_proposals.mat"));
        bundle.proposal_model.theta = read_matrix(theta_in, "theta_proposals.mat");
        std::istringstream phi_in(content("phi_proposals.mat"));
        bundle.proposal_model.phi = read_matrix(phi_in, "phi_proposals.mat");
    }

    bundle.has_user_model = !meta.at("user_model").is_null();
    if (bundle.has_user_model) {
        detail::model_from_meta(meta.at("user_model"), bundle.user_model);
        std::istringstream vocab_in(content("vocab_users.tsv"));
        bundle.user_model.vocab = read_vocabulary(
            vocab_in, meta.at("user_model").at("vocab_corpus_docs").get<std::size_t>());
        bundle.user_model.doc_ids = detail::parse_lines(content("docs_users.txt"));
        std::istringstream theta_in(content("theta_users.mat"));
        bundle.user_model.theta = read_matrix(theta_in, "theta_users.mat");
        std::istringstream phi_in(content("phi_users.mat"));
        bundle.user_model.phi = read_matrix(phi_in, "phi_users.mat");
        bundle.user_neighbors = detail::parse_neighbors_jsonl(content("neighbors_users.jsonl"));
    }

    bundle.topics = detail::parse_topics_json(content("topics.json"));
    bundle.tags = detail::parse_tags_jsonl(content("tags.jsonl"));
    bundle.proposal_neighbors =
        detail::parse_neighbors_jsonl(content("neighbors_proposals.jsonl"));
    bundle.threads = detail::parse_threads_jsonl(content("threads.jsonl"));

    const auto& insights_meta = meta.at("insights");
    bundle.insights.neighbors_k = insights_meta.at("neighbors").get<std::size_t>();
    bundle.insights.topic_terms = insights_meta.at("topic_terms").get<std::size_t>();
    bundle.insights.tags_per_doc = insights_meta.at("tags_per_doc").get<std::size_t>();

    const auto& sum_meta = meta.at("summarize");
    bundle.summarize_defaults.method = parse_summary_method(sum_meta.at("method").get<std::string>());
    bundle.summarize_defaults.sentences = sum_meta.at("sentences").get<std::size_t>();
    bundle.summarize_defaults.embeddings_path = sum_meta.at("embeddings").get<std::string>();
    bundle.summarize_defaults.pagerank.damping =
        sum_meta.at("pagerank").at("damping").get<double>();
    bundle.summarize_defaults.pagerank.tolerance =
        sum_meta.at("pagerank").at("tolerance").get<double>();
    bundle.summarize_defaults.pagerank.max_iterations =
        sum_meta.at("pagerank").at("max_iterations").get<std::size_t>();

    const BigramTable thread_bigrams =
        detail::parse_bigrams_tsv(content("bigrams_threads.tsv"), bundle.prep.bigram_min_count,
                                  bundle.prep.bigram_score_threshold);
    bundle.summary_context = build_summary_context(bundle.threads, bundle.prep, &thread_bigrams);

    return bundle;
}

} // namespace agora
