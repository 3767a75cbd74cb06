// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 Agora Contributors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "agora/corpus.hpp"
#include "agora/textprep.hpp"
#include "agora/vectorize.hpp"

namespace agora {

struct Sentence {
    std::size_t index = 0; // position within the thread, 0-based
    std::string text;      // original wording, trimmed
    std::vector<std::string> tokens;
};

namespace detail {

inline const std::unordered_set<std::string>& sentence_abbreviations() {
    // Words (lowercased, no dot) after which a period does not end a
    // sentence. Single letters are treated as initials separately.
    static const std::unordered_set<std::string> abbrevs = {
        "sr",   "sra",  "srta", "dr",  "dra", "prof", "lic", "ing",
        "av",   "avda", "pza",  "c",   "cl",  "ctra", "tel", "fax",
        "num",  "núm",  "pag",  "pág", "art", "cap",  "ud",  "uds",
        "vd",   "vds",  "dña",  "ej",  "etc", "sres", "sras"};
    return abbrevs;
}

inline bool is_upper_or_digit_start(std::string_view s, std::size_t i) {
    std::size_t pos = i;
    bool valid = true;
    const char32_t cp = decode_utf8(s, pos, valid);
    if (cp >= 'A' && cp <= 'Z') return true;
    if (cp >= '0' && cp <= '9') return true;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return true; // Latin-1 uppercase
    if (cp == 0xA1 || cp == 0xBF) return true;               // ¡ ¿ open a sentence
    return false;
}

inline std::string trim_copy(std::string_view s) {
    std::size_t begin = 0, end = s.size();
    while (begin < end && ascii_space(s[begin])) ++begin;
    while (end > begin && ascii_space(s[end - 1])) --end;
    return std::string(s.substr(begin, end - begin));
}

// The lowercased word immediately preceding position `i` (exclusive).
inline std::string word_before(std::string_view s, std::size_t i) {
    std::size_t end = i;
    std::size_t begin = end;
    while (begin > 0 && !ascii_space(s[begin - 1]) && s[begin - 1] != '.') --begin;
    std::string word(s.substr(begin, end - begin));
    for (char& c : word)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return word;
}

} // namespace detail

/// Rule-based segmentation: sentences end at ., !, ? or … followed by
/// whitespace and an uppercase letter, digit or inverted punctuation
/// mark; a lone period after a known abbreviation or a single-letter
/// initial does not split; newlines (comment boundaries) always split.
/// Whitespace-only fragments are dropped.
inline std::vector<Sentence> split_sentences(std::string_view text) {
    std::vector<Sentence> sentences;
    auto flush = [&](std::size_t begin, std::size_t end) {
        std::string t = detail::trim_copy(text.substr(begin, end - begin));
        if (!t.empty()) sentences.push_back({sentences.size(), std::move(t), {}});
    };

    std::size_t start = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (c == '\n') {
            flush(start, i);
            start = ++i;
            continue;
        }
        const bool ellipsis = (static_cast<unsigned char>(c) == 0xE2 && i + 2 < text.size() &&
                               static_cast<unsigned char>(text[i + 1]) == 0x80 &&
                               static_cast<unsigned char>(text[i + 2]) == 0xA6);
        if (c != '.' && c != '!' && c != '?' && !ellipsis) {
            ++i;
            continue;
        }

        // Swallow the whole punctuation run ("...", "?!", "…").
        const std::size_t punct_start = i;
        std::size_t run_length = 0;
        bool only_periods = true;
        while (i < text.size()) {
            if (text[i] == '.') { ++run_length; ++i; continue; }
            if (text[i] == '!' || text[i] == '?') {
                ++run_length;
                only_periods = false;
                ++i;
                continue;
            }
            if (static_cast<unsigned char>(text[i]) == 0xE2 && i + 2 < text.size() &&
                static_cast<unsigned char>(text[i + 1]) == 0x80 &&
                static_cast<unsigned char>(text[i + 2]) == 0xA6) {
                ++run_length;
                only_periods = false;
                i += 3;
                continue;
            }
            break;
        }
        std::size_t after_punct = i;
        while (after_punct < text.size() &&
               (text[after_punct] == ')' || text[after_punct] == '"' ||
                text[after_punct] == '\'')) // trailing close marks stay attached
            ++after_punct;

        std::size_t next = after_punct;
        bool saw_space = false;
        while (next < text.size() && (text[next] == ' ' || text[next] == '\t' ||
                                      text[next] == '\r')) {
            saw_space = true;
            ++next;
        }
        if (!saw_space || next >= text.size()) { i = after_punct; continue; }
        if (!detail::is_upper_or_digit_start(text, next)) { i = after_punct; continue; }
        if (run_length == 1 && only_periods) { // lone period: honor abbreviations and initials
            const std::string word = detail::word_before(text, punct_start);
            if (word.size() == 1 || detail::sentence_abbreviations().count(word)) {
                i = after_punct;
                continue;
            }
        }
        flush(start, after_punct);
        start = next;
        i = next;
    }
    flush(start, text.size());
    return sentences;
}

/// Tokenizes one sentence with the corpus pipeline: normalize, split,
/// stoplist/lemma filtering, then the thread corpus's bigram merges.
inline void tokenize_sentence(Sentence& sentence, const PrepConfig& prep,
                              const BigramTable& bigrams) {
    const std::vector<std::string> tokens =
        filter_tokens(tokenize(normalize_text(sentence.text), prep.min_token_length), prep);
    sentence.tokens = apply_bigrams(tokens, bigrams);
}

/// Shared context for scoring sentences: the comment-thread corpus in
/// TF-IDF form (each proposal's whole thread is one document), plus the
/// preprocessing state needed to tokenize individual sentences the same
/// way the threads were tokenized.
struct SummaryContext {
    Vocabulary vocab;
    DocTermMatrix tfidf; // rows aligned with thread_ids
    BigramTable bigrams;
    PrepConfig prep;
    std::vector<std::string> thread_ids;
    std::vector<std::string> thread_texts;
    std::unordered_map<std::string, std::size_t> row_of;

    bool has_thread(const std::string& proposal_id) const { return row_of.count(proposal_id) > 0; }
};

/// Threads-as-documents TF-IDF. Pruning is disabled (min_df = 1) so
/// sentence scores keep every term that appears anywhere in the threads.
/// Passing `fixed_bigrams` reuses a previously learned table instead of
/// learning one, which lets a persisted context rebuild exactly.
inline SummaryContext build_summary_context(const std::map<std::string, RawDocument>& threads,
                                            const PrepConfig& prep,
                                            const BigramTable* fixed_bigrams = nullptr) {
    std::vector<RawDocument> docs;
    docs.reserve(threads.size());
    for (const auto& [pid, doc] : threads) docs.push_back(doc);

    SummaryContext ctx;
    ctx.prep = prep;
    std::vector<TokenDocument> token_docs;
    if (fixed_bigrams != nullptr) {
        ctx.bigrams = *fixed_bigrams;
        token_docs.reserve(docs.size());
        for (const auto& doc : docs) {
            TokenDocument td;
            td.doc_id = doc.doc_id;
            td.tokens = apply_bigrams(
                filter_tokens(tokenize(normalize_text(doc.text), prep.min_token_length), prep),
                ctx.bigrams);
            token_docs.push_back(std::move(td));
        }
    } else {
        auto pre = preprocess_corpus(docs, prep);
        ctx.bigrams = std::move(pre.bigrams);
        token_docs = std::move(pre.docs);
    }
    const bool any_tokens = std::any_of(token_docs.begin(), token_docs.end(),
                                        [](const TokenDocument& d) { return !d.tokens.empty(); });
    if (any_tokens) ctx.vocab = build_vocabulary(token_docs, 1, 1.0);
    ctx.tfidf = build_tfidf(token_docs, ctx.vocab); // empty vocab → all-zero rows
    ctx.thread_ids.reserve(docs.size());
    ctx.thread_texts.reserve(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        ctx.thread_ids.push_back(docs[i].doc_id);
        ctx.thread_texts.push_back(std::move(docs[i].text));
        ctx.row_of.emplace(ctx.thread_ids.back(), i);
    }
    return ctx;
}

/// score(s) = Σ over the sentence's tokens of that token's TF-IDF value
/// in the thread's row; each occurrence counts.
inline std::vector<double> score_sentences_tfidf(const std::vector<Sentence>& sentences,
                                                 const SummaryContext& ctx,
                                                 std::size_t thread_row) {
    std::vector<double> scores;
    scores.reserve(sentences.size());
    for (const auto& sentence : sentences) {
        double score = 0.0;
        for (const auto& token : sentence.tokens) {
            auto it = ctx.vocab.index.find(token);
            if (it == ctx.vocab.index.end()) continue;
            score += ctx.tfidf.X.coeff(static_cast<Eigen::Index>(thread_row),
                                       static_cast<Eigen::Index>(it->second));
        }
        scores.push_back(score);
    }
    return scores;
}

struct EmbeddingTable {
    std::size_t dim = 0;
    std::unordered_map<std::string, Eigen::VectorXd> vectors;
    std::size_t duplicate_warnings = 0;
};

/// Word-vector text format: one "word v1 v2 ... vdim" line per entry.
/// expected_dim = 0 infers the dimension from the first line; any later
/// line with a different width is an error naming the line. Duplicate
/// words keep the last entry and count a warning. Words are normalized
/// with the corpus rules so lookups match preprocessed tokens.
inline EmbeddingTable load_embeddings(const std::string& path, std::size_t expected_dim = 0) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open embeddings file: " + path);

    EmbeddingTable table;
    table.dim = expected_dim;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string word;
        fields >> word;
        std::vector<double> values;
        double v = 0.0;
        while (fields >> v) values.push_back(v);
        if (!fields.eof())
            throw std::runtime_error("embeddings line " + std::to_string(line_no) +
                                     ": malformed float");
        if (table.dim == 0) table.dim = values.size();
        if (values.size() != table.dim)
            throw std::runtime_error("embeddings line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(table.dim) + " values, got " +
                                     std::to_string(values.size()));
        Eigen::VectorXd vec = Eigen::Map<Eigen::VectorXd>(values.data(),
                                                          static_cast<Eigen::Index>(values.size()));
        const std::string normalized = normalize_text(word);
        auto [it, inserted] = table.vectors.insert_or_assign(normalized, std::move(vec));
        if (!inserted) ++table.duplicate_warnings;
    }
    return table;
}

/// Unweighted mean of the vectors of in-table tokens; absent when no
/// token has a vector.
inline std::optional<Eigen::VectorXd> sentence_vector(const Sentence& sentence,
                                                      const EmbeddingTable& table) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(table.dim));
    std::size_t found = 0;
    for (const auto& token : sentence.tokens) {
        auto it = table.vectors.find(token);
        if (it == table.vectors.end()) continue;
        sum += it->second;
        ++found;
    }
    if (found == 0) return std::nullopt;
    return sum / static_cast<double>(found);
}

struct SimilarityGraph {
    Eigen::MatrixXd weights;          // node×node, symmetric, zero diagonal
    std::vector<std::size_t> nodes;   // sentence index per node
    std::vector<std::size_t> excluded; // sentences without vectors

    bool too_small() const { return nodes.size() < 2; }
};

/// Edge weights max(0, cosine similarity) between sentence mean vectors.
/// Sentences without vectors are excluded and recorded.
inline SimilarityGraph build_similarity_graph(const std::vector<Sentence>& sentences,
                                              const EmbeddingTable& table) {
    SimilarityGraph graph;
    std::vector<Eigen::VectorXd> vectors;
    for (const auto& s : sentences) {
        auto vec = sentence_vector(s, table);
        if (vec) {
            graph.nodes.push_back(s.index);
            vectors.push_back(std::move(*vec));
        } else {
            graph.excluded.push_back(s.index);
        }
    }
    const auto n = static_cast<Eigen::Index>(vectors.size());
    graph.weights = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double denom = vectors[static_cast<std::size_t>(i)].norm() *
                                 vectors[static_cast<std::size_t>(j)].norm();
            double w = 0.0;
            if (denom > 0.0)
                w = std::max(0.0, vectors[static_cast<std::size_t>(i)]
                                          .dot(vectors[static_cast<std::size_t>(j)]) / denom);
            graph.weights(i, j) = w;
            graph.weights(j, i) = w;
        }
    }
    return graph;
}

struct PageRankParams {
    double damping = 0.85;
    double tolerance = 1e-8; // L1 change between iterates
    std::size_t max_iterations = 200;

    void validate() const {
        if (damping <= 0.0 || damping >= 1.0)
            throw std::invalid_argument("pagerank damping must lie in (0, 1)");
    }
};

struct PageRankResult {
    Eigen::VectorXd scores;
    bool converged = false;
    std::size_t iterations = 0;
};

/// Power iteration for the damped random walk
///   p_i ← (1−d)/n + d·(Σ_j w_ji p_j / strength_j + Σ_{dangling j} p_j / n),
/// where strength_j is node j's total outgoing weight. Scores sum to 1.
inline PageRankResult pagerank(const Eigen::MatrixXd& weights, const PageRankParams& params = {}) {
    params.validate();
    const Eigen::Index n = weights.rows();
    PageRankResult result;
    if (n == 0) return result;

    const Eigen::VectorXd strength = weights.rowwise().sum();
    const double d = params.damping;
    const double teleport = (1.0 - d) / static_cast<double>(n);

    Eigen::VectorXd p = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    Eigen::VectorXd scaled(n);
    for (std::size_t iter = 1; iter <= params.max_iterations; ++iter) {
        double dangling_mass = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (strength(j) > 0.0) {
                scaled(j) = p(j) / strength(j);
            } else {
                scaled(j) = 0.0;
                dangling_mass += p(j);
            }
        }
        Eigen::VectorXd next = weights.transpose() * scaled;
        next.array() += dangling_mass / static_cast<double>(n);
        next = (teleport + d * next.array()).matrix();
        const double change = (next - p).lpNorm<1>();
        p = std::move(next);
        result.iterations = iter;
        if (change < params.tolerance) {
            result.converged = true;
            break;
        }
    }
    result.scores = std::move(p);
    return result;
}

enum class SummaryMethod { tfidf, textrank };

inline std::string to_string(SummaryMethod method) {
    return method == SummaryMethod::tfidf ? "tfidf" : "textrank";
}

inline SummaryMethod parse_summary_method(const std::string& name) {
    if (name == "tfidf") return SummaryMethod::tfidf;
    if (name == "textrank") return SummaryMethod::textrank;
    throw std::invalid_argument("unknown summary method: " + name +
                                " (expected tfidf or textrank)");
}

struct SummarySentence {
    std::size_t index = 0;
    std::string text;
    double score = 0.0;
};

struct Summary {
    std::string proposal_id;
    SummaryMethod method = SummaryMethod::tfidf; // method that produced the scores
    std::size_t n_requested = 0;
    bool fallback = false; // textrank requested but graph too small
    std::vector<SummarySentence> sentences; // document order
};

namespace detail {

// Rank by (score descending, index ascending), keep n, emit in document
// order.
inline std::vector<SummarySentence> select_top(const std::vector<Sentence>& sentences,
                                               const std::vector<double>& scores, std::size_t n) {
    std::vector<std::size_t> order(sentences.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto better = [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return sentences[a].index < sentences[b].index;
    };
    const std::size_t take = std::min(n, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                      order.end(), better);
    order.resize(take);
    std::sort(order.begin(), order.end()); // document order
    std::vector<SummarySentence> selected;
    selected.reserve(take);
    for (std::size_t i : order)
        selected.push_back({sentences[i].index, sentences[i].text, scores[i]});
    return selected;
}

} // namespace detail

/// Minimum token count for a sentence to participate in textrank
/// ranking (noise guard; such sentences remain eligible for tfidf).
inline constexpr std::size_t kTextrankMinTokens = 3;

/// Scores a prepared thread's sentences by the requested method and
/// returns the top n in document order. textrank falls back to tfidf
/// exactly when fewer than two sentences are embeddable (≥ 3 tokens and
/// at least one in-table token).
inline Summary summarize_thread(const SummaryContext& ctx, const std::string& proposal_id,
                                SummaryMethod method, std::size_t n,
                                const EmbeddingTable* table = nullptr,
                                const PageRankParams& pr_params = {}) {
    auto row_it = ctx.row_of.find(proposal_id);
    if (row_it == ctx.row_of.end())
        throw std::out_of_range("no comment thread for proposal: " + proposal_id);
    const std::size_t row = row_it->second;

    Summary summary;
    summary.proposal_id = proposal_id;
    summary.method = method;
    summary.n_requested = n;

    std::vector<Sentence> sentences = split_sentences(ctx.thread_texts[row]);
    if (sentences.empty()) return summary;
    for (auto& sentence : sentences) tokenize_sentence(sentence, ctx.prep, ctx.bigrams);

    std::vector<double> scores;
    if (method == SummaryMethod::textrank) {
        if (table == nullptr)
            throw std::invalid_argument("textrank summarization requires an embedding table");
        std::vector<Sentence> ranked; // the noise guard trims short sentences
        for (const auto& s : sentences)
            if (s.tokens.size() >= kTextrankMinTokens) ranked.push_back(s);
        const SimilarityGraph graph = build_similarity_graph(ranked, *table);
        if (graph.too_small()) {
            summary.method = SummaryMethod::tfidf;
            summary.fallback = true;
            scores = score_sentences_tfidf(sentences, ctx, row);
        } else {
            const PageRankResult pr = pagerank(graph.weights, pr_params);
            scores.assign(sentences.size(), 0.0);
            std::unordered_map<std::size_t, std::size_t> position; // sentence index -> row in scores
            for (std::size_t i = 0; i < sentences.size(); ++i) position[sentences[i].index] = i;
            for (std::size_t node = 0; node < graph.nodes.size(); ++node)
                scores[position[graph.nodes[node]]] = pr.scores(static_cast<Eigen::Index>(node));
        }
    } else {
        scores = score_sentences_tfidf(sentences, ctx, row);
    }

    summary.sentences = detail::select_top(sentences, scores, n);
    return summary;
}

/// {"proposal_id", "method", "n", "sentences": [{"index", "text",
/// "score"}], "fallback"}
inline nlohmann::json summary_to_json(const Summary& summary) {
    nlohmann::json j;
    j["proposal_id"] = summary.proposal_id;
    j["method"] = to_string(summary.method);
    j["n"] = summary.n_requested;
    j["fallback"] = summary.fallback;
    j["sentences"] = nlohmann::json::array();
    for (const auto& s : summary.sentences)
        j["sentences"].push_back({{"index", s.index}, {"text", s.text}, {"score", s.score}});
    return j;
}

} // namespace agora
