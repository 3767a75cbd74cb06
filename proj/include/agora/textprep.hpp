// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 Agora Contributors

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace agora {

struct TokenDocument {
    std::string doc_id;
    std::vector<std::string> tokens;
};

struct PrepConfig {
    std::unordered_set<std::string> stoplist;
    std::unordered_map<std::string, std::string> lemma_lexicon; // empty = disabled
    std::optional<std::unordered_set<std::string>> noun_whitelist;
    std::uint32_t bigram_min_count = 20;
    double bigram_score_threshold = 10.0;
    std::size_t min_token_length = 2;

    void validate() const {
        if (bigram_min_count < 1) throw std::invalid_argument("bigram_min_count must be positive");
        if (bigram_score_threshold < 0) throw std::invalid_argument("bigram_score_threshold must be nonnegative");
        if (min_token_length < 1) throw std::invalid_argument("min_token_length must be positive");
    }
};

struct NormalizeCounters {
    std::uint64_t invalid_bytes = 0;
};

namespace detail {

// Decodes one UTF-8 codepoint starting at s[i]; advances i. Invalid byte
// sequences consume one byte, yield U+FFFD, and clear `valid`.
inline char32_t decode_utf8(std::string_view s, std::size_t& i, bool& valid) {
    valid = true;
    const unsigned char b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; }
    else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; }
    else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; }
    else { ++i; valid = false; return 0xFFFD; }
    if (i + static_cast<std::size_t>(len) > s.size()) { ++i; valid = false; return 0xFFFD; }
    for (int k = 1; k < len; ++k) {
        const unsigned char b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
        if ((b & 0xC0) != 0x80) { ++i; valid = false; return 0xFFFD; }
        cp = (cp << 6) | (b & 0x3F);
    }
    // reject overlong encodings
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000)) {
        ++i;
        valid = false;
        return 0xFFFD;
    }
    i += static_cast<std::size_t>(len);
    return cp;
}

inline void encode_utf8(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// Base letters for Latin Extended-A (U+0100..U+017F), one char per codepoint.
// '2' marks the digraphs IJ/ij (-> "ij") and OE/oe (-> "oe").
inline const char* latin_ext_a_base() {
    return "aaaaaa" "cccccccc" "dddd" "eeeeeeeeee" "gggggggg" "hhhh"
           "iiiiiiiiii" "22" "jj" "kkk" "llllllllll" "nnnnnnnnn"
           "oooooo" "22" "rrrrrr" "ssssssss" "tttttt" "uuuuuuuuuuuu"
           "ww" "yyy" "zzzzzz" "s";
}

// Folds one codepoint into lowercase ASCII where a Latin base letter exists,
// drops combining marks, maps punctuation to a space, and passes unknown
// scripts through unchanged.
inline void fold_codepoint(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        if ((cp >= 'a' && cp <= 'z') || (cp >= '0' && cp <= '9')) out.push_back(static_cast<char>(cp));
        else if (cp >= 'A' && cp <= 'Z') out.push_back(static_cast<char>(cp - 'A' + 'a'));
        else out.push_back(' ');
        return;
    }
    if (cp >= 0x300 && cp <= 0x36F) return; // combining diacritical marks
    if (cp >= 0x80 && cp <= 0x9F) { out.push_back(' '); return; } // C1 controls
    if (cp >= 0xA0 && cp <= 0xBF) {
        if (cp == 0xAA) out.push_back('a');       // feminine ordinal
        else if (cp == 0xBA) out.push_back('o');  // masculine ordinal
        else out.push_back(' ');
        return;
    }
    if (cp >= 0xC0 && cp <= 0xFF) {
        if (cp == 0xD7 || cp == 0xF7) { out.push_back(' '); return; }
        char32_t c = (cp >= 0xE0) ? cp - 0x20 : cp; // fold case within the block
        if (cp == 0xFF) c = 0xDD;                   // y with diaeresis
        switch (c) {
            case 0xC6: out += "ae"; return;
            case 0xDE: out += "th"; return;
            case 0xDF: out += "ss"; return; // sharp s has no uppercase twin here
            case 0xC7: out.push_back('c'); return;
            case 0xD0: out.push_back('d'); return;
            case 0xD1: out.push_back('n'); return;
            case 0xDD: out.push_back('y'); return;
            default: break;
        }
        if (c <= 0xC5) out.push_back('a');
        else if (c <= 0xCB) out.push_back('e');
        else if (c <= 0xCF) out.push_back('i');
        else if (c <= 0xD8) out.push_back('o');
        else out.push_back('u');
        return;
    }
    if (cp >= 0x100 && cp <= 0x17F) {
        const char b = latin_ext_a_base()[cp - 0x100];
        if (b == '2') out += (cp <= 0x133) ? "ij" : "oe";
        else out.push_back(b);
        return;
    }
    if (cp >= 0x2000 && cp <= 0x206F) { out.push_back(' '); return; } // general punctuation
    if (cp == 0xFFFD) { out.push_back(' '); return; }
    encode_utf8(cp, out); // unknown script: keep as a word character
}

inline bool ascii_alnum(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

inline bool ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}

inline bool matches_at(std::string_view s, std::size_t i, std::string_view prefix) {
    if (i + prefix.size() > s.size()) return false;
    for (std::size_t k = 0; k < prefix.size(); ++k) {
        char a = s[i + k];
        if (a >= 'A' && a <= 'Z') a = static_cast<char>(a - 'A' + 'a');
        if (a != prefix[k]) return false;
    }
    return true;
}

// Strips <tag>s and URLs (http://, https://, www.) from raw text,
// replacing them with a space.
inline std::string strip_markup_and_urls(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    std::size_t i = 0;
    while (i < raw.size()) {
        const char c = raw[i];
        if (c == '<' && i + 1 < raw.size() &&
            (raw[i + 1] == '/' || raw[i + 1] == '!' ||
             (raw[i + 1] >= 'A' && raw[i + 1] <= 'Z') || (raw[i + 1] >= 'a' && raw[i + 1] <= 'z'))) {
            const std::size_t close = raw.find('>', i + 1);
            out.push_back(' ');
            i = (close == std::string_view::npos) ? raw.size() : close + 1;
            continue;
        }
        const bool at_word_start = (i == 0) || !ascii_alnum(raw[i - 1]);
        if (at_word_start && (matches_at(raw, i, "http://") || matches_at(raw, i, "https://") ||
                              matches_at(raw, i, "www."))) {
            while (i < raw.size() && !ascii_space(raw[i])) ++i;
            out.push_back(' ');
            continue;
        }
        out.push_back(c);
        ++i;
    }
    return out;
}

inline std::size_t codepoint_length(std::string_view token) {
    std::size_t n = 0;
    for (char c : token)
        if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
    return n;
}

} // namespace detail

/// Canonical text cleanup: HTML tags and URLs removed, Latin diacritics
/// folded to base letters, lowercased, punctuation reduced to single-space
/// token boundaries. Idempotent.
inline std::string normalize_text(std::string_view raw, NormalizeCounters* counters = nullptr) {
    const std::string stripped = detail::strip_markup_and_urls(raw);
    std::string folded;
    folded.reserve(stripped.size());
    std::size_t i = 0;
    while (i < stripped.size()) {
        bool valid = true;
        const char32_t cp = detail::decode_utf8(stripped, i, valid);
        if (!valid && counters) ++counters->invalid_bytes;
        detail::fold_codepoint(cp, folded);
    }
    // collapse whitespace runs and trim
    std::string out;
    out.reserve(folded.size());
    for (char c : folded) {
        if (c == ' ') {
            if (!out.empty() && out.back() != ' ') out.push_back(' ');
        } else {
            out.push_back(c);
        }
    }
    if (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

/// Splits normalized text on non-alphanumeric boundaries; drops tokens
/// shorter than `min_token_length` codepoints.
inline std::vector<std::string> tokenize(std::string_view text, std::size_t min_token_length = 2) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            if (detail::codepoint_length(current) >= min_token_length)
                tokens.push_back(current);
            current.clear();
        }
    };
    for (char c : text) {
        const unsigned char b = static_cast<unsigned char>(c);
        if (b >= 0x80 || detail::ascii_alnum(c)) current.push_back(c);
        else flush();
    }
    flush();
    return tokens;
}

/// Stopword removal, optional lemma-lexicon substitution, optional noun
/// whitelist. Tokens that violate the length or stoplist constraints after
/// lemma substitution are dropped as well.
inline std::vector<std::string> filter_tokens(const std::vector<std::string>& tokens,
                                              const PrepConfig& config) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& token : tokens) {
        if (config.stoplist.count(token)) continue;
        const std::string* term = &token;
        if (!config.lemma_lexicon.empty()) {
            auto it = config.lemma_lexicon.find(token);
            if (it != config.lemma_lexicon.end()) term = &it->second;
        }
        if (detail::codepoint_length(*term) < config.min_token_length) continue;
        if (term != &token && config.stoplist.count(*term)) continue;
        if (config.noun_whitelist && !config.noun_whitelist->count(*term)) continue;
        out.push_back(*term);
    }
    return out;
}

/// Corpus-level adjacent-pair collocations. A pair survives when its count
/// reaches `bigram_min_count` and
///   score(a,b) = (count(a,b) - min_count) * N_tokens / (count(a) * count(b))
/// reaches `bigram_score_threshold`.
struct BigramTable {
    std::map<std::pair<std::string, std::string>, double> scores;
    std::uint32_t min_count = 0;
    double score_threshold = 0.0;

    bool contains(const std::string& first, const std::string& second) const {
        return scores.count({first, second}) > 0;
    }
};

inline BigramTable learn_bigrams(const std::vector<TokenDocument>& docs, const PrepConfig& config) {
    BigramTable table;
    table.min_count = config.bigram_min_count;
    table.score_threshold = config.bigram_score_threshold;

    std::unordered_map<std::string, std::uint32_t> term_id;
    std::vector<std::uint64_t> term_count;
    std::vector<const std::string*> term_name;
    std::uint64_t total_tokens = 0;
    auto intern = [&](const std::string& t) {
        auto [it, inserted] = term_id.try_emplace(t, static_cast<std::uint32_t>(term_count.size()));
        if (inserted) {
            term_count.push_back(0);
            term_name.push_back(&it->first);
        }
        return it->second;
    };

    std::unordered_map<std::uint64_t, std::uint64_t> pair_count;
    for (const auto& doc : docs) {
        std::uint32_t prev = 0;
        bool has_prev = false;
        for (const auto& token : doc.tokens) {
            const std::uint32_t id = intern(token);
            ++term_count[id];
            ++total_tokens;
            if (has_prev)
                ++pair_count[(static_cast<std::uint64_t>(prev) << 32) | id];
            prev = id;
            has_prev = true;
        }
    }

    for (const auto& [key, count] : pair_count) {
        if (count < config.bigram_min_count) continue;
        const std::uint32_t a = static_cast<std::uint32_t>(key >> 32);
        const std::uint32_t b = static_cast<std::uint32_t>(key & 0xFFFFFFFFULL);
        const double score = (static_cast<double>(count) - config.bigram_min_count) *
                             static_cast<double>(total_tokens) /
                             (static_cast<double>(term_count[a]) * static_cast<double>(term_count[b]));
        if (score >= config.bigram_score_threshold)
            table.scores[{*term_name[a], *term_name[b]}] = score;
    }
    return table;
}

/// Single greedy left-to-right pass; merged pairs become "first_second".
/// No overlapping merges and no second pass, so no trigrams can form.
inline std::vector<std::string> apply_bigrams(const std::vector<std::string>& tokens,
                                              const BigramTable& table) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    std::size_t i = 0;
    while (i < tokens.size()) {
        if (i + 1 < tokens.size() && table.contains(tokens[i], tokens[i + 1])) {
            out.push_back(tokens[i] + "_" + tokens[i + 1]);
            i += 2;
        } else {
            out.push_back(tokens[i]);
            ++i;
        }
    }
    return out;
}

struct PreprocessResult {
    std::vector<TokenDocument> docs;
    BigramTable bigrams;
    std::vector<std::string> empty_doc_ids; // emptied by filtering, retained and flagged
    std::uint64_t invalid_bytes = 0;
};

/// Full deterministic pipeline over (doc_id, text) pairs:
/// normalize -> tokenize -> filter -> learn_bigrams (corpus) -> apply_bigrams.
template <typename Range>
PreprocessResult preprocess_corpus(const Range& raw_docs, const PrepConfig& config) {
    config.validate();
    PreprocessResult result;
    NormalizeCounters counters;
    result.docs.reserve(raw_docs.size());
    for (const auto& raw : raw_docs) {
        TokenDocument doc;
        doc.doc_id = raw.doc_id;
        doc.tokens = filter_tokens(tokenize(normalize_text(raw.text, &counters),
                                            config.min_token_length),
                                   config);
        result.docs.push_back(std::move(doc));
    }
    result.bigrams = learn_bigrams(result.docs, config);
    for (auto& doc : result.docs) {
        doc.tokens = apply_bigrams(doc.tokens, result.bigrams);
        if (doc.tokens.empty()) result.empty_doc_ids.push_back(doc.doc_id);
    }
    result.invalid_bytes = counters.invalid_bytes;
    return result;
}

/// Stoplist file: one term per line, UTF-8; entries are normalized on load.
inline std::unordered_set<std::string> load_stoplist(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open stoplist: " + path);
    std::unordered_set<std::string> stoplist;
    std::string line;
    while (std::getline(in, line)) {
        const std::string term = normalize_text(line);
        if (!term.empty()) stoplist.insert(term);
    }
    return stoplist;
}

/// Lemma lexicon: tab-separated "surface<TAB>lemma", one entry per line.
inline std::unordered_map<std::string, std::string> load_lemma_lexicon(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open lemma lexicon: " + path);
    std::unordered_map<std::string, std::string> lexicon;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error("lemma lexicon line " + std::to_string(line_no) +
                                     ": expected surface<TAB>lemma");
        const std::string surface = normalize_text(line.substr(0, tab));
        const std::string lemma = normalize_text(line.substr(tab + 1));
        if (!surface.empty() && !lemma.empty()) lexicon[surface] = lemma;
    }
    return lexicon;
}

/// Noun whitelist: one lemma per line, UTF-8.
inline std::unordered_set<std::string> load_noun_whitelist(const std::string& path) {
    return load_stoplist(path);
}

} // namespace agora
