// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 Agora Contributors

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "agora/csv.hpp"
#include "agora/digest.hpp"
#include "agora/textprep.hpp"

namespace agora {

struct VoteCounts {
    std::uint64_t total = 0;
    std::uint64_t up = 0;
    std::uint64_t down = 0;
};

struct Proposal {
    std::string id;
    std::string title;
    std::string description;
    std::string summary;
    std::string author_id;
    std::optional<std::string> created_at; // ISO 8601 string, compared lexicographically
    std::optional<VoteCounts> votes;
};

struct Comment {
    std::string id;
    std::string proposal_id;
    std::string author_id;
    std::string body;
    std::optional<std::string> created_at;
};

struct TagRecord {
    std::string tag; // normalized lowercase
    std::string proposal_id;
};

struct QuarantinedRow {
    std::string file;   // "proposals" | "comments" | "tags"
    std::string reason;
    std::vector<std::string> fields; // original row
};

struct FileCounts {
    std::size_t rows_in = 0;
    std::size_t loaded = 0;
    std::size_t quarantined = 0;
};

struct Corpus {
    std::map<std::string, Proposal> proposals;
    std::map<std::string, Comment> comments;
    std::vector<TagRecord> tags;
    std::vector<QuarantinedRow> quarantine;
    std::map<std::string, FileCounts> file_counts;

    /// Content hash over all loaded rows, stable across reloads of the
    /// same data. Quarantined rows are excluded.
    std::string digest() const {
        Digest d;
        for (const auto& [id, p] : proposals) {
            d.update(id); d.update("\x1f");
            d.update(p.title); d.update("\x1f");
            d.update(p.description); d.update("\x1f");
            d.update(p.summary); d.update("\x1f");
            d.update(p.author_id); d.update("\x1f");
            d.update(p.created_at.value_or("")); d.update("\x1e");
        }
        for (const auto& [id, c] : comments) {
            d.update(id); d.update("\x1f");
            d.update(c.proposal_id); d.update("\x1f");
            d.update(c.author_id); d.update("\x1f");
            d.update(c.body); d.update("\x1f");
            d.update(c.created_at.value_or("")); d.update("\x1e");
        }
        for (const auto& t : tags) {
            d.update(t.tag); d.update("\x1f");
            d.update(t.proposal_id); d.update("\x1e");
        }
        return d.hex();
    }
};

enum class DocKind { proposal, user, thread };

struct RawDocument {
    std::string doc_id;
    DocKind kind = DocKind::proposal;
    std::string text;
};

/// Maps CSV header names onto record fields. Empty optional-column names
/// mean "not present in this export".
struct CsvSchema {
    struct ProposalColumns {
        std::string id = "id";
        std::string title = "title";
        std::string description = "description";
        std::string summary = "summary";
        std::string author_id = "author_id";
        std::string created_at = "created_at"; // optional
        std::string votes_total;               // optional
        std::string votes_up;                  // optional
        std::string votes_down;                // optional
    } proposals;
    struct CommentColumns {
        std::string id = "id";
        std::string proposal_id = "proposal_id";
        std::string author_id = "author_id";
        std::string body = "body";
        std::string created_at = "created_at"; // optional
    } comments;
    struct TagColumns {
        std::string tag = "tag";
        std::string proposal_id = "proposal_id";
    } tags;
    char delimiter = ',';
};

namespace detail {

class ColumnIndex {
public:
    ColumnIndex(const std::vector<std::string>& header, const std::string& file) : file_(file) {
        for (std::size_t i = 0; i < header.size(); ++i)
            index_.emplace(header[i], i);
    }

    std::size_t require(const std::string& column) const {
        auto it = index_.find(column);
        if (it == index_.end())
            throw std::runtime_error(file_ + ": missing mandatory column '" + column + "'");
        return it->second;
    }

    std::optional<std::size_t> optional(const std::string& column) const {
        if (column.empty()) return std::nullopt;
        auto it = index_.find(column);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

private:
    std::map<std::string, std::size_t> index_;
    std::string file_;
};

inline std::string cell(const std::vector<std::string>& row, std::size_t i) {
    return i < row.size() ? row[i] : std::string();
}

inline std::optional<std::string> optional_cell(const std::vector<std::string>& row,
                                                std::optional<std::size_t> i) {
    if (!i || *i >= row.size() || row[*i].empty()) return std::nullopt;
    return row[*i];
}

inline bool parse_count(const std::string& s, std::uint64_t& out) {
    if (s.empty()) return false;
    std::uint64_t v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
        v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    out = v;
    return true;
}

// Sort key for deterministic assembly; rows without created_at fall back
// to id order within the empty-date group.
inline std::pair<std::string, std::string> order_key(const std::optional<std::string>& created_at,
                                                     const std::string& id) {
    return {created_at.value_or(""), id};
}

} // namespace detail

/// Loads the participation-platform CSV exports. Malformed rows are
/// quarantined with a reason, never silently dropped; duplicate proposal
/// ids are a hard error. `comment_path` and `tag_path` may be empty when
/// the export has no such file.
inline Corpus load_corpus(const std::string& proposal_path, const std::string& comment_path,
                          const std::string& tag_path, const CsvSchema& schema = {}) {
    Corpus corpus;

    auto open = [](const std::string& path) {
        auto in = std::make_unique<std::ifstream>(path, std::ios::binary);
        if (!*in) throw std::runtime_error("cannot open csv file: " + path);
        return in;
    };

    { // proposals
        auto in = open(proposal_path);
        CsvReader reader(*in, schema.delimiter);
        std::vector<std::string> row;
        if (!reader.next(row)) throw std::runtime_error(proposal_path + ": empty file (no header)");
        detail::ColumnIndex cols(row, "proposals");
        const auto c_id = cols.require(schema.proposals.id);
        const auto c_title = cols.require(schema.proposals.title);
        const auto c_desc = cols.require(schema.proposals.description);
        const auto c_sum = cols.require(schema.proposals.summary);
        const auto c_author = cols.require(schema.proposals.author_id);
        const auto c_date = cols.optional(schema.proposals.created_at);
        const auto c_vt = cols.optional(schema.proposals.votes_total);
        const auto c_vu = cols.optional(schema.proposals.votes_up);
        const auto c_vd = cols.optional(schema.proposals.votes_down);

        auto& counts = corpus.file_counts["proposals"];
        while (reader.next(row)) {
            ++counts.rows_in;
            Proposal p;
            p.id = detail::cell(row, c_id);
            p.title = detail::cell(row, c_title);
            p.description = detail::cell(row, c_desc);
            p.summary = detail::cell(row, c_sum);
            p.author_id = detail::cell(row, c_author);
            p.created_at = detail::optional_cell(row, c_date);
            if (p.id.empty()) {
                corpus.quarantine.push_back({"proposals", "missing proposal id", row});
                ++counts.quarantined;
                continue;
            }
            if (corpus.proposals.count(p.id))
                throw std::runtime_error("duplicate proposal id: " + p.id);
            if (p.title.empty() && p.description.empty() && p.summary.empty()) {
                corpus.quarantine.push_back({"proposals", "all text fields empty", row});
                ++counts.quarantined;
                continue;
            }
            if (c_vt || c_vu || c_vd) {
                VoteCounts v;
                bool ok = true;
                if (c_vt && !detail::cell(row, *c_vt).empty()) ok &= detail::parse_count(detail::cell(row, *c_vt), v.total);
                if (c_vu && !detail::cell(row, *c_vu).empty()) ok &= detail::parse_count(detail::cell(row, *c_vu), v.up);
                if (c_vd && !detail::cell(row, *c_vd).empty()) ok &= detail::parse_count(detail::cell(row, *c_vd), v.down);
                if (!ok) {
                    corpus.quarantine.push_back({"proposals", "malformed vote count", row});
                    ++counts.quarantined;
                    continue;
                }
                p.votes = v;
            }
            corpus.proposals.emplace(p.id, std::move(p));
            ++counts.loaded;
        }
    }

    if (!comment_path.empty()) {
        auto in = open(comment_path);
        CsvReader reader(*in, schema.delimiter);
        std::vector<std::string> row;
        if (!reader.next(row)) throw std::runtime_error(comment_path + ": empty file (no header)");
        detail::ColumnIndex cols(row, "comments");
        const auto c_id = cols.require(schema.comments.id);
        const auto c_pid = cols.require(schema.comments.proposal_id);
        const auto c_author = cols.require(schema.comments.author_id);
        const auto c_body = cols.require(schema.comments.body);
        const auto c_date = cols.optional(schema.comments.created_at);

        auto& counts = corpus.file_counts["comments"];
        while (reader.next(row)) {
            ++counts.rows_in;
            Comment c;
            c.id = detail::cell(row, c_id);
            c.proposal_id = detail::cell(row, c_pid);
            c.author_id = detail::cell(row, c_author);
            c.body = detail::cell(row, c_body);
            c.created_at = detail::optional_cell(row, c_date);
            std::string reason;
            if (c.id.empty()) reason = "missing comment id";
            else if (corpus.comments.count(c.id)) reason = "duplicate comment id";
            else if (!corpus.proposals.count(c.proposal_id)) reason = "orphan comment";
            else if (c.body.empty()) reason = "empty comment body";
            if (!reason.empty()) {
                corpus.quarantine.push_back({"comments", reason, row});
                ++counts.quarantined;
                continue;
            }
            corpus.comments.emplace(c.id, std::move(c));
            ++counts.loaded;
        }
    }

    if (!tag_path.empty()) {
        auto in = open(tag_path);
        CsvReader reader(*in, schema.delimiter);
        std::vector<std::string> row;
        if (!reader.next(row)) throw std::runtime_error(tag_path + ": empty file (no header)");
        detail::ColumnIndex cols(row, "tags");
        const auto c_tag = cols.require(schema.tags.tag);
        const auto c_pid = cols.require(schema.tags.proposal_id);

        auto& counts = corpus.file_counts["tags"];
        while (reader.next(row)) {
            ++counts.rows_in;
            TagRecord t;
            t.tag = normalize_text(detail::cell(row, c_tag));
            t.proposal_id = detail::cell(row, c_pid);
            std::string reason;
            if (t.tag.empty()) reason = "empty tag after normalization";
            else if (!corpus.proposals.count(t.proposal_id)) reason = "orphan tag";
            if (!reason.empty()) {
                corpus.quarantine.push_back({"tags", reason, row});
                ++counts.quarantined;
                continue;
            }
            corpus.tags.push_back(std::move(t));
            ++counts.loaded;
        }
    }

    return corpus;
}

/// Quarantine report: original row fields followed by a reason column.
inline void write_quarantine_csv(const Corpus& corpus, std::ostream& out) {
    write_csv_row(out, {"file", "reason", "row..."});
    for (const auto& q : corpus.quarantine) {
        std::vector<std::string> row{q.file, q.reason};
        row.insert(row.end(), q.fields.begin(), q.fields.end());
        write_csv_row(out, row);
    }
}

/// One document per proposal: title, description and summary joined by
/// newlines, empty fields skipped.
inline std::vector<RawDocument> assemble_proposal_documents(const Corpus& corpus) {
    std::vector<RawDocument> docs;
    docs.reserve(corpus.proposals.size());
    for (const auto& [id, p] : corpus.proposals) {
        std::string text;
        for (const std::string* field : {&p.title, &p.description, &p.summary}) {
            if (field->empty()) continue;
            if (!text.empty()) text += '\n';
            text += *field;
        }
        docs.push_back({id, DocKind::proposal, std::move(text)});
    }
    return docs;
}

/// One document per active user: the user's proposal texts followed by
/// their comment bodies, each block in (created_at, id) order. Users with
/// no authored content get no document.
inline std::vector<RawDocument> assemble_user_documents(const Corpus& corpus) {
    struct Piece {
        std::pair<std::string, std::string> key;
        const std::string* text;
        std::string assembled; // for proposals, owns the merged text
    };
    std::map<std::string, std::pair<std::vector<Piece>, std::vector<Piece>>> by_user;

    for (const auto& [id, p] : corpus.proposals) {
        if (p.author_id.empty()) continue;
        std::string text;
        for (const std::string* field : {&p.title, &p.description, &p.summary}) {
            if (field->empty()) continue;
            if (!text.empty()) text += '\n';
            text += *field;
        }
        Piece piece{detail::order_key(p.created_at, id), nullptr, std::move(text)};
        by_user[p.author_id].first.push_back(std::move(piece));
    }
    for (const auto& [id, c] : corpus.comments) {
        if (c.author_id.empty()) continue;
        by_user[c.author_id].second.push_back({detail::order_key(c.created_at, id), &c.body, {}});
    }

    std::vector<RawDocument> docs;
    docs.reserve(by_user.size());
    for (auto& [user, pieces] : by_user) {
        auto by_key = [](const Piece& a, const Piece& b) { return a.key < b.key; };
        std::sort(pieces.first.begin(), pieces.first.end(), by_key);
        std::sort(pieces.second.begin(), pieces.second.end(), by_key);
        std::string text;
        for (const auto* block : {&pieces.first, &pieces.second}) {
            for (const auto& piece : *block) {
                const std::string& t = piece.text ? *piece.text : piece.assembled;
                if (t.empty()) continue;
                if (!text.empty()) text += '\n';
                text += t;
            }
        }
        docs.push_back({user, DocKind::user, std::move(text)});
    }
    return docs;
}

/// Per proposal with at least one comment: bodies concatenated in
/// (created_at, id) order with newline separators.
inline std::map<std::string, RawDocument> assemble_comment_threads(const Corpus& corpus) {
    std::map<std::string, std::vector<std::pair<std::pair<std::string, std::string>, const std::string*>>> grouped;
    for (const auto& [id, c] : corpus.comments)
        grouped[c.proposal_id].emplace_back(detail::order_key(c.created_at, id), &c.body);

    std::map<std::string, RawDocument> threads;
    for (auto& [pid, bodies] : grouped) {
        std::sort(bodies.begin(), bodies.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::string text;
        for (const auto& [key, body] : bodies) {
            if (!text.empty()) text += '\n';
            text += *body;
        }
        threads.emplace(pid, RawDocument{pid, DocKind::thread, std::move(text)});
    }
    return threads;
}

struct DistributionStats {
    std::map<std::size_t, std::size_t> histogram; // word count -> proposals
    double mean = 0.0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
};

struct FieldStats {
    DistributionStats title;
    DistributionStats description;
    DistributionStats summary;
};

namespace detail {

inline std::size_t whitespace_word_count(const std::string& text) {
    std::size_t count = 0;
    bool in_word = false;
    for (char c : text) {
        const bool space = ascii_space(c);
        if (!space && !in_word) ++count;
        in_word = !space;
    }
    return count;
}

// Linear interpolation between order statistics (the common "type 7" rule).
inline double quantile(const std::vector<std::size_t>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return static_cast<double>(sorted[lo]) +
           frac * (static_cast<double>(sorted[hi]) - static_cast<double>(sorted[lo]));
}

inline DistributionStats distribution(std::vector<std::size_t> counts) {
    DistributionStats stats;
    if (counts.empty()) return stats;
    double sum = 0.0;
    for (std::size_t c : counts) {
        ++stats.histogram[c];
        sum += static_cast<double>(c);
    }
    std::sort(counts.begin(), counts.end());
    stats.mean = sum / static_cast<double>(counts.size());
    stats.median = quantile(counts, 0.5);
    stats.q1 = quantile(counts, 0.25);
    stats.q3 = quantile(counts, 0.75);
    return stats;
}

} // namespace detail

/// Whitespace word counts over the raw (pre-normalization) text fields.
inline FieldStats field_word_stats(const Corpus& corpus) {
    std::vector<std::size_t> title, description, summary;
    title.reserve(corpus.proposals.size());
    description.reserve(corpus.proposals.size());
    summary.reserve(corpus.proposals.size());
    for (const auto& [id, p] : corpus.proposals) {
        title.push_back(detail::whitespace_word_count(p.title));
        description.push_back(detail::whitespace_word_count(p.description));
        summary.push_back(detail::whitespace_word_count(p.summary));
    }
    FieldStats stats;
    stats.title = detail::distribution(std::move(title));
    stats.description = detail::distribution(std::move(description));
    stats.summary = detail::distribution(std::move(summary));
    return stats;
}

struct TagUsageReport {
    std::size_t total_distinct = 0;
    std::size_t total_usages = 0;
    std::vector<std::pair<std::string, std::size_t>> ranked; // by count desc, tag asc

    /// Fraction of all tag usages accounted for by the top-k tags.
    double coverage(std::size_t k) const {
        if (total_usages == 0) return 0.0;
        k = std::min(k, ranked.size());
        std::size_t covered = 0;
        for (std::size_t i = 0; i < k; ++i) covered += ranked[i].second;
        return static_cast<double>(covered) / static_cast<double>(total_usages);
    }
};

inline TagUsageReport tag_usage_report(const Corpus& corpus) {
    std::map<std::string, std::size_t> counts;
    for (const auto& t : corpus.tags) ++counts[t.tag];
    TagUsageReport report;
    report.total_distinct = counts.size();
    report.total_usages = corpus.tags.size();
    report.ranked.assign(counts.begin(), counts.end());
    std::sort(report.ranked.begin(), report.ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return report;
}

struct UserActivityStats {
    struct Activity {
        std::size_t proposals = 0;
        std::size_t comments = 0;
    };
    std::map<std::string, Activity> per_user;               // active users only
    std::map<std::size_t, std::size_t> proposals_histogram; // #proposals -> #users
    std::map<std::size_t, std::size_t> comments_histogram;  // #comments -> #users
    std::map<std::size_t, std::size_t> total_histogram;     // #contributions -> #users

    std::size_t active_users() const { return per_user.size(); }
};

inline UserActivityStats user_activity_stats(const Corpus& corpus) {
    UserActivityStats stats;
    for (const auto& [id, p] : corpus.proposals)
        if (!p.author_id.empty()) ++stats.per_user[p.author_id].proposals;
    for (const auto& [id, c] : corpus.comments)
        if (!c.author_id.empty()) ++stats.per_user[c.author_id].comments;
    for (const auto& [user, a] : stats.per_user) {
        ++stats.proposals_histogram[a.proposals];
        ++stats.comments_histogram[a.comments];
        ++stats.total_histogram[a.proposals + a.comments];
    }
    return stats;
}

} // namespace agora
