// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 Agora Contributors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/SparseCore>

#include "agora/textprep.hpp"

namespace agora {

struct VectorizeConfig {
    std::size_t min_df = 3;
    double max_df_ratio = 0.5;
};

/// Term → dense column index with document frequencies. Index order is
/// the assignment order: terms sorted by (index of first document that
/// contains them, then lexicographically), which is deterministic for a
/// fixed document order.
struct Vocabulary {
    std::vector<std::string> terms;           // index -> term
    std::vector<std::size_t> df;              // index -> document frequency
    std::unordered_map<std::string, std::size_t> index; // term -> index
    std::size_t corpus_docs = 0;              // N

    std::size_t size() const { return terms.size(); }

    double idf(std::size_t term_index) const {
        return std::log((1.0 + static_cast<double>(corpus_docs)) /
                        (1.0 + static_cast<double>(df[term_index]))) + 1.0;
    }
};

inline Vocabulary build_vocabulary(const std::vector<TokenDocument>& docs,
                                   std::size_t min_df = 3, double max_df_ratio = 0.5) {
    struct TermInfo {
        std::size_t df = 0;
        std::size_t first_doc = 0;
        std::size_t last_doc = std::numeric_limits<std::size_t>::max();
    };
    std::unordered_map<std::string, TermInfo> seen;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        for (const auto& token : docs[d].tokens) {
            auto [it, inserted] = seen.try_emplace(token);
            if (inserted) it->second.first_doc = d;
            if (it->second.last_doc != d) { // count each doc once
                ++it->second.df;
                it->second.last_doc = d;
            }
        }
    }

    struct Kept {
        std::size_t first_doc;
        const std::string* term;
        std::size_t df;
    };
    const double max_df = max_df_ratio * static_cast<double>(docs.size());
    std::vector<Kept> kept;
    kept.reserve(seen.size());
    for (const auto& [term, info] : seen) {
        if (info.df < min_df) continue;
        if (static_cast<double>(info.df) > max_df) continue;
        kept.push_back({info.first_doc, &term, info.df});
    }
    if (kept.empty())
        throw std::runtime_error("vocabulary empty after pruning (min_df=" + std::to_string(min_df) +
                                 ", max_df_ratio=" + std::to_string(max_df_ratio) + ")");
    std::sort(kept.begin(), kept.end(), [](const Kept& a, const Kept& b) {
        if (a.first_doc != b.first_doc) return a.first_doc < b.first_doc;
        return *a.term < *b.term;
    });

    Vocabulary vocab;
    vocab.corpus_docs = docs.size();
    vocab.terms.reserve(kept.size());
    vocab.df.reserve(kept.size());
    vocab.index.reserve(kept.size());
    for (const auto& k : kept) {
        vocab.index.emplace(*k.term, vocab.terms.size());
        vocab.terms.push_back(*k.term);
        vocab.df.push_back(k.df);
    }
    return vocab;
}

/// Sparse nonnegative TF-IDF matrix, rows aligned with the input
/// document order. Row-major (compressed row) with sorted inner indices.
struct DocTermMatrix {
    Eigen::SparseMatrix<double, Eigen::RowMajor> X;
    std::vector<std::string> doc_ids;
    std::vector<std::size_t> empty_rows; // docs with no in-vocabulary terms

    std::size_t docs() const { return static_cast<std::size_t>(X.rows()); }
    std::size_t vocab_size() const { return static_cast<std::size_t>(X.cols()); }
};

/// tf-idf with raw term counts, smoothed idf ln((1+N)/(1+df))+1 and
/// L2-normalized rows. Empty documents stay as all-zero rows.
inline DocTermMatrix build_tfidf(const std::vector<TokenDocument>& docs, const Vocabulary& vocab) {
    DocTermMatrix result;
    result.doc_ids.reserve(docs.size());

    std::vector<Eigen::Triplet<double>> triplets;
    std::map<std::size_t, double> row; // sorted columns within the row
    for (std::size_t d = 0; d < docs.size(); ++d) {
        result.doc_ids.push_back(docs[d].doc_id);
        row.clear();
        for (const auto& token : docs[d].tokens) {
            auto it = vocab.index.find(token);
            if (it == vocab.index.end()) continue;
            row[it->second] += 1.0;
        }
        if (row.empty()) {
            result.empty_rows.push_back(d);
            continue;
        }
        double norm_sq = 0.0;
        for (auto& [col, tf] : row) {
            tf *= vocab.idf(col);
            norm_sq += tf * tf;
        }
        const double inv_norm = 1.0 / std::sqrt(norm_sq);
        for (const auto& [col, value] : row)
            triplets.emplace_back(static_cast<int>(d), static_cast<int>(col), value * inv_norm);
    }

    result.X.resize(static_cast<Eigen::Index>(docs.size()), static_cast<Eigen::Index>(vocab.size()));
    result.X.setFromTriplets(triplets.begin(), triplets.end());
    result.X.makeCompressed();
    return result;
}

/// Tab-separated vocabulary export: term, index, document frequency.
inline void write_vocabulary(const Vocabulary& vocab, std::ostream& out) {
    for (std::size_t i = 0; i < vocab.terms.size(); ++i)
        out << vocab.terms[i] << '\t' << i << '\t' << vocab.df[i] << '\n';
}

inline Vocabulary read_vocabulary(std::istream& in, std::size_t corpus_docs) {
    Vocabulary vocab;
    vocab.corpus_docs = corpus_docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto tab1 = line.find('\t');
        const auto tab2 = line.find('\t', tab1 == std::string::npos ? tab1 : tab1 + 1);
        if (tab1 == std::string::npos || tab2 == std::string::npos)
            throw std::runtime_error("vocabulary line " + std::to_string(line_no) + ": expected 3 tab-separated fields");
        const std::string term = line.substr(0, tab1);
        const std::size_t index = std::stoull(line.substr(tab1 + 1, tab2 - tab1 - 1));
        const std::size_t df = std::stoull(line.substr(tab2 + 1));
        if (index != vocab.terms.size())
            throw std::runtime_error("vocabulary line " + std::to_string(line_no) + ": non-contiguous index");
        vocab.index.emplace(term, index);
        vocab.terms.push_back(term);
        vocab.df.push_back(df);
    }
    return vocab;
}

/// Coordinate-triplet text export: one-line header "D V NNZ", then one
/// "row col value" line per stored entry, row-major order.
inline void write_matrix_triplets(const Eigen::SparseMatrix<double, Eigen::RowMajor>& X, std::ostream& out) {
    out << X.rows() << ' ' << X.cols() << ' ' << X.nonZeros() << '\n';
    const auto flags = out.flags();
    const auto precision = out.precision();
    out.precision(std::numeric_limits<double>::max_digits10);
    for (int i = 0; i < X.outerSize(); ++i)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(X, i); it; ++it)
            out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    out.flags(flags);
    out.precision(precision);
}

} // namespace agora
