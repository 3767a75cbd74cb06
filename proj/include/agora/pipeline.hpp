// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 Agora Contributors

#pragma once

#include <chrono>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "agora/bundle.hpp"
#include "agora/config.hpp"
#include "agora/corpus.hpp"
#include "agora/insights.hpp"
#include "agora/nmf.hpp"
#include "agora/summarize.hpp"
#include "agora/textprep.hpp"
#include "agora/vectorize.hpp"

namespace agora {

namespace detail {

class StageRunner {
public:
    StageRunner(std::vector<StageTiming>& timings, std::ostream* log)
        : timings_(timings), log_(log) {}

    template <typename Fn>
    auto run(const std::string& stage, Fn&& fn) {
        if (log_) *log_ << "[" << stage << "] started\n";
        const auto begin = std::chrono::steady_clock::now();
        try {
            if constexpr (std::is_void_v<decltype(fn())>) {
                fn();
                finish(stage, begin);
            } else {
                auto result = fn();
                finish(stage, begin);
                return result;
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("pipeline stage '" + stage + "' failed: " + e.what());
        }
    }

private:
    void finish(const std::string& stage, std::chrono::steady_clock::time_point begin) {
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
        timings_.push_back({stage, seconds});
        if (log_) *log_ << "[" << stage << "] done in " << seconds << " s\n";
    }

    std::vector<StageTiming>& timings_;
    std::ostream* log_;
};

} // namespace detail

/// corpus → textprep → vectorize → factorize → insights → summarize.
/// Deterministic given (inputs, config): every stage is seeded or
/// order-fixed. Any stage error aborts with the stage name and cause.
inline AnalysisBundle run_pipeline(const PipelineConfig& config, std::ostream* log = nullptr) {
    config.validate();

    AnalysisBundle bundle;
    bundle.config = config_snapshot(config);
    bundle.insights = config.insights;
    bundle.summarize_defaults = config.summarize;
    detail::StageRunner stages(bundle.timings, log);

    const Corpus corpus = stages.run("corpus", [&] {
        Corpus c = load_corpus(config.proposals_csv, config.comments_csv, config.tags_csv,
                               config.schema);
        if (c.proposals.empty()) throw std::runtime_error("no loadable proposals");
        if (log) {
            for (const auto& [file, counts] : c.file_counts)
                *log << "  " << file << ": " << counts.loaded << " loaded, "
                     << counts.quarantined << " quarantined of " << counts.rows_in << " rows\n";
        }
        return c;
    });
    bundle.corpus_digest = corpus.digest();

    bundle.prep = config.make_prep_config();

    PreprocessResult prep_result = stages.run("textprep", [&] {
        auto result = preprocess_corpus(assemble_proposal_documents(corpus), bundle.prep);
        if (log && !result.empty_doc_ids.empty())
            *log << "  " << result.empty_doc_ids.size()
                 << " documents empty after preprocessing\n";
        if (log && result.invalid_bytes > 0)
            *log << "  " << result.invalid_bytes << " invalid UTF-8 bytes replaced\n";
        return result;
    });
    bundle.proposal_bigrams = prep_result.bigrams;

    auto [vocab, dtm] = stages.run("vectorize", [&] {
        Vocabulary v =
            build_vocabulary(prep_result.docs, config.vectorize.min_df, config.vectorize.max_df_ratio);
        DocTermMatrix m = build_tfidf(prep_result.docs, v);
        if (log)
            *log << "  " << m.docs() << " documents x " << v.size() << " terms, "
                 << m.X.nonZeros() << " nonzeros\n";
        return std::make_pair(std::move(v), std::move(m));
    });

    stages.run("factorize", [&] {
        bundle.proposal_model = fit_nmf(dtm, vocab, config.model, log);
        bundle.topics = top_terms(bundle.proposal_model, config.insights.topic_terms);
    });

    stages.run("insights", [&] {
        bundle.tags = all_tag_sets(bundle.proposal_model, config.insights.tags_per_doc);
        bundle.proposal_neighbors =
            all_neighbor_lists(bundle.proposal_model, config.insights.neighbors_k);
        if (config.user_model_enabled) {
            const auto user_prep =
                preprocess_corpus(assemble_user_documents(corpus), bundle.prep);
            bundle.user_model = build_user_model(user_prep.docs, config.user_model,
                                                 config.vectorize, log);
            bundle.user_neighbors =
                all_neighbor_lists(bundle.user_model, config.insights.neighbors_k);
            bundle.has_user_model = true;
        }
    });

    stages.run("summarize", [&] {
        bundle.threads = assemble_comment_threads(corpus);
        bundle.summary_context = build_summary_context(bundle.threads, bundle.prep);
    });

    return bundle;
}

} // namespace agora
