// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 Agora Contributors

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "agora/agora.hpp"
#include "agora/serve.hpp"

namespace {

volatile std::sig_atomic_t g_reload_requested = 0;
volatile std::sig_atomic_t g_stop_requested = 0;

void on_sighup(int) { g_reload_requested = 1; }
void on_stop(int) { g_stop_requested = 1; }

nlohmann::json distribution_json(const agora::DistributionStats& d) {
    nlohmann::json histogram = nlohmann::json::object();
    for (const auto& [words, count] : d.histogram) histogram[std::to_string(words)] = count;
    return {{"mean", d.mean},
            {"median", d.median},
            {"q1", d.q1},
            {"q3", d.q3},
            {"histogram", histogram}};
}

struct CommonOptions {
    std::string config_path;
    std::string bundle_dir;
};

agora::PipelineConfig require_config(const CommonOptions& opts) {
    if (opts.config_path.empty())
        throw std::runtime_error("--config is required for this command");
    return agora::load_config(opts.config_path);
}

std::string resolve_bundle_dir(const CommonOptions& opts) {
    if (!opts.bundle_dir.empty()) return opts.bundle_dir;
    if (!opts.config_path.empty()) return agora::load_config(opts.config_path).output_dir;
    throw std::runtime_error("pass --bundle <dir> or --config <file> with an output directory");
}

std::shared_ptr<const agora::EmbeddingTable> maybe_load_embeddings(const std::string& path) {
    if (path.empty()) return nullptr;
    return std::make_shared<agora::EmbeddingTable>(agora::load_embeddings(path));
}

int cmd_ingest(const CommonOptions& opts, const std::string& quarantine_path) {
    const agora::PipelineConfig config = require_config(opts);
    config.validate();
    const agora::Corpus corpus = agora::load_corpus(config.proposals_csv, config.comments_csv,
                                                    config.tags_csv, config.schema);
    nlohmann::json report;
    for (const auto& [file, counts] : corpus.file_counts)
        report["files"][file] = {{"rows", counts.rows_in},
                                 {"loaded", counts.loaded},
                                 {"quarantined", counts.quarantined}};
    std::map<std::string, std::size_t> reasons;
    for (const auto& q : corpus.quarantine) ++reasons[q.reason];
    report["quarantine_reasons"] = reasons;
    report["corpus_digest"] = corpus.digest();
    if (!quarantine_path.empty()) {
        std::ofstream out(quarantine_path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + quarantine_path);
        agora::write_quarantine_csv(corpus, out);
        report["quarantine_csv"] = quarantine_path;
    }
    std::cout << report.dump(2) << "\n";
    return 0;
}

int cmd_stats(const CommonOptions& opts) {
    const agora::PipelineConfig config = require_config(opts);
    config.validate();
    const agora::Corpus corpus = agora::load_corpus(config.proposals_csv, config.comments_csv,
                                                    config.tags_csv, config.schema);
    const agora::FieldStats fields = agora::field_word_stats(corpus);
    const agora::TagUsageReport tag_report = agora::tag_usage_report(corpus);
    const agora::UserActivityStats users = agora::user_activity_stats(corpus);

    nlohmann::json j;
    j["proposals"] = corpus.proposals.size();
    j["comments"] = corpus.comments.size();
    j["fields"] = {{"title", distribution_json(fields.title)},
                   {"description", distribution_json(fields.description)},
                   {"summary", distribution_json(fields.summary)}};
    j["tags"] = {{"distinct", tag_report.total_distinct},
                 {"usages", tag_report.total_usages},
                 {"coverage_top_50", tag_report.coverage(50)}};
    nlohmann::json top = nlohmann::json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(20, tag_report.ranked.size()); ++i)
        top.push_back({{"tag", tag_report.ranked[i].first},
                       {"count", tag_report.ranked[i].second}});
    j["tags"]["top"] = top;
    j["users"] = {{"active", users.active_users()}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_fit(const CommonOptions& opts, std::optional<std::size_t> topics,
            std::optional<std::uint64_t> seed, const std::string& output_override) {
    agora::PipelineConfig config = require_config(opts);
    if (topics) {
        config.model.topics = *topics;
        config.user_model.topics = std::min(config.user_model.topics, *topics);
    }
    if (seed) {
        config.model.seed = *seed;
        config.user_model.seed = *seed;
    }
    if (!output_override.empty()) config.output_dir = output_override;

    agora::AnalysisBundle bundle = agora::run_pipeline(config, &std::cerr);
    agora::save_bundle(bundle, config.output_dir);
    nlohmann::json j{{"bundle", config.output_dir},
                     {"bundle_digest", bundle.bundle_digest},
                     {"corpus_digest", bundle.corpus_digest},
                     {"topics", bundle.proposal_model.topics()},
                     {"converged", bundle.proposal_model.converged},
                     {"sweeps", bundle.proposal_model.sweeps_run}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

nlohmann::json tag_set_json(const agora::TagSet& set) {
    nlohmann::json j{{"id", set.doc_id}, {"tags", nlohmann::json::array()}};
    for (const auto& [term, score] : set.tags)
        j["tags"].push_back({{"term", term}, {"score", score}});
    return j;
}

nlohmann::json neighbor_list_json(const agora::NeighborList& list, std::size_t k) {
    nlohmann::json j{{"id", list.entity_id}, {"neighbors", nlohmann::json::array()}};
    for (std::size_t i = 0; i < std::min(k, list.neighbors.size()); ++i)
        j["neighbors"].push_back({{"id", list.neighbors[i].first},
                                  {"distance", list.neighbors[i].second}});
    return j;
}

int cmd_tags(const CommonOptions& opts, const std::string& id, bool all) {
    const agora::AnalysisBundle bundle = agora::load_bundle(resolve_bundle_dir(opts));
    if (all) {
        for (const auto& set : bundle.tags) std::cout << tag_set_json(set).dump() << "\n";
        return 0;
    }
    if (id.empty()) throw std::runtime_error("pass --id <proposal> or --all");
    for (const auto& set : bundle.tags) {
        if (set.doc_id == id) {
            std::cout << tag_set_json(set).dump(2) << "\n";
            return 0;
        }
    }
    throw std::runtime_error("unknown proposal id: " + id);
}

int cmd_neighbors(const CommonOptions& opts, const std::string& id, bool all,
                  std::optional<std::size_t> k, bool users) {
    const agora::AnalysisBundle bundle = agora::load_bundle(resolve_bundle_dir(opts));
    if (users && !bundle.has_user_model) throw std::runtime_error("no user model in this bundle");
    const auto& lists = users ? bundle.user_neighbors : bundle.proposal_neighbors;
    const std::size_t want = k.value_or(bundle.insights.neighbors_k);
    const agora::TopicModel& model = users ? bundle.user_model : bundle.proposal_model;

    auto emit = [&](const agora::NeighborList& list, int indent) {
        if (want > list.neighbors.size() && model.docs() > list.neighbors.size() + 1) {
            const agora::NeighborList fresh =
                agora::related_documents(model, list.entity_id, want);
            std::cout << neighbor_list_json(fresh, want).dump(indent) << "\n";
        } else {
            std::cout << neighbor_list_json(list, want).dump(indent) << "\n";
        }
    };
    if (all) {
        for (const auto& list : lists) emit(list, -1);
        return 0;
    }
    if (id.empty()) throw std::runtime_error("pass --id <entity> or --all");
    for (const auto& list : lists) {
        if (list.entity_id == id) {
            emit(list, 2);
            return 0;
        }
    }
    throw std::runtime_error(std::string("unknown ") + (users ? "user" : "proposal") +
                             " id: " + id);
}

int cmd_summarize(const CommonOptions& opts, const std::string& id,
                  const std::string& method_name, std::optional<std::size_t> n,
                  const std::string& embeddings_override) {
    const agora::AnalysisBundle bundle = agora::load_bundle(resolve_bundle_dir(opts));
    agora::SummaryMethod method = bundle.summarize_defaults.method;
    if (!method_name.empty()) method = agora::parse_summary_method(method_name);
    const std::size_t sentences = n.value_or(bundle.summarize_defaults.sentences);

    const std::string embeddings_path = !embeddings_override.empty()
                                            ? embeddings_override
                                            : bundle.summarize_defaults.embeddings_path;
    std::shared_ptr<const agora::EmbeddingTable> table = maybe_load_embeddings(embeddings_path);
    if (method == agora::SummaryMethod::textrank && !table)
        throw std::runtime_error("textrank requires --embeddings (or summarize.embeddings in the config)");

    agora::Summary summary;
    if (bundle.summary_context.has_thread(id)) {
        summary = agora::summarize_thread(bundle.summary_context, id, method, sentences,
                                          table.get(), bundle.summarize_defaults.pagerank);
    } else {
        summary.proposal_id = id;
        summary.method = method;
        summary.n_requested = sentences;
    }
    std::cout << agora::summary_to_json(summary).dump(2) << "\n";
    return 0;
}

int cmd_serve(const CommonOptions& opts, const std::string& address, int port,
              const std::string& embeddings_override) {
    const std::string bundle_dir = resolve_bundle_dir(opts);
    agora::AnalysisBundle bundle = agora::load_bundle(bundle_dir);
    const std::string embeddings_path = !embeddings_override.empty()
                                            ? embeddings_override
                                            : bundle.summarize_defaults.embeddings_path;
    auto embeddings = maybe_load_embeddings(embeddings_path);

    agora::QueryService service(std::move(bundle), embeddings);
    httplib::Server server;
    service.attach(server);

    std::signal(SIGHUP, on_sighup);
    std::signal(SIGINT, on_stop);
    std::signal(SIGTERM, on_stop);

    std::thread watcher([&] {
        while (!g_stop_requested) {
            std::this_thread::sleep_for(std::chrono::milliseconds(200));
            if (g_reload_requested) {
                g_reload_requested = 0;
                try {
                    agora::AnalysisBundle fresh = agora::load_bundle(bundle_dir);
                    const std::string fresh_embeddings_path =
                        !embeddings_override.empty() ? embeddings_override
                                                     : fresh.summarize_defaults.embeddings_path;
                    service.replace(std::move(fresh),
                                    maybe_load_embeddings(fresh_embeddings_path));
                    std::cerr << "reloaded bundle from " << bundle_dir << " (digest "
                              << service.bundle_digest() << ")\n";
                } catch (const std::exception& e) {
                    std::cerr << "bundle reload failed, keeping current snapshot: " << e.what()
                              << "\n";
                }
            }
        }
        server.stop();
    });

    std::cerr << "serving bundle " << bundle_dir << " (digest " << service.bundle_digest()
              << ") on http://" << address << ":" << port << "\n";
    std::cerr << "SIGHUP reloads the bundle; SIGINT/SIGTERM stop the server\n";
    const bool ok = server.listen(address, port);
    g_stop_requested = 1;
    watcher.join();
    return ok || g_stop_requested ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"agora: topic models, tags, neighbors and thread summaries "
                 "for citizen-participation corpora"};
    app.require_subcommand(1);

    CommonOptions opts;
    std::string quarantine_path;
    std::string id;
    std::string method;
    std::string embeddings;
    std::string output_override;
    std::string address = "127.0.0.1";
    int port = 8080;
    bool all = false;
    std::optional<std::size_t> topics_override;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::size_t> k_override;
    std::optional<std::size_t> n_override;

    auto add_common = [&](CLI::App* sub, bool with_bundle) {
        sub->add_option("--config", opts.config_path, "pipeline config file (JSON, comments allowed)");
        if (with_bundle) sub->add_option("--bundle", opts.bundle_dir, "bundle directory");
    };

    CLI::App* ingest = app.add_subcommand("ingest", "load and validate the CSV exports");
    add_common(ingest, false);
    ingest->add_option("--quarantine", quarantine_path, "write rejected rows to this CSV");

    CLI::App* stats = app.add_subcommand("stats", "descriptive corpus statistics");
    add_common(stats, false);

    CLI::App* fit = app.add_subcommand("fit", "run the full pipeline and save a bundle");
    add_common(fit, false);
    fit->add_option("--topics", topics_override, "topic count override");
    fit->add_option("--seed", seed_override, "random seed override");
    fit->add_option("--output", output_override, "bundle output directory override");

    CLI::App* tags = app.add_subcommand("tags", "automatic tags from a bundle");
    add_common(tags, true);
    tags->add_option("--id", id, "proposal id");
    tags->add_flag("--all", all, "emit every proposal as JSON lines");

    CLI::App* neighbors = app.add_subcommand("neighbors", "closest proposals in topic space");
    add_common(neighbors, true);
    neighbors->add_option("--id", id, "proposal id");
    neighbors->add_flag("--all", all, "emit every proposal as JSON lines");
    neighbors->add_option("--k", k_override, "neighbor count");

    CLI::App* users = app.add_subcommand("users", "closest users in topic space");
    add_common(users, true);
    users->add_option("--id", id, "user id");
    users->add_flag("--all", all, "emit every user as JSON lines");
    users->add_option("--k", k_override, "neighbor count");

    CLI::App* summarize = app.add_subcommand("summarize", "extractive summary of a comment thread");
    add_common(summarize, true);
    summarize->add_option("--id", id, "proposal id")->required();
    summarize->add_option("--method", method, "tfidf or textrank");
    summarize->add_option("--n", n_override, "sentence count");
    summarize->add_option("--embeddings", embeddings, "word-vector file for textrank");

    CLI::App* serve = app.add_subcommand("serve", "read-only JSON query service");
    add_common(serve, true);
    serve->add_option("--address", address, "bind address");
    serve->add_option("--port", port, "tcp port");
    serve->add_option("--embeddings", embeddings, "word-vector file for textrank");

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) return cmd_ingest(opts, quarantine_path);
        if (stats->parsed()) return cmd_stats(opts);
        if (fit->parsed()) return cmd_fit(opts, topics_override, seed_override, output_override);
        if (tags->parsed()) return cmd_tags(opts, id, all);
        if (neighbors->parsed()) return cmd_neighbors(opts, id, all, k_override, false);
        if (users->parsed()) return cmd_neighbors(opts, id, all, k_override, true);
        if (summarize->parsed()) return cmd_summarize(opts, id, method, n_override, embeddings);
        if (serve->parsed()) return cmd_serve(opts, address, port, embeddings);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
