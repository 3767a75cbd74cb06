// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 Agora Contributors

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <memory>
#include <string>
#include <thread>
#include <unistd.h>
#include <vector>

#include <nlohmann/json.hpp>

#include "agora/config.hpp"
#include "agora/pipeline.hpp"
#include "agora/serve.hpp"
#include "agora/summarize.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string data_path(const std::string& name) {
    return std::string(AGORA_TEST_DATA_DIR) + "/" + name;
}

// The service is normally fed a bundle loaded from disk, so the fixture
// saves and reloads once to get the digest populated.
const agora::AnalysisBundle& served_bundle() {
    static const agora::AnalysisBundle bundle = [] {
        const agora::PipelineConfig config = agora::load_config(data_path("mini_config.json"));
        agora::AnalysisBundle fresh = agora::run_pipeline(config);
        const fs::path dir = fs::temp_directory_path() /
                             ("agora_serve_fixture_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        agora::save_bundle(fresh, dir.string());
        agora::AnalysisBundle loaded = agora::load_bundle(dir.string());
        fs::remove_all(dir);
        return loaded;
    }();
    return bundle;
}

// RAII wrapper: attach the service, listen on an ephemeral loopback
// port in a background thread, tear down on scope exit.
struct TestServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    explicit TestServer(agora::QueryService& service) {
        service.attach(server);
        port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~TestServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }
};

json get_json(int port, const std::string& path, int expected_status) {
    httplib::Client client("127.0.0.1", port);
    auto res = client.Get(path);
    REQUIRE(res);
    INFO("GET " << path << " -> " << res->status << " " << res->body);
    CHECK(res->status == expected_status);
    CHECK(res->get_header_value("Content-Type") == "application/json");
    return json::parse(res->body);
}

const agora::NeighborList& find_list(const std::vector<agora::NeighborList>& lists,
                                     const std::string& id) {
    for (const auto& list : lists)
        if (list.entity_id == id) return list;
    FAIL("no neighbor list for " + id);
    return lists.front(); // unreachable
}

json neighbors_json(const agora::NeighborList& list, std::size_t take) {
    json array = json::array();
    for (std::size_t i = 0; i < std::min(take, list.neighbors.size()); ++i)
        array.push_back({{"id", list.neighbors[i].first},
                         {"distance", list.neighbors[i].second}});
    return array;
}

} // namespace

TEST_CASE("health and topics endpoints describe the bundle", "[serve]") {
    const agora::AnalysisBundle& bundle = served_bundle();
    agora::QueryService service(bundle, nullptr);
    TestServer http(service);

    const json health = get_json(http.port, "/health", 200);
    CHECK(health.at("status") == "ok");
    CHECK(health.at("bundle_digest") == bundle.bundle_digest);
    CHECK(service.bundle_digest() == bundle.bundle_digest);

    const json topics = get_json(http.port, "/topics", 200);
    CHECK(topics.at("bundle_digest") == bundle.bundle_digest);
    CHECK(topics.at("topics") ==
          json::parse(agora::detail::topics_json(bundle.topics)).at("topics"));
}

TEST_CASE("tag lookups include scores and reject unknown ids", "[serve]") {
    const agora::AnalysisBundle& bundle = served_bundle();
    agora::QueryService service(bundle, nullptr);
    TestServer http(service);

    const json body = get_json(http.port, "/proposals/p01/tags", 200);
    CHECK(body.at("id") == "p01");
    json expected_tags = json::array();
    for (const auto& set : bundle.tags)
        if (set.doc_id == "p01")
            for (const auto& [term, score] : set.tags)
                expected_tags.push_back({{"term", term}, {"score", score}});
    CHECK(body.at("tags") == expected_tags);

    const json missing = get_json(http.port, "/proposals/nope/tags", 404);
    CHECK(missing == json({{"error", "unknown proposal id: nope"},
                           {"bundle_digest", bundle.bundle_digest}}));
}

TEST_CASE("related endpoints honor k and recompute beyond the stored horizon", "[serve]") {
    const agora::AnalysisBundle& bundle = served_bundle();
    agora::QueryService service(bundle, nullptr);
    TestServer http(service);

    const agora::NeighborList& stored = find_list(bundle.proposal_neighbors, "p01");
    REQUIRE(stored.neighbors.size() == 10);

    // Default k comes from the bundle's insights config (10 here).
    json body = get_json(http.port, "/proposals/p01/related", 200);
    CHECK(body.at("id") == "p01");
    CHECK(body.at("neighbors") == neighbors_json(stored, 10));

    // Smaller k serves a prefix of the precomputed list.
    body = get_json(http.port, "/proposals/p01/related?k=3", 200);
    CHECK(body.at("neighbors") == neighbors_json(stored, 3));

    // k beyond the stored horizon recomputes from theta: same routine,
    // so the stored prefix must be reproduced bit for bit.
    body = get_json(http.port, "/proposals/p01/related?k=29", 200);
    REQUIRE(body.at("neighbors").size() == 29);
    for (std::size_t i = 0; i < 10; ++i)
        CHECK(body.at("neighbors")[i] == neighbors_json(stored, 10)[i]);
    std::set<std::string> seen;
    double previous = -1.0;
    for (const auto& n : body.at("neighbors")) {
        CHECK(n.at("id") != "p01");
        seen.insert(n.at("id").get<std::string>());
        CHECK(n.at("distance").get<double>() >= previous);
        previous = n.at("distance").get<double>();
    }
    CHECK(seen.size() == 29); // every other proposal exactly once

    // k past the corpus size clamps to what exists.
    body = get_json(http.port, "/proposals/p01/related?k=500", 200);
    CHECK(body.at("neighbors").size() == 29);

    // Malformed k values are client errors.
    CHECK(get_json(http.port, "/proposals/p01/related?k=0", 400).at("error") ==
          "k must be a positive integer");
    CHECK(get_json(http.port, "/proposals/p01/related?k=abc", 400).at("error") ==
          "k must be a positive integer");

    CHECK(get_json(http.port, "/proposals/nadie/related", 404).at("error") ==
          "unknown proposal id: nadie");

    // Users route mirrors proposals.
    const agora::NeighborList& user_list = find_list(bundle.user_neighbors, "u01");
    body = get_json(http.port, "/users/u01/related", 200);
    CHECK(body.at("id") == "u01");
    CHECK(body.at("neighbors") == neighbors_json(user_list, user_list.neighbors.size()));
    CHECK(get_json(http.port, "/users/ghost/related", 404).at("error") ==
          "unknown user id: ghost");
}

TEST_CASE("summary endpoint matches direct summarization", "[serve]") {
    const agora::AnalysisBundle& bundle = served_bundle();
    agora::QueryService service(bundle, nullptr);
    TestServer http(service);

    auto expected = [&](const std::string& id, agora::SummaryMethod method, std::size_t n) {
        json j = agora::summary_to_json(
            agora::summarize_thread(bundle.summary_context, id, method, n));
        j["bundle_digest"] = bundle.bundle_digest;
        return j;
    };

    // Defaults (tfidf, 3 sentences) come from the bundle.
    json body = get_json(http.port, "/proposals/p01/summary", 200);
    CHECK(body == expected("p01", agora::SummaryMethod::tfidf, 3));
    REQUIRE(!body.at("sentences").empty());

    // Repeat request returns the identical cached body.
    CHECK(get_json(http.port, "/proposals/p01/summary", 200) == body);

    body = get_json(http.port, "/proposals/p01/summary?n=1", 200);
    CHECK(body == expected("p01", agora::SummaryMethod::tfidf, 1));
    CHECK(body.at("sentences").size() == 1);

    // A proposal nobody commented on summarizes to zero sentences.
    body = get_json(http.port, "/proposals/p03/summary", 200);
    CHECK(body == json({{"proposal_id", "p03"},
                        {"method", "tfidf"},
                        {"n", 3},
                        {"fallback", false},
                        {"sentences", json::array()},
                        {"bundle_digest", bundle.bundle_digest}}));

    CHECK(get_json(http.port, "/proposals/px99/summary", 404).at("error") ==
          "unknown proposal id: px99");
    CHECK(get_json(http.port, "/proposals/p01/summary?method=bogus", 400).at("error") ==
          "unknown summary method: bogus (expected tfidf or textrank)");
    CHECK(get_json(http.port, "/proposals/p01/summary?n=0", 400).at("error") ==
          "n must be a positive integer");

    // textrank needs embeddings; this service has none.
    CHECK(get_json(http.port, "/proposals/p01/summary?method=textrank", 400).at("error") ==
          "textrank unavailable: no embedding table configured");
}

TEST_CASE("textrank summaries run when embeddings are configured", "[serve]") {
    const agora::AnalysisBundle& bundle = served_bundle();
    auto table = std::make_shared<const agora::EmbeddingTable>(
        agora::load_embeddings(data_path("embeddings_dim4.txt")));
    agora::QueryService service(bundle, table);
    TestServer http(service);

    json expected = agora::summary_to_json(
        agora::summarize_thread(bundle.summary_context, "p01", agora::SummaryMethod::textrank, 2,
                                table.get(), bundle.summarize_defaults.pagerank));
    expected["bundle_digest"] = bundle.bundle_digest;

    const json body = get_json(http.port, "/proposals/p01/summary?method=textrank&n=2", 200);
    CHECK(body == expected);
    CHECK(!body.at("sentences").empty());
}

TEST_CASE("replace swaps the served snapshot atomically", "[serve]") {
    const agora::AnalysisBundle& bundle = served_bundle();
    agora::QueryService service(bundle, nullptr);
    TestServer http(service);

    CHECK(get_json(http.port, "/health", 200).at("bundle_digest") == bundle.bundle_digest);
    CHECK(get_json(http.port, "/users/u01/related", 200).at("id") == "u01");

    // Swap in a rebuilt snapshot without a user model.
    agora::AnalysisBundle next = bundle;
    next.has_user_model = false;
    next.user_neighbors.clear();
    next.bundle_digest = "0123456789abcdef";
    service.replace(std::move(next), nullptr);

    CHECK(get_json(http.port, "/health", 200).at("bundle_digest") == "0123456789abcdef");
    const json denied = get_json(http.port, "/users/u01/related", 404);
    CHECK(denied.at("error") == "no user model in this bundle");
    CHECK(denied.at("bundle_digest") == "0123456789abcdef");

    // Proposal routes keep working against the new snapshot.
    CHECK(get_json(http.port, "/proposals/p01/tags", 200).at("bundle_digest") ==
          "0123456789abcdef");
}
