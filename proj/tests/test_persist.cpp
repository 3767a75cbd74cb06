// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 Agora Contributors

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "agora/config.hpp"
#include "agora/matrix_io.hpp"

namespace {

const std::string kDataDir = AGORA_TEST_DATA_DIR;

std::filesystem::path write_temp(const std::string& stem, const std::string& content) {
    static int counter = 0;
    const auto path = std::filesystem::temp_directory_path() /
                      (stem + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

} // namespace

TEST_CASE("persist: matrix round-trip is bit-exact", "[persist]") {
    Eigen::MatrixXd m(2, 3);
    m << 1.0, -0.0, std::numeric_limits<double>::denorm_min(),  //
        -1e300, 3.141592653589793, std::numeric_limits<double>::epsilon();

    std::stringstream stream;
    agora::write_matrix(m, stream);
    const Eigen::MatrixXd back = agora::read_matrix(stream);

    REQUIRE(back.rows() == 2);
    REQUIRE(back.cols() == 3);
    CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);
    CHECK(std::signbit(back(0, 1))); // negative zero survives

    // header layout: magic, version 1, rows, cols as little-endian u32
    const std::string bytes = stream.str();
    REQUIRE(bytes.size() == 16 + 6 * 8);
    CHECK(bytes.substr(0, 4) == "AGMX");
    CHECK(bytes[4] == 1);
    CHECK(bytes[8] == 2);  // rows
    CHECK(bytes[12] == 3); // cols
}

TEST_CASE("persist: matrix file helpers", "[persist]") {
    const auto path = (std::filesystem::temp_directory_path() /
                       ("agora_mat_" + std::to_string(::getpid()) + ".mat"))
                          .string();
    const Eigen::MatrixXd m = Eigen::MatrixXd::Random(5, 4);
    agora::write_matrix(m, path);
    CHECK((agora::read_matrix_file(path) - m).cwiseAbs().maxCoeff() == 0.0);
    std::filesystem::remove(path);

    CHECK_THROWS_WITH(agora::read_matrix_file(path),
                      Catch::Matchers::StartsWith("cannot open matrix file"));
}

TEST_CASE("persist: matrix read failure modes", "[persist]") {
    std::stringstream good;
    agora::write_matrix(Eigen::MatrixXd::Ones(2, 2), good);
    const std::string bytes = good.str();

    std::istringstream bad_magic("NOPE" + bytes.substr(4));
    CHECK_THROWS_WITH(agora::read_matrix(bad_magic, "theta.mat"),
                      "theta.mat: not a matrix file (bad magic)");

    std::string v2 = bytes;
    v2[4] = 2;
    std::istringstream bad_version(v2);
    CHECK_THROWS_WITH(agora::read_matrix(bad_version),
                      "matrix: unsupported matrix format version 2 (expected 1)");

    std::istringstream short_header(bytes.substr(0, 10));
    CHECK_THROWS_WITH(agora::read_matrix(short_header), "matrix: truncated header");

    std::istringstream short_body(bytes.substr(0, bytes.size() - 4));
    CHECK_THROWS_WITH(agora::read_matrix(short_body), "matrix: truncated array file");
}

TEST_CASE("persist: config loads with resolved paths and inheritance", "[persist]") {
    const auto config = agora::load_config(kDataDir + "/mini_config.json");

    CHECK(config.version == 1);
    CHECK(config.proposals_csv == kDataDir + "/mini/proposals.csv");
    CHECK(config.comments_csv == kDataDir + "/mini/comments.csv");
    CHECK(config.tags_csv == kDataDir + "/mini/tags.csv");
    CHECK(config.stopwords_path == kDataDir + "/stopwords_es.txt");
    CHECK(std::filesystem::path(config.proposals_csv).is_absolute());

    CHECK(config.bigram_min_count == 3);
    CHECK(config.bigram_score_threshold == 10.0);
    CHECK(config.vectorize.min_df == 3);
    CHECK(config.vectorize.max_df_ratio == 0.5);

    CHECK(config.model.topics == 3);
    CHECK(config.model.seed == 42);
    CHECK(config.model.max_sweeps == 500); // defaults kept
    CHECK(config.user_model_enabled);
    CHECK(config.user_model.topics == 2);       // overridden
    CHECK(config.user_model.seed == 42);        // inherited from model
    CHECK(config.user_model.max_sweeps == 500); // inherited default

    CHECK(config.insights.neighbors_k == 10);
    CHECK(config.summarize.method == agora::SummaryMethod::tfidf);
    CHECK(config.summarize.sentences == 3);
    CHECK(config.output_dir == kDataDir + "/bundle");

    config.validate(); // all referenced files exist

    const auto prep = config.make_prep_config();
    CHECK(prep.stoplist.count("el") == 1);
    CHECK(prep.bigram_min_count == 3);
}

TEST_CASE("persist: config accepts comments and rejects bad versions", "[persist]") {
    const auto commented = write_temp("cfg_comments",
                                      "{\n"
                                      "  // line comment\n"
                                      "  \"version\": 1, /* block */\n"
                                      "  \"data\": {\"proposals\": \"p.csv\"}\n"
                                      "}\n");
    const auto config = agora::load_config(commented.string());
    CHECK(std::filesystem::path(config.proposals_csv).filename() == "p.csv");
    std::filesystem::remove(commented);

    const auto old = write_temp("cfg_old", "{\"version\": 7}");
    CHECK_THROWS_WITH(agora::load_config(old.string()),
                      "config: unsupported version 7 (expected 1)");
    std::filesystem::remove(old);

    const auto broken = write_temp("cfg_broken", "{\"version\": 1,,}");
    CHECK_THROWS_WITH(agora::load_config(broken.string()),
                      Catch::Matchers::StartsWith("config parse error in "));
    std::filesystem::remove(broken);

    CHECK_THROWS_WITH(agora::load_config("/no/such/config.json"),
                      Catch::Matchers::StartsWith("cannot open config file"));
}

TEST_CASE("persist: config validation errors", "[persist]") {
    agora::PipelineConfig config;
    CHECK_THROWS_WITH(config.validate(), "config: data.proposals is required");

    config.proposals_csv = "/definitely/missing.csv";
    CHECK_THROWS_WITH(config.validate(),
                      "config: data.proposals does not exist: /definitely/missing.csv");

    const auto delim = write_temp("cfg_delim",
                                  "{\"version\": 1, \"data\": {\"delimiter\": \";;\"}}");
    CHECK_THROWS_WITH(agora::load_config(delim.string()),
                      "config: data.delimiter must be a single character");
    std::filesystem::remove(delim);
}

TEST_CASE("persist: schema column overrides", "[persist]") {
    const auto path = write_temp("cfg_schema",
                                 "{\"version\": 1, \"data\": {\"proposals\": \"p.csv\","
                                 " \"delimiter\": \";\", \"columns\": {"
                                 "  \"proposals\": {\"votes_total\": \"cached_votes_total\","
                                 "                  \"author_id\": \"user_id\"},"
                                 "  \"comments\": {\"proposal_id\": \"commentable_id\"},"
                                 "  \"tags\": {\"tag\": \"name\", \"proposal_id\": \"taggable_id\"}"
                                 "}}}");
    const auto config = agora::load_config(path.string());
    CHECK(config.schema.delimiter == ';');
    CHECK(config.schema.proposals.votes_total == "cached_votes_total");
    CHECK(config.schema.proposals.author_id == "user_id");
    CHECK(config.schema.proposals.id == "id"); // untouched default
    CHECK(config.schema.comments.proposal_id == "commentable_id");
    CHECK(config.schema.tags.tag == "name");
    CHECK(config.schema.tags.proposal_id == "taggable_id");
    std::filesystem::remove(path);
}

TEST_CASE("persist: config snapshot carries the effective values", "[persist]") {
    const auto config = agora::load_config(kDataDir + "/mini_config.json");
    const auto snapshot = agora::config_snapshot(config);

    CHECK(snapshot["version"] == 1);
    CHECK(snapshot["data"]["proposals"] == config.proposals_csv);
    CHECK(snapshot["model"]["topics"] == 3);
    CHECK(snapshot["model"]["seed"] == 42);
    CHECK(snapshot["user_model"]["topics"] == 2);
    CHECK(snapshot["user_model"]["enabled"] == true);
    CHECK(snapshot["vectorize"]["min_df"] == 3);
    CHECK(snapshot["summarize"]["method"] == "tfidf");
    CHECK(snapshot["summarize"]["pagerank"]["damping"] == 0.85);
    CHECK(snapshot["insights"]["neighbors"] == 10);
    CHECK(snapshot["output"] == config.output_dir);
}
