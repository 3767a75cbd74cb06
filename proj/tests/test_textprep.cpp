// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 Agora Contributors

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "agora/textprep.hpp"

namespace {

struct RawDoc {
    std::string doc_id;
    std::string text;
};

// Writes `content` to a fresh file under the system temp dir and returns its path.
std::filesystem::path write_temp(const std::string& stem, const std::string& content) {
    static int counter = 0;
    const auto path = std::filesystem::temp_directory_path() /
                      (stem + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

} // namespace

TEST_CASE("textprep: normalize folds case, accents and ordinals", "[textprep]") {
    CHECK(agora::normalize_text("Árboles JÓVENES, ñoño; CAFÉ") == "arboles jovenes nono cafe");
    CHECK(agora::normalize_text("1ª planta, 2º piso") == "1a planta 2o piso");
    CHECK(agora::normalize_text("Æsir straße Þing") == "aesir strasse thing");
    CHECK(agora::normalize_text("œuvre Čech śląsk żaba Łódź") == "oeuvre cech slask zaba lodz");
    // combining acute after 'e' is dropped
    CHECK(agora::normalize_text("cafe\xCC\x81") == "cafe");
}

TEST_CASE("textprep: normalize turns punctuation into boundaries", "[textprep]") {
    CHECK(agora::normalize_text("foo_bar-baz") == "foo bar baz");
    CHECK(agora::normalize_text("a\xE2\x80\x93" "b") == "a b"); // en dash
    CHECK(agora::normalize_text("  hola   mundo\t\n ") == "hola mundo");
    CHECK(agora::normalize_text("¡Hola! ¿Qué tal?") == "hola que tal");
}

TEST_CASE("textprep: normalize strips markup and urls", "[textprep]") {
    CHECK(agora::normalize_text("<p>Ver</p> https://example.com/x?q=1 fin") == "ver fin");
    CHECK(agora::normalize_text("visita www.madrid.es ahora") == "visita ahora");
    CHECK(agora::normalize_text("3 < 5 pero 7 > 5") == "3 5 pero 7 5"); // bare '<' is not a tag
}

TEST_CASE("textprep: normalize passes unknown scripts through", "[textprep]") {
    const std::string cyrillic = "\xD0\xBC\xD0\xB8\xD1\x80"; // "мир"
    CHECK(agora::normalize_text(cyrillic) == cyrillic);
}

TEST_CASE("textprep: normalize is idempotent", "[textprep]") {
    const std::string once = agora::normalize_text("<b>¡MÁS árboles!</b> en www.x.es — YA");
    CHECK(agora::normalize_text(once) == once);
}

TEST_CASE("textprep: normalize counts invalid utf-8 bytes", "[textprep]") {
    agora::NormalizeCounters counters;
    CHECK(agora::normalize_text("caf\xE9", &counters) == "caf"); // latin-1 stray byte
    CHECK(counters.invalid_bytes == 1);
    CHECK(agora::normalize_text("ok", &counters) == "ok");
    CHECK(counters.invalid_bytes == 1); // counter accumulates, nothing new added
}

TEST_CASE("textprep: tokenize splits on non-alphanumerics and enforces length", "[textprep]") {
    CHECK(agora::tokenize("hola mundo de 42") ==
          std::vector<std::string>{"hola", "mundo", "de", "42"});
    CHECK(agora::tokenize("hola mundo de 42", 3) == std::vector<std::string>{"hola", "mundo"});
    CHECK(agora::tokenize("a,b!!c", 1) == std::vector<std::string>{"a", "b", "c"});
    CHECK(agora::tokenize("") == std::vector<std::string>{});
    // length is measured in codepoints, not bytes
    CHECK(agora::detail::codepoint_length("a\xC3\xB1o") == 3);
    CHECK(agora::tokenize("\xC3\xB1u", 2) == std::vector<std::string>{"\xC3\xB1u"});
}

TEST_CASE("textprep: filter applies stoplist, lemmas and whitelist in order", "[textprep]") {
    agora::PrepConfig config;
    config.stoplist = {"las", "mejor"};
    config.lemma_lexicon = {{"propuestas", "propuesta"}, {"mejores", "mejor"}, {"xx", "x"}};

    // stoplist hit on the surface form wins before lemma lookup
    CHECK(agora::filter_tokens({"las"}, config) == std::vector<std::string>{});
    // lemma substitution
    CHECK(agora::filter_tokens({"propuestas"}, config) == std::vector<std::string>{"propuesta"});
    // lemma output re-checked against the stoplist
    CHECK(agora::filter_tokens({"mejores"}, config) == std::vector<std::string>{});
    // lemma output re-checked against the length floor
    CHECK(agora::filter_tokens({"xx"}, config) == std::vector<std::string>{});

    config.noun_whitelist = {{"parque", "propuesta"}};
    CHECK(agora::filter_tokens({"propuestas", "parque", "calle"}, config) ==
          std::vector<std::string>{"propuesta", "parque"});
}

TEST_CASE("textprep: bigram scores match the formula", "[textprep]") {
    // one doc: a b a b a b c  -> pairs (a,b)x3 (b,a)x2 (b,c)x1; counts a=3 b=3 c=1; N=7
    std::vector<agora::TokenDocument> docs{{"d0", {"a", "b", "a", "b", "a", "b", "c"}}};
    agora::PrepConfig config;
    config.bigram_min_count = 2;
    config.bigram_score_threshold = 0.0;

    const auto table = agora::learn_bigrams(docs, config);
    REQUIRE(table.scores.size() == 2);
    CHECK(table.scores.at({"a", "b"}) == Catch::Approx(1.0 * 7.0 / 9.0).epsilon(0).margin(1e-15));
    // count == min_count yields score exactly zero, which still passes a zero threshold
    CHECK(table.scores.at({"b", "a"}) == 0.0);
    CHECK_FALSE(table.contains("b", "c")); // below min_count

    config.bigram_score_threshold = 0.5;
    const auto strict = agora::learn_bigrams(docs, config);
    REQUIRE(strict.scores.size() == 1);
    CHECK(strict.contains("a", "b"));
}

TEST_CASE("textprep: bigram merges are greedy and non-overlapping", "[textprep]") {
    agora::BigramTable table;
    table.scores[{"a", "b"}] = 1.0;
    CHECK(agora::apply_bigrams({"a", "b", "a", "b", "a", "b", "c"}, table) ==
          std::vector<std::string>{"a_b", "a_b", "a_b", "c"});

    table.scores[{"a", "a"}] = 1.0;
    // the leftmost pair (a,a) consumes both tokens, so (a,b) cannot fire at position 1
    CHECK(agora::apply_bigrams({"a", "a", "b"}, table) == std::vector<std::string>{"a_a", "b"});

    agora::BigramTable chain;
    chain.scores[{"a", "b"}] = 1.0;
    chain.scores[{"b", "c"}] = 1.0;
    // single pass: no trigram, and the middle token is gone once merged
    CHECK(agora::apply_bigrams({"a", "b", "c"}, chain) == std::vector<std::string>{"a_b", "c"});
}

TEST_CASE("textprep: preprocess_corpus runs the full pipeline", "[textprep]") {
    std::vector<RawDoc> raw{
        {"p1", "<p>Carril bici en el PARQUE</p>"},
        {"p2", "Carril bici: carril bici www.x.es"},
        {"p3", "el la de"},            // nothing survives filtering
        {"p4", "caf\xE9 con carril bici"}, // one invalid byte
    };
    agora::PrepConfig config;
    config.stoplist = {"el", "la", "de", "en", "con"};
    config.bigram_min_count = 2;
    config.bigram_score_threshold = 0.0;

    const auto result = agora::preprocess_corpus(raw, config);
    REQUIRE(result.docs.size() == 4);
    CHECK(result.docs[0].doc_id == "p1");
    CHECK(result.docs[0].tokens == std::vector<std::string>{"carril_bici", "parque"});
    CHECK(result.docs[1].tokens == std::vector<std::string>{"carril_bici", "carril_bici"});
    CHECK(result.docs[2].tokens.empty());
    CHECK(result.docs[3].tokens == std::vector<std::string>{"caf", "carril_bici"});
    CHECK(result.empty_doc_ids == std::vector<std::string>{"p3"});
    CHECK(result.invalid_bytes == 1);
    CHECK(result.bigrams.contains("carril", "bici"));
}

TEST_CASE("textprep: config validation", "[textprep]") {
    agora::PrepConfig config;
    config.min_token_length = 0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config.min_token_length = 2;
    config.bigram_score_threshold = -1.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("textprep: stoplist entries are normalized on load", "[textprep]") {
    const auto path = write_temp("stoplist", "MÁS\nDesde\n\n   \nya\n");
    const auto stoplist = agora::load_stoplist(path.string());
    CHECK(stoplist.size() == 3);
    CHECK(stoplist.count("mas") == 1);
    CHECK(stoplist.count("desde") == 1);
    CHECK(stoplist.count("ya") == 1);
    std::filesystem::remove(path);
    CHECK_THROWS_WITH(agora::load_stoplist(path.string()),
                      Catch::Matchers::StartsWith("cannot open stoplist"));
}

TEST_CASE("textprep: lemma lexicon parsing", "[textprep]") {
    const auto good = write_temp("lemmas", "Propuestas\tpropuesta\n\nÁrboles\tárbol\n");
    const auto lexicon = agora::load_lemma_lexicon(good.string());
    REQUIRE(lexicon.size() == 2);
    CHECK(lexicon.at("propuestas") == "propuesta");
    CHECK(lexicon.at("arboles") == "arbol");
    std::filesystem::remove(good);

    const auto bad = write_temp("lemmas_bad", "surface lemma without tab\n");
    CHECK_THROWS_WITH(agora::load_lemma_lexicon(bad.string()),
                      "lemma lexicon line 1: expected surface<TAB>lemma");
    std::filesystem::remove(bad);
}
