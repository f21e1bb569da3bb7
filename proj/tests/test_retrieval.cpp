// Copyright 2026 The Microtheory Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "mtlib/errors.hpp"
#include "mtlib/retrieval.hpp"
#include "test_util.hpp"

using namespace mt;
using namespace mt_test;

namespace {

ChunkedCorpus three_doc_corpus() {
  ChunkedCorpus corpus;
  corpus.add_document("d1", "the cat sat on the mat", 100);
  corpus.add_document("d2", "the dog sat on the log", 100);
  corpus.add_document("d3", "cats and dogs", 100);
  return corpus;
}

double score_of(const std::vector<SearchHit>& hits, const std::string& id) {
  for (const auto& hit : hits) {
    if (hit.chunk_id == id) return hit.score;
  }
  FAIL("chunk not in result: " << id);
  return 0.0;
}

}  // namespace

TEST_CASE("chunking splits greedily with an exact size") {
  std::string doc;
  for (int i = 0; i < 250; ++i) doc += "w" + std::to_string(i) + " ";
  auto chunks = chunk_document("d", doc, 100);
  REQUIRE(chunks.size() == 3);
  CHECK(chunks[0].word_count == 100);
  CHECK(chunks[1].word_count == 100);
  CHECK(chunks[2].word_count == 50);
  CHECK(chunks[0].chunk_id == "d#0");
  CHECK(chunks[2].chunk_id == "d#2");
  // Concatenation reproduces the token sequence.
  std::string glued;
  for (const auto& c : chunks) {
    if (!glued.empty()) glued += ' ';
    glued += c.text;
  }
  std::istringstream a(doc), b(glued);
  std::string wa, wb;
  while (a >> wa) {
    REQUIRE(static_cast<bool>(b >> wb));
    CHECK(wa == wb);
  }
  CHECK_FALSE(static_cast<bool>(b >> wb));
}

TEST_CASE("a short document is a single chunk; empty has none") {
  std::string doc;
  for (int i = 0; i < 100; ++i) doc += "x ";
  CHECK(chunk_document("d", doc, 100).size() == 1);
  CHECK(chunk_document("d", "", 100).empty());
  CHECK(chunk_document("d", "   ", 100).empty());
}

TEST_CASE("a single matching document ranks first") {
  ChunkedCorpus corpus;
  corpus.add_document("a", "volcanoes erupt molten lava", 100);
  corpus.add_document("b", "fish swim in water", 100);
  auto hits = bm25_search("lava", corpus, 2);
  REQUIRE(!hits.empty());
  CHECK(hits[0].chunk_id == "a#0");
  CHECK(hits[0].score > 0.0);
}

TEST_CASE("bm25 matches a longhand computation to 1e-9") {
  // Corpus (one chunk each, token lengths 6, 6, 3; avg 5):
  //   d1: the cat sat on the mat
  //   d2: the dog sat on the log
  //   d3: cats and dogs
  // Query "cat sat": df(cat)=1, df(sat)=2, N=3, k1=1.2, b=0.75.
  auto corpus = three_doc_corpus();
  auto hits = bm25_search("cat sat", corpus, 3, 1.2, 0.75);
  REQUIRE(hits.size() == 3);

  const double idf_cat = std::log(1.0 + (3.0 - 1.0 + 0.5) / (1.0 + 0.5));
  const double idf_sat = std::log(1.0 + (3.0 - 2.0 + 0.5) / (2.0 + 0.5));
  const double norm6 = 1.2 * (1.0 - 0.75 + 0.75 * 6.0 / 5.0);
  const double tf1 = 1.0 * (1.2 + 1.0) / (1.0 + norm6);
  const double d1_expected = idf_cat * tf1 + idf_sat * tf1;
  const double d2_expected = idf_sat * tf1;

  CHECK(score_of(hits, "d1#0") == doctest::Approx(d1_expected).epsilon(1e-9));
  CHECK(score_of(hits, "d2#0") == doctest::Approx(d2_expected).epsilon(1e-9));
  CHECK(score_of(hits, "d3#0") == 0.0);  // "cats" does not match "cat"
  CHECK(hits[0].chunk_id == "d1#0");
}

TEST_CASE("out-of-vocabulary queries score zero everywhere") {
  auto corpus = three_doc_corpus();
  auto hits = bm25_search("zephyr quark", corpus, 3);
  REQUIRE(hits.size() == 3);
  for (const auto& hit : hits) CHECK(hit.score == 0.0);
  // Zero ties are ordered by chunk id.
  CHECK(hits[0].chunk_id == "d1#0");
  CHECK(hits[1].chunk_id == "d2#0");
  CHECK(hits[2].chunk_id == "d3#0");
}

TEST_CASE("empty query gives no hits") {
  auto corpus = three_doc_corpus();
  CHECK(bm25_search("", corpus, 3).empty());
  CHECK(bm25_search("...!!!", corpus, 3).empty());
}

TEST_CASE("scores are invariant to chunk insertion order") {
  Rng rng(77);
  std::vector<std::pair<std::string, std::string>> docs;
  const char* words[] = {"sun", "moon", "star", "rock", "tree", "fish"};
  for (int d = 0; d < 12; ++d) {
    std::string text;
    const int len = rng.range(3, 12);
    for (int w = 0; w < len; ++w) {
      text += words[rng.below(6)];
      text += ' ';
    }
    docs.emplace_back("doc" + std::to_string(d), text);
  }
  ChunkedCorpus forward, backward;
  for (const auto& [id, text] : docs) forward.add_document(id, text, 100);
  for (auto it = docs.rbegin(); it != docs.rend(); ++it) {
    backward.add_document(it->first, it->second, 100);
  }
  auto hits_f = bm25_search("sun rock fish", forward, 100);
  auto hits_b = bm25_search("sun rock fish", backward, 100);
  REQUIRE(hits_f.size() == hits_b.size());
  for (std::size_t i = 0; i < hits_f.size(); ++i) {
    CHECK(hits_f[i].chunk_id == hits_b[i].chunk_id);
    CHECK(hits_f[i].score == doctest::Approx(hits_b[i].score).epsilon(1e-12));
  }
}

TEST_CASE("chunks without query terms stay at zero as the corpus grows") {
  ChunkedCorpus corpus;
  corpus.add_document("a", "volcano lava magma", 100);
  corpus.add_document("b", "fish swim deep", 100);
  auto before = bm25_search("lava", corpus, 10);
  CHECK(score_of(before, "b#0") == 0.0);
  corpus.add_document("c", "more unrelated words entirely", 100);
  auto after = bm25_search("lava", corpus, 10);
  CHECK(score_of(after, "b#0") == 0.0);
  CHECK(score_of(after, "c#0") == 0.0);
}

TEST_CASE("index round-trips through its binary file") {
  TempDir dir("index");
  auto corpus = three_doc_corpus();
  corpus.save(dir.file("index.bin"));
  auto loaded = ChunkedCorpus::load(dir.file("index.bin"));
  REQUIRE(loaded.size() == corpus.size());
  auto hits_a = bm25_search("cat sat", corpus, 3);
  auto hits_b = bm25_search("cat sat", loaded, 3);
  REQUIRE(hits_a.size() == hits_b.size());
  for (std::size_t i = 0; i < hits_a.size(); ++i) {
    CHECK(hits_a[i].chunk_id == hits_b[i].chunk_id);
    CHECK(hits_a[i].score == hits_b[i].score);
  }
  CHECK_THROWS_AS(ChunkedCorpus::load(dir.file("missing.bin")),
                  TransportError);
}

namespace {

ChunkedCorpus corpus_of(const std::vector<std::pair<std::string, std::string>>&
                            id_texts) {
  ChunkedCorpus corpus;
  for (const auto& [id, text] : id_texts) {
    Chunk chunk;
    chunk.chunk_id = id;
    chunk.doc_id = id;
    chunk.text = text;
    chunk.word_count = 1;
    corpus.add_chunk(std::move(chunk));
  }
  return corpus;
}

std::vector<std::string> ids_of(const std::vector<Chunk>& chunks) {
  std::vector<std::string> ids;
  for (const auto& c : chunks) ids.push_back(c.chunk_id);
  return ids;
}

}  // namespace

TEST_CASE("two sources interleave one by one") {
  auto a = corpus_of({{"a1", "quartz topic"}, {"a2", "quartz topic extra"}});
  auto b = corpus_of({{"b1", "quartz item"}, {"b2", "quartz item extra"}});
  RetrievalConfig config;
  config.first_stage_k = 4;
  config.final_k = 4;
  config.mode = CombinationMode::kInterleave;
  IdentityReranker identity;
  auto result = two_phase("quartz", {{&a, false}, {&b, false}}, config,
                          identity);
  CHECK(ids_of(result) == std::vector<std::string>{"a1", "b1", "a2", "b2"});
}

TEST_CASE("a single source passes through the combination unchanged") {
  auto a = corpus_of({{"a1", "quartz veins"}, {"a2", "quartz crystal"}});
  RetrievalConfig config;
  config.first_stage_k = 4;
  config.final_k = 4;
  config.mode = CombinationMode::kInterleave;
  IdentityReranker identity;
  auto combined = two_phase("quartz", {{&a, false}}, config, identity);
  auto direct = bm25_search("quartz", a, 4);
  REQUIRE(combined.size() == direct.size());
  for (std::size_t i = 0; i < combined.size(); ++i) {
    CHECK(combined[i].chunk_id == direct[i].chunk_id);
  }
}

TEST_CASE("concat mode puts every microtheory hit before corpus hits") {
  auto mt_source = corpus_of({{"m1", "quartz fact"}, {"m2", "quartz note"}});
  auto wiki = corpus_of({{"w1", "quartz page"}, {"w2", "quartz article"}});
  auto books = corpus_of({{"t1", "quartz chapter"}});
  RetrievalConfig config;
  config.first_stage_k = 8;
  config.final_k = 8;
  config.mode = CombinationMode::kConcatMtFirst;
  IdentityReranker identity;
  auto result = two_phase(
      "quartz", {{&wiki, false}, {&mt_source, true}, {&books, false}}, config,
      identity);
  auto ids = ids_of(result);
  REQUIRE(ids.size() == 5);
  CHECK(ids[0] == "m1");
  CHECK(ids[1] == "m2");
  // Non-mt sources interleave after the microtheory block.
  CHECK(ids[2] == "w1");
  CHECK(ids[3] == "t1");
  CHECK(ids[4] == "w2");
}

TEST_CASE("final_k must not exceed first_stage_k and truncation applies") {
  auto a = corpus_of({{"a1", "quartz a"}, {"a2", "quartz b"},
                      {"a3", "quartz c"}});
  RetrievalConfig config;
  config.first_stage_k = 2;
  config.final_k = 3;
  IdentityReranker identity;
  CHECK_THROWS_AS(two_phase("quartz", {{&a, false}}, config, identity),
                  ValidationError);

  config.first_stage_k = 3;
  config.final_k = 2;
  auto result = two_phase("quartz", {{&a, false}}, config, identity);
  CHECK(result.size() == 2);
}

TEST_CASE("two_phase output is a permutation-truncation of stage one") {
  Rng rng(31);
  const char* words[] = {"ore", "vein", "gem", "dust", "seam", "mine"};
  for (int round = 0; round < 30; ++round) {
    std::vector<std::pair<std::string, std::string>> docs_a, docs_b;
    for (int d = 0; d < 6; ++d) {
      std::string text;
      for (int w = 0, len = rng.range(2, 6); w < len; ++w) {
        text += words[rng.below(6)];
        text += ' ';
      }
      docs_a.emplace_back("a" + std::to_string(d), text);
    }
    for (int d = 0; d < 6; ++d) {
      std::string text;
      for (int w = 0, len = rng.range(2, 6); w < len; ++w) {
        text += words[rng.below(6)];
        text += ' ';
      }
      docs_b.emplace_back("b" + std::to_string(d), text);
    }
    auto a = corpus_of(docs_a);
    auto b = corpus_of(docs_b);
    RetrievalConfig config;
    config.first_stage_k = static_cast<std::size_t>(rng.range(2, 6));
    config.final_k = static_cast<std::size_t>(
        rng.range(1, static_cast<int>(config.first_stage_k)));
    config.mode = rng.below(2) ? CombinationMode::kInterleave
                               : CombinationMode::kConcatMtFirst;
    MockEmbeddingBackend embeddings(static_cast<std::uint64_t>(round), 16);
    auto shared = std::shared_ptr<EmbeddingBackend>(&embeddings,
                                                    [](EmbeddingBackend*) {});
    EmbeddingReranker reranker(shared);
    auto result =
        two_phase("ore gem", {{&a, rng.below(2) == 0}, {&b, false}}, config,
                  reranker);
    CHECK(result.size() <= config.final_k);

    std::set<std::string> candidates;
    for (const auto& hit : bm25_search("ore gem", a, config.first_stage_k)) {
      candidates.insert(hit.chunk_id);
    }
    for (const auto& hit : bm25_search("ore gem", b, config.first_stage_k)) {
      candidates.insert(hit.chunk_id);
    }
    std::set<std::string> seen;
    for (const auto& chunk : result) {
      CHECK(candidates.count(chunk.chunk_id) == 1);
      CHECK(seen.insert(chunk.chunk_id).second);  // no duplicates
    }
  }
}
