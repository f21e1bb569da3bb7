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

// mtlib first: Eigen must precede httplib (resolv.h macro clash).
#include "mtlib/errors.hpp"
#include "mtlib/providers.hpp"
#include "mtlib/text.hpp"
#include "test_util.hpp"

#include <httplib.h>

#include <atomic>
#include <thread>

using namespace mt;
using namespace mt_test;

TEST_CASE("mock chat is a pure function of prompt and seed") {
  MockChatBackend chat(1);
  CHECK(chat.chat("hello there") == chat.chat("hello there"));
  MockChatBackend other_seed(2);
  // Rating prompts vary with the seed.
  const std::string rating_prompt =
      "QUESTION: why\nFACT: because\nRATING:";
  MockChatBackend chat1(1), chat7(7);
  std::vector<std::string> replies;
  for (int seed = 0; seed < 8; ++seed) {
    replies.push_back(MockChatBackend(seed).chat(rating_prompt));
  }
  bool all_same = true;
  for (const auto& r : replies) all_same = all_same && r == replies[0];
  CHECK_FALSE(all_same);
  CHECK(chat.calls() == 2);
}

TEST_CASE("mock chat rejects an empty prompt") {
  MockChatBackend chat(1);
  CHECK_THROWS_AS(chat.chat(""), ValidationError);
}

TEST_CASE("mock embeddings are unit norm and deterministic") {
  MockEmbeddingBackend embed(3, 32);
  std::vector<std::string> texts = {"water flows downhill", "water flows downhill",
                                    "aaa", "zzz"};
  Eigen::MatrixXd vectors = embed.embed_batch(texts);
  REQUIRE(vectors.rows() == 4);
  REQUIRE(vectors.cols() == 32);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(vectors.row(i).norm() - 1.0) < 1e-6);
  }
  // Identical texts embed identically: cosine exactly the self-dot.
  CHECK(vectors.row(0).dot(vectors.row(1)) ==
        doctest::Approx(1.0).epsilon(1e-9));
  // Disjoint trigram profiles stay apart.
  CHECK(vectors.row(2).dot(vectors.row(3)) < 1.0 - 1e-6);
  CHECK_THROWS_AS(embed.embed_batch({""}), ValidationError);
}

TEST_CASE("table entailment scorer with default and threshold contract") {
  TableEntailmentScorer scorer({{{"A", "B"}, 0.99}}, 0.5);
  CHECK(scorer.score("A", "B") == 0.99);
  CHECK(scorer.score("B", "A") == 0.0);  // unlisted pair
  CHECK(scorer.entails("A", "B"));
  CHECK_FALSE(scorer.entails("B", "A"));

  // Decision boundary is >=.
  TableEntailmentScorer edge({{{"p", "q"}, 0.5}}, 0.5);
  CHECK(edge.entails("p", "q"));
}

TEST_CASE("mock engine serves its table and validates fact ids") {
  std::vector<Fact> pool = {make_fact("f1", "one"), make_fact("f2", "two")};
  ProveResult entry;
  entry.bases = {{"f1", "f2"}};
  MockEngineBackend engine({{"h1", entry}});

  Question q = make_question("q1", "which?", "h1");
  auto result = engine.prove("h1", q, pool);
  REQUIRE(result.bases.size() == 1);
  CHECK(result.bases[0] == std::vector<std::string>{"f1", "f2"});

  // Unknown hypothesis: empty result, not an error.
  CHECK(engine.prove("unknown", q, pool).bases.empty());

  // A basis naming a fact outside the pool violates the contract.
  ProveResult bad;
  bad.bases = {{"f1", "ghost"}};
  MockEngineBackend broken({{"h2", bad}});
  CHECK_THROWS_AS(broken.prove("h2", q, pool), IntegrityError);

  CHECK_THROWS_AS(engine.prove("h1", q, {}), ValidationError);
}

TEST_CASE("lexical fallback engine is deterministic and pool-grounded") {
  std::vector<Fact> pool;
  for (int i = 0; i < 8; ++i) {
    pool.push_back(make_fact("f" + std::to_string(i),
                             "rivers carry sediment item" + std::to_string(i)));
  }
  MockEngineBackend engine({}, /*lexical_fallback=*/true, 5);
  Question q = make_question("q1", "what do rivers carry?",
                             "rivers carry sediment to the sea");
  auto a = engine.prove(q.options[0].text, q, pool);
  auto b = engine.prove(q.options[0].text, q, pool);
  CHECK(a.bases == b.bases);
  REQUIRE(!a.bases.empty());
  for (const auto& basis : a.bases) {
    for (const auto& id : basis) {
      CHECK(id.substr(0, 1) == "f");
    }
  }
}

TEST_CASE("chat-backed rater parses the first digit and 0 on garbage") {
  auto chat_five = std::make_shared<FnChat>(
      [](const std::string&) { return std::string("Rating: 5 (core)"); });
  ChatFactRater rater(chat_five, PromptSet::defaults());
  Question q = make_question("q1", "why is the sky blue?",
                             "the sky is blue because of scattering");
  CHECK(rater.rate(q, "light scatters in air") == 5);

  auto chat_bad = std::make_shared<FnChat>(
      [](const std::string&) { return std::string("no idea"); });
  ChatFactRater bad(chat_bad, PromptSet::defaults());
  CHECK(bad.rate(q, "light scatters in air") == 0);
}

TEST_CASE("parallel_for_ordered keeps order and propagates failures") {
  std::vector<int> out(500, 0);
  parallel_for_ordered(500, 8, [&](std::size_t i) {
    out[i] = static_cast<int>(i * i);
  });
  for (int i = 0; i < 500; ++i) CHECK(out[static_cast<std::size_t>(i)] == i * i);

  CHECK_THROWS_AS(
      parallel_for_ordered(100, 8,
                           [&](std::size_t i) {
                             if (i == 37) throw TransportError("boom");
                           }),
      TransportError);
}

TEST_CASE("offline suite is reproducible end to end") {
  auto s1 = make_offline_suite(99);
  auto s2 = make_offline_suite(99);
  const std::string prompt = "QUESTION: what erodes rock?\n\nQUERIES:\n"
                             "(QUERY A) water erodes rock over time\n\nTHEORY:\n";
  CHECK(s1.chat->chat(prompt) == s2.chat->chat(prompt));
  auto e1 = s1.embedding->embed("erosion moves sediment");
  auto e2 = s2.embedding->embed("erosion moves sediment");
  CHECK((e1 - e2).norm() == 0.0);
}

// --- remote client behavior against a local fake server ---

namespace {

struct FakeServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> hits{0};

  explicit FakeServer(std::function<void(const httplib::Request&,
                                         httplib::Response&, int)> handler) {
    server.Post("/v1/test", [this, handler](const httplib::Request& req,
                                            httplib::Response& res) {
      handler(req, res, hits.fetch_add(1));
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~FakeServer() {
    server.stop();
    thread.join();
  }
  EndpointConfig config() const {
    EndpointConfig ep;
    ep.base_url = "http://127.0.0.1:" + std::to_string(port);
    ep.path = "/v1/test";
    ep.max_retries = 3;
    ep.backoff_ms = 1;
    ep.body_template = R"({"content":"{{prompt}}"})";
    ep.response_path = "reply";
    return ep;
  }
};

}  // namespace

TEST_CASE("transient 503 then 200 succeeds after one retry") {
  FakeServer fake([](const httplib::Request&, httplib::Response& res,
                     int hit) {
    if (hit == 0) {
      res.status = 503;
      res.set_content("overloaded", "text/plain");
    } else {
      res.status = 200;
      res.set_content(R"({"reply":"ok"})", "application/json");
    }
  });
  HttpChatBackend chat(fake.config());
  CHECK(chat.chat("ping") == "ok");
  CHECK(fake.hits.load() == 2);
}

TEST_CASE("HTTP 401 is a request error with zero retries") {
  FakeServer fake([](const httplib::Request&, httplib::Response& res, int) {
    res.status = 401;
    res.set_content("who are you", "text/plain");
  });
  HttpChatBackend chat(fake.config());
  try {
    chat.chat("ping");
    FAIL("expected RequestError");
  } catch (const RequestError& e) {
    CHECK(e.status() == 401);
  }
  CHECK(fake.hits.load() == 1);
}

TEST_CASE("exhausted retries raise a transport error") {
  FakeServer fake([](const httplib::Request&, httplib::Response& res, int) {
    res.status = 500;
    res.set_content("boom", "text/plain");
  });
  HttpChatBackend chat(fake.config());
  CHECK_THROWS_AS(chat.chat("ping"), TransportError);
  CHECK(fake.hits.load() == 4);  // initial attempt + 3 retries
}

TEST_CASE("request bodies are templated with JSON escaping") {
  std::string seen_body;
  FakeServer fake([&](const httplib::Request& req, httplib::Response& res,
                      int) {
    seen_body = req.body;
    res.status = 200;
    res.set_content(R"({"reply":"fine"})", "application/json");
  });
  HttpChatBackend chat(fake.config());
  CHECK(chat.chat("line1\nline2 \"quoted\"") == "fine");
  CHECK(seen_body == R"({"content":"line1\nline2 \"quoted\""})");
}

TEST_CASE("http embedding backend parses vectors and normalizes") {
  FakeServer fake([](const httplib::Request&, httplib::Response& res, int) {
    res.status = 200;
    res.set_content(R"({"data":[{"embedding":[3.0,4.0]}]})",
                    "application/json");
  });
  EndpointConfig ep = fake.config();
  ep.body_template = R"({"input":"{{text}}"})";
  ep.response_path = "data/0/embedding";
  HttpEmbeddingBackend embed(ep, 2);
  Eigen::VectorXd v = embed.embed("anything");
  CHECK(v[0] == doctest::Approx(0.6));
  CHECK(v[1] == doctest::Approx(0.8));
}
