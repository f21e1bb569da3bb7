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

#ifndef MTLIB_PROVIDERS_HPP
#define MTLIB_PROVIDERS_HPP

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mtlib/model.hpp"
#include "mtlib/prompts.hpp"

namespace mt {

// Remote endpoint description. The request body is a JSON template with
// {{placeholders}}; the reply field is addressed by a /-separated path
// (numeric components index arrays).
struct EndpointConfig {
  std::string base_url;  // e.g. "http://localhost:8080"
  std::string path;      // e.g. "/v1/chat/completions"
  std::string model;
  std::string auth_env;  // name of the env var holding the bearer token
  int timeout_s = 60;
  int max_retries = 3;
  int backoff_ms = 200;
  double requests_per_second = 0.0;  // 0 = unlimited
  std::string body_template;
  std::string response_path;
};

struct ChatParams {
  double temperature = 0.0;
  int max_tokens = 1024;
};

// All backends are shareable, internally synchronized handles. Mocks are
// pure functions of (input, seed), which is what makes whole-pipeline runs
// reproducible byte for byte.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  std::string chat(const std::string& prompt, const ChatParams& params = {}) {
    return do_chat(prompt, params);
  }
  std::uint64_t calls() const { return calls_.load(); }

 protected:
  virtual std::string do_chat(const std::string& prompt,
                              const ChatParams& params) = 0;
  std::atomic<std::uint64_t> calls_{0};
};

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual int dimension() const = 0;
  // One row per input text; rows are unit-norm.
  virtual Eigen::MatrixXd embed_batch(
      const std::vector<std::string>& texts) = 0;
  Eigen::VectorXd embed(const std::string& text);
  std::uint64_t calls() const { return calls_.load(); }

 protected:
  std::atomic<std::uint64_t> calls_{0};
};

class EntailmentScorer {
 public:
  explicit EntailmentScorer(double decision_threshold = 0.5)
      : decision_threshold_(decision_threshold) {}
  virtual ~EntailmentScorer() = default;
  // Probability-like score in [0,1] that premise entails hypothesis.
  virtual double score(const std::string& premise,
                       const std::string& hypothesis) = 0;
  bool entails(const std::string& premise, const std::string& hypothesis) {
    return score(premise, hypothesis) >= decision_threshold_;
  }
  double decision_threshold() const { return decision_threshold_; }
  std::uint64_t calls() const { return calls_.load(); }

 protected:
  double decision_threshold_;
  std::atomic<std::uint64_t> calls_{0};
};

struct GroundedSubHypothesis {
  std::string text;
  std::vector<std::vector<std::string>> bases;  // fact ids that ground it
};

struct ProveResult {
  std::vector<std::vector<std::string>> bases;
  std::vector<GroundedSubHypothesis> sub_hypotheses;
};

class EngineBackend {
 public:
  virtual ~EngineBackend() = default;
  // May return no bases (unproven hypothesis). Every id in the result must
  // resolve in `pool`; violations raise IntegrityError.
  virtual ProveResult prove(const std::string& hypothesis,
                            const Question& question,
                            const std::vector<Fact>& pool) = 0;
  std::uint64_t calls() const { return calls_.load(); }

 protected:
  std::atomic<std::uint64_t> calls_{0};
};

// Rates a fact's relevance to a question, 1..5. Returns 0 when the
// underlying reply could not be parsed; callers decide the fallback.
class FactRater {
 public:
  virtual ~FactRater() = default;
  virtual int rate(const Question& question, const std::string& fact_text) = 0;
};

// ---------------------------------------------------------------------------
// Deterministic offline mocks.

class MockChatBackend : public ChatBackend {
 public:
  explicit MockChatBackend(std::uint64_t seed) : seed_(seed) {}

 protected:
  std::string do_chat(const std::string& prompt,
                      const ChatParams& params) override;

 private:
  std::uint64_t seed_;
};

// Seeded character-trigram hashing projected to a fixed dimension and
// normalized. Shared n-grams between texts yield controllable similarity.
class MockEmbeddingBackend : public EmbeddingBackend {
 public:
  explicit MockEmbeddingBackend(std::uint64_t seed, int dimension = 64)
      : seed_(seed), dimension_(dimension) {}
  int dimension() const override { return dimension_; }
  Eigen::MatrixXd embed_batch(const std::vector<std::string>& texts) override;

 private:
  std::uint64_t seed_;
  int dimension_;
};

// Embedding backend whose vectors are supplied per text; lets tests plant
// exact cosine structure. Unlisted texts fall back to the mock hash.
class TableEmbeddingBackend : public EmbeddingBackend {
 public:
  TableEmbeddingBackend(std::map<std::string, Eigen::VectorXd> table,
                        int dimension);
  int dimension() const override { return dimension_; }
  Eigen::MatrixXd embed_batch(const std::vector<std::string>& texts) override;

 private:
  std::map<std::string, Eigen::VectorXd> table_;
  int dimension_;
  MockEmbeddingBackend fallback_;
};

// Lookup table over (premise, hypothesis); unlisted pairs score 0.
class TableEntailmentScorer : public EntailmentScorer {
 public:
  explicit TableEntailmentScorer(
      std::map<std::pair<std::string, std::string>, double> table,
      double decision_threshold = 0.5)
      : EntailmentScorer(decision_threshold), table_(std::move(table)) {}
  double score(const std::string& premise,
               const std::string& hypothesis) override;

 private:
  std::map<std::pair<std::string, std::string>, double> table_;
};

// Heuristic fallback: premise entails hypothesis when the hypothesis tokens
// are a strict subset of the premise tokens. Gives the offline pipeline a
// little condensation signal without a hand-written table.
class MockEntailmentScorer : public EntailmentScorer {
 public:
  explicit MockEntailmentScorer(double decision_threshold = 0.5)
      : EntailmentScorer(decision_threshold) {}
  double score(const std::string& premise,
               const std::string& hypothesis) override;
};

// Table-driven proof search keyed by normalized hypothesis text, with an
// optional deterministic lexical-overlap fallback for hypotheses not in the
// table (used by the offline demo pipeline).
class MockEngineBackend : public EngineBackend {
 public:
  explicit MockEngineBackend(std::map<std::string, ProveResult> table = {},
                             bool lexical_fallback = false,
                             std::uint64_t seed = 0)
      : table_(std::move(table)),
        lexical_fallback_(lexical_fallback),
        seed_(seed) {}
  ProveResult prove(const std::string& hypothesis, const Question& question,
                    const std::vector<Fact>& pool) override;

 private:
  std::map<std::string, ProveResult> table_;
  bool lexical_fallback_;
  std::uint64_t seed_;
};

// Renders the relevance rubric prompt and parses the first integer 1..5
// from the reply (0 when absent).
class ChatFactRater : public FactRater {
 public:
  ChatFactRater(std::shared_ptr<ChatBackend> chat, PromptSet prompts)
      : chat_(std::move(chat)), prompts_(std::move(prompts)) {}
  int rate(const Question& question, const std::string& fact_text) override;

 private:
  std::shared_ptr<ChatBackend> chat_;
  PromptSet prompts_;
};

// Fixed ratings keyed by fact text; unlisted facts get `default_rating`.
class TableFactRater : public FactRater {
 public:
  explicit TableFactRater(std::map<std::string, int> table,
                          int default_rating = 1)
      : table_(std::move(table)), default_rating_(default_rating) {}
  int rate(const Question& question, const std::string& fact_text) override;
  std::uint64_t calls() const { return calls_.load(); }

 private:
  std::map<std::string, int> table_;
  int default_rating_;
  std::atomic<std::uint64_t> calls_{0};
};

// ---------------------------------------------------------------------------
// Remote HTTP backends.

class HttpChatBackend : public ChatBackend {
 public:
  explicit HttpChatBackend(EndpointConfig config);

 protected:
  std::string do_chat(const std::string& prompt,
                      const ChatParams& params) override;

 private:
  EndpointConfig config_;
};

class HttpEmbeddingBackend : public EmbeddingBackend {
 public:
  HttpEmbeddingBackend(EndpointConfig config, int dimension,
                       int max_in_flight = 8);
  int dimension() const override { return dimension_; }
  Eigen::MatrixXd embed_batch(const std::vector<std::string>& texts) override;

 private:
  EndpointConfig config_;
  int dimension_;
  int max_in_flight_;
};

class HttpEntailmentScorer : public EntailmentScorer {
 public:
  HttpEntailmentScorer(EndpointConfig config, double decision_threshold = 0.5);
  double score(const std::string& premise,
               const std::string& hypothesis) override;

 private:
  EndpointConfig config_;
};

class HttpEngineBackend : public EngineBackend {
 public:
  explicit HttpEngineBackend(EndpointConfig config);
  ProveResult prove(const std::string& hypothesis, const Question& question,
                    const std::vector<Fact>& pool) override;

 private:
  EndpointConfig config_;
};

// POSTs `body` to the endpoint with retry/backoff on transport failures and
// HTTP 5xx. 4xx raises RequestError immediately (never retried). Returns the
// raw response body.
std::string http_post_with_retry(const EndpointConfig& config,
                                 const std::string& body);

// Extracts a string/number field addressed by config.response_path from a
// JSON reply body.
std::string extract_response_field(const std::string& body,
                                   const std::string& response_path);

// ---------------------------------------------------------------------------

// Applies `fn` to every index in [0, count) with at most `max_in_flight`
// worker threads. Results come back in input order; the first exception is
// rethrown after all workers stop.
void parallel_for_ordered(std::size_t count, int max_in_flight,
                          const std::function<void(std::size_t)>& fn);

struct ProviderSuite {
  std::shared_ptr<ChatBackend> chat;
  std::shared_ptr<EmbeddingBackend> embedding;
  std::shared_ptr<EntailmentScorer> entailment;
  std::shared_ptr<EngineBackend> engine;
  std::shared_ptr<FactRater> rater;
  int max_in_flight = 8;
};

// Offline suite: every backend is a deterministic mock of the given seed.
ProviderSuite make_offline_suite(std::uint64_t seed, int embedding_dim = 64,
                                 double entailment_threshold = 0.5,
                                 const PromptSet& prompts = PromptSet::defaults());

}  // namespace mt

#endif  // MTLIB_PROVIDERS_HPP
