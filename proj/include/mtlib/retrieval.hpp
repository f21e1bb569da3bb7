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

#ifndef MTLIB_RETRIEVAL_HPP
#define MTLIB_RETRIEVAL_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mtlib/providers.hpp"

namespace mt {

struct Chunk {
  std::string chunk_id;
  std::string doc_id;
  std::string text;
  std::size_t word_count = 0;
};

// Greedy whitespace split into chunks of exactly `size` words (the last one
// may be shorter). Joining the chunk texts with single spaces reproduces the
// document's token sequence.
std::vector<Chunk> chunk_document(const std::string& doc_id,
                                  const std::string& text, std::size_t size);

// Flat in-memory index over chunks. Scoring statistics (term document
// frequency, per-chunk lengths, average length) are maintained on insert and
// depend only on the multiset of chunks, not insertion order.
class ChunkedCorpus {
 public:
  void add_document(const std::string& doc_id, const std::string& text,
                    std::size_t chunk_size_words);
  void add_chunk(Chunk chunk);

  const std::vector<Chunk>& chunks() const { return chunks_; }
  std::size_t size() const { return chunks_.size(); }
  std::size_t doc_frequency(const std::string& term) const;
  double average_length() const;

  void save(const std::string& path) const;
  static ChunkedCorpus load(const std::string& path);

  // Token counts for chunk `i`; lengths are measured in tokens.
  const std::map<std::string, int>& term_counts(std::size_t i) const {
    return term_counts_[i];
  }
  std::size_t token_length(std::size_t i) const { return token_lengths_[i]; }

 private:
  std::vector<Chunk> chunks_;
  std::vector<std::map<std::string, int>> term_counts_;
  std::vector<std::size_t> token_lengths_;
  std::map<std::string, std::size_t> df_;
  std::size_t total_tokens_ = 0;
};

struct SearchHit {
  std::string chunk_id;
  double score = 0.0;
  std::size_t chunk_index = 0;  // into corpus.chunks()
};

enum class CombinationMode { kConcatMtFirst, kInterleave };

struct RetrievalConfig {
  double k1 = 1.2;
  double b = 0.75;
  std::size_t first_stage_k = 50;
  std::size_t final_k = 10;
  CombinationMode mode = CombinationMode::kConcatMtFirst;
};

// Okapi BM25 with the nonnegative smoothed idf:
//   idf(t)   = ln(1 + (N - df + 0.5) / (df + 0.5))
//   score(D) = sum_t qtf(t) * idf(t) * tf*(k1+1) / (tf + k1*(1-b+b*len/avg))
// where len counts tokens. Descending score, ties by ascending chunk_id.
// An empty query returns no hits.
std::vector<SearchHit> bm25_search(const std::string& query,
                                   const ChunkedCorpus& corpus, std::size_t k,
                                   double k1 = 1.2, double b = 0.75);

class Reranker {
 public:
  virtual ~Reranker() = default;
  // One score per candidate; candidates are then stably sorted descending.
  virtual std::vector<double> score(const std::string& query,
                                    const std::vector<Chunk>& candidates) = 0;
};

// Keeps the combined first-stage order (scores by position).
class IdentityReranker : public Reranker {
 public:
  std::vector<double> score(const std::string& query,
                            const std::vector<Chunk>& candidates) override;
};

// Cosine between query and chunk embeddings.
class EmbeddingReranker : public Reranker {
 public:
  explicit EmbeddingReranker(std::shared_ptr<EmbeddingBackend> backend)
      : backend_(std::move(backend)) {}
  std::vector<double> score(const std::string& query,
                            const std::vector<Chunk>& candidates) override;

 private:
  std::shared_ptr<EmbeddingBackend> backend_;
};

struct RetrievalSource {
  const ChunkedCorpus* corpus = nullptr;
  bool is_microtheory = false;
};

// First stage: per-source BM25 top first_stage_k. Combination: in
// kConcatMtFirst mode microtheory hits are prepended before the remaining
// sources (which are interleaved round-robin); in kInterleave mode all
// sources are interleaved one by one. Then rerank and truncate to final_k.
std::vector<Chunk> two_phase(const std::string& query,
                             const std::vector<RetrievalSource>& sources,
                             const RetrievalConfig& config, Reranker& reranker);

// docs.jsonl records: {"id": ..., "text": ...}
std::vector<std::pair<std::string, std::string>> load_documents(
    const std::string& path);

}  // namespace mt

#endif  // MTLIB_RETRIEVAL_HPP
