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

#include "mtlib/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "mtlib/errors.hpp"
#include "mtlib/text.hpp"

namespace mt {

std::vector<Chunk> chunk_document(const std::string& doc_id,
                                  const std::string& text, std::size_t size) {
  if (size == 0) throw ValidationError("chunk size must be positive");
  std::vector<std::string> words;
  {
    std::istringstream in(text);
    std::string w;
    while (in >> w) words.push_back(std::move(w));
  }
  std::vector<Chunk> chunks;
  for (std::size_t start = 0; start < words.size(); start += size) {
    std::size_t count = std::min(size, words.size() - start);
    std::string body;
    for (std::size_t i = 0; i < count; ++i) {
      if (i) body += ' ';
      body += words[start + i];
    }
    Chunk chunk;
    chunk.doc_id = doc_id;
    chunk.chunk_id = doc_id + "#" + std::to_string(start / size);
    chunk.text = std::move(body);
    chunk.word_count = count;
    chunks.push_back(std::move(chunk));
  }
  return chunks;
}

void ChunkedCorpus::add_document(const std::string& doc_id,
                                 const std::string& text,
                                 std::size_t chunk_size_words) {
  for (auto& chunk : chunk_document(doc_id, text, chunk_size_words)) {
    add_chunk(std::move(chunk));
  }
}

void ChunkedCorpus::add_chunk(Chunk chunk) {
  std::map<std::string, int> counts;
  std::size_t tokens = 0;
  for (auto& tok : tokenize(chunk.text)) {
    counts[tok]++;
    ++tokens;
  }
  for (const auto& [term, count] : counts) {
    (void)count;
    df_[term]++;
  }
  total_tokens_ += tokens;
  token_lengths_.push_back(tokens);
  term_counts_.push_back(std::move(counts));
  chunks_.push_back(std::move(chunk));
}

std::size_t ChunkedCorpus::doc_frequency(const std::string& term) const {
  auto it = df_.find(term);
  return it == df_.end() ? 0 : it->second;
}

double ChunkedCorpus::average_length() const {
  return chunks_.empty()
             ? 0.0
             : static_cast<double>(total_tokens_) /
                   static_cast<double>(chunks_.size());
}

namespace {

constexpr char kIndexMagic[4] = {'M', 'T', 'I', 'X'};
constexpr std::uint32_t kIndexVersion = 1;

void write_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, 8);
}

std::uint64_t read_u64(std::istream& in) {
  char bytes[8];
  in.read(bytes, 8);
  if (!in) throw ParseError("truncated index file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i]))
         << (8 * i);
  }
  return v;
}

void write_string(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  std::uint64_t len = read_u64(in);
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  if (!in) throw ParseError("truncated index file");
  return s;
}

}  // namespace

void ChunkedCorpus::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw TransportError("cannot write " + path);
  out.write(kIndexMagic, 4);
  write_u64(out, kIndexVersion);
  write_u64(out, chunks_.size());
  for (const auto& chunk : chunks_) {
    write_string(out, chunk.chunk_id);
    write_string(out, chunk.doc_id);
    write_string(out, chunk.text);
    write_u64(out, chunk.word_count);
  }
  if (!out) throw TransportError("write failed for " + path);
}

ChunkedCorpus ChunkedCorpus::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TransportError("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kIndexMagic, 4) != 0) {
    throw ParseError(path + ": not a corpus index file");
  }
  std::uint64_t version = read_u64(in);
  if (version != kIndexVersion) {
    throw ParseError(path + ": unsupported index version " +
                     std::to_string(version));
  }
  std::uint64_t count = read_u64(in);
  ChunkedCorpus corpus;
  for (std::uint64_t i = 0; i < count; ++i) {
    Chunk chunk;
    chunk.chunk_id = read_string(in);
    chunk.doc_id = read_string(in);
    chunk.text = read_string(in);
    chunk.word_count = read_u64(in);
    corpus.add_chunk(std::move(chunk));
  }
  return corpus;
}

std::vector<SearchHit> bm25_search(const std::string& query,
                                   const ChunkedCorpus& corpus, std::size_t k,
                                   double k1, double b) {
  std::vector<SearchHit> hits;
  auto query_tokens = tokenize(query);
  if (query_tokens.empty() || corpus.size() == 0 || k == 0) return hits;

  std::map<std::string, int> query_tf;
  for (auto& t : query_tokens) query_tf[t]++;

  const double n_docs = static_cast<double>(corpus.size());
  const double avg_len = corpus.average_length();

  std::map<std::string, double> idf;
  for (const auto& [term, qtf] : query_tf) {
    (void)qtf;
    double df = static_cast<double>(corpus.doc_frequency(term));
    idf[term] = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
  }

  hits.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& counts = corpus.term_counts(i);
    const double len = static_cast<double>(corpus.token_length(i));
    const double norm = k1 * (1.0 - b + b * (avg_len > 0 ? len / avg_len : 0));
    double score = 0.0;
    for (const auto& [term, qtf] : query_tf) {
      auto it = counts.find(term);
      if (it == counts.end()) continue;
      const double tf = static_cast<double>(it->second);
      score += qtf * idf[term] * (tf * (k1 + 1.0)) / (tf + norm);
    }
    hits.push_back({corpus.chunks()[i].chunk_id, score, i});
  }
  std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b2) {
    if (a.score != b2.score) return a.score > b2.score;
    return a.chunk_id < b2.chunk_id;
  });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

std::vector<double> IdentityReranker::score(const std::string&,
                                            const std::vector<Chunk>& candidates) {
  std::vector<double> scores(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    scores[i] = static_cast<double>(candidates.size() - i);
  }
  return scores;
}

std::vector<double> EmbeddingReranker::score(const std::string& query,
                                             const std::vector<Chunk>& candidates) {
  std::vector<double> scores(candidates.size(), 0.0);
  if (candidates.empty()) return scores;
  std::vector<std::string> texts;
  texts.reserve(candidates.size() + 1);
  texts.push_back(query);
  for (const auto& c : candidates) texts.push_back(c.text);
  Eigen::MatrixXd embedded = backend_->embed_batch(texts);
  Eigen::VectorXd q = embedded.row(0);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    scores[i] = embedded.row(static_cast<Eigen::Index>(i + 1)).dot(q);
  }
  return scores;
}

std::vector<Chunk> two_phase(const std::string& query,
                             const std::vector<RetrievalSource>& sources,
                             const RetrievalConfig& config,
                             Reranker& reranker) {
  if (config.final_k > config.first_stage_k) {
    throw ValidationError("final_k must not exceed first_stage_k");
  }
  // First stage per source.
  std::vector<std::vector<Chunk>> per_source;
  per_source.reserve(sources.size());
  for (const auto& source : sources) {
    std::vector<Chunk> result;
    for (const auto& hit : bm25_search(query, *source.corpus,
                                       config.first_stage_k, config.k1,
                                       config.b)) {
      result.push_back(source.corpus->chunks()[hit.chunk_index]);
    }
    per_source.push_back(std::move(result));
  }

  auto interleave = [](const std::vector<std::vector<Chunk>*>& lists) {
    std::vector<Chunk> merged;
    for (std::size_t round = 0;; ++round) {
      bool any = false;
      for (auto* list : lists) {
        if (round < list->size()) {
          merged.push_back((*list)[round]);
          any = true;
        }
      }
      if (!any) break;
    }
    return merged;
  };

  std::vector<Chunk> combined;
  if (config.mode == CombinationMode::kConcatMtFirst) {
    // Microtheory hits come first, then the remaining sources interleaved.
    for (std::size_t s = 0; s < sources.size(); ++s) {
      if (!sources[s].is_microtheory) continue;
      combined.insert(combined.end(), per_source[s].begin(),
                      per_source[s].end());
    }
    std::vector<std::vector<Chunk>*> rest;
    for (std::size_t s = 0; s < sources.size(); ++s) {
      if (!sources[s].is_microtheory) rest.push_back(&per_source[s]);
    }
    auto merged = interleave(rest);
    combined.insert(combined.end(), merged.begin(), merged.end());
  } else {
    std::vector<std::vector<Chunk>*> all;
    for (auto& list : per_source) all.push_back(&list);
    combined = interleave(all);
  }

  // Drop duplicate chunk ids, keeping the first (higher-precedence) copy.
  {
    std::unordered_set<std::string> seen;
    std::vector<Chunk> unique;
    unique.reserve(combined.size());
    for (auto& chunk : combined) {
      if (seen.insert(chunk.chunk_id).second) unique.push_back(std::move(chunk));
    }
    combined = std::move(unique);
  }

  std::vector<double> scores = reranker.score(query, combined);
  if (scores.size() != combined.size()) {
    throw IntegrityError("reranker returned wrong number of scores");
  }
  std::vector<std::size_t> order(combined.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b2) {
                     return scores[a] > scores[b2];
                   });
  std::vector<Chunk> result;
  for (std::size_t i = 0; i < std::min(config.final_k, order.size()); ++i) {
    result.push_back(combined[order[i]]);
  }
  return result;
}

std::vector<std::pair<std::string, std::string>> load_documents(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TransportError("cannot open " + path);
  std::vector<std::pair<std::string, std::string>> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      auto record = nlohmann::json::parse(line);
      docs.emplace_back(record.at("id").get<std::string>(),
                        record.at("text").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what(),
                       line_no);
    }
  }
  return docs;
}

}  // namespace mt
