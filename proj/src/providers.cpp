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

#include "mtlib/providers.hpp"

#include <algorithm>
#include <cctype>
#include <mutex>
#include <set>
#include <sstream>
#include <unordered_set>

#include "mtlib/errors.hpp"
#include "mtlib/text.hpp"

namespace mt {

Eigen::VectorXd EmbeddingBackend::embed(const std::string& text) {
  return embed_batch({text}).row(0);
}

namespace {

const std::set<std::string>& stopwords() {
  static const std::set<std::string> words = {
      "a",     "an",    "and",   "are",  "be",    "by",   "can",  "do",
      "does",  "for",   "from",  "has",  "have",  "in",   "is",   "it",
      "its",   "most",  "of",    "on",   "or",    "that", "the",  "this",
      "to",    "was",   "were",  "what", "which", "will", "with", "following",
      "likely"};
  return words;
}

std::vector<std::string> salient_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (auto& tok : tokenize(text)) {
    if (tok.size() < 4 || stopwords().count(tok)) continue;
    if (seen.insert(tok).second) out.push_back(tok);
  }
  return out;
}

// Last line of `prompt` beginning with `prefix`, without the prefix.
std::string last_line_after(const std::string& prompt,
                            const std::string& prefix) {
  std::size_t pos = prompt.rfind(prefix);
  if (pos == std::string::npos) return {};
  pos += prefix.size();
  std::size_t end = prompt.find('\n', pos);
  std::string line = prompt.substr(
      pos, end == std::string::npos ? std::string::npos : end - pos);
  return normalize_text(line);
}

struct QueryLine {
  std::string label;
  std::string text;
};

// Collects "(QUERY X) text" lines from the final QUERIES block.
std::vector<QueryLine> last_queries(const std::string& prompt) {
  std::vector<QueryLine> queries;
  std::size_t block = prompt.rfind("QUERIES:");
  if (block == std::string::npos) return queries;
  std::istringstream in(prompt.substr(block));
  std::string line;
  while (std::getline(in, line)) {
    std::size_t open = line.find("(QUERY ");
    if (open == std::string::npos) {
      if (!queries.empty() && normalize_text(line).empty()) break;
      continue;
    }
    std::size_t close = line.find(')', open);
    if (close == std::string::npos) continue;
    QueryLine q;
    q.label = normalize_text(line.substr(open + 7, close - open - 7));
    q.text = normalize_text(line.substr(close + 1));
    if (!q.text.empty()) queries.push_back(std::move(q));
  }
  return queries;
}

bool looks_context_specific(const std::string& text) {
  std::string padded = " ";
  for (char c : text) padded += static_cast<char>(std::tolower(
      static_cast<unsigned char>(c)));
  padded += ' ';
  static const char* kMarkers[] = {
      " he ",        " she ",        " his ",        " her ",
      " they ",      " them ",       " i ",          " you ",
      " the man ",   " the woman ",  " the person ", " the patient ",
      " this scenario "};
  for (const char* marker : kMarkers) {
    if (padded.find(marker) != std::string::npos) return true;
  }
  return false;
}

std::string most_frequent_salient(const std::vector<std::string>& lines) {
  std::map<std::string, int> counts;
  for (const auto& line : lines) {
    for (const auto& tok : salient_tokens(line)) counts[tok]++;
  }
  std::string best;
  int best_count = 0;
  for (const auto& [tok, count] : counts) {
    if (count > best_count) {
      best = tok;
      best_count = count;
    }
  }
  return best.empty() ? std::string("general") : best;
}

std::vector<std::string> block_lines(const std::string& prompt,
                                     const std::string& header,
                                     const std::string& terminator) {
  std::vector<std::string> lines;
  std::size_t pos = prompt.rfind(header);
  if (pos == std::string::npos) return lines;
  std::size_t end = prompt.find(terminator, pos + header.size());
  std::string block = prompt.substr(
      pos + header.size(),
      end == std::string::npos ? std::string::npos : end - pos - header.size());
  std::istringstream in(block);
  std::string line;
  while (std::getline(in, line)) {
    std::string trimmed = normalize_text(line);
    if (!trimmed.empty()) lines.push_back(std::move(trimmed));
  }
  return lines;
}

}  // namespace

std::string MockChatBackend::do_chat(const std::string& prompt,
                                     const ChatParams&) {
  calls_.fetch_add(1);
  if (prompt.empty()) throw ValidationError("chat: empty prompt");

  // Generic-vs-specific classification.
  if (prompt.find("STATEMENT:") != std::string::npos &&
      prompt.find("LABEL:") != std::string::npos) {
    std::string statement = last_line_after(prompt, "STATEMENT:");
    return looks_context_specific(statement) ? "CONTEXT-SPECIFIC" : "GENERIC";
  }

  // Core-fact caption for clustering.
  if (prompt.find("CORE FACT:") != std::string::npos) {
    std::string question = last_line_after(prompt, "QUESTION:");
    auto toks = salient_tokens(question);
    std::string caption;
    for (std::size_t i = 0; i < std::min<std::size_t>(3, toks.size()); ++i) {
      if (i) caption += ' ';
      caption += toks[i];
    }
    if (caption.empty()) caption = "general knowledge";
    return caption + ".";
  }

  if (prompt.find("TOPIC LABEL:") != std::string::npos) {
    auto lines = block_lines(prompt, "STATEMENTS:", "TOPIC LABEL:");
    return most_frequent_salient(lines) + " topics";
  }

  if (prompt.find("FIELD LABEL:") != std::string::npos) {
    auto lines = block_lines(prompt, "TOPICS:", "FIELD LABEL:");
    return most_frequent_salient(lines) + " studies";
  }

  // Relevance rating: deterministic in (question, fact, seed).
  if (prompt.find("RATING:") != std::string::npos &&
      prompt.find("FACT:") != std::string::npos) {
    std::string question = last_line_after(prompt, "QUESTION:");
    std::string fact = last_line_after(prompt, "FACT:");
    std::uint64_t h = fnv1a64(question + "\x1f" + fact, seed_);
    return std::to_string(1 + static_cast<int>(h % 5));
  }

  // Theory extraction: fabricate a THEORY block from the question's salient
  // vocabulary so that related questions regenerate overlapping facts.
  if (prompt.find("THEORY:") != std::string::npos) {
    std::string question = last_line_after(prompt, "QUESTION:");
    auto queries = last_queries(prompt);
    auto toks = salient_tokens(question);
    std::ostringstream out;
    out << "THEORY:\n";
    int fact_no = 1;
    std::vector<std::string> fact_texts;
    if (toks.size() >= 2) {
      std::size_t rot = seed_ % (toks.size() - 1);
      for (std::size_t i = 0; i + 1 < toks.size() && fact_no <= 6; ++i) {
        const std::string& a = toks[(i + rot) % toks.size()];
        const std::string& b = toks[(i + rot + 1) % toks.size()];
        if (a == b) continue;
        fact_texts.push_back(a + " is closely related to " + b);
        out << "(FACT " << fact_no++ << ") " << fact_texts.back() << "\n";
      }
    }
    if (fact_texts.empty()) {
      fact_texts.push_back("every question tests some knowledge");
      out << "(FACT " << fact_no++ << ") " << fact_texts.back() << "\n";
    }
    // One deliberately context-specific line for the generic filter to drop.
    out << "(FACT " << fact_no++ << ") the person in this scenario asks about "
        << (toks.empty() ? std::string("something") : toks[0]) << "\n";

    const std::string hypothesis =
        queries.empty() ? std::string("the first option is correct")
                        : queries.front().text;
    const std::string label =
        queries.empty() ? std::string("A") : queries.front().label;
    out << "\nPROOF of " << hypothesis << ":\n";
    out << "(STEP 1) " << fact_texts.front() << " & "
        << fact_texts.back() << " -> hypothesis: " << hypothesis << "\n";
    out << "\nANSWER: " << label << "\n";
    return out.str();
  }

  // Fallback: deterministic echo.
  return "ack " + std::to_string(fnv1a64(prompt, seed_) % 1000000);
}

Eigen::MatrixXd MockEmbeddingBackend::embed_batch(
    const std::vector<std::string>& texts) {
  calls_.fetch_add(1);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(texts.size()), dimension_);
  out.setZero();
  for (std::size_t row = 0; row < texts.size(); ++row) {
    if (texts[row].empty()) {
      throw ValidationError("embed_batch: empty text at index " +
                            std::to_string(row));
    }
    const std::string lowered = [&] {
      std::string s;
      for (char c : texts[row])
        s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      return s;
    }();
    for (const auto& gram : char_ngrams(lowered, 3)) {
      std::uint64_t h = fnv1a64(gram, seed_);
      Eigen::Index idx = static_cast<Eigen::Index>(h % dimension_);
      double sign = (h >> 63) ? 1.0 : -1.0;
      out(static_cast<Eigen::Index>(row), idx) += sign;
    }
    double norm = out.row(static_cast<Eigen::Index>(row)).norm();
    if (norm == 0.0) {
      out(static_cast<Eigen::Index>(row), 0) = 1.0;
    } else {
      out.row(static_cast<Eigen::Index>(row)) /= norm;
    }
  }
  return out;
}

TableEmbeddingBackend::TableEmbeddingBackend(
    std::map<std::string, Eigen::VectorXd> table, int dimension)
    : table_(std::move(table)), dimension_(dimension), fallback_(1, dimension) {
  for (auto& [text, vec] : table_) {
    if (vec.size() != dimension_) {
      throw ValidationError("table embedding for \"" + text +
                            "\" has wrong dimension");
    }
    double norm = vec.norm();
    if (norm > 0) vec /= norm;
  }
}

Eigen::MatrixXd TableEmbeddingBackend::embed_batch(
    const std::vector<std::string>& texts) {
  calls_.fetch_add(1);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(texts.size()), dimension_);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    auto it = table_.find(texts[i]);
    if (it != table_.end()) {
      out.row(static_cast<Eigen::Index>(i)) = it->second;
    } else {
      out.row(static_cast<Eigen::Index>(i)) = fallback_.embed(texts[i]);
    }
  }
  return out;
}

double TableEntailmentScorer::score(const std::string& premise,
                                    const std::string& hypothesis) {
  calls_.fetch_add(1);
  auto it = table_.find({premise, hypothesis});
  return it == table_.end() ? 0.0 : it->second;
}

double MockEntailmentScorer::score(const std::string& premise,
                                   const std::string& hypothesis) {
  calls_.fetch_add(1);
  if (premise == hypothesis) return 0.0;
  std::set<std::string> p, h;
  for (auto& t : tokenize(premise)) p.insert(t);
  for (auto& t : tokenize(hypothesis)) h.insert(t);
  if (h.empty() || p.size() <= h.size()) return 0.0;
  return std::includes(p.begin(), p.end(), h.begin(), h.end()) ? 0.9 : 0.0;
}

namespace {

void validate_prove_result(const ProveResult& result,
                           const std::vector<Fact>& pool) {
  std::unordered_set<std::string> ids;
  for (const auto& f : pool) ids.insert(f.id);
  // Sub-hypothesis references are exempt: they resolve through the inference
  // store (or mark the basis incomplete), not through the pool.
  auto check = [&](const std::vector<std::vector<std::string>>& bases) {
    for (const auto& basis : bases) {
      for (const auto& id : basis) {
        if (!ids.count(id) && !is_sub_hypothesis_id(id)) {
          throw IntegrityError("engine returned basis with fact id \"" + id +
                               "\" absent from the provided pool");
        }
      }
    }
  };
  check(result.bases);
  for (const auto& sub : result.sub_hypotheses) check(sub.bases);
}

std::vector<std::string> sorted_unique(std::vector<std::string> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

}  // namespace

ProveResult MockEngineBackend::prove(const std::string& hypothesis,
                                     const Question&,
                                     const std::vector<Fact>& pool) {
  calls_.fetch_add(1);
  if (pool.empty()) throw ValidationError("prove: empty pool");

  auto it = table_.find(normalize_text(hypothesis));
  if (it != table_.end()) {
    validate_prove_result(it->second, pool);
    return it->second;
  }
  if (!lexical_fallback_) return {};

  // Score pool facts by salient-token overlap with the hypothesis; stable
  // ranking (overlap desc, pool order asc).
  std::set<std::string> htoks;
  for (auto& t : salient_tokens(hypothesis)) htoks.insert(t);
  std::vector<std::pair<int, std::size_t>> ranked;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    int overlap = 0;
    for (auto& t : tokenize(pool[i].text)) {
      if (htoks.count(t)) ++overlap;
    }
    if (overlap > 0) ranked.emplace_back(-overlap, i);
  }
  std::sort(ranked.begin(), ranked.end());
  if (ranked.empty()) return {};

  ProveResult result;
  auto ids_for = [&](std::size_t begin, std::size_t count) {
    std::vector<std::string> ids;
    for (std::size_t i = begin; i < std::min(begin + count, ranked.size()); ++i)
      ids.push_back(pool[ranked[i].second].id);
    return sorted_unique(std::move(ids));
  };
  result.bases.push_back(ids_for(0, std::min<std::size_t>(3, ranked.size())));
  if (ranked.size() >= 4) {
    std::size_t offset = 1 + seed_ % 2;
    auto alt = ids_for(offset, 3);
    if (alt != result.bases.front()) result.bases.push_back(std::move(alt));
  }
  if (ranked.size() >= 5 && htoks.size() >= 2) {
    auto tok_it = htoks.begin();
    const std::string a = *tok_it++;
    const std::string b = *tok_it;
    GroundedSubHypothesis sub;
    sub.text = "the ideas of " + a + " and " + b + " are connected";
    sub.bases.push_back(ids_for(3, 2));
    result.sub_hypotheses.push_back(std::move(sub));
  }
  validate_prove_result(result, pool);
  return result;
}

int ChatFactRater::rate(const Question& question,
                        const std::string& fact_text) {
  const QuestionOption* correct = question.correct_option();
  std::string prompt = render_template(
      prompts_.relevance_rubric,
      {{"question", question.question_text},
       {"answer", correct ? correct->text : std::string()},
       {"fact", fact_text}});
  std::string reply = chat_->chat(prompt);
  for (char c : reply) {
    if (c >= '1' && c <= '5') return c - '0';
  }
  return 0;
}

int TableFactRater::rate(const Question&, const std::string& fact_text) {
  calls_.fetch_add(1);
  auto it = table_.find(fact_text);
  return it == table_.end() ? default_rating_ : it->second;
}

void parallel_for_ordered(std::size_t count, int max_in_flight,
                          const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  const int workers =
      std::max(1, std::min<int>(max_in_flight, static_cast<int>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (!failed.load(std::memory_order_relaxed)) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

ProviderSuite make_offline_suite(std::uint64_t seed, int embedding_dim,
                                 double entailment_threshold,
                                 const PromptSet& prompts) {
  ProviderSuite suite;
  auto chat = std::make_shared<MockChatBackend>(seed);
  suite.chat = chat;
  suite.embedding =
      std::make_shared<MockEmbeddingBackend>(seed, embedding_dim);
  suite.entailment =
      std::make_shared<MockEntailmentScorer>(entailment_threshold);
  suite.engine = std::make_shared<MockEngineBackend>(
      std::map<std::string, ProveResult>{}, /*lexical_fallback=*/true, seed);
  suite.rater = std::make_shared<ChatFactRater>(chat, prompts);
  return suite;
}

}  // namespace mt
