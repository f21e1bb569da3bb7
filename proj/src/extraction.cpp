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

#include "mtlib/extraction.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mtlib/errors.hpp"
#include "mtlib/text.hpp"

namespace mt {

using nlohmann::json;

std::vector<Exemplar> load_exemplars(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TransportError("cannot open " + path);
  std::vector<Exemplar> exemplars;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      json record = json::parse(line);
      Exemplar ex;
      ex.id = record.at("id").get<std::string>();
      ex.question_text = record.at("question").get<std::string>();
      for (const auto& q : record.at("queries")) {
        ex.queries.push_back({q.at("label").get<std::string>(),
                              q.at("text").get<std::string>()});
      }
      ex.facts = record.at("facts").get<std::vector<std::string>>();
      if (record.contains("proof")) {
        ex.proof_steps = record["proof"].get<std::vector<std::string>>();
      }
      ex.answer_label = record.at("answer").get<std::string>();
      if (ex.facts.empty()) {
        throw IntegrityError(path + ":" + std::to_string(line_no) +
                             ": exemplar with empty fact list");
      }
      exemplars.push_back(std::move(ex));
    } catch (const json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what(),
                       line_no);
    }
  }
  return exemplars;
}

ExemplarStore::ExemplarStore(std::vector<Exemplar> exemplars)
    : exemplars_(std::move(exemplars)) {
  for (const auto& ex : exemplars_) {
    Chunk chunk;
    chunk.chunk_id = ex.id;
    chunk.doc_id = ex.id;
    chunk.text = ex.question_text;
    chunk.word_count = tokenize(ex.question_text).size();
    index_.add_chunk(std::move(chunk));
  }
}

std::vector<const Exemplar*> ExemplarStore::retrieve(
    const std::string& question_text, std::size_t k) const {
  std::map<std::string, const Exemplar*> by_id;
  for (const auto& ex : exemplars_) by_id[ex.id] = &ex;
  std::vector<const Exemplar*> out;
  for (const auto& hit : bm25_search(question_text, index_, k)) {
    out.push_back(by_id.at(hit.chunk_id));
  }
  // An all-out-of-vocabulary question still gets exemplars: fall back to
  // id order so the prompt is never empty-shot.
  if (out.empty()) {
    for (const auto& [id, ex] : by_id) {
      (void)id;
      out.push_back(ex);
      if (out.size() >= k) break;
    }
  }
  return out;
}

namespace {

void render_question_block(std::ostream& out, const std::string& question_text,
                           const std::vector<QuestionOption>& queries) {
  out << "QUESTION: " << question_text << "\n\nQUERIES:\n";
  for (const auto& q : queries) {
    out << "(QUERY " << q.label << ") " << q.text << "\n";
  }
  out << "\nTHEORY:\n";
}

}  // namespace

std::string render_extraction_prompt(const std::string& instruction,
                                     const std::vector<const Exemplar*>& shots,
                                     const Question& question) {
  std::ostringstream out;
  out << instruction << "\n";
  for (const Exemplar* ex : shots) {
    out << "###\n";
    render_question_block(out, ex->question_text, ex->queries);
    for (std::size_t i = 0; i < ex->facts.size(); ++i) {
      out << "(FACT " << (i + 1) << ") " << ex->facts[i] << "\n";
    }
    const QuestionOption* answer = nullptr;
    for (const auto& q : ex->queries) {
      if (q.label == ex->answer_label) answer = &q;
    }
    out << "\nPROOF of " << (answer ? answer->text : ex->queries.front().text)
        << ":\n";
    for (std::size_t i = 0; i < ex->proof_steps.size(); ++i) {
      out << "(STEP " << (i + 1) << ") " << ex->proof_steps[i] << "\n";
    }
    out << "\nANSWER: " << ex->answer_label << "\n\n";
  }
  out << "###\n";
  std::string question_text = question.context_text.empty()
                                  ? question.question_text
                                  : question.context_text + " " +
                                        question.question_text;
  render_question_block(out, question_text, question.options);
  return out.str();
}

std::vector<std::string> parse_theory_facts(const std::string& completion) {
  // The completion may or may not echo the block headers; facts are the
  // "(FACT n) ..." lines after the last THEORY: header, up to the PROOF.
  std::size_t theory = completion.rfind("THEORY:");
  if (theory == std::string::npos) {
    throw ParseError("completion has no THEORY block");
  }
  std::istringstream in(completion.substr(theory));
  std::string line;
  std::vector<std::string> facts;
  while (std::getline(in, line)) {
    std::string trimmed = normalize_text(line);
    if (trimmed.rfind("PROOF", 0) == 0 || trimmed.rfind("ANSWER:", 0) == 0) {
      break;
    }
    std::size_t open = trimmed.find("(FACT ");
    if (open != 0) continue;
    std::size_t close = trimmed.find(')', open);
    if (close == std::string::npos) continue;
    std::string text = normalize_text(trimmed.substr(close + 1));
    if (!text.empty()) facts.push_back(std::move(text));
  }
  return facts;
}

std::vector<Fact> extract_facts(const Question& question,
                                const ExemplarStore& store,
                                ChatBackend& chat, const PromptSet& prompts,
                                int k_exemplars) {
  if (store.size() == 0) {
    throw ValidationError("extract_facts: exemplar store is empty");
  }
  auto shots = store.retrieve(question.question_text,
                              static_cast<std::size_t>(k_exemplars));
  std::string prompt =
      render_extraction_prompt(prompts.theory_instruction, shots, question);
  std::string completion = chat.chat(prompt);
  std::vector<Fact> facts;
  for (auto& text : parse_theory_facts(completion)) {
    Fact fact;
    fact.id = content_id(text);
    fact.text = std::move(text);
    fact.source_question_ids = {question.id};
    fact.generic = false;  // not yet classified
    facts.push_back(std::move(fact));
  }
  return facts;
}

std::vector<Fact> keep_if_generic(const std::vector<Fact>& facts,
                                  ChatBackend& chat, const PromptSet& prompts,
                                  int max_in_flight) {
  std::vector<int> verdict(facts.size(), 0);  // 1 keep, 0 drop
  parallel_for_ordered(facts.size(), max_in_flight, [&](std::size_t i) {
    std::string prompt = render_template(prompts.generic_filter,
                                         {{"statement", facts[i].text}});
    std::string reply = chat.chat(prompt);
    // First recognizable label wins.
    std::size_t generic_at = reply.find("GENERIC");
    std::size_t specific_at = reply.find("CONTEXT-SPECIFIC");
    // "CONTEXT-SPECIFIC" contains no "GENERIC" substring, so the two
    // positions are independent.
    if (generic_at == std::string::npos && specific_at == std::string::npos) {
      std::cerr << "warning: unparseable generic/specific reply for fact \""
                << facts[i].text << "\"; dropping it\n";
      verdict[i] = 0;
    } else if (specific_at != std::string::npos &&
               (generic_at == std::string::npos || specific_at < generic_at)) {
      verdict[i] = 0;
    } else {
      verdict[i] = 1;
    }
  });
  std::vector<Fact> kept;
  for (std::size_t i = 0; i < facts.size(); ++i) {
    if (!verdict[i]) continue;
    Fact fact = facts[i];
    fact.generic = true;
    kept.push_back(std::move(fact));
  }
  return kept;
}

namespace {

std::string checkpoint_file(const std::string& dir, const std::string& qid) {
  return (std::filesystem::path(dir) / ("q_" + content_id(qid) + ".json"))
      .string();
}

}  // namespace

BuildPoolResult build_pool(const std::vector<Question>& questions,
                           const ExemplarStore& store, ChatBackend& chat,
                           const PromptSet& prompts,
                           const ExtractionOptions& options) {
  if (questions.empty()) {
    throw ValidationError("build_pool: no questions given");
  }
  std::vector<Question> ordered = questions;
  std::sort(ordered.begin(), ordered.end(),
            [](const Question& a, const Question& b) { return a.id < b.id; });

  if (!options.checkpoint_dir.empty()) {
    std::filesystem::create_directories(options.checkpoint_dir);
  }

  std::vector<std::vector<Fact>> per_question(ordered.size());
  std::vector<char> failed(ordered.size(), 0);
  parallel_for_ordered(ordered.size(), options.max_in_flight,
                       [&](std::size_t i) {
    const Question& q = ordered[i];
    if (!options.checkpoint_dir.empty()) {
      std::ifstream in(checkpoint_file(options.checkpoint_dir, q.id));
      if (in) {
        json saved;
        in >> saved;
        for (const auto& record : saved) {
          Fact fact;
          fact.id = record.at("id").get<std::string>();
          fact.text = record.at("text").get<std::string>();
          fact.source_question_ids = {q.id};
          fact.generic = true;
          per_question[i].push_back(std::move(fact));
        }
        return;
      }
    }
    try {
      auto raw = extract_facts(q, store, chat, prompts, options.k_exemplars);
      per_question[i] = keep_if_generic(raw, chat, prompts, 1);
    } catch (const ParseError& e) {
      std::cerr << "warning: extraction failed for question " << q.id << ": "
                << e.what() << "\n";
      failed[i] = 1;
      return;
    } catch (const TransportError& e) {
      std::cerr << "warning: backend failure for question " << q.id << ": "
                << e.what() << "\n";
      failed[i] = 1;
      return;
    }
    if (!options.checkpoint_dir.empty()) {
      json saved = json::array();
      for (const auto& fact : per_question[i]) {
        saved.push_back({{"id", fact.id}, {"text", fact.text}});
      }
      std::ofstream out(checkpoint_file(options.checkpoint_dir, q.id),
                        std::ios::trunc);
      out << saved.dump() << '\n';
    }
  });

  BuildPoolResult result;
  std::size_t failures = 0;
  // Deterministic reduction in question-id order: first occurrence fixes a
  // fact's position, later occurrences only add their source question.
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (failed[i]) {
      ++failures;
      result.failed_question_ids.push_back(ordered[i].id);
      continue;
    }
    for (const auto& fact : per_question[i]) {
      auto it = position.find(fact.id);
      if (it == position.end()) {
        position[fact.id] = result.facts.size();
        result.facts.push_back(fact);
      } else {
        auto& sources = result.facts[it->second].source_question_ids;
        if (std::find(sources.begin(), sources.end(), ordered[i].id) ==
            sources.end()) {
          sources.push_back(ordered[i].id);
        }
      }
    }
  }
  if (failures == ordered.size()) {
    throw TransportError("extraction failed for every question");
  }
  for (auto& fact : result.facts) {
    std::sort(fact.source_question_ids.begin(),
              fact.source_question_ids.end());
  }

  result.manifest.stage = PoolStage::kRaw;
  result.manifest.fact_count = result.facts.size();
  result.manifest.parameters["k_exemplars"] =
      static_cast<double>(options.k_exemplars);
  result.manifest.parameters["question_count"] =
      static_cast<double>(ordered.size());
  std::string digest;
  for (const auto& f : result.facts) digest += f.id;
  result.manifest.pool_id = content_id(digest);
  return result;
}

}  // namespace mt
