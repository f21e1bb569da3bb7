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

#ifndef MTLIB_EXTRACTION_HPP
#define MTLIB_EXTRACTION_HPP

#include <optional>
#include <string>
#include <vector>

#include "mtlib/model.hpp"
#include "mtlib/providers.hpp"
#include "mtlib/retrieval.hpp"

namespace mt {

// One worked example shown in the extraction prompt: a question, its answer
// options restated as queries, a supporting fact list, a proof, and the
// answer label.
struct Exemplar {
  std::string id;
  std::string question_text;
  std::vector<QuestionOption> queries;
  std::vector<std::string> facts;  // non-empty
  std::vector<std::string> proof_steps;
  std::string answer_label;
};

std::vector<Exemplar> load_exemplars(const std::string& path);

// Exemplars plus a lexical index over their question texts. retrieve() ranks
// by BM25 with ties broken by exemplar id (the index keys chunks by id).
class ExemplarStore {
 public:
  explicit ExemplarStore(std::vector<Exemplar> exemplars);
  std::vector<const Exemplar*> retrieve(const std::string& question_text,
                                        std::size_t k) const;
  std::size_t size() const { return exemplars_.size(); }

 private:
  std::vector<Exemplar> exemplars_;
  ChunkedCorpus index_;
};

// Renders the few-shot prompt: instruction header, then one block per
// exemplar (QUESTION / QUERIES / THEORY / PROOF / ANSWER), then the target
// question's block ending after "THEORY:" for the model to continue.
std::string render_extraction_prompt(const std::string& instruction,
                                     const std::vector<const Exemplar*>& shots,
                                     const Question& question);

// Parses "(FACT n) text" lines from the completion's THEORY block. PROOF and
// STEP lines are discarded. Throws ParseError when no THEORY header exists.
std::vector<std::string> parse_theory_facts(const std::string& completion);

struct ExtractionOptions {
  int k_exemplars = 3;
  int max_in_flight = 8;
  // When set, per-question fact lists are checkpointed here and reused on
  // rerun, so long extractions survive interruption.
  std::string checkpoint_dir;
};

// Facts generated for one question, tagged with its id. Generic filtering is
// a separate step (keep_if_generic).
std::vector<Fact> extract_facts(const Question& question,
                                const ExemplarStore& store,
                                ChatBackend& chat, const PromptSet& prompts,
                                int k_exemplars);

// Keeps only facts the classifier labels generic; order preserved.
// Unparseable classifications drop the fact with a warning on stderr.
std::vector<Fact> keep_if_generic(const std::vector<Fact>& facts,
                                  ChatBackend& chat, const PromptSet& prompts,
                                  int max_in_flight = 8);

struct BuildPoolResult {
  std::vector<Fact> facts;
  PoolManifest manifest;
  std::vector<std::string> failed_question_ids;
};

// Runs extraction + generic filter over every question and merges the
// results into the raw pool. Facts are merged by content-addressed id with
// source_question_ids unioned; merge order is question-id ascending, so the
// output is deterministic. Questions whose extraction fails are skipped and
// reported; if every question fails, the whole build fails.
BuildPoolResult build_pool(const std::vector<Question>& questions,
                           const ExemplarStore& store, ChatBackend& chat,
                           const PromptSet& prompts,
                           const ExtractionOptions& options = {});

}  // namespace mt

#endif  // MTLIB_EXTRACTION_HPP
