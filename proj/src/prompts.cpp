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

#include "mtlib/prompts.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace mt {

namespace {

constexpr const char* kTheoryInstruction =
    R"(You are a theory generation system that lists facts about a problem area to help solve a reasoning question. Given a question, first generate a QUERY statement for each possible answer: a complete declarative sentence that restates the answer choice as closely as possible.

Then generate a theory of simple FACTS about the world: statements you believe to be logical and true that will help you prove the queries. A FACT is either a generic statement about the world ("birds can fly") or a specific statement about the context that supports the proof of a query ("Tweety is a bird").

For a QUERY, you generate at least 6 statements.

After the theory, show how the one QUERY you believe is correct logically follows. Write a PROOF: an entailment tree that composes the FACTS of your theory step by step. Each step combines two or more premises into a new conclusion (int1, int2, ...) which may be reused as a premise in later steps; the last step entails the chosen query. Each step goes on its own line.

Finally write ANSWER: followed by the label of the chosen query.
)";

constexpr const char* kGenericFilter =
    R"(Decide whether the statement below is a generic statement about the world, or a context-specific statement about particular people, objects, or situations in a single question. Reply with exactly one word: GENERIC or CONTEXT-SPECIFIC.

STATEMENT: {statement}
LABEL:)";

constexpr const char* kCaption =
    R"(Read the question and state, in one short declarative sentence, the single core piece of knowledge it tests. Reply with that sentence only.

QUESTION: {question}
CORE FACT:)";

constexpr const char* kTopicLabel =
    R"(The statements below all test one topic. Reply with a short topic label (2-5 words) and nothing else.

STATEMENTS:
{statements}
TOPIC LABEL:)";

constexpr const char* kHypertopicLabel =
    R"(The topic labels below belong to one broader field of study. Reply with a short label (2-5 words) for that field and nothing else.

TOPICS:
{labels}
FIELD LABEL:)";

constexpr const char* kRelevanceRubric =
    R"(You rate how relevant a fact is for explaining the correct answer to a question, using this rubric:

5 = core, critical knowledge that explains why the correct answer is correct; someone who does not know it cannot answer the question.
4 = core knowledge that explains why an incorrect option is incorrect.
3 = moderately important background: defines or identifies terms used in the question or the correct answer, but is not itself the concept being tested.
2 = true, topically related extra detail; an explanation missing it is still complete and correct.
1 = irrelevant or incorrect.

Give a 5 only if the fact is strictly necessary for the correct answer. You do not need to give any fact a 5. Reply with the number only.

QUESTION: {question}
CORRECT ANSWER: {answer}
FACT: {fact}
RATING:)";

std::string read_if_exists(const std::filesystem::path& path,
                           const char* fallback) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return fallback;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

PromptSet PromptSet::defaults() {
  PromptSet set;
  set.theory_instruction = kTheoryInstruction;
  set.generic_filter = kGenericFilter;
  set.caption = kCaption;
  set.topic_label = kTopicLabel;
  set.hypertopic_label = kHypertopicLabel;
  set.relevance_rubric = kRelevanceRubric;
  return set;
}

PromptSet PromptSet::load(const std::string& dir) {
  if (dir.empty()) return defaults();
  std::filesystem::path base(dir);
  PromptSet set;
  set.theory_instruction =
      read_if_exists(base / "theory.txt", kTheoryInstruction);
  set.generic_filter =
      read_if_exists(base / "generic_filter.txt", kGenericFilter);
  set.caption = read_if_exists(base / "caption.txt", kCaption);
  set.topic_label = read_if_exists(base / "topic_label.txt", kTopicLabel);
  set.hypertopic_label =
      read_if_exists(base / "hypertopic_label.txt", kHypertopicLabel);
  set.relevance_rubric =
      read_if_exists(base / "relevance_rubric.txt", kRelevanceRubric);
  return set;
}

std::string render_template(
    std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    std::size_t open = tmpl.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    std::size_t close = tmpl.find('}', open);
    if (close == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, open - pos));
    std::string key(tmpl.substr(open + 1, close - open - 1));
    auto it = values.find(key);
    if (it != values.end()) {
      out.append(it->second);
    } else {
      out.append(tmpl.substr(open, close - open + 1));
    }
    pos = close + 1;
  }
  return out;
}

}  // namespace mt
