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

#ifndef MTLIB_PROMPTS_HPP
#define MTLIB_PROMPTS_HPP

#include <map>
#include <string>
#include <string_view>

namespace mt {

// Prompt templates are editable text assets. Each has a compiled-in default
// and may be overridden by a file of the same stem under a prompt directory
// (theory.txt, generic_filter.txt, caption.txt, topic_label.txt,
// hypertopic_label.txt, relevance_rubric.txt).
//
// The block markers (QUESTION:, QUERIES:, THEORY:, "(FACT n)", PROOF,
// ANSWER:, LABEL:, RATING:, ...) are load-bearing: parsers and the offline
// mock backends key on them, so edited templates must keep them.
struct PromptSet {
  std::string theory_instruction;
  std::string generic_filter;   // {statement}
  std::string caption;          // {question}
  std::string topic_label;      // {statements}
  std::string hypertopic_label; // {labels}
  std::string relevance_rubric; // {question} {answer} {fact}

  static PromptSet defaults();
  // Defaults overridden by any matching files found in `dir`.
  static PromptSet load(const std::string& dir);
};

// Replaces every "{key}" in the template with its value.
std::string render_template(
    std::string_view tmpl, const std::map<std::string, std::string>& values);

}  // namespace mt

#endif  // MTLIB_PROMPTS_HPP
