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

#ifndef MTLIB_MODEL_HPP
#define MTLIB_MODEL_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mt {

// One declarative statement. Immutable after construction; ids are
// content-addressed (see text.hpp) when minted by extraction.
struct Fact {
  std::string id;
  std::string text;
  std::vector<std::string> source_question_ids;
  bool generic = true;
};

struct QuestionOption {
  std::string label;
  // The option phrased as a standalone hypothesis sentence.
  std::string text;
};

struct Question {
  std::string id;
  std::string context_text;
  std::string question_text;
  std::vector<QuestionOption> options;
  std::string correct_label;

  const QuestionOption* correct_option() const {
    for (const auto& opt : options) {
      if (opt.label == correct_label) return &opt;
    }
    return nullptr;
  }
};

// The alternative leaf sets an entailment engine found for one hypothesis.
// An empty `bases` list marks an unproven question. Each basis is a sorted,
// deduplicated list of fact ids.
struct BasisSet {
  std::string question_id;
  std::string hypothesis_text;
  std::vector<std::vector<std::string>> bases;
  bool truncated = false;
};

enum class Method { kUsage, kQc, kPc, kMinFact, kRandom };
enum class SolverStatus { kOptimal, kFeasible, kGreedy };

std::string to_string(Method method);
Method method_from_string(const std::string& name);
std::string to_string(SolverStatus status);
SolverStatus solver_status_from_string(const std::string& name);

struct Microtheory {
  Method method = Method::kUsage;
  // Absent for minfact (which has no budget).
  std::optional<int> budget;
  std::vector<std::string> fact_ids;
  double objective_value = 0.0;
  SolverStatus solver_status = SolverStatus::kOptimal;
};

enum class PoolStage { kRaw, kDeduped, kCondensed };

std::string to_string(PoolStage stage);
PoolStage pool_stage_from_string(const std::string& name);

// Provenance record for one pool file. Stage transitions are only ever
// raw -> deduped -> condensed.
struct PoolManifest {
  std::string pool_id;
  PoolStage stage = PoolStage::kRaw;
  std::optional<std::string> parent_pool_id;
  std::map<std::string, double> parameters;
  std::size_t fact_count = 0;
};

}  // namespace mt

#endif  // MTLIB_MODEL_HPP
