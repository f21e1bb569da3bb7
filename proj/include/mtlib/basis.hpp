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

#ifndef MTLIB_BASIS_HPP
#define MTLIB_BASIS_HPP

#include <map>
#include <string>
#include <vector>

#include "mtlib/model.hpp"
#include "mtlib/providers.hpp"

namespace mt {

// Sub-hypotheses the engine grounded while proving earlier questions, keyed
// by normalized text. Each entry records the pseudo-fact id under which the
// sub-hypothesis is injected into later pools and the fact-id bases that
// grounded it.
class InferenceStore {
 public:
  // Returns the pseudo-fact id for the sub-hypothesis (minting it if new)
  // and merges `bases` into its grounding list.
  std::string add(const std::string& text,
                  const std::vector<std::vector<std::string>>& bases);

  const std::vector<std::vector<std::string>>* groundings_by_id(
      const std::string& pseudo_id) const;
  bool contains_text(const std::string& text) const;

  // Pseudo-facts for every stored sub-hypothesis, in insertion order.
  std::vector<Fact> pseudo_facts() const;
  std::size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    std::string pseudo_id;
    std::string text;
    std::vector<std::vector<std::string>> bases;
  };
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> by_text_;
  std::map<std::string, std::size_t> by_id_;
};

struct UnfoldResult {
  // Pure fact-id bases, each sorted, deduplicated as sets, in lexicographic
  // order of the sorted id tuple, truncated to cap.
  std::vector<std::vector<std::string>> bases;
  bool truncated = false;
  // True when some element had the sub-hypothesis prefix but no stored
  // grounding; that element is kept verbatim in the output bases.
  bool incomplete = false;
};

// Replaces every sub-hypothesis element of `basis` with each of its stored
// groundings (cartesian product across sub-hypothesis elements).
UnfoldResult unfold(const std::vector<std::string>& basis,
                    const InferenceStore& store, std::size_t cap = 1000);

struct CollectOptions {
  std::size_t cap = 1000;  // max bases per question after unfolding
  // Bases that still contain ungrounded sub-hypothesis elements are dropped
  // unless this is set.
  bool include_incomplete = false;
};

struct CollectResult {
  std::vector<BasisSet> basis_sets;  // one per question, question-id order
  InferenceStore store;
  std::vector<std::string> unproven_question_ids;
};

// Proves each question's correct hypothesis against pool + retained
// sub-hypotheses, unfolds the returned bases, and updates the store after
// each question. Questions are processed in ascending id order, which makes
// the store contents (and therefore the run) deterministic.
CollectResult collect_bases(const std::vector<Question>& questions,
                            const std::vector<Fact>& pool,
                            EngineBackend& engine,
                            const CollectOptions& options = {});

}  // namespace mt

#endif  // MTLIB_BASIS_HPP
