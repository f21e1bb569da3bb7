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

#include "mtlib/basis.hpp"

#include <algorithm>
#include <iostream>
#include <set>

#include "mtlib/errors.hpp"
#include "mtlib/text.hpp"

namespace mt {

std::string InferenceStore::add(
    const std::string& text,
    const std::vector<std::vector<std::string>>& bases) {
  const std::string key = normalize_text(text);
  auto it = by_text_.find(key);
  std::size_t index;
  if (it == by_text_.end()) {
    Entry entry;
    entry.pseudo_id = sub_hypothesis_id(key);
    entry.text = key;
    index = entries_.size();
    by_text_[key] = index;
    by_id_[entry.pseudo_id] = index;
    entries_.push_back(std::move(entry));
  } else {
    index = it->second;
  }
  auto& stored = entries_[index].bases;
  for (const auto& basis : bases) {
    std::vector<std::string> sorted = basis;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    if (sorted.empty()) continue;
    if (std::find(stored.begin(), stored.end(), sorted) == stored.end()) {
      stored.push_back(std::move(sorted));
    }
  }
  std::sort(stored.begin(), stored.end());
  return entries_[index].pseudo_id;
}

const std::vector<std::vector<std::string>>* InferenceStore::groundings_by_id(
    const std::string& pseudo_id) const {
  auto it = by_id_.find(pseudo_id);
  if (it == by_id_.end()) return nullptr;
  return &entries_[it->second].bases;
}

bool InferenceStore::contains_text(const std::string& text) const {
  return by_text_.count(normalize_text(text)) > 0;
}

std::vector<Fact> InferenceStore::pseudo_facts() const {
  std::vector<Fact> facts;
  facts.reserve(entries_.size());
  for (const auto& entry : entries_) {
    Fact fact;
    fact.id = entry.pseudo_id;
    fact.text = entry.text;
    fact.generic = true;
    facts.push_back(std::move(fact));
  }
  return facts;
}

namespace {

// Generating the full cartesian product before truncation guarantees the
// kept bases are the globally lexicographically smallest; past this guard we
// fall back to a deterministic mixed-radix enumeration order instead.
constexpr std::size_t kGenerationGuard = 200000;

}  // namespace

UnfoldResult unfold(const std::vector<std::string>& basis,
                    const InferenceStore& store, std::size_t cap) {
  if (cap < 1) throw ValidationError("unfold: cap must be >= 1");

  UnfoldResult result;
  std::vector<std::string> literals;
  std::vector<const std::vector<std::vector<std::string>>*> expansions;
  for (const auto& element : basis) {
    if (is_sub_hypothesis_id(element)) {
      const auto* groundings = store.groundings_by_id(element);
      if (groundings == nullptr || groundings->empty()) {
        // No stored grounding: keep the pseudo id and flag the basis.
        result.incomplete = true;
        literals.push_back(element);
      } else {
        expansions.push_back(groundings);
      }
    } else {
      literals.push_back(element);
    }
  }
  std::sort(literals.begin(), literals.end());
  literals.erase(std::unique(literals.begin(), literals.end()),
                 literals.end());

  if (expansions.empty()) {
    result.bases.push_back(std::move(literals));
    return result;
  }

  std::size_t product = 1;
  bool guarded = false;
  for (const auto* exp : expansions) {
    if (product > kGenerationGuard / exp->size()) {
      guarded = true;
      break;
    }
    product *= exp->size();
  }

  std::set<std::vector<std::string>> unique;
  std::vector<std::size_t> choice(expansions.size(), 0);
  std::size_t generated = 0;
  const std::size_t generation_limit = guarded ? kGenerationGuard : product;
  while (generated < generation_limit) {
    std::vector<std::string> combined = literals;
    for (std::size_t e = 0; e < expansions.size(); ++e) {
      const auto& grounding = (*expansions[e])[choice[e]];
      combined.insert(combined.end(), grounding.begin(), grounding.end());
    }
    std::sort(combined.begin(), combined.end());
    combined.erase(std::unique(combined.begin(), combined.end()),
                   combined.end());
    unique.insert(std::move(combined));
    ++generated;
    // Mixed-radix increment, last slot fastest.
    std::size_t e = expansions.size();
    while (e > 0) {
      --e;
      if (++choice[e] < expansions[e]->size()) break;
      choice[e] = 0;
      if (e == 0) generated = generation_limit;  // wrapped: all combos done
    }
  }

  if (guarded) result.truncated = true;
  for (const auto& b : unique) {
    if (result.bases.size() >= cap) {
      result.truncated = true;
      break;
    }
    result.bases.push_back(b);
  }
  return result;
}

CollectResult collect_bases(const std::vector<Question>& questions,
                            const std::vector<Fact>& pool,
                            EngineBackend& engine,
                            const CollectOptions& options) {
  if (pool.empty()) throw ValidationError("collect_bases: empty pool");

  std::vector<Question> ordered = questions;
  std::sort(ordered.begin(), ordered.end(),
            [](const Question& a, const Question& b) { return a.id < b.id; });

  CollectResult result;
  for (const Question& question : ordered) {
    const QuestionOption* correct = question.correct_option();
    if (correct == nullptr) {
      throw IntegrityError("question " + question.id +
                           " has no option matching its correct label");
    }

    std::vector<Fact> augmented = pool;
    for (auto& pseudo : result.store.pseudo_facts()) {
      augmented.push_back(std::move(pseudo));
    }

    BasisSet set;
    set.question_id = question.id;
    set.hypothesis_text = correct->text;

    ProveResult proved;
    bool ok = true;
    try {
      proved = engine.prove(correct->text, question, augmented);
    } catch (const TransportError& e) {
      std::cerr << "warning: engine failed for question " << question.id
                << ": " << e.what() << "\n";
      ok = false;
    }

    if (ok) {
      std::set<std::vector<std::string>> unique;
      bool truncated = false;
      for (const auto& basis : proved.bases) {
        UnfoldResult unfolded = unfold(basis, result.store, options.cap);
        truncated = truncated || unfolded.truncated;
        for (auto& b : unfolded.bases) {
          bool has_pseudo = std::any_of(
              b.begin(), b.end(),
              [](const std::string& id) { return is_sub_hypothesis_id(id); });
          if (has_pseudo && !options.include_incomplete) continue;
          if (b.empty()) continue;
          unique.insert(std::move(b));
        }
      }
      for (const auto& b : unique) {
        if (set.bases.size() >= options.cap) {
          truncated = true;
          break;
        }
        set.bases.push_back(b);
      }
      set.truncated = truncated;

      // Store update happens after the question so earlier questions never
      // see later inferences.
      for (const auto& sub : proved.sub_hypotheses) {
        std::vector<std::vector<std::string>> resolved;
        for (const auto& basis : sub.bases) {
          UnfoldResult unfolded = unfold(basis, result.store, options.cap);
          for (auto& b : unfolded.bases) {
            bool pure = std::none_of(
                b.begin(), b.end(), [](const std::string& id) {
                  return is_sub_hypothesis_id(id);
                });
            if (pure && !b.empty()) resolved.push_back(std::move(b));
          }
        }
        if (!resolved.empty()) result.store.add(sub.text, resolved);
      }
    }

    if (set.bases.empty()) {
      result.unproven_question_ids.push_back(question.id);
    }
    result.basis_sets.push_back(std::move(set));
  }
  return result;
}

}  // namespace mt
