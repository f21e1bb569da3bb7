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

#ifndef MTLIB_DISTILL_HPP
#define MTLIB_DISTILL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mtlib/model.hpp"
#include "mtlib/rational.hpp"

namespace mt {

// Small dense bitset over fact indices.
class FactMask {
 public:
  FactMask() = default;
  explicit FactMask(std::size_t bits)
      : bits_(bits), blocks_((bits + 63) / 64, 0) {}
  void set(std::size_t i) { blocks_[i >> 6] |= (1ULL << (i & 63)); }
  bool test(std::size_t i) const {
    return (blocks_[i >> 6] >> (i & 63)) & 1ULL;
  }
  std::size_t count() const;
  std::size_t intersect_count(const FactMask& other) const;
  bool is_subset_of(const FactMask& other) const;
  std::size_t size_bits() const { return bits_; }
  const std::vector<std::uint64_t>& blocks() const { return blocks_; }

 private:
  std::size_t bits_ = 0;
  std::vector<std::uint64_t> blocks_;
};

struct QuestionBases {
  std::string question_id;
  std::vector<FactMask> bases;  // non-empty masks over the fact universe
};

// One selection instance: the fact universe (ascending id order) and, per
// question with at least one basis, that question's alternative bases.
// Questions without bases contribute nothing to any objective and are kept
// aside as unproven.
struct SelectionProblem {
  std::vector<std::string> fact_ids;
  std::vector<QuestionBases> questions;
  std::vector<std::string> unproven_question_ids;

  static SelectionProblem build(const std::vector<Fact>& pool,
                                const std::vector<BasisSet>& sets);
  std::size_t fact_index(const std::string& id) const;  // throws if absent
  std::size_t total_bases() const;
};

struct SolveStats {
  std::uint64_t nodes_explored = 0;
  double wall_ms = 0.0;
  // Objective decomposition.
  double coverage_part = 0.0;   // questions covered (qc), sum of p_j (pc),
                                // usage total (usage), 0 (minfact/random)
  double bases_covered = 0.0;   // qc second-tier term
  int fact_count = 0;
};

struct DistillOutcome {
  Microtheory microtheory;
  SolveStats stats;
};

struct DistillOptions {
  // Branch-and-bound node budget. Exhausting it returns the best solution
  // found (or the greedy warm start if better) with status greedy.
  std::uint64_t node_budget = 2'000'000;
};

// Top-n facts by the number of questions whose basis union contains them;
// ties by ascending fact id. objective_value is the sum of selected counts.
DistillOutcome mt_usage(const SelectionProblem& problem, int n);

// Lexicographic maximum of (questions fully covered, bases fully covered,
// fewest facts) under the budget; a basis is covered iff all its facts are
// selected, a question iff some basis is. objective_value = questions
// covered.
DistillOutcome mt_qc(const SelectionProblem& problem, int n,
                     const DistillOptions& options = {});

// Maximizes sum over questions of the best covered fraction of any basis,
// then fewest facts. objective_value = the fraction sum.
DistillOutcome mt_pc(const SelectionProblem& problem, int n,
                     const DistillOptions& options = {});

// Minimum-cardinality set that fully covers one basis for every question
// that has a basis. objective_value = selected fact count.
DistillOutcome min_fact(const SelectionProblem& problem,
                        const DistillOptions& options = {});

// Uniform sample of n facts without replacement, deterministic in the seed.
DistillOutcome mt_random(const std::vector<Fact>& pool, int n,
                         std::uint64_t seed);

// Objective re-evaluation for a given fact-id selection (ids not in the
// universe are ignored). These back the stored-objective invariants and the
// cross-method dominance checks.
std::int64_t evaluate_usage(const SelectionProblem& problem,
                            const std::vector<std::string>& fact_ids);
std::int64_t evaluate_question_coverage(const SelectionProblem& problem,
                                        const std::vector<std::string>& ids);
std::int64_t evaluate_bases_covered(const SelectionProblem& problem,
                                    const std::vector<std::string>& ids);
Rational evaluate_partial_coverage(const SelectionProblem& problem,
                                   const std::vector<std::string>& ids);

}  // namespace mt

#endif  // MTLIB_DISTILL_HPP
