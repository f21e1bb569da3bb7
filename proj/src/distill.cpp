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

#include "mtlib/distill.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <random>
#include <set>
#include <unordered_map>

#include "mtlib/errors.hpp"

namespace mt {

std::size_t FactMask::count() const {
  std::size_t total = 0;
  for (auto block : blocks_) total += static_cast<std::size_t>(
      __builtin_popcountll(block));
  return total;
}

std::size_t FactMask::intersect_count(const FactMask& other) const {
  std::size_t total = 0;
  const std::size_t n = std::min(blocks_.size(), other.blocks_.size());
  for (std::size_t i = 0; i < n; ++i) {
    total += static_cast<std::size_t>(
        __builtin_popcountll(blocks_[i] & other.blocks_[i]));
  }
  return total;
}

bool FactMask::is_subset_of(const FactMask& other) const {
  const std::size_t n = std::min(blocks_.size(), other.blocks_.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (blocks_[i] & ~other.blocks_[i]) return false;
  }
  for (std::size_t i = n; i < blocks_.size(); ++i) {
    if (blocks_[i]) return false;
  }
  return true;
}

SelectionProblem SelectionProblem::build(const std::vector<Fact>& pool,
                                         const std::vector<BasisSet>& sets) {
  SelectionProblem problem;
  problem.fact_ids.reserve(pool.size());
  for (const auto& f : pool) problem.fact_ids.push_back(f.id);
  std::sort(problem.fact_ids.begin(), problem.fact_ids.end());
  problem.fact_ids.erase(
      std::unique(problem.fact_ids.begin(), problem.fact_ids.end()),
      problem.fact_ids.end());

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < problem.fact_ids.size(); ++i) {
    index[problem.fact_ids[i]] = i;
  }

  std::vector<const BasisSet*> ordered;
  for (const auto& set : sets) ordered.push_back(&set);
  std::sort(ordered.begin(), ordered.end(),
            [](const BasisSet* a, const BasisSet* b) {
              return a->question_id < b->question_id;
            });

  for (const BasisSet* set : ordered) {
    if (set->bases.empty()) {
      problem.unproven_question_ids.push_back(set->question_id);
      continue;
    }
    QuestionBases q;
    q.question_id = set->question_id;
    std::set<std::vector<std::uint64_t>> seen;
    for (const auto& basis : set->bases) {
      FactMask mask(problem.fact_ids.size());
      for (const auto& id : basis) {
        auto it = index.find(id);
        if (it == index.end()) {
          throw IntegrityError("basis for question " + set->question_id +
                               " references fact \"" + id +
                               "\" outside the pool");
        }
        mask.set(it->second);
      }
      if (seen.insert(mask.blocks()).second) q.bases.push_back(std::move(mask));
    }
    problem.questions.push_back(std::move(q));
  }
  return problem;
}

std::size_t SelectionProblem::fact_index(const std::string& id) const {
  auto it = std::lower_bound(fact_ids.begin(), fact_ids.end(), id);
  if (it == fact_ids.end() || *it != id) {
    throw IntegrityError("fact id \"" + id + "\" not in the universe");
  }
  return static_cast<std::size_t>(it - fact_ids.begin());
}

std::size_t SelectionProblem::total_bases() const {
  std::size_t total = 0;
  for (const auto& q : questions) total += q.bases.size();
  return total;
}

namespace {

struct BasisRef {
  std::size_t question;
  std::size_t basis;
};

// Incidence of facts in bases plus the per-basis counters shared by the
// branch-and-bound solvers. Facts are branched in ascending-id order (the
// universe is sorted), with the include branch explored first; that makes
// the first-found solution among equals the lexicographically smallest
// sorted fact-id tuple, so "first found wins ties" is the canonical
// tie-break.
struct SolverBase {
  const SelectionProblem& problem;
  const std::size_t n_facts;
  std::vector<std::vector<BasisRef>> incidence;  // per fact
  std::vector<std::vector<std::size_t>> basis_size;
  std::vector<std::vector<std::size_t>> included_in;  // per (q, basis)
  std::vector<std::vector<std::size_t>> excluded_in;
  std::vector<std::size_t> selection;  // current include stack
  std::uint64_t nodes = 0;
  std::uint64_t node_budget;
  bool aborted = false;

  SolverBase(const SelectionProblem& p, std::uint64_t budget)
      : problem(p), n_facts(p.fact_ids.size()), node_budget(budget) {
    incidence.resize(n_facts);
    basis_size.resize(p.questions.size());
    included_in.resize(p.questions.size());
    excluded_in.resize(p.questions.size());
    for (std::size_t q = 0; q < p.questions.size(); ++q) {
      const auto& bases = p.questions[q].bases;
      basis_size[q].resize(bases.size());
      included_in[q].assign(bases.size(), 0);
      excluded_in[q].assign(bases.size(), 0);
      for (std::size_t b = 0; b < bases.size(); ++b) {
        basis_size[q][b] = bases[b].count();
        for (std::size_t f = 0; f < n_facts; ++f) {
          if (bases[b].test(f)) incidence[f].push_back({q, b});
        }
      }
    }
  }

  bool tick() {
    if (++nodes > node_budget) aborted = true;
    return !aborted;
  }
};

std::vector<std::size_t> sorted_selection(std::vector<std::size_t> sel) {
  std::sort(sel.begin(), sel.end());
  return sel;
}

// ---------------------------------------------------------------------------
// Question coverage (QC): lexicographic (z, y, -|S|) via the integer
// scalarization W = z*(B+1) + y, which is exact because y <= B.

class QcSolver : public SolverBase {
 public:
  QcSolver(const SelectionProblem& p, int n, std::uint64_t budget)
      : SolverBase(p, budget),
        budget_n_(static_cast<std::size_t>(n)),
        weight_(static_cast<std::int64_t>(p.total_bases()) + 1),
        covered_bases_per_q_(p.questions.size(), 0) {}

  struct Result {
    std::vector<std::size_t> facts;
    std::int64_t z = 0;
    std::int64_t y = 0;
    bool optimal = true;
    std::uint64_t nodes = 0;
  };

  Result solve() {
    greedy();
    dfs(0, budget_n_);
    Result result;
    result.nodes = nodes;
    result.optimal = !aborted;
    if (!have_incumbent_ ||
        (aborted && better(greedy_w_, greedy_facts_, best_w_, best_facts_))) {
      result.facts = greedy_selection_;
      result.z = greedy_w_ / weight_;
      result.y = greedy_w_ % weight_;
    } else {
      result.facts = best_selection_;
      result.z = best_w_ / weight_;
      result.y = best_w_ % weight_;
    }
    return result;
  }

 private:
  static bool better(std::int64_t w1, std::size_t f1, std::int64_t w2,
                     std::size_t f2) {
    return w1 > w2 || (w1 == w2 && f1 < f2);
  }

  void apply(std::size_t f, bool include) {
    for (const auto& ref : incidence[f]) {
      auto& inc = included_in[ref.question][ref.basis];
      auto& exc = excluded_in[ref.question][ref.basis];
      if (include) {
        if (++inc == basis_size[ref.question][ref.basis]) {
          ++y_;
          if (++covered_bases_per_q_[ref.question] == 1) ++z_;
        }
      } else {
        ++exc;
      }
    }
  }

  void undo(std::size_t f, bool include) {
    for (const auto& ref : incidence[f]) {
      auto& inc = included_in[ref.question][ref.basis];
      auto& exc = excluded_in[ref.question][ref.basis];
      if (include) {
        if (inc-- == basis_size[ref.question][ref.basis]) {
          --y_;
          if (covered_bases_per_q_[ref.question]-- == 1) --z_;
        }
      } else {
        --exc;
      }
    }
  }

  // Admissible bound: a question (basis) still counts as coverable
  // (completable) if some basis with no excluded facts is missing at most r
  // facts. Shared facts mean several can complete off the same budget, so
  // counting them all is the safe relaxation.
  std::int64_t bound(std::size_t r) const {
    std::int64_t z_ub = z_;
    std::int64_t y_ub = y_;
    for (std::size_t q = 0; q < problem.questions.size(); ++q) {
      bool coverable = covered_bases_per_q_[q] > 0;
      for (std::size_t b = 0; b < problem.questions[q].bases.size(); ++b) {
        if (excluded_in[q][b] > 0) continue;
        std::size_t missing = basis_size[q][b] - included_in[q][b];
        if (missing == 0) continue;
        if (missing <= r) {
          ++y_ub;
          coverable = true;
        }
      }
      if (coverable && covered_bases_per_q_[q] == 0) ++z_ub;
    }
    return z_ub * weight_ + y_ub;
  }

  void record() {
    const std::int64_t w = z_ * weight_ + y_;
    if (!have_incumbent_ ||
        better(w, selection.size(), best_w_, best_facts_)) {
      have_incumbent_ = true;
      best_w_ = w;
      best_facts_ = selection.size();
      best_selection_ = sorted_selection(selection);
    }
  }

  void dfs(std::size_t pos, std::size_t r) {
    if (!tick()) return;
    const std::int64_t ub = bound(r);
    const std::int64_t floor_w = have_incumbent_ ? best_w_ : greedy_w_;
    if (ub < floor_w) return;
    if (have_incumbent_ && ub == best_w_ && selection.size() >= best_facts_) {
      return;
    }
    if (pos == n_facts || r == 0) {
      record();
      return;
    }
    apply(pos, true);
    selection.push_back(pos);
    dfs(pos + 1, r - 1);
    selection.pop_back();
    undo(pos, true);
    if (aborted) return;
    apply(pos, false);
    dfs(pos + 1, r);
    undo(pos, false);
  }

  // Warm start: repeatedly add the fact with the largest (dz, dy) gain.
  void greedy() {
    std::vector<char> taken(n_facts, 0);
    for (std::size_t step = 0; step < budget_n_; ++step) {
      std::size_t best_f = n_facts;
      std::int64_t best_gain = 0;
      for (std::size_t f = 0; f < n_facts; ++f) {
        if (taken[f]) continue;
        std::int64_t dz = 0, dy = 0;
        for (const auto& ref : incidence[f]) {
          if (included_in[ref.question][ref.basis] + 1 ==
              basis_size[ref.question][ref.basis]) {
            ++dy;
            if (covered_bases_per_q_[ref.question] == 0) dz = 1;
          }
        }
        // dz can overcount across bases of one question; recompute exactly
        // only when it matters.
        std::int64_t gain = dz * weight_ + dy;
        if (gain > best_gain) {
          best_gain = gain;
          best_f = f;
        }
      }
      if (best_f == n_facts || best_gain == 0) break;
      apply(best_f, true);
      taken[best_f] = 1;
      greedy_selection_.push_back(best_f);
    }
    greedy_w_ = z_ * weight_ + y_;
    greedy_facts_ = greedy_selection_.size();
    greedy_selection_ = sorted_selection(greedy_selection_);
    // Reset state for the exact search.
    for (auto f : greedy_selection_) undo(f, true);
  }

  std::size_t budget_n_;
  std::int64_t weight_;
  std::vector<std::size_t> covered_bases_per_q_;
  std::int64_t z_ = 0;
  std::int64_t y_ = 0;
  bool have_incumbent_ = false;
  std::int64_t best_w_ = 0;
  std::size_t best_facts_ = 0;
  std::vector<std::size_t> best_selection_;
  std::int64_t greedy_w_ = 0;
  std::size_t greedy_facts_ = 0;
  std::vector<std::size_t> greedy_selection_;
};

// ---------------------------------------------------------------------------
// Partial coverage (PC): maximize sum_j max_k |S cap L_kj| / |L_kj| exactly
// in rational arithmetic, then fewest facts.

class PcSolver : public SolverBase {
 public:
  PcSolver(const SelectionProblem& p, int n, std::uint64_t budget)
      : SolverBase(p, budget), budget_n_(static_cast<std::size_t>(n)) {}

  struct Result {
    std::vector<std::size_t> facts;
    Rational total;
    bool optimal = true;
    std::uint64_t nodes = 0;
  };

  Result solve() {
    greedy();
    dfs(0, budget_n_);
    Result result;
    result.nodes = nodes;
    result.optimal = !aborted;
    if (!have_incumbent_ ||
        (aborted && (greedy_total_ > best_total_ ||
                     (greedy_total_ == best_total_ &&
                      greedy_selection_.size() < best_facts_)))) {
      result.facts = greedy_selection_;
      result.total = greedy_total_;
    } else {
      result.facts = best_selection_;
      result.total = best_total_;
    }
    return result;
  }

 private:
  void apply(std::size_t f, bool include) {
    for (const auto& ref : incidence[f]) {
      if (include) {
        ++included_in[ref.question][ref.basis];
      } else {
        ++excluded_in[ref.question][ref.basis];
      }
    }
  }
  void undo(std::size_t f, bool include) {
    for (const auto& ref : incidence[f]) {
      if (include) {
        --included_in[ref.question][ref.basis];
      } else {
        --excluded_in[ref.question][ref.basis];
      }
    }
  }

  Rational current_total() const {
    Rational total;
    for (std::size_t q = 0; q < problem.questions.size(); ++q) {
      Rational best;
      for (std::size_t b = 0; b < problem.questions[q].bases.size(); ++b) {
        Rational frac(static_cast<std::int64_t>(included_in[q][b]),
                      static_cast<std::int64_t>(basis_size[q][b]));
        if (frac > best) best = frac;
      }
      total += best;
    }
    return total;
  }

  // Admissible: each basis could still gain up to min(r, undecided facts in
  // it); budget sharing across questions is ignored.
  Rational bound(std::size_t r) const {
    Rational total;
    for (std::size_t q = 0; q < problem.questions.size(); ++q) {
      Rational best;
      for (std::size_t b = 0; b < problem.questions[q].bases.size(); ++b) {
        const std::size_t size = basis_size[q][b];
        const std::size_t undecided =
            size - included_in[q][b] - excluded_in[q][b];
        const std::size_t reachable =
            included_in[q][b] + std::min(r, undecided);
        Rational frac(static_cast<std::int64_t>(reachable),
                      static_cast<std::int64_t>(size));
        if (frac > best) best = frac;
      }
      total += best;
    }
    return total;
  }

  void record() {
    Rational total = current_total();
    if (!have_incumbent_ || total > best_total_ ||
        (total == best_total_ && selection.size() < best_facts_)) {
      have_incumbent_ = true;
      best_total_ = total;
      best_facts_ = selection.size();
      best_selection_ = sorted_selection(selection);
    }
  }

  void dfs(std::size_t pos, std::size_t r) {
    if (!tick()) return;
    const Rational ub = bound(r);
    if (have_incumbent_) {
      if (ub < best_total_) return;
      if (ub == best_total_ && selection.size() >= best_facts_) return;
    } else if (ub < greedy_total_) {
      return;
    }
    if (pos == n_facts || r == 0) {
      record();
      return;
    }
    apply(pos, true);
    selection.push_back(pos);
    dfs(pos + 1, r - 1);
    selection.pop_back();
    undo(pos, true);
    if (aborted) return;
    apply(pos, false);
    dfs(pos + 1, r);
    undo(pos, false);
  }

  void greedy() {
    std::vector<char> taken(n_facts, 0);
    Rational current;
    for (std::size_t step = 0; step < budget_n_; ++step) {
      std::size_t best_f = n_facts;
      Rational best_gain;
      for (std::size_t f = 0; f < n_facts; ++f) {
        if (taken[f]) continue;
        apply(f, true);
        Rational gain = current_total() - current;
        undo(f, true);
        if (gain > best_gain) {
          best_gain = gain;
          best_f = f;
        }
      }
      if (best_f == n_facts || !(best_gain > Rational())) break;
      apply(best_f, true);
      taken[best_f] = 1;
      greedy_selection_.push_back(best_f);
      current += best_gain;
    }
    greedy_total_ = current;
    greedy_selection_ = sorted_selection(greedy_selection_);
    for (auto f : greedy_selection_) undo(f, true);
  }

  std::size_t budget_n_;
  bool have_incumbent_ = false;
  Rational best_total_;
  std::size_t best_facts_ = 0;
  std::vector<std::size_t> best_selection_;
  Rational greedy_total_;
  std::vector<std::size_t> greedy_selection_;
};

// ---------------------------------------------------------------------------
// Min-fact cover: choose one basis per question minimizing the union size.
// Branches over questions (fewest alternatives first).

class MinFactSolver {
 public:
  MinFactSolver(const SelectionProblem& p, std::uint64_t budget)
      : problem_(p), node_budget_(budget) {
    order_.resize(p.questions.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      const auto& qa = p.questions[a];
      const auto& qb = p.questions[b];
      if (qa.bases.size() != qb.bases.size()) {
        return qa.bases.size() < qb.bases.size();
      }
      return qa.question_id < qb.question_id;
    });
  }

  struct Result {
    std::vector<std::size_t> facts;
    bool optimal = true;
    std::uint64_t nodes = 0;
  };

  Result solve() {
    greedy();
    best_ = greedy_;
    union_mask_.assign((problem_.fact_ids.size() + 63) / 64, 0);
    dfs(0, 0);
    Result result;
    result.nodes = nodes_;
    result.optimal = !aborted_;
    result.facts = best_;
    return result;
  }

 private:
  std::size_t missing_count(const FactMask& basis) const {
    std::size_t missing = 0;
    const auto& blocks = basis.blocks();
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      missing += static_cast<std::size_t>(
          __builtin_popcountll(blocks[i] & ~union_mask_[i]));
    }
    return missing;
  }

  std::size_t lower_bound(std::size_t level) const {
    // Each remaining question needs at least its cheapest completion; the
    // max over them is admissible under arbitrary sharing.
    std::size_t lb = 0;
    for (std::size_t i = level; i < order_.size(); ++i) {
      const auto& q = problem_.questions[order_[i]];
      std::size_t cheapest = SIZE_MAX;
      for (const auto& basis : q.bases) {
        cheapest = std::min(cheapest, missing_count(basis));
      }
      lb = std::max(lb, cheapest);
    }
    return lb;
  }

  void record(std::size_t count) {
    std::vector<std::size_t> facts;
    facts.reserve(count);
    for (std::size_t f = 0; f < problem_.fact_ids.size(); ++f) {
      if ((union_mask_[f >> 6] >> (f & 63)) & 1ULL) facts.push_back(f);
    }
    if (facts.size() < best_.size() ||
        (facts.size() == best_.size() && facts < best_)) {
      best_ = std::move(facts);
    }
  }

  void dfs(std::size_t level, std::size_t count) {
    if (++nodes_ > node_budget_) {
      aborted_ = true;
      return;
    }
    if (count + lower_bound(level) > best_.size()) return;
    if (level == order_.size()) {
      record(count);
      return;
    }
    const auto& q = problem_.questions[order_[level]];
    // Branch on bases, cheapest extension first.
    std::vector<std::pair<std::size_t, std::size_t>> ranked;
    for (std::size_t b = 0; b < q.bases.size(); ++b) {
      ranked.emplace_back(missing_count(q.bases[b]), b);
    }
    std::sort(ranked.begin(), ranked.end());
    if (ranked.front().first == 0) {
      dfs(level + 1, count);  // already covered, no choice to make
      return;
    }
    for (const auto& [missing, b] : ranked) {
      if (aborted_) return;
      if (count + missing > best_.size()) break;
      std::vector<std::size_t> added;
      const auto& blocks = q.bases[b].blocks();
      for (std::size_t f = 0; f < problem_.fact_ids.size(); ++f) {
        if (((blocks[f >> 6] >> (f & 63)) & 1ULL) &&
            !((union_mask_[f >> 6] >> (f & 63)) & 1ULL)) {
          union_mask_[f >> 6] |= (1ULL << (f & 63));
          added.push_back(f);
        }
      }
      dfs(level + 1, count + added.size());
      for (auto f : added) union_mask_[f >> 6] &= ~(1ULL << (f & 63));
    }
  }

  void greedy() {
    union_mask_.assign((problem_.fact_ids.size() + 63) / 64, 0);
    std::vector<char> covered(problem_.questions.size(), 0);
    std::size_t remaining = problem_.questions.size();
    while (remaining > 0) {
      std::size_t best_q = SIZE_MAX, best_b = 0, best_missing = SIZE_MAX;
      for (std::size_t q = 0; q < problem_.questions.size(); ++q) {
        if (covered[q]) continue;
        for (std::size_t b = 0; b < problem_.questions[q].bases.size(); ++b) {
          std::size_t missing = missing_count(problem_.questions[q].bases[b]);
          if (missing < best_missing) {
            best_missing = missing;
            best_q = q;
            best_b = b;
          }
        }
      }
      const auto& basis = problem_.questions[best_q].bases[best_b];
      const auto& blocks = basis.blocks();
      for (std::size_t i = 0; i < blocks.size(); ++i) {
        union_mask_[i] |= blocks[i];
      }
      for (std::size_t q = 0; q < problem_.questions.size(); ++q) {
        if (covered[q]) continue;
        for (const auto& b : problem_.questions[q].bases) {
          if (missing_count(b) == 0) {
            covered[q] = 1;
            --remaining;
            break;
          }
        }
      }
    }
    for (std::size_t f = 0; f < problem_.fact_ids.size(); ++f) {
      if ((union_mask_[f >> 6] >> (f & 63)) & 1ULL) greedy_.push_back(f);
    }
  }

  const SelectionProblem& problem_;
  std::uint64_t node_budget_;
  std::uint64_t nodes_ = 0;
  bool aborted_ = false;
  std::vector<std::size_t> order_;
  std::vector<std::uint64_t> union_mask_;
  std::vector<std::size_t> best_;
  std::vector<std::size_t> greedy_;
};

FactMask mask_from_ids(const SelectionProblem& problem,
                       const std::vector<std::string>& ids) {
  FactMask mask(problem.fact_ids.size());
  for (const auto& id : ids) {
    auto it =
        std::lower_bound(problem.fact_ids.begin(), problem.fact_ids.end(), id);
    if (it != problem.fact_ids.end() && *it == id) {
      mask.set(static_cast<std::size_t>(it - problem.fact_ids.begin()));
    }
  }
  return mask;
}

std::vector<std::int64_t> usage_counts(const SelectionProblem& problem) {
  std::vector<std::int64_t> counts(problem.fact_ids.size(), 0);
  for (const auto& q : problem.questions) {
    FactMask used(problem.fact_ids.size());
    for (const auto& basis : q.bases) {
      for (std::size_t f = 0; f < problem.fact_ids.size(); ++f) {
        if (basis.test(f)) used.set(f);
      }
    }
    for (std::size_t f = 0; f < problem.fact_ids.size(); ++f) {
      if (used.test(f)) ++counts[f];
    }
  }
  return counts;
}

void check_budget(int n, std::size_t universe) {
  if (n < 0) throw ValidationError("budget n must be nonnegative");
  if (static_cast<std::size_t>(n) > universe) {
    throw ValidationError("budget n (" + std::to_string(n) +
                          ") exceeds the universe size (" +
                          std::to_string(universe) + ")");
  }
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

DistillOutcome mt_usage(const SelectionProblem& problem, int n) {
  const auto start = std::chrono::steady_clock::now();
  check_budget(n, problem.fact_ids.size());
  auto counts = usage_counts(problem);
  std::vector<std::size_t> order(problem.fact_ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (counts[a] != counts[b]) return counts[a] > counts[b];
    return problem.fact_ids[a] < problem.fact_ids[b];
  });

  DistillOutcome outcome;
  outcome.microtheory.method = Method::kUsage;
  outcome.microtheory.budget = n;
  std::int64_t total = 0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
    outcome.microtheory.fact_ids.push_back(problem.fact_ids[order[i]]);
    total += counts[order[i]];
  }
  outcome.microtheory.objective_value = static_cast<double>(total);
  outcome.microtheory.solver_status = SolverStatus::kOptimal;
  outcome.stats.coverage_part = static_cast<double>(total);
  outcome.stats.fact_count = n;
  outcome.stats.wall_ms = elapsed_ms(start);
  return outcome;
}

DistillOutcome mt_qc(const SelectionProblem& problem, int n,
                     const DistillOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  check_budget(n, problem.fact_ids.size());
  QcSolver solver(problem, n, options.node_budget);
  auto result = solver.solve();

  DistillOutcome outcome;
  outcome.microtheory.method = Method::kQc;
  outcome.microtheory.budget = n;
  for (auto f : result.facts) {
    outcome.microtheory.fact_ids.push_back(problem.fact_ids[f]);
  }
  outcome.microtheory.objective_value = static_cast<double>(result.z);
  outcome.microtheory.solver_status =
      result.optimal ? SolverStatus::kOptimal : SolverStatus::kGreedy;
  outcome.stats.nodes_explored = result.nodes;
  outcome.stats.coverage_part = static_cast<double>(result.z);
  outcome.stats.bases_covered = static_cast<double>(result.y);
  outcome.stats.fact_count = static_cast<int>(result.facts.size());
  outcome.stats.wall_ms = elapsed_ms(start);
  return outcome;
}

DistillOutcome mt_pc(const SelectionProblem& problem, int n,
                     const DistillOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  check_budget(n, problem.fact_ids.size());
  PcSolver solver(problem, n, options.node_budget);
  auto result = solver.solve();

  DistillOutcome outcome;
  outcome.microtheory.method = Method::kPc;
  outcome.microtheory.budget = n;
  for (auto f : result.facts) {
    outcome.microtheory.fact_ids.push_back(problem.fact_ids[f]);
  }
  outcome.microtheory.objective_value = result.total.to_double();
  outcome.microtheory.solver_status =
      result.optimal ? SolverStatus::kOptimal : SolverStatus::kGreedy;
  outcome.stats.nodes_explored = result.nodes;
  outcome.stats.coverage_part = result.total.to_double();
  outcome.stats.fact_count = static_cast<int>(result.facts.size());
  outcome.stats.wall_ms = elapsed_ms(start);
  return outcome;
}

DistillOutcome min_fact(const SelectionProblem& problem,
                        const DistillOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  MinFactSolver solver(problem, options.node_budget);
  auto result = solver.solve();

  DistillOutcome outcome;
  outcome.microtheory.method = Method::kMinFact;
  for (auto f : result.facts) {
    outcome.microtheory.fact_ids.push_back(problem.fact_ids[f]);
  }
  outcome.microtheory.objective_value =
      static_cast<double>(result.facts.size());
  outcome.microtheory.solver_status =
      result.optimal ? SolverStatus::kOptimal : SolverStatus::kGreedy;
  outcome.stats.nodes_explored = result.nodes;
  outcome.stats.fact_count = static_cast<int>(result.facts.size());
  outcome.stats.wall_ms = elapsed_ms(start);
  return outcome;
}

DistillOutcome mt_random(const std::vector<Fact>& pool, int n,
                         std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  check_budget(n, pool.size());
  std::vector<std::size_t> indices(pool.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  // Explicit Fisher-Yates with a modulo draw: the mt19937_64 stream is
  // specified by the standard, so samples are stable across platforms
  // (std::shuffle and uniform_int_distribution are not).
  std::mt19937_64 gen(seed);
  DistillOutcome outcome;
  outcome.microtheory.method = Method::kRandom;
  outcome.microtheory.budget = n;
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
    std::size_t j = i + static_cast<std::size_t>(gen() % (indices.size() - i));
    std::swap(indices[i], indices[j]);
    outcome.microtheory.fact_ids.push_back(pool[indices[i]].id);
  }
  outcome.microtheory.objective_value = 0.0;
  outcome.microtheory.solver_status = SolverStatus::kOptimal;
  outcome.stats.fact_count = n;
  outcome.stats.wall_ms = elapsed_ms(start);
  return outcome;
}

std::int64_t evaluate_usage(const SelectionProblem& problem,
                            const std::vector<std::string>& fact_ids) {
  auto counts = usage_counts(problem);
  FactMask mask = mask_from_ids(problem, fact_ids);
  std::int64_t total = 0;
  for (std::size_t f = 0; f < problem.fact_ids.size(); ++f) {
    if (mask.test(f)) total += counts[f];
  }
  return total;
}

std::int64_t evaluate_question_coverage(const SelectionProblem& problem,
                                        const std::vector<std::string>& ids) {
  FactMask mask = mask_from_ids(problem, ids);
  std::int64_t covered = 0;
  for (const auto& q : problem.questions) {
    for (const auto& basis : q.bases) {
      if (basis.is_subset_of(mask)) {
        ++covered;
        break;
      }
    }
  }
  return covered;
}

std::int64_t evaluate_bases_covered(const SelectionProblem& problem,
                                    const std::vector<std::string>& ids) {
  FactMask mask = mask_from_ids(problem, ids);
  std::int64_t covered = 0;
  for (const auto& q : problem.questions) {
    for (const auto& basis : q.bases) {
      if (basis.is_subset_of(mask)) ++covered;
    }
  }
  return covered;
}

Rational evaluate_partial_coverage(const SelectionProblem& problem,
                                   const std::vector<std::string>& ids) {
  FactMask mask = mask_from_ids(problem, ids);
  Rational total;
  for (const auto& q : problem.questions) {
    Rational best;
    for (const auto& basis : q.bases) {
      Rational frac(
          static_cast<std::int64_t>(basis.intersect_count(mask)),
          static_cast<std::int64_t>(basis.count()));
      if (frac > best) best = frac;
    }
    total += best;
  }
  return total;
}

}  // namespace mt
