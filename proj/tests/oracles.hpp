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

// Brute-force oracles for the selection objectives. These enumerate every
// fact subset of size <= n and stay deliberately independent of the solver's
// code paths: sets are plain vectors of id strings, objectives are evaluated
// by definition.

#ifndef MTLIB_TESTS_ORACLES_HPP
#define MTLIB_TESTS_ORACLES_HPP

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "mtlib/model.hpp"
#include "mtlib/rational.hpp"
#include "test_util.hpp"

namespace mt_test {

struct OracleInstance {
  std::vector<std::string> facts;  // universe, ascending
  // bases[q] = the alternative bases of question q (each a set of fact ids)
  std::vector<std::vector<std::vector<std::string>>> bases;
};

inline bool contains_all(const std::set<std::string>& selection,
                         const std::vector<std::string>& basis) {
  for (const auto& id : basis) {
    if (!selection.count(id)) return false;
  }
  return true;
}

inline std::int64_t oracle_questions_covered(
    const OracleInstance& instance, const std::set<std::string>& selection) {
  std::int64_t covered = 0;
  for (const auto& question : instance.bases) {
    for (const auto& basis : question) {
      if (contains_all(selection, basis)) {
        ++covered;
        break;
      }
    }
  }
  return covered;
}

inline mt::Rational oracle_partial_coverage(
    const OracleInstance& instance, const std::set<std::string>& selection) {
  mt::Rational total;
  for (const auto& question : instance.bases) {
    mt::Rational best;
    for (const auto& basis : question) {
      std::int64_t hit = 0;
      for (const auto& id : basis) {
        if (selection.count(id)) ++hit;
      }
      mt::Rational frac(hit, static_cast<std::int64_t>(basis.size()));
      if (frac > best) best = frac;
    }
    total += best;
  }
  return total;
}

// Visits every subset of the universe with at most n elements.
inline void for_each_subset(
    const std::vector<std::string>& facts, std::size_t n,
    const std::function<void(const std::set<std::string>&)>& visit) {
  std::vector<std::size_t> stack;
  std::set<std::string> current;
  std::function<void(std::size_t)> recurse = [&](std::size_t start) {
    visit(current);
    if (current.size() >= n) return;
    for (std::size_t i = start; i < facts.size(); ++i) {
      current.insert(facts[i]);
      recurse(i + 1);
      current.erase(facts[i]);
    }
  };
  recurse(0);
}

inline std::int64_t oracle_best_qc(const OracleInstance& instance,
                                   std::size_t n) {
  std::int64_t best = 0;
  for_each_subset(instance.facts, n, [&](const std::set<std::string>& s) {
    best = std::max(best, oracle_questions_covered(instance, s));
  });
  return best;
}

inline mt::Rational oracle_best_pc(const OracleInstance& instance,
                                   std::size_t n) {
  mt::Rational best;
  for_each_subset(instance.facts, n, [&](const std::set<std::string>& s) {
    mt::Rational value = oracle_partial_coverage(instance, s);
    if (value > best) best = value;
  });
  return best;
}

// Smallest selection that fully covers one basis of every question.
inline std::size_t oracle_min_cover(const OracleInstance& instance) {
  for (std::size_t n = 0; n <= instance.facts.size(); ++n) {
    bool found = false;
    for_each_subset(instance.facts, n, [&](const std::set<std::string>& s) {
      if (found || s.size() != n) return;
      if (static_cast<std::size_t>(oracle_questions_covered(instance, s)) ==
          instance.bases.size()) {
        found = true;
      }
    });
    if (found) return n;
  }
  return instance.facts.size();
}

// Seeded random instance within the acceptance envelope:
// |C| <= 12, d <= 6, <= 3 bases per question, basis size <= 4.
inline OracleInstance random_instance(Rng& rng) {
  OracleInstance instance;
  const int n_facts = rng.range(4, 12);
  for (int i = 0; i < n_facts; ++i) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "f%02d", i);
    instance.facts.push_back(buf);
  }
  const int n_questions = rng.range(1, 6);
  for (int q = 0; q < n_questions; ++q) {
    std::vector<std::vector<std::string>> question;
    const int n_bases = rng.range(1, 3);
    std::set<std::vector<std::string>> dedup;
    for (int b = 0; b < n_bases; ++b) {
      std::set<std::string> basis;
      const int size = rng.range(1, 4);
      for (int k = 0; k < size; ++k) {
        basis.insert(instance.facts[rng.below(instance.facts.size())]);
      }
      std::vector<std::string> sorted(basis.begin(), basis.end());
      if (dedup.insert(sorted).second) question.push_back(std::move(sorted));
    }
    instance.bases.push_back(std::move(question));
  }
  return instance;
}

inline std::vector<mt::Fact> instance_pool(const OracleInstance& instance) {
  std::vector<mt::Fact> pool;
  for (const auto& id : instance.facts) {
    pool.push_back(make_fact(id, "statement " + id));
  }
  return pool;
}

inline std::vector<mt::BasisSet> instance_sets(const OracleInstance& instance) {
  std::vector<mt::BasisSet> sets;
  for (std::size_t q = 0; q < instance.bases.size(); ++q) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "q%02zu", q);
    sets.push_back(make_basis_set(buf, instance.bases[q]));
  }
  return sets;
}

}  // namespace mt_test

#endif  // MTLIB_TESTS_ORACLES_HPP
