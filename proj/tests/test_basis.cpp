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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "mtlib/basis.hpp"
#include "mtlib/errors.hpp"
#include "mtlib/text.hpp"
#include "test_util.hpp"

using namespace mt;
using namespace mt_test;

TEST_CASE("unfold replaces a grounded sub-hypothesis with each grounding") {
  InferenceStore store;
  const std::string sid = store.add("water expands on freezing",
                                    {{"f2", "f3"}, {"f2", "f4"}});
  auto result = unfold({"f1", sid}, store);
  CHECK_FALSE(result.truncated);
  CHECK_FALSE(result.incomplete);
  REQUIRE(result.bases.size() == 2);
  CHECK(result.bases[0] == std::vector<std::string>{"f1", "f2", "f3"});
  CHECK(result.bases[1] == std::vector<std::string>{"f1", "f2", "f4"});
}

TEST_CASE("a basis without sub-hypotheses unfolds to itself") {
  InferenceStore store;
  auto result = unfold({"f3", "f1", "f2"}, store);
  REQUIRE(result.bases.size() == 1);
  CHECK(result.bases[0] == std::vector<std::string>{"f1", "f2", "f3"});
  CHECK_FALSE(result.incomplete);
}

TEST_CASE("an ungrounded sub-hypothesis id marks the basis incomplete") {
  InferenceStore store;
  const std::string ghost = sub_hypothesis_id("never grounded");
  auto result = unfold({"f1", ghost}, store);
  CHECK(result.incomplete);
  REQUIRE(result.bases.size() == 1);
  CHECK(std::find(result.bases[0].begin(), result.bases[0].end(), ghost) !=
        result.bases[0].end());
}

TEST_CASE("cartesian products dedup as sets and truncate at the cap") {
  InferenceStore store;
  std::vector<std::vector<std::string>> g1, g2;
  for (int i = 0; i < 40; ++i) {
    g1.push_back({"a" + std::to_string(i)});
    g2.push_back({"b" + std::to_string(i)});
  }
  const std::string s1 = store.add("first grounded claim", g1);
  const std::string s2 = store.add("second grounded claim", g2);

  // 40 x 40 = 1600 combinations, capped at 1000.
  auto result = unfold({"f1", s1, s2}, store, 1000);
  CHECK(result.truncated);
  CHECK(result.bases.size() == 1000);
  // Lexicographic order of the sorted tuples, so the very first combination
  // is the lexicographically smallest.
  CHECK(result.bases[0] == std::vector<std::string>{"a0", "b0", "f1"});
  std::set<std::vector<std::string>> unique(result.bases.begin(),
                                            result.bases.end());
  CHECK(unique.size() == result.bases.size());

  // Without the cap binding, the output size is the full product.
  auto small = unfold({"f1", s1}, store, 1000);
  CHECK_FALSE(small.truncated);
  CHECK(small.bases.size() == 40);

  // Overlapping groundings dedup below the raw product.
  InferenceStore overlap;
  const std::string sa = overlap.add("claim a", {{"x"}, {"y"}});
  const std::string sb = overlap.add("claim b", {{"x"}, {"y"}});
  auto deduped = unfold({sa, sb}, overlap, 1000);
  // product 4, sets {x},{x,y},{y,x},{y} -> 3 distinct
  CHECK(deduped.bases.size() == 3);
}

TEST_CASE("unfold validates its cap") {
  InferenceStore store;
  CHECK_THROWS_AS(unfold({"f1"}, store, 0), ValidationError);
}

namespace {

std::vector<Fact> small_pool() {
  return {make_fact("f1", "gravity pulls objects downward"),
          make_fact("f2", "rivers flow downhill"),
          make_fact("f3", "water carries sediment"),
          make_fact("f4", "valleys deepen over time")};
}

}  // namespace

TEST_CASE("collect_bases unfolds engine output and updates the store") {
  auto pool = small_pool();
  // q1's proof grounds a sub-hypothesis; q2's proof then uses it.
  const std::string sub_text = "moving water erodes the land";
  std::map<std::string, ProveResult> table;
  {
    ProveResult r1;
    r1.bases = {{"f1", "f2"}};
    GroundedSubHypothesis g;
    g.text = sub_text;
    g.bases = {{"f2", "f3"}};
    r1.sub_hypotheses = {g};
    table["hypothesis one"] = r1;

    ProveResult r2;
    r2.bases = {{sub_hypothesis_id(sub_text), "f4"}};
    table["hypothesis two"] = r2;
  }
  MockEngineBackend engine(table);
  std::vector<Question> questions = {
      make_question("q1", "first?", "hypothesis one"),
      make_question("q2", "second?", "hypothesis two")};

  auto result = collect_bases(questions, pool, engine);
  REQUIRE(result.basis_sets.size() == 2);
  CHECK(result.basis_sets[0].question_id == "q1");
  REQUIRE(result.basis_sets[0].bases.size() == 1);
  CHECK(result.basis_sets[0].bases[0] ==
        std::vector<std::string>{"f1", "f2"});

  // q2's basis [sub, f4] unfolds through the store into pure fact ids.
  REQUIRE(result.basis_sets[1].bases.size() == 1);
  CHECK(result.basis_sets[1].bases[0] ==
        std::vector<std::string>{"f2", "f3", "f4"});
  CHECK(result.store.size() == 1);
  CHECK(result.store.contains_text(sub_text));
  CHECK(result.unproven_question_ids.empty());
}

TEST_CASE("question processing order changes what the store can unfold") {
  auto pool = small_pool();
  const std::string sub_text = "moving water erodes the land";
  std::map<std::string, ProveResult> table;
  {
    ProveResult grounds;
    grounds.bases = {{"f1"}};
    GroundedSubHypothesis g;
    g.text = sub_text;
    g.bases = {{"f2", "f3"}};
    grounds.sub_hypotheses = {g};
    table["grounding hypothesis"] = grounds;

    ProveResult uses;
    uses.bases = {{sub_hypothesis_id(sub_text), "f4"}};
    table["using hypothesis"] = uses;
  }
  MockEngineBackend engine(table);

  // Ids chosen so the grounding question runs FIRST: its inference is
  // available, and the using question gets a fact-only basis.
  {
    std::vector<Question> questions = {
        make_question("qa", "grounds?", "grounding hypothesis"),
        make_question("qb", "uses?", "using hypothesis")};
    auto result = collect_bases(questions, pool, engine);
    CHECK(result.basis_sets[1].bases.size() == 1);
  }
  // Ids flipped so the using question runs first: nothing is stored yet, the
  // unfolded basis stays incomplete and is dropped by default.
  {
    std::vector<Question> questions = {
        make_question("qb", "grounds?", "grounding hypothesis"),
        make_question("qa", "uses?", "using hypothesis")};
    auto result = collect_bases(questions, pool, engine);
    // result order is ascending id: qa (uses) first.
    CHECK(result.basis_sets[0].question_id == "qa");
    CHECK(result.basis_sets[0].bases.empty());
    CHECK(result.unproven_question_ids ==
          std::vector<std::string>{"qa"});
  }
}

TEST_CASE("incomplete bases can be kept on request") {
  auto pool = small_pool();
  const std::string ghost = sub_hypothesis_id("never grounded claim");
  // Inject the pseudo-fact into the pool so the engine contract holds while
  // the store still has no grounding for it.
  auto augmented = pool;
  Fact pseudo;
  pseudo.id = ghost;
  pseudo.text = "never grounded claim";
  augmented.push_back(pseudo);

  std::map<std::string, ProveResult> table;
  ProveResult r;
  r.bases = {{ghost, "f1"}};
  table["hypothesis x"] = r;
  MockEngineBackend engine(table);
  std::vector<Question> questions = {
      make_question("q1", "x?", "hypothesis x")};

  CollectOptions keep;
  keep.include_incomplete = true;
  auto kept = collect_bases(questions, augmented, engine, keep);
  REQUIRE(kept.basis_sets[0].bases.size() == 1);

  auto dropped = collect_bases(questions, augmented, engine);
  CHECK(dropped.basis_sets[0].bases.empty());
}

TEST_CASE("engine transport failures mark the question unproven") {
  auto pool = small_pool();
  FnEngine engine([](const std::string& hypothesis, const Question&,
                     const std::vector<Fact>&) -> ProveResult {
    if (hypothesis == "failing hypothesis") {
      throw TransportError("engine unreachable");
    }
    ProveResult r;
    r.bases = {{"f1"}};
    return r;
  });
  std::vector<Question> questions = {
      make_question("q1", "fails?", "failing hypothesis"),
      make_question("q2", "works?", "working hypothesis")};
  auto result = collect_bases(questions, pool, engine);
  REQUIRE(result.basis_sets.size() == 2);
  CHECK(result.basis_sets[0].bases.empty());
  CHECK(result.basis_sets[1].bases.size() == 1);
  CHECK(result.unproven_question_ids == std::vector<std::string>{"q1"});
}

TEST_CASE("collect_bases is deterministic with a fixed order and mock") {
  auto pool = small_pool();
  MockEngineBackend engine({}, /*lexical_fallback=*/true, 3);
  std::vector<Question> questions;
  for (int i = 0; i < 5; ++i) {
    questions.push_back(make_question(
        "q" + std::to_string(i), "what shapes valleys?",
        "rivers and sediment shape valleys over time"));
  }
  auto a = collect_bases(questions, pool, engine);
  auto b = collect_bases(questions, pool, engine);
  REQUIRE(a.basis_sets.size() == b.basis_sets.size());
  for (std::size_t i = 0; i < a.basis_sets.size(); ++i) {
    CHECK(a.basis_sets[i].bases == b.basis_sets[i].bases);
    CHECK(a.basis_sets[i].truncated == b.basis_sets[i].truncated);
  }
}

TEST_CASE("per-question cap truncates and flags the basis set") {
  std::vector<Fact> pool = {make_fact("f1", "base fact")};
  InferenceStore seed_store;
  std::vector<std::vector<std::string>> g1, g2;
  for (int i = 0; i < 40; ++i) {
    g1.push_back({"a" + std::to_string(i)});
    g2.push_back({"b" + std::to_string(i)});
  }
  // Groundings must resolve inside the pool for the engine contract; build
  // the pool to contain them all.
  for (int i = 0; i < 40; ++i) {
    pool.push_back(make_fact("a" + std::to_string(i), "ga" + std::to_string(i)));
    pool.push_back(make_fact("b" + std::to_string(i), "gb" + std::to_string(i)));
  }

  std::map<std::string, ProveResult> table;
  {
    ProveResult grounds;
    grounds.bases = {{"f1"}};
    GroundedSubHypothesis ga{"alpha claim", g1};
    GroundedSubHypothesis gb{"beta claim", g2};
    grounds.sub_hypotheses = {ga, gb};
    table["grounding hypothesis"] = grounds;

    ProveResult uses;
    uses.bases = {
        {sub_hypothesis_id("alpha claim"), sub_hypothesis_id("beta claim"),
         "f1"}};
    table["using hypothesis"] = uses;
  }
  MockEngineBackend engine(table);
  std::vector<Question> questions = {
      make_question("q1", "grounds?", "grounding hypothesis"),
      make_question("q2", "uses?", "using hypothesis")};
  auto result = collect_bases(questions, pool, engine);
  REQUIRE(result.basis_sets.size() == 2);
  CHECK(result.basis_sets[1].truncated);
  CHECK(result.basis_sets[1].bases.size() == 1000);
}
