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

#include <fstream>

#include "mtlib/errors.hpp"
#include "mtlib/jsonl.hpp"
#include "mtlib/rational.hpp"
#include "mtlib/text.hpp"
#include "test_util.hpp"

using namespace mt;
using namespace mt_test;

namespace {

bool same_fact(const Fact& a, const Fact& b) {
  return a.id == b.id && a.text == b.text &&
         a.source_question_ids == b.source_question_ids &&
         a.generic == b.generic;
}

Fact random_fact(Rng& rng, int i) {
  Fact f;
  f.text = "fact number " + std::to_string(i) + " salt " +
           std::to_string(rng.next() % 1000);
  f.id = content_id(f.text);
  const int n_sources = rng.range(1, 3);
  for (int s = 0; s < n_sources; ++s) {
    f.source_question_ids.push_back("q" + std::to_string(rng.below(50)));
  }
  std::sort(f.source_question_ids.begin(), f.source_question_ids.end());
  f.source_question_ids.erase(
      std::unique(f.source_question_ids.begin(), f.source_question_ids.end()),
      f.source_question_ids.end());
  f.generic = rng.below(2) == 0;
  return f;
}

}  // namespace

TEST_CASE("text normalization trims and collapses whitespace") {
  CHECK(normalize_text("  a   b\t c\n") == "a b c");
  CHECK(normalize_text("") == "");
  CHECK(normalize_text(" \t\n ") == "");
  // Case is preserved.
  CHECK(normalize_text("Iron is a Metal") == "Iron is a Metal");
}

TEST_CASE("content ids are stable under whitespace variation only") {
  CHECK(content_id("a  b") == content_id("a b"));
  CHECK(content_id("a b") != content_id("A b"));
  CHECK(content_id("x") != content_id("y"));
  CHECK(content_id("x").size() == 32);
}

TEST_CASE("rational arithmetic is exact") {
  Rational a(2, 3), b(1, 2);
  CHECK((a + b) == Rational(7, 6));
  CHECK((a - b) == Rational(1, 6));
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(1, 3) < Rational(1, 2));
  Rational sum;
  sum += Rational(2, 3);
  sum += Rational::whole(1);
  sum += Rational::whole(1);
  sum += Rational(1, 2);
  CHECK(sum == Rational(19, 6));
  CHECK(sum.str() == "19/6");
}

TEST_CASE("pool load keeps file order") {
  TempDir dir("pool_order");
  const std::string path = dir.file("pool.jsonl");
  std::vector<Fact> facts = {make_fact("f1", "alpha"), make_fact("f2", "beta"),
                             make_fact("f3", "gamma")};
  PoolManifest manifest;
  manifest.pool_id = "p1";
  manifest.fact_count = 3;
  save_pool(facts, manifest, path);

  auto [loaded, loaded_manifest] = load_pool(path);
  REQUIRE(loaded.size() == 3);
  CHECK(loaded[0].id == "f1");
  CHECK(loaded[1].id == "f2");
  CHECK(loaded[2].id == "f3");
  CHECK(loaded_manifest.fact_count == 3);
  CHECK(loaded_manifest.pool_id == "p1");
}

TEST_CASE("empty pool file loads as empty pool") {
  TempDir dir("pool_empty");
  const std::string path = dir.file("pool.jsonl");
  std::ofstream(path).close();
  auto [facts, manifest] = load_pool(path);
  CHECK(facts.empty());
  CHECK(manifest.fact_count == 0);
}

TEST_CASE("duplicate fact id is an integrity error naming the line") {
  TempDir dir("pool_dup");
  const std::string path = dir.file("pool.jsonl");
  std::ofstream out(path);
  for (int i = 1; i <= 6; ++i) {
    out << R"({"generic":true,"id":"f)" << i
        << R"(","source_question_ids":[],"text":"t)" << i << R"("})" << "\n";
  }
  out << R"({"generic":true,"id":"f3","source_question_ids":[],"text":"dup"})"
      << "\n";
  out.close();
  try {
    load_pool(path);
    FAIL("expected IntegrityError");
  } catch (const IntegrityError& e) {
    CHECK(std::string(e.what()).find("line 7") != std::string::npos);
    CHECK(std::string(e.what()).find("f3") != std::string::npos);
  }
}

TEST_CASE("malformed line is a parse error with its line number") {
  TempDir dir("pool_bad");
  const std::string path = dir.file("pool.jsonl");
  std::ofstream out(path);
  out << R"({"generic":true,"id":"f1","source_question_ids":[],"text":"a"})"
      << "\n";
  out << "{not json\n";
  out.close();
  try {
    load_pool(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("manifest count mismatch is rejected on save and on load") {
  TempDir dir("pool_mismatch");
  std::vector<Fact> facts = {make_fact("f1", "alpha")};
  PoolManifest manifest;
  manifest.pool_id = "p";
  manifest.fact_count = 2;
  CHECK_THROWS_AS(save_pool(facts, manifest, dir.file("x.jsonl")),
                  ValidationError);

  // Sidecar disagreeing with the records.
  manifest.fact_count = 1;
  save_pool(facts, manifest, dir.file("y.jsonl"));
  write_file(manifest_path_for(dir.file("y.jsonl")),
             R"({"fact_count":5,"pool_id":"p","stage":"raw",)"
             R"("parent_pool_id":null,"parameters":{}})");
  CHECK_THROWS_AS(load_pool(dir.file("y.jsonl")), IntegrityError);
}

TEST_CASE("two saves of the same pool are byte-identical") {
  TempDir dir("pool_bytes");
  Rng rng(7);
  std::vector<Fact> facts;
  for (int i = 0; i < 100; ++i) facts.push_back(random_fact(rng, i));
  PoolManifest manifest;
  manifest.pool_id = "p";
  manifest.fact_count = facts.size();
  manifest.parameters["t"] = 0.9;
  save_pool(facts, manifest, dir.file("a.jsonl"));
  save_pool(facts, manifest, dir.file("b.jsonl"));
  CHECK(read_file(dir.file("a.jsonl")) == read_file(dir.file("b.jsonl")));
  CHECK(hash_file(dir.file("a.jsonl")) == hash_file(dir.file("b.jsonl")));
}

TEST_CASE("round-trip is the identity across randomized instances") {
  TempDir dir("roundtrip");
  Rng rng(11);
  // 1000 randomized records across the four persisted types.
  for (int batch = 0; batch < 5; ++batch) {
    std::vector<Fact> facts;
    for (int i = 0; i < 100; ++i) facts.push_back(random_fact(rng, i));
    PoolManifest manifest;
    manifest.pool_id = "pool" + std::to_string(batch);
    manifest.stage = batch % 2 ? PoolStage::kCondensed : PoolStage::kRaw;
    manifest.fact_count = facts.size();
    const std::string path = dir.file("facts.jsonl");
    save_pool(facts, manifest, path);
    auto [loaded, loaded_manifest] = load_pool(path);
    REQUIRE(loaded.size() == facts.size());
    for (std::size_t i = 0; i < facts.size(); ++i) {
      CHECK(same_fact(loaded[i], facts[i]));
    }
    CHECK(loaded_manifest.pool_id == manifest.pool_id);
    CHECK(to_string(loaded_manifest.stage) == to_string(manifest.stage));
  }

  std::vector<Question> questions;
  for (int i = 0; i < 100; ++i) {
    Question q;
    q.id = "q" + std::to_string(i);
    q.context_text = rng.below(2) ? "some context " + std::to_string(i) : "";
    q.question_text = "question " + std::to_string(rng.next() % 1000);
    const int n_options = rng.range(2, 4);
    for (int o = 0; o < n_options; ++o) {
      q.options.push_back({std::string(1, static_cast<char>('A' + o)),
                           "hypothesis " + std::to_string(o)});
    }
    q.correct_label = q.options[rng.below(q.options.size())].label;
    questions.push_back(std::move(q));
  }
  save_questions(questions, dir.file("q.jsonl"));
  auto loaded_q = load_questions(dir.file("q.jsonl"));
  REQUIRE(loaded_q.size() == questions.size());
  for (std::size_t i = 0; i < questions.size(); ++i) {
    CHECK(loaded_q[i].id == questions[i].id);
    CHECK(loaded_q[i].question_text == questions[i].question_text);
    CHECK(loaded_q[i].correct_label == questions[i].correct_label);
    CHECK(loaded_q[i].options.size() == questions[i].options.size());
  }

  std::vector<BasisSet> sets;
  for (int i = 0; i < 200; ++i) {
    BasisSet set;
    set.question_id = "q" + std::to_string(i);
    set.hypothesis_text = "h" + std::to_string(i);
    const int n_bases = rng.range(0, 3);
    for (int b = 0; b < n_bases; ++b) {
      std::vector<std::string> basis;
      const int size = rng.range(1, 4);
      for (int f = 0; f < size; ++f) {
        basis.push_back("f" + std::to_string(rng.below(20)));
      }
      std::sort(basis.begin(), basis.end());
      basis.erase(std::unique(basis.begin(), basis.end()), basis.end());
      set.bases.push_back(std::move(basis));
    }
    set.truncated = rng.below(2) == 0;
    sets.push_back(std::move(set));
  }
  save_basis_sets(sets, dir.file("b.jsonl"));
  auto loaded_b = load_basis_sets(dir.file("b.jsonl"));
  REQUIRE(loaded_b.size() == sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) {
    CHECK(loaded_b[i].question_id == sets[i].question_id);
    CHECK(loaded_b[i].hypothesis_text == sets[i].hypothesis_text);
    CHECK(loaded_b[i].bases == sets[i].bases);
    CHECK(loaded_b[i].truncated == sets[i].truncated);
  }

  std::vector<Microtheory> mts;
  for (int i = 0; i < 100; ++i) {
    Microtheory mt;
    mt.method = static_cast<Method>(rng.below(5));
    const int n_ids = rng.range(0, 6);
    for (int f = 0; f < n_ids; ++f) {
      mt.fact_ids.push_back("f" + std::to_string(f));
    }
    if (mt.method != Method::kMinFact) {
      mt.budget = static_cast<int>(mt.fact_ids.size()) + rng.range(0, 3);
    }
    mt.objective_value = static_cast<double>(rng.next() % 100) / 8.0;
    mt.solver_status = static_cast<SolverStatus>(rng.below(3));
    mts.push_back(std::move(mt));
  }
  save_microtheories(mts, dir.file("m.jsonl"));
  auto loaded_m = load_microtheories(dir.file("m.jsonl"));
  REQUIRE(loaded_m.size() == mts.size());
  for (std::size_t i = 0; i < mts.size(); ++i) {
    CHECK(to_string(loaded_m[i].method) == to_string(mts[i].method));
    CHECK(loaded_m[i].budget == mts[i].budget);
    CHECK(loaded_m[i].fact_ids == mts[i].fact_ids);
    CHECK(loaded_m[i].objective_value == mts[i].objective_value);
    CHECK(to_string(loaded_m[i].solver_status) ==
          to_string(mts[i].solver_status));
  }
}

TEST_CASE("question loader enforces option invariants") {
  TempDir dir("q_invalid");
  write_file(dir.file("one.jsonl"),
             R"({"context":"","correct":"A","id":"q1","options":)"
             R"([{"label":"A","text":"x"}],"question":"only one option"})"
             "\n");
  CHECK_THROWS_AS(load_questions(dir.file("one.jsonl")), IntegrityError);

  write_file(dir.file("two.jsonl"),
             R"({"context":"","correct":"Z","id":"q1","options":)"
             R"([{"label":"A","text":"x"},{"label":"B","text":"y"}],)"
             R"("question":"bad correct label"})"
             "\n");
  CHECK_THROWS_AS(load_questions(dir.file("two.jsonl")), IntegrityError);
}

TEST_CASE("validator reports every dangling reference") {
  std::vector<Fact> pool = {make_fact("f1", "alpha", {"q1", "missing_q"})};
  std::vector<Question> questions = {
      make_question("q1", "what is alpha?", "alpha is a letter")};
  std::vector<BasisSet> bases = {
      make_basis_set("q1", {{"f1", "ghost_fact"}}),
      make_basis_set("ghost_question", {{"f1"}})};

  auto dangling = validate_references(pool, questions, bases);
  REQUIRE(dangling.size() == 3);
  std::set<std::string> kinds;
  for (const auto& d : dangling) kinds.insert(d.kind);
  CHECK(kinds.count("fact_question"));
  CHECK(kinds.count("basis_fact"));
  CHECK(kinds.count("basis_question"));

  // Fully consistent data -> nothing dangling.
  bases = {make_basis_set("q1", {{"f1"}})};
  pool[0].source_question_ids = {"q1"};
  CHECK(validate_references(pool, questions, bases).empty());
}

TEST_CASE("microtheory budget violations are rejected on load") {
  TempDir dir("mt_budget");
  write_file(dir.file("m.jsonl"),
             R"({"fact_ids":["a","b","c"],"method":"qc","n":2,)"
             R"("objective_value":1.0,"solver_status":"optimal"})"
             "\n");
  CHECK_THROWS_AS(load_microtheories(dir.file("m.jsonl")), IntegrityError);
}
