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

#include "mtlib/errors.hpp"
#include "mtlib/extraction.hpp"
#include "mtlib/text.hpp"
#include "test_util.hpp"

using namespace mt;
using namespace mt_test;

namespace {

// A captured completion for a clinical multiple-choice question, in the
// exact THEORY/PROOF/ANSWER shape the extractor consumes.
const char* kMedicalSampleCompletion = R"(THEORY:
(FACT 1) Chronic epigastric pain can be a symptom of various gastrointestinal disorders.
(FACT 2) Intermittent, loose, foul-smelling stools can be a sign of malabsorption.
(FACT 3) Significant weight loss can be a sign of malnutrition or malabsorption.
(FACT 4) Long-term, heavy alcohol consumption can lead to pancreatitis and malabsorption.
(FACT 5) Travel to certain regions can expose individuals to parasites that cause gastrointestinal issues.
(FACT 6) A negative immunoglobulin A serum anti-tissue transglutaminase antibody assay rules out celiac disease.
(FACT 7) Malabsorption can lead to elevated fecal fat content.
(FACT 8) Pale and loose stools can be a sign of malabsorption.
(FACT 9) Pancreatic calcifications can be a sign of chronic pancreatitis.
(FACT 10) Villous atrophy of duodenal mucosa can be a sign of celiac disease or other gastrointestinal disorders.
(FACT 11) A positive lactulose breath test can indicate small intestinal bacterial overgrowth (SIBO).

PROOF of Further evaluation is most likely to show pancreatic calcifications.:
(STEP 1) Long-term, heavy alcohol consumption can lead to pancreatitis and malabsorption & Significant weight loss can be a sign of malnutrition or malabsorption -> int1: The patient's long-term, heavy alcohol consumption may have led to pancreatitis and malabsorption, causing significant weight loss.
(STEP 2) int1 & Intermittent, loose, foul-smelling stools can be a sign of malabsorption -> int2: The patient's intermittent, loose, foul-smelling stools are likely due to malabsorption caused by pancreatitis.
(STEP 3) int2 & Pancreatic calcifications can be a sign of chronic pancreatitis -> hypothesis: Further evaluation is most likely to show pancreatic calcifications.
)";

std::vector<Exemplar> tiny_exemplars() {
  Exemplar a;
  a.id = "e1";
  a.question_text = "why do magnets attract iron nails?";
  a.queries = {{"A", "magnets attract iron nails because iron is magnetic"}};
  a.facts = {"iron is a magnetic material", "magnets attract magnetic materials"};
  a.proof_steps = {"iron is a magnetic material & magnets attract magnetic "
                   "materials -> hypothesis: magnets attract iron nails"};
  a.answer_label = "A";
  Exemplar b = a;
  b.id = "e2";
  b.question_text = "why does rain fall from clouds toward the ground?";
  Exemplar c = a;
  c.id = "e3";
  c.question_text = "what makes a circuit light a bulb?";
  return {a, b, c};
}

}  // namespace

TEST_CASE("theory parser takes FACT lines in order and drops the proof") {
  const std::string completion =
      "THEORY:\n(FACT 1) a\n(FACT 2) b\n\nPROOF of x:\n(STEP 1) a & b -> "
      "hypothesis: x\n\nANSWER: A\n";
  auto facts = parse_theory_facts(completion);
  REQUIRE(facts.size() == 2);
  CHECK(facts[0] == "a");
  CHECK(facts[1] == "b");
}

TEST_CASE("clinical sample completion parses into 11 ordered facts") {
  auto facts = parse_theory_facts(kMedicalSampleCompletion);
  REQUIRE(facts.size() == 11);
  CHECK(facts[0].rfind("Chronic epigastric pain", 0) == 0);
  CHECK(facts[10].rfind("A positive lactulose breath test", 0) == 0);
  // No STEP or PROOF text leaks into the fact list.
  for (const auto& f : facts) {
    CHECK(f.find("STEP") == std::string::npos);
    CHECK(f.find("int1") == std::string::npos);
  }
}

TEST_CASE("completion without a THEORY header is an extraction error") {
  CHECK_THROWS_AS(parse_theory_facts("(FACT 1) orphan fact\nANSWER: A\n"),
                  ParseError);
}

TEST_CASE("extract_facts tags facts with the source question") {
  ExemplarStore store(tiny_exemplars());
  FnChat chat([](const std::string&) {
    return std::string("THEORY:\n(FACT 1) water expands when it freezes\n"
                       "(FACT 2) ice floats on liquid water\n\nANSWER: A\n");
  });
  Question q = make_question("q42", "why does ice float?",
                             "ice floats because it is less dense");
  auto facts = extract_facts(q, store, chat, PromptSet::defaults(), 2);
  REQUIRE(facts.size() == 2);
  CHECK(facts[0].text == "water expands when it freezes");
  CHECK(facts[0].id == content_id(facts[0].text));
  CHECK(facts[0].source_question_ids == std::vector<std::string>{"q42"});
}

TEST_CASE("extraction prompt carries the structural blocks") {
  ExemplarStore store(tiny_exemplars());
  Question q = make_question("q1", "why is iron magnetic?",
                             "iron is magnetic because of its electrons");
  auto shots = store.retrieve(q.question_text, 2);
  REQUIRE(shots.size() == 2);
  // BM25 favors the exemplar sharing "iron"/"magnets" vocabulary.
  CHECK(shots[0]->id == "e1");
  std::string prompt = render_extraction_prompt("INSTRUCTION HEADER", shots, q);
  CHECK(prompt.find("QUESTION: why is iron magnetic?") != std::string::npos);
  CHECK(prompt.find("(QUERY A)") != std::string::npos);
  CHECK(prompt.find("(FACT 1) iron is a magnetic material") !=
        std::string::npos);
  CHECK(prompt.find("PROOF of") != std::string::npos);
  CHECK(prompt.find("ANSWER: A") != std::string::npos);
  // The target block ends with an open THEORY: for the model to continue.
  CHECK(prompt.rfind("THEORY:\n") == prompt.size() - 8);
}

TEST_CASE("keep_if_generic keeps generics and drops context-specific lines") {
  MockChatBackend chat(1);
  std::vector<Fact> facts = {
      make_fact(content_id("metals conduct electricity"),
                "metals conduct electricity"),
      make_fact(content_id("the man is running"), "the man is running"),
      make_fact(content_id("plants use sunlight"), "plants use sunlight"),
  };
  auto kept = keep_if_generic(facts, chat, PromptSet::defaults());
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].text == "metals conduct electricity");
  CHECK(kept[1].text == "plants use sunlight");
  for (const auto& f : kept) CHECK(f.generic);

  CHECK(keep_if_generic({}, chat, PromptSet::defaults()).empty());

  // All-generic classifier acts as the identity.
  FnChat always_generic([](const std::string&) { return std::string("GENERIC"); });
  CHECK(keep_if_generic(facts, always_generic, PromptSet::defaults()).size() ==
        3);

  // Unparseable replies drop the fact (conservative).
  FnChat garbage([](const std::string&) { return std::string("???"); });
  CHECK(keep_if_generic(facts, garbage, PromptSet::defaults()).empty());
}

TEST_CASE("build_pool merges identical sentences across questions") {
  ExemplarStore store(tiny_exemplars());
  // Both questions yield one shared sentence plus one unique sentence each.
  FnChat chat([](const std::string& prompt) {
    const bool first = prompt.find("QUESTION: alpha") != std::string::npos;
    if (prompt.find("STATEMENT:") != std::string::npos) return std::string("GENERIC");
    if (first) {
      return std::string(
          "THEORY:\n(FACT 1) shared knowledge sentence\n(FACT 2) alpha only\n"
          "\nANSWER: A\n");
    }
    return std::string(
        "THEORY:\n(FACT 1) shared knowledge sentence\n(FACT 2) beta only\n"
        "\nANSWER: A\n");
  });
  std::vector<Question> questions = {
      make_question("qa", "alpha", "alpha hypothesis"),
      make_question("qb", "beta", "beta hypothesis")};
  auto built = build_pool(questions, store, chat, PromptSet::defaults());
  CHECK(built.facts.size() == 3);
  bool found_shared = false;
  for (const auto& f : built.facts) {
    if (f.text == "shared knowledge sentence") {
      found_shared = true;
      CHECK(f.source_question_ids == std::vector<std::string>{"qa", "qb"});
    } else {
      CHECK(f.source_question_ids.size() == 1);
    }
  }
  CHECK(found_shared);
  CHECK(built.manifest.fact_count == 3);
  CHECK(built.manifest.parameters.at("question_count") == 2.0);
}

TEST_CASE("disjoint outputs of sizes 3 and 4 give a pool of 7") {
  ExemplarStore store(tiny_exemplars());
  FnChat chat([](const std::string& prompt) {
    if (prompt.find("STATEMENT:") != std::string::npos) return std::string("GENERIC");
    if (prompt.find("QUESTION: alpha") != std::string::npos) {
      return std::string(
          "THEORY:\n(FACT 1) a1\n(FACT 2) a2\n(FACT 3) a3\n\nANSWER: A\n");
    }
    return std::string(
        "THEORY:\n(FACT 1) b1\n(FACT 2) b2\n(FACT 3) b3\n(FACT 4) b4\n"
        "\nANSWER: A\n");
  });
  std::vector<Question> questions = {
      make_question("qa", "alpha", "alpha hypothesis"),
      make_question("qb", "beta", "beta hypothesis")};
  auto built = build_pool(questions, store, chat, PromptSet::defaults());
  CHECK(built.facts.size() == 7);
}

TEST_CASE("build_pool is idempotent for a fixed seed") {
  ExemplarStore store(tiny_exemplars());
  std::vector<Question> questions;
  for (int i = 0; i < 6; ++i) {
    questions.push_back(make_question(
        "q" + std::to_string(i),
        "why does question " + std::to_string(i) + " involve erosion rocks?",
        "erosion wears rocks down"));
  }
  MockChatBackend chat_a(5), chat_b(5);
  auto a = build_pool(questions, store, chat_a, PromptSet::defaults());
  auto b = build_pool(questions, store, chat_b, PromptSet::defaults());
  REQUIRE(a.facts.size() == b.facts.size());
  for (std::size_t i = 0; i < a.facts.size(); ++i) {
    CHECK(a.facts[i].id == b.facts[i].id);
    CHECK(a.facts[i].source_question_ids == b.facts[i].source_question_ids);
  }
  CHECK(a.manifest.pool_id == b.manifest.pool_id);

  // Every fact's sources are a non-empty subset of the input question ids.
  std::set<std::string> ids;
  for (const auto& q : questions) ids.insert(q.id);
  for (const auto& f : a.facts) {
    CHECK(!f.source_question_ids.empty());
    for (const auto& src : f.source_question_ids) CHECK(ids.count(src) == 1);
  }
}

TEST_CASE("failed questions are skipped; all-failed is fatal") {
  ExemplarStore store(tiny_exemplars());
  FnChat flaky([](const std::string& prompt) {
    if (prompt.find("STATEMENT:") != std::string::npos) return std::string("GENERIC");
    if (prompt.find("QUESTION: alpha") != std::string::npos) {
      return std::string("no theory block at all");
    }
    return std::string("THEORY:\n(FACT 1) beta fact\n\nANSWER: A\n");
  });
  std::vector<Question> questions = {
      make_question("qa", "alpha", "alpha hypothesis"),
      make_question("qb", "beta", "beta hypothesis")};
  auto built = build_pool(questions, store, flaky, PromptSet::defaults());
  CHECK(built.facts.size() == 1);
  CHECK(built.failed_question_ids == std::vector<std::string>{"qa"});

  FnChat broken([](const std::string&) { return std::string("nope"); });
  CHECK_THROWS_AS(build_pool(questions, store, broken, PromptSet::defaults()),
                  TransportError);
}

TEST_CASE("checkpointing lets a rerun skip completed questions") {
  ExemplarStore store(tiny_exemplars());
  TempDir dir("ckpt");
  std::atomic<int> theory_calls{0};
  FnChat chat([&](const std::string& prompt) {
    if (prompt.find("STATEMENT:") != std::string::npos) return std::string("GENERIC");
    theory_calls.fetch_add(1);
    return std::string("THEORY:\n(FACT 1) checkpointed fact\n\nANSWER: A\n");
  });
  std::vector<Question> questions = {
      make_question("qa", "alpha", "alpha hypothesis")};
  ExtractionOptions options;
  options.checkpoint_dir = dir.file("checkpoints");
  auto first = build_pool(questions, store, chat, PromptSet::defaults(),
                          options);
  const int calls_after_first = theory_calls.load();
  auto second = build_pool(questions, store, chat, PromptSet::defaults(),
                           options);
  CHECK(theory_calls.load() == calls_after_first);  // no new extraction calls
  CHECK(first.facts.size() == second.facts.size());
}
