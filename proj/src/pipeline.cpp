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

#include "mtlib/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>

#include <json.hpp>

#include "mtlib/basis.hpp"
#include "mtlib/condensation.hpp"
#include "mtlib/distill.hpp"
#include "mtlib/errors.hpp"
#include "mtlib/extraction.hpp"
#include "mtlib/jsonl.hpp"
#include "mtlib/metrics.hpp"
#include "mtlib/svg.hpp"
#include "mtlib/text.hpp"

namespace mt {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::string mt_file_name(Method method, int budget) {
  if (method == Method::kMinFact) return "mt_minfact.jsonl";
  return "mt_" + to_string(method) + "_" + std::to_string(budget) + ".jsonl";
}

// A stage is reusable when every output it previously produced still exists
// with the same content hash.
bool stage_reusable(const RunManifest& previous, const std::string& name) {
  for (const auto& stage : previous.stages) {
    if (stage.name != name) continue;
    if (stage.status != "ok") return false;
    for (const auto& [path, hash] : stage.outputs) {
      if (!fs::exists(path) || hash_file(path) != hash) return false;
    }
    return !stage.outputs.empty();
  }
  return false;
}

}  // namespace

RunManifest run_pipeline(const RunConfig& config, bool resume) {
  config.validate();
  if (config.questions_path.empty() || config.exemplars_path.empty()) {
    throw ValidationError(
        "pipeline needs paths.questions and paths.exemplars");
  }
  fs::create_directories(config.out_dir);

  RunManifest manifest;
  manifest.seed = config.seed;
  manifest.offline = config.offline;
  {
    json cfg;
    cfg["seed"] = config.seed;
    cfg["offline"] = config.offline;
    cfg["t"] = config.t;
    cfg["u"] = config.u;
    cfg["entailment_decision"] = config.entailment_decision;
    cfg["k_exemplars"] = config.k_exemplars;
    cfg["cap"] = config.cap;
    cfg["budgets"] = config.budgets;
    json methods = json::array();
    for (auto m : config.methods) methods.push_back(to_string(m));
    cfg["methods"] = methods;
    manifest.config_digest = digest128(cfg.dump());
  }

  RunManifest previous;
  const std::string manifest_path = join(config.out_dir, "run_manifest.json");
  if (resume && fs::exists(manifest_path)) {
    previous = load_run_manifest(manifest_path);
    if (previous.config_digest != manifest.config_digest) {
      previous = RunManifest{};  // config changed, nothing is reusable
    }
  }

  PromptSet prompts = PromptSet::load(config.prompt_dir);
  ProviderSuite suite = make_suite(config, prompts);

  const std::string pool_raw_path = join(config.out_dir, "pool_raw.jsonl");
  const std::string pool_c_path = join(config.out_dir, "pool_c.jsonl");
  const std::string report_path = join(config.out_dir, "report.jsonl");
  const std::string bases_path = join(config.out_dir, "bases.jsonl");

  bool failed = false;
  auto run_stage = [&](const std::string& name,
                       const std::map<std::string, std::string>& params,
                       const std::vector<std::string>& inputs,
                       const std::vector<std::string>& outputs,
                       const std::function<void()>& body) {
    StageRecord record;
    record.name = name;
    record.params = params;
    if (failed) {
      record.status = "skipped";
      manifest.stages.push_back(std::move(record));
      return;
    }
    for (const auto& path : inputs) record.inputs[path] = hash_file(path);
    if (resume && stage_reusable(previous, name)) {
      record.status = "ok";
      for (const auto& path : outputs) record.outputs[path] = hash_file(path);
      manifest.stages.push_back(std::move(record));
      std::cerr << "pipeline: reusing " << name << "\n";
      return;
    }
    try {
      body();
      record.status = "ok";
      for (const auto& path : outputs) record.outputs[path] = hash_file(path);
    } catch (const Error& e) {
      record.status = "failed";
      record.error = e.what();
      failed = true;
      manifest.ok = false;
      std::cerr << "pipeline: stage " << name << " failed: " << e.what()
                << "\n";
    }
    manifest.stages.push_back(std::move(record));
  };

  // --- extract ---
  run_stage(
      "extract",
      {{"k_exemplars", std::to_string(config.k_exemplars)},
       {"seed", std::to_string(config.seed)}},
      {config.questions_path, config.exemplars_path}, {pool_raw_path}, [&] {
        auto questions = load_questions(config.questions_path);
        ExemplarStore store(load_exemplars(config.exemplars_path));
        ExtractionOptions options;
        options.k_exemplars = config.k_exemplars;
        options.max_in_flight = config.max_in_flight;
        auto built = build_pool(questions, store, *suite.chat, prompts, options);
        save_pool(built.facts, built.manifest, pool_raw_path);
      });

  // --- condense ---
  run_stage("condense",
            {{"t", std::to_string(config.t)}, {"u", std::to_string(config.u)}},
            {pool_raw_path}, {pool_c_path, report_path}, [&] {
              auto [pool, pool_manifest] = load_pool(pool_raw_path);
              CondenseOptions options;
              options.t = config.t;
              options.u = config.u;
              options.decision_threshold = config.entailment_decision;
              auto result = condense(pool, pool_manifest, options,
                                     *suite.embedding, *suite.entailment);
              save_pool(result.facts, result.manifest, pool_c_path);
              save_condensation_report(result.report, report_path);
            });

  // --- collect ---
  run_stage("collect", {{"cap", std::to_string(config.cap)}},
            {config.questions_path, pool_c_path}, {bases_path}, [&] {
              auto questions = load_questions(config.questions_path);
              auto [pool, pool_manifest] = load_pool(pool_c_path);
              (void)pool_manifest;
              CollectOptions options;
              options.cap = config.cap;
              auto result = collect_bases(questions, pool, *suite.engine,
                                          options);
              save_basis_sets(result.basis_sets, bases_path);
            });

  // --- distill ---
  std::vector<std::string> mt_paths;
  {
    std::vector<std::string> outputs;
    for (Method method : config.methods) {
      if (method == Method::kMinFact) {
        outputs.push_back(join(config.out_dir, mt_file_name(method, 0)));
        continue;
      }
      for (int n : config.budgets) {
        outputs.push_back(join(config.out_dir, mt_file_name(method, n)));
      }
    }
    outputs.push_back(join(config.out_dir, "distill_stats.json"));
    std::map<std::string, std::string> params;
    params["node_budget"] = std::to_string(config.node_budget);
    run_stage("distill", params, {pool_raw_path, pool_c_path, bases_path},
              outputs, [&] {
      auto [pool_raw, raw_manifest] = load_pool(pool_raw_path);
      auto [pool_c, c_manifest] = load_pool(pool_c_path);
      (void)raw_manifest;
      (void)c_manifest;
      auto bases = load_basis_sets(bases_path);
      auto problem = SelectionProblem::build(pool_c, bases);
      DistillOptions options;
      options.node_budget = config.node_budget;

      json stats = json::object();
      auto emit = [&](const DistillOutcome& outcome, const std::string& file) {
        save_microtheories({outcome.microtheory}, join(config.out_dir, file));
        json s;
        s["objective_value"] = outcome.microtheory.objective_value;
        s["solver_status"] = to_string(outcome.microtheory.solver_status);
        s["nodes_explored"] = outcome.stats.nodes_explored;
        s["coverage_part"] = outcome.stats.coverage_part;
        s["bases_covered"] = outcome.stats.bases_covered;
        s["fact_count"] = outcome.stats.fact_count;
        stats[file] = std::move(s);
        mt_paths.push_back(join(config.out_dir, file));
      };

      for (Method method : config.methods) {
        if (method == Method::kMinFact) {
          emit(min_fact(problem, options), mt_file_name(method, 0));
          continue;
        }
        for (int requested : config.budgets) {
          const std::size_t universe = method == Method::kRandom
                                           ? pool_raw.size()
                                           : problem.fact_ids.size();
          int n = requested;
          if (static_cast<std::size_t>(n) > universe) {
            std::cerr << "pipeline: clamping budget " << requested << " to "
                      << universe << " for " << to_string(method) << "\n";
            n = static_cast<int>(universe);
          }
          DistillOutcome outcome;
          switch (method) {
            case Method::kUsage:
              outcome = mt_usage(problem, n);
              break;
            case Method::kQc:
              outcome = mt_qc(problem, n, options);
              break;
            case Method::kPc:
              outcome = mt_pc(problem, n, options);
              break;
            case Method::kRandom:
              outcome = mt_random(pool_raw, n, config.seed);
              break;
            case Method::kMinFact:
              break;
          }
          // Files keep the requested budget in their name even when clamped.
          emit(outcome, mt_file_name(method, requested));
        }
      }
      write_file(join(config.out_dir, "distill_stats.json"),
                 stats.dump(2) + "\n");
    });
  }

  // --- evaluate ---
  run_stage(
      "evaluate",
      {{"relevance_k", std::to_string(config.relevance_k)}},
      {pool_raw_path, pool_c_path, bases_path},
      {join(config.out_dir, "evaluation.json"),
       join(config.out_dir, "coverage.svg")},
      [&] {
        auto [pool_raw, raw_manifest] = load_pool(pool_raw_path);
        auto [pool_c, c_manifest] = load_pool(pool_c_path);
        (void)raw_manifest;
        (void)c_manifest;
        auto bases = load_basis_sets(bases_path);
        auto questions = load_questions(config.questions_path);

        // Random microtheories sample from the raw pool, so resolve
        // against raw + condensed.
        std::vector<Fact> combined = pool_raw;
        {
          std::set<std::string> seen;
          for (const auto& f : combined) seen.insert(f.id);
          for (const auto& f : pool_c) {
            if (!seen.count(f.id)) combined.push_back(f);
          }
        }

        json evaluation = json::object();
        std::map<std::string, std::map<int, double>> coverage_by_method;
        for (Method method : config.methods) {
          std::vector<int> budget_list =
              method == Method::kMinFact ? std::vector<int>{0} : config.budgets;
          for (int n : budget_list) {
            const std::string file = mt_file_name(method, n);
            const std::string path = join(config.out_dir, file);
            if (!fs::exists(path)) continue;
            auto mts = load_microtheories(path);
            if (mts.empty()) continue;
            const Microtheory& mt = mts.front();

            auto report = coverage(mt, bases);
            auto usage = usage_stats(mt, bases);
            json entry;
            entry["method"] = to_string(mt.method);
            entry["n"] = mt.budget ? json(*mt.budget) : json(nullptr);
            entry["fact_count"] = mt.fact_ids.size();
            entry["full_coverage_rate"] = report.full_coverage_rate;
            entry["total_fractional_coverage"] =
                report.total_fractional.to_double();
            entry["provable_questions"] = report.provable_questions;
            entry["unproven_questions"] = report.unproven_questions;
            entry["fraction_used"] = usage.fraction_used;
            entry["avg_questions_per_fact"] = usage.avg_questions_per_fact;

            if (config.evaluate_relevance) {
              auto mt_facts = resolve_microtheory(mt, combined);
              std::size_t relevant = 0;
              for (const auto& q : questions) {
                auto outcome = per_question_relevance(
                    mt_facts, q, *suite.rater, config.relevance_k,
                    suite.max_in_flight);
                if (outcome.relevant) ++relevant;
              }
              entry["relevance_rate"] =
                  questions.empty()
                      ? 0.0
                      : static_cast<double>(relevant) /
                            static_cast<double>(questions.size());
            }
            if (report.provable_questions > 0) {
              coverage_by_method[to_string(method)][n] =
                  report.total_fractional.to_double() /
                  static_cast<double>(report.provable_questions);
            }
            evaluation[file] = std::move(entry);
          }
        }
        write_file(join(config.out_dir, "evaluation.json"),
                   evaluation.dump(2) + "\n");

        // Bar chart: average fractional coverage per method and budget.
        std::vector<std::string> series;
        for (const auto& [name, values] : coverage_by_method) {
          (void)values;
          series.push_back(name);
        }
        std::vector<BarGroup> groups;
        for (int n : config.budgets) {
          BarGroup group;
          group.label = "n=" + std::to_string(n);
          for (const auto& name : series) {
            auto it = coverage_by_method[name].find(n);
            group.values.push_back(
                it == coverage_by_method[name].end() ? 0.0 : it->second);
          }
          groups.push_back(std::move(group));
        }
        write_file(join(config.out_dir, "coverage.svg"),
                   svg_bar_chart("training coverage (avg fraction)", series,
                                 groups, 1.0));
      });

  save_run_manifest(manifest, manifest_path);
  return manifest;
}

void save_run_manifest(const RunManifest& manifest, const std::string& path) {
  json j;
  j["config_digest"] = manifest.config_digest;
  j["seed"] = manifest.seed;
  j["offline"] = manifest.offline;
  j["ok"] = manifest.ok;
  json stages = json::array();
  for (const auto& stage : manifest.stages) {
    json s;
    s["name"] = stage.name;
    s["status"] = stage.status;
    s["inputs"] = stage.inputs;
    s["outputs"] = stage.outputs;
    s["params"] = stage.params;
    if (!stage.error.empty()) s["error"] = stage.error;
    stages.push_back(std::move(s));
  }
  j["stages"] = std::move(stages);
  write_file(path, j.dump(2) + "\n");
}

RunManifest load_run_manifest(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  RunManifest manifest;
  manifest.config_digest = j.value("config_digest", "");
  manifest.seed = j.value("seed", 0ULL);
  manifest.offline = j.value("offline", false);
  manifest.ok = j.value("ok", true);
  for (const auto& s : j.value("stages", json::array())) {
    StageRecord record;
    record.name = s.value("name", "");
    record.status = s.value("status", "");
    record.error = s.value("error", "");
    if (s.contains("inputs")) {
      record.inputs = s["inputs"].get<std::map<std::string, std::string>>();
    }
    if (s.contains("outputs")) {
      record.outputs = s["outputs"].get<std::map<std::string, std::string>>();
    }
    if (s.contains("params")) {
      record.params = s["params"].get<std::map<std::string, std::string>>();
    }
    manifest.stages.push_back(std::move(record));
  }
  return manifest;
}

}  // namespace mt
