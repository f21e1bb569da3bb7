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

// mt: microtheory distillation toolkit.
//
// Stage commands (extract, condense, index, search, collect, distill,
// coverage, relevance, fit-prelevance, cluster, validate) plus `pipeline`,
// which chains extract -> condense -> collect -> distill -> evaluate with a
// run manifest.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

// mtlib headers bring in Eigen, which must precede httplib-including TUs;
// this TU has no httplib but keeps the same order for consistency.
#include "mtlib/basis.hpp"
#include "mtlib/cluster.hpp"
#include "mtlib/condensation.hpp"
#include "mtlib/config.hpp"
#include "mtlib/distill.hpp"
#include "mtlib/errors.hpp"
#include "mtlib/extraction.hpp"
#include "mtlib/jsonl.hpp"
#include "mtlib/metrics.hpp"
#include "mtlib/pipeline.hpp"
#include "mtlib/retrieval.hpp"
#include "mtlib/svg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

namespace {

using nlohmann::json;

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool offline = false;
};

// Config file first, then command-line overrides.
mt::RunConfig effective_config(const CommonFlags& flags) {
  mt::RunConfig config;
  if (!flags.config_path.empty()) {
    config = mt::RunConfig::from_file(flags.config_path);
  }
  if (flags.seed_set) config.seed = flags.seed;
  if (flags.offline) config.offline = true;
  if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
  return config;
}

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "run configuration file");
  cmd->add_option("--out-dir", flags.out_dir, "output directory override");
  cmd->add_option("--seed", flags.seed, "deterministic seed")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
  cmd->add_flag("--offline", flags.offline,
                "force deterministic mock backends (no network)");
}

std::vector<mt::CurvePoint> load_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mt::TransportError("cannot open " + path);
  std::vector<mt::CurvePoint> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string xs, ys;
    if (!std::getline(ss, xs, ',') || !std::getline(ss, ys)) continue;
    try {
      points.push_back({std::stod(xs), std::stod(ys)});
    } catch (const std::exception&) {
      if (line_no == 1) continue;  // header row
      throw mt::ParseError(path + ":" + std::to_string(line_no) +
                               ": expected x,y",
                           line_no);
    }
  }
  return points;
}

int run(int argc, char** argv) {
  CLI::App app{"microtheory distillation toolkit"};
  app.require_subcommand(1);

  // ---- extract ----
  auto* extract = app.add_subcommand(
      "extract", "build the raw fact pool from training questions");
  CommonFlags extract_flags;
  add_common(extract, extract_flags);
  std::string ex_questions, ex_exemplars, ex_out = "pool_raw.jsonl";
  std::string ex_checkpoint;
  int ex_k = -1;
  extract->add_option("--questions", ex_questions)->required();
  extract->add_option("--exemplars", ex_exemplars)->required();
  extract->add_option("--out", ex_out);
  extract->add_option("--k-exemplars", ex_k, "few-shot exemplar count");
  extract->add_option("--checkpoint-dir", ex_checkpoint,
                      "per-question checkpoint directory");
  extract->callback([&] {
    auto config = effective_config(extract_flags);
    if (ex_k > 0) config.k_exemplars = ex_k;
    auto prompts = mt::PromptSet::load(config.prompt_dir);
    auto suite = mt::make_suite(config, prompts);
    auto questions = mt::load_questions(ex_questions);
    mt::ExemplarStore store(mt::load_exemplars(ex_exemplars));
    mt::ExtractionOptions options;
    options.k_exemplars = config.k_exemplars;
    options.max_in_flight = config.max_in_flight;
    options.checkpoint_dir = ex_checkpoint;
    auto built = mt::build_pool(questions, store, *suite.chat, prompts,
                                options);
    mt::save_pool(built.facts, built.manifest, ex_out);
    std::cerr << "extract: " << built.facts.size() << " facts from "
              << questions.size() << " questions ("
              << built.failed_question_ids.size() << " failed)\n";
  });

  // ---- condense ----
  auto* condense = app.add_subcommand(
      "condense", "soft-dedup and entailment-condense a fact pool");
  CommonFlags condense_flags;
  add_common(condense, condense_flags);
  std::string cd_in, cd_out = "pool_c.jsonl", cd_report;
  double cd_t = -1, cd_u = -1, cd_decision = -1;
  condense->add_option("--in", cd_in)->required();
  condense->add_option("--out", cd_out);
  condense->add_option("--t", cd_t, "dedup cosine threshold");
  condense->add_option("--u", cd_u, "entailment candidate threshold");
  condense->add_option("--decision-threshold", cd_decision);
  condense->add_option("--report", cd_report, "removal report (jsonl)");
  condense->callback([&] {
    auto config = effective_config(condense_flags);
    if (cd_t >= 0) config.t = cd_t;
    if (cd_u >= 0) config.u = cd_u;
    if (cd_decision >= 0) config.entailment_decision = cd_decision;
    auto prompts = mt::PromptSet::load(config.prompt_dir);
    auto suite = mt::make_suite(config, prompts);
    auto [pool, manifest] = mt::load_pool(cd_in);
    mt::CondenseOptions options;
    options.t = config.t;
    options.u = config.u;
    options.decision_threshold = config.entailment_decision;
    auto result = mt::condense(pool, manifest, options, *suite.embedding,
                               *suite.entailment);
    mt::save_pool(result.facts, result.manifest, cd_out);
    if (!cd_report.empty()) {
      mt::save_condensation_report(result.report, cd_report);
    }
    std::cerr << "condense: " << pool.size() << " -> " << result.facts.size()
              << " facts (dedup " << result.report.removed_by_dedup.size()
              << ", entailment "
              << result.report.removed_by_entailment.size() << ")\n";
  });

  // ---- index ----
  auto* index = app.add_subcommand("index", "chunk documents into a BM25 index");
  std::string ix_docs, ix_out = "index.bin";
  std::size_t ix_words = 100;
  index->add_option("--docs", ix_docs)->required();
  index->add_option("--out", ix_out);
  index->add_option("--chunk-words", ix_words);
  index->callback([&] {
    mt::ChunkedCorpus corpus;
    for (const auto& [id, text] : mt::load_documents(ix_docs)) {
      corpus.add_document(id, text, ix_words);
    }
    corpus.save(ix_out);
    std::cerr << "index: " << corpus.size() << " chunks\n";
  });

  // ---- search ----
  auto* search = app.add_subcommand("search", "query a BM25 index");
  std::string se_index, se_query;
  std::size_t se_k = 10;
  double se_k1 = 1.2, se_b = 0.75;
  search->add_option("--index", se_index)->required();
  search->add_option("--query", se_query)->required();
  search->add_option("--k", se_k);
  search->add_option("--k1", se_k1);
  search->add_option("--b", se_b);
  search->callback([&] {
    auto corpus = mt::ChunkedCorpus::load(se_index);
    for (const auto& hit : mt::bm25_search(se_query, corpus, se_k, se_k1,
                                           se_b)) {
      json j;
      j["chunk_id"] = hit.chunk_id;
      j["score"] = hit.score;
      j["text"] = corpus.chunks()[hit.chunk_index].text;
      std::cout << j.dump() << "\n";
    }
  });

  // ---- collect ----
  auto* collect = app.add_subcommand(
      "collect", "collect argumentative bases for training hypotheses");
  CommonFlags collect_flags;
  add_common(collect, collect_flags);
  std::string co_questions, co_pool, co_out = "bases.jsonl";
  std::size_t co_cap = 1000;
  bool co_incomplete = false;
  collect->add_option("--questions", co_questions)->required();
  collect->add_option("--pool", co_pool)->required();
  collect->add_option("--out", co_out);
  collect->add_option("--cap", co_cap, "max bases per question");
  collect->add_flag("--include-incomplete", co_incomplete);
  collect->callback([&] {
    auto config = effective_config(collect_flags);
    auto prompts = mt::PromptSet::load(config.prompt_dir);
    auto suite = mt::make_suite(config, prompts);
    auto questions = mt::load_questions(co_questions);
    auto [pool, manifest] = mt::load_pool(co_pool);
    (void)manifest;
    mt::CollectOptions options;
    options.cap = co_cap;
    options.include_incomplete = co_incomplete;
    auto result = mt::collect_bases(questions, pool, *suite.engine, options);
    mt::save_basis_sets(result.basis_sets, co_out);
    std::cerr << "collect: " << result.basis_sets.size() << " questions, "
              << result.unproven_question_ids.size() << " unproven, store "
              << result.store.size() << " sub-hypotheses\n";
  });

  // ---- distill ----
  auto* distill = app.add_subcommand(
      "distill", "select a microtheory from a pool given collected bases");
  CommonFlags distill_flags;
  add_common(distill, distill_flags);
  std::string di_bases, di_pool, di_out = "mt.jsonl", di_stats, di_method;
  int di_n = -1;
  std::uint64_t di_nodes = 0;
  distill->add_option("--bases", di_bases)->required();
  distill->add_option("--pool", di_pool)->required();
  distill->add_option("--method", di_method, "usage|qc|pc|minfact|random")
      ->required();
  distill->add_option("--n", di_n, "budget (not used by minfact)");
  distill->add_option("--out", di_out);
  distill->add_option("--stats", di_stats, "solver statistics (json)");
  distill->add_option("--node-budget", di_nodes);
  distill->callback([&] {
    auto config = effective_config(distill_flags);
    mt::Method method = mt::method_from_string(di_method);
    auto [pool, manifest] = mt::load_pool(di_pool);
    (void)manifest;
    auto bases = mt::load_basis_sets(di_bases);
    mt::DistillOptions options;
    if (di_nodes > 0) options.node_budget = di_nodes;

    mt::DistillOutcome outcome;
    if (method == mt::Method::kMinFact) {
      auto problem = mt::SelectionProblem::build(pool, bases);
      outcome = mt::min_fact(problem, options);
      std::cerr << "min-fact: " << outcome.microtheory.fact_ids.size()
                << " facts cover " << problem.questions.size()
                << " provable questions (ratio "
                << (problem.questions.empty()
                        ? 0.0
                        : static_cast<double>(
                              outcome.microtheory.fact_ids.size()) /
                              static_cast<double>(problem.questions.size()))
                << ")\n";
    } else if (method == mt::Method::kRandom) {
      if (di_n < 0) throw mt::ValidationError("--n is required for random");
      outcome = mt::mt_random(pool, di_n, config.seed);
    } else {
      if (di_n < 0) {
        throw mt::ValidationError("--n is required for " + di_method);
      }
      auto problem = mt::SelectionProblem::build(pool, bases);
      switch (method) {
        case mt::Method::kUsage:
          outcome = mt::mt_usage(problem, di_n);
          break;
        case mt::Method::kQc:
          outcome = mt::mt_qc(problem, di_n, options);
          break;
        case mt::Method::kPc:
          outcome = mt::mt_pc(problem, di_n, options);
          break;
        default:
          break;
      }
    }
    mt::save_microtheories({outcome.microtheory}, di_out);
    if (!di_stats.empty()) {
      json s;
      s["objective_value"] = outcome.microtheory.objective_value;
      s["solver_status"] = to_string(outcome.microtheory.solver_status);
      s["nodes_explored"] = outcome.stats.nodes_explored;
      s["coverage_part"] = outcome.stats.coverage_part;
      s["bases_covered"] = outcome.stats.bases_covered;
      s["fact_count"] = outcome.stats.fact_count;
      mt::write_file(di_stats, s.dump(2) + "\n");
    }
    std::cerr << "distill " << di_method << ": objective "
              << outcome.microtheory.objective_value << ", "
              << outcome.microtheory.fact_ids.size() << " facts, "
              << to_string(outcome.microtheory.solver_status) << " ("
              << outcome.stats.wall_ms << " ms, "
              << outcome.stats.nodes_explored << " nodes)\n";
  });

  // ---- coverage ----
  auto* coverage_cmd = app.add_subcommand(
      "coverage", "training coverage of a microtheory against bases");
  std::string cv_mt, cv_bases, cv_out = "cov.json", cv_svg;
  bool cv_all = false;
  coverage_cmd->add_option("--mt", cv_mt)->required();
  coverage_cmd->add_option("--bases", cv_bases)->required();
  coverage_cmd->add_option("--out", cv_out);
  coverage_cmd->add_option("--svg", cv_svg, "bar chart output");
  coverage_cmd->add_flag(
      "--all-questions", cv_all,
      "divide rates by all questions, not just provable ones");
  coverage_cmd->callback([&] {
    auto mts = mt::load_microtheories(cv_mt);
    if (mts.empty()) throw mt::ValidationError(cv_mt + " holds no microtheory");
    auto bases = mt::load_basis_sets(cv_bases);
    auto report = mt::coverage(mts.front(), bases, !cv_all);
    json j;
    j["full_coverage_rate"] = report.full_coverage_rate;
    j["total_fractional_coverage"] = report.total_fractional.to_double();
    j["provable_questions"] = report.provable_questions;
    j["unproven_questions"] = report.unproven_questions;
    j["provable_only_denominator"] = report.provable_only;
    json per = json::array();
    for (const auto& qc : report.per_question) {
      json q;
      q["question_id"] = qc.question_id;
      q["has_basis"] = qc.has_basis;
      q["full_covered"] = qc.full_covered;
      q["fraction"] = qc.fraction.to_double();
      q["best_basis"] = qc.best_basis;
      per.push_back(std::move(q));
    }
    j["per_question"] = std::move(per);
    mt::write_file(cv_out, j.dump(2) + "\n");
    if (!cv_svg.empty()) {
      std::vector<mt::BarGroup> groups;
      for (const auto& qc : report.per_question) {
        if (!qc.has_basis) continue;
        groups.push_back({qc.question_id, {qc.fraction.to_double()}});
      }
      mt::write_file(cv_svg, mt::svg_bar_chart("per-question coverage",
                                               {"fraction"}, groups, 1.0));
    }
    std::cout << j["full_coverage_rate"].dump() << " full, "
              << j["total_fractional_coverage"].dump() << " total fractional\n";
  });

  // ---- relevance ----
  auto* relevance = app.add_subcommand(
      "relevance", "per-question relevance of a microtheory (LLM-as-judge)");
  CommonFlags rel_flags;
  add_common(relevance, rel_flags);
  std::string re_mt, re_pool, re_questions, re_out = "rel.jsonl";
  std::size_t re_k = 270;
  relevance->add_option("--mt", re_mt)->required();
  relevance->add_option("--pool", re_pool)->required();
  relevance->add_option("--questions", re_questions)->required();
  relevance->add_option("--k", re_k, "retrieval cap");
  relevance->add_option("--out", re_out);
  relevance->callback([&] {
    auto config = effective_config(rel_flags);
    auto prompts = mt::PromptSet::load(config.prompt_dir);
    auto suite = mt::make_suite(config, prompts);
    auto mts = mt::load_microtheories(re_mt);
    if (mts.empty()) throw mt::ValidationError(re_mt + " holds no microtheory");
    auto [pool, manifest] = mt::load_pool(re_pool);
    (void)manifest;
    auto questions = mt::load_questions(re_questions);
    auto mt_facts = mt::resolve_microtheory(mts.front(), pool);

    std::ofstream out(re_out, std::ios::trunc);
    if (!out) throw mt::TransportError("cannot write " + re_out);
    std::size_t relevant = 0;
    for (const auto& q : questions) {
      auto outcome = mt::per_question_relevance(mt_facts, q, *suite.rater,
                                                re_k, suite.max_in_flight);
      if (outcome.relevant) ++relevant;
      json j;
      j["question_id"] = q.id;
      j["relevant"] = outcome.relevant;
      j["rated"] = outcome.rated_count;
      j["max_rating"] = outcome.max_rating;
      out << j.dump() << "\n";
    }
    std::cout << "relevance rate: "
              << (questions.empty()
                      ? 0.0
                      : static_cast<double>(relevant) /
                            static_cast<double>(questions.size()))
              << " (" << relevant << "/" << questions.size() << ")\n";
  });

  // ---- fit-prelevance ----
  auto* fit = app.add_subcommand(
      "fit-prelevance", "fit the relevance learning curve and invert it");
  std::string fp_points, fp_svg;
  double fp_target = -1;
  bool fp_scale_free = false;
  fit->add_option("--points", fp_points, "csv of training_size,relevance")
      ->required();
  fit->add_option("--target", fp_target, "relevance rate to invert for");
  fit->add_option("--svg", fp_svg, "fitted curve chart");
  fit->add_flag("--scale-free", fp_scale_free, "also fit the scale s");
  fit->callback([&] {
    auto points = load_points_csv(fp_points);
    mt::HillFitOptions options;
    options.scale_free = fp_scale_free;
    auto curve = mt::fit_p_relevance(points, options);
    json j;
    j["v_max"] = curve.v_max;
    j["k"] = curve.k;
    j["hill_exponent"] = curve.hill_exponent;
    j["s"] = curve.s;
    j["v_max_times_s"] = curve.v_max * curve.s;
    j["r_squared"] = curve.r_squared;
    if (fp_target >= 0) {
      j["target"] = fp_target;
      j["required_training_size"] = mt::invert_p_relevance(curve, fp_target);
    }
    std::cout << j.dump(2) << "\n";
    if (!fp_svg.empty()) {
      mt::LineSeries data{"observed", {}};
      for (const auto& p : points) data.points.emplace_back(p.x, p.y);
      mt::LineSeries fitted{"fitted", {}};
      const double lo = points.front().x, hi = points.back().x;
      for (int i = 0; i <= 64; ++i) {
        double x = lo * std::pow(hi / lo, i / 64.0);
        fitted.points.emplace_back(x, curve.forward(x));
      }
      mt::write_file(fp_svg, mt::svg_line_chart("p-relevance learning curve",
                                                {data, fitted}, true));
    }
  });

  // ---- cluster ----
  auto* cluster = app.add_subcommand(
      "cluster", "two-step topic clustering of questions");
  CommonFlags cl_flags;
  add_common(cluster, cl_flags);
  std::string cl_questions, cl_out = "topics.jsonl";
  double cl_threshold = -1;
  cluster->add_option("--questions", cl_questions)->required();
  cluster->add_option("--threshold", cl_threshold, "community cosine floor");
  cluster->add_option("--out", cl_out);
  cluster->callback([&] {
    auto config = effective_config(cl_flags);
    if (cl_threshold >= 0) config.cluster_threshold = cl_threshold;
    auto prompts = mt::PromptSet::load(config.prompt_dir);
    auto suite = mt::make_suite(config, prompts);
    auto questions = mt::load_questions(cl_questions);
    mt::ClusterOptions options;
    options.threshold = config.cluster_threshold;
    options.max_in_flight = config.max_in_flight;
    auto assignments = mt::two_step_cluster(questions, *suite.chat,
                                            *suite.embedding, prompts,
                                            options);
    mt::save_topic_assignments(assignments, cl_out);
    std::set<int> topics, hypertopics;
    for (const auto& a : assignments) {
      if (a.topic_cluster_id >= 0) topics.insert(a.topic_cluster_id);
      if (a.hypertopic_id >= 0) hypertopics.insert(a.hypertopic_id);
    }
    std::cerr << "cluster: " << topics.size() << " topics, "
              << hypertopics.size() << " hypertopics\n";
  });

  // ---- validate ----
  auto* validate = app.add_subcommand(
      "validate", "check cross-references between pool, questions and bases");
  std::string va_pool, va_questions, va_bases;
  validate->add_option("--pool", va_pool)->required();
  validate->add_option("--questions", va_questions);
  validate->add_option("--bases", va_bases);
  validate->callback([&] {
    auto [pool, manifest] = mt::load_pool(va_pool);
    (void)manifest;
    std::vector<mt::Question> questions;
    if (!va_questions.empty()) questions = mt::load_questions(va_questions);
    std::vector<mt::BasisSet> bases;
    if (!va_bases.empty()) bases = mt::load_basis_sets(va_bases);
    auto dangling = mt::validate_references(pool, questions, bases);
    for (const auto& d : dangling) {
      json j;
      j["kind"] = d.kind;
      j["holder"] = d.holder;
      j["target"] = d.target;
      std::cout << j.dump() << "\n";
    }
    if (!dangling.empty()) {
      throw mt::IntegrityError(std::to_string(dangling.size()) +
                               " dangling references");
    }
    std::cerr << "validate: ok\n";
  });

  // ---- pipeline ----
  auto* pipeline = app.add_subcommand(
      "pipeline", "run extract -> condense -> collect -> distill -> evaluate");
  CommonFlags pl_flags;
  add_common(pipeline, pl_flags);
  bool pl_resume = false;
  pipeline->add_flag("--resume", pl_resume,
                     "reuse stages whose outputs are unchanged");
  pipeline->callback([&] {
    auto config = effective_config(pl_flags);
    auto manifest = mt::run_pipeline(config, pl_resume);
    if (!manifest.ok) {
      throw mt::TransportError("pipeline failed; see run_manifest.json");
    }
    std::cerr << "pipeline: ok, artifacts in " << config.out_dir << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? mt::kExitOk : mt::kExitValidation;
  }
  return mt::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mt::kExitFailure;
  }
}
