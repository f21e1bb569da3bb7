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

#include "mtlib/condensation.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "mtlib/errors.hpp"
#include "mtlib/text.hpp"

namespace mt {

namespace {

// Pairwise-cosine neighbor lists above a floor. Exact all-pairs at desk
// scale; beyond `blocking_threshold` facts only the `block_neighbors`
// strongest neighbors per row are kept (approximate, but the exact variant
// would not fit in memory anyway).
std::vector<std::vector<std::pair<int, double>>> cosine_neighbors(
    const Eigen::MatrixXd& embeddings, double floor,
    std::size_t blocking_threshold, std::size_t block_neighbors) {
  const Eigen::Index n = embeddings.rows();
  std::vector<std::vector<std::pair<int, double>>> neighbors(
      static_cast<std::size_t>(n));
  const bool blocked = static_cast<std::size_t>(n) > blocking_threshold;
  constexpr Eigen::Index kRowBlock = 1024;
  for (Eigen::Index start = 0; start < n; start += kRowBlock) {
    const Eigen::Index rows = std::min(kRowBlock, n - start);
    Eigen::MatrixXd sims =
        embeddings.middleRows(start, rows) * embeddings.transpose();
    for (Eigen::Index r = 0; r < rows; ++r) {
      const Eigen::Index i = start + r;
      auto& list = neighbors[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        double cos = sims(r, j);
        if (cos > floor) list.emplace_back(static_cast<int>(j), cos);
      }
      if (blocked && list.size() > block_neighbors) {
        std::partial_sort(list.begin(),
                          list.begin() + static_cast<long>(block_neighbors),
                          list.end(), [](const auto& a, const auto& b) {
                            if (a.second != b.second)
                              return a.second > b.second;
                            return a.first < b.first;
                          });
        list.resize(block_neighbors);
        std::sort(list.begin(), list.end());
      }
    }
  }
  return neighbors;
}

void merge_sources(std::vector<std::string>& into,
                   const std::vector<std::string>& from) {
  for (const auto& id : from) {
    if (std::find(into.begin(), into.end(), id) == into.end()) {
      into.push_back(id);
    }
  }
}

struct DedupPass {
  std::vector<Fact> kept;
  std::vector<DedupRemoval> removals;
  std::vector<int> kept_source_index;  // original index of each kept fact
};

DedupPass run_dedup(const std::vector<Fact>& pool,
                    const Eigen::MatrixXd& embeddings, double t,
                    const CondenseOptions& options) {
  const std::size_t n = pool.size();
  auto neighbors = cosine_neighbors(embeddings, t, options.blocking_threshold,
                                    options.block_neighbors);

  // Removal rule evaluated against the ORIGINAL pool: fact i goes iff any
  // later fact exceeds t, whether or not that fact is itself removed.
  std::vector<int> trigger(n, -1);
  std::vector<double> trigger_cos(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, cos] : neighbors[i]) {
      if (static_cast<std::size_t>(j) > i) {
        trigger[i] = j;
        trigger_cos[i] = cos;
        break;  // neighbors are ascending, first later trigger
      }
    }
  }

  // Triggers always point forward, so chains terminate at a kept fact.
  auto survivor = [&](std::size_t i) {
    std::size_t cur = i;
    while (trigger[cur] >= 0) cur = static_cast<std::size_t>(trigger[cur]);
    return cur;
  };

  DedupPass pass;
  std::vector<Fact> working = pool;
  for (std::size_t i = 0; i < n; ++i) {
    if (trigger[i] < 0) continue;
    std::size_t keep = survivor(i);
    merge_sources(working[keep].source_question_ids,
                  working[i].source_question_ids);
    pass.removals.push_back(
        {pool[i].id, pool[keep].id, trigger_cos[i]});
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (trigger[i] >= 0) continue;
    std::sort(working[i].source_question_ids.begin(),
              working[i].source_question_ids.end());
    pass.kept.push_back(std::move(working[i]));
    pass.kept_source_index.push_back(static_cast<int>(i));
  }
  return pass;
}

struct EntailmentPass {
  std::vector<Fact> kept;
  std::vector<EntailmentRemoval> removals;
};

EntailmentPass run_entailment(const std::vector<Fact>& pool,
                              const Eigen::MatrixXd& embeddings, double u,
                              double decision_threshold,
                              EntailmentScorer& scorer,
                              const CondenseOptions& options) {
  const std::size_t n = pool.size();
  auto neighbors = cosine_neighbors(embeddings, u, options.blocking_threshold,
                                    options.block_neighbors);

  std::vector<bool> removed(n, false);
  std::vector<Fact> working = pool;
  EntailmentPass pass;
  for (std::size_t i = 0; i < n; ++i) {
    if (removed[i]) continue;  // removed facts never act as entailers
    for (const auto& [j, cos] : neighbors[i]) {
      (void)cos;
      const auto jj = static_cast<std::size_t>(j);
      if (removed[jj]) continue;
      double score = scorer.score(working[i].text, working[jj].text);
      if (score >= decision_threshold) {
        removed[jj] = true;
        merge_sources(working[i].source_question_ids,
                      working[jj].source_question_ids);
        pass.removals.push_back({pool[jj].id, pool[i].id, score});
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (removed[i]) continue;
    std::sort(working[i].source_question_ids.begin(),
              working[i].source_question_ids.end());
    pass.kept.push_back(std::move(working[i]));
  }
  return pass;
}

Eigen::MatrixXd embed_pool(const std::vector<Fact>& pool,
                           EmbeddingBackend& embedding) {
  std::vector<std::string> texts;
  texts.reserve(pool.size());
  for (const auto& f : pool) texts.push_back(f.text);
  return embedding.embed_batch(texts);
}

std::string pool_digest(const std::vector<Fact>& facts) {
  std::string digest;
  for (const auto& f : facts) digest += f.id;
  return content_id(digest);
}

}  // namespace

std::pair<std::vector<Fact>, CondensationReport> soft_dedup(
    const std::vector<Fact>& pool, double t, EmbeddingBackend& embedding) {
  if (t <= 0.0 || t > 1.0) {
    throw ValidationError("soft_dedup: t must be in (0, 1]");
  }
  CondensationReport report;
  report.t = t;
  if (pool.empty()) return {{}, report};
  auto pass = run_dedup(pool, embed_pool(pool, embedding), t, {});
  report.removed_by_dedup = std::move(pass.removals);
  return {std::move(pass.kept), std::move(report)};
}

std::pair<std::vector<Fact>, CondensationReport> entailment_condense(
    const std::vector<Fact>& pool, double u, double decision_threshold,
    EmbeddingBackend& embedding, EntailmentScorer& scorer) {
  if (u <= 0.0 || u >= 1.0) {
    throw ValidationError("entailment_condense: u must be in (0, 1)");
  }
  CondensationReport report;
  report.u = u;
  if (pool.empty()) return {{}, report};
  auto pass = run_entailment(pool, embed_pool(pool, embedding), u,
                             decision_threshold, scorer, {});
  report.removed_by_entailment = std::move(pass.removals);
  return {std::move(pass.kept), std::move(report)};
}

CondenseResult condense(const std::vector<Fact>& pool,
                        const PoolManifest& manifest,
                        const CondenseOptions& options,
                        EmbeddingBackend& embedding,
                        EntailmentScorer& scorer) {
  if (options.u >= options.t) {
    throw ValidationError("condense: u (" + std::to_string(options.u) +
                          ") must be below t (" + std::to_string(options.t) +
                          ")");
  }
  if (options.t <= 0.0 || options.t > 1.0 || options.u <= 0.0) {
    throw ValidationError("condense: thresholds out of range");
  }
  if (manifest.stage != PoolStage::kRaw) {
    throw ValidationError(
        "condense: input pool must be stage raw (got " +
        to_string(manifest.stage) +
        "); stages only move raw->deduped->condensed");
  }
  if (manifest.fact_count != pool.size()) {
    throw IntegrityError("condense: manifest count mismatch");
  }

  CondenseResult result;
  result.report.t = options.t;
  result.report.u = options.u;

  if (pool.empty()) {
    result.manifest = manifest;
    result.manifest.stage = PoolStage::kCondensed;
    result.manifest.parent_pool_id = manifest.pool_id;
    return result;
  }

  // Embeddings are computed once for the raw pool; the entailment pass
  // reuses the surviving rows (same text, same vector).
  Eigen::MatrixXd embeddings = embed_pool(pool, embedding);
  auto dedup = run_dedup(pool, embeddings, options.t, options);
  result.report.removed_by_dedup = std::move(dedup.removals);

  Eigen::MatrixXd kept_rows(static_cast<Eigen::Index>(dedup.kept.size()),
                            embeddings.cols());
  for (std::size_t i = 0; i < dedup.kept_source_index.size(); ++i) {
    kept_rows.row(static_cast<Eigen::Index>(i)) =
        embeddings.row(dedup.kept_source_index[i]);
  }
  auto entailment =
      run_entailment(dedup.kept, kept_rows, options.u,
                     options.decision_threshold, scorer, options);
  result.report.removed_by_entailment = std::move(entailment.removals);
  result.facts = std::move(entailment.kept);

  PoolManifest deduped;
  deduped.pool_id = pool_digest(dedup.kept);
  deduped.stage = PoolStage::kDeduped;
  deduped.parent_pool_id = manifest.pool_id;
  deduped.parameters = manifest.parameters;
  deduped.parameters["t"] = options.t;
  deduped.fact_count = dedup.kept.size();

  result.manifest.pool_id = pool_digest(result.facts);
  result.manifest.stage = PoolStage::kCondensed;
  result.manifest.parent_pool_id = deduped.pool_id;
  result.manifest.parameters = deduped.parameters;
  result.manifest.parameters["u"] = options.u;
  result.manifest.parameters["decision_threshold"] =
      options.decision_threshold;
  result.manifest.fact_count = result.facts.size();
  return result;
}

void save_condensation_report(const CondensationReport& report,
                              const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw TransportError("cannot write " + path);
  nlohmann::json params;
  params["kind"] = "parameters";
  params["t"] = report.t;
  params["u"] = report.u;
  out << params.dump() << '\n';
  for (const auto& entry : report.removed_by_dedup) {
    nlohmann::json j;
    j["kind"] = "dedup";
    j["removed"] = entry.removed_id;
    j["kept"] = entry.kept_id;
    j["cosine"] = entry.cosine;
    out << j.dump() << '\n';
  }
  for (const auto& entry : report.removed_by_entailment) {
    nlohmann::json j;
    j["kind"] = "entailment";
    j["removed"] = entry.removed_id;
    j["entailer"] = entry.entailer_id;
    j["score"] = entry.score;
    out << j.dump() << '\n';
  }
}

}  // namespace mt
