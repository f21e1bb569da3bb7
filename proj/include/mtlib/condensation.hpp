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

#ifndef MTLIB_CONDENSATION_HPP
#define MTLIB_CONDENSATION_HPP

#include <string>
#include <vector>

#include "mtlib/model.hpp"
#include "mtlib/providers.hpp"

namespace mt {

struct DedupRemoval {
  std::string removed_id;
  // The retained fact that absorbed the removed fact's sources. When
  // removals chain (A's trigger was itself removed), this is the chain's
  // final survivor; `cosine` is always from the direct triggering pair.
  std::string kept_id;
  double cosine = 0.0;
};

struct EntailmentRemoval {
  std::string removed_id;
  std::string entailer_id;
  double score = 0.0;
};

struct CondensationReport {
  std::vector<DedupRemoval> removed_by_dedup;
  std::vector<EntailmentRemoval> removed_by_entailment;
  double t = 0.0;
  double u = 0.0;
};

struct CondenseOptions {
  double t = 0.9;  // dedup cosine threshold
  double u = 0.3;  // entailment candidate cosine threshold, u < t
  double decision_threshold = 0.5;
  // Beyond this pool size, candidate generation keeps only the top
  // `block_neighbors` neighbors per fact instead of exact all-pairs.
  std::size_t blocking_threshold = 50000;
  std::size_t block_neighbors = 200;
};

// Single linear pass: fact i is removed iff some LATER fact j (in original
// pool order) has cos(e_i, e_j) > t, so the last member of a duplicate
// cluster survives. Sources of removed facts merge into their surviving
// absorber; output order is input order.
std::pair<std::vector<Fact>, CondensationReport> soft_dedup(
    const std::vector<Fact>& pool, double t, EmbeddingBackend& embedding);

// Single pass in pool order over candidate pairs (cosine > u): when the
// scorer says fact_i entails fact_j, the entailed fact_j is removed and its
// sources merge into the surviving entailer. A removed fact never acts as an
// entailer afterwards, which keeps the pass order-deterministic.
std::pair<std::vector<Fact>, CondensationReport> entailment_condense(
    const std::vector<Fact>& pool, double u, double decision_threshold,
    EmbeddingBackend& embedding, EntailmentScorer& scorer);

struct CondenseResult {
  std::vector<Fact> facts;
  PoolManifest manifest;
  CondensationReport report;  // merged: dedup + entailment entries
};

// soft_dedup followed by entailment_condense; embeddings are computed once.
// The input manifest must be stage raw (stage transitions are
// raw -> deduped -> condensed only).
CondenseResult condense(const std::vector<Fact>& pool,
                        const PoolManifest& manifest,
                        const CondenseOptions& options,
                        EmbeddingBackend& embedding, EntailmentScorer& scorer);

void save_condensation_report(const CondensationReport& report,
                              const std::string& path);

}  // namespace mt

#endif  // MTLIB_CONDENSATION_HPP
