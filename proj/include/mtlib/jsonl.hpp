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

#ifndef MTLIB_JSONL_HPP
#define MTLIB_JSONL_HPP

#include <string>
#include <utility>
#include <vector>

#include "mtlib/model.hpp"

namespace mt {

// Every pipeline artifact is JSONL: one canonical JSON object per line
// (keys sorted, LF terminated), so saves are byte-stable and diffable.
//
// A pool file `p.jsonl` carries its manifest in a sidecar
// `p.jsonl.manifest.json`; loading without a sidecar synthesizes a raw-stage
// manifest from the contents.

std::string manifest_path_for(const std::string& pool_path);

std::pair<std::vector<Fact>, PoolManifest> load_pool(const std::string& path);
void save_pool(const std::vector<Fact>& facts, const PoolManifest& manifest,
               const std::string& path);

std::vector<Question> load_questions(const std::string& path);
void save_questions(const std::vector<Question>& questions,
                    const std::string& path);

std::vector<BasisSet> load_basis_sets(const std::string& path);
void save_basis_sets(const std::vector<BasisSet>& sets,
                     const std::string& path);

std::vector<Microtheory> load_microtheories(const std::string& path);
void save_microtheories(const std::vector<Microtheory>& mts,
                        const std::string& path);

// One unresolved cross-reference, e.g. a basis naming a fact id that is not
// in the companion pool.
struct DanglingReference {
  std::string kind;    // "basis_fact", "fact_question", "question_correct"
  std::string holder;  // id of the record holding the reference
  std::string target;  // the id that failed to resolve
};

// Returns every dangling reference; empty means fully consistent.
std::vector<DanglingReference> validate_references(
    const std::vector<Fact>& pool, const std::vector<Question>& questions,
    const std::vector<BasisSet>& bases);

// FNV-128 over raw file bytes; used by run manifests to fingerprint
// artifacts.
std::string hash_file(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace mt

#endif  // MTLIB_JSONL_HPP
