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

#ifndef MTLIB_PIPELINE_HPP
#define MTLIB_PIPELINE_HPP

#include <map>
#include <string>
#include <vector>

#include "mtlib/config.hpp"

namespace mt {

struct StageRecord {
  std::string name;
  std::string status;  // "ok", "failed", "skipped"
  std::map<std::string, std::string> inputs;   // path -> content hash
  std::map<std::string, std::string> outputs;  // path -> content hash
  std::map<std::string, std::string> params;
  std::string error;
};

// The manifest deliberately carries no wall-clock data: a rerun with the
// same config and seed must reproduce it byte for byte in offline mode.
struct RunManifest {
  std::string config_digest;
  std::uint64_t seed = 0;
  bool offline = false;
  std::vector<StageRecord> stages;
  bool ok = true;
};

// extract -> condense -> collect -> distill -> evaluate, with per-stage
// artifact hashing. A stage failure records the failure point and skips
// everything downstream. When `resume` is set, stages whose outputs already
// exist with matching hashes in the previous manifest are skipped.
RunManifest run_pipeline(const RunConfig& config, bool resume = false);

void save_run_manifest(const RunManifest& manifest, const std::string& path);
RunManifest load_run_manifest(const std::string& path);

}  // namespace mt

#endif  // MTLIB_PIPELINE_HPP
