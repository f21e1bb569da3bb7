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

#ifndef MTLIB_CONFIG_HPP
#define MTLIB_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mtlib/model.hpp"
#include "mtlib/providers.hpp"

namespace mt {

// Sectioned key=value configuration file ("[section]" headers, # or ;
// comments). Runs are archivable by keeping this one file; command-line
// flags override individual values.
using IniData = std::map<std::string, std::map<std::string, std::string>>;

IniData parse_ini(const std::string& path);

struct RunConfig {
  // [run]
  std::uint64_t seed = 42;
  bool offline = false;
  std::string out_dir = "run";

  // [paths]
  std::string questions_path;
  std::string exemplars_path;
  std::string corpus_docs_path;  // optional retrieval corpus
  std::string prompt_dir;

  // [thresholds]
  double t = 0.9;
  double u = 0.3;
  double entailment_decision = 0.5;
  double cluster_threshold = 0.6;

  // [extraction]
  int k_exemplars = 3;
  int max_in_flight = 8;

  // [collect]
  std::size_t cap = 1000;

  // [distill]
  std::vector<Method> methods = {Method::kUsage, Method::kQc, Method::kPc,
                                 Method::kMinFact, Method::kRandom};
  std::vector<int> budgets = {4, 8};
  std::uint64_t node_budget = 2'000'000;

  // [relevance]
  std::size_t relevance_k = 270;
  bool evaluate_relevance = true;

  // [embedding]
  int embedding_dim = 64;

  // Remote endpoints, used when offline is false.
  EndpointConfig chat_endpoint;
  EndpointConfig embedding_endpoint;
  EndpointConfig entailment_endpoint;
  EndpointConfig engine_endpoint;

  static RunConfig from_file(const std::string& path);
  static RunConfig from_ini(const IniData& ini);

  // Throws ValidationError on the first violated constraint (u < t,
  // positive budgets, threshold ranges, required paths).
  void validate() const;
};

// Builds the backend suite the config describes: offline gives seeded mocks,
// otherwise HTTP clients against the configured endpoints.
ProviderSuite make_suite(const RunConfig& config, const PromptSet& prompts);

}  // namespace mt

#endif  // MTLIB_CONFIG_HPP
