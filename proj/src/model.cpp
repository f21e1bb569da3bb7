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

#include "mtlib/model.hpp"

#include "mtlib/errors.hpp"

namespace mt {

std::string to_string(Method method) {
  switch (method) {
    case Method::kUsage:
      return "usage";
    case Method::kQc:
      return "qc";
    case Method::kPc:
      return "pc";
    case Method::kMinFact:
      return "minfact";
    case Method::kRandom:
      return "random";
  }
  return "usage";
}

Method method_from_string(const std::string& name) {
  if (name == "usage") return Method::kUsage;
  if (name == "qc") return Method::kQc;
  if (name == "pc") return Method::kPc;
  if (name == "minfact") return Method::kMinFact;
  if (name == "random") return Method::kRandom;
  throw ValidationError("unknown method: " + name);
}

std::string to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::kOptimal:
      return "optimal";
    case SolverStatus::kFeasible:
      return "feasible";
    case SolverStatus::kGreedy:
      return "greedy";
  }
  return "optimal";
}

SolverStatus solver_status_from_string(const std::string& name) {
  if (name == "optimal") return SolverStatus::kOptimal;
  if (name == "feasible") return SolverStatus::kFeasible;
  if (name == "greedy") return SolverStatus::kGreedy;
  throw ValidationError("unknown solver status: " + name);
}

std::string to_string(PoolStage stage) {
  switch (stage) {
    case PoolStage::kRaw:
      return "raw";
    case PoolStage::kDeduped:
      return "deduped";
    case PoolStage::kCondensed:
      return "condensed";
  }
  return "raw";
}

PoolStage pool_stage_from_string(const std::string& name) {
  if (name == "raw") return PoolStage::kRaw;
  if (name == "deduped") return PoolStage::kDeduped;
  if (name == "condensed") return PoolStage::kCondensed;
  throw ValidationError("unknown pool stage: " + name);
}

}  // namespace mt
