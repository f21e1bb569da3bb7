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

#include "mtlib/jsonl.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "mtlib/errors.hpp"
#include "mtlib/text.hpp"

namespace mt {

using nlohmann::json;

namespace {

// Parses one JSONL line, wrapping syntax errors with the 1-based line number.
json parse_line(const std::string& line, std::size_t line_no,
                const std::string& path) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError(path + ":" + std::to_string(line_no) +
                         ": malformed JSON record: " + e.what(),
                     line_no);
  }
}

template <typename RecordFn>
void for_each_line(const std::string& path, RecordFn fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TransportError("cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fn(parse_line(line, line_no, path), line_no);
  }
}

void dump_lines(const std::vector<json>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw TransportError("cannot write " + path);
  for (const auto& record : records) {
    out << record.dump() << '\n';
  }
  if (!out) throw TransportError("write failed for " + path);
}

template <typename T>
T require(const json& record, const char* key, std::size_t line_no,
          const std::string& path) {
  auto it = record.find(key);
  if (it == record.end()) {
    throw ParseError(path + ":" + std::to_string(line_no) +
                         ": missing field \"" + key + "\"",
                     line_no);
  }
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ParseError(path + ":" + std::to_string(line_no) + ": field \"" +
                         key + "\": " + e.what(),
                     line_no);
  }
}

json manifest_to_json(const PoolManifest& manifest) {
  json j;
  j["pool_id"] = manifest.pool_id;
  j["stage"] = to_string(manifest.stage);
  j["parent_pool_id"] =
      manifest.parent_pool_id ? json(*manifest.parent_pool_id) : json(nullptr);
  j["parameters"] = manifest.parameters;
  j["fact_count"] = manifest.fact_count;
  return j;
}

PoolManifest manifest_from_json(const json& j, const std::string& path) {
  PoolManifest m;
  m.pool_id = require<std::string>(j, "pool_id", 1, path);
  m.stage = pool_stage_from_string(require<std::string>(j, "stage", 1, path));
  if (j.contains("parent_pool_id") && !j["parent_pool_id"].is_null()) {
    m.parent_pool_id = j["parent_pool_id"].get<std::string>();
  }
  if (j.contains("parameters")) {
    m.parameters = j["parameters"].get<std::map<std::string, double>>();
  }
  m.fact_count = require<std::size_t>(j, "fact_count", 1, path);
  return m;
}

}  // namespace

std::string manifest_path_for(const std::string& pool_path) {
  return pool_path + ".manifest.json";
}

std::pair<std::vector<Fact>, PoolManifest> load_pool(const std::string& path) {
  std::vector<Fact> facts;
  std::unordered_set<std::string> seen_ids;
  for_each_line(path, [&](const json& record, std::size_t line_no) {
    Fact fact;
    fact.id = require<std::string>(record, "id", line_no, path);
    fact.text = require<std::string>(record, "text", line_no, path);
    fact.source_question_ids = require<std::vector<std::string>>(
        record, "source_question_ids", line_no, path);
    fact.generic = require<bool>(record, "generic", line_no, path);
    if (fact.text.empty()) {
      throw IntegrityError(path + ":" + std::to_string(line_no) +
                           ": fact with empty text");
    }
    if (!seen_ids.insert(fact.id).second) {
      throw IntegrityError(path + ":" + std::to_string(line_no) +
                           ": duplicate fact id \"" + fact.id + "\" on line " +
                           std::to_string(line_no));
    }
    facts.push_back(std::move(fact));
  });

  PoolManifest manifest;
  std::ifstream side(manifest_path_for(path), std::ios::binary);
  if (side) {
    json j;
    try {
      side >> j;
    } catch (const json::exception& e) {
      throw ParseError(manifest_path_for(path) + ": " + e.what());
    }
    manifest = manifest_from_json(j, manifest_path_for(path));
    if (manifest.fact_count != facts.size()) {
      throw IntegrityError(path + ": manifest fact_count " +
                           std::to_string(manifest.fact_count) +
                           " does not match " + std::to_string(facts.size()) +
                           " records");
    }
  } else {
    std::string digest;
    for (const auto& f : facts) digest += f.id;
    manifest.pool_id = content_id(digest);
    manifest.stage = PoolStage::kRaw;
    manifest.fact_count = facts.size();
  }
  return {std::move(facts), std::move(manifest)};
}

void save_pool(const std::vector<Fact>& facts, const PoolManifest& manifest,
               const std::string& path) {
  if (manifest.fact_count != facts.size()) {
    throw ValidationError("save_pool: manifest fact_count " +
                          std::to_string(manifest.fact_count) +
                          " does not match " + std::to_string(facts.size()) +
                          " facts");
  }
  std::vector<json> records;
  records.reserve(facts.size());
  for (const auto& fact : facts) {
    json j;
    j["id"] = fact.id;
    j["text"] = fact.text;
    j["source_question_ids"] = fact.source_question_ids;
    j["generic"] = fact.generic;
    records.push_back(std::move(j));
  }
  dump_lines(records, path);
  std::ofstream side(manifest_path_for(path), std::ios::binary);
  if (!side) throw TransportError("cannot write " + manifest_path_for(path));
  side << manifest_to_json(manifest).dump(2) << '\n';
}

std::vector<Question> load_questions(const std::string& path) {
  std::vector<Question> questions;
  std::unordered_set<std::string> seen_ids;
  for_each_line(path, [&](const json& record, std::size_t line_no) {
    Question q;
    q.id = require<std::string>(record, "id", line_no, path);
    q.context_text = record.value("context", std::string());
    q.question_text = require<std::string>(record, "question", line_no, path);
    for (const auto& opt :
         require<json>(record, "options", line_no, path)) {
      QuestionOption option;
      option.label = require<std::string>(opt, "label", line_no, path);
      option.text = require<std::string>(opt, "text", line_no, path);
      q.options.push_back(std::move(option));
    }
    q.correct_label = require<std::string>(record, "correct", line_no, path);
    if (q.options.size() < 2) {
      throw IntegrityError(path + ":" + std::to_string(line_no) +
                           ": question needs at least 2 options");
    }
    if (q.correct_option() == nullptr) {
      throw IntegrityError(path + ":" + std::to_string(line_no) +
                           ": correct label \"" + q.correct_label +
                           "\" not among options");
    }
    if (!seen_ids.insert(q.id).second) {
      throw IntegrityError(path + ":" + std::to_string(line_no) +
                           ": duplicate question id \"" + q.id + "\"");
    }
    questions.push_back(std::move(q));
  });
  return questions;
}

void save_questions(const std::vector<Question>& questions,
                    const std::string& path) {
  std::vector<json> records;
  records.reserve(questions.size());
  for (const auto& q : questions) {
    json j;
    j["id"] = q.id;
    j["context"] = q.context_text;
    j["question"] = q.question_text;
    json opts = json::array();
    for (const auto& opt : q.options) {
      opts.push_back({{"label", opt.label}, {"text", opt.text}});
    }
    j["options"] = std::move(opts);
    j["correct"] = q.correct_label;
    records.push_back(std::move(j));
  }
  dump_lines(records, path);
}

std::vector<BasisSet> load_basis_sets(const std::string& path) {
  std::vector<BasisSet> sets;
  for_each_line(path, [&](const json& record, std::size_t line_no) {
    BasisSet set;
    set.question_id =
        require<std::string>(record, "question_id", line_no, path);
    set.hypothesis_text =
        require<std::string>(record, "hypothesis", line_no, path);
    set.bases = require<std::vector<std::vector<std::string>>>(record, "bases",
                                                               line_no, path);
    set.truncated = require<bool>(record, "truncated", line_no, path);
    for (const auto& basis : set.bases) {
      if (basis.empty()) {
        throw IntegrityError(path + ":" + std::to_string(line_no) +
                             ": empty basis for question " + set.question_id);
      }
    }
    sets.push_back(std::move(set));
  });
  return sets;
}

void save_basis_sets(const std::vector<BasisSet>& sets,
                     const std::string& path) {
  std::vector<json> records;
  records.reserve(sets.size());
  for (const auto& set : sets) {
    json j;
    j["question_id"] = set.question_id;
    j["hypothesis"] = set.hypothesis_text;
    j["bases"] = set.bases;
    j["truncated"] = set.truncated;
    records.push_back(std::move(j));
  }
  dump_lines(records, path);
}

std::vector<Microtheory> load_microtheories(const std::string& path) {
  std::vector<Microtheory> mts;
  for_each_line(path, [&](const json& record, std::size_t line_no) {
    Microtheory mt;
    mt.method =
        method_from_string(require<std::string>(record, "method", line_no, path));
    if (record.contains("n") && !record["n"].is_null()) {
      mt.budget = record["n"].get<int>();
    }
    mt.fact_ids = require<std::vector<std::string>>(record, "fact_ids",
                                                    line_no, path);
    mt.objective_value =
        require<double>(record, "objective_value", line_no, path);
    mt.solver_status = solver_status_from_string(
        require<std::string>(record, "solver_status", line_no, path));
    if (mt.budget && static_cast<int>(mt.fact_ids.size()) > *mt.budget) {
      throw IntegrityError(path + ":" + std::to_string(line_no) +
                           ": microtheory exceeds its budget");
    }
    mts.push_back(std::move(mt));
  });
  return mts;
}

void save_microtheories(const std::vector<Microtheory>& mts,
                        const std::string& path) {
  std::vector<json> records;
  records.reserve(mts.size());
  for (const auto& mt : mts) {
    json j;
    j["method"] = to_string(mt.method);
    j["n"] = mt.budget ? json(*mt.budget) : json(nullptr);
    j["fact_ids"] = mt.fact_ids;
    j["objective_value"] = mt.objective_value;
    j["solver_status"] = to_string(mt.solver_status);
    records.push_back(std::move(j));
  }
  dump_lines(records, path);
}

std::vector<DanglingReference> validate_references(
    const std::vector<Fact>& pool, const std::vector<Question>& questions,
    const std::vector<BasisSet>& bases) {
  std::unordered_set<std::string> fact_ids;
  for (const auto& f : pool) fact_ids.insert(f.id);
  std::unordered_set<std::string> question_ids;
  for (const auto& q : questions) question_ids.insert(q.id);

  std::vector<DanglingReference> dangling;
  for (const auto& f : pool) {
    for (const auto& qid : f.source_question_ids) {
      if (!question_ids.count(qid)) {
        dangling.push_back({"fact_question", f.id, qid});
      }
    }
  }
  for (const auto& set : bases) {
    if (!question_ids.count(set.question_id)) {
      dangling.push_back({"basis_question", set.question_id, set.question_id});
    }
    std::set<std::string> reported;
    for (const auto& basis : set.bases) {
      for (const auto& fid : basis) {
        if (!fact_ids.count(fid) && reported.insert(fid).second) {
          dangling.push_back({"basis_fact", set.question_id, fid});
        }
      }
    }
  }
  return dangling;
}

std::string hash_file(const std::string& path) {
  return digest128(read_file(path));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TransportError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw TransportError("cannot write " + path);
  out << contents;
  if (!out) throw TransportError("write failed for " + path);
}

}  // namespace mt
