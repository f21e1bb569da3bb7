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

#include "mtlib/config.hpp"

#include <fstream>
#include <sstream>

#include "mtlib/errors.hpp"
#include "mtlib/text.hpp"

namespace mt {

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  std::size_t end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

bool to_bool(const std::string& value, const std::string& where) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ValidationError("config " + where + ": expected a boolean, got \"" +
                        value + "\"");
}

double to_double(const std::string& value, const std::string& where) {
  try {
    std::size_t used = 0;
    double d = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing junk");
    return d;
  } catch (const std::exception&) {
    throw ValidationError("config " + where + ": expected a number, got \"" +
                          value + "\"");
  }
}

std::int64_t to_int(const std::string& value, const std::string& where) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ValidationError("config " + where + ": expected an integer, got \"" +
                          value + "\"");
  }
}

std::vector<std::string> split_csv(const std::string& value) {
  std::vector<std::string> parts;
  std::istringstream in(value);
  std::string part;
  while (std::getline(in, part, ',')) {
    part = trim(part);
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

class Section {
 public:
  Section(const IniData& ini, std::string name) : name_(std::move(name)) {
    auto it = ini.find(name_);
    if (it != ini.end()) entries_ = &it->second;
  }
  bool has(const std::string& key) const {
    return entries_ != nullptr && entries_->count(key) > 0;
  }
  std::string str(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    return entries_->at(key);
  }
  double num(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return to_double(entries_->at(key), name_ + "." + key);
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) const {
    if (!has(key)) return fallback;
    return to_int(entries_->at(key), name_ + "." + key);
  }
  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    return to_bool(entries_->at(key), name_ + "." + key);
  }

 private:
  std::string name_;
  const std::map<std::string, std::string>* entries_ = nullptr;
};

EndpointConfig endpoint_from(const Section& section) {
  EndpointConfig ep;
  ep.base_url = section.str("base_url", "");
  ep.path = section.str("path", "");
  ep.model = section.str("model", "");
  ep.auth_env = section.str("auth_env", "");
  ep.timeout_s = static_cast<int>(section.integer("timeout_s", ep.timeout_s));
  ep.max_retries =
      static_cast<int>(section.integer("max_retries", ep.max_retries));
  ep.backoff_ms =
      static_cast<int>(section.integer("backoff_ms", ep.backoff_ms));
  ep.requests_per_second =
      section.num("requests_per_second", ep.requests_per_second);
  ep.body_template = section.str("body_template", "");
  ep.response_path = section.str("response_path", "");
  return ep;
}

}  // namespace

IniData parse_ini(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TransportError("cannot open config " + path);
  IniData data;
  std::string section = "run";
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ValidationError(path + ":" + std::to_string(line_no) +
                              ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": expected key = value");
    }
    data[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return data;
}

RunConfig RunConfig::from_file(const std::string& path) {
  return from_ini(parse_ini(path));
}

RunConfig RunConfig::from_ini(const IniData& ini) {
  RunConfig config;

  Section run(ini, "run");
  config.seed = static_cast<std::uint64_t>(
      run.integer("seed", static_cast<std::int64_t>(config.seed)));
  config.offline = run.boolean("offline", config.offline);
  config.out_dir = run.str("out_dir", config.out_dir);

  Section paths(ini, "paths");
  config.questions_path = paths.str("questions", "");
  config.exemplars_path = paths.str("exemplars", "");
  config.corpus_docs_path = paths.str("corpus_docs", "");
  config.prompt_dir = paths.str("prompt_dir", "");

  Section thresholds(ini, "thresholds");
  config.t = thresholds.num("t", config.t);
  config.u = thresholds.num("u", config.u);
  config.entailment_decision =
      thresholds.num("entailment_decision", config.entailment_decision);
  config.cluster_threshold =
      thresholds.num("cluster_threshold", config.cluster_threshold);

  Section extraction(ini, "extraction");
  config.k_exemplars =
      static_cast<int>(extraction.integer("k_exemplars", config.k_exemplars));
  config.max_in_flight = static_cast<int>(
      extraction.integer("max_in_flight", config.max_in_flight));

  Section collect(ini, "collect");
  config.cap = static_cast<std::size_t>(
      collect.integer("cap", static_cast<std::int64_t>(config.cap)));

  Section distill(ini, "distill");
  if (distill.has("methods")) {
    config.methods.clear();
    for (const auto& name : split_csv(distill.str("methods", ""))) {
      config.methods.push_back(method_from_string(name));
    }
  }
  if (distill.has("budgets")) {
    config.budgets.clear();
    for (const auto& n : split_csv(distill.str("budgets", ""))) {
      config.budgets.push_back(
          static_cast<int>(to_int(n, "distill.budgets")));
    }
  }
  config.node_budget = static_cast<std::uint64_t>(distill.integer(
      "node_budget", static_cast<std::int64_t>(config.node_budget)));

  Section relevance(ini, "relevance");
  config.relevance_k = static_cast<std::size_t>(relevance.integer(
      "k", static_cast<std::int64_t>(config.relevance_k)));
  config.evaluate_relevance =
      relevance.boolean("evaluate", config.evaluate_relevance);

  Section embedding(ini, "embedding");
  config.embedding_dim = static_cast<int>(
      embedding.integer("dimension", config.embedding_dim));

  config.chat_endpoint = endpoint_from(Section(ini, "chat"));
  config.embedding_endpoint = endpoint_from(Section(ini, "embedding"));
  config.entailment_endpoint = endpoint_from(Section(ini, "entailment"));
  config.engine_endpoint = endpoint_from(Section(ini, "engine"));
  return config;
}

void RunConfig::validate() const {
  if (u >= t) {
    throw ValidationError("config: u (" + std::to_string(u) +
                          ") must be strictly below t (" + std::to_string(t) +
                          ")");
  }
  if (t <= 0.0 || t > 1.0 || u <= 0.0) {
    throw ValidationError("config: thresholds t, u must satisfy 0 < u < t <= 1");
  }
  if (entailment_decision < 0.0 || entailment_decision > 1.0) {
    throw ValidationError("config: entailment_decision must be in [0,1]");
  }
  if (cluster_threshold < 0.0 || cluster_threshold > 1.0) {
    throw ValidationError("config: cluster_threshold must be in [0,1]");
  }
  for (int n : budgets) {
    if (n <= 0) {
      throw ValidationError("config: budgets must be positive (got " +
                            std::to_string(n) + ")");
    }
  }
  if (budgets.empty()) {
    throw ValidationError("config: at least one budget is required");
  }
  if (methods.empty()) {
    throw ValidationError("config: at least one method is required");
  }
  if (k_exemplars <= 0) {
    throw ValidationError("config: k_exemplars must be positive");
  }
  if (cap < 1) throw ValidationError("config: collect cap must be >= 1");
  if (max_in_flight < 1) {
    throw ValidationError("config: max_in_flight must be >= 1");
  }
  if (embedding_dim < 2) {
    throw ValidationError("config: embedding dimension must be >= 2");
  }
  if (!offline) {
    if (chat_endpoint.base_url.empty() ||
        embedding_endpoint.base_url.empty()) {
      throw ValidationError(
          "config: chat and embedding base_url are required unless offline");
    }
  }
}

ProviderSuite make_suite(const RunConfig& config, const PromptSet& prompts) {
  if (config.offline) {
    ProviderSuite suite = make_offline_suite(
        config.seed, config.embedding_dim, config.entailment_decision,
        prompts);
    suite.max_in_flight = config.max_in_flight;
    return suite;
  }
  ProviderSuite suite;
  auto chat = std::make_shared<HttpChatBackend>(config.chat_endpoint);
  suite.chat = chat;
  suite.embedding = std::make_shared<HttpEmbeddingBackend>(
      config.embedding_endpoint, config.embedding_dim, config.max_in_flight);
  if (!config.entailment_endpoint.base_url.empty()) {
    suite.entailment = std::make_shared<HttpEntailmentScorer>(
        config.entailment_endpoint, config.entailment_decision);
  } else {
    suite.entailment =
        std::make_shared<MockEntailmentScorer>(config.entailment_decision);
  }
  if (!config.engine_endpoint.base_url.empty()) {
    suite.engine = std::make_shared<HttpEngineBackend>(config.engine_endpoint);
  } else {
    suite.engine = std::make_shared<MockEngineBackend>(
        std::map<std::string, ProveResult>{}, /*lexical_fallback=*/true,
        config.seed);
  }
  suite.rater = std::make_shared<ChatFactRater>(chat, prompts);
  suite.max_in_flight = config.max_in_flight;
  return suite;
}

}  // namespace mt
