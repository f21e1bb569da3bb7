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

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_set>

// providers.hpp pulls in Eigen, which must come before httplib: httplib
// includes <resolv.h>, whose `_res` macro breaks Eigen's internals.
#include "mtlib/providers.hpp"

#include <httplib.h>
#include <json.hpp>

#include "mtlib/errors.hpp"
#include "mtlib/text.hpp"

namespace mt {

using nlohmann::json;

namespace {

// Replaces {{key}} placeholders. String values are JSON-escaped (the
// template puts them inside quotes); values in `raw` are spliced verbatim so
// templates can inject arrays/objects.
std::string fill_body_template(const std::string& tmpl,
                               const std::map<std::string, std::string>& text,
                               const std::map<std::string, std::string>& raw) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    std::size_t open = tmpl.find("{{", pos);
    if (open == std::string::npos) {
      out.append(tmpl, pos, std::string::npos);
      break;
    }
    std::size_t close = tmpl.find("}}", open);
    if (close == std::string::npos) {
      out.append(tmpl, pos, std::string::npos);
      break;
    }
    out.append(tmpl, pos, open - pos);
    std::string key = tmpl.substr(open + 2, close - open - 2);
    if (auto it = raw.find(key); it != raw.end()) {
      out.append(it->second);
    } else if (auto it2 = text.find(key); it2 != text.end()) {
      std::string quoted = json(it2->second).dump();
      out.append(quoted, 1, quoted.size() - 2);  // strip the outer quotes
    } else {
      out.append(tmpl, open, close - open + 2);
    }
    pos = close + 2;
  }
  return out;
}

json navigate(const json& body, const std::string& path) {
  const json* node = &body;
  std::istringstream in(path);
  std::string part;
  while (std::getline(in, part, '/')) {
    if (part.empty()) continue;
    if (node->is_array()) {
      std::size_t idx = std::stoul(part);
      if (idx >= node->size()) {
        throw ParseError("response path \"" + path + "\": index " + part +
                         " out of range");
      }
      node = &(*node)[idx];
    } else if (node->is_object()) {
      auto it = node->find(part);
      if (it == node->end()) {
        throw ParseError("response path \"" + path + "\": missing key \"" +
                         part + "\"");
      }
      node = &*it;
    } else {
      throw ParseError("response path \"" + path +
                       "\": hit a scalar before the path ended");
    }
  }
  return *node;
}

// One limiter per endpoint URL so concurrent callers share the budget.
void rate_limit(const EndpointConfig& config) {
  if (config.requests_per_second <= 0) return;
  static std::mutex mutex;
  static std::map<std::string, std::chrono::steady_clock::time_point> last;
  const auto interval = std::chrono::duration_cast<
      std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(1.0 / config.requests_per_second));
  std::chrono::steady_clock::time_point wait_until;
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = last[config.base_url + config.path];
    auto now = std::chrono::steady_clock::now();
    wait_until = std::max(now, slot + interval);
    slot = wait_until;
  }
  std::this_thread::sleep_until(wait_until);
}

json parse_response(const std::string& body) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw ParseError(std::string("backend returned malformed JSON: ") +
                     e.what());
  }
}

}  // namespace

std::string http_post_with_retry(const EndpointConfig& config,
                                 const std::string& body) {
  std::string last_failure = "no attempts made";
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(
          static_cast<long long>(config.backoff_ms) << (attempt - 1)));
    }
    rate_limit(config);
    httplib::Client client(config.base_url);
    client.set_connection_timeout(config.timeout_s);
    client.set_read_timeout(config.timeout_s);
    httplib::Headers headers;
    if (!config.auth_env.empty()) {
      if (const char* token = std::getenv(config.auth_env.c_str())) {
        headers.emplace("Authorization", std::string("Bearer ") + token);
      }
    }
    auto res = client.Post(config.path, headers, body, "application/json");
    if (!res) {
      last_failure = "transport failure (" +
                     httplib::to_string(res.error()) + ")";
      continue;
    }
    if (res->status >= 200 && res->status < 300) return res->body;
    if (res->status >= 400 && res->status < 500) {
      // Client errors are never retried.
      throw RequestError("HTTP " + std::to_string(res->status) + " from " +
                             config.base_url + config.path + ": " + res->body,
                         res->status);
    }
    last_failure = "HTTP " + std::to_string(res->status);
  }
  throw TransportError("exhausted " + std::to_string(config.max_retries + 1) +
                       " attempts against " + config.base_url + config.path +
                       "; last failure: " + last_failure);
}

std::string extract_response_field(const std::string& body,
                                   const std::string& response_path) {
  json node = navigate(parse_response(body), response_path);
  if (node.is_string()) return node.get<std::string>();
  return node.dump();
}

HttpChatBackend::HttpChatBackend(EndpointConfig config)
    : config_(std::move(config)) {
  if (config_.body_template.empty()) {
    config_.body_template =
        R"({"model":"{{model}}","messages":[{"role":"user","content":"{{prompt}}"}],)"
        R"("temperature":{{temperature}},"max_tokens":{{max_tokens}}})";
  }
  if (config_.response_path.empty()) {
    config_.response_path = "choices/0/message/content";
  }
}

std::string HttpChatBackend::do_chat(const std::string& prompt,
                                     const ChatParams& params) {
  calls_.fetch_add(1);
  if (prompt.empty()) throw ValidationError("chat: empty prompt");
  std::ostringstream temp;
  temp << params.temperature;
  std::string body = fill_body_template(
      config_.body_template,
      {{"prompt", prompt}, {"model", config_.model}},
      {{"temperature", temp.str()},
       {"max_tokens", std::to_string(params.max_tokens)}});
  return extract_response_field(http_post_with_retry(config_, body),
                                config_.response_path);
}

HttpEmbeddingBackend::HttpEmbeddingBackend(EndpointConfig config,
                                           int dimension, int max_in_flight)
    : config_(std::move(config)),
      dimension_(dimension),
      max_in_flight_(max_in_flight) {
  if (config_.body_template.empty()) {
    config_.body_template = R"({"model":"{{model}}","input":"{{text}}"})";
  }
  if (config_.response_path.empty()) {
    config_.response_path = "data/0/embedding";
  }
}

Eigen::MatrixXd HttpEmbeddingBackend::embed_batch(
    const std::vector<std::string>& texts) {
  calls_.fetch_add(1);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(texts.size()), dimension_);
  parallel_for_ordered(texts.size(), max_in_flight_, [&](std::size_t i) {
    if (texts[i].empty()) {
      throw ValidationError("embed_batch: empty text at index " +
                            std::to_string(i));
    }
    std::string body = fill_body_template(
        config_.body_template, {{"text", texts[i]}, {"model", config_.model}},
        {});
    json vec = navigate(parse_response(http_post_with_retry(config_, body)),
                        config_.response_path);
    if (!vec.is_array() ||
        vec.size() != static_cast<std::size_t>(dimension_)) {
      throw ParseError("embedding reply for index " + std::to_string(i) +
                       " is not a " + std::to_string(dimension_) +
                       "-dim array");
    }
    for (int d = 0; d < dimension_; ++d) {
      out(static_cast<Eigen::Index>(i), d) = vec[static_cast<std::size_t>(d)]
          .get<double>();
    }
    double norm = out.row(static_cast<Eigen::Index>(i)).norm();
    if (norm > 0) out.row(static_cast<Eigen::Index>(i)) /= norm;
  });
  return out;
}

HttpEntailmentScorer::HttpEntailmentScorer(EndpointConfig config,
                                           double decision_threshold)
    : EntailmentScorer(decision_threshold), config_(std::move(config)) {
  if (config_.body_template.empty()) {
    config_.body_template =
        R"({"premise":"{{premise}}","hypothesis":"{{hypothesis}}"})";
  }
  if (config_.response_path.empty()) config_.response_path = "score";
}

double HttpEntailmentScorer::score(const std::string& premise,
                                   const std::string& hypothesis) {
  calls_.fetch_add(1);
  std::string body = fill_body_template(
      config_.body_template,
      {{"premise", premise}, {"hypothesis", hypothesis}}, {});
  json node = navigate(parse_response(http_post_with_retry(config_, body)),
                       config_.response_path);
  double value = node.get<double>();
  if (value < 0.0 || value > 1.0) {
    throw ParseError("entailment score " + std::to_string(value) +
                     " outside [0,1]");
  }
  return value;
}

HttpEngineBackend::HttpEngineBackend(EndpointConfig config)
    : config_(std::move(config)) {
  if (config_.body_template.empty()) {
    config_.body_template =
        R"({"hypothesis":"{{hypothesis}}","question":"{{question}}",)"
        R"("context":"{{context}}","pool":{{pool}}})";
  }
}

ProveResult HttpEngineBackend::prove(const std::string& hypothesis,
                                     const Question& question,
                                     const std::vector<Fact>& pool) {
  calls_.fetch_add(1);
  if (pool.empty()) throw ValidationError("prove: empty pool");
  json pool_json = json::array();
  for (const auto& f : pool) {
    pool_json.push_back({{"id", f.id}, {"text", f.text}});
  }
  std::string body = fill_body_template(
      config_.body_template,
      {{"hypothesis", hypothesis},
       {"question", question.question_text},
       {"context", question.context_text}},
      {{"pool", pool_json.dump()}});
  json reply = parse_response(http_post_with_retry(config_, body));

  ProveResult result;
  if (reply.contains("bases")) {
    result.bases =
        reply["bases"].get<std::vector<std::vector<std::string>>>();
  }
  if (reply.contains("sub_hypotheses")) {
    for (const auto& sub : reply["sub_hypotheses"]) {
      GroundedSubHypothesis g;
      g.text = sub.at("text").get<std::string>();
      g.bases = sub.at("bases").get<std::vector<std::vector<std::string>>>();
      result.sub_hypotheses.push_back(std::move(g));
    }
  }
  std::unordered_set<std::string> ids;
  for (const auto& f : pool) ids.insert(f.id);
  for (const auto& basis : result.bases) {
    for (const auto& id : basis) {
      if (!ids.count(id) && !is_sub_hypothesis_id(id)) {
        throw IntegrityError("engine returned basis with fact id \"" + id +
                             "\" absent from the provided pool");
      }
    }
  }
  return result;
}

}  // namespace mt
