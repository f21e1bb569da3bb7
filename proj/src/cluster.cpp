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

#include "mtlib/cluster.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "mtlib/errors.hpp"
#include "mtlib/text.hpp"

namespace mt {

std::vector<std::vector<int>> community_detect(const Eigen::MatrixXd& vectors,
                                               double threshold) {
  const int n = static_cast<int>(vectors.rows());
  std::vector<std::vector<int>> communities;
  if (n == 0) return communities;

  Eigen::MatrixXd sims = vectors * vectors.transpose();
  std::vector<bool> assigned(static_cast<std::size_t>(n), false);
  int remaining = n;
  while (remaining > 0) {
    // Seed: unassigned vector with the most unassigned neighbors.
    int best_seed = -1, best_count = -1;
    for (int i = 0; i < n; ++i) {
      if (assigned[static_cast<std::size_t>(i)]) continue;
      int count = 0;
      for (int j = 0; j < n; ++j) {
        if (j == i || assigned[static_cast<std::size_t>(j)]) continue;
        if (sims(i, j) >= threshold) ++count;
      }
      if (count > best_count) {
        best_count = count;
        best_seed = i;
      }
    }
    std::vector<int> community = {best_seed};
    assigned[static_cast<std::size_t>(best_seed)] = true;
    --remaining;
    for (int j = 0; j < n; ++j) {
      if (assigned[static_cast<std::size_t>(j)]) continue;
      if (sims(best_seed, j) >= threshold) {
        community.push_back(j);
        assigned[static_cast<std::size_t>(j)] = true;
        --remaining;
      }
    }
    std::sort(community.begin(), community.end());
    communities.push_back(std::move(community));
  }
  std::sort(communities.begin(), communities.end(),
            [](const std::vector<int>& a, const std::vector<int>& b) {
              if (a.size() != b.size()) return a.size() > b.size();
              return a.front() < b.front();
            });
  return communities;
}

namespace {

// Clusters a list of texts and produces one label per cluster via chat.
struct LabeledClusters {
  std::vector<std::vector<int>> clusters;
  std::vector<std::string> labels;
};

LabeledClusters cluster_and_label(const std::vector<std::string>& texts,
                                  const std::string& label_template,
                                  const std::string& placeholder,
                                  ChatBackend& chat,
                                  EmbeddingBackend& embedding,
                                  double threshold) {
  LabeledClusters out;
  if (texts.empty()) return out;
  Eigen::MatrixXd vectors = embedding.embed_batch(texts);
  out.clusters = community_detect(vectors, threshold);
  for (const auto& cluster : out.clusters) {
    std::string joined;
    for (int idx : cluster) {
      joined += texts[static_cast<std::size_t>(idx)];
      joined += '\n';
    }
    std::string prompt =
        render_template(label_template, {{placeholder, joined}});
    out.labels.push_back(normalize_text(chat.chat(prompt)));
  }
  return out;
}

}  // namespace

std::vector<TopicAssignment> two_step_cluster(
    const std::vector<Question>& questions, ChatBackend& chat,
    EmbeddingBackend& embedding, const PromptSet& prompts,
    const ClusterOptions& options) {
  std::vector<Question> ordered = questions;
  std::sort(ordered.begin(), ordered.end(),
            [](const Question& a, const Question& b) { return a.id < b.id; });

  std::vector<TopicAssignment> assignments(ordered.size());
  std::vector<int> captioned_index;  // into `ordered`
  std::vector<std::string> captions;

  std::vector<std::string> raw_captions(ordered.size());
  std::vector<char> failed(ordered.size(), 0);
  parallel_for_ordered(ordered.size(), options.max_in_flight,
                       [&](std::size_t i) {
    assignments[i].question_id = ordered[i].id;
    try {
      std::string prompt = render_template(
          prompts.caption, {{"question", ordered[i].question_text}});
      raw_captions[i] = normalize_text(chat.chat(prompt));
      if (raw_captions[i].empty()) failed[i] = 1;
    } catch (const Error& e) {
      std::cerr << "warning: captioning failed for question "
                << ordered[i].id << ": " << e.what() << "\n";
      failed[i] = 1;
    }
  });
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (failed[i]) {
      assignments[i].core_fact_caption = "";
      assignments[i].topic_cluster_id = -1;
      assignments[i].topic_label = "uncaptioned";
      assignments[i].hypertopic_id = -1;
      assignments[i].hypertopic_label = "uncaptioned";
    } else {
      assignments[i].core_fact_caption = raw_captions[i];
      captioned_index.push_back(static_cast<int>(i));
      captions.push_back(raw_captions[i]);
    }
  }
  if (captions.empty()) return assignments;

  // Step 1: cluster captions into topics and label them.
  LabeledClusters topics =
      cluster_and_label(captions, prompts.topic_label, "statements", chat,
                        embedding, options.threshold);
  for (std::size_t c = 0; c < topics.clusters.size(); ++c) {
    for (int member : topics.clusters[c]) {
      auto& a = assignments[static_cast<std::size_t>(captioned_index[
          static_cast<std::size_t>(member)])];
      a.topic_cluster_id = static_cast<int>(c);
      a.topic_label = topics.labels[c];
    }
  }

  // Step 2: cluster the topic LABELS (not member centroids) into hypertopics
  // and label those.
  LabeledClusters hypertopics =
      cluster_and_label(topics.labels, prompts.hypertopic_label, "labels",
                        chat, embedding, options.threshold);
  std::vector<int> topic_to_hyper(topics.labels.size(), -1);
  for (std::size_t h = 0; h < hypertopics.clusters.size(); ++h) {
    for (int topic : hypertopics.clusters[h]) {
      topic_to_hyper[static_cast<std::size_t>(topic)] = static_cast<int>(h);
    }
  }
  for (auto& a : assignments) {
    if (a.topic_cluster_id < 0) continue;
    const int h = topic_to_hyper[static_cast<std::size_t>(a.topic_cluster_id)];
    a.hypertopic_id = h;
    a.hypertopic_label = hypertopics.labels[static_cast<std::size_t>(h)];
  }
  return assignments;
}

void save_topic_assignments(const std::vector<TopicAssignment>& assignments,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw TransportError("cannot write " + path);
  for (const auto& a : assignments) {
    nlohmann::json j;
    j["question_id"] = a.question_id;
    j["core_fact_caption"] = a.core_fact_caption;
    j["topic_cluster_id"] = a.topic_cluster_id;
    j["topic_label"] = a.topic_label;
    j["hypertopic_id"] = a.hypertopic_id;
    j["hypertopic_label"] = a.hypertopic_label;
    out << j.dump() << '\n';
  }
}

}  // namespace mt
