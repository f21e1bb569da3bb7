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

#ifndef MTLIB_CLUSTER_HPP
#define MTLIB_CLUSTER_HPP

#include <string>
#include <vector>

#include <Eigen/Core>

#include "mtlib/model.hpp"
#include "mtlib/providers.hpp"

namespace mt {

struct TopicAssignment {
  std::string question_id;
  std::string core_fact_caption;
  int topic_cluster_id = -1;
  std::string topic_label;
  int hypertopic_id = -1;
  std::string hypertopic_label;
};

// Greedy community detection: repeatedly seed a community at the unassigned
// vector with the most unassigned neighbors at cosine >= threshold; the
// qualifying neighbors join. Ties go to the smallest index, communities are
// returned largest first (ties by smallest member), singletons allowed, and
// the result is a partition of [0, rows).
std::vector<std::vector<int>> community_detect(const Eigen::MatrixXd& vectors,
                                               double threshold = 0.6);

struct ClusterOptions {
  double threshold = 0.6;
  int max_in_flight = 8;
};

// Caption each question with its core fact, cluster the captions, label the
// clusters, then cluster the labels into hypertopics and label those.
// Questions whose captioning fails land in a reserved "uncaptioned" topic.
std::vector<TopicAssignment> two_step_cluster(
    const std::vector<Question>& questions, ChatBackend& chat,
    EmbeddingBackend& embedding, const PromptSet& prompts,
    const ClusterOptions& options = {});

void save_topic_assignments(const std::vector<TopicAssignment>& assignments,
                            const std::string& path);

}  // namespace mt

#endif  // MTLIB_CLUSTER_HPP
