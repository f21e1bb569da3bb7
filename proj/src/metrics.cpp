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

#include "mtlib/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <Eigen/Dense>

#include "mtlib/errors.hpp"
#include "mtlib/retrieval.hpp"
#include "mtlib/text.hpp"

namespace mt {

CoverageReport coverage(const Microtheory& mt,
                        const std::vector<BasisSet>& bases,
                        bool provable_only) {
  std::unordered_set<std::string> selected(mt.fact_ids.begin(),
                                           mt.fact_ids.end());
  CoverageReport report;
  report.provable_only = provable_only;

  std::size_t full = 0;
  for (const auto& set : bases) {
    QuestionCoverage qc;
    qc.question_id = set.question_id;
    qc.has_basis = !set.bases.empty();
    if (!qc.has_basis) {
      ++report.unproven_questions;
      report.per_question.push_back(std::move(qc));
      continue;
    }
    ++report.provable_questions;
    for (const auto& basis : set.bases) {
      std::int64_t hit = 0;
      for (const auto& id : basis) {
        if (selected.count(id)) ++hit;
      }
      Rational frac(hit, static_cast<std::int64_t>(basis.size()));
      std::vector<std::string> sorted = basis;
      std::sort(sorted.begin(), sorted.end());
      const bool take =
          qc.best_basis.empty()
              ? true
              : frac > qc.fraction ||
                    (frac == qc.fraction && sorted < qc.best_basis);
      if (take) {
        qc.fraction = frac;
        qc.best_basis = std::move(sorted);
      }
    }
    qc.full_covered = qc.fraction == Rational::whole(1);
    if (qc.full_covered) ++full;
    report.total_fractional += qc.fraction;
    report.per_question.push_back(std::move(qc));
  }

  const std::size_t denom = provable_only
                                ? report.provable_questions
                                : report.provable_questions +
                                      report.unproven_questions;
  report.full_coverage_rate =
      denom == 0 ? 0.0 : static_cast<double>(full) / static_cast<double>(denom);
  return report;
}

UsageStats usage_stats(const Microtheory& mt,
                       const std::vector<BasisSet>& bases) {
  UsageStats stats;
  for (const auto& id : mt.fact_ids) stats.questions_per_fact[id] = 0;
  for (const auto& set : bases) {
    std::set<std::string> used_here;
    for (const auto& basis : set.bases) {
      for (const auto& id : basis) used_here.insert(id);
    }
    for (const auto& id : used_here) {
      auto it = stats.questions_per_fact.find(id);
      if (it != stats.questions_per_fact.end()) ++it->second;
    }
  }
  std::size_t used = 0;
  std::size_t total = 0;
  for (const auto& [id, count] : stats.questions_per_fact) {
    (void)id;
    ++stats.histogram[count];
    if (count > 0) ++used;
    total += count;
  }
  const std::size_t n = stats.questions_per_fact.size();
  stats.fraction_used =
      n == 0 ? 0.0 : static_cast<double>(used) / static_cast<double>(n);
  stats.avg_questions_per_fact =
      n == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(n);
  return stats;
}

std::vector<Fact> resolve_microtheory(const Microtheory& mt,
                                      const std::vector<Fact>& pool) {
  std::unordered_map<std::string, const Fact*> by_id;
  for (const auto& f : pool) by_id[f.id] = &f;
  std::vector<Fact> facts;
  facts.reserve(mt.fact_ids.size());
  for (const auto& id : mt.fact_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw IntegrityError("microtheory fact \"" + id +
                           "\" not found in the pool");
    }
    facts.push_back(*it->second);
  }
  return facts;
}

RelevanceOutcome per_question_relevance(const std::vector<Fact>& mt_facts,
                                        const Question& question,
                                        FactRater& rater, std::size_t k,
                                        int max_in_flight) {
  const QuestionOption* correct = question.correct_option();
  if (correct == nullptr) {
    throw IntegrityError("question " + question.id +
                         " has no correct option");
  }

  // The retrieval cap only binds for microtheories larger than k.
  std::vector<const Fact*> to_rate;
  if (mt_facts.size() > k) {
    ChunkedCorpus corpus;
    std::unordered_map<std::string, const Fact*> by_id;
    for (const auto& f : mt_facts) {
      by_id[f.id] = &f;
      Chunk chunk;
      chunk.chunk_id = f.id;
      chunk.doc_id = f.id;
      chunk.text = f.text;
      chunk.word_count = tokenize(f.text).size();
      corpus.add_chunk(std::move(chunk));
    }
    for (const auto& hit : bm25_search(correct->text, corpus, k)) {
      to_rate.push_back(by_id.at(hit.chunk_id));
    }
    // BM25 drops nothing at this k unless the query is empty; pad from the
    // microtheory order if retrieval returned fewer than k.
    if (to_rate.size() < k) {
      std::unordered_set<std::string> chosen;
      for (const auto* f : to_rate) chosen.insert(f->id);
      for (const auto& f : mt_facts) {
        if (to_rate.size() >= k) break;
        if (chosen.insert(f.id).second) to_rate.push_back(&f);
      }
    }
  } else {
    for (const auto& f : mt_facts) to_rate.push_back(&f);
  }

  std::vector<int> ratings(to_rate.size(), 0);
  parallel_for_ordered(to_rate.size(), max_in_flight, [&](std::size_t i) {
    ratings[i] = rater.rate(question, to_rate[i]->text);
  });

  RelevanceOutcome outcome;
  outcome.rated_count = to_rate.size();
  for (std::size_t i = 0; i < ratings.size(); ++i) {
    int r = ratings[i];
    if (r < 1 || r > 5) {
      std::cerr << "warning: unparseable rating for fact \""
                << to_rate[i]->id << "\"; treating as 1\n";
      r = 1;
    }
    outcome.max_rating = std::max(outcome.max_rating, r);
  }
  outcome.relevant = outcome.max_rating == 5;
  return outcome;
}

// ---------------------------------------------------------------------------
// Hill-curve fitting.

namespace {

double hill(double v, double k, double h, double s, double x) {
  const double xh = std::pow(x, h);
  const double kh = std::pow(k, h);
  return v * xh / (kh + xh) * s;
}

struct FitState {
  double v, k, h, s;
  double ssr;
};

// One Levenberg-Marquardt run in log-parameter space (keeps v,k,h,s > 0).
FitState lm_fit(const std::vector<CurvePoint>& pts, double v0, double k0,
                double h0, double s0, bool fit_s, int max_iterations) {
  const int n_params = fit_s ? 4 : 3;
  Eigen::VectorXd theta(n_params);
  theta[0] = std::log(v0);
  theta[1] = std::log(k0);
  theta[2] = std::log(h0);
  if (fit_s) theta[3] = std::log(s0);

  const auto residuals = [&](const Eigen::VectorXd& t, Eigen::VectorXd& r,
                             Eigen::MatrixXd* jac) {
    const double v = std::exp(t[0]);
    const double k = std::exp(t[1]);
    const double h = std::exp(t[2]);
    const double s = fit_s ? std::exp(t[3]) : s0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double x = pts[i].x;
      const double xh = std::pow(x, h);
      const double kh = std::pow(k, h);
      const double denom = kh + xh;
      const double f = v * s * xh / denom;
      r[static_cast<Eigen::Index>(i)] = f - pts[i].y;
      if (jac) {
        const double dlogk = -f * h * kh / denom;
        const double dh = f * kh * (std::log(x) - std::log(k)) / denom;
        (*jac)(static_cast<Eigen::Index>(i), 0) = f;          // d/d log v
        (*jac)(static_cast<Eigen::Index>(i), 1) = dlogk;      // d/d log k
        (*jac)(static_cast<Eigen::Index>(i), 2) = h * dh;     // d/d log h
        if (fit_s) (*jac)(static_cast<Eigen::Index>(i), 3) = f;
      }
    }
  };

  const auto ssr_of = [&](const Eigen::VectorXd& t) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(pts.size()));
    residuals(t, r, nullptr);
    return r.squaredNorm();
  };

  double lambda = 1e-3;
  double ssr = ssr_of(theta);
  Eigen::VectorXd r(static_cast<Eigen::Index>(pts.size()));
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(pts.size()), n_params);
  for (int iter = 0; iter < max_iterations; ++iter) {
    residuals(theta, r, &jac);
    Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::VectorXd jtr = jac.transpose() * r;
    bool stepped = false;
    for (int tries = 0; tries < 24; ++tries) {
      Eigen::MatrixXd damped = jtj;
      for (int d = 0; d < n_params; ++d) {
        damped(d, d) += lambda * std::max(jtj(d, d), 1e-12);
      }
      Eigen::VectorXd step = damped.ldlt().solve(jtr);
      Eigen::VectorXd candidate = theta - step;
      // Keep the exponent sane; e^40 overflows pow() ranges quickly.
      candidate[2] = std::clamp(candidate[2], std::log(1e-3), std::log(64.0));
      double candidate_ssr = ssr_of(candidate);
      if (std::isfinite(candidate_ssr) && candidate_ssr < ssr) {
        theta = candidate;
        ssr = candidate_ssr;
        lambda = std::max(lambda * 0.5, 1e-12);
        stepped = true;
        break;
      }
      lambda *= 4.0;
    }
    if (!stepped) break;
    if (ssr < 1e-30) break;
  }

  FitState state;
  state.v = std::exp(theta[0]);
  state.k = std::exp(theta[1]);
  state.h = std::exp(theta[2]);
  state.s = fit_s ? std::exp(theta[3]) : s0;
  state.ssr = ssr;
  return state;
}

}  // namespace

double RelevanceCurve::forward(double x) const {
  if (x <= 0.0) return 0.0;
  return hill(v_max, k, hill_exponent, s, x);
}

RelevanceCurve fit_p_relevance(const std::vector<CurvePoint>& points,
                               const HillFitOptions& options) {
  if (points.size() < 4) {
    throw ValidationError("fit_p_relevance: need at least 4 points");
  }
  double max_x = 0.0, max_y = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].x <= 0.0) {
      throw ValidationError("fit_p_relevance: x values must be positive");
    }
    if (i > 0 && points[i].x <= points[i - 1].x) {
      throw ValidationError("fit_p_relevance: x values must be increasing");
    }
    max_x = std::max(max_x, points[i].x);
    max_y = std::max(max_y, points[i].y);
    mean_y += points[i].y;
  }
  mean_y /= static_cast<double>(points.size());
  double ss_tot = 0.0;
  for (const auto& p : points) ss_tot += (p.y - mean_y) * (p.y - mean_y);
  if (ss_tot == 0.0) {
    throw ValidationError(
        "fit_p_relevance: degenerate points (all y equal)");
  }

  std::mt19937_64 gen(options.seed);
  auto uniform = [&] {
    return static_cast<double>(gen() >> 11) / 9007199254740992.0;  // [0,1)
  };

  FitState best{0, 0, 0, 1, std::numeric_limits<double>::infinity()};
  for (int start = 0; start < options.starts; ++start) {
    const double k0 =
        std::exp(std::log(1.0) +
                 uniform() * (std::log(10.0 * max_x) - std::log(1.0)));
    const double h0 =
        std::exp(std::log(0.2) + uniform() * (std::log(5.0) - std::log(0.2)));
    const double v0 = std::max(1e-6, max_y * (0.8 + 0.4 * uniform()));
    FitState state = lm_fit(points, v0, k0, h0, 1.0, options.scale_free,
                            options.max_iterations);
    if (state.ssr < best.ssr) best = state;
  }

  RelevanceCurve curve;
  curve.points = points;
  curve.v_max = best.v;
  curve.k = best.k;
  curve.hill_exponent = best.h;
  curve.s = best.s;
  curve.r_squared = 1.0 - best.ssr / ss_tot;
  return curve;
}

double invert_p_relevance_exact(const RelevanceCurve& curve, double p_target) {
  if (p_target < 0.0) {
    throw ValidationError("invert_p_relevance: target must be nonnegative");
  }
  if (p_target == 0.0) return 0.0;
  const double asymptote = curve.asymptote();
  if (p_target >= asymptote) {
    throw ValidationError(
        "invert_p_relevance: target " + std::to_string(p_target) +
        " is unreachable (asymptote " + std::to_string(asymptote) + ")");
  }
  const double r = p_target / asymptote;
  return curve.k * std::pow(r / (1.0 - r), 1.0 / curve.hill_exponent);
}

std::int64_t invert_p_relevance(const RelevanceCurve& curve, double p_target) {
  const double x = invert_p_relevance_exact(curve, p_target);
  // ceil with a tiny slack so exact integers do not round up spuriously.
  return static_cast<std::int64_t>(std::ceil(x - 1e-9));
}

}  // namespace mt
