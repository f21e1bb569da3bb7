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

#ifndef MTLIB_METRICS_HPP
#define MTLIB_METRICS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mtlib/model.hpp"
#include "mtlib/providers.hpp"
#include "mtlib/rational.hpp"

namespace mt {

struct QuestionCoverage {
  std::string question_id;
  bool has_basis = false;
  bool full_covered = false;
  Rational fraction;  // best covered fraction over the question's bases
  std::vector<std::string> best_basis;
};

struct CoverageReport {
  std::vector<QuestionCoverage> per_question;
  std::size_t provable_questions = 0;
  std::size_t unproven_questions = 0;
  // Rates use provable questions as the denominator by default (full
  // coverage of unprovable questions is impossible); pass provable_only =
  // false to divide by all questions instead.
  bool provable_only = true;
  double full_coverage_rate = 0.0;
  Rational total_fractional;
};

// Per-question coverage of `mt` against the collected bases: the fraction is
// the highest share of any single basis's facts that the microtheory
// contains; a question is fully covered iff that share is 1.
CoverageReport coverage(const Microtheory& mt,
                        const std::vector<BasisSet>& bases,
                        bool provable_only = true);

struct UsageStats {
  // For each microtheory fact: how many questions use it in some basis.
  std::map<std::string, std::size_t> questions_per_fact;
  // histogram[c] = number of microtheory facts used by exactly c questions.
  std::map<std::size_t, std::size_t> histogram;
  double fraction_used = 0.0;
  double avg_questions_per_fact = 0.0;
};

UsageStats usage_stats(const Microtheory& mt,
                       const std::vector<BasisSet>& bases);

// Resolves microtheory fact ids against a pool; unknown ids raise
// IntegrityError.
std::vector<Fact> resolve_microtheory(const Microtheory& mt,
                                      const std::vector<Fact>& pool);

struct RelevanceOutcome {
  bool relevant = false;      // some rated fact scored 5
  std::size_t rated_count = 0;
  int max_rating = 0;
};

// Rates the microtheory facts most relevant to the question's correct
// hypothesis. The top-k retrieval cap applies only when the microtheory has
// more than k facts; otherwise every fact is rated. Raters that return an
// unparseable value (0) are treated as rating 1 and logged.
RelevanceOutcome per_question_relevance(const std::vector<Fact>& mt_facts,
                                        const Question& question,
                                        FactRater& rater, std::size_t k = 270,
                                        int max_in_flight = 8);

struct CurvePoint {
  double x = 0.0;  // training size
  double y = 0.0;  // relevance rate in [0,1]
};

// Saturating growth curve y = v_max * x^h / (k^h + x^h) * s.
struct RelevanceCurve {
  std::vector<CurvePoint> points;
  double v_max = 0.0;
  double k = 0.0;
  double hill_exponent = 0.0;
  double s = 1.0;
  double r_squared = 0.0;

  double asymptote() const { return v_max * s; }
  double forward(double x) const;
};

struct HillFitOptions {
  int starts = 32;
  int max_iterations = 200;
  std::uint64_t seed = 12345;
  // v_max and s only enter the model through their product; by default s is
  // frozen at 1 so the reported parameters are well defined. Scale-free mode
  // fits s too (callers must then interpret only v_max*s).
  bool scale_free = false;
};

// Multi-start Levenberg-Marquardt least squares. Needs >= 4 points with
// strictly increasing x > 0; all-equal y values are rejected as degenerate.
RelevanceCurve fit_p_relevance(const std::vector<CurvePoint>& points,
                               const HillFitOptions& options = {});

// Exact algebraic inverse on (0, asymptote).
double invert_p_relevance_exact(const RelevanceCurve& curve, double p_target);

// Training size needed to reach p_target: the inverse rounded up to an
// integer. p_target at or above the asymptote is unreachable.
std::int64_t invert_p_relevance(const RelevanceCurve& curve, double p_target);

}  // namespace mt

#endif  // MTLIB_METRICS_HPP
