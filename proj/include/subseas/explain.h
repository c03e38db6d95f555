/*
 * Copyright 2026 The Subseas Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SUBSEAS_EXPLAIN_H_
#define SUBSEAS_EXPLAIN_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "subseas/calendar.h"
#include "subseas/metrics.h"

namespace subseas {

inline constexpr int kMaxShapleyVariables = 20;
inline constexpr int kDecileBins = 10;

enum class VariableKind { kContinuous, kCategorical };
std::string_view variable_kind_name(VariableKind k);
VariableKind parse_variable_kind(std::string_view s);  // throws ConfigError

// Bin assignment rule learned from a training sample. Continuous variables use
// the nine interior deciles as left-closed edges; categorical variables map
// each distinct training value to its own bin. Ids are dense from 0.
class Binning {
 public:
  Binning() = default;
  // Throws DomainError when a continuous sample has fewer than 10 values.
  static Binning Fit(std::span<const double> values, VariableKind kind);

  VariableKind kind() const { return kind_; }
  int num_bins() const { return num_bins_; }
  std::span<const double> edges() const { return edges_; }
  std::span<const double> categories() const { return categories_; }
  // -1 for a categorical value never seen in training.
  int bin_of(double v) const;
  std::vector<int> assign(std::span<const double> values) const;

 private:
  VariableKind kind_ = VariableKind::kContinuous;
  std::vector<double> edges_;     // distinct interior edges, ascending
  std::vector<double> categories_;
  int num_bins_ = 1;
};

struct ExplanatoryVariable {
  std::string name;
  VariableKind kind = VariableKind::kContinuous;
  std::vector<double> values;  // per subject
  std::vector<int> bins;       // per subject
  int num_bins = 0;
};

// One subject per forecast date.
struct ExplanationTable {
  std::vector<CalendarDate> dates;
  std::vector<double> outcome;
  std::vector<ExplanatoryVariable> variables;

  size_t subjects() const { return outcome.size(); }
  // Throws DomainError on inconsistent lengths or bins.
  void validate() const;
};

// Bins every variable on its own values.
ExplanationTable make_table(std::vector<CalendarDate> dates,
                            std::vector<double> outcome,
                            std::vector<ExplanatoryVariable> variables);

struct ShapleyResult {
  std::vector<std::vector<double>> phi;  // [subject][variable]
  std::vector<double> cohort_mean;       // v(all variables) per subject
  double grand_mean = 0.0;
};

// Exact Cohort Shapley values for every subject, V <= 20.
ShapleyResult cohort_shapley(const ExplanationTable& table, int jobs = 1);
// For one subject.
std::vector<double> cohort_shapley(const ExplanationTable& table, size_t subject);

struct ShapleyEffects {
  std::vector<double> raw;         // mean over subjects of phi^2
  std::vector<double> normalized;  // raw / sum(raw), zeros when the sum is 0
};
ShapleyEffects shapley_effects(const ShapleyResult& result);

enum class ImpactFlag { kHigh, kLow, kIntermediate };
std::string_view impact_flag_name(ImpactFlag f);

struct BinImpact {
  int bin = 0;
  size_t count = 0;
  double probability = 0.0;  // fraction with phi > 0
  ConfidenceInterval ci;
  ImpactFlag flag = ImpactFlag::kIntermediate;
};

struct ImpactSummary {
  std::vector<std::vector<BinImpact>> bins;  // [variable] non-empty bins
  std::vector<int> high_count;               // per subject

  bool is_high(size_t variable, int bin) const;
};

// Flags follow the confidence interval of the highest and lowest probability
// bins per variable. Degenerate variables (all bins share one probability) are
// intermediate.
ImpactSummary impact_probabilities(const ShapleyResult& result,
                                   const ExplanationTable& table,
                                   double level = 0.95, int resamples = 1000,
                                   uint64_t seed = 0);

// Count of variables whose bin is high for each subject under `summary`.
std::vector<int> high_impact_counts(const ImpactSummary& summary,
                                    std::span<const std::vector<int>> bins_by_variable);

// true = deploy ABC (count >= k).
std::vector<bool> opportunistic_select(std::span<const int> counts, int k);

struct KStarResult {
  int k_star = 0;
  std::vector<double> mean_skill;  // blended mean per k = 0..max_k
};

// argmax over k in [0, max_k] of the mean blended skill; ties keep the
// smallest k.
KStarResult choose_k_star(std::span<const double> abc_skill,
                          std::span<const double> baseline_skill,
                          std::span<const int> counts, int max_k);

// Subject in a high bin of `variable` with the largest phi; ties keep the
// earliest date. nullopt when no subject sits in a high bin.
std::optional<size_t> most_impacted_forecast(const ShapleyResult& result,
                                             const ExplanationTable& table,
                                             const ImpactSummary& summary,
                                             size_t variable);

}  // namespace subseas

#endif  // SUBSEAS_EXPLAIN_H_
