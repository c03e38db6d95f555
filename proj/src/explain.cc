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

#include "subseas/explain.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "subseas/error.h"
#include "subseas/log.h"
#include "subseas/parallel.h"
#include "subseas/quantile.h"
#include "subseas/random.h"

namespace subseas {

std::string_view variable_kind_name(VariableKind k) {
  return k == VariableKind::kContinuous ? "continuous" : "categorical";
}

VariableKind parse_variable_kind(std::string_view s) {
  if (s == "continuous") return VariableKind::kContinuous;
  if (s == "categorical") return VariableKind::kCategorical;
  throw ConfigError("unknown variable kind '" + std::string(s) +
                    "' (expected continuous or categorical)");
}

Binning Binning::Fit(std::span<const double> values, VariableKind kind) {
  Binning b;
  b.kind_ = kind;
  if (kind == VariableKind::kCategorical) {
    b.categories_.assign(values.begin(), values.end());
    std::sort(b.categories_.begin(), b.categories_.end());
    b.categories_.erase(std::unique(b.categories_.begin(), b.categories_.end()),
                        b.categories_.end());
    b.num_bins_ = std::max<int>(1, static_cast<int>(b.categories_.size()));
    return b;
  }
  if (values.size() < static_cast<size_t>(kDecileBins)) {
    throw DomainError("decile binning needs at least 10 subjects, got " +
                      std::to_string(values.size()));
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) {
    log::warn("constant explanatory variable; using a single bin");
    b.num_bins_ = 1;
    return b;
  }
  for (int k = 1; k < kDecileBins; ++k) {
    b.edges_.push_back(quantile_sorted(sorted, k / static_cast<double>(kDecileBins)));
  }
  b.edges_.erase(std::unique(b.edges_.begin(), b.edges_.end()), b.edges_.end());
  // Drop edges that would leave an empty bin in the training sample so that
  // ids stay dense.
  std::vector<double> kept;
  double prev = -INFINITY;
  for (double e : b.edges_) {
    const auto lo = std::lower_bound(sorted.begin(), sorted.end(), prev);
    const auto hi = std::lower_bound(sorted.begin(), sorted.end(), e);
    if (hi != lo) {
      kept.push_back(e);
      prev = e;
    }
  }
  if (!kept.empty() &&
      std::lower_bound(sorted.begin(), sorted.end(), kept.back()) == sorted.end()) {
    kept.pop_back();
  }
  b.edges_ = std::move(kept);
  b.num_bins_ = static_cast<int>(b.edges_.size()) + 1;
  return b;
}

int Binning::bin_of(double v) const {
  if (kind_ == VariableKind::kCategorical) {
    auto it = std::lower_bound(categories_.begin(), categories_.end(), v);
    if (it == categories_.end() || *it != v) return -1;
    return static_cast<int>(it - categories_.begin());
  }
  return static_cast<int>(std::upper_bound(edges_.begin(), edges_.end(), v) -
                          edges_.begin());
}

std::vector<int> Binning::assign(std::span<const double> values) const {
  std::vector<int> out(values.size());
  for (size_t i = 0; i < values.size(); ++i) out[i] = bin_of(values[i]);
  return out;
}

void ExplanationTable::validate() const {
  const size_t n = outcome.size();
  if (dates.size() != n) throw DomainError("explanation table: dates and outcomes differ");
  for (const auto& v : variables) {
    if (v.bins.size() != n) {
      throw DomainError("explanation table: variable '" + v.name + "' has " +
                        std::to_string(v.bins.size()) + " bins for " +
                        std::to_string(n) + " subjects");
    }
    if (!v.values.empty() && v.values.size() != n) {
      throw DomainError("explanation table: variable '" + v.name + "' value count mismatch");
    }
  }
}

ExplanationTable make_table(std::vector<CalendarDate> dates,
                            std::vector<double> outcome,
                            std::vector<ExplanatoryVariable> variables) {
  for (auto& v : variables) {
    const Binning b = Binning::Fit(v.values, v.kind);
    v.bins = b.assign(v.values);
    v.num_bins = b.num_bins();
  }
  ExplanationTable t{std::move(dates), std::move(outcome), std::move(variables)};
  t.validate();
  return t;
}

namespace {

std::vector<double> shapley_weights(int V) {
  // w[s] = s! (V - s - 1)! / V!
  std::vector<double> w(static_cast<size_t>(V));
  for (int s = 0; s < V; ++s) {
    double x = 1.0 / V;
    // 1 / (V * C(V-1, s))
    for (int k = 1; k <= s; ++k) x *= static_cast<double>(k) / (V - k);
    w[s] = x;
  }
  return w;
}

class ShapleyWorker {
 public:
  explicit ShapleyWorker(const ExplanationTable& t)
      : t_(t), V_(static_cast<int>(t.variables.size())),
        weights_(shapley_weights(V_)),
        sum_(size_t{1} << V_), cnt_(size_t{1} << V_) {}

  // Returns phi and v(full).
  std::pair<std::vector<double>, double> run(size_t i) {
    const size_t full = (size_t{1} << V_) - 1;
    std::fill(sum_.begin(), sum_.end(), 0.0);
    std::fill(cnt_.begin(), cnt_.end(), 0.0);
    for (size_t j = 0; j < t_.subjects(); ++j) {
      size_t mask = 0;
      for (int k = 0; k < V_; ++k) {
        if (t_.variables[k].bins[j] == t_.variables[k].bins[i]) mask |= size_t{1} << k;
      }
      sum_[mask] += t_.outcome[j];
      cnt_[mask] += 1.0;
    }
    // Superset sums: cohort of S = subjects whose match mask contains S.
    for (int k = 0; k < V_; ++k) {
      const size_t bit = size_t{1} << k;
      for (size_t m = 0; m <= full; ++m) {
        if (!(m & bit)) {
          sum_[m] += sum_[m | bit];
          cnt_[m] += cnt_[m | bit];
        }
      }
    }
    for (size_t m = 0; m <= full; ++m) sum_[m] /= cnt_[m];  // v(S)
    std::vector<double> phi(static_cast<size_t>(V_), 0.0);
    for (size_t m = 0; m <= full; ++m) {
      const int s = __builtin_popcountll(m);
      for (int k = 0; k < V_; ++k) {
        const size_t bit = size_t{1} << k;
        if (m & bit) continue;
        phi[k] += weights_[s] * (sum_[m | bit] - sum_[m]);
      }
    }
    return {std::move(phi), sum_[full]};
  }

 private:
  const ExplanationTable& t_;
  int V_;
  std::vector<double> weights_;
  std::vector<double> sum_;
  std::vector<double> cnt_;
};

void check_shapley_input(const ExplanationTable& t) {
  t.validate();
  const size_t V = t.variables.size();
  if (V > static_cast<size_t>(kMaxShapleyVariables)) {
    throw DomainError("Cohort Shapley: " + std::to_string(V) +
                      " variables exceed the exact-enumeration limit of 20; select a subset");
  }
  if (t.subjects() == 0) throw DomainError("Cohort Shapley: empty table");
}

}  // namespace

std::vector<double> cohort_shapley(const ExplanationTable& table, size_t subject) {
  check_shapley_input(table);
  if (subject >= table.subjects()) throw DomainError("Cohort Shapley: subject out of range");
  if (table.variables.empty()) return {};
  ShapleyWorker w(table);
  return w.run(subject).first;
}

ShapleyResult cohort_shapley(const ExplanationTable& table, int jobs) {
  check_shapley_input(table);
  const size_t n = table.subjects();
  ShapleyResult out;
  out.phi.resize(n);
  out.cohort_mean.resize(n);
  double total = 0.0;
  for (double y : table.outcome) total += y;
  out.grand_mean = total / static_cast<double>(n);
  if (table.variables.empty()) {
    std::fill(out.cohort_mean.begin(), out.cohort_mean.end(), out.grand_mean);
    return out;
  }
  const size_t workers = static_cast<size_t>(std::max(1, jobs));
  const size_t chunk = (n + workers - 1) / workers;
  parallel_for(workers, jobs, [&](size_t w) {
    ShapleyWorker worker(table);
    for (size_t i = w * chunk; i < std::min(n, (w + 1) * chunk); ++i) {
      auto [phi, full] = worker.run(i);
      out.phi[i] = std::move(phi);
      out.cohort_mean[i] = full;
    }
  });
  return out;
}

ShapleyEffects shapley_effects(const ShapleyResult& result) {
  ShapleyEffects out;
  if (result.phi.empty()) return out;
  const size_t V = result.phi.front().size();
  out.raw.assign(V, 0.0);
  for (const auto& row : result.phi) {
    for (size_t j = 0; j < V; ++j) out.raw[j] += row[j] * row[j];
  }
  double total = 0.0;
  for (double& e : out.raw) {
    e /= static_cast<double>(result.phi.size());
    total += e;
  }
  out.normalized.assign(V, 0.0);
  if (total > 0.0) {
    for (size_t j = 0; j < V; ++j) out.normalized[j] = out.raw[j] / total;
  }
  return out;
}

std::string_view impact_flag_name(ImpactFlag f) {
  switch (f) {
    case ImpactFlag::kHigh:
      return "high";
    case ImpactFlag::kLow:
      return "low";
    case ImpactFlag::kIntermediate:
      return "intermediate";
  }
  return "intermediate";
}

bool ImpactSummary::is_high(size_t variable, int bin) const {
  for (const auto& b : bins[variable]) {
    if (b.bin == bin) return b.flag == ImpactFlag::kHigh;
  }
  return false;
}

ImpactSummary impact_probabilities(const ShapleyResult& result,
                                   const ExplanationTable& table, double level,
                                   int resamples, uint64_t seed) {
  table.validate();
  const size_t n = table.subjects();
  if (result.phi.size() != n) throw DomainError("impact: Shapley result does not match table");
  const size_t V = table.variables.size();
  ImpactSummary out;
  out.bins.resize(V);
  for (size_t j = 0; j < V; ++j) {
    std::map<int, std::vector<double>> by_bin;
    for (size_t i = 0; i < n; ++i) {
      by_bin[table.variables[j].bins[i]].push_back(result.phi[i][j] > 0.0 ? 1.0 : 0.0);
    }
    const int declared = table.variables[j].num_bins;
    for (int b = 0; b < declared; ++b) {
      if (!by_bin.count(b)) {
        log::warn("impact: variable '" + table.variables[j].name + "' bin " +
                  std::to_string(b) + " is empty; excluded");
      }
    }
    for (const auto& [bin, flags] : by_bin) {
      BinImpact bi;
      bi.bin = bin;
      bi.count = flags.size();
      double pos = 0.0;
      for (double f : flags) pos += f;
      bi.probability = pos / static_cast<double>(flags.size());
      bi.ci = bootstrap_ci(flags, level, resamples,
                           derive_seed(seed, "impact", (j << 20) + static_cast<uint64_t>(bin + 1)));
      out.bins[j].push_back(bi);
    }
    auto& bins = out.bins[j];
    if (bins.empty()) continue;
    auto mx = std::max_element(bins.begin(), bins.end(), [](const BinImpact& a, const BinImpact& b) {
      return a.probability < b.probability;
    });
    auto mn = std::min_element(bins.begin(), bins.end(), [](const BinImpact& a, const BinImpact& b) {
      return a.probability < b.probability;
    });
    if (mx->probability == mn->probability) continue;
    const ConfidenceInterval hi = mx->ci, lo = mn->ci;
    for (auto& b : bins) {
      if (b.probability >= hi.lo && b.probability <= hi.hi) {
        b.flag = ImpactFlag::kHigh;
      } else if (b.probability >= lo.lo && b.probability <= lo.hi) {
        b.flag = ImpactFlag::kLow;
      }
    }
  }
  std::vector<std::vector<int>> cols(V);
  for (size_t j = 0; j < V; ++j) cols[j] = table.variables[j].bins;
  out.high_count = high_impact_counts(out, cols);
  return out;
}

std::vector<int> high_impact_counts(const ImpactSummary& summary,
                                    std::span<const std::vector<int>> bins_by_variable) {
  if (bins_by_variable.size() != summary.bins.size()) {
    throw DomainError("high-impact counts: variable count mismatch");
  }
  const size_t n = bins_by_variable.empty() ? 0 : bins_by_variable.front().size();
  std::vector<int> out(n, 0);
  for (size_t j = 0; j < bins_by_variable.size(); ++j) {
    if (bins_by_variable[j].size() != n) throw DomainError("high-impact counts: ragged input");
    for (size_t i = 0; i < n; ++i) {
      if (summary.is_high(j, bins_by_variable[j][i])) ++out[i];
    }
  }
  return out;
}

std::vector<bool> opportunistic_select(std::span<const int> counts, int k) {
  std::vector<bool> out(counts.size());
  for (size_t i = 0; i < counts.size(); ++i) out[i] = counts[i] >= k;
  return out;
}

KStarResult choose_k_star(std::span<const double> abc_skill,
                          std::span<const double> baseline_skill,
                          std::span<const int> counts, int max_k) {
  const size_t n = counts.size();
  if (abc_skill.size() != n || baseline_skill.size() != n) {
    throw DomainError("choose_k_star: inputs differ in length");
  }
  if (n == 0) throw DomainError("choose_k_star: no dates");
  if (max_k < 0) throw DomainError("choose_k_star: max_k must be >= 0");
  KStarResult out;
  double best = -INFINITY;
  for (int k = 0; k <= max_k; ++k) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += counts[i] >= k ? abc_skill[i] : baseline_skill[i];
    const double mean = acc / static_cast<double>(n);
    out.mean_skill.push_back(mean);
    if (mean > best) {
      best = mean;
      out.k_star = k;
    }
  }
  return out;
}

std::optional<size_t> most_impacted_forecast(const ShapleyResult& result,
                                             const ExplanationTable& table,
                                             const ImpactSummary& summary,
                                             size_t variable) {
  if (variable >= table.variables.size()) throw DomainError("most impacted: variable out of range");
  std::optional<size_t> best;
  for (size_t i = 0; i < table.subjects(); ++i) {
    if (!summary.is_high(variable, table.variables[variable].bins[i])) continue;
    const double phi = result.phi[i][variable];
    if (!best) {
      best = i;
      continue;
    }
    const double b = result.phi[*best][variable];
    if (phi > b || (phi == b && table.dates[i] < table.dates[*best])) best = i;
  }
  return best;
}

}  // namespace subseas
