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

#include <algorithm>
#include <string>

#include "subseas/correctors.h"
#include "subseas/error.h"

namespace subseas {
namespace {

void require(const std::optional<std::vector<double>>& part, const char* name) {
  if (!part) throw DataError(std::string("ABC: missing ") + name + " component");
}

void check_len(size_t n, size_t G, const char* what) {
  if (n != G) {
    throw DomainError(std::string(what) + ": expected " + std::to_string(G) +
                      " values, got " + std::to_string(n));
  }
}

}  // namespace

std::vector<double> abc_forecast(const TaskSpec& task, const AbcComponents& parts) {
  require(parts.dynpp, "Dynamical++");
  require(parts.perpp, "Persistence++");
  const bool with_clim = task.horizon != Horizon::kWeeks12;
  if (with_clim) require(parts.climpp, "Climatology++");
  const size_t G = parts.dynpp->size();
  check_len(parts.perpp->size(), G, "ABC Persistence++");
  if (with_clim) check_len(parts.climpp->size(), G, "ABC Climatology++");
  std::vector<double> out(G);
  for (size_t g = 0; g < G; ++g) {
    if (with_clim) {
      out[g] = ((*parts.dynpp)[g] + (*parts.climpp)[g] + (*parts.perpp)[g]) / 3.0;
    } else {
      out[g] = ((*parts.dynpp)[g] + (*parts.perpp)[g]) / 2.0;
    }
  }
  return out;
}

CorrectedMembers abc_member_corrections(
    std::span<const std::span<const double>> members,
    std::span<const double> dynpp, std::span<const double> perpp,
    std::span<const double> climpp, std::span<const double> ensemble_mean) {
  if (members.empty()) throw DataError("probabilistic ABC needs at least one member");
  const size_t G = ensemble_mean.size();
  check_len(dynpp.size(), G, "Dynamical++ output");
  check_len(perpp.size(), G, "Persistence++ output");
  check_len(climpp.size(), G, "Climatology++ output");
  CorrectedMembers out;
  out.dyn.resize(members.size(), std::vector<double>(G));
  out.per.resize(members.size(), std::vector<double>(G));
  out.climpp.assign(climpp.begin(), climpp.end());
  for (size_t m = 0; m < members.size(); ++m) {
    check_len(members[m].size(), G, "ensemble member");
    for (size_t g = 0; g < G; ++g) {
      out.dyn[m][g] = members[m][g] + dynpp[g] - ensemble_mean[g];
      out.per[m][g] = members[m][g] + perpp[g] - ensemble_mean[g];
    }
  }
  return out;
}

std::vector<EmpiricalDistribution> abc_probabilistic(
    std::span<const std::span<const double>> members,
    std::span<const double> dynpp, std::span<const double> perpp,
    std::span<const double> climpp, std::span<const double> ensemble_mean,
    Variable variable) {
  const CorrectedMembers c =
      abc_member_corrections(members, dynpp, perpp, climpp, ensemble_mean);
  const size_t G = ensemble_mean.size();
  const bool clip = variable == Variable::kPrecipitation;
  std::vector<EmpiricalDistribution> out;
  out.reserve(G);
  for (size_t g = 0; g < G; ++g) {
    std::vector<double> pool;
    pool.reserve(2 * members.size() + 1);
    for (const auto& m : c.dyn) pool.push_back(m[g]);
    for (const auto& m : c.per) pool.push_back(m[g]);
    pool.push_back(c.climpp[g]);
    if (clip) {
      for (double& v : pool) v = std::max(v, 0.0);
    }
    out.emplace_back(std::move(pool));
  }
  return out;
}

std::vector<EmpiricalDistribution> baseline_probabilistic(
    std::span<const std::span<const double>> members,
    std::span<const double> deterministic, std::span<const double> ensemble_mean,
    Variable variable) {
  if (members.empty()) throw DataError("probabilistic baseline needs at least one member");
  const size_t G = ensemble_mean.size();
  check_len(deterministic.size(), G, "deterministic forecast");
  const bool clip = variable == Variable::kPrecipitation;
  std::vector<EmpiricalDistribution> out;
  out.reserve(G);
  for (size_t g = 0; g < G; ++g) {
    std::vector<double> pool;
    pool.reserve(members.size());
    for (const auto& m : members) {
      check_len(m.size(), G, "ensemble member");
      double v = m[g] + deterministic[g] - ensemble_mean[g];
      if (clip) v = std::max(v, 0.0);
      pool.push_back(v);
    }
    out.emplace_back(std::move(pool));
  }
  return out;
}

}  // namespace subseas
