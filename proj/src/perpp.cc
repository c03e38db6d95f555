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
#include <vector>

#include "subseas/correctors.h"
#include "subseas/error.h"
#include "subseas/log.h"

namespace subseas {

Eigen::VectorXd solve_least_squares(const Eigen::MatrixXd& x,
                                    const Eigen::VectorXd& y,
                                    bool* rank_deficient) {
  if (x.rows() != y.rows()) throw DomainError("least squares: row count mismatch");
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(x);
  if (rank_deficient) *rank_deficient = cod.rank() < x.cols();
  return cod.solve(y);
}

PerppModel::PerppModel(TaskSpec task, const ForecastArchive& archive,
                       const FieldSeries& obs, const Climatology& clim)
    : task_(task), archive_(archive), obs_(obs), clim_(clim) {
  if (!(obs.grid() == clim.grid())) {
    throw DataError("Persistence++: observation and climatology grids differ");
  }
  if (archive.size() > 0 && !(archive.grid() == obs.grid())) {
    throw DataError("Persistence++: observation and forecast grids differ");
  }
  auto first = archive.first_issuance();
  auto last = archive.last_issuance();
  if (!first) return;
  const size_t G = obs.num_points();
  fbar_start_ = first->ordinal();
  const size_t n = static_cast<size_t>(*last - *first + 1);
  fbar_.assign(n * G, 0.0);
  fbar_ok_.assign(n, 0);
  for (size_t i = 0; i < n; ++i) {
    const CalendarDate issuance = *first + static_cast<int64_t>(i);
    size_t cells = 0;
    double* out = fbar_.data() + i * G;
    for (int l = task.lead; l <= kPerppMaxLead; ++l) {
      auto m = archive.ensemble_mean(issuance, l);
      if (!m) continue;
      for (size_t g = 0; g < G; ++g) out[g] += (*m)[g];
      ++cells;
    }
    if (cells == 0) continue;
    for (size_t g = 0; g < G; ++g) out[g] /= static_cast<double>(cells);
    fbar_ok_[i] = 1;
  }
}

std::optional<std::span<const double>> PerppModel::forecast_mean(
    CalendarDate issuance) const {
  const int64_t i = issuance.ordinal() - fbar_start_;
  if (i < 0 || i >= static_cast<int64_t>(fbar_ok_.size()) || !fbar_ok_[i]) {
    return std::nullopt;
  }
  const size_t G = obs_.num_points();
  return std::span<const double>(fbar_.data() + static_cast<size_t>(i) * G, G);
}

std::optional<PerppRow> PerppModel::regressors(CalendarDate t, size_t g) const {
  const int gap = task_.training_gap();
  auto r1 = obs_.row_of(t - gap);
  auto r2 = obs_.row_of(t - gap - task_.lead);
  auto f = forecast_mean(t - task_.lead - 1);
  if (!r1 || !r2 || !f || !obs_.present(*r1, g) || !obs_.present(*r2, g)) {
    return std::nullopt;
  }
  return PerppRow{1.0, clim_.at(t)[g], obs_.at(*r1, g), obs_.at(*r2, g), (*f)[g]};
}

PerppCoefficients PerppModel::fit(CalendarDate t_star, const DataGuard& guard) const {
  const size_t G = obs_.num_points();
  const int gap = task_.training_gap();
  const CalendarDate cutoff = t_star - gap;

  std::vector<std::vector<PerppRow>> rows(G);
  std::vector<std::vector<double>> target(G);
  for (size_t r = 0; r < obs_.num_dates() && obs_.date(r) <= cutoff; ++r) {
    const CalendarDate t = obs_.date(r);
    auto r1 = obs_.row_of(t - gap);
    auto r2 = obs_.row_of(t - gap - task_.lead);
    auto f = forecast_mean(t - task_.lead - 1);
    if (!r1 || !r2 || !f) continue;
    guard.obs(t);
    guard.obs(t - gap);
    guard.obs(t - gap - task_.lead);
    guard.forecast(t - task_.lead - 1);
    auto c = clim_.at(t);
    for (size_t g = 0; g < G; ++g) {
      if (!obs_.present(r, g) || !obs_.present(*r1, g) || !obs_.present(*r2, g)) continue;
      rows[g].push_back({1.0, c[g], obs_.at(*r1, g), obs_.at(*r2, g), (*f)[g]});
      target[g].push_back(obs_.at(r, g));
    }
  }

  PerppCoefficients out;
  out.fitted_for = t_star;
  out.beta.resize(G);
  out.rank_deficient.assign(G, 0);
  out.rows.resize(G);
  for (size_t g = 0; g < G; ++g) {
    const size_t n = rows[g].size();
    if (n < static_cast<size_t>(kPerppRegressors)) {
      throw DataError("Persistence++: grid point " + std::to_string(g) + " has " +
                      std::to_string(n) + " training rows for " + t_star.iso() +
                      " (need 5)");
    }
    Eigen::MatrixXd x(n, kPerppRegressors);
    Eigen::VectorXd y(n);
    for (size_t i = 0; i < n; ++i) {
      for (int k = 0; k < kPerppRegressors; ++k) x(i, k) = rows[g][i][k];
      y(i) = target[g][i];
    }
    bool deficient = false;
    const Eigen::VectorXd beta = solve_least_squares(x, y, &deficient);
    for (int k = 0; k < kPerppRegressors; ++k) out.beta[g][k] = beta(k);
    out.rank_deficient[g] = deficient ? 1 : 0;
    out.rows[g] = n;
  }
  return out;
}

std::vector<double> PerppModel::predict(const PerppCoefficients& coeffs,
                                        CalendarDate t_star,
                                        const DataGuard& guard) const {
  const size_t G = obs_.num_points();
  if (coeffs.beta.size() != G) throw DomainError("Persistence++: coefficient count mismatch");
  const int gap = task_.training_gap();
  guard.obs(t_star - gap);
  guard.obs(t_star - gap - task_.lead);
  guard.forecast(t_star - task_.lead - 1);
  std::vector<double> out(G);
  for (size_t g = 0; g < G; ++g) {
    auto x = regressors(t_star, g);
    if (!x) {
      throw DataError("Persistence++: regressor unavailable for " + t_star.iso() +
                      " at grid point " + std::to_string(g));
    }
    double acc = 0.0;
    for (int k = 0; k < kPerppRegressors; ++k) acc += coeffs.beta[g][k] * (*x)[k];
    out[g] = acc;
  }
  return out;
}

PerppCoefficients perpp_fit(const TaskSpec& task, const ForecastArchive& archive,
                            const FieldSeries& obs, const Climatology& clim,
                            CalendarDate t_star, AccessAudit* audit) {
  PerppModel model(task, archive, obs, clim);
  auto coeffs = model.fit(t_star, DataGuard(AccessHorizon::For(task, t_star), audit));
  const auto deficient = std::count(coeffs.rank_deficient.begin(),
                                    coeffs.rank_deficient.end(), 1);
  if (deficient > 0) {
    log::warn("Persistence++: rank-deficient design at " + std::to_string(deficient) +
              " grid point(s); using the minimum-norm solution");
  }
  return coeffs;
}

std::vector<double> perpp_predict(const PerppCoefficients& coeffs,
                                  const TaskSpec& task,
                                  const ForecastArchive& archive,
                                  const FieldSeries& obs,
                                  const Climatology& clim, CalendarDate t_star,
                                  AccessAudit* audit) {
  PerppModel model(task, archive, obs, clim);
  return model.predict(coeffs, t_star, DataGuard(AccessHorizon::For(task, t_star), audit));
}

}  // namespace subseas
