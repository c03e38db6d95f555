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

#include "subseas/field.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "subseas/error.h"

namespace subseas {

FieldSeries::FieldSeries(Grid grid, std::vector<CalendarDate> dates,
                         std::vector<double> values,
                         std::vector<uint8_t> present, std::string units)
    : grid_(std::move(grid)),
      dates_(std::move(dates)),
      values_(std::move(values)),
      present_(std::move(present)),
      units_(std::move(units)) {
  const size_t cells = dates_.size() * grid_.size();
  if (values_.size() != cells || present_.size() != cells) {
    throw DataError("field series array size does not match dates x points");
  }
  for (size_t r = 1; r < dates_.size(); ++r) {
    if (!(dates_[r - 1] < dates_[r])) {
      throw DataError("field series dates must be strictly increasing (at " +
                      dates_[r].iso() + ")");
    }
  }
  complete_.assign(dates_.size(), 1);
  for (size_t i = 0; i < cells; ++i) {
    if (!present_[i]) {
      values_[i] = std::numeric_limits<double>::quiet_NaN();
      complete_[i / grid_.size()] = 0;
    }
  }
  contiguous_ = !dates_.empty() &&
                dates_.back() - dates_.front() ==
                    static_cast<int64_t>(dates_.size()) - 1;
}

FieldSeries FieldSeries::Dense(Grid grid, std::vector<CalendarDate> dates,
                               std::vector<double> values, std::string units) {
  std::vector<uint8_t> present(values.size(), 1);
  return FieldSeries(std::move(grid), std::move(dates), std::move(values),
                     std::move(present), std::move(units));
}

std::optional<size_t> FieldSeries::row_of(CalendarDate d) const {
  if (dates_.empty()) return std::nullopt;
  if (contiguous_) {
    const int64_t off = d - dates_.front();
    if (off < 0 || off >= static_cast<int64_t>(dates_.size())) return std::nullopt;
    return static_cast<size_t>(off);
  }
  auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
  if (it == dates_.end() || *it != d) return std::nullopt;
  return static_cast<size_t>(it - dates_.begin());
}

std::optional<std::span<const double>> FieldSeries::complete_row(
    CalendarDate d) const {
  auto r = row_of(d);
  if (!r || !complete_[*r]) return std::nullopt;
  return row(*r);
}

bool operator==(const FieldSeries& a, const FieldSeries& b) {
  if (!(a.grid_ == b.grid_) || a.dates_ != b.dates_ ||
      a.present_ != b.present_ || a.units_ != b.units_) {
    return false;
  }
  for (size_t i = 0; i < a.values_.size(); ++i) {
    if (a.present_[i] && a.values_[i] != b.values_[i]) return false;
  }
  return true;
}

std::string_view era_name(Era e) {
  return e == Era::kReforecast ? "reforecast" : "forecast";
}

Era parse_era(std::string_view s) {
  if (s == "forecast") return Era::kForecast;
  if (s == "reforecast") return Era::kReforecast;
  throw DataError("unknown era '" + std::string(s) + "'");
}

void ForecastArchive::Builder::add(ForecastKey key, Era era,
                                   std::span<const double> values) {
  if (values.size() != grid_.size()) {
    throw DataError("forecast entry for " + key.issuance.iso() + " lead " +
                    std::to_string(key.lead) + " has " +
                    std::to_string(values.size()) + " values, expected " +
                    std::to_string(grid_.size()));
  }
  if (key.lead < 0 || key.lead >= 4096 || key.member < kDeterministicMember) {
    throw DataError("forecast key out of range at " + key.issuance.iso());
  }
  entries_.push_back({key, era});
  values_.insert(values_.end(), values.begin(), values.end());
}

ForecastArchive ForecastArchive::Builder::build() && {
  const size_t G = grid_.size();
  std::vector<size_t> order(entries_.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return entries_[a].key < entries_[b].key;
  });

  ForecastArchive out;
  out.grid_ = std::move(grid_);
  out.entries_.reserve(entries_.size());
  out.values_.resize(values_.size());
  for (size_t i = 0; i < order.size(); ++i) {
    const Entry& e = entries_[order[i]];
    if (i > 0 && out.entries_.back().key == e.key) {
      throw DataError("duplicate forecast key (" + e.key.issuance.iso() + ", " +
                      std::to_string(e.key.lead) + ", " +
                      std::to_string(e.key.member) + ")");
    }
    out.entries_.push_back(e);
    std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(order[i] * G), G,
                out.values_.begin() + static_cast<std::ptrdiff_t>(i * G));
  }

  // Group entries by (issuance, lead) and precompute ensemble means.
  std::vector<int> leads;
  for (size_t i = 0; i < out.entries_.size();) {
    const ForecastKey& k = out.entries_[i].key;
    size_t j = i;
    Group grp;
    grp.begin = i;
    grp.era = out.entries_[i].era;
    while (j < out.entries_.size() &&
           out.entries_[j].key.issuance == k.issuance &&
           out.entries_[j].key.lead == k.lead) {
      if (out.entries_[j].era != grp.era) {
        throw DataError("mixed eras for issuance " + k.issuance.iso() +
                        " lead " + std::to_string(k.lead));
      }
      ++j;
    }
    grp.end = j;
    grp.mean_row = out.groups_.size();
    std::vector<double> mean(G, 0.0);
    size_t n = 0;
    for (size_t e = i; e < j; ++e) {
      if (out.entries_[e].key.member < 0) continue;
      ++n;
      for (size_t g = 0; g < G; ++g) mean[g] += out.values_[e * G + g];
    }
    grp.has_members = n > 0;
    if (n > 0) {
      for (double& v : mean) v /= static_cast<double>(n);
    } else {
      // Deterministic-only group: member -1 sorts first.
      std::copy_n(out.values_.begin() + static_cast<std::ptrdiff_t>(i * G), G,
                  mean.begin());
    }
    out.means_.insert(out.means_.end(), mean.begin(), mean.end());
    out.group_index_.emplace(group_key(k.issuance, k.lead), out.groups_.size());
    out.groups_.push_back(grp);
    leads.push_back(k.lead);
    i = j;
  }
  std::sort(leads.begin(), leads.end());
  leads.erase(std::unique(leads.begin(), leads.end()), leads.end());
  out.leads_ = std::move(leads);
  return out;
}

const ForecastArchive::Group* ForecastArchive::group(CalendarDate issuance,
                                                     int lead) const {
  if (lead < 0 || lead >= 4096) return nullptr;
  auto it = group_index_.find(group_key(issuance, lead));
  return it == group_index_.end() ? nullptr : &groups_[it->second];
}

std::optional<std::span<const double>> ForecastArchive::find(
    const ForecastKey& key) const {
  const Group* grp = group(key.issuance, key.lead);
  if (!grp) return std::nullopt;
  for (size_t e = grp->begin; e < grp->end; ++e) {
    if (entries_[e].key.member == key.member) return values(e);
  }
  return std::nullopt;
}

std::optional<std::span<const double>> ForecastArchive::ensemble_mean(
    CalendarDate issuance, int lead, EraSelector era) const {
  const Group* grp = group(issuance, lead);
  if (!grp) return std::nullopt;
  if ((era == EraSelector::kReforecast && grp->era != Era::kReforecast) ||
      (era == EraSelector::kForecast && grp->era != Era::kForecast)) {
    return std::nullopt;
  }
  return std::span<const double>(means_.data() + grp->mean_row * grid_.size(),
                                 grid_.size());
}

std::vector<std::span<const double>> ForecastArchive::members(
    CalendarDate issuance, int lead) const {
  std::vector<std::span<const double>> out;
  const Group* grp = group(issuance, lead);
  if (!grp) return out;
  for (size_t e = grp->begin; e < grp->end; ++e) {
    if (entries_[e].key.member >= 0) out.push_back(values(e));
  }
  return out;
}

std::optional<Era> ForecastArchive::era_of(CalendarDate issuance,
                                           int lead) const {
  const Group* grp = group(issuance, lead);
  if (!grp) return std::nullopt;
  return grp->era;
}

std::optional<CalendarDate> ForecastArchive::first_issuance() const {
  if (entries_.empty()) return std::nullopt;
  return entries_.front().key.issuance;
}

std::optional<CalendarDate> ForecastArchive::last_issuance() const {
  if (entries_.empty()) return std::nullopt;
  return entries_.back().key.issuance;
}

bool operator==(const ForecastArchive& a, const ForecastArchive& b) {
  if (!(a.grid_ == b.grid_) || a.entries_.size() != b.entries_.size()) return false;
  for (size_t i = 0; i < a.entries_.size(); ++i) {
    if (!(a.entries_[i].key == b.entries_[i].key) ||
        a.entries_[i].era != b.entries_[i].era) {
      return false;
    }
  }
  return a.values_ == b.values_;
}

}  // namespace subseas
