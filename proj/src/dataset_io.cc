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

#include "subseas/dataset_io.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "subseas/error.h"

namespace subseas {
namespace {

constexpr std::string_view kForecastHeader =
    "issuance_date,target_date,lead_days,member,lat,lon,value,era";

struct LineReader {
  explicit LineReader(std::string text) : text_(std::move(text)) {}

  // Returns false at end of input. Strips a trailing '\r'.
  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    size_t end = text_.find('\n', pos_);
    if (end == std::string::npos) end = text_.size();
    line = std::string_view(text_).substr(pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = end + 1;
    ++number_;
    return true;
  }
  size_t number() const { return number_; }

 private:
  std::string text_;
  size_t pos_ = 0;
  size_t number_ = 0;
};

int parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("malformed integer '" + std::string(s) + "'");
  }
  return v;
}

template <typename Fn>
auto at_line(const std::string& path, size_t line, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(path, line, e.what());
  }
}

std::string grid_point_text(const GridPoint& p) {
  return "(" + format_double(p.lat) + ", " + format_double(p.lon) + ")";
}

// Resolves a point against the reference grid or appends it to `points`.
size_t resolve_point(GridPoint p, const Grid* reference,
                     std::vector<GridPoint>& points,
                     std::map<std::pair<double, double>, size_t>& seen) {
  if (reference) {
    auto idx = reference->index_of(p);
    if (!idx) throw DataError("grid point " + grid_point_text(p) + " not in grid");
    return *idx;
  }
  auto [it, inserted] = seen.emplace(std::make_pair(p.lat, p.lon), points.size());
  if (inserted) points.push_back(p);
  return it->second;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw DataError("malformed number '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename '" + tmp + "' to '" + path + "'");
  }
}

FieldSeries load_observations(const std::string& path, const Grid* reference,
                              std::string_view value_column) {
  LineReader reader(read_file(path));
  std::string_view line;
  const std::string header = "date,lat,lon," + std::string(value_column);
  if (!reader.next(line) || line != header) {
    throw ParseError(path, 1, "expected header '" + header + "'");
  }

  struct Cell {
    int64_t ordinal;
    size_t point;
    double value;
    bool present;
  };
  std::vector<Cell> cells;
  std::vector<GridPoint> points;
  std::map<std::pair<double, double>, size_t> seen;
  while (reader.next(line)) {
    if (line.empty()) continue;
    const size_t n = reader.number();
    at_line(path, n, [&] {
      auto f = split_csv_line(line);
      if (f.size() != 4) throw DataError("expected 4 fields, got " + std::to_string(f.size()));
      const CalendarDate d = CalendarDate::Parse(f[0]);
      const GridPoint p{parse_double(f[1]), parse_double(f[2])};
      const size_t g = resolve_point(p, reference, points, seen);
      const bool present = !f[3].empty();
      const double v = present ? parse_double(f[3]) : 0.0;
      if (present && !std::isfinite(v)) throw DataError("non-finite value");
      cells.push_back({d.ordinal(), g, v, present});
    });
  }

  Grid grid = reference ? *reference : Grid(points);
  const size_t G = grid.size();
  std::vector<int64_t> ordinals;
  ordinals.reserve(cells.size());
  for (const Cell& c : cells) ordinals.push_back(c.ordinal);
  std::sort(ordinals.begin(), ordinals.end());
  ordinals.erase(std::unique(ordinals.begin(), ordinals.end()), ordinals.end());

  std::vector<double> values(ordinals.size() * G, 0.0);
  std::vector<uint8_t> present(ordinals.size() * G, 0);
  std::vector<uint8_t> filled(ordinals.size() * G, 0);
  for (size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    const size_t r = static_cast<size_t>(
        std::lower_bound(ordinals.begin(), ordinals.end(), c.ordinal) -
        ordinals.begin());
    const size_t idx = r * G + c.point;
    if (filled[idx]) {
      throw DataError(path + ": duplicate observation for " +
                      CalendarDate::FromOrdinal(c.ordinal).iso() + " at " +
                      grid_point_text(grid[c.point]));
    }
    filled[idx] = 1;
    values[idx] = c.value;
    present[idx] = c.present ? 1 : 0;
  }
  std::vector<CalendarDate> dates;
  dates.reserve(ordinals.size());
  for (int64_t o : ordinals) dates.push_back(CalendarDate::FromOrdinal(o));
  return FieldSeries(std::move(grid), std::move(dates), std::move(values),
                     std::move(present));
}

void store_observations(const FieldSeries& series, const std::string& path,
                        std::string_view value_column) {
  std::string out = "date,lat,lon," + std::string(value_column) + "\n";
  const Grid& grid = series.grid();
  for (size_t r = 0; r < series.num_dates(); ++r) {
    const std::string date = series.date(r).iso();
    for (size_t g = 0; g < grid.size(); ++g) {
      out += date;
      out += ',';
      out += format_double(grid[g].lat);
      out += ',';
      out += format_double(grid[g].lon);
      out += ',';
      if (series.present(r, g)) out += format_double(series.at(r, g));
      out += '\n';
    }
  }
  write_file_atomic(path, out);
}

ForecastArchive load_forecasts(const std::string& path, const Grid* reference) {
  LineReader reader(read_file(path));
  std::string_view line;
  if (!reader.next(line) || line != kForecastHeader) {
    throw ParseError(path, 1, "expected header '" + std::string(kForecastHeader) + "'");
  }

  struct Pending {
    Era era;
    std::vector<double> values;
    std::vector<uint8_t> filled;
    size_t first_line;
  };
  std::map<ForecastKey, size_t> index;
  std::vector<ForecastKey> keys;
  std::vector<Pending> pending;
  std::vector<GridPoint> points;
  std::map<std::pair<double, double>, size_t> seen;
  struct Row {
    size_t entry;
    size_t point;
    double value;
    size_t line;
  };
  std::vector<Row> rows;

  while (reader.next(line)) {
    if (line.empty()) continue;
    const size_t n = reader.number();
    at_line(path, n, [&] {
      auto f = split_csv_line(line);
      if (f.size() != 8) throw DataError("expected 8 fields, got " + std::to_string(f.size()));
      ForecastKey key{CalendarDate::Parse(f[0]), parse_int(f[2]), parse_int(f[3])};
      const CalendarDate target = CalendarDate::Parse(f[1]);
      if (key.target() != target) {
        throw DataError("target_date != issuance_date + lead_days");
      }
      if (key.lead < 0) throw DataError("negative lead");
      if (key.member < kDeterministicMember) throw DataError("member must be >= -1");
      const GridPoint p{parse_double(f[4]), parse_double(f[5])};
      const size_t g = resolve_point(p, reference, points, seen);
      const double v = parse_double(f[6]);
      if (!std::isfinite(v)) throw DataError("non-finite value");
      const Era era = parse_era(f[7]);
      auto [it, inserted] = index.emplace(key, pending.size());
      if (inserted) {
        keys.push_back(key);
        pending.push_back({era, {}, {}, n});
      } else if (pending[it->second].era != era) {
        throw DataError("era differs between rows of the same forecast");
      }
      rows.push_back({it->second, g, v, n});
    });
  }

  Grid grid = reference ? *reference : Grid(points);
  const size_t G = grid.size();
  for (Pending& p : pending) {
    p.values.assign(G, 0.0);
    p.filled.assign(G, 0);
  }
  for (const Row& r : rows) {
    Pending& p = pending[r.entry];
    if (p.filled[r.point]) {
      const ForecastKey& k = keys[r.entry];
      throw ParseError(path, r.line,
                       "duplicate forecast key (" + k.issuance.iso() + ", " +
                           std::to_string(k.lead) + ", " + std::to_string(k.member) +
                           ") at " + grid_point_text(grid[r.point]));
    }
    p.filled[r.point] = 1;
    p.values[r.point] = r.value;
  }
  ForecastArchive::Builder builder(grid);
  for (size_t i = 0; i < pending.size(); ++i) {
    const Pending& p = pending[i];
    if (std::find(p.filled.begin(), p.filled.end(), 0) != p.filled.end()) {
      throw ParseError(path, p.first_line, "forecast entry does not cover every grid point");
    }
    builder.add(keys[i], p.era, p.values);
  }
  return std::move(builder).build();
}

void store_forecasts(const ForecastArchive& archive, const std::string& path) {
  std::string out(kForecastHeader);
  out += '\n';
  const Grid& grid = archive.grid();
  for (size_t i = 0; i < archive.size(); ++i) {
    const auto& e = archive.entry(i);
    const std::string prefix = e.key.issuance.iso() + "," + e.key.target().iso() +
                               "," + std::to_string(e.key.lead) + "," +
                               std::to_string(e.key.member) + ",";
    const std::string era(era_name(e.era));
    auto vals = archive.values(i);
    for (size_t g = 0; g < grid.size(); ++g) {
      out += prefix;
      out += format_double(grid[g].lat);
      out += ',';
      out += format_double(grid[g].lon);
      out += ',';
      out += format_double(vals[g]);
      out += ',';
      out += era;
      out += '\n';
    }
  }
  write_file_atomic(path, out);
}

}  // namespace subseas
