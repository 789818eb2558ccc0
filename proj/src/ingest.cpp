/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#include <algorithm>
#include <charconv>
#include <fstream>
#include <string>

#include "sraster/errors.hpp"
#include "sraster/ingest.hpp"

namespace sraster {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool skippable(std::string_view line) {
  line = trim(line);
  return line.empty() || line.front() == '#';
}

[[noreturn]] void reject(std::size_t line, const std::string& what) {
  throw RejectedInput(line, "line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::vector<std::string_view> split_fields(std::string_view line, char delimiter) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t end = line.find(delimiter, start);
    out.push_back(trim(line.substr(start, end == std::string_view::npos ? end : end - start)));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

std::optional<double> parse_double(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

void IngestConfig::validate() const {
  if (period_seconds <= 0) {
    throw ConfigError("period length must be > 0 seconds, got " + std::to_string(period_seconds));
  }
}

CsvStreamReader::CsvStreamReader(std::istream& in, IngestConfig cfg) : in_(in), cfg_(cfg) {
  cfg_.validate();
}

std::optional<StreamRecord> CsvStreamReader::next() {
  while (std::getline(in_, buf_)) {
    ++line_;
    if (skippable(buf_)) continue;
    const auto fields = split_fields(buf_, cfg_.delimiter);
    const std::size_t needed =
        std::max({cfg_.x_column, cfg_.y_column, cfg_.time_column}) + 1;
    if (!seen_data_) {
      seen_data_ = true;
      if (!fields.empty() && !parse_double(fields[cfg_.x_column < fields.size() ? cfg_.x_column : 0])) {
        continue;  // header
      }
    }
    if (fields.size() < needed) {
      reject(line_, "expected " + std::to_string(needed) + " fields, got " +
                        std::to_string(fields.size()));
    }
    const auto x = parse_double(fields[cfg_.x_column]);
    const auto y = parse_double(fields[cfg_.y_column]);
    if (!x || !y) reject(line_, "unparseable coordinate");

    Timestamp t = 0;
    try {
      t = parse_timestamp(fields[cfg_.time_column]);
    } catch (const Error& e) {
      reject(line_, e.what());
    }
    if (!cfg_.epoch) cfg_.epoch = aligned_epoch(t, cfg_.period_seconds);
    if (t < *cfg_.epoch) {
      reject(line_, "timestamp " + std::string(fields[cfg_.time_column]) + " precedes epoch " +
                        format_rfc3339(*cfg_.epoch));
    }
    return StreamRecord{GeoPoint{*x, *y}, assign_period(t, *cfg_.epoch, cfg_.period_seconds)};
  }
  return std::nullopt;
}

std::vector<StreamRecord> read_stream(std::istream& in, const IngestConfig& cfg) {
  CsvStreamReader reader(in, cfg);
  std::vector<StreamRecord> out;
  while (auto rec = reader.next()) out.push_back(*rec);
  return out;
}

std::vector<StreamRecord> read_stream(const std::filesystem::path& path, const IngestConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_stream(in, cfg);
}

std::vector<GeoPoint> read_points(std::istream& in, char delimiter) {
  std::vector<GeoPoint> out;
  std::string buf;
  std::size_t line = 0;
  bool seen_data = false;
  while (std::getline(in, buf)) {
    ++line;
    if (skippable(buf)) continue;
    const auto fields = split_fields(buf, delimiter);
    if (!seen_data) {
      seen_data = true;
      if (!parse_double(fields[0])) continue;  // header
    }
    if (fields.size() < 2) {
      reject(line, "expected at least 2 fields, got " + std::to_string(fields.size()));
    }
    const auto x = parse_double(fields[0]);
    const auto y = parse_double(fields[1]);
    if (!x || !y) reject(line, "unparseable coordinate");
    out.push_back(GeoPoint{*x, *y});
  }
  return out;
}

}  // namespace sraster
