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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sraster/grid.hpp"
#include "sraster/stream_nodes.hpp"

namespace sraster {

/// Whole seconds since 1970-01-01T00:00:00Z.
using Timestamp = std::int64_t;

/// Accepts integer (or decimal) epoch seconds, or RFC 3339 date-times such as
/// "2020-01-03T10:00:00Z" / "2020-01-03T12:00:00.5+02:00". Fractional
/// seconds are floored. Throws Error on malformed text.
Timestamp parse_timestamp(std::string_view text);

/// UTC, second resolution, e.g. "2020-01-01T00:00:00Z".
std::string format_rfc3339(Timestamp t);

/// floor((t - epoch) / period_seconds). Throws RejectedInput if t < epoch.
PeriodId assign_period(Timestamp t, Timestamp epoch, std::int64_t period_seconds);

/// `first` rounded down to a multiple of `period_seconds` since the Unix epoch.
Timestamp aligned_epoch(Timestamp first, std::int64_t period_seconds);

struct IngestConfig {
  std::int64_t period_seconds = 86400;
  std::optional<Timestamp> epoch;  // aligned first timestamp when unset
  char delimiter = ',';
  std::size_t x_column = 0;
  std::size_t y_column = 1;
  std::size_t time_column = 2;

  void validate() const;
};

/// Reads `x,y,timestamp` rows. A first line whose x field is not numeric is
/// taken as a header; blank lines and lines starting with '#' are skipped.
class CsvStreamReader {
 public:
  CsvStreamReader(std::istream& in, IngestConfig cfg);

  /// Next record in file order, or nullopt at end of input. Throws
  /// RejectedInput carrying the 1-based line number.
  std::optional<StreamRecord> next();

  std::optional<Timestamp> epoch() const noexcept { return cfg_.epoch; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::istream& in_;
  IngestConfig cfg_;
  std::size_t line_ = 0;
  bool seen_data_ = false;
  std::string buf_;
};

std::vector<StreamRecord> read_stream(std::istream& in, const IngestConfig& cfg);
std::vector<StreamRecord> read_stream(const std::filesystem::path& path, const IngestConfig& cfg);

/// Reads `x,y[,...]` rows for batch clustering; extra columns are ignored.
std::vector<GeoPoint> read_points(std::istream& in, char delimiter = ',');

/// Splits on `delimiter` and trims surrounding blanks from each field.
std::vector<std::string_view> split_fields(std::string_view line, char delimiter);

/// Strict full-field number parse.
std::optional<double> parse_double(std::string_view text);

}  // namespace sraster
