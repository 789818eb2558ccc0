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

#include <cstdint>
#include <string_view>
#include <vector>

#include "sraster/grid.hpp"
#include "sraster/ingest.hpp"
#include "sraster/stream_nodes.hpp"

namespace sraster {

/// xoshiro256** seeded through splitmix64. Output is fully specified, so
/// generated streams are identical on every platform; the standard library
/// distributions are avoided for the same reason.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed);

  std::uint64_t next() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Standard normal via Box-Muller (both variates used).
  double normal() noexcept;
  /// Uniform integer in [0, n) by multiply-shift.
  std::uint64_t below(std::uint64_t n) noexcept;

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct HubSpec {
  GeoPoint center;
  double stddev = 0.0001;
  std::int64_t points_per_period = 50;
  PeriodId start = 0;  // first live period
  PeriodId end = 0;    // one past the last live period
  GeoPoint drift{0.0, 0.0};  // center displacement per period

  GeoPoint center_at(PeriodId period) const noexcept;
};

struct GeneratorSpec {
  std::uint64_t seed = 1;
  std::int64_t num_periods = 10;
  std::int64_t period_seconds = 86400;
  Timestamp epoch = 1577836800;  // 2020-01-01T00:00:00Z
  std::int64_t noise_per_period = 0;
  Bounds noise_bounds{};
  std::vector<HubSpec> hubs;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Parses the JSON form of a GeneratorSpec. Unknown keys are rejected.
GeneratorSpec parse_generator_spec(std::string_view json_text);

struct GeneratedRecord {
  GeoPoint point;
  Timestamp timestamp = 0;
  PeriodId period = 0;

  friend bool operator==(const GeneratedRecord&, const GeneratedRecord&) = default;
};

struct TruthRow {
  PeriodId period = 0;
  std::size_t hub = 0;
  GeoPoint center;

  friend bool operator==(const TruthRow&, const TruthRow&) = default;
};

struct GeneratedStream {
  std::vector<GeneratedRecord> records;  // non-decreasing timestamps
  std::vector<TruthRow> truth;           // by period, then hub index

  std::vector<StreamRecord> stream() const;
};

/// Per period, every live hub emits its points from a Gaussian around its
/// (drifted) center and noise points are drawn uniformly from the noise
/// bounds. The period's points are shuffled and spread evenly over the
/// period's time span.
GeneratedStream generate(const GeneratorSpec& spec);

}  // namespace sraster
