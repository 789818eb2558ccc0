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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace sraster {

struct GeoPoint {
  double x = 0.0;  // longitude
  double y = 0.0;  // latitude

  friend auto operator<=>(const GeoPoint&, const GeoPoint&) = default;
};

struct Tile {
  std::int64_t xp = 0;
  std::int64_t yp = 0;

  friend auto operator<=>(const Tile&, const Tile&) = default;
};

struct TileHash {
  std::size_t operator()(const Tile& t) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(t.xp) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(t.yp) + 0x632BE59BD9B4E019ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

/// Number of decimal digits kept after the point; the grid spacing is
/// 10^-digits.
class Precision {
 public:
  static constexpr int kMaxDigits = 15;

  explicit Precision(int digits = 4);

  int digits() const noexcept { return digits_; }
  std::int64_t scale() const noexcept { return scale_; }

  friend bool operator==(const Precision&, const Precision&) = default;

 private:
  int digits_;
  std::int64_t scale_;
};

enum class MetricKind { kManhattan, kChebyshev };

struct Metric {
  MetricKind kind = MetricKind::kChebyshev;
  int delta = 1;

  void validate() const;
  /// Closed-form size of the neighborhood (center excluded).
  std::size_t neighborhood_size() const noexcept;
  std::int64_t distance(const Tile& a, const Tile& b) const noexcept;
};

struct Bounds {
  double min_x = -180.0;
  double max_x = 180.0;
  double min_y = -90.0;
  double max_y = 90.0;

  bool contains(const GeoPoint& p) const noexcept;
};

/// True when both coordinates are finite and inside `bounds`.
bool is_valid(const GeoPoint& p, const Bounds& bounds = {}) noexcept;

/// Maps a point onto the grid: (floor(x * 10^prec), floor(y * 10^prec)).
/// Products within a few ulps below an integer snap to that integer, so that
/// decimal inputs such as 0.29 land on the tile their text denotes.
/// Throws RejectedInput(0, ...) for non-finite or out-of-bounds points.
Tile project(const GeoPoint& p, Precision prec, const Bounds& bounds = {});

/// Lower-left corner of the tile in real coordinates.
std::pair<double, double> rescale(const Tile& t, Precision prec) noexcept;

/// Calls `fn(Tile)` for every tile at distance 1..delta from `t`, in
/// row-major order. No allocation.
template <class Fn>
void for_each_neighbor(const Tile& t, const Metric& m, Fn&& fn) {
  const std::int64_t d = m.delta;
  for (std::int64_t dx = -d; dx <= d; ++dx) {
    const std::int64_t span =
        m.kind == MetricKind::kChebyshev ? d : d - (dx < 0 ? -dx : dx);
    for (std::int64_t dy = -span; dy <= span; ++dy) {
      if (dx == 0 && dy == 0) continue;
      fn(Tile{t.xp + dx, t.yp + dy});
    }
  }
}

std::vector<Tile> neighbors(const Tile& t, const Metric& m);

}  // namespace sraster
