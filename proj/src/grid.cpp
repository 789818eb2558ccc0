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

#include "sraster/grid.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "sraster/errors.hpp"

namespace sraster {

namespace {

std::int64_t pow10(int digits) {
  std::int64_t s = 1;
  for (int i = 0; i < digits; ++i) s *= 10;
  return s;
}

std::int64_t scale_axis(double v, std::int64_t scale) {
  const double s = v * static_cast<double>(scale);
  const double up = std::ceil(s);
  // 4 ulps of slack absorbs the representation error of decimal inputs.
  const double slack = 4.0 * (std::nextafter(std::fabs(s), std::numeric_limits<double>::infinity()) -
                              std::fabs(s));
  const double floored = (up - s) <= slack ? up : std::floor(s);
  return static_cast<std::int64_t>(floored);
}

}  // namespace

Precision::Precision(int digits) : digits_(digits), scale_(1) {
  if (digits < 0 || digits > kMaxDigits) {
    throw ConfigError("precision must be in [0, " + std::to_string(kMaxDigits) +
                      "], got " + std::to_string(digits));
  }
  scale_ = pow10(digits);
}

void Metric::validate() const {
  if (delta < 1) {
    throw ConfigError("neighborhood distance must be >= 1, got " + std::to_string(delta));
  }
}

std::size_t Metric::neighborhood_size() const noexcept {
  const std::size_t d = static_cast<std::size_t>(delta);
  if (kind == MetricKind::kChebyshev) return (2 * d + 1) * (2 * d + 1) - 1;
  return 2 * d * (d + 1);
}

std::int64_t Metric::distance(const Tile& a, const Tile& b) const noexcept {
  const std::int64_t dx = a.xp > b.xp ? a.xp - b.xp : b.xp - a.xp;
  const std::int64_t dy = a.yp > b.yp ? a.yp - b.yp : b.yp - a.yp;
  return kind == MetricKind::kChebyshev ? std::max(dx, dy) : dx + dy;
}

bool Bounds::contains(const GeoPoint& p) const noexcept {
  return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
}

bool is_valid(const GeoPoint& p, const Bounds& bounds) noexcept {
  return std::isfinite(p.x) && std::isfinite(p.y) && bounds.contains(p);
}

Tile project(const GeoPoint& p, Precision prec, const Bounds& bounds) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    throw RejectedInput(0, "non-finite coordinate");
  }
  if (!bounds.contains(p)) {
    throw RejectedInput(0, "coordinate outside bounds");
  }
  return Tile{scale_axis(p.x, prec.scale()), scale_axis(p.y, prec.scale())};
}

std::pair<double, double> rescale(const Tile& t, Precision prec) noexcept {
  const double s = static_cast<double>(prec.scale());
  return {static_cast<double>(t.xp) / s, static_cast<double>(t.yp) / s};
}

std::vector<Tile> neighbors(const Tile& t, const Metric& m) {
  std::vector<Tile> out;
  out.reserve(m.neighborhood_size());
  for_each_neighbor(t, m, [&](const Tile& n) { out.push_back(n); });
  return out;
}

}  // namespace sraster
