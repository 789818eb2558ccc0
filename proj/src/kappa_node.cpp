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
#include <string>

#include "sraster/errors.hpp"
#include "sraster/stream_nodes.hpp"

namespace sraster {

namespace {

std::string tile_text(const Tile& t) {
  return "(" + std::to_string(t.xp) + ", " + std::to_string(t.yp) + ")";
}

}  // namespace

KappaNode::Retained& KappaNode::at(const Tile& t, const char* what) {
  auto it = sigma_.find(t);
  if (it == sigma_.end()) {
    throw ConsistencyError(std::string(what) + " for tile " + tile_text(t) +
                           " which is not significant");
  }
  return it->second;
}

void KappaNode::apply(const SignificanceUpdate& update, std::vector<ClusterRow>& out) {
  std::visit(
      [&](const auto& u) {
        using T = std::decay_t<decltype(u)>;
        if constexpr (std::is_same_v<T, AddTile>) {
          auto [it, inserted] = sigma_.try_emplace(u.tile);
          if (!inserted) {
            throw ConsistencyError("duplicate add of tile " + tile_text(u.tile));
          }
          if (params_.retain_points) {
            for (const PeriodPoints& batch : u.retained) {
              auto& dst = it->second[batch.period];
              dst.insert(dst.end(), batch.points.begin(), batch.points.end());
            }
          }
        } else if constexpr (std::is_same_v<T, RemoveTile>) {
          at(u.tile, "remove");
          sigma_.erase(u.tile);
        } else if constexpr (std::is_same_v<T, ForwardPoint>) {
          at(u.tile, "forwarded point")[u.period].push_back(u.point);
        } else if constexpr (std::is_same_v<T, ExpirePoints>) {
          at(u.tile, "expiry").erase(u.period);
        } else {
          recluster(u.period, out);
        }
      },
      update);
}

void KappaNode::recluster(PeriodId period, std::vector<ClusterRow>& out) const {
  const std::vector<Tile> tiles = sigma();
  std::int64_t id = 0;
  for (const TileCluster& cluster : cluster_tiles(tiles, params_.metric, params_.mu)) {
    for (const Tile& t : cluster.tiles) {
      const auto [xr, yr] = rescale(t, params_.prec);
      if (!params_.retain_points) {
        out.push_back(ClusterRow{period, id, t, xr, yr, std::nullopt});
        continue;
      }
      for (const GeoPoint& p : points_of(t)) {
        out.push_back(ClusterRow{period, id, t, xr, yr, p});
      }
    }
    ++id;
  }
}

std::vector<Tile> KappaNode::sigma() const {
  std::vector<Tile> out;
  out.reserve(sigma_.size());
  for (const auto& [tile, retained] : sigma_) out.push_back(tile);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<GeoPoint> KappaNode::points_of(const Tile& t) const {
  std::vector<GeoPoint> out;
  auto it = sigma_.find(t);
  if (it == sigma_.end()) return out;
  for (const auto& [period, points] : it->second) out.insert(out.end(), points.begin(), points.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace sraster
