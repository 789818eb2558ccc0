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

#include "sraster/raster.hpp"

#include <algorithm>
#include <string>

namespace sraster {

void BatchParams::validate() const {
  if (tau < 1) throw ConfigError("tau must be >= 1, got " + std::to_string(tau));
  if (mu < 1) throw ConfigError("mu must be >= 1, got " + std::to_string(mu));
  metric.validate();
}

Tile TileAccumulator::add(const GeoPoint& p) {
  const std::size_t index = consumed_++;
  Tile t;
  try {
    t = project(p, prec_, bounds_);
  } catch (const RejectedInput& e) {
    throw RejectedInput(index, "record " + std::to_string(index) + ": " + e.what());
  }
  ++counts_[t];
  return t;
}

std::vector<Tile> significant_tiles(const TileCounts& counts, std::int64_t tau) {
  std::vector<Tile> out;
  for (const auto& [tile, count] : counts) {
    if (count >= tau) out.push_back(tile);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<TileCluster> cluster_tiles(std::span<const Tile> sigma, const Metric& metric,
                                       std::int64_t mu) {
  std::vector<Tile> seeds(sigma.begin(), sigma.end());
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

  TileSet remaining(seeds.begin(), seeds.end());
  std::vector<TileCluster> clusters;
  std::vector<Tile> stack;

  for (const Tile& seed : seeds) {
    if (remaining.erase(seed) == 0) continue;
    TileCluster cluster;
    stack.push_back(seed);
    while (!stack.empty()) {
      const Tile u = stack.back();
      stack.pop_back();
      cluster.tiles.push_back(u);
      for_each_neighbor(u, metric, [&](const Tile& n) {
        if (remaining.erase(n) != 0) stack.push_back(n);
      });
    }
    if (static_cast<std::int64_t>(cluster.tiles.size()) >= mu) {
      std::sort(cluster.tiles.begin(), cluster.tiles.end());
      clusters.push_back(std::move(cluster));
    }
  }
  return clusters;
}

std::vector<TileCluster> raster(std::span<const GeoPoint> points, const BatchParams& params) {
  params.validate();
  const TileCounts counts = accumulate(points, params.prec, params.bounds);
  const std::vector<Tile> sigma = significant_tiles(counts, params.tau);
  return cluster_tiles(sigma, params.metric, params.mu);
}

std::vector<RetainedCluster> raster_prime(std::span<const GeoPoint> points,
                                          const BatchParams& params) {
  params.validate();
  TileAccumulator acc(params.prec, params.bounds);
  absl::flat_hash_map<Tile, std::vector<GeoPoint>, TileHash> retained;
  for (const GeoPoint& p : points) retained[acc.add(p)].push_back(p);

  const std::vector<Tile> sigma = significant_tiles(acc.counts(), params.tau);
  std::vector<RetainedCluster> out;
  for (TileCluster& cluster : cluster_tiles(sigma, params.metric, params.mu)) {
    RetainedCluster rc;
    rc.members.reserve(cluster.tiles.size());
    for (const Tile& t : cluster.tiles) {
      rc.members.push_back(RetainedTile{t, std::move(retained.at(t))});
    }
    out.push_back(std::move(rc));
  }
  return out;
}

}  // namespace sraster
