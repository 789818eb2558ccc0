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
#include <span>
#include <vector>

#include <absl/container/flat_hash_map.h>
#include <absl/container/flat_hash_set.h>

#include "sraster/errors.hpp"
#include "sraster/grid.hpp"

namespace sraster {

using TileCounts = absl::flat_hash_map<Tile, std::int64_t, TileHash>;
using TileSet = absl::flat_hash_set<Tile, TileHash>;

/// A connected group of significant tiles, sorted lexicographically.
struct TileCluster {
  std::vector<Tile> tiles;

  friend bool operator==(const TileCluster&, const TileCluster&) = default;
};

struct BatchParams {
  Precision prec{4};
  std::int64_t tau = 5;
  Metric metric{};
  std::int64_t mu = 2;
  Bounds bounds{};

  void validate() const;
};

/// Counts points per tile. Each point is touched exactly once, so a counting
/// input range can verify the single-pass property.
class TileAccumulator {
 public:
  TileAccumulator(Precision prec, Bounds bounds) : prec_(prec), bounds_(bounds) {}

  /// Throws RejectedInput carrying the record index on invalid points.
  Tile add(const GeoPoint& p);

  const TileCounts& counts() const noexcept { return counts_; }
  TileCounts take() && { return std::move(counts_); }
  std::size_t consumed() const noexcept { return consumed_; }

 private:
  Precision prec_;
  Bounds bounds_;
  TileCounts counts_;
  std::size_t consumed_ = 0;
};

template <class Range>
TileCounts accumulate(Range&& points, Precision prec, const Bounds& bounds = {}) {
  TileAccumulator acc(prec, bounds);
  for (const GeoPoint& p : points) acc.add(p);
  return std::move(acc).take();
}

/// Tiles with count >= tau, sorted lexicographically.
std::vector<Tile> significant_tiles(const TileCounts& counts, std::int64_t tau);

/// Maximal connected components of `sigma` under `metric`, keeping those with
/// at least `mu` tiles. Seeds are taken in lexicographic order, so clusters
/// come out ordered by their smallest tile. Duplicate input tiles are ignored.
std::vector<TileCluster> cluster_tiles(std::span<const Tile> sigma, const Metric& metric,
                                       std::int64_t mu);

std::vector<TileCluster> raster(std::span<const GeoPoint> points, const BatchParams& params);

/// Cluster member that keeps the original points projected onto its tile.
struct RetainedTile {
  Tile tile;
  std::vector<GeoPoint> points;  // input order
};

struct RetainedCluster {
  std::vector<RetainedTile> members;  // tile order matches TileCluster
};

/// Point-retaining variant: same clusters as raster(), each tile carrying the
/// multiset of its input points.
std::vector<RetainedCluster> raster_prime(std::span<const GeoPoint> points,
                                          const BatchParams& params);

}  // namespace sraster
