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
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sraster/raster.hpp"
#include "sraster/stream_nodes.hpp"

namespace sraster {

enum class OutputFormat { kCsv, kGeoJson };

/// Exact decimal text of v / 10^prec with `prec` fraction digits, e.g.
/// (-10001, 4) -> "-1.0001".
std::string format_scaled(std::int64_t v, Precision prec);

/// Shortest text that parses back to the same double.
std::string format_real(double v);

/// Rows for batch results: cluster ids in cluster order, period 0.
std::vector<ClusterRow> rows_from_clusters(const std::vector<TileCluster>& clusters, Precision prec);
std::vector<ClusterRow> rows_from_clusters(const std::vector<RetainedCluster>& clusters,
                                           Precision prec);

/// Writes cluster rows as CSV or as a GeoJSON FeatureCollection.
///
/// CSV columns: [period,]cluster_id,tile_x,tile_y[,x,y]. Tile coordinates
/// use exactly `prec` fraction digits. GeoJSON has one Feature per cluster
/// and period, with the cluster's tiles as a MultiPoint and properties
/// {period, cluster_id, tile_count[, point_count]}.
class RowWriter {
 public:
  virtual ~RowWriter() = default;
  /// Writes one period (or the whole batch result when `period` is unset).
  virtual void write(std::optional<PeriodId> period, std::span<const ClusterRow> rows) = 0;
  virtual void finish() = 0;
};

std::unique_ptr<RowWriter> make_row_writer(OutputFormat format, std::ostream& out, Precision prec,
                                           bool with_period, bool retain_points);

/// A parsed CSV output row.
struct OutputRow {
  std::optional<PeriodId> period;
  std::int64_t cluster_id = 0;
  double xr = 0.0;
  double yr = 0.0;
  std::optional<GeoPoint> point;

  friend bool operator==(const OutputRow&, const OutputRow&) = default;
};

/// Parses CSV written by make_row_writer; the header selects the columns.
std::vector<OutputRow> parse_output_csv(std::istream& in);

}  // namespace sraster
