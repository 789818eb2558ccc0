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
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include <absl/container/flat_hash_map.h>

#include "sraster/grid.hpp"
#include "sraster/raster.hpp"

namespace sraster {

/// Integer identifier of a fixed-length time period.
using PeriodId = std::int64_t;

struct StreamRecord {
  GeoPoint point;
  PeriodId period = 0;

  friend bool operator==(const StreamRecord&, const StreamRecord&) = default;
};

/// Output of the projection stage. `point` is only set in point-retaining mode.
struct ProjectedRecord {
  Tile tile;
  PeriodId period = 0;
  std::optional<GeoPoint> point;

  friend bool operator==(const ProjectedRecord&, const ProjectedRecord&) = default;
};

// ---------------------------------------------------------------------------
// Messages from accumulation to clustering.
//
// AddTile / RemoveTile / Recluster carry the flags 1 / -1 / 0. ForwardPoint
// and ExpirePoints only occur in point-retaining mode: the former delivers a
// point that arrives for a tile which is already significant, the latter tells
// the clustering node that a still-significant tile lost the points of a
// pruned period.
// ---------------------------------------------------------------------------

struct PeriodPoints {
  PeriodId period = 0;
  std::vector<GeoPoint> points;

  friend bool operator==(const PeriodPoints&, const PeriodPoints&) = default;
};

struct AddTile {
  Tile tile;
  std::vector<PeriodPoints> retained;  // empty unless retaining points

  friend bool operator==(const AddTile&, const AddTile&) = default;
};

struct RemoveTile {
  Tile tile;
  friend bool operator==(const RemoveTile&, const RemoveTile&) = default;
};

struct Recluster {
  PeriodId period = 0;
  friend bool operator==(const Recluster&, const Recluster&) = default;
};

struct ForwardPoint {
  Tile tile;
  PeriodId period = 0;
  GeoPoint point;
  friend bool operator==(const ForwardPoint&, const ForwardPoint&) = default;
};

struct ExpirePoints {
  Tile tile;
  PeriodId period = 0;
  friend bool operator==(const ExpirePoints&, const ExpirePoints&) = default;
};

using SignificanceUpdate = std::variant<AddTile, RemoveTile, Recluster, ForwardPoint, ExpirePoints>;

/// 1 for tile additions, -1 for removals, 0 for recluster requests.
int flag_of(const SignificanceUpdate& u) noexcept;

/// One output tuple of the clustering node. `point` is set in
/// point-retaining mode, where there is one row per retained point.
struct ClusterRow {
  PeriodId period = 0;
  std::int64_t cluster_id = 0;
  Tile tile;
  double xr = 0.0;
  double yr = 0.0;
  std::optional<GeoPoint> point;

  friend bool operator==(const ClusterRow&, const ClusterRow&) = default;
};

// ---------------------------------------------------------------------------
// Projection
// ---------------------------------------------------------------------------

class PiNode {
 public:
  PiNode(Precision prec, Bounds bounds, bool retain_points)
      : prec_(prec), bounds_(bounds), retain_points_(retain_points) {}

  /// Returns nullopt (and counts the drop) for invalid points.
  std::optional<ProjectedRecord> process(const StreamRecord& rec);

  std::uint64_t dropped() const noexcept { return dropped_; }

 private:
  Precision prec_;
  Bounds bounds_;
  bool retain_points_;
  std::uint64_t dropped_ = 0;
};

// ---------------------------------------------------------------------------
// Accumulation
// ---------------------------------------------------------------------------

struct AlphaParams {
  std::int64_t window = 3;  // c, number of periods kept
  std::int64_t tau = 5;
  bool retain_points = false;

  void validate() const;
};

/// Sliding-window tile counter for one tile partition.
///
/// The window holds the `window` most recent periods
/// (current - window, current]. Every period transition first asks the
/// clustering node to cluster the period that just ended, then prunes the
/// period falling out of the window. Gaps are filled one period at a time.
class AlphaNode {
 public:
  struct Cell {
    std::int64_t count = 0;
    std::vector<GeoPoint> points;  // only in point-retaining mode

    friend bool operator==(const Cell&, const Cell&) = default;
  };
  using PeriodCells = absl::flat_hash_map<Tile, Cell, TileHash>;

  explicit AlphaNode(AlphaParams params);

  /// Counts a record, advancing the window first if it belongs to a later
  /// period. Returns false, leaving the state untouched, if the record is
  /// older than the current period.
  bool process(const ProjectedRecord& rec, std::vector<SignificanceUpdate>& out);

  /// Advances the window to `period` without counting anything. No-op if the
  /// node is already there or beyond.
  void advance_to(PeriodId period, std::vector<SignificanceUpdate>& out);

  /// Requests clustering of the current period. Does not modify state.
  void flush(std::vector<SignificanceUpdate>& out) const;

  std::optional<PeriodId> current_period() const noexcept { return current_; }
  const TileCounts& totals() const noexcept { return totals_; }
  const std::map<PeriodId, PeriodCells>& window() const noexcept { return window_; }
  const AlphaParams& params() const noexcept { return params_; }

  /// Tiles whose windowed count is >= tau, sorted.
  std::vector<Tile> significant() const;

  /// Sum of per-period tile entries.
  std::size_t window_entries() const noexcept;

  friend bool operator==(const AlphaNode& a, const AlphaNode& b) {
    return a.current_ == b.current_ && a.totals_ == b.totals_ && a.window_ == b.window_;
  }

 private:
  void step(std::vector<SignificanceUpdate>& out);
  void prune(PeriodId key, std::vector<SignificanceUpdate>& out);

  AlphaParams params_;
  TileCounts totals_;
  std::map<PeriodId, PeriodCells> window_;
  std::optional<PeriodId> current_;
};

enum class LatePolicy { kDrop, kDelayOnePeriod };

/// Applies the late-record policy in front of an AlphaNode.
///
/// kDrop forwards period advances directly and drops records older than the
/// current period. kDelayOnePeriod keeps the node one period behind the
/// newest announced period, so records up to one period late are still
/// counted; clustering of each period is delayed by one period in exchange.
class AlphaStage {
 public:
  AlphaStage(AlphaParams params, LatePolicy policy);

  /// The newest period announced upstream.
  void advance(PeriodId period, std::vector<SignificanceUpdate>& out);
  void process(const ProjectedRecord& rec, std::vector<SignificanceUpdate>& out);
  void flush(std::vector<SignificanceUpdate>& out);

  const AlphaNode& node() const noexcept { return node_; }
  std::uint64_t late_dropped() const noexcept { return late_dropped_; }

 private:
  void release_through(PeriodId period, std::vector<SignificanceUpdate>& out);

  AlphaNode node_;
  LatePolicy policy_;
  std::optional<PeriodId> first_announced_;
  std::optional<PeriodId> newest_;
  std::map<PeriodId, std::vector<ProjectedRecord>> pending_;
  std::uint64_t late_dropped_ = 0;
};

// ---------------------------------------------------------------------------
// Clustering
// ---------------------------------------------------------------------------

struct KappaParams {
  Precision prec{4};
  Metric metric{};
  std::int64_t mu = 2;
  bool retain_points = false;
};

class KappaNode {
 public:
  explicit KappaNode(KappaParams params) : params_(params) {}

  /// Applies one update. Recluster appends the period's rows to `out`:
  /// clusters in order of their smallest tile, tiles sorted, and in
  /// point-retaining mode points sorted by (x, y).
  /// Throws ConsistencyError for updates that reference unknown tiles or
  /// re-add a known one.
  void apply(const SignificanceUpdate& update, std::vector<ClusterRow>& out);

  /// Current significant tiles, sorted.
  std::vector<Tile> sigma() const;
  bool contains(const Tile& t) const { return sigma_.contains(t); }
  std::size_t size() const noexcept { return sigma_.size(); }

  /// Retained points of a significant tile, sorted by (x, y).
  std::vector<GeoPoint> points_of(const Tile& t) const;

 private:
  using Retained = std::map<PeriodId, std::vector<GeoPoint>>;

  void recluster(PeriodId period, std::vector<ClusterRow>& out) const;
  Retained& at(const Tile& t, const char* what);

  KappaParams params_;
  absl::flat_hash_map<Tile, Retained, TileHash> sigma_;
};

}  // namespace sraster
