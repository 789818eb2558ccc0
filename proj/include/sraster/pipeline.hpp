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
#include <functional>
#include <memory>
#include <span>

#include "sraster/raster.hpp"
#include "sraster/stream_nodes.hpp"

namespace sraster {

struct PipelineConfig {
  std::size_t num_pi = 1;
  std::size_t num_alpha = 1;
  BatchParams params{};
  std::int64_t window = 3;
  bool retain_points = false;
  LatePolicy late_policy = LatePolicy::kDrop;
  std::size_t channel_capacity = 64;  // messages per lane
  std::size_t chunk_size = 256;       // records per source/projection message

  void validate() const;
};

struct PipelineStats {
  std::uint64_t records_in = 0;
  std::uint64_t invalid_dropped = 0;
  std::uint64_t late_dropped = 0;
  std::uint64_t periods_clustered = 0;
  std::uint64_t rows_emitted = 0;
  std::size_t peak_buffered = 0;    // sum of per-channel peaks, in messages
  std::size_t buffer_capacity = 0;  // sum of channel capacities, in messages
};

/// Receives the rows of every clustered period, in increasing period order,
/// on the clustering thread. Periods without clusters are reported with an
/// empty span.
using RowSink = std::function<void(PeriodId, std::span<const ClusterRow>)>;

/// Optional inspection hooks, mostly for verification.
struct PipelineProbe {
  /// Clustering thread, right after a period was clustered.
  std::function<void(PeriodId, const KappaNode&)> on_recluster;
  /// Accumulation thread `index`, after its final flush.
  std::function<void(std::size_t, const AlphaStage&)> on_alpha_done;
};

/// Raised by Pipeline::push/finish when a stage failed. The message names
/// the stage.
class PipelineError : public Error {
 public:
  using Error::Error;
};

/// Stable assignment of tiles to accumulation partitions, in [0, n).
std::size_t partition_key(const Tile& t, std::size_t n);

/// Source -> projection workers -> accumulation partitions -> clustering ->
/// sink, connected by bounded FIFO channels.
///
/// Records are dealt to projection workers round-robin; projected records
/// are routed by partition_key. Whenever the source sees a new maximum
/// period it broadcasts the period through every projection worker to every
/// partition, so all partitions step through the same periods. Both the
/// partitions (over their projection inputs) and the clustering node (over
/// the partitions) use PeriodBarrier to keep periods from interleaving.
class Pipeline {
 public:
  Pipeline(PipelineConfig cfg, RowSink sink, PipelineProbe probe = {});
  ~Pipeline();

  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  /// Blocks when the first channel is full. Throws PipelineError if a stage
  /// has failed.
  void push(const StreamRecord& rec);

  /// Signals end of input, waits for every stage and returns the counters.
  PipelineStats finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

template <class Range>
PipelineStats run_pipeline(const PipelineConfig& cfg, Range&& source, RowSink sink,
                           PipelineProbe probe = {}) {
  Pipeline p(cfg, std::move(sink), std::move(probe));
  for (const StreamRecord& rec : source) p.push(rec);
  return p.finish();
}

}  // namespace sraster
