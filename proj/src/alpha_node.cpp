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

void AlphaParams::validate() const {
  if (window < 1) throw ConfigError("window length must be >= 1, got " + std::to_string(window));
  if (tau < 1) throw ConfigError("tau must be >= 1, got " + std::to_string(tau));
}

AlphaNode::AlphaNode(AlphaParams params) : params_(params) { params_.validate(); }

bool AlphaNode::process(const ProjectedRecord& rec, std::vector<SignificanceUpdate>& out) {
  if (current_ && rec.period < *current_) return false;
  advance_to(rec.period, out);

  Cell& cell = window_[*current_][rec.tile];
  ++cell.count;
  if (params_.retain_points) cell.points.push_back(rec.point.value_or(GeoPoint{}));

  const std::int64_t total = ++totals_[rec.tile];
  if (total == params_.tau) {
    AddTile add{rec.tile, {}};
    if (params_.retain_points) {
      for (const auto& [period, cells] : window_) {
        auto it = cells.find(rec.tile);
        if (it != cells.end()) add.retained.push_back(PeriodPoints{period, it->second.points});
      }
    }
    out.emplace_back(std::move(add));
  } else if (total > params_.tau && params_.retain_points) {
    out.emplace_back(ForwardPoint{rec.tile, *current_, cell.points.back()});
  }
  return true;
}

void AlphaNode::advance_to(PeriodId period, std::vector<SignificanceUpdate>& out) {
  if (!current_) {
    current_ = period;
    return;
  }
  while (*current_ < period) step(out);
}

void AlphaNode::flush(std::vector<SignificanceUpdate>& out) const {
  if (current_) out.emplace_back(Recluster{*current_});
}

void AlphaNode::step(std::vector<SignificanceUpdate>& out) {
  out.emplace_back(Recluster{*current_});
  ++*current_;
  prune(*current_ - params_.window, out);
}

void AlphaNode::prune(PeriodId key, std::vector<SignificanceUpdate>& out) {
  auto expired = window_.find(key);
  if (expired == window_.end()) return;

  // Deterministic emission order regardless of hash layout.
  std::vector<std::pair<Tile, std::int64_t>> cells;
  cells.reserve(expired->second.size());
  for (const auto& [tile, cell] : expired->second) cells.emplace_back(tile, cell.count);
  std::sort(cells.begin(), cells.end());

  for (const auto& [tile, count] : cells) {
    auto it = totals_.find(tile);
    const std::int64_t before = it->second;
    const std::int64_t after = before - count;
    if (before >= params_.tau && after < params_.tau) {
      out.emplace_back(RemoveTile{tile});
    } else if (after >= params_.tau && params_.retain_points) {
      out.emplace_back(ExpirePoints{tile, key});
    }
    if (after == 0) {
      totals_.erase(it);
    } else {
      it->second = after;
    }
  }
  window_.erase(expired);
}

std::vector<Tile> AlphaNode::significant() const {
  return significant_tiles(totals_, params_.tau);
}

std::size_t AlphaNode::window_entries() const noexcept {
  std::size_t n = 0;
  for (const auto& [period, cells] : window_) n += cells.size();
  return n;
}

AlphaStage::AlphaStage(AlphaParams params, LatePolicy policy)
    : node_(params), policy_(policy) {}

void AlphaStage::advance(PeriodId period, std::vector<SignificanceUpdate>& out) {
  if (!first_announced_) first_announced_ = period;
  if (newest_ && period <= *newest_) return;
  newest_ = period;
  if (policy_ == LatePolicy::kDrop) {
    node_.advance_to(period, out);
    return;
  }
  if (period - 1 >= *first_announced_) {
    release_through(period - 1, out);
    node_.advance_to(period - 1, out);
  }
}

void AlphaStage::process(const ProjectedRecord& rec, std::vector<SignificanceUpdate>& out) {
  if (policy_ == LatePolicy::kDrop) {
    if (!node_.process(rec, out)) ++late_dropped_;
    return;
  }
  if (!newest_ || rec.period > *newest_) advance(rec.period, out);
  const auto current = node_.current_period();
  if (current && rec.period <= *current) {
    if (!node_.process(rec, out)) ++late_dropped_;
    return;
  }
  PeriodId oldest = first_announced_.value_or(rec.period);
  if (newest_) oldest = std::max(oldest, *newest_ - 1);
  if (rec.period < oldest) {
    ++late_dropped_;
    return;
  }
  pending_[rec.period].push_back(rec);
}

void AlphaStage::flush(std::vector<SignificanceUpdate>& out) {
  if (policy_ == LatePolicy::kDelayOnePeriod) {
    if (!pending_.empty()) release_through(pending_.rbegin()->first, out);
    if (newest_) node_.advance_to(*newest_, out);
  }
  node_.flush(out);
}

void AlphaStage::release_through(PeriodId period, std::vector<SignificanceUpdate>& out) {
  while (!pending_.empty() && pending_.begin()->first <= period) {
    auto batch = std::move(pending_.begin()->second);
    pending_.erase(pending_.begin());
    for (const ProjectedRecord& rec : batch) {
      if (!node_.process(rec, out)) ++late_dropped_;
    }
  }
}

}  // namespace sraster
