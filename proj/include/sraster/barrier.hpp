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
#include <optional>
#include <vector>

#include "sraster/stream_nodes.hpp"

namespace sraster {

/// Min-watermark over a fixed set of upstream lanes.
///
/// Each lane announces non-decreasing periods. A trigger for period q fires
/// once every open lane has announced q or later; closed lanes stop holding
/// the watermark back. Triggers are strictly increasing, and each period
/// fires at most once.
///
/// A lane whose announcement is beyond the last trigger is "ahead": its
/// consumer must not read further messages from it until the others catch
/// up, otherwise messages of the next period would be mixed into the current
/// one.
class PeriodBarrier {
 public:
  explicit PeriodBarrier(std::size_t lanes);

  /// Throws ProtocolError if `period` regresses for `lane` or the lane is
  /// closed.
  std::optional<PeriodId> announce(std::size_t lane, PeriodId period);

  /// Marks a lane finished. May release a trigger.
  std::optional<PeriodId> close(std::size_t lane);

  bool ahead(std::size_t lane) const;
  bool closed(std::size_t lane) const { return closed_.at(lane); }
  bool all_closed() const noexcept { return open_ == 0; }

  std::optional<PeriodId> last_triggered() const noexcept { return last_; }
  std::optional<PeriodId> announced(std::size_t lane) const { return announced_.at(lane); }
  std::size_t lanes() const noexcept { return announced_.size(); }

 private:
  std::optional<PeriodId> try_trigger();

  std::vector<std::optional<PeriodId>> announced_;
  std::vector<bool> closed_;
  std::size_t open_;
  std::optional<PeriodId> last_;
};

}  // namespace sraster
