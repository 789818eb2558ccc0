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

#include "sraster/barrier.hpp"

#include <string>

#include "sraster/errors.hpp"

namespace sraster {

PeriodBarrier::PeriodBarrier(std::size_t lanes)
    : announced_(lanes), closed_(lanes, false), open_(lanes) {
  if (lanes == 0) throw ConfigError("barrier needs at least one lane");
}

std::optional<PeriodId> PeriodBarrier::announce(std::size_t lane, PeriodId period) {
  if (closed_.at(lane)) {
    throw ProtocolError("lane " + std::to_string(lane) + " announced period " +
                        std::to_string(period) + " after closing");
  }
  auto& prev = announced_[lane];
  if (prev && period < *prev) {
    throw ProtocolError("lane " + std::to_string(lane) + " regressed from period " +
                        std::to_string(*prev) + " to " + std::to_string(period));
  }
  if (prev && period == *prev) return std::nullopt;
  prev = period;
  return try_trigger();
}

std::optional<PeriodId> PeriodBarrier::close(std::size_t lane) {
  if (closed_.at(lane)) return std::nullopt;
  closed_[lane] = true;
  --open_;
  return try_trigger();
}

bool PeriodBarrier::ahead(std::size_t lane) const {
  const auto& a = announced_.at(lane);
  return a && (!last_ || *a > *last_);
}

std::optional<PeriodId> PeriodBarrier::try_trigger() {
  std::optional<PeriodId> low;
  std::optional<PeriodId> high;
  for (std::size_t i = 0; i < announced_.size(); ++i) {
    const auto& a = announced_[i];
    if (a && (!high || *a > *high)) high = a;
    if (closed_[i]) continue;
    if (!a) return std::nullopt;
    if (!low || *a < *low) low = a;
  }
  const std::optional<PeriodId> mark = low ? low : high;
  if (!mark || (last_ && *mark <= *last_)) return std::nullopt;
  last_ = mark;
  return last_;
}

}  // namespace sraster
