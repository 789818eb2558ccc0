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

#include "sraster/stream_nodes.hpp"

namespace sraster {

std::optional<ProjectedRecord> PiNode::process(const StreamRecord& rec) {
  if (!is_valid(rec.point, bounds_)) {
    ++dropped_;
    return std::nullopt;
  }
  ProjectedRecord out{project(rec.point, prec_, bounds_), rec.period, std::nullopt};
  if (retain_points_) out.point = rec.point;
  return out;
}

int flag_of(const SignificanceUpdate& u) noexcept {
  switch (u.index()) {
    case 0:  // AddTile
    case 3:  // ForwardPoint
      return 1;
    case 1:  // RemoveTile
    case 4:  // ExpirePoints
      return -1;
    default:
      return 0;
  }
}

}  // namespace sraster
