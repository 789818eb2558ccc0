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
#include <stdexcept>
#include <string>

namespace sraster {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters (thresholds, precision, window length, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A single input record could not be accepted. `index` is the zero-based
/// record index or the one-based line number, depending on the producer.
class RejectedInput : public Error {
 public:
  RejectedInput(std::size_t index, const std::string& what)
      : Error(what), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// A node received a message sequence that cannot occur in a correctly wired
/// pipeline (e.g. removing a tile that was never added).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Watermark regression or similar ordering violation between nodes.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace sraster
