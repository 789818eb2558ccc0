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

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <mutex>
#include <optional>
#include <variant>
#include <vector>

#include "sraster/errors.hpp"

namespace sraster {

/// Multi-lane bounded FIFO with a single consumer.
///
/// Every producer owns one lane. Each lane is FIFO and holds at most
/// `capacity` messages; push() blocks while its lane is full. The consumer
/// picks which lanes it is willing to read from on every pop(), which lets it
/// hold back a lane that is ahead of the others without buffering its
/// messages locally.
template <class T>
class Inbox {
 public:
  struct Message {
    std::size_t lane;
    T value;
  };
  struct Closed {
    std::size_t lane;
  };
  using Event = std::variant<Message, Closed>;

  Inbox(std::size_t lanes, std::size_t capacity) : lanes_(lanes), capacity_(capacity) {
    if (lanes == 0) throw ConfigError("inbox needs at least one lane");
    if (capacity == 0) throw ConfigError("channel capacity must be >= 1");
  }

  Inbox(const Inbox&) = delete;
  Inbox& operator=(const Inbox&) = delete;

  /// Returns false if the inbox was cancelled.
  bool push(std::size_t lane, T value) {
    std::unique_lock lock(mu_);
    Lane& l = lanes_.at(lane);
    not_full_.wait(lock, [&] { return cancelled_ || l.queue.size() < capacity_; });
    if (cancelled_) return false;
    if (l.closed) throw ProtocolError("push to closed lane");
    l.queue.push_back(std::move(value));
    ++buffered_;
    if (buffered_ > peak_) peak_ = buffered_;
    lock.unlock();
    not_empty_.notify_one();
    return true;
  }

  void close(std::size_t lane) {
    {
      std::lock_guard lock(mu_);
      lanes_.at(lane).closed = true;
    }
    not_empty_.notify_one();
  }

  /// Wakes every blocked producer and the consumer; all further operations
  /// fail.
  void cancel() {
    {
      std::lock_guard lock(mu_);
      cancelled_ = true;
    }
    not_full_.notify_all();
    not_empty_.notify_all();
  }

  /// Blocks until a lane accepted by `eligible` has a message, or a closed
  /// lane has drained (reported once per lane, regardless of eligibility).
  /// Returns nullopt once every closure has been reported, or on
  /// cancellation.
  template <class Eligible>
  std::optional<Event> pop(Eligible&& eligible) {
    std::unique_lock lock(mu_);
    for (;;) {
      if (cancelled_) return std::nullopt;
      bool pending = false;
      for (std::size_t k = 0; k < lanes_.size(); ++k) {
        const std::size_t i = (next_ + k) % lanes_.size();
        Lane& l = lanes_[i];
        if (l.queue.empty()) {
          if (l.closed && !l.reported) {
            l.reported = true;
            return Event{Closed{i}};
          }
          pending = pending || !l.reported;
          continue;
        }
        pending = true;
        if (!eligible(i)) continue;
        Event ev{Message{i, std::move(l.queue.front())}};
        l.queue.pop_front();
        --buffered_;
        next_ = (i + 1) % lanes_.size();
        lock.unlock();
        not_full_.notify_all();
        return ev;
      }
      if (!pending) return std::nullopt;
      not_empty_.wait(lock);
    }
  }

  std::size_t peak_buffered() const {
    std::lock_guard lock(mu_);
    return peak_;
  }

  std::size_t capacity() const noexcept { return capacity_ * lanes_.size(); }

 private:
  struct Lane {
    std::deque<T> queue;
    bool closed = false;
    bool reported = false;
  };

  mutable std::mutex mu_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::vector<Lane> lanes_;
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::size_t buffered_ = 0;
  std::size_t peak_ = 0;
  bool cancelled_ = false;
};

}  // namespace sraster
