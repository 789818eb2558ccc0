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

#include "sraster/pipeline.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "sraster/barrier.hpp"
#include "sraster/channel.hpp"

namespace sraster {

void PipelineConfig::validate() const {
  params.validate();
  AlphaParams{window, params.tau, retain_points}.validate();
  if (num_pi < 1) throw ConfigError("number of projection workers must be >= 1");
  if (num_alpha < 1) throw ConfigError("number of accumulation partitions must be >= 1");
  if (channel_capacity < 1) throw ConfigError("channel capacity must be >= 1");
  if (chunk_size < 1) throw ConfigError("chunk size must be >= 1");
}

std::size_t partition_key(const Tile& t, std::size_t n) {
  // splitmix64 finalizer over both coordinates; fixed across builds.
  std::uint64_t z = static_cast<std::uint64_t>(t.xp) * 0x9E3779B97F4A7C15ULL ^
                    static_cast<std::uint64_t>(t.yp);
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return static_cast<std::size_t>(z % n);
}

namespace {

struct PeriodAdvance {
  PeriodId period;
};

using PiMessage = std::variant<std::vector<StreamRecord>, PeriodAdvance>;
using AlphaMessage = std::variant<std::vector<ProjectedRecord>, PeriodAdvance>;
// Each message holds at most one Recluster, and only as its last element.
using KappaMessage = std::vector<SignificanceUpdate>;

}  // namespace

struct Pipeline::Impl {
  PipelineConfig cfg;
  RowSink sink;
  PipelineProbe probe;

  std::vector<std::unique_ptr<Inbox<PiMessage>>> pi_inboxes;
  std::vector<std::unique_ptr<Inbox<AlphaMessage>>> alpha_inboxes;
  std::unique_ptr<Inbox<KappaMessage>> kappa_inbox;
  std::vector<std::thread> threads;

  std::mutex error_mu;
  std::string error;
  std::atomic<bool> failed{false};

  std::atomic<std::uint64_t> invalid_dropped{0};
  std::atomic<std::uint64_t> late_dropped{0};
  std::uint64_t periods_clustered = 0;  // written by the clustering thread
  std::uint64_t rows_emitted = 0;

  // Source state.
  std::vector<StreamRecord> chunk;
  std::optional<PeriodId> newest;
  std::size_t next_pi = 0;
  std::uint64_t records_in = 0;
  bool finished = false;

  Impl(PipelineConfig c, RowSink s, PipelineProbe p)
      : cfg(std::move(c)), sink(std::move(s)), probe(std::move(p)) {}

  void fail(const std::string& stage, const std::string& what) {
    {
      std::lock_guard lock(error_mu);
      if (error.empty()) error = stage + ": " + what;
    }
    failed = true;
    for (auto& in : pi_inboxes) in->cancel();
    for (auto& in : alpha_inboxes) in->cancel();
    kappa_inbox->cancel();
  }

  [[noreturn]] void raise() {
    std::lock_guard lock(error_mu);
    throw PipelineError(error.empty() ? "pipeline cancelled" : error);
  }

  template <class Fn>
  void spawn(std::string stage, Fn fn) {
    threads.emplace_back([this, stage = std::move(stage), fn = std::move(fn)]() mutable {
      try {
        fn();
      } catch (const std::exception& e) {
        fail(stage, e.what());
      } catch (...) {
        fail(stage, "unknown error");
      }
    });
  }

  void start() {
    for (std::size_t i = 0; i < cfg.num_pi; ++i) {
      pi_inboxes.push_back(std::make_unique<Inbox<PiMessage>>(1, cfg.channel_capacity));
    }
    for (std::size_t i = 0; i < cfg.num_alpha; ++i) {
      alpha_inboxes.push_back(
          std::make_unique<Inbox<AlphaMessage>>(cfg.num_pi, cfg.channel_capacity));
    }
    kappa_inbox = std::make_unique<Inbox<KappaMessage>>(cfg.num_alpha, cfg.channel_capacity);

    for (std::size_t i = 0; i < cfg.num_pi; ++i) {
      spawn("pi[" + std::to_string(i) + "]", [this, i] { run_pi(i); });
    }
    for (std::size_t i = 0; i < cfg.num_alpha; ++i) {
      spawn("alpha[" + std::to_string(i) + "]", [this, i] { run_alpha(i); });
    }
    spawn("kappa", [this] { run_kappa(); });
  }

  void run_pi(std::size_t id) {
    PiNode node(cfg.params.prec, cfg.params.bounds, cfg.retain_points);
    std::vector<std::vector<ProjectedRecord>> routed(cfg.num_alpha);
    Inbox<PiMessage>& in = *pi_inboxes[id];
    const auto any = [](std::size_t) { return true; };

    while (auto ev = in.pop(any)) {
      auto* msg = std::get_if<Inbox<PiMessage>::Message>(&*ev);
      if (msg == nullptr) break;  // closed
      if (auto* adv = std::get_if<PeriodAdvance>(&msg->value)) {
        for (auto& out : alpha_inboxes) {
          if (!out->push(id, *adv)) return;
        }
        continue;
      }
      const std::uint64_t dropped_before = node.dropped();
      for (const StreamRecord& rec : std::get<std::vector<StreamRecord>>(msg->value)) {
        if (auto projected = node.process(rec)) {
          routed[partition_key(projected->tile, cfg.num_alpha)].push_back(*projected);
        }
      }
      invalid_dropped += node.dropped() - dropped_before;
      for (std::size_t a = 0; a < cfg.num_alpha; ++a) {
        if (routed[a].empty()) continue;
        if (!alpha_inboxes[a]->push(id, std::move(routed[a]))) return;
        routed[a].clear();
      }
    }
    if (failed) return;
    for (auto& out : alpha_inboxes) out->close(id);
  }

  bool send_updates(std::size_t id, std::vector<SignificanceUpdate>& updates) {
    KappaMessage msg;
    for (SignificanceUpdate& u : updates) {
      const bool boundary = std::holds_alternative<Recluster>(u);
      msg.push_back(std::move(u));
      if (boundary) {
        if (!kappa_inbox->push(id, std::move(msg))) return false;
        msg.clear();
      }
    }
    updates.clear();
    return msg.empty() || kappa_inbox->push(id, std::move(msg));
  }

  void run_alpha(std::size_t id) {
    AlphaStage stage(AlphaParams{cfg.window, cfg.params.tau, cfg.retain_points}, cfg.late_policy);
    PeriodBarrier barrier(cfg.num_pi);
    Inbox<AlphaMessage>& in = *alpha_inboxes[id];
    std::vector<SignificanceUpdate> updates;
    const auto eligible = [&](std::size_t lane) { return !barrier.ahead(lane); };

    while (auto ev = in.pop(eligible)) {
      std::optional<PeriodId> trigger;
      if (auto* closed = std::get_if<Inbox<AlphaMessage>::Closed>(&*ev)) {
        trigger = barrier.close(closed->lane);
      } else {
        auto& msg = std::get<Inbox<AlphaMessage>::Message>(*ev);
        if (auto* adv = std::get_if<PeriodAdvance>(&msg.value)) {
          trigger = barrier.announce(msg.lane, adv->period);
        } else {
          const std::uint64_t before = stage.late_dropped();
          for (const ProjectedRecord& rec : std::get<std::vector<ProjectedRecord>>(msg.value)) {
            stage.process(rec, updates);
          }
          late_dropped += stage.late_dropped() - before;
        }
      }
      if (trigger) stage.advance(*trigger, updates);
      if (!updates.empty() && !send_updates(id, updates)) return;
    }
    if (failed) return;

    const std::uint64_t before = stage.late_dropped();
    stage.flush(updates);
    late_dropped += stage.late_dropped() - before;
    if (!send_updates(id, updates)) return;
    if (probe.on_alpha_done) probe.on_alpha_done(id, stage);
    kappa_inbox->close(id);
  }

  void run_kappa() {
    KappaNode node(KappaParams{cfg.params.prec, cfg.params.metric, cfg.params.mu,
                               cfg.retain_points});
    PeriodBarrier barrier(cfg.num_alpha);
    std::vector<ClusterRow> rows;
    const auto eligible = [&](std::size_t lane) { return !barrier.ahead(lane); };

    while (auto ev = kappa_inbox->pop(eligible)) {
      std::optional<PeriodId> trigger;
      if (auto* closed = std::get_if<Inbox<KappaMessage>::Closed>(&*ev)) {
        trigger = barrier.close(closed->lane);
      } else {
        auto& msg = std::get<Inbox<KappaMessage>::Message>(*ev);
        for (const SignificanceUpdate& u : msg.value) {
          if (const auto* r = std::get_if<Recluster>(&u)) {
            trigger = barrier.announce(msg.lane, r->period);
          } else {
            node.apply(u, rows);
          }
        }
      }
      if (!trigger) continue;
      rows.clear();
      node.apply(Recluster{*trigger}, rows);
      ++periods_clustered;
      rows_emitted += rows.size();
      if (probe.on_recluster) probe.on_recluster(*trigger, node);
      if (sink) {
        try {
          sink(*trigger, rows);
        } catch (const std::exception& e) {
          fail("sink", e.what());
          return;
        }
      }
    }
  }

  void send_chunk() {
    if (chunk.empty()) return;
    if (!pi_inboxes[next_pi]->push(0, std::move(chunk))) raise();
    chunk.clear();
    next_pi = (next_pi + 1) % cfg.num_pi;
  }

  void push(const StreamRecord& rec) {
    if (finished) throw PipelineError("source: push after finish");
    if (failed) raise();
    ++records_in;
    if (!newest || rec.period > *newest) {
      send_chunk();
      newest = rec.period;
      for (auto& in : pi_inboxes) {
        if (!in->push(0, PeriodAdvance{rec.period})) raise();
      }
    }
    chunk.push_back(rec);
    if (chunk.size() >= cfg.chunk_size) send_chunk();
  }

  void join() {
    for (auto& t : threads) {
      if (t.joinable()) t.join();
    }
  }

  PipelineStats finish() {
    if (finished) throw PipelineError("source: finish called twice");
    finished = true;
    if (!failed) {
      try {
        send_chunk();
      } catch (const PipelineError&) {
      }
      for (auto& in : pi_inboxes) in->close(0);
    }
    join();
    if (failed) raise();

    PipelineStats stats;
    stats.records_in = records_in;
    stats.invalid_dropped = invalid_dropped;
    stats.late_dropped = late_dropped;
    stats.periods_clustered = periods_clustered;
    stats.rows_emitted = rows_emitted;
    for (auto& in : pi_inboxes) {
      stats.peak_buffered += in->peak_buffered();
      stats.buffer_capacity += in->capacity();
    }
    for (auto& in : alpha_inboxes) {
      stats.peak_buffered += in->peak_buffered();
      stats.buffer_capacity += in->capacity();
    }
    stats.peak_buffered += kappa_inbox->peak_buffered();
    stats.buffer_capacity += kappa_inbox->capacity();
    return stats;
  }
};

Pipeline::Pipeline(PipelineConfig cfg, RowSink sink, PipelineProbe probe) {
  cfg.validate();
  impl_ = std::make_unique<Impl>(std::move(cfg), std::move(sink), std::move(probe));
  impl_->start();
}

Pipeline::~Pipeline() {
  if (!impl_) return;
  if (!impl_->finished) {
    impl_->fail("source", "pipeline destroyed before finish");
  }
  impl_->join();
}

void Pipeline::push(const StreamRecord& rec) { impl_->push(rec); }

PipelineStats Pipeline::finish() { return impl_->finish(); }

}  // namespace sraster
