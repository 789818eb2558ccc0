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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iterator>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <sstream>
#include <string>
#include <vector>

#include "oracle/oracle.hpp"
#include "sraster/generator.hpp"
#include "sraster/pipeline.hpp"
#include "sraster/raster.hpp"
#include "sraster/stream_nodes.hpp"

namespace sraster::acceptance {
namespace {

using oracle::Canonical;
using Clock = std::chrono::steady_clock;

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define CHECK(cond, msg)                                      \
  do {                                                        \
    if (!(cond)) {                                            \
      std::ostringstream os_;                                 \
      os_ << msg;                                             \
      throw Failure(os_.str());                               \
    }                                                         \
  } while (0)

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string tile_str(const Tile& t) {
  return "(" + std::to_string(t.xp) + "," + std::to_string(t.yp) + ")";
}

// One of the 50 oracle streams. Parameters cycle over c, tau, prec and metric.
struct Case {
  std::uint64_t seed;
  std::int64_t c;
  std::int64_t tau;
  int prec;
  MetricKind metric;
  std::vector<StreamRecord> stream;
  oracle::RawWindowLog log;
};

std::vector<Case> make_cases(std::size_t n) {
  std::vector<Case> cases;
  for (std::size_t i = 0; i < n; ++i) {
    Case k;
    k.seed = 1000 + i;
    k.c = 1 + static_cast<std::int64_t>(i % 3);
    k.tau = (i / 3) % 2 == 0 ? 2 : 5;
    k.prec = (i / 6) % 2 == 0 ? 2 : 4;
    k.metric = (i / 12) % 2 == 0 ? MetricKind::kChebyshev : MetricKind::kManhattan;
    oracle::RandomStreamSpec spec;
    spec.seed = k.seed;
    spec.records = 10000;
    spec.periods = 10;
    spec.prec = k.prec;
    k.stream = oracle::random_stream(spec);
    k.log = oracle::log_stream(k.stream, k.prec);
    cases.push_back(std::move(k));
  }
  return cases;
}

std::string describe(const Case& k) {
  std::ostringstream os;
  os << "seed=" << k.seed << " c=" << k.c << " tau=" << k.tau << " prec=" << k.prec;
  return os.str();
}

PipelineConfig config_for(const Case& k, std::size_t num_alpha, std::int64_t c) {
  PipelineConfig cfg;
  cfg.num_pi = 2;
  cfg.num_alpha = num_alpha;
  cfg.window = c;
  cfg.params.prec = Precision(k.prec);
  cfg.params.tau = k.tau;
  cfg.params.mu = 2;
  cfg.params.metric = Metric{k.metric, 1};
  return cfg;
}

struct RunResult {
  std::map<PeriodId, std::vector<ClusterRow>> rows;  // every period the sink saw
  PipelineStats stats;
};

RunResult run(const PipelineConfig& cfg, const std::vector<StreamRecord>& stream,
              PipelineProbe probe = {}) {
  RunResult r;
  r.stats = run_pipeline(
      cfg, stream,
      [&](PeriodId p, std::span<const ClusterRow> rows) {
        auto& dst = r.rows[p];
        dst.insert(dst.end(), rows.begin(), rows.end());
      },
      std::move(probe));
  return r;
}

std::map<PeriodId, Canonical> canonical_output(const RunResult& r) {
  std::map<PeriodId, Canonical> out;
  for (const auto& [p, rows] : r.rows) {
    auto by = oracle::clusters_by_period(rows);
    out[p] = by.contains(p) ? by[p] : Canonical{};
  }
  return out;
}

std::vector<PeriodId> all_periods(PeriodId n) {
  std::vector<PeriodId> v(static_cast<std::size_t>(n));
  for (PeriodId p = 0; p < n; ++p) v[static_cast<std::size_t>(p)] = p;
  return v;
}

template <class K, class V>
std::vector<K> keys(const std::map<K, V>& m) {
  std::vector<K> v;
  for (const auto& kv : m) v.push_back(kv.first);
  return v;
}

// 1
void oracle_window_equivalence(const std::vector<Case>& cases) {
  const auto t0 = Clock::now();
  for (const auto& k : cases) {
    std::map<PeriodId, std::vector<Tile>> sigma_at;
    PipelineProbe probe;
    probe.on_recluster = [&](PeriodId p, const KappaNode& kappa) {
      CHECK(!sigma_at.contains(p), describe(k) << ": period " << p << " clustered twice");
      sigma_at[p] = kappa.sigma();
    };
    const auto r = run(config_for(k, 2, k.c), k.stream, probe);
    CHECK(keys(sigma_at) == all_periods(10), describe(k) << ": not every boundary reclustered");
    CHECK(keys(r.rows) == all_periods(10), describe(k) << ": not every boundary emitted");
    const auto got = canonical_output(r);
    for (PeriodId p = 0; p < 10; ++p) {
      const auto want_sigma = oracle::oracle_significant(k.log, p, k.c, k.tau);
      CHECK(sigma_at[p] == want_sigma, describe(k) << ": sigma mismatch at period " << p
                                                   << " (" << sigma_at[p].size() << " vs "
                                                   << want_sigma.size() << " tiles)");
      const auto want = oracle::oracle_clusters(want_sigma, k.metric, 1, 2);
      CHECK(got.at(p) == want, describe(k) << ": clusters differ at period " << p);
    }
  }
  const double secs = seconds_since(t0);
  CHECK(secs < 60.0, "took " << secs << " s, limit 60 s");
}

// 2
void batch_stream_consistency(const std::vector<Case>& cases) {
  for (const auto& k : cases) {
    const auto cfg = config_for(k, 2, 1);
    const auto got = canonical_output(run(cfg, k.stream));
    std::map<PeriodId, std::vector<GeoPoint>> by_period;
    for (const auto& rec : k.stream) by_period[rec.period].push_back(rec.point);
    CHECK(keys(got) == keys(by_period), describe(k) << ": period sets differ");
    for (const auto& [p, points] : by_period) {
      const auto want = oracle::canonicalize(raster(points, cfg.params));
      CHECK(got.at(p) == want, describe(k) << ": batch and stream differ at period " << p);
    }
  }
}

// 3
void partition_invariance(const std::vector<Case>& cases) {
  for (std::size_t i = 0; i < 10; ++i) {
    const auto& k = cases[i];
    std::map<PeriodId, std::vector<ClusterRow>> base_rows;
    std::map<PeriodId, Canonical> base;
    for (std::size_t alpha : {1u, 2u, 4u}) {
      auto cfg = config_for(k, alpha, k.c);
      cfg.num_pi = alpha == 1 ? 1 : 3;
      const auto r = run(cfg, k.stream);
      const auto got = canonical_output(r);
      if (alpha == 1) {
        base = got;
        base_rows = r.rows;
        continue;
      }
      CHECK(got == base, describe(k) << ": num_alpha=" << alpha << " differs from num_alpha=1");
      CHECK(r.rows == base_rows, describe(k) << ": num_alpha=" << alpha << " rows reordered");
    }
  }
}

// 4
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Synthetic source; every dereference is tallied per record index.
class CountingSource {
 public:
  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = StreamRecord;
    using difference_type = std::ptrdiff_t;
    using pointer = const StreamRecord*;
    using reference = StreamRecord;

    iterator() = default;
    iterator(const CountingSource* src, std::size_t i) : src_(src), i_(i) {}

    StreamRecord operator*() const {
      ++src_->visits_[i_];
      const std::uint64_t h = mix(i_);
      const double u = static_cast<double>(h >> 40) / static_cast<double>(1 << 24);
      const double v = static_cast<double>(h & 0xffffff) / static_cast<double>(1 << 24);
      const bool hot = (h >> 32) % 2 == 0;
      const double w = hot ? 0.02 : 0.5;
      return StreamRecord{GeoPoint{10.0 + w * u, 50.0 + w * v},
                          static_cast<PeriodId>(i_ / src_->per_period_)};
    }
    iterator& operator++() {
      ++i_;
      return *this;
    }
    void operator++(int) { ++i_; }
    bool operator==(const iterator& o) const { return i_ == o.i_; }

   private:
    const CountingSource* src_ = nullptr;
    std::size_t i_ = 0;
  };

  CountingSource(std::size_t n, std::size_t per_period)
      : n_(n), per_period_(per_period), visits_(n, 0) {}

  iterator begin() const { return {this, 0}; }
  iterator end() const { return {this, n_}; }

  bool each_once() const {
    return std::all_of(visits_.begin(), visits_.end(), [](std::uint8_t v) { return v == 1; });
  }

 private:
  std::size_t n_;
  std::size_t per_period_;
  mutable std::vector<std::uint8_t> visits_;
};

void single_pass_linear_time() {
  PipelineConfig cfg;
  cfg.num_pi = 2;
  cfg.num_alpha = 2;
  cfg.window = 3;
  cfg.params.prec = Precision(3);
  cfg.params.tau = 5;
  const std::size_t per_period = 100000;

  auto timed = [&](std::size_t n) {
    double best = 1e300;
    for (int rep = 0; rep < 2; ++rep) {
      CountingSource src(n, per_period);
      std::uint64_t rows = 0;
      const auto t0 = Clock::now();
      const auto stats = run_pipeline(cfg, src, [&](PeriodId, std::span<const ClusterRow> r) {
        rows += r.size();
      });
      best = std::min(best, seconds_since(t0));
      CHECK(src.each_once(), n << " records: some record not consumed exactly once");
      CHECK(stats.records_in == n, n << " records: pipeline saw " << stats.records_in);
      CHECK(rows > 0, n << " records: no output");
    }
    return best;
  };
  timed(200000);  // warm-up
  const double t1 = timed(1000000);
  const double t2 = timed(2000000);
  std::printf("  linear time: 1e6 records %.3f s, 2e6 records %.3f s, ratio %.3f\n", t1, t2,
              t2 / t1);
  CHECK(t2 / t1 <= 2.5, "time ratio " << t2 / t1 << " exceeds 2.5");
}

// 5
void audit_node(const AlphaNode& node, std::int64_t c, std::size_t distinct,
                const std::string& where) {
  CHECK(static_cast<std::int64_t>(node.window().size()) <= c,
        where << ": " << node.window().size() << " periods held, window is " << c);
  CHECK(node.window_entries() <= static_cast<std::size_t>(c) * distinct,
        where << ": " << node.window_entries() << " entries > c * " << distinct);
  TileCounts sums;
  for (const auto& [p, cells] : node.window()) {
    CHECK(node.current_period() && p > *node.current_period() - c && p <= *node.current_period(),
          where << ": period " << p << " outside window");
    for (const auto& [t, cell] : cells) {
      CHECK(cell.count > 0, where << ": zero entry for " << tile_str(t) << " in period " << p);
      sums[t] += cell.count;
    }
  }
  CHECK(sums == node.totals(), where << ": totals disagree with per-period cells");
}

void memory_bound(const std::vector<Case>& cases) {
  for (const auto& k : cases) {
    std::set<Tile> distinct;
    for (const auto& rec : k.log) distinct.insert(rec.tile);

    std::mutex mu;
    std::size_t entries = 0;
    std::size_t stages = 0;
    PipelineProbe probe;
    probe.on_alpha_done = [&](std::size_t i, const AlphaStage& stage) {
      audit_node(stage.node(), k.c, distinct.size(), describe(k) + " alpha[" + std::to_string(i) + "]");
      std::lock_guard lock(mu);
      entries += stage.node().window_entries();
      ++stages;
    };
    run(config_for(k, 4, k.c), k.stream, probe);
    CHECK(stages == 4, describe(k) << ": audit reached " << stages << " of 4 stages");
    CHECK(entries <= static_cast<std::size_t>(k.c) * distinct.size(),
          describe(k) << ": " << entries << " window entries > c * " << distinct.size());

    // The bound holds throughout, not only at the end.
    AlphaParams ap;
    ap.window = k.c;
    ap.tau = k.tau;
    AlphaNode node(ap);
    std::vector<SignificanceUpdate> out;
    std::set<Tile> seen;
    PeriodId last = k.log.front().period;
    for (const auto& rec : k.log) {
      if (rec.period != last) {
        audit_node(node, k.c, seen.size(), describe(k) + " before period " + std::to_string(rec.period));
        last = rec.period;
      }
      seen.insert(rec.tile);
      node.process(ProjectedRecord{rec.tile, rec.period, std::nullopt}, out);
      out.clear();
    }
    audit_node(node, k.c, seen.size(), describe(k) + " at end");
  }
}

// 6
void evolving_hub() {
  GeneratorSpec spec;
  spec.seed = 42;
  spec.num_periods = 16;
  spec.noise_per_period = 2000;
  spec.noise_bounds = Bounds{13.0, 14.0, 52.0, 53.0};
  HubSpec old_hub;
  old_hub.center = GeoPoint{13.2105, 52.3405};
  old_hub.stddev = 0.0008;
  old_hub.points_per_period = 400;
  old_hub.start = 0;
  old_hub.end = 5;
  HubSpec new_hub = old_hub;
  new_hub.center = GeoPoint{13.7505, 52.6805};
  new_hub.start = 6;
  new_hub.end = 16;
  spec.hubs = {old_hub, new_hub};
  const auto g = generate(spec);

  const std::int64_t c = 3;
  PipelineConfig cfg;
  cfg.num_pi = 2;
  cfg.num_alpha = 2;
  cfg.window = c;
  cfg.params.prec = Precision(3);
  cfg.params.tau = 30;
  cfg.params.mu = 2;
  const auto r = run(cfg, g.stream());
  const auto out = oracle::clusters_by_period(
      [&] {
        std::vector<ClusterRow> all;
        for (const auto& [p, rows] : r.rows) all.insert(all.end(), rows.begin(), rows.end());
        return all;
      }());

  const Precision prec(3);
  // A hub is located when some cluster's tile centroid is within one tile of
  // the projected center; it is absent when no cluster touches that tile's
  // neighbourhood.
  auto located = [&](PeriodId p, const HubSpec& hub) {
    if (!out.contains(p)) return false;
    const Tile want = project(hub.center_at(p), prec);
    for (const auto& cluster : out.at(p)) {
      double sx = 0, sy = 0;
      for (const auto& t : cluster) {
        sx += static_cast<double>(t.xp);
        sy += static_cast<double>(t.yp);
      }
      const double n = static_cast<double>(cluster.size());
      if (std::abs(sx / n - static_cast<double>(want.xp)) <= 1.0 &&
          std::abs(sy / n - static_cast<double>(want.yp)) <= 1.0) {
        return true;
      }
    }
    return false;
  };
  auto touched = [&](PeriodId p, const HubSpec& hub) {
    if (!out.contains(p)) return false;
    const Tile want = project(hub.center_at(p), prec);
    for (const auto& cluster : out.at(p)) {
      for (const auto& t : cluster) {
        if (std::abs(t.xp - want.xp) <= 1 && std::abs(t.yp - want.yp) <= 1) return true;
      }
    }
    return false;
  };

  CHECK(keys(r.rows) == all_periods(16), "not every period emitted");
  for (PeriodId p = 0; p < 5; ++p) {
    CHECK(located(p, old_hub), "old hub not found at period " << p);
  }
  for (PeriodId p = 5 + c; p < 16; ++p) {
    CHECK(!touched(p, old_hub), "old hub still reported at period " << p);
  }
  for (PeriodId p = 0; p < 6; ++p) {
    CHECK(!touched(p, new_hub), "new hub reported before it exists, period " << p);
  }
  for (PeriodId p = 6 + c - 1; p < 16; ++p) {
    CHECK(located(p, new_hub), "new hub not found at period " << p);
  }
}

// 7
struct NodeTrace {
  std::vector<SignificanceUpdate> updates;
  std::map<PeriodId, std::vector<ClusterRow>> rows;
};

// Feeds records one by one; `explicit_steps` announces every empty period
// before the records that follow it.
NodeTrace trace(const std::vector<StreamRecord>& stream, const PipelineConfig& cfg,
                bool explicit_steps, AlphaNode& node) {
  KappaNode kappa(KappaParams{cfg.params.prec, cfg.params.metric, cfg.params.mu,
                              cfg.retain_points});
  NodeTrace t;
  std::vector<SignificanceUpdate> out;
  auto drain = [&] {
    for (const auto& u : out) {
      std::vector<ClusterRow> rows;
      kappa.apply(u, rows);
      if (const auto* rc = std::get_if<Recluster>(&u)) {
        auto& dst = t.rows[rc->period];
        dst.insert(dst.end(), rows.begin(), rows.end());
      }
      t.updates.push_back(u);
    }
    out.clear();
  };
  for (const auto& rec : stream) {
    if (explicit_steps && node.current_period()) {
      for (PeriodId p = *node.current_period() + 1; p < rec.period; ++p) {
        node.advance_to(p, out);
        drain();
      }
    }
    std::optional<GeoPoint> pt;
    if (cfg.retain_points) pt = rec.point;
    node.process(ProjectedRecord{project(rec.point, cfg.params.prec), rec.period, pt}, out);
    drain();
  }
  node.flush(out);
  drain();
  return t;
}

void interpolation(const std::vector<Case>& cases) {
  const std::vector<std::vector<PeriodId>> patterns{{0, 1, 4}, {0, 3, 4, 9}, {2, 7}, {0, 1, 2, 8, 9}};
  for (std::size_t i = 0; i < 12; ++i) {
    const auto& k = cases[i];
    const auto& keep = patterns[i % patterns.size()];
    std::vector<StreamRecord> gappy;
    for (const auto& rec : k.stream) {
      if (std::find(keep.begin(), keep.end(), rec.period) != keep.end()) gappy.push_back(rec);
    }
    for (bool retain : {false, true}) {
      auto cfg = config_for(k, 2, k.c);
      cfg.retain_points = retain;
      AlphaParams ap{k.c, k.tau, retain};
      AlphaNode a(ap), b(ap);
      const auto implicit = trace(gappy, cfg, false, a);
      const auto expl = trace(gappy, cfg, true, b);
      const std::string where = describe(k) + (retain ? " retain" : "");
      CHECK(a == b, where << ": node state differs");
      CHECK(implicit.updates == expl.updates, where << ": update sequences differ");
      CHECK(implicit.rows == expl.rows, where << ": output differs");
      const PeriodId first = keep.front(), last = keep.back();
      std::vector<PeriodId> expect;
      for (PeriodId p = first; p <= last; ++p) expect.push_back(p);
      CHECK(keys(expl.rows) == expect, where << ": empty periods not reclustered");

      const auto r = run(cfg, gappy);
      CHECK(r.rows == expl.rows, where << ": pipeline output differs from explicit stepping");
    }
  }
}

// 8
void prime_conservation(const std::vector<Case>& cases) {
  for (std::size_t i = 0; i < 10; ++i) {
    const auto& k = cases[i];
    auto cfg = config_for(k, 2, k.c);
    cfg.retain_points = true;
    std::size_t probed = 0;
    PipelineProbe probe;
    probe.on_recluster = [&](PeriodId p, const KappaNode& kappa) {
      for (const auto& t : kappa.sigma()) {
        CHECK(kappa.points_of(t) == oracle::oracle_points(k.log, p, k.c, t),
              describe(k) << ": retained points of " << tile_str(t) << " differ at period " << p);
      }
      ++probed;
    };
    const auto r = run(cfg, k.stream, probe);
    CHECK(probed == 10, describe(k) << ": " << probed << " boundaries probed");
    std::size_t clusters = 0;
    for (const auto& [p, rows] : r.rows) {
      std::map<std::int64_t, std::set<Tile>> tiles;
      std::map<std::int64_t, std::vector<GeoPoint>> points;
      for (const auto& row : rows) {
        CHECK(row.point.has_value(), describe(k) << ": row without point at period " << p);
        CHECK(project(*row.point, cfg.params.prec) == row.tile,
              describe(k) << ": point outside its tile at period " << p);
        tiles[row.cluster_id].insert(row.tile);
        points[row.cluster_id].push_back(*row.point);
      }
      for (auto& [id, pts] : points) {
        std::vector<GeoPoint> want;
        for (const auto& t : tiles[id]) {
          const auto o = oracle::oracle_points(k.log, p, k.c, t);
          want.insert(want.end(), o.begin(), o.end());
        }
        std::sort(want.begin(), want.end());
        std::sort(pts.begin(), pts.end());
        CHECK(pts == want, describe(k) << ": cluster " << id << " at period " << p
                                       << " holds " << pts.size() << " points, oracle "
                                       << want.size());
        ++clusters;
      }
    }
    CHECK(clusters > 0, describe(k) << ": no clusters to check");
  }
}

int report(int id, const char* name, const std::function<void()>& fn) {
  const auto t0 = Clock::now();
  std::string detail;
  bool ok = false;
  try {
    fn();
    ok = true;
  } catch (const Failure& f) {
    detail = f.what();
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  std::printf("%s [%d] %s (%.2f s)%s%s\n", ok ? "PASS" : "FAIL", id, name, seconds_since(t0),
              ok ? "" : ": ", detail.c_str());
  std::fflush(stdout);
  return ok ? 0 : 1;
}

}  // namespace
}  // namespace sraster::acceptance

int main() {
  using namespace sraster::acceptance;
  const auto cases = make_cases(50);
  int failed = 0;
  failed += report(1, "oracle window equivalence", [&] { oracle_window_equivalence(cases); });
  failed += report(2, "batch/stream consistency", [&] { batch_stream_consistency(cases); });
  failed += report(3, "partition invariance", [&] { partition_invariance(cases); });
  failed += report(4, "single pass, linear time", [&] { single_pass_linear_time(); });
  failed += report(5, "memory bound", [&] { memory_bound(cases); });
  failed += report(6, "evolving hub recovery", [&] { evolving_hub(); });
  failed += report(7, "gap interpolation", [&] { interpolation(cases); });
  failed += report(8, "retained point conservation", [&] { prime_conservation(cases); });
  std::printf("%d of 8 criteria passed\n", 8 - failed);
  return failed == 0 ? 0 : 1;
}
