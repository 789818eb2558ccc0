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

#include "sraster/output.hpp"

#include <charconv>
#include <string_view>

#include <json.hpp>

#include "sraster/errors.hpp"
#include "sraster/ingest.hpp"

namespace sraster {

std::string format_scaled(std::int64_t v, Precision prec) {
  const bool negative = v < 0;
  // Magnitude in unsigned arithmetic so INT64_MIN is safe.
  const std::uint64_t mag = negative ? ~static_cast<std::uint64_t>(v) + 1 : static_cast<std::uint64_t>(v);
  const auto scale = static_cast<std::uint64_t>(prec.scale());
  std::string frac = std::to_string(mag % scale);
  std::string out = negative ? "-" : "";
  out += std::to_string(mag / scale);
  if (prec.digits() > 0) {
    out += '.';
    out.append(static_cast<std::size_t>(prec.digits()) - frac.size(), '0');
    out += frac;
  }
  return out;
}

std::string format_real(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<ClusterRow> rows_from_clusters(const std::vector<TileCluster>& clusters,
                                           Precision prec) {
  std::vector<ClusterRow> rows;
  for (std::size_t id = 0; id < clusters.size(); ++id) {
    for (const Tile& t : clusters[id].tiles) {
      const auto [xr, yr] = rescale(t, prec);
      rows.push_back(ClusterRow{0, static_cast<std::int64_t>(id), t, xr, yr, std::nullopt});
    }
  }
  return rows;
}

std::vector<ClusterRow> rows_from_clusters(const std::vector<RetainedCluster>& clusters,
                                           Precision prec) {
  std::vector<ClusterRow> rows;
  for (std::size_t id = 0; id < clusters.size(); ++id) {
    for (const RetainedTile& m : clusters[id].members) {
      const auto [xr, yr] = rescale(m.tile, prec);
      std::vector<GeoPoint> pts = m.points;
      std::sort(pts.begin(), pts.end());
      for (const GeoPoint& p : pts) {
        rows.push_back(ClusterRow{0, static_cast<std::int64_t>(id), m.tile, xr, yr, p});
      }
    }
  }
  return rows;
}

namespace {

class CsvRowWriter final : public RowWriter {
 public:
  CsvRowWriter(std::ostream& out, Precision prec, bool with_period, bool retain_points)
      : out_(out), prec_(prec), with_period_(with_period), retain_(retain_points) {
    if (with_period_) out_ << "period,";
    out_ << "cluster_id,tile_x,tile_y";
    if (retain_) out_ << ",x,y";
    out_ << '\n';
  }

  void write(std::optional<PeriodId> period, std::span<const ClusterRow> rows) override {
    for (const ClusterRow& r : rows) {
      if (with_period_) out_ << period.value_or(r.period) << ',';
      out_ << r.cluster_id << ',' << format_scaled(r.tile.xp, prec_) << ','
           << format_scaled(r.tile.yp, prec_);
      if (retain_ && r.point) out_ << ',' << format_real(r.point->x) << ',' << format_real(r.point->y);
      out_ << '\n';
    }
    out_.flush();
  }

  void finish() override { out_.flush(); }

 private:
  std::ostream& out_;
  Precision prec_;
  bool with_period_;
  bool retain_;
};

class GeoJsonRowWriter final : public RowWriter {
 public:
  GeoJsonRowWriter(std::ostream& out, bool with_period, bool retain_points)
      : out_(out), with_period_(with_period), retain_(retain_points) {
    out_ << "{\"type\":\"FeatureCollection\",\"features\":[";
  }

  void write(std::optional<PeriodId> period, std::span<const ClusterRow> rows) override {
    std::size_t i = 0;
    while (i < rows.size()) {
      const std::int64_t id = rows[i].cluster_id;
      nlohmann::json coords = nlohmann::json::array();
      std::size_t points = 0;
      std::optional<Tile> last;
      for (; i < rows.size() && rows[i].cluster_id == id; ++i) {
        ++points;
        if (last && *last == rows[i].tile) continue;
        last = rows[i].tile;
        coords.push_back({rows[i].xr, rows[i].yr});
      }
      nlohmann::json props;
      if (with_period_) props["period"] = period.value_or(rows[i - 1].period);
      props["cluster_id"] = id;
      props["tile_count"] = coords.size();
      if (retain_) props["point_count"] = points;
      nlohmann::json feature = {
          {"type", "Feature"},
          {"geometry", {{"type", "MultiPoint"}, {"coordinates", std::move(coords)}}},
          {"properties", std::move(props)}};
      out_ << (first_ ? "\n" : ",\n") << feature.dump();
      first_ = false;
    }
    out_.flush();
  }

  void finish() override {
    out_ << "\n]}\n";
    out_.flush();
  }

 private:
  std::ostream& out_;
  bool with_period_;
  bool retain_;
  bool first_ = true;
};

}  // namespace

std::unique_ptr<RowWriter> make_row_writer(OutputFormat format, std::ostream& out, Precision prec,
                                           bool with_period, bool retain_points) {
  if (format == OutputFormat::kGeoJson) {
    return std::make_unique<GeoJsonRowWriter>(out, with_period, retain_points);
  }
  return std::make_unique<CsvRowWriter>(out, prec, with_period, retain_points);
}

std::vector<OutputRow> parse_output_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) return {};
  const auto header = split_fields(line, ',');
  const bool with_period = !header.empty() && header[0] == "period";
  const std::size_t base = with_period ? 1 : 0;
  const bool retain = header.size() == base + 5;
  if (header.size() != base + 3 && !retain) throw Error("unrecognized output header: " + line);

  std::vector<OutputRow> rows;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto f = split_fields(line, ',');
    if (f.size() != header.size()) {
      throw RejectedInput(n, "line " + std::to_string(n) + ": wrong field count");
    }
    const auto number = [&](std::string_view s) {
      auto v = parse_double(s);
      if (!v) throw RejectedInput(n, "line " + std::to_string(n) + ": bad number");
      return *v;
    };
    OutputRow row;
    if (with_period) row.period = static_cast<PeriodId>(number(f[0]));
    row.cluster_id = static_cast<std::int64_t>(number(f[base]));
    row.xr = number(f[base + 1]);
    row.yr = number(f[base + 2]);
    if (retain) row.point = GeoPoint{number(f[base + 3]), number(f[base + 4])};
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sraster
