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

#include "sraster/cli.hpp"

#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "sraster/errors.hpp"
#include "sraster/generator.hpp"
#include "sraster/ingest.hpp"
#include "sraster/output.hpp"
#include "sraster/pipeline.hpp"
#include "sraster/raster.hpp"

namespace sraster::cli {

namespace {

struct ClusterOptions {
  int prec = 4;
  std::int64_t tau = 5;
  int delta = 1;
  std::int64_t mu = 2;
  MetricKind metric = MetricKind::kChebyshev;
  bool retain_points = false;
  OutputFormat format = OutputFormat::kCsv;
  std::string input = "-";
  std::string output = "-";
  std::vector<double> bounds{-180.0, -90.0, 180.0, 90.0};

  BatchParams params() const {
    BatchParams p;
    p.bounds = Bounds{bounds[0], bounds[2], bounds[1], bounds[3]};
    if (!(p.bounds.min_x <= p.bounds.max_x && p.bounds.min_y <= p.bounds.max_y)) {
      throw ConfigError("--bounds: min must not exceed max");
    }
    p.prec = Precision(prec);
    p.tau = tau;
    p.metric = Metric{metric, delta};
    p.mu = mu;
    p.validate();
    return p;
  }
};

struct StreamOptions {
  std::int64_t window = 3;
  std::int64_t period_seconds = 86400;
  std::string epoch;
  std::size_t alpha = 1;
  std::size_t pi = 1;
  LatePolicy late_policy = LatePolicy::kDrop;
  std::size_t channel_capacity = 64;
};

struct GenerateOptions {
  std::string spec;
  std::string output;
  std::string truth;
};

void add_cluster_options(CLI::App* cmd, ClusterOptions& o) {
  cmd->add_option("-i,--input", o.input, "Input CSV (x,y[,timestamp]); - for stdin")
      ->capture_default_str();
  cmd->add_option("-o,--output", o.output, "Output file; - for stdout")->capture_default_str();
  cmd->add_option("--prec", o.prec, "Decimal digits kept by the projection (0..15)")
      ->capture_default_str();
  cmd->add_option("--tau", o.tau, "Minimum points for a significant tile (>= 1)")
      ->capture_default_str();
  cmd->add_option("--delta", o.delta, "Neighborhood distance in tiles (>= 1)")
      ->capture_default_str();
  cmd->add_option("--mu", o.mu, "Minimum tiles per cluster (>= 1)")->capture_default_str();
  const std::map<std::string, MetricKind> metrics{{"chebyshev", MetricKind::kChebyshev},
                                                  {"manhattan", MetricKind::kManhattan}};
  cmd->add_option("--metric", o.metric, "Neighborhood metric")
      ->transform(CLI::CheckedTransformer(metrics, CLI::ignore_case).description("{chebyshev,manhattan}"))
      ->default_str("chebyshev");
  const std::map<std::string, OutputFormat> formats{{"csv", OutputFormat::kCsv},
                                                    {"geojson", OutputFormat::kGeoJson}};
  cmd->add_option("--format", o.format, "Output format")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case).description("{csv,geojson}"))
      ->default_str("csv");
  cmd->add_option("--bounds", o.bounds,
                  "Accepted coordinate box MIN_X,MIN_Y,MAX_X,MAX_Y; points outside are rejected "
                  "(batch) or dropped and counted (stream)")
      ->expected(4)
      ->delimiter(',')
      ->default_str("-180,-90,180,90");
  cmd->add_flag("--retain-points", o.retain_points,
                "Emit one row per clustered input point instead of per tile");
}

/// Opens "-" as the given standard stream.
class InputSource {
 public:
  InputSource(const std::string& path, std::istream& fallback) {
    if (path == "-") {
      in_ = &fallback;
      return;
    }
    file_.open(path);
    if (!file_) throw Error("cannot open input " + path);
    in_ = &file_;
  }
  std::istream& get() { return *in_; }

 private:
  std::ifstream file_;
  std::istream* in_ = nullptr;
};

class OutputSink {
 public:
  OutputSink(const std::string& path, std::ostream& fallback) {
    if (path == "-") {
      out_ = &fallback;
      return;
    }
    file_.open(path);
    if (!file_) throw Error("cannot open output " + path);
    out_ = &file_;
  }
  std::ostream& get() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_ = nullptr;
};

int cmd_batch(const ClusterOptions& o, std::istream& in, std::ostream& out) {
  const BatchParams params = o.params();
  InputSource src(o.input, in);
  const std::vector<GeoPoint> points = read_points(src.get());

  std::vector<ClusterRow> rows = o.retain_points
                                     ? rows_from_clusters(raster_prime(points, params), params.prec)
                                     : rows_from_clusters(raster(points, params), params.prec);
  OutputSink dst(o.output, out);
  auto writer = make_row_writer(o.format, dst.get(), params.prec, false, o.retain_points);
  writer->write(std::nullopt, rows);
  writer->finish();
  return kExitOk;
}

int cmd_stream(const ClusterOptions& o, const StreamOptions& s, std::istream& in,
               std::ostream& out, std::ostream& err) {
  PipelineConfig cfg;
  cfg.params = o.params();
  cfg.window = s.window;
  cfg.num_alpha = s.alpha;
  cfg.num_pi = s.pi;
  cfg.retain_points = o.retain_points;
  cfg.late_policy = s.late_policy;
  cfg.channel_capacity = s.channel_capacity;
  cfg.validate();

  IngestConfig ingest;
  ingest.period_seconds = s.period_seconds;
  if (!s.epoch.empty()) {
    try {
      ingest.epoch = parse_timestamp(s.epoch);
    } catch (const Error& e) {
      throw ConfigError(std::string("--epoch: ") + e.what());
    }
  }
  ingest.validate();

  InputSource src(o.input, in);
  OutputSink dst(o.output, out);
  auto writer = make_row_writer(o.format, dst.get(), cfg.params.prec, true, o.retain_points);

  CsvStreamReader reader(src.get(), ingest);
  Pipeline pipeline(cfg, [&](PeriodId period, std::span<const ClusterRow> rows) {
    writer->write(period, rows);
  });
  while (auto rec = reader.next()) pipeline.push(*rec);
  const PipelineStats stats = pipeline.finish();
  writer->finish();

  err << "records=" << stats.records_in << " invalid=" << stats.invalid_dropped
      << " late=" << stats.late_dropped << " periods=" << stats.periods_clustered
      << " rows=" << stats.rows_emitted << '\n';
  return kExitOk;
}

void write_generated(const GeneratedStream& g, std::ostream& csv, std::ostream& truth) {
  csv << "x,y,timestamp\n";
  for (const GeneratedRecord& r : g.records) {
    csv << format_real(r.point.x) << ',' << format_real(r.point.y) << ','
        << format_rfc3339(r.timestamp) << '\n';
  }
  truth << "period,hub,x,y\n";
  for (const TruthRow& t : g.truth) {
    truth << t.period << ',' << t.hub << ',' << format_real(t.center.x) << ','
          << format_real(t.center.y) << '\n';
  }
}

int cmd_generate(const GenerateOptions& o, std::ostream& out) {
  std::ifstream spec_file(o.spec);
  if (!spec_file) throw ConfigError("cannot open spec " + o.spec);
  std::stringstream text;
  text << spec_file.rdbuf();
  const GeneratedStream g = generate(parse_generator_spec(text.str()));

  OutputSink csv(o.output, out);
  const std::string truth_path =
      !o.truth.empty() ? o.truth : (o.output == "-" ? std::string() : o.output + ".truth.csv");
  std::ofstream truth;
  std::ostringstream discard;
  if (!truth_path.empty()) {
    truth.open(truth_path);
    if (!truth) throw Error("cannot open truth output " + truth_path);
  }
  write_generated(g, csv.get(), truth_path.empty() ? static_cast<std::ostream&>(discard) : truth);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Density-based clustering of point batches and evolving point streams", "sraster"};
  app.require_subcommand(1);

  ClusterOptions batch_opts;
  auto* batch = app.add_subcommand("batch", "Cluster a finite set of points");
  add_cluster_options(batch, batch_opts);

  ClusterOptions stream_opts;
  StreamOptions stream_extra;
  auto* stream = app.add_subcommand("stream", "Cluster a timestamped stream over a sliding window");
  add_cluster_options(stream, stream_opts);
  stream->add_option("--window", stream_extra.window, "Sliding window length in periods (>= 1); the default is arbitrary, size it to the use case")
      ->capture_default_str();
  stream->add_option("--period-seconds", stream_extra.period_seconds, "Period length in seconds")
      ->capture_default_str();
  stream->add_option("--epoch", stream_extra.epoch,
                     "Start of period 0 (epoch seconds or RFC 3339); default: first record, "
                     "aligned to the period length");
  stream->add_option("--alpha", stream_extra.alpha, "Accumulation partitions")
      ->capture_default_str();
  stream->add_option("--pi", stream_extra.pi, "Projection workers")->capture_default_str();
  const std::map<std::string, LatePolicy> policies{{"drop", LatePolicy::kDrop},
                                                   {"delay", LatePolicy::kDelayOnePeriod}};
  stream->add_option("--late-policy", stream_extra.late_policy,
                     "Records older than the current period: drop, or delay clustering by "
                     "one period to admit them")
      ->transform(CLI::CheckedTransformer(policies, CLI::ignore_case).description("{drop,delay}"))
      ->default_str("drop");
  stream->add_option("--channel-capacity", stream_extra.channel_capacity,
                     "Messages buffered per channel lane")
      ->capture_default_str();

  GenerateOptions gen_opts;
  auto* gen = app.add_subcommand("generate", "Write a synthetic hub stream and its ground truth");
  gen->add_option("-s,--spec", gen_opts.spec, "Generator spec (JSON)")->required();
  gen->add_option("-o,--output", gen_opts.output, "Output CSV; - for stdout")->required();
  gen->add_option("--truth", gen_opts.truth, "Ground-truth CSV (default: <output>.truth.csv)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help(std::string(), CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (*batch) return cmd_batch(batch_opts, in, out);
    if (*stream) return cmd_stream(stream_opts, stream_extra, in, out, err);
    return cmd_generate(gen_opts, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace sraster::cli
