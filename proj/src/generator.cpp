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

#include "sraster/generator.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include <json.hpp>

#include "sraster/errors.hpp"

namespace sraster {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

using nlohmann::json;

[[noreturn]] void bad_field(const std::string& field, const std::string& what) {
  throw ConfigError(field + ": " + what);
}

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) bad_field(where.empty() ? "spec" : where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) {
      bad_field(where.empty() ? key : where + "." + key, "unknown field");
    }
  }
}

template <class T>
T get_field(const json& obj, const std::string& where, const char* key, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->template get<T>();
  } catch (const json::exception&) {
    bad_field(where.empty() ? key : where + "." + key, "wrong type");
  }
}

GeoPoint get_point(const json& obj, const std::string& where, const char* key, GeoPoint fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  const std::string field = where + "." + key;
  if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
    bad_field(field, "expected [x, y]");
  }
  return GeoPoint{(*it)[0].get<double>(), (*it)[1].get<double>()};
}

}  // namespace

Xoshiro256::Xoshiro256(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& s : s_) s = splitmix64(sm);
}

std::uint64_t Xoshiro256::next() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Xoshiro256::uniform() noexcept {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Xoshiro256::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t Xoshiro256::below(std::uint64_t n) noexcept {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
}

GeoPoint HubSpec::center_at(PeriodId period) const noexcept {
  const double k = static_cast<double>(period - start);
  return GeoPoint{center.x + drift.x * k, center.y + drift.y * k};
}

void GeneratorSpec::validate() const {
  if (num_periods < 0) bad_field("num_periods", "must be >= 0");
  if (period_seconds <= 0) bad_field("period_seconds", "must be > 0");
  if (noise_per_period < 0) bad_field("noise_per_period", "must be >= 0");
  if (noise_bounds.min_x > noise_bounds.max_x || noise_bounds.min_y > noise_bounds.max_y) {
    bad_field("noise_bounds", "min must not exceed max");
  }
  for (std::size_t i = 0; i < hubs.size(); ++i) {
    const HubSpec& h = hubs[i];
    const std::string where = "hubs[" + std::to_string(i) + "]";
    if (!(h.stddev > 0.0) || !std::isfinite(h.stddev)) bad_field(where + ".stddev", "must be > 0");
    if (h.points_per_period < 0) bad_field(where + ".points_per_period", "must be >= 0");
    if (h.start < 0 || h.end > num_periods || h.start > h.end) {
      bad_field(where + ".lifetime", "must lie within [0, num_periods)");
    }
    if (!std::isfinite(h.center.x) || !std::isfinite(h.center.y)) {
      bad_field(where + ".center", "must be finite");
    }
  }
}

GeneratorSpec parse_generator_spec(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("spec is not valid JSON: ") + e.what());
  }
  check_keys(doc, "",
             {"seed", "num_periods", "period_seconds", "epoch", "noise_per_period",
              "noise_bounds", "hubs"});

  GeneratorSpec spec;
  spec.seed = get_field<std::uint64_t>(doc, "", "seed", spec.seed);
  spec.num_periods = get_field<std::int64_t>(doc, "", "num_periods", spec.num_periods);
  spec.period_seconds = get_field<std::int64_t>(doc, "", "period_seconds", spec.period_seconds);
  spec.noise_per_period = get_field<std::int64_t>(doc, "", "noise_per_period", spec.noise_per_period);
  if (auto it = doc.find("epoch"); it != doc.end()) {
    try {
      spec.epoch = it->is_number_integer() ? it->get<Timestamp>()
                                           : parse_timestamp(it->get<std::string>());
    } catch (const std::exception&) {
      bad_field("epoch", "expected integer seconds or an RFC 3339 string");
    }
  }
  if (auto it = doc.find("noise_bounds"); it != doc.end()) {
    const json& b = *it;
    if (!b.is_array() || b.size() != 4) bad_field("noise_bounds", "expected [min_x, min_y, max_x, max_y]");
    for (const auto& v : b) {
      if (!v.is_number()) bad_field("noise_bounds", "expected numbers");
    }
    spec.noise_bounds = Bounds{b[0].get<double>(), b[2].get<double>(), b[1].get<double>(),
                               b[3].get<double>()};
  }
  if (auto it = doc.find("hubs"); it != doc.end()) {
    if (!it->is_array()) bad_field("hubs", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& h = (*it)[i];
      const std::string where = "hubs[" + std::to_string(i) + "]";
      check_keys(h, where, {"center", "stddev", "points_per_period", "lifetime", "drift"});
      if (!h.contains("center")) bad_field(where + ".center", "required");
      HubSpec hub;
      hub.center = get_point(h, where, "center", {});
      hub.drift = get_point(h, where, "drift", {});
      hub.stddev = get_field<double>(h, where, "stddev", hub.stddev);
      hub.points_per_period = get_field<std::int64_t>(h, where, "points_per_period", hub.points_per_period);
      hub.start = 0;
      hub.end = spec.num_periods;
      if (auto lt = h.find("lifetime"); lt != h.end()) {
        if (!lt->is_array() || lt->size() != 2 || !(*lt)[0].is_number_integer() ||
            !(*lt)[1].is_number_integer()) {
          bad_field(where + ".lifetime", "expected [start, end)");
        }
        hub.start = (*lt)[0].get<PeriodId>();
        hub.end = (*lt)[1].get<PeriodId>();
      }
      spec.hubs.push_back(hub);
    }
  }
  spec.validate();
  return spec;
}

std::vector<StreamRecord> GeneratedStream::stream() const {
  std::vector<StreamRecord> out;
  out.reserve(records.size());
  for (const GeneratedRecord& r : records) out.push_back(StreamRecord{r.point, r.period});
  return out;
}

GeneratedStream generate(const GeneratorSpec& spec) {
  spec.validate();
  Xoshiro256 rng(spec.seed);
  GeneratedStream out;
  std::vector<GeoPoint> batch;

  for (PeriodId p = 0; p < spec.num_periods; ++p) {
    batch.clear();
    for (std::size_t h = 0; h < spec.hubs.size(); ++h) {
      const HubSpec& hub = spec.hubs[h];
      if (p < hub.start || p >= hub.end) continue;
      const GeoPoint c = hub.center_at(p);
      out.truth.push_back(TruthRow{p, h, c});
      for (std::int64_t k = 0; k < hub.points_per_period; ++k) {
        const double dx = rng.normal() * hub.stddev;
        const double dy = rng.normal() * hub.stddev;
        batch.push_back(GeoPoint{c.x + dx, c.y + dy});
      }
    }
    const Bounds& nb = spec.noise_bounds;
    for (std::int64_t k = 0; k < spec.noise_per_period; ++k) {
      const double x = nb.min_x + rng.uniform() * (nb.max_x - nb.min_x);
      const double y = nb.min_y + rng.uniform() * (nb.max_y - nb.min_y);
      batch.push_back(GeoPoint{x, y});
    }
    for (std::size_t i = batch.size(); i > 1; --i) {
      std::swap(batch[i - 1], batch[rng.below(i)]);
    }
    const Timestamp start = spec.epoch + p * spec.period_seconds;
    const auto n = static_cast<std::int64_t>(batch.size());
    for (std::int64_t k = 0; k < n; ++k) {
      out.records.push_back(
          GeneratedRecord{batch[static_cast<std::size_t>(k)], start + k * spec.period_seconds / n, p});
    }
  }
  return out;
}

}  // namespace sraster
