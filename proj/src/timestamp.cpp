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

#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "sraster/errors.hpp"
#include "sraster/ingest.hpp"

namespace sraster {

namespace {

class Cursor {
 public:
  explicit Cursor(std::string_view s) : s_(s) {}

  int digits(std::size_t n) {
    int v = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) fail();
      v = v * 10 + (s_[pos_++] - '0');
    }
    return v;
  }

  void expect(char c) {
    if (pos_ >= s_.size() || s_[pos_] != c) fail();
    ++pos_;
  }

  bool accept(char c) {
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool done() const { return pos_ == s_.size(); }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  [[noreturn]] void fail() const {
    throw Error("malformed timestamp '" + std::string(s_) + "'");
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

bool looks_numeric(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  bool dot = false;
  for (; i < s.size(); ++i) {
    if (s[i] == '.' && !dot) {
      dot = true;
    } else if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
      return false;
    }
  }
  return true;
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  if (looks_numeric(text)) {
    if (text.find('.') == std::string_view::npos) {
      std::string_view digits = text[0] == '+' ? text.substr(1) : text;
      Timestamp v = 0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
      if (ec == std::errc() && ptr == digits.data() + digits.size()) return v;
    } else if (auto v = parse_double(text)) {
      return static_cast<Timestamp>(std::floor(*v));
    }
    throw Error("malformed timestamp '" + std::string(text) + "'");
  }

  using namespace std::chrono;
  Cursor c(text);
  const int y = c.digits(4);
  c.expect('-');
  const int mo = c.digits(2);
  c.expect('-');
  const int d = c.digits(2);
  if (!c.accept('T') && !c.accept('t') && !c.accept(' ')) c.fail();
  const int h = c.digits(2);
  c.expect(':');
  const int mi = c.digits(2);
  c.expect(':');
  const int s = c.digits(2);
  if (c.accept('.')) {
    if (!std::isdigit(static_cast<unsigned char>(c.peek()))) c.fail();
    while (std::isdigit(static_cast<unsigned char>(c.peek()))) c.digits(1);
  }
  int offset = 0;
  if (!c.accept('Z') && !c.accept('z')) {
    int sign = 0;
    if (c.accept('+')) {
      sign = 1;
    } else if (c.accept('-')) {
      sign = -1;
    } else {
      c.fail();
    }
    const int oh = c.digits(2);
    c.expect(':');
    const int om = c.digits(2);
    if (oh > 23 || om > 59) c.fail();
    offset = sign * (oh * 3600 + om * 60);
  }
  if (!c.done()) c.fail();

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) c.fail();
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<Timestamp>(days) * 86400 + h * 3600 + mi * 60 + s - offset;
}

std::string format_rfc3339(Timestamp t) {
  using namespace std::chrono;
  const sys_seconds tp{seconds{t}};
  const auto dp = floor<days>(tp);
  const year_month_day ymd{dp};
  const hh_mm_ss hms{tp - dp};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

PeriodId assign_period(Timestamp t, Timestamp epoch, std::int64_t period_seconds) {
  if (period_seconds <= 0) throw ConfigError("period length must be > 0");
  if (t < epoch) {
    throw RejectedInput(0, "timestamp " + std::to_string(t) + " precedes epoch " +
                               std::to_string(epoch));
  }
  return (t - epoch) / period_seconds;
}

Timestamp aligned_epoch(Timestamp first, std::int64_t period_seconds) {
  Timestamp q = first / period_seconds;
  if (first % period_seconds != 0 && first < 0) --q;
  return q * period_seconds;
}

}  // namespace sraster
