/*
 *
 * Copyright 2026 The mcmf-lab Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#include "mcmf/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>

namespace mcmf {
namespace {

using Kind = DataError::Kind;

void strip_cr(std::string& s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
}

// Splits without allocating the pieces; views stay valid while `line` lives.
void split(std::string_view line, char delim,
           std::vector<std::string_view>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return value;
}

std::optional<bool> parse_flag(std::string_view s) {
  if (s == "0") return false;
  if (s == "1") return true;
  return std::nullopt;
}

// Label columns in joined raw logs may hold counts.
std::optional<bool> parse_count_flag(std::string_view s) {
  auto n = parse_number<std::int64_t>(s);
  if (!n || *n < 0) return std::nullopt;
  return *n > 0;
}

[[noreturn]] void fail(Kind kind, std::size_t line, const std::string& what) {
  throw DataError(kind, line, what);
}

void check_record(const BidRecord& rec, std::size_t line,
                  std::optional<std::int64_t>& last_ts) {
  if (auto problem = validate_record(rec)) {
    fail(rec.conversion && !rec.click ? Kind::LabelViolation
                                      : Kind::MalformedRow,
         line, *problem);
  }
  if (last_ts && rec.ts < *last_ts) {
    fail(Kind::NonMonotonicTimestamp, line,
         "ts " + std::to_string(rec.ts) + " precedes " +
             std::to_string(*last_ts));
  }
  last_ts = rec.ts;
}

}  // namespace

DataError::DataError(Kind kind, std::size_t line, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + " at line " +
                         std::to_string(line) + ": " + detail),
      kind_(kind),
      line_(line) {}

std::string_view to_string(DataError::Kind kind) {
  switch (kind) {
    case Kind::MalformedRow: return "MalformedRow";
    case Kind::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case Kind::LabelViolation: return "LabelViolation";
  }
  return "DataError";
}

CanonicalReader::CanonicalReader(std::istream& in) : in_(in) {
  if (!std::getline(in_, buffer_)) {
    fail(Kind::MalformedRow, 1, "missing header");
  }
  line_ = 1;
  strip_cr(buffer_);
  if (buffer_ != kCanonicalHeader) {
    fail(Kind::MalformedRow, 1, "unexpected header '" + buffer_ + "'");
  }
}

std::optional<BidRecord> CanonicalReader::next() {
  if (!std::getline(in_, buffer_)) return std::nullopt;
  ++line_;
  strip_cr(buffer_);

  std::array<std::string_view, 6> f;
  std::string_view rest = buffer_;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto pos = rest.find(',');
    if ((pos == std::string_view::npos) != (i + 1 == f.size())) {
      fail(Kind::MalformedRow, line_, "expected 6 comma-separated fields");
    }
    f[i] = rest.substr(0, pos);
    if (pos != std::string_view::npos) rest.remove_prefix(pos + 1);
  }

  const auto ts = parse_number<std::int64_t>(f[0]);
  const auto pctr = parse_number<double>(f[1]);
  const auto pcvr = parse_number<double>(f[2]);
  const auto price = parse_number<Fen>(f[3]);
  const auto click = parse_flag(f[4]);
  const auto conversion = parse_flag(f[5]);
  if (!ts || !pctr || !pcvr || !price || !click || !conversion) {
    fail(Kind::MalformedRow, line_, "unparsable field in '" + buffer_ + "'");
  }
  BidRecord rec{*ts, *pctr, *pcvr, *price, *click, *conversion};
  check_record(rec, line_, last_ts_);
  return rec;
}

std::vector<BidRecord> parse_canonical(std::istream& in) {
  CanonicalReader reader(in);
  std::vector<BidRecord> out;
  while (auto rec = reader.next()) out.push_back(*rec);
  return out;
}

std::string format_probability(double p) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), p,
                                 std::chars_format::fixed);
  return std::string(buf.data(), ptr);
}

void write_canonical_header(std::ostream& out) {
  out << kCanonicalHeader << '\n';
}

void write_canonical_row(std::ostream& out, const BidRecord& r) {
  out << r.ts << ',' << format_probability(r.pctr) << ','
      << format_probability(r.pcvr) << ',' << r.market_price << ','
      << (r.click ? '1' : '0') << ',' << (r.conversion ? '1' : '0') << '\n';
}

void write_canonical(std::ostream& out, std::span<const BidRecord> records) {
  write_canonical_header(out);
  for (const auto& r : records) write_canonical_row(out, r);
}

double quantize_probability(double p) { return std::round(p * 1e6) / 1e6; }

std::optional<std::int64_t> parse_compact_timestamp(std::string_view s) {
  if (s.size() != 17 ||
      !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  auto num = [&](std::size_t pos, std::size_t len) {
    return *parse_number<int>(s.substr(pos, len));
  };
  using namespace std::chrono;
  const year_month_day date{year{num(0, 4)},
                            month{static_cast<unsigned>(num(4, 2))},
                            day{static_cast<unsigned>(num(6, 2))}};
  const int hh = num(8, 2), mm = num(10, 2), ss = num(12, 2), ms = num(14, 3);
  if (!date.ok() || hh > 23 || mm > 59 || ss > 59) return std::nullopt;
  const auto t = sys_days{date} + hours{hh} + minutes{mm} + seconds{ss} +
                 milliseconds{ms};
  return duration_cast<milliseconds>(t.time_since_epoch()).count();
}

std::size_t convert_ipinyou(std::istream& raw, const ColumnMap& map,
                            std::ostream& canonical) {
  if (!map.pctr || !map.pcvr) {
    throw ConfigError("column map is missing a prediction column");
  }
  const std::size_t needed =
      1 + std::max({map.ts, *map.pctr, *map.pcvr, map.market_price, map.click,
                    map.conversion});

  std::string line;
  std::size_t line_no = 0;
  if (map.has_header) {
    if (!std::getline(raw, line)) return 0;
    line_no = 1;
  }
  write_canonical_header(canonical);

  std::vector<std::string_view> fields;
  std::optional<std::int64_t> last_ts;
  std::size_t written = 0;
  while (std::getline(raw, line)) {
    ++line_no;
    strip_cr(line);
    split(line, map.delimiter, fields);
    if (fields.size() < needed) {
      fail(Kind::MalformedRow, line_no,
           "row has " + std::to_string(fields.size()) + " columns, map needs " +
               std::to_string(needed));
    }
    const auto ts = map.ts_format == TimestampFormat::EpochMillis
                        ? parse_number<std::int64_t>(fields[map.ts])
                        : parse_compact_timestamp(fields[map.ts]);
    const auto pctr = parse_number<double>(fields[*map.pctr]);
    const auto pcvr = parse_number<double>(fields[*map.pcvr]);
    const auto price = parse_number<Fen>(fields[map.market_price]);
    const auto click = parse_count_flag(fields[map.click]);
    const auto conversion = parse_count_flag(fields[map.conversion]);
    if (!ts || !pctr || !pcvr || !price || !click || !conversion) {
      fail(Kind::MalformedRow, line_no, "unparsable mapped field");
    }
    BidRecord rec{*ts, *pctr, *pcvr, *price, *click, *conversion};
    check_record(rec, line_no, last_ts);
    write_canonical_row(canonical, rec);
    ++written;
  }
  return written;
}

void SynthConfig::validate() const {
  auto open_unit = [](double p) { return p > 0.0 && p < 1.0; };
  if (n_records < 0) throw ConfigError("n_records must be >= 0");
  if (!open_unit(ctr_true) || !open_unit(cvr_true)) {
    throw ConfigError("ctr_true and cvr_true must be in (0,1)");
  }
  if (price_log_sigma < 0.0) throw ConfigError("price_log_sigma must be >= 0");
  if (pctr_noise < 0.0 || pcvr_noise < 0.0) {
    throw ConfigError("prediction noise must be >= 0");
  }
  if (!(pctr_bias > 0.0) || !(pcvr_bias > 0.0)) {
    throw ConfigError("prediction bias must be > 0");
  }
  if (ts_step < 1) throw ConfigError("ts_step must be >= 1");
}

SyntheticGenerator::SyntheticGenerator(const SynthConfig& config)
    : config_(config), rng_(config.seed) {
  config_.validate();
}

double SyntheticGenerator::noisy(double truth, double bias,
                                 double noise_scale) {
  const double p = truth * bias * (1.0 + noise_scale * normal_(rng_));
  return quantize_probability(std::clamp(p, 1e-6, 1.0));
}

std::optional<BidRecord> SyntheticGenerator::next() {
  if (produced_ >= config_.n_records) return std::nullopt;
  auto uniform = [this] { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; };

  BidRecord rec;
  rec.ts = config_.ts_start + produced_ * config_.ts_step;
  rec.market_price = static_cast<Fen>(std::llround(std::exp(
      config_.price_log_mean + config_.price_log_sigma * normal_(rng_))));
  rec.click = uniform() < config_.ctr_true;
  const bool converts = uniform() < config_.cvr_true;
  rec.conversion = rec.click && converts;
  rec.pctr = noisy(config_.ctr_true, config_.pctr_bias, config_.pctr_noise);
  rec.pcvr = noisy(config_.cvr_true, config_.pcvr_bias, config_.pcvr_noise);
  ++produced_;
  return rec;
}

std::vector<BidRecord> generate_synthetic(const SynthConfig& config) {
  SyntheticGenerator gen(config);
  std::vector<BidRecord> out;
  out.reserve(static_cast<std::size_t>(config.n_records));
  while (auto rec = gen.next()) out.push_back(*rec);
  return out;
}

}  // namespace mcmf
