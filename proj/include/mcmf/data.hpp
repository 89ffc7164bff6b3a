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

// Bid-log I/O.
//
// Canonical log: UTF-8, comma-delimited, newline-terminated rows under the
// header
//
//   ts,pctr,pcvr,market_price,click,conversion
//
// ts is integer ms since epoch, pctr/pcvr are decimals with at most six
// fraction digits, market_price is integer fen, click/conversion are 0 or 1.
// Rows must be sorted by ts; the first violation aborts ingestion.

#ifndef MCMF_DATA_HPP
#define MCMF_DATA_HPP

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcmf/core.hpp"

namespace mcmf {

inline constexpr std::string_view kCanonicalHeader =
    "ts,pctr,pcvr,market_price,click,conversion";

class DataError : public std::runtime_error {
 public:
  enum class Kind { MalformedRow, NonMonotonicTimestamp, LabelViolation };

  DataError(Kind kind, std::size_t line, const std::string& detail);

  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

std::string_view to_string(DataError::Kind kind);

/// Streaming reader over a canonical log. Memory use does not depend on the
/// length of the stream.
class CanonicalReader {
 public:
  /// Consumes and checks the header line.
  explicit CanonicalReader(std::istream& in);

  /// Next record, or nullopt at end of stream. Throws DataError.
  std::optional<BidRecord> next();

  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::string buffer_;
  std::size_t line_ = 0;
  std::optional<std::int64_t> last_ts_;
};

std::vector<BidRecord> parse_canonical(std::istream& in);

/// Shortest fixed-notation decimal that parses back to the same double.
std::string format_probability(double p);

void write_canonical_header(std::ostream& out);
void write_canonical_row(std::ostream& out, const BidRecord& record);
void write_canonical(std::ostream& out, std::span<const BidRecord> records);

/// Rounds a probability to the six fraction digits the canonical format
/// carries.
double quantize_probability(double p);

enum class TimestampFormat {
  EpochMillis,
  /// iPinYou style yyyyMMddHHmmssSSS, interpreted as UTC.
  CompactDateTime,
};

/// Column layout of a raw delimited log. Indices are zero-based; prediction
/// columns are optional in the type so that a missing mapping is reported as
/// a configuration error rather than silently defaulted.
struct ColumnMap {
  std::size_t ts = 0;
  std::optional<std::size_t> pctr;
  std::optional<std::size_t> pcvr;
  std::size_t market_price = 3;
  std::size_t click = 4;
  std::size_t conversion = 5;
  char delimiter = ',';
  bool has_header = true;
  TimestampFormat ts_format = TimestampFormat::EpochMillis;
};

/// Milliseconds since the Unix epoch for a yyyyMMddHHmmssSSS stamp.
std::optional<std::int64_t> parse_compact_timestamp(std::string_view s);

/// Maps a raw log to canonical rows. Label columns may carry counts; any
/// positive count is a 1. Throws ConfigError for an incomplete map and
/// DataError for rejected rows. Returns the number of rows written.
std::size_t convert_ipinyou(std::istream& raw, const ColumnMap& map,
                            std::ostream& canonical);

struct SynthConfig {
  std::int64_t n_records = 0;
  double ctr_true = 0.05;
  double cvr_true = 0.1;
  double price_log_mean = 4.0;  // log fen
  double price_log_sigma = 0.5;
  double pctr_noise = 0.2;
  double pcvr_noise = 0.2;
  /// Mean of prediction / truth. Real logs are rarely calibrated; values
  /// below 1 model systematically conservative predictors.
  double pctr_bias = 1.0;
  double pcvr_bias = 1.0;
  std::int64_t ts_start = 1370000000000;  // 2013-05-31 UTC
  std::int64_t ts_step = 10;              // ms between records
  std::uint64_t seed = 0;

  void validate() const;
};

/// Seeded generator, one record at a time.
class SyntheticGenerator {
 public:
  explicit SyntheticGenerator(const SynthConfig& config);

  std::optional<BidRecord> next();

 private:
  double noisy(double truth, double bias, double noise_scale);

  SynthConfig config_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::int64_t produced_ = 0;
};

std::vector<BidRecord> generate_synthetic(const SynthConfig& config);

}  // namespace mcmf

#endif  // MCMF_DATA_HPP
