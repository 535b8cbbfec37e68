#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ufz/format.hpp"
#include "ufz/pipeline.hpp"

namespace ufz {

double mean_squared_error(std::span<const float> original, std::span<const float> reconstructed);
double max_abs_error(std::span<const float> original, std::span<const float> reconstructed);

/// 20*log10(range / sqrt(MSE)) with range = original max - min.
/// +infinity when MSE is 0. Throws Errc::length_mismatch, or
/// Errc::degenerate_range when the range is 0 but MSE is not.
double psnr(const DataField& original, const DataField& reconstructed);
double psnr(std::span<const float> original, std::span<const float> reconstructed, double value_range);

double compression_ratio(std::size_t original_bytes, std::size_t compressed_bytes);

/// N*b / seconds (bytes per second). Throws Errc::non_positive_time.
double throughput(std::size_t n, std::size_t bytes_per_element, double seconds);

/// Stored-bit totals of the byte-aligned (shifted) scheme and of the
/// unshifted bit-exact scheme over the same blocks and required lengths.
struct ShiftAccounting {
  bool enabled = false;
  std::uint64_t values = 0;
  std::uint64_t shifted_bits = 0;    // sum 8*(q - L'_i)
  std::uint64_t unshifted_bits = 0;  // sum max(0, R - 8*L_i)
};

/// Shadow pass: classifies and analyses every block exactly like compress(),
/// but only counts bits.
ShiftAccounting account_shift(const DataField& field, const CompressorConfig& cfg);

/// (shifted_bits - unshifted_bits) / (compressed_bytes * 8).
/// Throws Errc::accounting_disabled if `acc` did not come from account_shift.
double shift_overhead(const ShiftAccounting& acc, std::size_t compressed_bytes);

struct CdfPoint {
  double threshold = 0.0;
  double fraction = 0.0;
};

inline constexpr double kDefaultCdfThresholds[] = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};

/// Empirical CDF of per-block relative value ranges
/// (block max - block min) / (global max - global min), sampled at
/// `thresholds`. Throws Errc::degenerate_range for a flat field.
std::vector<CdfPoint> block_range_cdf(const DataField& field, std::size_t block_size,
                                      std::span<const double> thresholds = kDefaultCdfThresholds);

double harmonic_mean(std::span<const double> values);
double weighted_mean(std::span<const double> values, std::span<const double> weights);

struct QualityReport {
  std::string label;
  double error_bound = 0.0;
  std::size_t block_size = 0;
  std::size_t original_bytes = 0;
  std::size_t compressed_bytes = 0;
  double cr = 0.0;
  double mse = 0.0;
  double psnr_db = 0.0;
  double max_abs_error = 0.0;
  double ct_bytes_per_sec = 0.0;
  double dt_bytes_per_sec = 0.0;
  std::optional<double> shift_overhead_fraction;
  std::vector<CdfPoint> block_range_cdf;

  /// One `key=value` pair per line.
  std::string to_key_value() const;
  /// A single JSON object.
  std::string to_json() const;
};

/// JSON array holding one object per report.
std::string reports_to_json(std::span<const QualityReport> reports);

struct MeasureOptions {
  std::string label;
  bool shift_accounting = false;
  bool range_cdf = false;
};

/// Times compress and decompress (monotonic clock, codec only) and fills
/// every field of the report.
QualityReport measure_round_trip(const DataField& field, const CompressorConfig& cfg, const MeasureOptions& opts = {});

}  // namespace ufz
