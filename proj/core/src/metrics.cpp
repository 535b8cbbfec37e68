#include "ufz/metrics.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ufz/block_codec.hpp"

namespace ufz {

namespace {

void require_same_length(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size())
    throw Error(Errc::length_mismatch, std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " elements");
}

}  // namespace

double mean_squared_error(std::span<const float> original, std::span<const float> reconstructed) {
  require_same_length(original, reconstructed);
  if (original.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < original.size(); ++i) {
    const double d = static_cast<double>(original[i]) - static_cast<double>(reconstructed[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(original.size());
}

double max_abs_error(std::span<const float> original, std::span<const float> reconstructed) {
  require_same_length(original, reconstructed);
  double worst = 0.0;
  for (std::size_t i = 0; i < original.size(); ++i)
    worst = std::max(worst, std::fabs(static_cast<double>(original[i]) - static_cast<double>(reconstructed[i])));
  return worst;
}

double psnr(std::span<const float> original, std::span<const float> reconstructed, double value_range) {
  const double mse = mean_squared_error(original, reconstructed);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  if (!(value_range > 0.0)) throw Error(Errc::degenerate_range, "PSNR undefined for a zero value range");
  return 20.0 * std::log10(value_range / std::sqrt(mse));
}

double psnr(const DataField& original, const DataField& reconstructed) {
  return psnr(original.values(), reconstructed.values(), original.value_range());
}

double compression_ratio(std::size_t original_bytes, std::size_t compressed_bytes) {
  return static_cast<double>(original_bytes) / static_cast<double>(compressed_bytes);
}

double throughput(std::size_t n, std::size_t bytes_per_element, double seconds) {
  if (!(seconds > 0.0)) throw Error(Errc::non_positive_time, "elapsed time must be > 0");
  return static_cast<double>(n) * static_cast<double>(bytes_per_element) / seconds;
}

ShiftAccounting account_shift(const DataField& field, const CompressorConfig& cfg) {
  cfg.validate();
  const double e = resolve_bound(cfg.bound, field);
  const auto values = field.values();
  const std::size_t n = values.size();
  ShiftAccounting acc;
  acc.enabled = true;
  for (std::size_t k = 0, nb = block_count(n, cfg.block_size); k < nb; ++k) {
    const auto r = block_range(k, n, cfg.block_size);
    const auto block = values.subspan(r.begin, r.count);
    const BlockSummary s = summarize_block(block, e, k);
    if (s.is_constant) continue;
    const int bits = s.required_bits;
    const int q = s.required_bytes();
    const std::uint32_t mask = prefix_mask(bits);
    std::uint32_t prev_plain = 0;
    std::uint32_t prev_shifted = 0;
    for (float d : block) {
      const std::uint32_t plain = std::bit_cast<std::uint32_t>(normalize(d, s)) & mask;
      const std::uint32_t shifted = plain >> s.shift;
      const int reused = std::min({3, std::countl_zero(shifted ^ prev_shifted) / 8, q});
      const int reused_plain = std::min(3, std::countl_zero(plain ^ prev_plain) / 8);
      acc.shifted_bits += static_cast<std::uint64_t>(8 * (q - reused));
      acc.unshifted_bits += static_cast<std::uint64_t>(std::max(0, bits - 8 * reused_plain));
      prev_plain = plain;
      prev_shifted = shifted;
      ++acc.values;
    }
  }
  return acc;
}

double shift_overhead(const ShiftAccounting& acc, std::size_t compressed_bytes) {
  if (!acc.enabled) throw Error(Errc::accounting_disabled, "no shift accounting was recorded");
  if (compressed_bytes == 0) throw Error(Errc::length_mismatch, "compressed size is zero");
  const double extra = static_cast<double>(acc.shifted_bits) - static_cast<double>(acc.unshifted_bits);
  return extra / (static_cast<double>(compressed_bytes) * 8.0);
}

std::vector<CdfPoint> block_range_cdf(const DataField& field, std::size_t block_size,
                                      std::span<const double> thresholds) {
  if (block_size == 0) throw Error(Errc::invalid_config, "block size must be > 0");
  const double range = field.value_range();
  if (!(range > 0.0)) throw Error(Errc::degenerate_range, "block range CDF needs a nonzero global range");
  const auto values = field.values();
  const std::size_t n = values.size();
  const std::size_t nb = block_count(n, block_size);
  std::vector<double> rel(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    const auto r = block_range(k, n, block_size);
    const auto [lo, hi] = std::minmax_element(values.begin() + r.begin, values.begin() + r.begin + r.count);
    rel[k] = (static_cast<double>(*hi) - static_cast<double>(*lo)) / range;
  }
  std::sort(rel.begin(), rel.end());
  std::vector<CdfPoint> cdf;
  cdf.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto below = std::upper_bound(rel.begin(), rel.end(), t) - rel.begin();
    cdf.push_back({t, static_cast<double>(below) / static_cast<double>(nb)});
  }
  return cdf;
}

double harmonic_mean(std::span<const double> values) {
  if (values.empty()) throw Error(Errc::length_mismatch, "harmonic mean of no values");
  double inv = 0.0;
  for (double v : values) inv += 1.0 / v;
  return static_cast<double>(values.size()) / inv;
}

double weighted_mean(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size() || values.empty())
    throw Error(Errc::length_mismatch, "weighted mean needs one weight per value");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    num += values[i] * weights[i];
    den += weights[i];
  }
  return num / den;
}

namespace {

nlohmann::json report_json(const QualityReport& r) {
  nlohmann::json j;
  j["label"] = r.label;
  j["error_bound"] = r.error_bound;
  j["block_size"] = r.block_size;
  j["original_bytes"] = r.original_bytes;
  j["compressed_bytes"] = r.compressed_bytes;
  j["cr"] = r.cr;
  j["mse"] = r.mse;
  // JSON has no infinity; lossless round trips report null
  j["psnr_db"] = std::isfinite(r.psnr_db) ? nlohmann::json(r.psnr_db) : nlohmann::json(nullptr);
  j["max_abs_error"] = r.max_abs_error;
  j["ct_bytes_per_sec"] = r.ct_bytes_per_sec;
  j["dt_bytes_per_sec"] = r.dt_bytes_per_sec;
  j["shift_overhead_fraction"] =
      r.shift_overhead_fraction ? nlohmann::json(*r.shift_overhead_fraction) : nlohmann::json(nullptr);
  auto cdf = nlohmann::json::array();
  for (const auto& p : r.block_range_cdf) cdf.push_back({{"threshold", p.threshold}, {"fraction", p.fraction}});
  j["block_range_cdf"] = std::move(cdf);
  return j;
}

}  // namespace

std::string QualityReport::to_key_value() const {
  std::ostringstream out;
  out.precision(std::numeric_limits<double>::max_digits10);
  out << "label=" << label << '\n'
      << "error_bound=" << error_bound << '\n'
      << "block_size=" << block_size << '\n'
      << "original_bytes=" << original_bytes << '\n'
      << "compressed_bytes=" << compressed_bytes << '\n'
      << "cr=" << cr << '\n'
      << "mse=" << mse << '\n'
      << "psnr_db=" << (std::isinf(psnr_db) ? std::string("inf") : std::to_string(psnr_db)) << '\n'
      << "max_abs_error=" << max_abs_error << '\n'
      << "ct_bytes_per_sec=" << ct_bytes_per_sec << '\n'
      << "dt_bytes_per_sec=" << dt_bytes_per_sec << '\n';
  if (shift_overhead_fraction) out << "shift_overhead_fraction=" << *shift_overhead_fraction << '\n';
  for (const auto& p : block_range_cdf) out << "block_range_cdf[" << p.threshold << "]=" << p.fraction << '\n';
  return out.str();
}

std::string QualityReport::to_json() const { return report_json(*this).dump(2); }

std::string reports_to_json(std::span<const QualityReport> reports) {
  auto arr = nlohmann::json::array();
  for (const auto& r : reports) arr.push_back(report_json(r));
  return arr.dump(2);
}

QualityReport measure_round_trip(const DataField& field, const CompressorConfig& cfg, const MeasureOptions& opts) {
  using clock = std::chrono::steady_clock;
  QualityReport r;
  r.label = opts.label;
  r.block_size = cfg.block_size;
  r.original_bytes = field.size_bytes();

  const auto t0 = clock::now();
  const CompressedStream stream = compress(field, cfg);
  const auto t1 = clock::now();
  const DataField recon = decompress(stream, cfg.execution, cfg.workers);
  const auto t2 = clock::now();

  r.error_bound = stream.header.error_bound;
  r.compressed_bytes = stream.compressed_size();
  r.cr = compression_ratio(r.original_bytes, r.compressed_bytes);
  r.mse = mean_squared_error(field.values(), recon.values());
  r.max_abs_error = max_abs_error(field.values(), recon.values());
  r.psnr_db = r.mse == 0.0 ? std::numeric_limits<double>::infinity()
                           : psnr(field.values(), recon.values(), field.value_range());
  // clamp to one tick so sub-resolution runs still report a finite rate
  const double ct_s = std::max(std::chrono::duration<double>(t1 - t0).count(), 1e-9);
  const double dt_s = std::max(std::chrono::duration<double>(t2 - t1).count(), 1e-9);
  r.ct_bytes_per_sec = throughput(field.size(), DataField::element_size_bytes, ct_s);
  r.dt_bytes_per_sec = throughput(field.size(), DataField::element_size_bytes, dt_s);
  if (opts.shift_accounting) r.shift_overhead_fraction = shift_overhead(account_shift(field, cfg), r.compressed_bytes);
  if (opts.range_cdf && field.value_range() > 0.0) r.block_range_cdf = block_range_cdf(field, cfg.block_size);
  return r;
}

}  // namespace ufz
