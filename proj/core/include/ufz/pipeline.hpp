#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "ufz/format.hpp"

namespace ufz {

enum class Execution : std::uint8_t { sequential, parallel_sim };

struct CompressorConfig {
  std::size_t block_size = 128;
  ErrorBoundSpec bound{};
  Execution execution = Execution::sequential;
  // Worker threads for parallel_sim; 0 picks hardware_concurrency.
  unsigned workers = 0;

  /// Throws Errc::invalid_config (block size outside [8, 65535]) or
  /// Errc::invalid_bound.
  void validate() const;
};

/// Absolute bound for `field`: the magnitude itself, or magnitude times the
/// global value range. Throws Errc::zero_range_relative_bound when a
/// relative bound meets a flat dataset.
double resolve_bound(const ErrorBoundSpec& spec, const DataField& field);

CompressedStream compress(const DataField& field, const CompressorConfig& cfg);

/// Sequential decompression. Throws the container errors if the stream is
/// structurally invalid and Errc::pool_underrun on a short mid-byte pool.
DataField decompress(const CompressedStream& stream);

/// Dispatches to the sequential or the parallel-model decoder.
DataField decompress(const CompressedStream& stream, Execution execution, unsigned workers = 0);

/// Element range [begin, begin + count) covered by block k.
struct BlockRange {
  std::size_t begin = 0;
  std::size_t count = 0;
};

inline BlockRange block_range(std::size_t k, std::size_t n, std::size_t block_size) noexcept {
  const std::size_t begin = k * block_size;
  const std::size_t rest = n - begin;
  return {begin, rest < block_size ? rest : block_size};
}

inline std::size_t block_count(std::size_t n, std::size_t block_size) noexcept {
  return n / block_size + (n % block_size != 0);
}

/// Block summary reconstructed from the stored stream fields.
BlockSummary stored_summary(const CompressedStream& stream, std::size_t block, std::size_t nonconst_index);

}  // namespace ufz
