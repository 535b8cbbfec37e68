#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ufz/error.hpp"

namespace ufz {

/// A validated raw floating-point dataset: finite f32 values in row-major
/// order plus the dimension list and global value statistics.
class DataField {
 public:
  static constexpr std::size_t element_size_bytes = sizeof(float);

  /// Throws Errc::empty_field, Errc::dims_mismatch or Errc::non_finite_value.
  DataField(std::vector<float> values, std::vector<std::uint64_t> dims);

  /// Convenience for flat data: dims = {values.size()}.
  explicit DataField(std::vector<float> values);

  std::span<const float> values() const noexcept { return values_; }
  const std::vector<std::uint64_t>& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::size_t size_bytes() const noexcept { return values_.size() * element_size_bytes; }

  float global_min() const noexcept { return min_; }
  float global_max() const noexcept { return max_; }
  /// global_max - global_min, evaluated in double so it cannot overflow.
  double value_range() const noexcept { return static_cast<double>(max_) - static_cast<double>(min_); }

  std::vector<float> release() && { return std::move(values_); }

 private:
  std::vector<float> values_;
  std::vector<std::uint64_t> dims_;
  float min_ = 0.0f;
  float max_ = 0.0f;
};

enum class BoundMode : std::uint8_t { absolute, relative };

struct ErrorBoundSpec {
  BoundMode mode = BoundMode::relative;
  double magnitude = 1e-3;

  static ErrorBoundSpec absolute(double e) { return {BoundMode::absolute, e}; }
  static ErrorBoundSpec relative(double rel) { return {BoundMode::relative, rel}; }

  /// Throws Errc::invalid_bound unless magnitude is finite and > 0.
  void validate() const;
};

struct BlockSummary {
  std::size_t index = 0;
  std::size_t count = 0;
  float mu = 0.0f;
  // Largest deviation of the block extremes from the stored mu.
  double radius = 0.0;
  bool is_constant = true;
  int required_bits = 0;
  int shift = 0;

  /// (R + s) / 8; zero for constant blocks.
  int required_bytes() const noexcept { return is_constant ? 0 : (required_bits + shift) / 8; }
};

struct EncodedBlock {
  std::vector<std::uint8_t> leading_codes;  // one 2-bit code per element
  std::vector<std::uint8_t> mid_bytes;
  int required_byte_count = 0;

  void clear() {
    leading_codes.clear();
    mid_bytes.clear();
    required_byte_count = 0;
  }

  bool operator==(const EncodedBlock&) const = default;
};

enum class DType : std::uint8_t { f32 = 0x00, f64 = 0x01 };

inline constexpr std::array<std::uint8_t, 4> kMagic = {'U', 'F', 'Z', 'X'};
inline constexpr std::uint8_t kFormatVersion = 0x01;

struct Header {
  std::uint8_t version = kFormatVersion;
  DType dtype = DType::f32;
  std::uint16_t block_size = 128;
  double error_bound = 0.0;  // resolved absolute bound e
  std::vector<std::uint64_t> dims;

  std::uint64_t element_count() const noexcept;
  std::size_t block_count() const noexcept;
  /// Number of elements in block k (the tail block may be short).
  std::size_t block_length(std::size_t k) const noexcept;
  std::size_t serialized_size() const noexcept { return 17 + 8 * dims.size(); }

  bool operator==(const Header&) const = default;
};

/// The in-memory form of a `.ufzx` container. Pools are kept in their
/// on-disk packing so serialization is a straight copy.
struct CompressedStream {
  Header header;
  std::vector<std::uint8_t> constant_map;       // ceil(nblocks/8) bytes, LSB-first
  std::vector<float> mu_array;                  // one per block
  std::vector<std::uint8_t> req_len_array;      // one per non-constant block
  std::vector<std::uint8_t> leading_code_pool;  // 2 bits per non-constant element, LSB-first
  std::vector<std::uint8_t> mid_byte_pool;

  bool is_constant(std::size_t block) const noexcept {
    return (constant_map[block / 8] >> (block % 8)) & 1u;
  }
  std::size_t nonconstant_block_count() const noexcept { return req_len_array.size(); }
  std::size_t nonconstant_element_count() const noexcept;

  /// header + ceil(nblocks/8) + 4*nblocks + nonconst_blocks
  ///   + ceil(2*nonconst_elements/8) + |mid_byte_pool|
  std::size_t compressed_size() const noexcept;

  /// Checks every structural invariant (pool lengths derivable from the
  /// header, map and req_len_array). Throws Errc::inconsistent_lengths.
  /// The mid-pool length check walks every leading code; decoders that
  /// detect over- and underrun themselves can skip it.
  void validate(bool check_mid_pool = true) const;

  bool operator==(const CompressedStream& other) const;
};

// Packed-array helpers shared by the encoders and the container reader.

inline std::uint8_t read_code(std::span<const std::uint8_t> pool, std::size_t i) noexcept {
  return (pool[i / 4] >> (2 * (i % 4))) & 0x3u;
}

inline void write_code(std::span<std::uint8_t> pool, std::size_t i, std::uint8_t code) noexcept {
  const unsigned sh = 2 * (i % 4);
  pool[i / 4] = static_cast<std::uint8_t>((pool[i / 4] & ~(0x3u << sh)) | ((code & 0x3u) << sh));
}

inline std::size_t code_pool_bytes(std::size_t elements) noexcept { return (2 * elements + 7) / 8; }
inline std::size_t map_bytes(std::size_t blocks) noexcept { return (blocks + 7) / 8; }

/// Bytes of mid-pool an element contributes given its code and the
/// block's required byte count q.
inline int mid_length(std::uint8_t code, int q) noexcept { return q - (code < q ? code : q); }

std::vector<std::uint8_t> serialize(const CompressedStream& stream);

/// Throws Errc::malformed_magic, version_mismatch, unsupported_dtype,
/// truncated_stream or inconsistent_lengths.
CompressedStream deserialize(std::span<const std::uint8_t> bytes);

}  // namespace ufz
