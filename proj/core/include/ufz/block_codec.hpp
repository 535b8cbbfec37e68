#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ufz/format.hpp"

namespace ufz {

/// Unbiased binary exponent of |x|: 2^p <= |x| < 2^(p+1). Subnormals get
/// their true exponent; p(0) is pinned to -127.
int exponent_of(double x) noexcept;

/// A 32-bit float seen through its IEEE-754 fields.
struct ExponentView {
  float value = 0.0f;
  std::uint32_t word = 0;
  int exponent = -127;

  explicit ExponentView(float v) noexcept
      : value(v), word(std::bit_cast<std::uint32_t>(v)), exponent(exponent_of(v)) {}
};

/// Mask keeping the `bits` most-significant bits of a 32-bit word.
constexpr std::uint32_t prefix_mask(int bits) noexcept {
  return bits <= 0 ? 0u : bits >= 32 ? 0xFFFFFFFFu : 0xFFFFFFFFu << (32 - bits);
}

/// Kept word-prefix length for a block of radius r under bound e:
/// sign + exponent field + (p(r) - p(e)) mantissa bits, clamped to [0, 32].
int required_bits(double radius, double e) noexcept;

/// Right shift that makes R + s a whole number of bytes.
constexpr int shift_amount(int required) noexcept { return required % 8 == 0 ? 0 : 8 - required % 8; }

/// Offset subtracted before bit analysis. Full-width (R = 32) blocks are
/// stored verbatim so they reconstruct bit-exactly.
constexpr float normalization_offset(const BlockSummary& s) noexcept {
  return s.required_bits >= 32 ? 0.0f : s.mu;
}

/// d - mu in source precision (d itself for verbatim blocks).
inline float normalize(float d, const BlockSummary& s) noexcept { return s.required_bits >= 32 ? d : d - s.mu; }

/// Inverse of the normalization applied to a kept word prefix.
inline float denormalize(std::uint32_t kept_word, const BlockSummary& s) noexcept {
  const float v = std::bit_cast<float>(kept_word);
  return s.required_bits >= 32 ? v : v + s.mu;
}

/// Block analysis: mu, radius, constant classification and, for
/// non-constant blocks, the required bit length and shift. The bit length
/// starts at required_bits(radius, e) and is raised only if float rounding
/// of the actual reconstruction would break the bound for some element.
///
/// Throws Errc::empty_block, Errc::non_finite_value, Errc::invalid_bound.
BlockSummary summarize_block(std::span<const float> block, double e, std::size_t index = 0);

/// True when every element of `block` reconstructs within e under `summary`.
bool block_respects_bound(std::span<const float> block, const BlockSummary& summary, double e) noexcept;

void encode_nonconstant(std::span<const float> block, const BlockSummary& summary, EncodedBlock& out);
EncodedBlock encode_nonconstant(std::span<const float> block, const BlockSummary& summary);

/// Rebuilds `out.size()` values. Codes come from `code_at(i)`, mid bytes
/// are consumed from `mid` starting at `mid_cursor` (advanced on return).
/// Throws Errc::pool_underrun if `mid` runs out.
template <class CodeAt>
void decode_nonconstant_into(CodeAt&& code_at, std::span<const std::uint8_t> mid, std::size_t& mid_cursor,
                             const BlockSummary& summary, std::span<float> out);

std::vector<float> decode_nonconstant(const EncodedBlock& enc, const BlockSummary& summary, std::size_t count);

std::vector<float> decode_constant(float mu, std::size_t count);

[[noreturn]] void throw_pool_underrun(std::size_t need, std::size_t have);

template <class CodeAt>
void decode_nonconstant_into(CodeAt&& code_at, std::span<const std::uint8_t> mid, std::size_t& mid_cursor,
                             const BlockSummary& summary, std::span<float> out) {
  const int q = summary.required_bytes();
  const int s = summary.shift;
  std::size_t cursor = mid_cursor;
  std::uint32_t prev = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int code = static_cast<int>(code_at(i));
    const int reused = code < q ? code : q;
    const std::size_t need = static_cast<std::size_t>(q - reused);
    if (need > mid.size() - cursor) throw_pool_underrun(cursor + need, mid.size());
    std::uint32_t w = prev & prefix_mask(8 * reused);
    for (int j = reused; j < q; ++j) w |= static_cast<std::uint32_t>(mid[cursor++]) << (24 - 8 * j);
    prev = w;
    out[i] = denormalize(w << s, summary);
  }
  mid_cursor = cursor;
}

}  // namespace ufz
