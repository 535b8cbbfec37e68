#include "ufz/block_codec.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ufz {

int exponent_of(double x) noexcept {
  if (x == 0.0) return -127;
  return std::ilogb(x);
}

int required_bits(double radius, double e) noexcept {
  const int delta = exponent_of(radius) - exponent_of(e);
  // 1 sign bit + 8 exponent bits + delta mantissa bits
  return std::clamp(9 + delta, 0, 32);
}

namespace {

void set_bits(BlockSummary& s, int bits) noexcept {
  s.required_bits = bits;
  s.shift = shift_amount(bits);
}

}  // namespace

bool block_respects_bound(std::span<const float> block, const BlockSummary& summary, double e) noexcept {
  if (summary.is_constant) {
    for (float d : block)
      if (!(std::fabs(static_cast<double>(d) - static_cast<double>(summary.mu)) <= e)) return false;
    return true;
  }
  const std::uint32_t mask = prefix_mask(summary.required_bits);
  for (float d : block) {
    const std::uint32_t kept = std::bit_cast<std::uint32_t>(normalize(d, summary)) & mask;
    const float r = denormalize(kept, summary);
    if (!(std::fabs(static_cast<double>(d) - static_cast<double>(r)) <= e)) return false;
  }
  return true;
}

BlockSummary summarize_block(std::span<const float> block, double e, std::size_t index) {
  if (block.empty()) throw Error(Errc::empty_block, "block " + std::to_string(index) + " is empty");
  if (!(e > 0.0) || !std::isfinite(e)) throw Error(Errc::invalid_bound, "block error bound must be finite and > 0");

  float lo = block[0];
  float hi = block[0];
  for (float v : block) {
    if (!std::isfinite(v)) throw Error(Errc::non_finite_value, "block " + std::to_string(index) + " has a non-finite value");
    // -0.0 and +0.0 compare equal, so neither displaces the other
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }

  BlockSummary s;
  s.index = index;
  s.count = block.size();
  s.mu = static_cast<float>((static_cast<double>(lo) + static_cast<double>(hi)) / 2.0);
  s.radius = std::max(static_cast<double>(hi) - static_cast<double>(s.mu),
                      static_cast<double>(s.mu) - static_cast<double>(lo));
  s.is_constant = s.radius <= e;
  if (s.is_constant) return s;

  set_bits(s, required_bits(s.radius, e));
  while (s.required_bits < 32 && !block_respects_bound(block, s, e)) set_bits(s, s.required_bits + 1);
  return s;
}

void encode_nonconstant(std::span<const float> block, const BlockSummary& summary, EncodedBlock& out) {
  const int q = summary.required_bytes();
  const int s = summary.shift;
  const std::uint32_t mask = prefix_mask(summary.required_bits);
  out.required_byte_count = q;
  out.leading_codes.resize(block.size());
  out.mid_bytes.clear();
  out.mid_bytes.reserve(block.size() * static_cast<std::size_t>(q));

  std::uint32_t prev = 0;
  for (std::size_t i = 0; i < block.size(); ++i) {
    const std::uint32_t word = (std::bit_cast<std::uint32_t>(normalize(block[i], summary)) & mask) >> s;
    const int identical = std::countl_zero(word ^ prev) / 8;
    const int code = std::min({3, identical, q});
    out.leading_codes[i] = static_cast<std::uint8_t>(code);
    for (int j = code; j < q; ++j) out.mid_bytes.push_back(static_cast<std::uint8_t>(word >> (24 - 8 * j)));
    prev = word;
  }
}

EncodedBlock encode_nonconstant(std::span<const float> block, const BlockSummary& summary) {
  EncodedBlock out;
  encode_nonconstant(block, summary, out);
  return out;
}

void throw_pool_underrun(std::size_t need, std::size_t have) {
  throw Error(Errc::pool_underrun, "mid-byte pool needs " + std::to_string(need) + " bytes, has " + std::to_string(have));
}

std::vector<float> decode_nonconstant(const EncodedBlock& enc, const BlockSummary& summary, std::size_t count) {
  if (enc.leading_codes.size() < count)
    throw Error(Errc::pool_underrun, "leading code array holds " + std::to_string(enc.leading_codes.size()) +
                                         " codes, block needs " + std::to_string(count));
  std::vector<float> out(count);
  std::size_t cursor = 0;
  decode_nonconstant_into([&](std::size_t i) { return enc.leading_codes[i]; }, enc.mid_bytes, cursor, summary, out);
  return out;
}

std::vector<float> decode_constant(float mu, std::size_t count) { return std::vector<float>(count, mu); }

}  // namespace ufz
