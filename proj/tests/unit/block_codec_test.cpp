#include <gtest/gtest.h>

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <random>

#include "support/synthetic.hpp"
#include "ufz/block_codec.hpp"

namespace ufz {
namespace {

// Exponent from the raw IEEE-754 double fields.
int oracle_exponent(double x) {
  const auto bits = std::bit_cast<std::uint64_t>(x);
  const int field = static_cast<int>((bits >> 52) & 0x7FF);
  const std::uint64_t mant = bits & ((std::uint64_t{1} << 52) - 1);
  if (field != 0) return field - 1023;
  if (mant == 0) return -127;
  return -1074 + (63 - std::countl_zero(mant));
}

int oracle_required_bits(double r, double e) {
  const int bits = 9 + oracle_exponent(r) - oracle_exponent(e);
  return bits < 0 ? 0 : bits > 32 ? 32 : bits;
}

struct OracleEncoding {
  std::vector<std::uint8_t> codes;
  std::vector<std::uint8_t> mid;
};

// Byte-array version of the encoder contract.
OracleEncoding oracle_encode(std::span<const float> block, const BlockSummary& s) {
  const int q = (s.required_bits + s.shift) / 8;
  OracleEncoding out;
  std::array<std::uint8_t, 4> prev{};
  for (float d : block) {
    const float v = s.required_bits >= 32 ? d : d - s.mu;
    std::uint32_t w = std::bit_cast<std::uint32_t>(v);
    if (s.required_bits < 32) w &= ~std::uint32_t{0} << (32 - s.required_bits);
    w >>= s.shift;
    const std::array<std::uint8_t, 4> cur = {static_cast<std::uint8_t>(w >> 24), static_cast<std::uint8_t>(w >> 16),
                                             static_cast<std::uint8_t>(w >> 8), static_cast<std::uint8_t>(w)};
    int same = 0;
    while (same < 4 && cur[same] == prev[same]) ++same;
    const int code = std::min({3, same, q});
    out.codes.push_back(static_cast<std::uint8_t>(code));
    for (int j = code; j < q; ++j) out.mid.push_back(cur[j]);
    prev = cur;
  }
  return out;
}

TEST(Exponent, MatchesBitFields) {
  EXPECT_EQ(exponent_of(1.0), 0);
  EXPECT_EQ(exponent_of(0.75), -1);
  EXPECT_EQ(exponent_of(-8.5), 3);
  EXPECT_EQ(exponent_of(0.0), -127);
  EXPECT_EQ(exponent_of(-0.0), -127);
  EXPECT_EQ(exponent_of(std::numeric_limits<float>::denorm_min()), -149);
  EXPECT_EQ(ExponentView(std::numeric_limits<float>::min()).exponent, -126);
  testing::Rng rng(1);
  std::uniform_real_distribution<double> u(-300.0, 300.0);
  for (int i = 0; i < 10000; ++i) {
    const double x = std::pow(2.0, u(rng)) * (rng() % 2 ? 1 : -1);
    ASSERT_EQ(exponent_of(x), oracle_exponent(x)) << x;
    const float f = static_cast<float>(x);
    if (std::isfinite(f) && f != 0.0f) {
      const double a = std::fabs(static_cast<double>(f));
      ASSERT_LE(std::ldexp(1.0, exponent_of(f)), a);
      ASSERT_LT(a, std::ldexp(1.0, exponent_of(f) + 1));
    }
  }
}

TEST(RequiredBits, Examples) {
  EXPECT_EQ(required_bits(1.0, std::ldexp(1.0, -10)), 19);
  EXPECT_EQ(oracle_required_bits(1.0, std::ldexp(1.0, -10)), 19);
  EXPECT_EQ(required_bits(0.3, 0.3), 9);
  EXPECT_EQ(required_bits(std::ldexp(1.0, 23), 1.0), 32);
  EXPECT_EQ(required_bits(std::ldexp(1.0, 40), 1.0), 32);
  EXPECT_EQ(required_bits(1.0, 1024.0), 0);
}

TEST(RequiredBits, MatchesOracle) {
  testing::Rng rng(2);
  std::uniform_real_distribution<double> u(-140.0, 120.0);
  for (int i = 0; i < 20000; ++i) {
    const double r = std::pow(2.0, u(rng));
    const double e = std::pow(2.0, u(rng));
    ASSERT_EQ(required_bits(r, e), oracle_required_bits(r, e)) << r << " " << e;
  }
}

TEST(RequiredBits, Monotone) {
  testing::Rng rng(3);
  std::uniform_real_distribution<double> u(-60.0, 60.0);
  for (int i = 0; i < 20000; ++i) {
    double r1 = std::pow(2.0, u(rng)), r2 = std::pow(2.0, u(rng));
    double e1 = std::pow(2.0, u(rng)), e2 = std::pow(2.0, u(rng));
    if (r1 > r2) std::swap(r1, r2);
    if (e1 > e2) std::swap(e1, e2);
    ASSERT_LE(required_bits(r1, e1), required_bits(r2, e1));
    ASSERT_GE(required_bits(r1, e1), required_bits(r1, e2));
  }
}

TEST(Shift, Examples) {
  EXPECT_EQ(shift_amount(16), 0);
  EXPECT_EQ(shift_amount(19), 5);
  EXPECT_EQ(shift_amount(9), 7);
  for (int r = 1; r <= 32; ++r) {
    const int s = shift_amount(r);
    EXPECT_GE(s, 0);
    EXPECT_LE(s, 7);
    EXPECT_EQ((r + s) % 8, 0);
    EXPECT_LE((r + s) / 8, 4);
  }
  BlockSummary s;
  s.is_constant = false;
  s.required_bits = 19;
  s.shift = shift_amount(19);
  EXPECT_EQ(s.required_bytes(), 3);
  s.required_bits = 9;
  s.shift = shift_amount(9);
  EXPECT_EQ(s.required_bytes(), 2);
}

TEST(Summarize, Examples) {
  const std::vector<float> ones(128, 1.0f);
  auto s = summarize_block(ones, 0.01);
  EXPECT_EQ(s.mu, 1.0f);
  EXPECT_EQ(s.radius, 0.0);
  EXPECT_TRUE(s.is_constant);
  EXPECT_EQ(s.count, 128u);

  const std::vector<float> edge = {0.0f, 0.02f};
  s = summarize_block(edge, 0.01);
  EXPECT_EQ(s.mu, 0.01f);
  EXPECT_TRUE(s.is_constant);

  const std::vector<float> wide = {0.0f, 1.0f};
  s = summarize_block(wide, 0.1);
  EXPECT_EQ(s.mu, 0.5f);
  EXPECT_DOUBLE_EQ(s.radius, 0.5);
  EXPECT_FALSE(s.is_constant);
  EXPECT_EQ((s.required_bits + s.shift) % 8, 0);
}

TEST(Summarize, Errors) {
  EXPECT_THROW(summarize_block({}, 0.1), Error);
  const std::vector<float> bad = {1.0f, NAN};
  EXPECT_THROW(summarize_block(bad, 0.1), Error);
  const std::vector<float> ok = {1.0f};
  EXPECT_THROW(summarize_block(ok, 0.0), Error);
}

TEST(Summarize, NegativeZeroEqualsZero) {
  const std::vector<float> v = {-0.0f, 0.0f, -0.0f};
  const auto s = summarize_block(v, 1e-3);
  EXPECT_TRUE(s.is_constant);
  EXPECT_EQ(s.mu, 0.0f);
}

TEST(Encode, FigureFiveValues) {
  const std::vector<float> v = {0.1234f, 0.1235f, 0.1211f};
  BlockSummary s;
  s.count = 3;
  s.mu = 0.0f;
  s.is_constant = false;
  s.required_bits = 24;
  s.shift = shift_amount(24);
  const auto enc = encode_nonconstant(v, s);
  const auto oracle = oracle_encode(v, s);
  EXPECT_EQ(enc.leading_codes, oracle.codes);
  EXPECT_EQ(enc.mid_bytes, oracle.mid);
  EXPECT_EQ(enc.leading_codes[0], 0);
  EXPECT_GE(enc.leading_codes[1], 2);
  EXPECT_LT(enc.leading_codes[2], enc.leading_codes[1]);
}

TEST(Encode, IdenticalSuccessorsSaturate) {
  std::vector<float> v(20, 5.0f);
  v[0] = 4.0f;  // forces radius > e
  BlockSummary s = summarize_block(v, 1e-6);
  ASSERT_FALSE(s.is_constant);
  const auto enc = encode_nonconstant(v, s);
  const int q = s.required_bytes();
  for (std::size_t i = 2; i < v.size(); ++i) EXPECT_EQ(enc.leading_codes[i], std::min(3, q));
  EXPECT_EQ(enc.required_byte_count, q);
}

TEST(Encode, SingleElementAgainstZeroWord) {
  testing::Rng rng(4);
  std::uniform_real_distribution<float> u(-1e3f, 1e3f);
  for (int i = 0; i < 2000; ++i) {
    const std::vector<float> v = {u(rng)};
    BlockSummary s;
    s.count = 1;
    s.mu = u(rng);
    s.is_constant = false;
    s.required_bits = 1 + static_cast<int>(rng() % 32);
    s.shift = shift_amount(s.required_bits);
    const auto enc = encode_nonconstant(v, s);
    const auto oracle = oracle_encode(v, s);
    ASSERT_EQ(enc.leading_codes, oracle.codes);
    ASSERT_EQ(enc.mid_bytes, oracle.mid);
    ASSERT_EQ(static_cast<int>(enc.mid_bytes.size()), s.required_bytes() - enc.leading_codes[0]);
  }
}

TEST(Encode, MatchesByteOracleOnRandomBlocks) {
  testing::Rng rng(5);
  for (int i = 0; i < 3000; ++i) {
    const std::size_t n = 1 + rng() % 200;
    const auto v = i % 2 ? testing::random_walk(rng, n, 1e-3) : testing::white_noise(rng, n);
    const double e = std::pow(10.0, -1.0 - static_cast<double>(rng() % 7));
    const auto s = summarize_block(v, e);
    if (s.is_constant) continue;
    const auto enc = encode_nonconstant(v, s);
    const auto oracle = oracle_encode(v, s);
    ASSERT_EQ(enc.leading_codes, oracle.codes);
    ASSERT_EQ(enc.mid_bytes, oracle.mid);
    std::size_t mid = 0;
    for (auto c : enc.leading_codes) mid += static_cast<std::size_t>(mid_length(c, s.required_bytes()));
    ASSERT_EQ(mid, enc.mid_bytes.size());
  }
}

TEST(Decode, ReusedBytesEqualPredecessor) {
  testing::Rng rng(6);
  const auto v = testing::random_walk(rng, 128, 1e-4);
  const auto s = summarize_block(v, 1e-6);
  ASSERT_FALSE(s.is_constant);
  const auto enc = encode_nonconstant(v, s);
  const auto out = decode_nonconstant(enc, s, v.size());
  std::uint32_t prev = 0;
  int reused = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::uint32_t w = (std::bit_cast<std::uint32_t>(normalize(v[i], s)) & prefix_mask(s.required_bits)) >> s.shift;
    for (int b = 0; b < enc.leading_codes[i]; ++b, ++reused)
      ASSERT_EQ((w >> (24 - 8 * b)) & 0xFF, (prev >> (24 - 8 * b)) & 0xFF) << "element " << i << " byte " << b;
    ASSERT_EQ(std::bit_cast<std::uint32_t>(out[i]), std::bit_cast<std::uint32_t>(denormalize(w << s.shift, s)));
    prev = w;
  }
  EXPECT_GT(reused, 0);
}

TEST(Decode, RoundTripWithinBound) {
  testing::Rng rng(7);
  std::uniform_real_distribution<double> scale(-8.0, 8.0);
  for (int i = 0; i < 100000; ++i) {
    const std::size_t n = 1 + rng() % 64;
    auto v = testing::white_noise(rng, n);
    const float mag = static_cast<float>(std::pow(10.0, scale(rng)));
    for (auto& x : v) x *= mag;
    const auto s0 = summarize_block(v, 1.0);
    const double radius = std::max(s0.radius, 1e-30);
    const double e = radius * std::pow(10.0, -1.0 - static_cast<double>(rng() % 6));
    const auto s = summarize_block(v, e);
    const auto out = s.is_constant ? decode_constant(s.mu, n) : decode_nonconstant(encode_nonconstant(v, s), s, n);
    for (std::size_t j = 0; j < n; ++j)
      ASSERT_LE(std::fabs(static_cast<double>(v[j]) - static_cast<double>(out[j])), e)
          << "block " << i << " element " << j << " R=" << s.required_bits;
  }
}

TEST(Decode, AdversarialBoundsAndSubnormals) {
  testing::Rng rng(8);
  std::uniform_real_distribution<double> expo(-149.0, 60.0);
  for (int i = 0; i < 50000; ++i) {
    const std::size_t n = 1 + rng() % 32;
    std::vector<float> v(n);
    const double mag = std::pow(2.0, expo(rng));
    std::uniform_real_distribution<double> u(-mag, mag);
    for (auto& x : v) x = static_cast<float>(u(rng));
    const auto s0 = summarize_block(v, 1.0);
    // bounds straddling the radius and its float neighbours
    double e = s0.radius;
    switch (rng() % 4) {
      case 0: e = std::nextafter(s0.radius, 0.0); break;
      case 1: e = std::nextafter(s0.radius, 1e300); break;
      case 2: e = s0.radius * std::ldexp(1.0, -static_cast<int>(rng() % 30)); break;
      default: break;
    }
    if (!(e > 0.0)) e = std::numeric_limits<double>::denorm_min();
    const auto s = summarize_block(v, e);
    ASSERT_EQ(s.is_constant, s.radius <= e);
    ASSERT_GE(s.required_bits, s.is_constant ? 0 : std::min(32, required_bits(s.radius, e)));
    const auto out = s.is_constant ? decode_constant(s.mu, n) : decode_nonconstant(encode_nonconstant(v, s), s, n);
    for (std::size_t j = 0; j < n; ++j)
      ASSERT_LE(std::fabs(static_cast<double>(v[j]) - static_cast<double>(out[j])), e) << "case " << i;
  }
}

TEST(Decode, TruncationBelowBoundExponent) {
  testing::Rng rng(9);
  int checked = 0;
  for (int i = 0; i < 5000; ++i) {
    const auto v = testing::random_walk(rng, 64, 1.0);
    const double e = std::pow(10.0, -1.0 - static_cast<double>(rng() % 5));
    const auto s = summarize_block(v, e);
    if (s.is_constant || s.required_bits >= 32 || s.required_bits != required_bits(s.radius, e)) continue;
    ++checked;
    for (float d : v) {
      const float norm = normalize(d, s);
      const float kept = std::bit_cast<float>(std::bit_cast<std::uint32_t>(norm) & prefix_mask(s.required_bits));
      ASSERT_LT(std::fabs(static_cast<double>(norm) - static_cast<double>(kept)), std::ldexp(1.0, exponent_of(e)));
    }
  }
  EXPECT_GT(checked, 1000);
}

TEST(Decode, FullWidthIsBitExact) {
  const std::vector<float> v = {1.0f, -0.0f, 3.0e7f, -2.5e-38f, 1e-45f, 123.456f};
  const auto s = summarize_block(v, 1e-40);
  ASSERT_FALSE(s.is_constant);
  ASSERT_EQ(s.required_bits, 32);
  const auto out = decode_nonconstant(encode_nonconstant(v, s), s, v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    EXPECT_EQ(std::bit_cast<std::uint32_t>(out[i]), std::bit_cast<std::uint32_t>(v[i])) << i;
}

TEST(Decode, PoolUnderrun) {
  testing::Rng rng(10);
  const auto v = testing::white_noise(rng, 50);
  const auto s = summarize_block(v, 1e-4);
  auto enc = encode_nonconstant(v, s);
  enc.mid_bytes.pop_back();
  try {
    (void)decode_nonconstant(enc, s, v.size());
    FAIL() << "expected pool underrun";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::pool_underrun);
  }
}

TEST(DecodeConstant, Examples) {
  EXPECT_EQ(decode_constant(1.0f, 3), (std::vector<float>{1.0f, 1.0f, 1.0f}));
  EXPECT_EQ(decode_constant(0.0f, 1), (std::vector<float>{0.0f}));
  testing::Rng rng(12);
  for (int i = 0; i < 2000; ++i) {
    const auto v = testing::white_noise(rng, 1 + rng() % 128, -1.0f, 1.0f);
    const auto s = summarize_block(v, 1.5);
    ASSERT_TRUE(s.is_constant);
    for (float d : v) ASSERT_LE(std::fabs(static_cast<double>(d) - static_cast<double>(s.mu)), 1.5);
  }
}

}  // namespace
}  // namespace ufz
