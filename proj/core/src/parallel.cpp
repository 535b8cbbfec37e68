#include "ufz/parallel.hpp"

#include <string>

#include "ufz/block_codec.hpp"

namespace ufz {

namespace {

constexpr std::size_t kWarp = 32;

// In-place inclusive scan of one warp-sized chunk, log2(32) shuffle rounds.
void warp_inclusive_scan(std::span<std::size_t> lane) {
  std::size_t shuffled[kWarp];
  for (std::size_t stride = 1; stride < lane.size(); stride *= 2) {
    std::copy(lane.begin(), lane.end(), shuffled);
    for (std::size_t i = stride; i < lane.size(); ++i) lane[i] = shuffled[i] + shuffled[i - stride];
  }
}

}  // namespace

std::vector<std::size_t> prefix_scan(std::span<const std::size_t> lengths) {
  const std::size_t n = lengths.size();
  if (n == 0) return {};
  std::vector<std::size_t> inclusive(lengths.begin(), lengths.end());
  const std::size_t warps = (n + kWarp - 1) / kWarp;
  std::vector<std::size_t> totals(warps);
  for (std::size_t w = 0; w < warps; ++w) {
    const std::size_t begin = w * kWarp;
    const std::size_t len = std::min(kWarp, n - begin);
    warp_inclusive_scan(std::span<std::size_t>(inclusive.data() + begin, len));
    totals[w] = inclusive[begin + len - 1];
  }
  const std::vector<std::size_t> warp_offsets = warps > 1 ? prefix_scan(totals) : std::vector<std::size_t>{0};
  std::vector<std::size_t> offsets(n);
  for (std::size_t i = 0; i < n; ++i) offsets[i] = warp_offsets[i / kWarp] + inclusive[i] - lengths[i];
  return offsets;
}

ByteLayout ByteLayout::from_codes(std::span<const std::uint8_t> codes, int bytes_per_element) {
  ByteLayout layout;
  layout.elements = codes.size();
  layout.bytes_per_element = bytes_per_element;
  layout.kinds.resize(codes.size() * static_cast<std::size_t>(bytes_per_element));
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const int leading = std::min<int>(codes[i], bytes_per_element);
    for (int j = 0; j < bytes_per_element; ++j)
      layout.kinds[i * static_cast<std::size_t>(bytes_per_element) + static_cast<std::size_t>(j)] =
          j < leading ? ByteKind::leading : ByteKind::mid;
  }
  return layout;
}

ReadPosition propagate_indices(const ByteLayout& layout, std::vector<std::vector<std::uint32_t>>* trace) {
  const std::size_t n = layout.elements;
  const auto q = static_cast<std::size_t>(layout.bytes_per_element);
  ReadPosition rp;
  rp.elements = n;
  rp.bytes_per_element = layout.bytes_per_element;
  rp.positions.resize(n * q);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < q; ++j)
      rp.positions[i * q + j] = layout.kinds[i * q + j] == ByteKind::mid ? static_cast<std::uint32_t>(i + 1) : 0u;
  if (trace) trace->push_back(rp.positions);

  std::vector<std::uint32_t> source(rp.positions.size());
  for (std::size_t stride = 1; stride < n; stride *= 2) {
    // every slot reads the pre-round values, as lanes of one shuffle would
    source = rp.positions;
    for (std::size_t i = stride; i < n; ++i)
      for (std::size_t j = 0; j < q; ++j) {
        const std::uint32_t src = source[(i - stride) * q + j];
        if (src > source[i * q + j]) rp.positions[i * q + j] = src;
      }
    ++rp.rounds;
    if (trace) trace->push_back(rp.positions);
  }
  return rp;
}

void decode_block_parallel(std::span<const std::uint8_t> codes, std::span<const std::uint8_t> mid,
                           const BlockSummary& summary, std::span<float> out) {
  const std::size_t n = out.size();
  const int q = summary.required_bytes();
  std::vector<std::size_t> lengths(n);
  for (std::size_t i = 0; i < n; ++i) lengths[i] = static_cast<std::size_t>(mid_length(codes[i], q));
  const auto offsets = prefix_scan(lengths);
  const std::size_t total = n == 0 ? 0 : offsets.back() + lengths.back();
  if (total > mid.size()) throw_pool_underrun(total, mid.size());

  const ReadPosition rp = propagate_indices(ByteLayout::from_codes(codes, q));
  // mid byte of element e (0-based) at column j
  auto mid_byte = [&](std::size_t e, int j) -> std::uint32_t {
    const int leading = std::min<int>(codes[e], q);
    return mid[offsets[e] + static_cast<std::size_t>(j - leading)];
  };
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t w = 0;
    for (int j = 0; j < q; ++j) {
      const std::uint32_t pos = rp.at(i, j);
      const std::uint32_t byte = pos == 0 ? 0u : mid_byte(pos - 1, j);
      w |= byte << (24 - 8 * j);
    }
    out[i] = denormalize(w << summary.shift, summary);
  }
}

CompressedStream parallel_compress(const DataField& field, const CompressorConfig& cfg) {
  cfg.validate();
  const double e = resolve_bound(cfg.bound, field);
  const Executor exec(cfg.workers);
  const auto values = field.values();
  const std::size_t n = values.size();
  const std::size_t bs = cfg.block_size;
  const std::size_t nblocks = block_count(n, bs);

  CompressedStream out;
  out.header.block_size = static_cast<std::uint16_t>(bs);
  out.header.error_bound = e;
  out.header.dims = field.dims();

  // Phase 1: classify every block (min/max reductions).
  std::vector<BlockSummary> summaries(nblocks);
  exec.for_each(nblocks, [&](std::size_t k) {
    const auto r = block_range(k, n, bs);
    summaries[k] = summarize_block(values.subspan(r.begin, r.count), e, k);
  });

  std::vector<std::size_t> nonconst_flag(nblocks);
  std::vector<std::size_t> nonconst_len(nblocks);
  for (std::size_t k = 0; k < nblocks; ++k) {
    nonconst_flag[k] = summaries[k].is_constant ? 0 : 1;
    nonconst_len[k] = summaries[k].is_constant ? 0 : summaries[k].count;
  }
  const auto nc_index = prefix_scan(nonconst_flag);
  const auto elem_offset = prefix_scan(nonconst_len);
  const std::size_t nonconst = nblocks == 0 ? 0 : nc_index.back() + nonconst_flag.back();
  const std::size_t nonconst_elems = nblocks == 0 ? 0 : elem_offset.back() + nonconst_len.back();

  std::vector<std::size_t> nonconst_blocks(nonconst);
  exec.for_each(nblocks, [&](std::size_t k) {
    if (nonconst_flag[k]) nonconst_blocks[nc_index[k]] = k;
  });

  out.constant_map.assign(map_bytes(nblocks), 0);
  exec.for_each(out.constant_map.size(), [&](std::size_t byte) {
    std::uint8_t bits = 0;
    for (std::size_t b = 0; b < 8 && 8 * byte + b < nblocks; ++b)
      if (summaries[8 * byte + b].is_constant) bits |= static_cast<std::uint8_t>(1u << b);
    out.constant_map[byte] = bits;
  });
  out.mu_array.resize(nblocks);
  exec.for_each(nblocks, [&](std::size_t k) { out.mu_array[k] = summaries[k].mu; });

  // Phase 2: only non-constant blocks are encoded.
  std::vector<EncodedBlock> encoded(nonconst);
  out.req_len_array.resize(nonconst);
  exec.for_each(nonconst, [&](std::size_t c) {
    const std::size_t k = nonconst_blocks[c];
    const auto r = block_range(k, n, bs);
    encode_nonconstant(values.subspan(r.begin, r.count), summaries[k], encoded[c]);
    out.req_len_array[c] = static_cast<std::uint8_t>(summaries[k].required_bits);
  });

  std::vector<std::size_t> mid_len(nonconst);
  for (std::size_t c = 0; c < nonconst; ++c) mid_len[c] = encoded[c].mid_bytes.size();
  const auto mid_offset = prefix_scan(mid_len);
  out.mid_byte_pool.resize(nonconst == 0 ? 0 : mid_offset.back() + mid_len.back());
  std::vector<std::uint8_t> flat_codes(nonconst_elems);
  exec.for_each(nonconst, [&](std::size_t c) {
    const auto& enc = encoded[c];
    std::copy(enc.mid_bytes.begin(), enc.mid_bytes.end(), out.mid_byte_pool.begin() + mid_offset[c]);
    std::copy(enc.leading_codes.begin(), enc.leading_codes.end(),
              flat_codes.begin() + elem_offset[nonconst_blocks[c]]);
  });

  // Packed per output byte so no two tasks write the same byte.
  out.leading_code_pool.assign(code_pool_bytes(nonconst_elems), 0);
  exec.for_each(out.leading_code_pool.size(), [&](std::size_t byte) {
    std::uint8_t packed = 0;
    for (std::size_t b = 0; b < 4 && 4 * byte + b < nonconst_elems; ++b)
      packed |= static_cast<std::uint8_t>((flat_codes[4 * byte + b] & 0x3u) << (2 * b));
    out.leading_code_pool[byte] = packed;
  });
  return out;
}

DataField parallel_decompress(const CompressedStream& stream, unsigned workers) {
  stream.validate(false);
  const Executor exec(workers);
  const auto& h = stream.header;
  const std::size_t n = static_cast<std::size_t>(h.element_count());
  const std::size_t nblocks = h.block_count();

  std::vector<std::size_t> nonconst_flag(nblocks);
  std::vector<std::size_t> nonconst_len(nblocks);
  for (std::size_t k = 0; k < nblocks; ++k) {
    nonconst_flag[k] = stream.is_constant(k) ? 0 : 1;
    nonconst_len[k] = nonconst_flag[k] ? h.block_length(k) : 0;
  }
  const auto nc_index = prefix_scan(nonconst_flag);
  const auto elem_offset = prefix_scan(nonconst_len);

  // Per-block codes and mid-byte totals, then a scan for pool offsets.
  std::vector<std::vector<std::uint8_t>> codes(nblocks);
  std::vector<std::size_t> mid_len(nblocks, 0);
  exec.for_each(nblocks, [&](std::size_t k) {
    if (!nonconst_flag[k]) return;
    const int q = (stream.req_len_array[nc_index[k]] + 7) / 8;
    auto& c = codes[k];
    c.resize(nonconst_len[k]);
    for (std::size_t i = 0; i < c.size(); ++i) {
      c[i] = read_code(stream.leading_code_pool, elem_offset[k] + i);
      mid_len[k] += static_cast<std::size_t>(mid_length(c[i], q));
    }
  });
  const auto mid_offset = prefix_scan(mid_len);
  const std::size_t total = nblocks == 0 ? 0 : mid_offset.back() + mid_len.back();
  if (total > stream.mid_byte_pool.size()) throw_pool_underrun(total, stream.mid_byte_pool.size());
  if (total < stream.mid_byte_pool.size())
    throw Error(Errc::inconsistent_lengths,
                std::to_string(stream.mid_byte_pool.size() - total) + " unread bytes in mid byte pool");

  std::vector<float> values(n);
  const std::span<const std::uint8_t> pool = stream.mid_byte_pool;
  exec.for_each(nblocks, [&](std::size_t k) {
    const auto r = block_range(k, n, h.block_size);
    std::span<float> out(values.data() + r.begin, r.count);
    if (!nonconst_flag[k]) {
      std::fill(out.begin(), out.end(), stream.mu_array[k]);
      return;
    }
    decode_block_parallel(codes[k], pool.subspan(mid_offset[k], mid_len[k]), stored_summary(stream, k, nc_index[k]),
                          out);
  });
  return DataField(std::move(values), h.dims);
}

}  // namespace ufz
