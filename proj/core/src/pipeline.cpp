#include "ufz/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ufz/block_codec.hpp"
#include "ufz/parallel.hpp"

namespace ufz {

void CompressorConfig::validate() const {
  if (block_size < 8 || block_size > 65535)
    throw Error(Errc::invalid_config, "block size " + std::to_string(block_size) + " outside [8, 65535]");
  bound.validate();
}

double resolve_bound(const ErrorBoundSpec& spec, const DataField& field) {
  spec.validate();
  if (spec.mode == BoundMode::absolute) return spec.magnitude;
  const double e = spec.magnitude * field.value_range();
  if (!(e > 0.0))
    throw Error(Errc::zero_range_relative_bound, "relative bound on a dataset with zero value range");
  if (!std::isfinite(e)) throw Error(Errc::invalid_bound, "resolved bound is not finite");
  return e;
}

BlockSummary stored_summary(const CompressedStream& stream, std::size_t block, std::size_t nonconst_index) {
  BlockSummary s;
  s.index = block;
  s.count = stream.header.block_length(block);
  s.mu = stream.mu_array[block];
  s.is_constant = stream.is_constant(block);
  if (!s.is_constant) {
    s.required_bits = stream.req_len_array[nonconst_index];
    s.shift = shift_amount(s.required_bits);
  }
  return s;
}

namespace {

Header make_header(const DataField& field, const CompressorConfig& cfg, double e) {
  Header h;
  h.block_size = static_cast<std::uint16_t>(cfg.block_size);
  h.error_bound = e;
  h.dims = field.dims();
  return h;
}

CompressedStream compress_sequential(const DataField& field, const CompressorConfig& cfg, double e) {
  CompressedStream out;
  out.header = make_header(field, cfg, e);
  const auto values = field.values();
  const std::size_t n = values.size();
  const std::size_t nblocks = block_count(n, cfg.block_size);
  out.constant_map.assign(map_bytes(nblocks), 0);
  out.mu_array.resize(nblocks);
  out.mid_byte_pool.reserve(n);

  EncodedBlock enc;
  std::size_t code_index = 0;
  for (std::size_t k = 0; k < nblocks; ++k) {
    const auto range = block_range(k, n, cfg.block_size);
    const auto block = values.subspan(range.begin, range.count);
    const BlockSummary s = summarize_block(block, e, k);
    out.mu_array[k] = s.mu;
    if (s.is_constant) {
      out.constant_map[k / 8] |= static_cast<std::uint8_t>(1u << (k % 8));
      continue;
    }
    out.req_len_array.push_back(static_cast<std::uint8_t>(s.required_bits));
    encode_nonconstant(block, s, enc);
    out.leading_code_pool.resize(code_pool_bytes(code_index + block.size()), 0);
    for (auto code : enc.leading_codes) write_code(out.leading_code_pool, code_index++, code);
    out.mid_byte_pool.insert(out.mid_byte_pool.end(), enc.mid_bytes.begin(), enc.mid_bytes.end());
  }
  return out;
}

DataField decompress_sequential(const CompressedStream& stream) {
  stream.validate(false);
  const auto& h = stream.header;
  const std::size_t n = static_cast<std::size_t>(h.element_count());
  const std::size_t nblocks = h.block_count();
  std::vector<float> values(n);

  std::size_t nc = 0;
  std::size_t code_index = 0;
  std::size_t mid_cursor = 0;
  const std::span<const std::uint8_t> codes = stream.leading_code_pool;
  for (std::size_t k = 0; k < nblocks; ++k) {
    const auto range = block_range(k, n, h.block_size);
    std::span<float> out(values.data() + range.begin, range.count);
    if (stream.is_constant(k)) {
      std::fill(out.begin(), out.end(), stream.mu_array[k]);
      continue;
    }
    const BlockSummary s = stored_summary(stream, k, nc++);
    const std::size_t base = code_index;
    decode_nonconstant_into([&](std::size_t i) { return read_code(codes, base + i); }, stream.mid_byte_pool,
                            mid_cursor, s, out);
    code_index += range.count;
  }
  if (mid_cursor != stream.mid_byte_pool.size())
    throw Error(Errc::inconsistent_lengths, std::to_string(stream.mid_byte_pool.size() - mid_cursor) +
                                                " unread bytes in mid byte pool");
  return DataField(std::move(values), h.dims);
}

}  // namespace

CompressedStream compress(const DataField& field, const CompressorConfig& cfg) {
  cfg.validate();
  if (cfg.execution == Execution::parallel_sim) return parallel_compress(field, cfg);
  return compress_sequential(field, cfg, resolve_bound(cfg.bound, field));
}

DataField decompress(const CompressedStream& stream) { return decompress_sequential(stream); }

DataField decompress(const CompressedStream& stream, Execution execution, unsigned workers) {
  if (execution == Execution::parallel_sim) return parallel_decompress(stream, workers);
  return decompress_sequential(stream);
}

}  // namespace ufz
