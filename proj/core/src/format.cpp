#include "ufz/format.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

namespace ufz {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::empty_field: return "empty-field";
    case Errc::non_finite_value: return "non-finite-value";
    case Errc::dims_mismatch: return "dims-mismatch";
    case Errc::invalid_bound: return "invalid-bound";
    case Errc::zero_range_relative_bound: return "zero-range-relative-bound";
    case Errc::invalid_config: return "invalid-config";
    case Errc::empty_block: return "empty-block";
    case Errc::pool_underrun: return "pool-underrun";
    case Errc::malformed_magic: return "malformed-magic";
    case Errc::version_mismatch: return "version-mismatch";
    case Errc::unsupported_dtype: return "unsupported-dtype";
    case Errc::truncated_stream: return "truncated-stream";
    case Errc::inconsistent_lengths: return "inconsistent-lengths";
    case Errc::length_mismatch: return "length-mismatch";
    case Errc::degenerate_range: return "degenerate-range";
    case Errc::non_positive_time: return "non-positive-time";
    case Errc::accounting_disabled: return "accounting-disabled";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// DataField

DataField::DataField(std::vector<float> values, std::vector<std::uint64_t> dims)
    : values_(std::move(values)), dims_(std::move(dims)) {
  if (values_.empty()) throw Error(Errc::empty_field, "dataset has no elements");
  if (dims_.empty()) throw Error(Errc::dims_mismatch, "no dimensions given");
  std::uint64_t product = 1;
  for (auto d : dims_) {
    if (d == 0) throw Error(Errc::dims_mismatch, "zero-length dimension");
    if (product > std::numeric_limits<std::uint64_t>::max() / d)
      throw Error(Errc::dims_mismatch, "dimension product overflows");
    product *= d;
  }
  if (product != values_.size())
    throw Error(Errc::dims_mismatch, "product of dims " + std::to_string(product) +
                                         " != element count " + std::to_string(values_.size()));
  min_ = max_ = values_.front();
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const float v = values_[i];
    if (!std::isfinite(v))
      throw Error(Errc::non_finite_value, "element " + std::to_string(i) + " is not finite");
    if (v < min_) min_ = v;
    if (v > max_) max_ = v;
  }
}

DataField::DataField(std::vector<float> values) {
  const std::uint64_t n = values.size();
  *this = DataField(std::move(values), std::vector<std::uint64_t>{n});
}

void ErrorBoundSpec::validate() const {
  if (!(magnitude > 0.0) || !std::isfinite(magnitude))
    throw Error(Errc::invalid_bound, "error bound must be finite and > 0, got " + std::to_string(magnitude));
}

// ---------------------------------------------------------------------------
// Header / stream geometry

std::uint64_t Header::element_count() const noexcept {
  std::uint64_t n = 1;
  for (auto d : dims) n *= d;
  return dims.empty() ? 0 : n;
}

std::size_t Header::block_count() const noexcept {
  const auto n = element_count();
  return block_size == 0 ? 0 : static_cast<std::size_t>(n / block_size + (n % block_size != 0));
}

std::size_t Header::block_length(std::size_t k) const noexcept {
  const auto n = element_count();
  const std::uint64_t begin = static_cast<std::uint64_t>(k) * block_size;
  const std::uint64_t rest = n - begin;
  return static_cast<std::size_t>(rest < block_size ? rest : block_size);
}

std::size_t CompressedStream::nonconstant_element_count() const noexcept {
  const std::size_t nblocks = header.block_count();
  std::size_t total = 0;
  for (std::size_t k = 0; k < nblocks; ++k)
    if (!is_constant(k)) total += header.block_length(k);
  return total;
}

std::size_t CompressedStream::compressed_size() const noexcept {
  const std::size_t nblocks = header.block_count();
  return header.serialized_size() + map_bytes(nblocks) + 4 * nblocks + req_len_array.size() +
         code_pool_bytes(nonconstant_element_count()) + mid_byte_pool.size();
}

namespace {

[[noreturn]] void inconsistent(const std::string& what) { throw Error(Errc::inconsistent_lengths, what); }

std::size_t expected_mid_bytes(const CompressedStream& s) {
  const std::size_t nblocks = s.header.block_count();
  std::size_t element = 0;
  std::size_t nc = 0;
  std::size_t total = 0;
  for (std::size_t k = 0; k < nblocks; ++k) {
    if (s.is_constant(k)) continue;
    const int r = s.req_len_array[nc++];
    const int q = (r + 7) / 8;
    const std::size_t len = s.header.block_length(k);
    for (std::size_t i = 0; i < len; ++i) total += mid_length(read_code(s.leading_code_pool, element++), q);
  }
  return total;
}

void check_padding_zero(std::span<const std::uint8_t> bytes, std::size_t used_bits, const char* what) {
  if (bytes.empty() || used_bits % 8 == 0) return;
  const std::uint8_t pad_mask = static_cast<std::uint8_t>(0xFFu << (used_bits % 8));
  if (bytes.back() & pad_mask) inconsistent(std::string("nonzero padding bits in ") + what);
}

void check_header(const Header& h) {
  if (h.block_size < 8) inconsistent("block size " + std::to_string(h.block_size) + " < 8");
  if (!(h.error_bound > 0.0) || !std::isfinite(h.error_bound)) inconsistent("error bound must be finite and > 0");
  if (h.dims.empty() || h.dims.size() > 255) inconsistent("ndims must be in [1, 255]");
  std::uint64_t product = 1;
  for (auto d : h.dims) {
    if (d == 0) inconsistent("zero-length dimension");
    if (product > std::numeric_limits<std::uint64_t>::max() / d) inconsistent("dimension product overflows");
    product *= d;
  }
}

}  // namespace

void CompressedStream::validate(bool check_mid_pool) const {
  check_header(header);
  const std::size_t nblocks = header.block_count();
  if (constant_map.size() != map_bytes(nblocks)) inconsistent("constant map size");
  check_padding_zero(constant_map, nblocks, "constant map");
  if (mu_array.size() != nblocks) inconsistent("mu array size");
  std::size_t nonconst = 0;
  for (std::size_t k = 0; k < nblocks; ++k) nonconst += !is_constant(k);
  if (req_len_array.size() != nonconst) inconsistent("req_len array size");
  for (auto r : req_len_array)
    if (r < 1 || r > 32) inconsistent("required length " + std::to_string(r) + " outside 1..32");
  const std::size_t elems = nonconstant_element_count();
  if (leading_code_pool.size() != code_pool_bytes(elems)) inconsistent("leading code pool size");
  check_padding_zero(leading_code_pool, 2 * elems, "leading code pool");
  if (check_mid_pool && mid_byte_pool.size() != expected_mid_bytes(*this)) inconsistent("mid byte pool size");
}

bool CompressedStream::operator==(const CompressedStream& other) const {
  if (!(header == other.header) || constant_map != other.constant_map || req_len_array != other.req_len_array ||
      leading_code_pool != other.leading_code_pool || mid_byte_pool != other.mid_byte_pool ||
      mu_array.size() != other.mu_array.size())
    return false;
  for (std::size_t i = 0; i < mu_array.size(); ++i)
    if (std::bit_cast<std::uint32_t>(mu_array[i]) != std::bit_cast<std::uint32_t>(other.mu_array[i])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// serialize / deserialize

namespace {

template <class T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                  std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
  auto bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    if (n > bytes_.size() - pos_)
      throw Error(Errc::truncated_stream, std::string(what) + ": need " + std::to_string(n) + " bytes, " +
                                              std::to_string(bytes_.size() - pos_) + " left");
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  template <class T>
  T get_le(const char* what) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                    std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
    auto s = take(sizeof(T), what);
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(static_cast<U>(s[i]) << (8 * i));
    return std::bit_cast<T>(bits);
  }

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize(const CompressedStream& stream) {
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  out.reserve(stream.compressed_size());
  out.push_back(stream.header.version);
  out.push_back(static_cast<std::uint8_t>(stream.header.dtype));
  put_le(out, stream.header.block_size);
  put_le(out, stream.header.error_bound);
  out.push_back(static_cast<std::uint8_t>(stream.header.dims.size()));
  for (auto d : stream.header.dims) put_le(out, d);
  out.insert(out.end(), stream.constant_map.begin(), stream.constant_map.end());
  for (float mu : stream.mu_array) put_le(out, mu);
  out.insert(out.end(), stream.req_len_array.begin(), stream.req_len_array.end());
  out.insert(out.end(), stream.leading_code_pool.begin(), stream.leading_code_pool.end());
  out.insert(out.end(), stream.mid_byte_pool.begin(), stream.mid_byte_pool.end());
  return out;
}

CompressedStream deserialize(std::span<const std::uint8_t> bytes) {
  const std::size_t probe = bytes.size() < kMagic.size() ? bytes.size() : kMagic.size();
  if (std::memcmp(bytes.data(), kMagic.data(), probe) != 0) throw Error(Errc::malformed_magic, "not a .ufzx stream");
  Reader in(bytes);
  in.take(kMagic.size(), "magic");

  CompressedStream s;
  s.header.version = in.get_le<std::uint8_t>("version");
  if (s.header.version != kFormatVersion)
    throw Error(Errc::version_mismatch, "stream version " + std::to_string(s.header.version) + ", reader supports " +
                                            std::to_string(kFormatVersion));
  const auto dtype = in.get_le<std::uint8_t>("dtype");
  if (dtype != static_cast<std::uint8_t>(DType::f32))
    throw Error(Errc::unsupported_dtype, "dtype " + std::to_string(dtype) + " is not supported by this version");
  s.header.dtype = DType::f32;
  s.header.block_size = in.get_le<std::uint16_t>("block size");
  s.header.error_bound = in.get_le<double>("error bound");
  const auto ndims = in.get_le<std::uint8_t>("ndims");
  s.header.dims.resize(ndims);
  for (auto& d : s.header.dims) d = in.get_le<std::uint64_t>("dims");
  check_header(s.header);

  const std::size_t nblocks = s.header.block_count();
  auto map = in.take(map_bytes(nblocks), "constant map");
  s.constant_map.assign(map.begin(), map.end());
  check_padding_zero(s.constant_map, nblocks, "constant map");

  auto mu = in.take(4 * nblocks, "mu array");
  s.mu_array.resize(nblocks);
  for (std::size_t k = 0; k < nblocks; ++k) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(mu[4 * k + b]) << (8 * b);
    s.mu_array[k] = std::bit_cast<float>(bits);
  }

  std::size_t nonconst = 0;
  std::size_t nonconst_elems = 0;
  for (std::size_t k = 0; k < nblocks; ++k) {
    if (s.is_constant(k)) continue;
    ++nonconst;
    nonconst_elems += s.header.block_length(k);
  }
  auto req = in.take(nonconst, "req_len array");
  s.req_len_array.assign(req.begin(), req.end());
  for (auto r : s.req_len_array)
    if (r < 1 || r > 32) inconsistent("required length " + std::to_string(r) + " outside 1..32");

  auto codes = in.take(code_pool_bytes(nonconst_elems), "leading code pool");
  s.leading_code_pool.assign(codes.begin(), codes.end());
  check_padding_zero(s.leading_code_pool, 2 * nonconst_elems, "leading code pool");

  const std::size_t mid = expected_mid_bytes(s);
  auto mids = in.take(mid, "mid byte pool");
  s.mid_byte_pool.assign(mids.begin(), mids.end());
  if (in.remaining() != 0) inconsistent(std::to_string(in.remaining()) + " trailing bytes after mid byte pool");
  return s;
}

}  // namespace ufz
