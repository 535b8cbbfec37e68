#pragma once

// Deterministic model of the data-parallel (GPU-style) codec: two-phase
// block classification, prefix-scanned output offsets and logarithmic
// index propagation for leading-byte retrieval. Every entry point here is
// bit-identical to its sequential counterpart in pipeline.hpp.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <span>
#include <thread>
#include <vector>

#include "ufz/format.hpp"
#include "ufz/pipeline.hpp"

namespace ufz {

/// Runs independent tasks over [0, n) on a fixed set of workers. Each
/// worker owns one contiguous chunk, so a task's outputs must only touch
/// ranges owned by that task. With one worker the tasks run inline in
/// index order.
class Executor {
 public:
  explicit Executor(unsigned workers = 0)
      : workers_(workers != 0 ? workers : std::max(1u, std::thread::hardware_concurrency())) {}

  unsigned workers() const noexcept { return workers_; }

  template <class Fn>
  void for_each(std::size_t n, Fn&& fn) const {
    const std::size_t chunks = std::min<std::size_t>(workers_, n);
    if (chunks <= 1) {
      for (std::size_t i = 0; i < n; ++i) fn(i);
      return;
    }
    std::vector<std::exception_ptr> errors(chunks);
    std::vector<std::thread> threads;
    threads.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) {
      const std::size_t begin = n * c / chunks;
      const std::size_t end = n * (c + 1) / chunks;
      threads.emplace_back([&, c, begin, end] {
        try {
          for (std::size_t i = begin; i < end; ++i) fn(i);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    // first failing chunk wins, matching what a sequential run would report
    for (auto& err : errors)
      if (err) std::rethrow_exception(err);
  }

 private:
  unsigned workers_;
};

/// Exclusive scan: offsets[0] = 0, offsets[i] = sum of lengths[0..i).
/// Computed as 32-wide Hillis-Steele warp scans whose totals are scanned
/// recursively, which equals the naive running sum exactly.
std::vector<std::size_t> prefix_scan(std::span<const std::size_t> lengths);

enum class ByteKind : std::uint8_t { leading, mid };

/// Per-byte tags over a block's reconstruction layout, element-major:
/// element i owns slots [i*q, i*q + q).
struct ByteLayout {
  std::size_t elements = 0;
  int bytes_per_element = 0;
  std::vector<ByteKind> kinds;

  ByteKind at(std::size_t element, int column) const noexcept {
    return kinds[element * static_cast<std::size_t>(bytes_per_element) + static_cast<std::size_t>(column)];
  }

  /// Element i gets min(code_i, q) leading slots followed by mid slots.
  static ByteLayout from_codes(std::span<const std::uint8_t> codes, int bytes_per_element);
};

/// Read position for every byte slot: the 1-based index of the element
/// whose mid byte supplies the value, or 0 for the all-zero predecessor.
struct ReadPosition {
  std::size_t elements = 0;
  int bytes_per_element = 0;
  std::vector<std::uint32_t> positions;
  int rounds = 0;

  std::uint32_t at(std::size_t element, int column) const noexcept {
    return positions[element * static_cast<std::size_t>(bytes_per_element) + static_cast<std::size_t>(column)];
  }
};

/// Interleaved-addressing propagation: leading slots start at 0, mid slots
/// at their own element index; rounds with strides 1, 2, 4, ... (ceil(log2 n)
/// of them) let each slot adopt the position `stride` elements earlier in
/// the same byte column whenever that value is greater. If `trace` is
/// given, the positions after initialization and after every round are
/// appended to it.
ReadPosition propagate_indices(const ByteLayout& layout, std::vector<std::vector<std::uint32_t>>* trace = nullptr);

/// Decodes one non-constant block without serial predecessor chaining:
/// mid offsets via prefix_scan, leading bytes via propagate_indices.
/// `mid` must hold exactly this block's mid bytes.
void decode_block_parallel(std::span<const std::uint8_t> codes, std::span<const std::uint8_t> mid,
                           const BlockSummary& summary, std::span<float> out);

CompressedStream parallel_compress(const DataField& field, const CompressorConfig& cfg);

DataField parallel_decompress(const CompressedStream& stream, unsigned workers = 0);

}  // namespace ufz
