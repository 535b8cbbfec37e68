#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ufz {

enum class Errc {
  // ingestion / configuration
  empty_field,
  non_finite_value,
  dims_mismatch,
  invalid_bound,
  zero_range_relative_bound,
  invalid_config,
  // block codec
  empty_block,
  pool_underrun,
  // container
  malformed_magic,
  version_mismatch,
  unsupported_dtype,
  truncated_stream,
  inconsistent_lengths,
  // metrics
  length_mismatch,
  degenerate_range,
  non_positive_time,
  accounting_disabled,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI's exit-code mapping) can tell them apart.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ufz
