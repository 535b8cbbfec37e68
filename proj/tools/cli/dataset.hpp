#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ufz/format.hpp"

namespace ufz::cli {

/// Process exit codes shared by every subcommand.
enum class ExitCode : int { ok = 0, usage = 1, io = 2, format = 3, bound_violation = 4 };

class CliError : public std::runtime_error {
 public:
  CliError(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Headerless little-endian f32 file plus the dims that describe it.
struct DatasetDescriptor {
  std::filesystem::path path;
  std::vector<std::uint64_t> dims;
};

/// "256,384,384" or "256x384x384". Throws CliError(usage).
std::vector<std::uint64_t> parse_dims(std::string_view text);

/// Finds an "AxB[xC...]" token in a file or directory name
/// (e.g. "SDRBENCH-Miranda-256x384x384").
std::optional<std::vector<std::uint64_t>> dims_from_name(std::string_view name);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Reads and validates a raw dataset. Size mismatches raise
/// CliError(format); unreadable files raise CliError(io).
DataField read_dataset(const DatasetDescriptor& desc);
void write_raw_f32(const std::filesystem::path& path, std::span<const float> values);

}  // namespace ufz::cli
