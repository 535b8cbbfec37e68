#include "cli/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <regex>

namespace ufz::cli {

std::vector<std::uint64_t> parse_dims(std::string_view text) {
  std::vector<std::uint64_t> dims;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find_first_of(",x", pos), text.size());
    const auto token = text.substr(pos, end - pos);
    std::uint64_t d = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), d);
    if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size() || d == 0)
      throw CliError(ExitCode::usage, "invalid dimension list '" + std::string(text) + "'");
    dims.push_back(d);
    pos = end + 1;
  }
  return dims;
}

std::optional<std::vector<std::uint64_t>> dims_from_name(std::string_view name) {
  static const std::regex token(R"((\d+(?:x\d+)+))");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(name.begin(), name.end(), m, token)) return std::nullopt;
  return parse_dims(std::string_view(&*m[1].first, static_cast<std::size_t>(m[1].length())));
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError(ExitCode::io, "cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw CliError(ExitCode::io, "read error on '" + path.string() + "'");
  return bytes;
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CliError(ExitCode::io, "cannot create '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CliError(ExitCode::io, "write error on '" + path.string() + "'");
}

DataField read_dataset(const DatasetDescriptor& desc) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(desc.path, ec);
  if (ec) throw CliError(ExitCode::io, "cannot stat '" + desc.path.string() + "': " + ec.message());
  std::uint64_t n = 1;
  for (auto d : desc.dims) n *= d;
  if (desc.dims.empty() || size != 4 * n)
    throw CliError(ExitCode::format, "'" + desc.path.string() + "' holds " + std::to_string(size) +
                                         " bytes but dims need " + std::to_string(4 * n));

  std::ifstream in(desc.path, std::ios::binary);
  if (!in) throw CliError(ExitCode::io, "cannot open '" + desc.path.string() + "'");
  std::vector<float> values(static_cast<std::size_t>(n));
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(size));
  if (!in) throw CliError(ExitCode::io, "short read on '" + desc.path.string() + "'");
  if constexpr (std::endian::native == std::endian::big) {
    for (auto& v : values) {
      auto w = std::bit_cast<std::uint32_t>(v);
      w = (w >> 24) | ((w >> 8) & 0xFF00u) | ((w << 8) & 0xFF0000u) | (w << 24);
      v = std::bit_cast<float>(w);
    }
  }
  try {
    return DataField(std::move(values), desc.dims);
  } catch (const Error& err) {
    throw CliError(ExitCode::format, "'" + desc.path.string() + "': " + err.what());
  }
}

void write_raw_f32(const std::filesystem::path& path, std::span<const float> values) {
  std::vector<std::uint8_t> bytes(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto w = std::bit_cast<std::uint32_t>(values[i]);
    for (int b = 0; b < 4; ++b) bytes[4 * i + b] = static_cast<std::uint8_t>(w >> (8 * b));
  }
  write_bytes(path, bytes);
}

}  // namespace ufz::cli
