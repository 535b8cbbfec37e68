#include "cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli/dataset.hpp"
#include "ufz/metrics.hpp"
#include "ufz/pipeline.hpp"

namespace ufz::cli {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct CommonOptions {
  std::string dims;
  std::string type = "f32";
  std::string abs;
  std::string rel;
  std::size_t block_size = 128;
  std::string mode = "sequential";
  unsigned workers = 0;
  std::string report;
};

void add_common(CLI::App& cmd, CommonOptions& o, bool with_dims, bool with_bounds) {
  if (with_dims) {
    cmd.add_option("--dims", o.dims, "Dimensions, e.g. 256,384,384");
    cmd.add_option("--type", o.type, "Element type (only f32)")->capture_default_str();
  }
  if (with_bounds) {
    auto* a = cmd.add_option("--abs", o.abs, "Absolute error bound (comma list where a sweep is run)");
    auto* r = cmd.add_option("--rel", o.rel, "Value-range-relative error bound (comma list where a sweep is run)");
    a->excludes(r);
  }
  cmd.add_option("--block-size", o.block_size, "Block size in elements")->capture_default_str();
  cmd.add_option("--mode", o.mode, "sequential | parallel-sim")->capture_default_str();
  cmd.add_option("--workers", o.workers, "Worker threads for parallel-sim (0 = all cores)");
  cmd.add_option("--report", o.report, "Write a report (.json for JSON, anything else key=value)");
}

Execution parse_mode(const std::string& mode) {
  if (mode == "sequential") return Execution::sequential;
  if (mode == "parallel-sim") return Execution::parallel_sim;
  throw CliError(ExitCode::usage, "unknown --mode '" + mode + "'");
}

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CliError(ExitCode::usage, std::string("invalid ") + flag + " value '" + item + "'");
    }
  }
  return values;
}

std::vector<ErrorBoundSpec> bound_specs(const CommonOptions& o, std::vector<double> default_rel) {
  std::vector<ErrorBoundSpec> specs;
  if (!o.abs.empty()) {
    for (double v : parse_list(o.abs, "--abs")) specs.push_back(ErrorBoundSpec::absolute(v));
  } else {
    const auto rel = o.rel.empty() ? default_rel : parse_list(o.rel, "--rel");
    for (double v : rel) specs.push_back(ErrorBoundSpec::relative(v));
  }
  if (specs.empty()) throw CliError(ExitCode::usage, "an error bound is required (--abs E or --rel R)");
  for (const auto& s : specs) {
    try {
      s.validate();
    } catch (const Error& e) {
      throw CliError(ExitCode::usage, e.what());
    }
  }
  return specs;
}

CompressorConfig make_config(const CommonOptions& o, const ErrorBoundSpec& bound) {
  CompressorConfig cfg;
  cfg.block_size = o.block_size;
  cfg.bound = bound;
  cfg.execution = parse_mode(o.mode);
  cfg.workers = o.workers;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw CliError(ExitCode::usage, e.what());
  }
  return cfg;
}

DatasetDescriptor descriptor(const std::string& path, const CommonOptions& o) {
  if (o.type != "f32") throw CliError(ExitCode::usage, "unsupported --type '" + o.type + "' (only f32)");
  if (o.dims.empty()) throw CliError(ExitCode::usage, "--dims is required");
  return {path, parse_dims(o.dims)};
}

std::string bound_label(const ErrorBoundSpec& b) {
  std::ostringstream s;
  s << (b.mode == BoundMode::absolute ? "abs=" : "rel=") << b.magnitude;
  return s.str();
}

double seconds(Clock::time_point a, Clock::time_point b) {
  // one tick keeps sub-resolution runs finite
  return std::max(std::chrono::duration<double>(b - a).count(), 1e-9);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw CliError(ExitCode::io, "cannot create report '" + path.string() + "'");
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

bool wants_json(const std::string& path) { return fs::path(path).extension() == ".json"; }

void write_reports(const std::string& path, const std::vector<QualityReport>& reports) {
  if (path.empty()) return;
  if (wants_json(path)) {
    write_text(path, reports_to_json(reports));
    return;
  }
  std::string text;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (i) text += '\n';
    text += reports[i].to_key_value();
  }
  write_text(path, text);
}

ExitCode exit_code_for(Errc code) {
  switch (code) {
    case Errc::invalid_bound:
    case Errc::invalid_config:
    case Errc::zero_range_relative_bound:
      return ExitCode::usage;
    default:
      return ExitCode::format;
  }
}

// ---------------------------------------------------------------------------

struct CompressArgs {
  CommonOptions common;
  std::string input;
  std::string output;
};

int cmd_compress(const CompressArgs& a, std::ostream& out) {
  const auto desc = descriptor(a.input, a.common);
  const auto bounds = bound_specs(a.common, {});
  if (bounds.size() != 1) throw CliError(ExitCode::usage, "compress takes exactly one error bound");
  const auto cfg = make_config(a.common, bounds.front());
  const DataField field = read_dataset(desc);

  const auto t0 = Clock::now();
  const CompressedStream stream = compress(field, cfg);
  const auto t1 = Clock::now();
  write_bytes(a.output, serialize(stream));

  QualityReport r;
  r.label = desc.path.filename().string();
  r.error_bound = stream.header.error_bound;
  r.block_size = cfg.block_size;
  r.original_bytes = field.size_bytes();
  r.compressed_bytes = stream.compressed_size();
  r.cr = compression_ratio(r.original_bytes, r.compressed_bytes);
  r.ct_bytes_per_sec = throughput(field.size(), DataField::element_size_bytes, seconds(t0, t1));

  out << std::setprecision(6) << "compressed " << a.input << " -> " << a.output << '\n'
      << "  e=" << r.error_bound << " block_size=" << cfg.block_size << " mode=" << a.common.mode << '\n'
      << "  " << r.original_bytes << " -> " << r.compressed_bytes << " bytes, CR=" << r.cr
      << ", CT=" << r.ct_bytes_per_sec / 1e6 << " MB/s\n";

  if (!a.common.report.empty()) {
    // a report carries the quality side too, so decode once more
    const auto t2 = Clock::now();
    const DataField recon = decompress(stream, cfg.execution, cfg.workers);
    const auto t3 = Clock::now();
    r.dt_bytes_per_sec = throughput(field.size(), DataField::element_size_bytes, seconds(t2, t3));
    r.mse = mean_squared_error(field.values(), recon.values());
    r.max_abs_error = max_abs_error(field.values(), recon.values());
    r.psnr_db = r.mse == 0.0 ? std::numeric_limits<double>::infinity()
                             : psnr(field.values(), recon.values(), field.value_range());
    write_reports(a.common.report, {r});
  }
  return 0;
}

struct DecompressArgs {
  CommonOptions common;
  std::string input;
  std::string output;
  std::string original;
};

int cmd_decompress(const DecompressArgs& a, std::ostream& out, std::ostream& err) {
  const Execution mode = parse_mode(a.common.mode);
  const auto bytes = read_bytes(a.input);
  const CompressedStream stream = deserialize(bytes);

  const auto t0 = Clock::now();
  const DataField recon = decompress(stream, mode, a.common.workers);
  const auto t1 = Clock::now();
  write_raw_f32(a.output, recon.values());

  QualityReport r;
  r.label = fs::path(a.input).filename().string();
  r.error_bound = stream.header.error_bound;
  r.block_size = stream.header.block_size;
  r.original_bytes = recon.size_bytes();
  r.compressed_bytes = bytes.size();
  r.cr = compression_ratio(r.original_bytes, r.compressed_bytes);
  r.dt_bytes_per_sec = throughput(recon.size(), DataField::element_size_bytes, seconds(t0, t1));
  out << std::setprecision(6) << "decompressed " << a.input << " -> " << a.output << " (" << recon.size()
      << " values), DT=" << r.dt_bytes_per_sec / 1e6 << " MB/s\n";

  int status = 0;
  if (!a.original.empty()) {
    const DataField orig = read_dataset({a.original, stream.header.dims});
    r.mse = mean_squared_error(orig.values(), recon.values());
    r.max_abs_error = max_abs_error(orig.values(), recon.values());
    r.psnr_db = r.mse == 0.0 ? std::numeric_limits<double>::infinity()
                             : psnr(orig.values(), recon.values(), orig.value_range());
    out << "  max_abs_error=" << r.max_abs_error << " (bound " << r.error_bound << "), PSNR=" << r.psnr_db
        << " dB\n";
    if (r.max_abs_error > r.error_bound) {
      err << "error bound violated: max error " << r.max_abs_error << " > " << r.error_bound << '\n';
      status = static_cast<int>(ExitCode::bound_violation);
    }
  }
  write_reports(a.common.report, {r});
  return status;
}

struct AnalyzeArgs {
  CommonOptions common;
  std::string input;
  std::string sizes = "8,16,32,64,128,256";
  std::string thresholds = "1e-4,1e-3,1e-2,1e-1,1";
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const auto desc = descriptor(a.input, a.common);
  const auto bounds = bound_specs(a.common, {1e-3, 1e-4});
  const Execution mode = parse_mode(a.common.mode);
  std::vector<std::size_t> sizes;
  for (double s : parse_list(a.sizes, "--sizes")) {
    if (s < 8 || s > 65535 || s != std::floor(s)) throw CliError(ExitCode::usage, "invalid block size in --sizes");
    sizes.push_back(static_cast<std::size_t>(s));
  }
  const auto thresholds = parse_list(a.thresholds, "--thresholds");
  const DataField field = read_dataset(desc);

  const auto cdf = block_range_cdf(field, a.common.block_size, thresholds);
  const std::size_t nblocks = block_count(field.size(), a.common.block_size);
  out << "block relative value-range CDF (block size " << a.common.block_size << ", " << nblocks << " blocks)\n";
  for (const auto& p : cdf) out << "  <= " << std::setw(8) << p.threshold << " : " << std::fixed << std::setprecision(4)
                                << p.fraction << std::defaultfloat << '\n';

  std::vector<QualityReport> sweep;
  out << "block-size sweep\n  " << std::left << std::setw(12) << "bound" << std::setw(8) << "block" << std::setw(12)
      << "CR" << "PSNR(dB)" << std::right << '\n';
  for (const auto& b : bounds) {
    for (std::size_t bs : sizes) {
      CompressorConfig cfg;
      cfg.block_size = bs;
      cfg.bound = b;
      cfg.execution = mode;
      cfg.workers = a.common.workers;
      auto r = measure_round_trip(field, cfg, {.label = bound_label(b)});
      out << "  " << std::left << std::setw(12) << r.label << std::setw(8) << bs << std::setw(12) << std::setprecision(5)
          << r.cr << std::setprecision(5) << r.psnr_db << std::right << '\n';
      sweep.push_back(std::move(r));
    }
  }

  if (!a.common.report.empty()) {
    if (wants_json(a.common.report)) {
      nlohmann::json doc;
      doc["block_size"] = a.common.block_size;
      doc["block_range_cdf"] = nlohmann::json::array();
      for (const auto& p : cdf) doc["block_range_cdf"].push_back({{"threshold", p.threshold}, {"fraction", p.fraction}});
      doc["sweep"] = nlohmann::json::parse(reports_to_json(sweep));
      write_text(a.common.report, doc.dump(2));
    } else {
      std::ostringstream kv;
      kv.precision(17);
      for (const auto& p : cdf) kv << "block_range_cdf[" << p.threshold << "]=" << p.fraction << '\n';
      for (const auto& r : sweep) kv << '\n' << r.to_key_value();
      write_text(a.common.report, kv.str());
    }
  }
  return 0;
}

struct BenchArgs {
  CommonOptions common;
  std::string dir;
  bool include_io = false;
};

std::vector<DatasetDescriptor> list_datasets(const BenchArgs& a) {
  std::error_code ec;
  if (!fs::is_directory(a.dir, ec)) throw CliError(ExitCode::io, "'" + a.dir + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(a.dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext == ".f32" || ext == ".dat" || ext == ".bin") files.push_back(entry.path());
  }
  if (files.empty()) throw CliError(ExitCode::io, "no .f32/.dat/.bin datasets in '" + a.dir + "'");
  std::sort(files.begin(), files.end());

  std::vector<DatasetDescriptor> out;
  for (const auto& f : files) {
    std::optional<std::vector<std::uint64_t>> dims;
    if (!a.common.dims.empty()) dims = parse_dims(a.common.dims);
    if (!dims) dims = dims_from_name(f.filename().string());
    if (!dims) dims = dims_from_name(fs::absolute(f).parent_path().filename().string());
    if (!dims) throw CliError(ExitCode::usage, "no dims for '" + f.string() + "'; pass --dims or name it AxBxC");
    out.push_back({f, *dims});
  }
  return out;
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  if (a.common.type != "f32") throw CliError(ExitCode::usage, "unsupported --type '" + a.common.type + "' (only f32)");
  const auto datasets = list_datasets(a);
  const auto bounds = bound_specs(a.common, {1e-2, 1e-3, 1e-4});
  const fs::path scratch = fs::temp_directory_path() / ("ufz-bench-" + std::to_string(Clock::now().time_since_epoch().count()));
  if (a.include_io) fs::create_directories(scratch);

  std::vector<QualityReport> all;
  nlohmann::json aggregates = nlohmann::json::array();
  for (const auto& b : bounds) {
    const auto cfg = make_config(a.common, b);
    out << "bound " << bound_label(b) << ", block size " << cfg.block_size << ", mode " << a.common.mode
        << (a.include_io ? ", timing includes file I/O" : "") << '\n';
    out << "  " << std::left << std::setw(28) << "field" << std::right << std::setw(10) << "CR" << std::setw(12)
        << "CT(MB/s)" << std::setw(12) << "DT(MB/s)" << std::setw(11) << "PSNR(dB)" << std::setw(13) << "max_err"
        << '\n';
    std::vector<double> crs, cts, dts, sizes;
    for (const auto& d : datasets) {
      QualityReport r;
      r.label = d.path.filename().string();
      r.block_size = cfg.block_size;

      const auto t_read0 = Clock::now();
      const DataField field = read_dataset(d);
      const auto t_read1 = Clock::now();
      const CompressedStream stream = compress(field, cfg);
      const auto t_c = Clock::now();
      double ct_s = seconds(t_read1, t_c);
      double dt_s = 0.0;
      DataField recon = [&] {
        if (!a.include_io) {
          const auto t0 = Clock::now();
          DataField f = decompress(stream, cfg.execution, cfg.workers);
          dt_s = seconds(t0, Clock::now());
          return f;
        }
        const fs::path tmp = scratch / (r.label + ".ufzx");
        write_bytes(tmp, serialize(stream));
        ct_s = seconds(t_read0, Clock::now());
        const auto t0 = Clock::now();
        DataField f = decompress(deserialize(read_bytes(tmp)), cfg.execution, cfg.workers);
        write_raw_f32(scratch / (r.label + ".out"), f.values());
        dt_s = seconds(t0, Clock::now());
        return f;
      }();

      r.error_bound = stream.header.error_bound;
      r.original_bytes = field.size_bytes();
      r.compressed_bytes = stream.compressed_size();
      r.cr = compression_ratio(r.original_bytes, r.compressed_bytes);
      r.ct_bytes_per_sec = throughput(field.size(), DataField::element_size_bytes, ct_s);
      r.dt_bytes_per_sec = throughput(field.size(), DataField::element_size_bytes, dt_s);
      r.mse = mean_squared_error(field.values(), recon.values());
      r.max_abs_error = max_abs_error(field.values(), recon.values());
      r.psnr_db = r.mse == 0.0 ? std::numeric_limits<double>::infinity()
                               : psnr(field.values(), recon.values(), field.value_range());

      out << "  " << std::left << std::setw(28) << r.label << std::right << std::setprecision(4) << std::setw(10)
          << r.cr << std::setw(12) << std::setprecision(6) << r.ct_bytes_per_sec / 1e6 << std::setw(12)
          << r.dt_bytes_per_sec / 1e6 << std::setw(11) << std::setprecision(5) << r.psnr_db << std::setw(13)
          << std::setprecision(4) << r.max_abs_error << '\n';
      crs.push_back(r.cr);
      cts.push_back(r.ct_bytes_per_sec);
      dts.push_back(r.dt_bytes_per_sec);
      sizes.push_back(static_cast<double>(r.original_bytes));
      r.label = bound_label(b) + ":" + r.label;
      all.push_back(std::move(r));
    }
    const double cr_min = *std::min_element(crs.begin(), crs.end());
    const double cr_max = *std::max_element(crs.begin(), crs.end());
    const double cr_hmean = harmonic_mean(crs);
    const double cr_wmean = weighted_mean(crs, sizes);
    out << "  CR min / overall (harmonic mean) / max = " << std::setprecision(4) << cr_min << " / " << cr_hmean
        << " / " << cr_max << "  (size-weighted mean " << cr_wmean << ")\n"
        << "  CT / DT overall (harmonic mean) = " << std::setprecision(6) << harmonic_mean(cts) / 1e6 << " / "
        << harmonic_mean(dts) / 1e6 << " MB/s\n";
    aggregates.push_back({{"bound", bound_label(b)},
                          {"cr_min", cr_min},
                          {"cr_harmonic_mean", cr_hmean},
                          {"cr_max", cr_max},
                          {"cr_size_weighted_mean", cr_wmean},
                          {"ct_harmonic_mean", harmonic_mean(cts)},
                          {"dt_harmonic_mean", harmonic_mean(dts)},
                          {"overall", "harmonic_mean"}});
  }
  if (a.include_io) fs::remove_all(scratch);

  if (!a.common.report.empty()) {
    if (wants_json(a.common.report)) {
      nlohmann::json doc;
      doc["fields"] = nlohmann::json::parse(reports_to_json(all));
      doc["aggregates"] = aggregates;
      write_text(a.common.report, doc.dump(2));
    } else {
      write_reports(a.common.report, all);
    }
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ufz: error-bounded lossy compression for raw f32 scientific arrays", "ufz"};
  app.require_subcommand(1);

  CompressArgs ca;
  auto* c = app.add_subcommand("compress", "Compress a raw f32 file into a .ufzx container");
  c->add_option("input", ca.input, "Raw little-endian f32 file")->required();
  c->add_option("-o,--output", ca.output, "Output .ufzx path")->required();
  add_common(*c, ca.common, true, true);

  DecompressArgs da;
  auto* d = app.add_subcommand("decompress", "Decompress a .ufzx container to raw f32");
  d->add_option("input", da.input, ".ufzx container")->required();
  d->add_option("-o,--output", da.output, "Output raw f32 path")->required();
  d->add_option("--original", da.original, "Original raw f32 file; checks the error bound and prints PSNR");
  add_common(*d, da.common, false, false);

  AnalyzeArgs aa;
  auto* an = app.add_subcommand("analyze", "Block value-range CDF and block-size sweep");
  an->add_option("input", aa.input, "Raw little-endian f32 file")->required();
  an->add_option("--sizes", aa.sizes, "Block sizes for the sweep")->capture_default_str();
  an->add_option("--thresholds", aa.thresholds, "Relative-range CDF thresholds")->capture_default_str();
  add_common(*an, aa.common, true, true);

  BenchArgs ba;
  auto* b = app.add_subcommand("bench", "Per-field CR/CT/DT/PSNR table with min/harmonic-mean/max aggregation");
  b->add_option("dir", ba.dir, "Directory of raw f32 fields")->required();
  b->add_flag("--include-io", ba.include_io, "Include file I/O in CT/DT");
  add_common(*b, ba.common, true, true);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ExitCode::usage);
  }

  try {
    if (*c) return cmd_compress(ca, out);
    if (*d) return cmd_decompress(da, out, err);
    if (*an) return cmd_analyze(aa, out);
    return cmd_bench(ba, out);
  } catch (const CliError& e) {
    err << "ufz: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const Error& e) {
    err << "ufz: " << e.what() << '\n';
    return static_cast<int>(exit_code_for(e.code()));
  } catch (const fs::filesystem_error& e) {
    err << "ufz: " << e.what() << '\n';
    return static_cast<int>(ExitCode::io);
  }
}

}  // namespace ufz::cli
