#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace flywheel::io {

/// 17 significant digits; round-trips every double and is byte-stable.
std::string format_double(double value);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, std::string_view contents);
void write_gzip(const std::filesystem::path& path, std::string_view contents);
std::string read_text(const std::filesystem::path& path);

/// Streaming gzip output for data too large to hold in memory.
class GzipWriter {
 public:
  explicit GzipWriter(const std::filesystem::path& path);
  ~GzipWriter();
  GzipWriter(const GzipWriter&) = delete;
  GzipWriter& operator=(const GzipWriter&) = delete;

  void write(std::string_view data);
  /// Flushes and closes; throws on failure. Called by the destructor if needed.
  void close();

 private:
  void* handle_ = nullptr;
  std::filesystem::path path_;
};

/// Minimal numeric CSV: a header line followed by rows of numbers.
struct NumericCsv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

NumericCsv parse_numeric_csv(std::string_view text);

/// Joins already-formatted fields with commas.
std::string csv_row(const std::vector<std::string>& fields);

}  // namespace flywheel::io
