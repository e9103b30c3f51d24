#include "flywheel/io.hpp"

#include "flywheel/errors.hpp"

#include <openssl/evp.h>
#include <zlib.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace flywheel::io {

std::string format_double(double value) {
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", value);
  return buf.data();
}

namespace {

struct DigestDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

std::string to_hex(const unsigned char* bytes, unsigned int n) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(2 * n, '0');
  for (unsigned int i = 0; i < n; ++i) {
    out[2 * i] = kDigits[bytes[i] >> 4];
    out[2 * i + 1] = kDigits[bytes[i] & 0xF];
  }
  return out;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, DigestDeleter> ctx(EVP_MD_CTX_new());
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) {
    throw Error("sha256 digest failed");
  }
  return to_hex(md.data(), len);
}

std::string sha256_file(const std::filesystem::path& path) {
  return sha256_hex(read_text(path));
}

void write_text(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("write failed: " + path.string());
}

void write_gzip(const std::filesystem::path& path, std::string_view contents) {
  gzFile gz = gzopen(path.string().c_str(), "wb");
  if (gz == nullptr) throw Error("cannot open " + path.string() + " for writing");
  std::size_t offset = 0;
  while (offset < contents.size()) {
    const auto chunk = static_cast<unsigned>(std::min<std::size_t>(contents.size() - offset, 1u << 20));
    if (gzwrite(gz, contents.data() + offset, chunk) != static_cast<int>(chunk)) {
      gzclose(gz);
      throw Error("gzip write failed: " + path.string());
    }
    offset += chunk;
  }
  if (gzclose(gz) != Z_OK) throw Error("gzip close failed: " + path.string());
}

GzipWriter::GzipWriter(const std::filesystem::path& path) : path_(path) {
  handle_ = gzopen(path.string().c_str(), "wb");
  if (handle_ == nullptr) throw Error("cannot open " + path.string() + " for writing");
}

GzipWriter::~GzipWriter() {
  if (handle_ != nullptr) gzclose(static_cast<gzFile>(handle_));
}

void GzipWriter::write(std::string_view data) {
  if (handle_ == nullptr) throw Error("gzip stream already closed: " + path_.string());
  if (data.empty()) return;
  if (gzwrite(static_cast<gzFile>(handle_), data.data(), static_cast<unsigned>(data.size())) !=
      static_cast<int>(data.size())) {
    throw Error("gzip write failed: " + path_.string());
  }
}

void GzipWriter::close() {
  if (handle_ == nullptr) return;
  const int rc = gzclose(static_cast<gzFile>(handle_));
  handle_ = nullptr;
  if (rc != Z_OK) throw Error("gzip close failed: " + path_.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

NumericCsv parse_numeric_csv(std::string_view text) {
  NumericCsv csv;
  std::istringstream in{std::string(text)};
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (first) {
      csv.header = std::move(fields);
      first = false;
      continue;
    }
    if (fields.size() != csv.header.size()) {
      throw Error("csv row has " + std::to_string(fields.size()) + " fields, header has " +
                  std::to_string(csv.header.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(f, &used));
      } catch (const std::exception&) {
        throw Error("non-numeric csv field '" + f + "'");
      }
    }
    csv.rows.push_back(std::move(row));
  }
  return csv;
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i != 0) out += ',';
    out += fields[i];
  }
  out += '\n';
  return out;
}

}  // namespace flywheel::io
