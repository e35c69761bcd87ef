#include "osasi/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <sstream>

namespace osasi {

static_assert(std::endian::native == std::endian::little,
              "raw float64 files assume a little-endian host");

void write_f64(const std::string& path, const Eigen::Ref<const Matrix>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_f64: cannot open " + path);
  for (Index r = 0; r < values.rows(); ++r)
    for (Index c = 0; c < values.cols(); ++c) {
      const double v = values(r, c);
      out.write(reinterpret_cast<const char*>(&v), sizeof(double));
    }
  if (!out) throw Error("write_f64: write failed for " + path);
}

Matrix read_f64(const std::string& path, Index rows, Index cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("read_f64: cannot open " + path);
  Matrix out(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      double v;
      in.read(reinterpret_cast<char*>(&v), sizeof(double));
      if (!in) throw Error("read_f64: file too short: " + path);
      out(r, c) = v;
    }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("read_text_file: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_text_file: cannot open " + path);
  out << content;
  if (!out) throw Error("write_text_file: write failed for " + path);
}

CsvWriter::CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
  if (!out_) throw Error("CsvWriter: cannot open " + path);
}

void CsvWriter::comment(const std::string& text) {
  out_ << "# " << text << "\n";
}

void CsvWriter::header(const std::vector<std::string>& names) {
  row(names);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << fields[i];
  }
  out_ << "\n";
}

std::string CsvWriter::num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string CsvWriter::num(std::int64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
  return buf;
}

}  // namespace osasi
