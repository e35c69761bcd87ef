#pragma once

#include "osasi/types.hpp"

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace osasi {

/// Raw little-endian float64 array files, row-major.
void write_f64(const std::string& path, const Eigen::Ref<const Matrix>& values);
Matrix read_f64(const std::string& path, Index rows, Index cols);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Deterministic CSV emission (header comment line, then a header row).
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  void comment(const std::string& text);
  void header(const std::vector<std::string>& names);
  void row(const std::vector<std::string>& fields);

  static std::string num(double v);
  static std::string num(std::int64_t v);

 private:
  std::ofstream out_;
};

}  // namespace osasi
