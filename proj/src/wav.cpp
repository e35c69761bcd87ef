#include "osasi/signal.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace osasi {

namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

MultichannelSignal read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("read_wav: cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw IngestionError("read_wav: not a RIFF/WAVE file: " + path);

  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  // Walk the chunk list; chunks are word-aligned.
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    const std::uint32_t size = read_u32(hdr + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw IngestionError("read_wav: truncated chunk in " + path);
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (size < 16) throw IngestionError("read_wav: malformed fmt chunk in " + path);
      format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      sample_rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = size;
    }
    pos = body + size + (size % 2);
  }

  if (format == 0 || data == nullptr) throw IngestionError("read_wav: missing fmt/data chunk");
  if (channels != 1) throw IngestionError("read_wav: only mono files are supported");

  Matrix samples;
  if (format == 1 && bits == 16) {
    const std::size_t n = data_size / 2;
    samples.resize(static_cast<Index>(n), 1);
    for (std::size_t i = 0; i < n; ++i) {
      std::int16_t v;
      std::memcpy(&v, data + 2 * i, 2);
      samples(static_cast<Index>(i), 0) = static_cast<double>(v) / 32768.0;
    }
  } else if (format == 3 && bits == 32) {
    const std::size_t n = data_size / 4;
    samples.resize(static_cast<Index>(n), 1);
    for (std::size_t i = 0; i < n; ++i) {
      float v;
      std::memcpy(&v, data + 4 * i, 4);
      samples(static_cast<Index>(i), 0) = static_cast<double>(v);
    }
  } else {
    throw IngestionError("read_wav: unsupported format (need PCM16 or float32)");
  }

  return {std::move(samples), static_cast<double>(sample_rate)};
}

}  // namespace osasi
