#pragma once

// RIFF/WAVE reader and writer, PCM16 little-endian mono only. The writer
// emits the canonical 44-byte header; the reader skips unknown chunks.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "dafjam/audio_buffer.hpp"
#include "dafjam/error.hpp"

namespace dafjam {

namespace detail {

inline std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

inline void put_tag(std::vector<unsigned char>& out, const char (&tag)[5]) {
  out.insert(out.end(), tag, tag + 4);
}

inline bool tag_is(const unsigned char* p, const char (&tag)[5]) {
  return std::equal(p, p + 4, tag);
}

}  // namespace detail

/// Saturating PCM16 quantization: clamp to [-1, 1], scale by 32768, round,
/// then clip to the int16 range (so 1.0 -> 32767 and -1.0 -> -32768).
inline std::int16_t quantize_pcm16(double sample) {
  const double clamped = std::clamp(sample, -1.0, 1.0);
  const long q = std::lround(clamped * 32768.0);
  return static_cast<std::int16_t>(std::clamp<long>(q, -32768, 32767));
}

inline std::vector<unsigned char> encode_wav(const AudioBuffer& buf) {
  if (buf.sample_rate_hz <= 0) throw Error(ErrorKind::InvalidConfig, "sample rate must be positive");
  const auto data_bytes = static_cast<std::uint32_t>(buf.samples.size() * 2);
  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  detail::put_tag(out, "RIFF");
  detail::put_u32(out, 36 + data_bytes);
  detail::put_tag(out, "WAVE");
  detail::put_tag(out, "fmt ");
  detail::put_u32(out, 16);
  detail::put_u16(out, 1);  // PCM
  detail::put_u16(out, 1);  // mono
  detail::put_u32(out, static_cast<std::uint32_t>(buf.sample_rate_hz));
  detail::put_u32(out, static_cast<std::uint32_t>(buf.sample_rate_hz) * 2);
  detail::put_u16(out, 2);
  detail::put_u16(out, 16);
  detail::put_tag(out, "data");
  detail::put_u32(out, data_bytes);
  for (double s : buf.samples) {
    detail::put_u16(out, static_cast<std::uint16_t>(quantize_pcm16(s)));
  }
  return out;
}

inline AudioBuffer decode_wav(const std::vector<unsigned char>& bytes) {
  auto corrupt = [](const std::string& msg) { throw Error(ErrorKind::CorruptHeader, msg); };
  if (bytes.size() < 12 || !detail::tag_is(bytes.data(), "RIFF") ||
      !detail::tag_is(bytes.data() + 8, "WAVE")) {
    corrupt("not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  int rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = detail::read_u32(chunk + 4);
    const std::size_t body = pos + 8;

    if (detail::tag_is(chunk, "fmt ")) {
      if (size < 16 || body + size > bytes.size()) corrupt("truncated fmt chunk");
      const unsigned char* f = bytes.data() + body;
      const std::uint16_t format = detail::read_u16(f);
      const std::uint16_t channels = detail::read_u16(f + 2);
      const std::uint32_t sample_rate = detail::read_u32(f + 4);
      const std::uint16_t bits = detail::read_u16(f + 14);
      if (format != 1) {
        throw Error(ErrorKind::UnsupportedFormat,
                    "format tag " + std::to_string(format) + " (only PCM = 1 is supported)");
      }
      if (channels != 1) {
        throw Error(ErrorKind::UnsupportedFormat,
                    std::to_string(channels) + " channels (only mono is supported)");
      }
      if (bits != 16) {
        throw Error(ErrorKind::UnsupportedFormat,
                    std::to_string(bits) + "-bit samples (only 16-bit is supported)");
      }
      if (sample_rate == 0 || sample_rate > 1'000'000) corrupt("implausible sample rate");
      rate = static_cast<int>(sample_rate);
      have_fmt = true;
    } else if (detail::tag_is(chunk, "data")) {
      if (!have_fmt) corrupt("data chunk before fmt chunk");
      if (body + size > bytes.size()) corrupt("data chunk shorter than its declared size");
      if (size % 2 != 0) corrupt("odd data chunk size for 16-bit samples");
      AudioBuffer buf(rate, size / 2);
      for (std::size_t i = 0; i < buf.samples.size(); ++i) {
        const auto v = static_cast<std::int16_t>(detail::read_u16(bytes.data() + body + 2 * i));
        buf.samples[i] = v / 32768.0;
      }
      return buf;
    }
    // Chunks are padded to even length.
    pos = body + size + (size & 1u);
  }
  corrupt(have_fmt ? "missing data chunk" : "missing fmt chunk");
  return {};
}

inline AudioBuffer read_wav(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorKind::FileNotFound, path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

inline void write_wav(const std::filesystem::path& path, const AudioBuffer& buf) {
  const auto bytes = encode_wav(buf);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace dafjam
