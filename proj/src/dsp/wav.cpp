#include "tonalexp/dsp/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tonalexp::dsp {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint32_t read_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void append_u32(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void append_u16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

} // namespace

AudioSignal read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open WAV file: " + path.string());

  std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>()};
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw std::runtime_error("not a RIFF/WAVE file: " + path.string());

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  const unsigned char* data = nullptr;
  size_t data_size = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    uint32_t chunk_size = read_u32(chunk + 4);
    const unsigned char* body = chunk + 8;
    if (pos + 8 + chunk_size > bytes.size())
      chunk_size = static_cast<uint32_t>(bytes.size() - pos - 8);

    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw std::runtime_error("malformed fmt chunk");
      format = read_u16(body);
      channels = read_u16(body + 2);
      sample_rate = read_u32(body + 4);
      bits = read_u16(body + 14);
      if (format == kFormatExtensible && chunk_size >= 40)
        format = read_u16(body + 24);  // first word of the subformat GUID
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = body;
      data_size = chunk_size;
    }
    pos += 8 + chunk_size + (chunk_size & 1);
  }

  if (!data) throw std::runtime_error("WAV file has no data chunk");
  if (channels == 0 || sample_rate == 0)
    throw std::runtime_error("WAV file has no fmt chunk");

  size_t bytes_per_sample;
  if (format == kFormatPcm && bits == 16) bytes_per_sample = 2;
  else if (format == kFormatPcm && bits == 24) bytes_per_sample = 3;
  else if (format == kFormatFloat && bits == 32) bytes_per_sample = 4;
  else
    throw std::runtime_error("unsupported WAV encoding (" +
                             std::to_string(format) + "/" +
                             std::to_string(bits) + " bit); expected PCM "
                             "16/24-bit or 32-bit float");

  const size_t frame_bytes = bytes_per_sample * channels;
  const size_t n_frames = data_size / frame_bytes;

  AudioSignal signal;
  signal.sample_rate = static_cast<int>(sample_rate);
  signal.samples.resize(static_cast<Index>(n_frames));

  for (size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    for (unsigned c = 0; c < channels; ++c) {
      const unsigned char* s = data + i * frame_bytes + c * bytes_per_sample;
      double v;
      if (bytes_per_sample == 2) {
        int16_t raw = static_cast<int16_t>(s[0] | (s[1] << 8));
        v = raw / 32768.0;
      } else if (bytes_per_sample == 3) {
        int32_t raw = s[0] | (s[1] << 8) | (s[2] << 16);
        if (raw & 0x800000) raw |= ~0xFFFFFF;  // sign extension
        v = raw / 8388608.0;
      } else {
        float f;
        std::memcpy(&f, s, 4);
        v = f;
      }
      acc += v;
    }
    signal.samples[static_cast<Index>(i)] = acc / channels;
  }
  return signal;
}

void write_wav(const std::filesystem::path& path, const AudioSignal& signal) {
  const uint32_t n = static_cast<uint32_t>(signal.samples.size());
  const uint32_t data_size = n * 2;

  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  append_u32(out, 36 + data_size);
  out += "WAVE";
  out += "fmt ";
  append_u32(out, 16);
  append_u16(out, kFormatPcm);
  append_u16(out, 1);  // mono
  append_u32(out, static_cast<uint32_t>(signal.sample_rate));
  append_u32(out, static_cast<uint32_t>(signal.sample_rate) * 2);
  append_u16(out, 2);   // block align
  append_u16(out, 16);  // bits per sample
  out += "data";
  append_u32(out, data_size);

  for (uint32_t i = 0; i < n; ++i) {
    double v = std::clamp(signal.samples[static_cast<Index>(i)], -1.0, 1.0);
    auto q = static_cast<int16_t>(std::lrint(v * 32767.0));
    append_u16(out, static_cast<uint16_t>(q));
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot write WAV file: " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw std::runtime_error("short write to " + path.string());
}

} // namespace tonalexp::dsp
