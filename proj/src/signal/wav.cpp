#include "nbe2e/signal/wav.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace nbe2e::signal {
namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

}  // namespace

MultichannelWaveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open wav file " + path.string());
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto fail = [&](const std::string& why) {
    throw std::runtime_error(path.string() + ": " + why);
  };
  if (data.size() < 12 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
      std::memcmp(data.data() + 8, "WAVE", 4) != 0)
    fail("not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* pcm = nullptr;
  std::size_t pcm_bytes = 0;
  std::size_t pos = 12;
  while (pos + 8 <= data.size()) {
    const unsigned char* chunk = data.data() + pos;
    const std::uint32_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > data.size()) fail("truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) fail("short fmt chunk");
      format = read_u16(data.data() + body);
      channels = read_u16(data.data() + body + 2);
      rate = read_u32(data.data() + body + 4);
      bits = read_u16(data.data() + body + 14);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      pcm = data.data() + body;
      pcm_bytes = size;
    }
    pos = body + size + (size & 1u);
  }
  if (format != 1 || bits != 16)
    fail("unsupported encoding (only PCM 16-bit is accepted)");
  if (channels == 0 || rate == 0) fail("invalid fmt chunk");
  if (pcm == nullptr) fail("missing data chunk");

  const std::size_t frames = pcm_bytes / (2u * channels);
  MultichannelWaveform wave(static_cast<double>(rate), channels, frames);
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const auto raw = static_cast<std::int16_t>(read_u16(pcm + 2 * (i * channels + c)));
      wave.channels[c][i] = raw / 32768.0;
    }
  }
  return wave;
}

void write_wav(const std::filesystem::path& path, const MultichannelWaveform& wave) {
  wave.validate();
  const auto channels = static_cast<std::uint16_t>(wave.num_channels());
  const auto rate = static_cast<std::uint32_t>(std::lround(wave.sample_rate));
  const auto frames = wave.length();
  const auto data_bytes = static_cast<std::uint32_t>(frames * channels * 2);

  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  for (char ch : std::string("RIFF")) out.push_back(static_cast<unsigned char>(ch));
  put_u32(out, 36 + data_bytes);
  for (char ch : std::string("WAVEfmt ")) out.push_back(static_cast<unsigned char>(ch));
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, channels);
  put_u32(out, rate);
  put_u32(out, rate * channels * 2);
  put_u16(out, static_cast<std::uint16_t>(channels * 2));
  put_u16(out, 16);
  for (char ch : std::string("data")) out.push_back(static_cast<unsigned char>(ch));
  put_u32(out, data_bytes);
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double v = std::clamp(wave.channels[c][i], -1.0, 1.0);
      const auto q = static_cast<std::int16_t>(std::lround(std::clamp(v * 32768.0, -32768.0, 32767.0)));
      put_u16(out, static_cast<std::uint16_t>(q));
    }
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write wav file " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
}

}  // namespace nbe2e::signal
