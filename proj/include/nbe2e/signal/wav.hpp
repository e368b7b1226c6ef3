#pragma once

#include <filesystem>

#include "nbe2e/signal/waveform.hpp"

namespace nbe2e::signal {

// PCM 16-bit little-endian, mono or interleaved multichannel. Anything else
// is rejected with std::runtime_error.
MultichannelWaveform read_wav(const std::filesystem::path& path);

// Samples are clipped to [-1, 1] before quantisation.
void write_wav(const std::filesystem::path& path, const MultichannelWaveform& wave);

}  // namespace nbe2e::signal
