#ifndef TONALEXP_DSP_WAV_HPP
#define TONALEXP_DSP_WAV_HPP

#include <filesystem>

#include "tonalexp/dsp/signal.hpp"

namespace tonalexp::dsp {

/// Reads a RIFF/WAVE file into a mono signal. PCM 16/24-bit integer and
/// 32-bit float encodings are accepted; multi-channel audio is downmixed
/// by averaging. Samples are scaled to [-1, 1].
AudioSignal read_wav(const std::filesystem::path& path);

/// Writes a mono signal as 16-bit PCM. Samples outside [-1, 1] are
/// hard-clipped before quantization.
void write_wav(const std::filesystem::path& path, const AudioSignal& signal);

} // namespace tonalexp::dsp

#endif
