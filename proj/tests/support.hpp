// Shared oracles and helpers for the test suites. Everything here is an
// independent implementation path: plain scalar loops, no reuse of the
// library's vectorized analysis internals.
#ifndef TONALEXP_TESTS_SUPPORT_HPP
#define TONALEXP_TESTS_SUPPORT_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "tonalexp/dsp/cqt.hpp"
#include "tonalexp/dsp/signal.hpp"

namespace tonalexp::test {

inline dsp::AudioSignal make_sine(double freq, double amplitude, double duration,
                                  int sample_rate) {
  dsp::AudioSignal s;
  s.sample_rate = sample_rate;
  s.samples.resize(static_cast<Index>(std::llround(duration * sample_rate)));
  for (Index i = 0; i < s.samples.size(); ++i)
    s.samples[i] = amplitude *
                   std::sin(2.0 * std::numbers::pi * freq * i / sample_rate);
  return s;
}

// Direct scalar evaluation of one constant-Q bin: Hann-windowed complex
// inner product, normalized by the coefficient sum of the samples in range.
inline double naive_cqt_bin(const dsp::AudioSignal& signal, double center_time,
                            const dsp::CqtConfig& config, int k) {
  const double freq =
      config.f_min * std::pow(2.0, static_cast<double>(k) / config.bins_per_octave);
  const double q = 1.0 / (std::pow(2.0, 1.0 / config.bins_per_octave) - 1.0);
  const long length =
      static_cast<long>(std::ceil(q * signal.sample_rate / freq));
  const long center = std::lround(center_time * signal.sample_rate);
  const long start = center - (length - 1) / 2;

  std::complex<double> acc = 0.0;
  double wsum = 0.0;
  for (long i = 0; i < length; ++i) {
    const long idx = start + i;
    if (idx < 0 || idx >= signal.samples.size()) continue;
    const double w =
        length > 1
            ? 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (length - 1))
            : 1.0;
    const double phase =
        2.0 * std::numbers::pi * freq * static_cast<double>(i) / signal.sample_rate;
    acc += w * signal.samples[idx] *
           std::complex<double>(std::cos(phase), -std::sin(phase));
    wsum += w;
  }
  return wsum > 0.0 ? std::abs(acc) / wsum : 0.0;
}

// Chroma fold oracle: sum semitone triplets of a 36-bins-per-octave frame
// across octaves. Index 0 of the result is pitch class C.
inline std::vector<double> chroma_fold(const Vector& frame,
                                       const dsp::CqtConfig& config) {
  const int per_semitone = config.bins_per_octave / 12;
  const double semis_from_a4 = 12.0 * std::log2(config.f_min / 440.0);
  const int pc0 =
      ((static_cast<int>(std::llround(semis_from_a4)) % 12) + 12 + 9) % 12;

  std::vector<double> chroma(12, 0.0);
  for (Index k = 0; k < frame.size(); ++k) {
    const int semitone = static_cast<int>(k) / per_semitone;
    chroma[static_cast<size_t>((pc0 + semitone) % 12)] += frame[k];
  }
  return chroma;
}

inline int argmax(const std::vector<double>& v) {
  int best = 0;
  for (size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[static_cast<size_t>(best)]) best = static_cast<int>(i);
  return best;
}

} // namespace tonalexp::test

#endif
