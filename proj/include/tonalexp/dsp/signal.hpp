#ifndef TONALEXP_DSP_SIGNAL_HPP
#define TONALEXP_DSP_SIGNAL_HPP

#include "tonalexp/types.hpp"

namespace tonalexp::dsp {

/// Mono audio at a fixed sample rate. Amplitudes are dimensionless,
/// nominally in [-1, 1].
struct AudioSignal {
  Vector samples;
  int sample_rate = 44100;

  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

} // namespace tonalexp::dsp

#endif
