#ifndef TONALEXP_DSP_SHEPARD_HPP
#define TONALEXP_DSP_SHEPARD_HPP

#include <set>
#include <vector>

#include "tonalexp/dsp/signal.hpp"

namespace tonalexp::dsp {

/// Octave-ambiguous tone synthesis. A tone is a stack of `component_count`
/// sinusoids at frequency ratios 1, 2, 4, ... from a base folded into
/// [band_lo_hz, 2 * band_lo_hz). Component amplitudes follow a raised cosine
/// in log2-frequency over the full component span, zero at both ends and
/// maximal at the geometric center of the span.
struct ShepardConfig {
  int component_count = 5;
  double band_lo_hz = 77.78;    // lowest base band, [band_lo, 2 * band_lo)
  double band_hi_hz = 155.57;   // informational upper edge of the base band
  double amplitude = 0.5;       // peak amplitude before onset/offset ramps
  double ramp_seconds = 0.010;  // linear onset/offset ramp length
};

struct ShepardComponent {
  double frequency_hz;
  double amplitude;  // envelope weight, before peak normalization
};

/// Base frequency for a pitch class (0 = C .. 11 = B), equal temperament
/// anchored at A4 = 440 Hz, folded by octaves into the base band.
double folded_base_frequency(int pitch_class, const ShepardConfig& config);

/// The component stack a tone for `pitch_class` is built from.
std::vector<ShepardComponent> shepard_components(int pitch_class,
                                                 const ShepardConfig& config);

/// Synthesizes one tone. Peak amplitude is normalized to config.amplitude
/// and linear onset/offset ramps are applied afterwards.
AudioSignal shepard_tone(int pitch_class, double duration, int sample_rate,
                         const ShepardConfig& config = {});

/// Sample-wise sum of the member tones, renormalized to the configured peak
/// amplitude. Throws on an empty pitch-class set.
AudioSignal shepard_chord(const std::set<int>& pitch_classes, double duration,
                          int sample_rate, const ShepardConfig& config = {});

} // namespace tonalexp::dsp

#endif
