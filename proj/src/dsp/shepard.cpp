#include "tonalexp/dsp/shepard.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tonalexp::dsp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kA4 = 440.0;
constexpr int kPitchClassA = 9;  // pitch classes numbered 0 = C .. 11 = B

void validate(const ShepardConfig& config) {
  if (config.component_count < 1)
    throw std::invalid_argument("ShepardConfig requires at least one component");
  if (!(config.band_lo_hz > 0.0))
    throw std::invalid_argument("ShepardConfig base band must be positive");
}

// Raised cosine over log2-frequency, spanning `span` octaves above band_lo.
// Zero at both ends of the span, 1 at its geometric center.
double envelope(double frequency, const ShepardConfig& config) {
  const double span = static_cast<double>(config.component_count);
  const double u = std::log2(frequency / config.band_lo_hz);
  if (u < 0.0 || u > span) return 0.0;
  return 0.5 * (1.0 - std::cos(2.0 * kPi * u / span));
}

void apply_ramps(AudioSignal& signal, double ramp_seconds) {
  const Index ramp = std::min<Index>(
      signal.samples.size() / 2,
      static_cast<Index>(std::llround(ramp_seconds * signal.sample_rate)));
  for (Index i = 0; i < ramp; ++i) {
    const double gain = static_cast<double>(i) / ramp;
    signal.samples[i] *= gain;
    signal.samples[signal.samples.size() - 1 - i] *= gain;
  }
}

void normalize_peak(AudioSignal& signal, double amplitude) {
  const double peak = signal.samples.cwiseAbs().maxCoeff();
  if (peak > 0.0) signal.samples *= amplitude / peak;
}

} // namespace

double folded_base_frequency(int pitch_class, const ShepardConfig& config) {
  validate(config);
  if (pitch_class < 0 || pitch_class > 11)
    throw std::out_of_range("pitch class must be in 0..11");
  // Any equal-tempered representative of the class, folded by octaves into
  // [band_lo, 2 * band_lo).
  const double any = kA4 * std::exp2((pitch_class - kPitchClassA) / 12.0);
  const double octaves = std::log2(any / config.band_lo_hz);
  return config.band_lo_hz * std::exp2(octaves - std::floor(octaves));
}

std::vector<ShepardComponent> shepard_components(int pitch_class,
                                                 const ShepardConfig& config) {
  const double base = folded_base_frequency(pitch_class, config);
  std::vector<ShepardComponent> components;
  components.reserve(static_cast<size_t>(config.component_count));
  for (int o = 0; o < config.component_count; ++o) {
    const double freq = base * std::exp2(static_cast<double>(o));
    components.push_back({freq, envelope(freq, config)});
  }
  return components;
}

AudioSignal shepard_tone(int pitch_class, double duration, int sample_rate,
                         const ShepardConfig& config) {
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
  const auto components = shepard_components(pitch_class, config);

  AudioSignal signal;
  signal.sample_rate = sample_rate;
  signal.samples = Vector::Zero(
      static_cast<Index>(std::llround(duration * sample_rate)));
  for (const auto& [freq, amp] : components) {
    if (amp == 0.0) continue;
    const double omega = 2.0 * kPi * freq / sample_rate;
    for (Index i = 0; i < signal.samples.size(); ++i)
      signal.samples[i] += amp * std::sin(omega * static_cast<double>(i));
  }
  normalize_peak(signal, config.amplitude);
  apply_ramps(signal, config.ramp_seconds);
  return signal;
}

AudioSignal shepard_chord(const std::set<int>& pitch_classes, double duration,
                          int sample_rate, const ShepardConfig& config) {
  if (pitch_classes.empty())
    throw std::invalid_argument("chord requires at least one pitch class");

  AudioSignal signal;
  signal.sample_rate = sample_rate;
  signal.samples = Vector::Zero(
      static_cast<Index>(std::llround(duration * sample_rate)));
  for (int pc : pitch_classes)
    signal.samples += shepard_tone(pc, duration, sample_rate, config).samples;
  normalize_peak(signal, config.amplitude);
  return signal;
}

} // namespace tonalexp::dsp
