#include "tonalexp/dsp/cqt.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "tonalexp/parallel.hpp"

namespace tonalexp::dsp {

namespace {

constexpr double kPi = std::numbers::pi;

// Generalized cosine window coefficients: w[n] = c0 - c1 cos(2 pi n / (M-1)).
std::pair<double, double> window_coefficients(WindowKind kind) {
  switch (kind) {
    case WindowKind::hann: return {0.5, 0.5};
    case WindowKind::hamming: return {0.54, 0.46};
  }
  throw std::invalid_argument("unknown window kind");
}

void validate(const CqtConfig& config) {
  if (!(config.f_min > 0.0) || !(config.f_max > config.f_min))
    throw std::invalid_argument("CqtConfig requires 0 < f_min < f_max");
  if (config.bins_per_octave < 1)
    throw std::invalid_argument("CqtConfig requires bins_per_octave >= 1");
}

} // namespace

int num_bins(const CqtConfig& config) {
  validate(config);
  double octaves = std::log2(config.f_max / config.f_min);
  return static_cast<int>(std::floor(config.bins_per_octave * octaves)) + 1;
}

double bin_frequency(const CqtConfig& config, int k) {
  if (k < 0 || k >= num_bins(config))
    throw std::out_of_range("CQT bin index out of range");
  return config.f_min *
         std::exp2(static_cast<double>(k) / config.bins_per_octave);
}

CqtAnalyzer::CqtAnalyzer(const CqtConfig& config, int sample_rate)
    : config_(config), sample_rate_(sample_rate) {
  validate(config);
  if (sample_rate < 1) throw std::invalid_argument("sample rate must be positive");
  if (!(config.f_max < sample_rate / 2.0))
    throw std::invalid_argument("CQT f_max must lie below the Nyquist frequency");

  const int n = num_bins(config);
  const double q = 1.0 / (std::exp2(1.0 / config.bins_per_octave) - 1.0);
  const auto [c0, c1] = window_coefficients(config.window);

  kernels_.resize(static_cast<size_t>(n));
  parallel_for(static_cast<size_t>(n), [&](size_t k) {
    const double freq = bin_frequency(config, static_cast<int>(k));
    const Index length = static_cast<Index>(
        std::ceil(q * sample_rate / freq));
    BinKernel& kernel = kernels_[k];
    kernel.length = length;
    kernel.cos_part.resize(length);
    kernel.sin_part.resize(length);
    const double omega = 2.0 * kPi * freq / sample_rate;
    double wsum = 0.0;
    for (Index i = 0; i < length; ++i) {
      const double w =
          length > 1 ? c0 - c1 * std::cos(2.0 * kPi * i / (length - 1)) : 1.0;
      wsum += w;
      kernel.cos_part[i] = w * std::cos(omega * static_cast<double>(i));
      kernel.sin_part[i] = w * std::sin(omega * static_cast<double>(i));
    }
    kernel.window_sum = wsum;
  });
}

double CqtAnalyzer::truncated_window_sum(const BinKernel& kernel, Index begin,
                                         Index end) const {
  const Index len = end - begin;
  if (len <= 0) return 0.0;
  if (kernel.length == 1) return static_cast<double>(len);
  // Dirichlet closed form of sum_{n=begin}^{end-1} cos(n h).
  const auto [c0, c1] = window_coefficients(config_.window);
  const double h = 2.0 * kPi / static_cast<double>(kernel.length - 1);
  const double cosine_sum = std::sin(0.5 * h * len) / std::sin(0.5 * h) *
                            std::cos(0.5 * h * static_cast<double>(begin + end - 1));
  return c0 * static_cast<double>(len) - c1 * cosine_sum;
}

Vector CqtAnalyzer::frame_raw(const AudioSignal& signal,
                              double center_time) const {
  if (signal.sample_rate != sample_rate_)
    throw std::invalid_argument("signal sample rate does not match analyzer");
  if (center_time < 0.0 || center_time > signal.duration())
    throw std::out_of_range("analysis time outside signal");

  const Index n_samples = signal.samples.size();
  const Index center = static_cast<Index>(std::llround(center_time * sample_rate_));

  Vector out(static_cast<Index>(kernels_.size()));
  for (size_t k = 0; k < kernels_.size(); ++k) {
    const BinKernel& kernel = kernels_[k];
    const Index start = center - (kernel.length - 1) / 2;
    const Index lo = std::max<Index>(0, start);
    const Index hi = std::min<Index>(n_samples, start + kernel.length);
    if (hi <= lo) {
      out[static_cast<Index>(k)] = 0.0;
      continue;
    }
    const Index local = lo - start;
    const Index len = hi - lo;
    const double re =
        signal.samples.segment(lo, len).dot(kernel.cos_part.segment(local, len));
    const double im =
        signal.samples.segment(lo, len).dot(kernel.sin_part.segment(local, len));
    const double wsum = (local == 0 && len == kernel.length)
                            ? kernel.window_sum
                            : truncated_window_sum(kernel, local, local + len);
    out[static_cast<Index>(k)] = wsum > 0.0 ? std::hypot(re, im) / wsum : 0.0;
  }
  return out;
}

CqtFrame CqtAnalyzer::frame(const AudioSignal& signal, double center_time) const {
  return normalize_frame(frame_raw(signal, center_time), center_time);
}

Spectrogram CqtAnalyzer::spectrogram(const AudioSignal& signal,
                                     std::span<const double> frame_times,
                                     std::string piece_id) const {
  if (frame_times.empty())
    throw std::invalid_argument("spectrogram requires at least one frame time");
  for (size_t i = 0; i < frame_times.size(); ++i) {
    if (i > 0 && !(frame_times[i] > frame_times[i - 1]))
      throw std::invalid_argument("frame times must be strictly increasing");
    if (frame_times[i] < 0.0 || frame_times[i] > signal.duration())
      throw std::out_of_range("frame time outside signal");
  }

  Spectrogram result;
  result.piece_id = std::move(piece_id);
  result.frames.resize(frame_times.size());
  parallel_for(frame_times.size(), [&](size_t i) {
    result.frames[i] = frame(signal, frame_times[i]);
  });
  return result;
}

Vector normalize_values(const Vector& raw, double silence_threshold) {
  const double peak = raw.size() > 0 ? raw.maxCoeff() : 0.0;
  if (!(peak >= silence_threshold)) return Vector::Zero(raw.size());
  return raw / peak;
}

CqtFrame normalize_frame(const Vector& raw, double center_time,
                         double silence_threshold) {
  return CqtFrame{normalize_values(raw, silence_threshold), center_time};
}

Vector cqt_frame_raw(const AudioSignal& signal, double center_time,
                     const CqtConfig& config) {
  return CqtAnalyzer(config, signal.sample_rate).frame_raw(signal, center_time);
}

Spectrogram beat_sync_spectrogram(const AudioSignal& signal,
                                  std::span<const double> frame_times,
                                  const CqtConfig& config,
                                  std::string piece_id) {
  return CqtAnalyzer(config, signal.sample_rate)
      .spectrogram(signal, frame_times, std::move(piece_id));
}

} // namespace tonalexp::dsp
