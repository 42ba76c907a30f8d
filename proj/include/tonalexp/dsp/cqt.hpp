#ifndef TONALEXP_DSP_CQT_HPP
#define TONALEXP_DSP_CQT_HPP

#include <span>
#include <string>
#include <vector>

#include "tonalexp/dsp/signal.hpp"
#include "tonalexp/types.hpp"

namespace tonalexp::dsp {

enum class WindowKind { hann, hamming };

/// Constant-Q analysis parameters. The defaults span 27.5 Hz .. 16744.04 Hz
/// at 36 bins per octave, which yields 334 bins.
struct CqtConfig {
  double f_min = 27.5;
  double f_max = 16744.04;
  int bins_per_octave = 36;
  WindowKind window = WindowKind::hann;
};

/// Number of analysis bins: floor(B * log2(f_max / f_min)) + 1.
int num_bins(const CqtConfig& config);

/// Center frequency of bin k: f_min * 2^(k / B). Throws if k is out of range.
double bin_frequency(const CqtConfig& config, int k);

/// One normalized constant-Q slice. Values lie in [0, 1]; the maximum is
/// exactly 1 unless the slice is all-zero silence.
struct CqtFrame {
  Vector values;
  double center_time = 0.0;
};

/// Time-ordered sequence of frames for one piece.
struct Spectrogram {
  std::string piece_id;
  std::vector<CqtFrame> frames;

  Index size() const { return static_cast<Index>(frames.size()); }
};

/// Precomputed per-bin analysis kernels for one (config, sample rate) pair.
///
/// Bin k is evaluated as the magnitude of the windowed complex inner product
/// of the signal against a sinusoid at bin_frequency(k). The window has
/// length ceil(Q * sample_rate / f_k) with Q = 1 / (2^(1/B) - 1) and is
/// centered on the requested analysis time; at the signal edges it is
/// truncated. The magnitude is divided by the sum of the window coefficients
/// actually used, so a unit-amplitude sinusoid at f_k reads close to 0.5.
class CqtAnalyzer {
 public:
  CqtAnalyzer(const CqtConfig& config, int sample_rate);

  const CqtConfig& config() const { return config_; }
  int sample_rate() const { return sample_rate_; }
  int bins() const { return static_cast<int>(kernels_.size()); }

  /// Raw (unnormalized) magnitudes at one analysis time.
  /// Throws if center_time lies outside the signal.
  Vector frame_raw(const AudioSignal& signal, double center_time) const;

  /// Raw frame divided by its maximum (see normalize_frame).
  CqtFrame frame(const AudioSignal& signal, double center_time) const;

  /// One normalized frame per requested time. Frame times must be strictly
  /// increasing and inside the signal. Frames are computed in parallel.
  Spectrogram spectrogram(const AudioSignal& signal,
                          std::span<const double> frame_times,
                          std::string piece_id) const;

 private:
  struct BinKernel {
    Index length = 0;
    Vector cos_part;  // window * cos(omega n)
    Vector sin_part;  // window * sin(omega n)
    double window_sum = 0.0;
  };

  double truncated_window_sum(const BinKernel& kernel, Index begin,
                              Index end) const;

  CqtConfig config_;
  int sample_rate_ = 0;
  std::vector<BinKernel> kernels_;
};

/// Divides a nonnegative slice by its maximum. Slices whose maximum falls
/// below `silence_threshold` are mapped to all zeros.
Vector normalize_values(const Vector& raw, double silence_threshold = 1e-8);

CqtFrame normalize_frame(const Vector& raw, double center_time = 0.0,
                         double silence_threshold = 1e-8);

/// One-shot helpers; loops should construct a CqtAnalyzer instead.
Vector cqt_frame_raw(const AudioSignal& signal, double center_time,
                     const CqtConfig& config);

Spectrogram beat_sync_spectrogram(const AudioSignal& signal,
                                  std::span<const double> frame_times,
                                  const CqtConfig& config,
                                  std::string piece_id = {});

} // namespace tonalexp::dsp

#endif
