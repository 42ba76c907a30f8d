#ifndef TONALEXP_PROBETONE_PROBETONE_HPP
#define TONALEXP_PROBETONE_PROBETONE_HPP

#include <functional>
#include <string>
#include <vector>

#include "tonalexp/dsp/cqt.hpp"
#include "tonalexp/dsp/shepard.hpp"
#include "tonalexp/probetone/contexts.hpp"
#include "tonalexp/rnn/cell.hpp"

namespace tonalexp::probetone {

/// 12 values indexed by pitch class relative to the tonic.
struct ProbeToneProfile {
  enum class Kind { kl, fit, rating };
  Vector values;
  Kind kind = Kind::kl;
};

/// Produces the model expectation y* for a rendered stimulus. The key the
/// stimulus was rendered in is passed along so synthetic predictors used in
/// tests can respond to it; model-backed providers ignore it.
using ExpectationFn = std::function<Vector(const dsp::Spectrogram&, int key)>;

/// y* of a trained cell: the output at the final stimulus frame.
Vector model_expectation(const rnn::CellParams& params,
                         const dsp::Spectrogram& stimulus);

ExpectationFn expectation_of(const rnn::CellParams& params);

/// Renders stimuli and probes into the model's CQT bin space and evaluates
/// probe-tone fits. Probe frames are cached per pitch class.
class ProbeToneEvaluator {
 public:
  ProbeToneEvaluator(const dsp::ShepardConfig& shepard,
                     const dsp::CqtConfig& cqt, int sample_rate = 44100,
                     double probe_duration = 1.0);

  const dsp::CqtAnalyzer& analyzer() const { return analyzer_; }

  /// Transposes every event by `key`, synthesizes the chord sequence, and
  /// takes one normalized frame per event at its temporal midpoint.
  dsp::Spectrogram render_context(const TonalContext& context, int key) const;

  /// Normalized frame of a single probe tone, window centered mid-tone.
  const dsp::CqtFrame& probe_frame(int pitch_class) const;

  /// KL(probe distribution || y* distribution) for all 12 probes.
  Vector probe_fit_vector(const ExpectationFn& expectation,
                          const TonalContext& context, int key) const;

  /// Renders the context in all 12 keys, rotates each KL vector so index 0
  /// is that key's tonic, and averages.
  ProbeToneProfile aggregate_context(const ExpectationFn& expectation,
                                     const TonalContext& context) const;

 private:
  dsp::ShepardConfig shepard_;
  dsp::CqtAnalyzer analyzer_;
  std::vector<dsp::CqtFrame> probes_;
};

/// Min-max normalized goodness of fit: low KL maps to 1, high KL to 0.
/// A constant profile maps to all 0.5.
ProbeToneProfile fit_scores(const ProbeToneProfile& kl_profile);

struct ContextResult {
  std::string context;
  ModeGroup group = ModeGroup::major;
  ProbeToneProfile kl_profile;   // tonic-aligned, key-averaged
  ProbeToneProfile fit_profile;  // fit_scores of the above
};

/// Mean of the fit profiles of the contexts in one mode group.
ProbeToneProfile mode_aggregate(const std::vector<ContextResult>& results,
                                ModeGroup group);

struct ProbeToneResult {
  std::vector<ContextResult> contexts;
  ProbeToneProfile major_aggregate;
  ProbeToneProfile minor_aggregate;
  double r_major = 0.0;
  double r_minor = 0.0;
};

/// The full simulated experiment for one model: every context aggregated
/// over keys, mode-level aggregates, and their correlations against the
/// reference rating profiles.
ProbeToneResult run_probe_experiment(const ProbeToneEvaluator& evaluator,
                                     const ExpectationFn& expectation,
                                     const ContextLibrary& library,
                                     const KKReference& reference);

/// Correlations only; a convenience over run_probe_experiment.
std::pair<double, double> kk_correlations(const ProbeToneEvaluator& evaluator,
                                          const ExpectationFn& expectation,
                                          const ContextLibrary& library,
                                          const KKReference& reference);

} // namespace tonalexp::probetone

#endif
