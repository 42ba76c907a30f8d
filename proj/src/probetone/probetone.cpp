#include "tonalexp/probetone/probetone.hpp"

#include <cmath>
#include <stdexcept>

#include "tonalexp/probetone/stats.hpp"

namespace tonalexp::probetone {

Vector model_expectation(const rnn::CellParams& params,
                         const dsp::Spectrogram& stimulus) {
  if (stimulus.frames.empty())
    throw std::invalid_argument("empty stimulus spectrogram");
  return rnn::forward(params, stimulus).predictions.back();
}

ExpectationFn expectation_of(const rnn::CellParams& params) {
  return [&params](const dsp::Spectrogram& stimulus, int) {
    return model_expectation(params, stimulus);
  };
}

ProbeToneEvaluator::ProbeToneEvaluator(const dsp::ShepardConfig& shepard,
                                       const dsp::CqtConfig& cqt,
                                       int sample_rate, double probe_duration)
    : shepard_(shepard), analyzer_(cqt, sample_rate) {
  probes_.reserve(12);
  for (int pc = 0; pc < 12; ++pc) {
    const auto tone = dsp::shepard_tone(pc, probe_duration, sample_rate, shepard_);
    probes_.push_back(analyzer_.frame(tone, probe_duration / 2.0));
  }
}

dsp::Spectrogram ProbeToneEvaluator::render_context(const TonalContext& context,
                                                    int key) const {
  if (context.events.empty())
    throw std::invalid_argument("context has no events");
  if (key < 0 || key > 11) throw std::out_of_range("key must be in 0..11");

  const int rate = analyzer_.sample_rate();
  std::vector<dsp::AudioSignal> chords;
  chords.reserve(context.events.size());
  Index total = 0;
  for (const ContextEvent& event : context.events) {
    std::set<int> transposed;
    for (int pc : event.pitch_classes) transposed.insert((pc + key) % 12);
    chords.push_back(dsp::shepard_chord(transposed, event.duration, rate, shepard_));
    total += chords.back().samples.size();
  }

  dsp::AudioSignal audio;
  audio.sample_rate = rate;
  audio.samples.resize(total);
  std::vector<double> frame_times;
  Index cursor = 0;
  for (const dsp::AudioSignal& chord : chords) {
    audio.samples.segment(cursor, chord.samples.size()) = chord.samples;
    frame_times.push_back(
        (static_cast<double>(cursor) + chord.samples.size() / 2.0) / rate);
    cursor += chord.samples.size();
  }

  return analyzer_.spectrogram(audio, frame_times,
                               context.name + "@" + std::to_string(key));
}

const dsp::CqtFrame& ProbeToneEvaluator::probe_frame(int pitch_class) const {
  if (pitch_class < 0 || pitch_class > 11)
    throw std::out_of_range("pitch class must be in 0..11");
  return probes_[static_cast<size_t>(pitch_class)];
}

Vector ProbeToneEvaluator::probe_fit_vector(const ExpectationFn& expectation,
                                            const TonalContext& context,
                                            int key) const {
  const dsp::Spectrogram stimulus = render_context(context, key);
  const Vector prediction = to_distribution(expectation(stimulus, key));

  Vector kl(12);
  for (int tau = 0; tau < 12; ++tau)
    kl[tau] = kl_divergence(to_distribution(probe_frame(tau).values), prediction);
  return kl;
}

ProbeToneProfile ProbeToneEvaluator::aggregate_context(
    const ExpectationFn& expectation, const TonalContext& context) const {
  Vector mean = Vector::Zero(12);
  for (int key = 0; key < 12; ++key) {
    const Vector kl = probe_fit_vector(expectation, context, key);
    // index i of the aligned profile is scale degree i above the tonic `key`
    for (int i = 0; i < 12; ++i) mean[i] += kl[(i + key) % 12];
  }
  return ProbeToneProfile{mean / 12.0, ProbeToneProfile::Kind::kl};
}

ProbeToneProfile fit_scores(const ProbeToneProfile& kl_profile) {
  if (kl_profile.kind != ProbeToneProfile::Kind::kl)
    throw std::invalid_argument("fit_scores expects a KL profile");
  const double lo = kl_profile.values.minCoeff();
  const double hi = kl_profile.values.maxCoeff();
  ProbeToneProfile fit;
  fit.kind = ProbeToneProfile::Kind::fit;
  if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi)))
    fit.values = Vector::Constant(12, 0.5);
  else
    fit.values = (hi - kl_profile.values.array()) / (hi - lo);
  return fit;
}

ProbeToneProfile mode_aggregate(const std::vector<ContextResult>& results,
                                ModeGroup group) {
  Vector mean = Vector::Zero(12);
  int count = 0;
  for (const ContextResult& r : results) {
    if (r.group != group) continue;
    mean += r.fit_profile.values;
    ++count;
  }
  if (count == 0)
    throw std::invalid_argument("no contexts in the requested mode group");
  return ProbeToneProfile{mean / count, ProbeToneProfile::Kind::fit};
}

ProbeToneResult run_probe_experiment(const ProbeToneEvaluator& evaluator,
                                     const ExpectationFn& expectation,
                                     const ContextLibrary& library,
                                     const KKReference& reference) {
  ProbeToneResult result;
  for (const TonalContext& context : library.contexts) {
    ContextResult cr;
    cr.context = context.name;
    cr.group = context.group();
    cr.kl_profile = evaluator.aggregate_context(expectation, context);
    cr.fit_profile = fit_scores(cr.kl_profile);
    result.contexts.push_back(std::move(cr));
  }
  result.major_aggregate = mode_aggregate(result.contexts, ModeGroup::major);
  result.minor_aggregate = mode_aggregate(result.contexts, ModeGroup::minor);
  result.r_major = pearson(result.major_aggregate.values, reference.major);
  result.r_minor = pearson(result.minor_aggregate.values, reference.minor);
  return result;
}

std::pair<double, double> kk_correlations(const ProbeToneEvaluator& evaluator,
                                          const ExpectationFn& expectation,
                                          const ContextLibrary& library,
                                          const KKReference& reference) {
  const ProbeToneResult result =
      run_probe_experiment(evaluator, expectation, library, reference);
  return {result.r_major, result.r_minor};
}

} // namespace tonalexp::probetone
