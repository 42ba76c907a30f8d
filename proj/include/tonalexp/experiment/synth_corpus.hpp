#ifndef TONALEXP_EXPERIMENT_SYNTH_CORPUS_HPP
#define TONALEXP_EXPERIMENT_SYNTH_CORPUS_HPP

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "tonalexp/dsp/shepard.hpp"
#include "tonalexp/experiment/storage.hpp"

namespace tonalexp::experiment {

/// One synthetic piece: a functional-harmony walk in a fixed key rendered
/// as Shepard chords, with occasional stepwise scale runs.
struct SynthPieceSpec {
  std::string id;
  int key = 0;          // tonic pitch class
  bool minor = false;   // harmonic minor when set
  int events = 215;     // chords/tones, one per beat
  uint64_t seed = 0;
};

struct CorpusRecipe {
  int sample_rate = 44100;
  int subdivision = 2;           // frames per beat at ingestion
  double event_duration = 0.25;  // seconds per event
  std::vector<SynthPieceSpec> pieces;
};

/// Pieces for every key in both modes, `pieces_per_mode` of each, with
/// per-piece seeds derived from `seed`.
CorpusRecipe default_recipe(int pieces_per_mode, int events_per_piece,
                            uint64_t seed);

CorpusRecipe load_recipe(const std::filesystem::path& path);
void save_recipe(const std::filesystem::path& path, const CorpusRecipe& recipe);

/// The harmonic walk itself: absolute pitch-class sets, one per event.
/// Chord degrees follow a first-order progression grammar rooted on the
/// tonic; runs walk the diatonic scale stepwise.
std::vector<std::set<int>> tonal_event_sequence(int key, bool minor, int events,
                                                uint64_t seed);

/// Renders an event sequence as concatenated Shepard chords.
dsp::AudioSignal render_event_sequence(const std::vector<std::set<int>>& events,
                                       double event_duration, int sample_rate,
                                       const dsp::ShepardConfig& shepard);

/// Writes WAV + beat annotations per piece plus a corpus manifest
/// (corpus.csv) into out_dir. Returns the manifest path. Deterministic for
/// a fixed recipe.
std::filesystem::path synth_corpus(const CorpusRecipe& recipe,
                                   const dsp::ShepardConfig& shepard,
                                   const std::filesystem::path& out_dir);

} // namespace tonalexp::experiment

#endif
