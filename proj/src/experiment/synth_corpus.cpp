#include "tonalexp/experiment/synth_corpus.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "json.hpp"
#include "tonalexp/dsp/wav.hpp"

namespace tonalexp::experiment {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct Chord {
  std::array<int, 4> pcs;
  int size;
};

// Diatonic chords on the eight harmonic states used by the progression
// grammar: I ii iii IV V V7 vi vii (minor: i iio III iv V V7 VI vii, with
// the dominant borrowed major).
constexpr std::array<Chord, 8> kMajorChords{{{{0, 4, 7, 0}, 3},
                                             {{2, 5, 9, 0}, 3},
                                             {{4, 7, 11, 0}, 3},
                                             {{5, 9, 0, 0}, 3},
                                             {{7, 11, 2, 0}, 3},
                                             {{7, 11, 2, 5}, 4},
                                             {{9, 0, 4, 0}, 3},
                                             {{11, 2, 5, 0}, 3}}};

constexpr std::array<Chord, 8> kMinorChords{{{{0, 3, 7, 0}, 3},
                                             {{2, 5, 8, 0}, 3},
                                             {{3, 7, 10, 0}, 3},
                                             {{5, 8, 0, 0}, 3},
                                             {{7, 11, 2, 0}, 3},
                                             {{7, 11, 2, 5}, 4},
                                             {{8, 0, 3, 0}, 3},
                                             {{11, 2, 5, 0}, 3}}};

// Row-stochastic progression weights, tonic-heavy with functional motion.
constexpr double kProgression[8][8] = {
    // to:  I    ii   iii  IV   V    V7   vi   vii
    {0.15, 0.13, 0.03, 0.22, 0.22, 0.05, 0.15, 0.05},  // from I
    {0.10, 0.05, 0.00, 0.05, 0.45, 0.20, 0.10, 0.05},  // from ii
    {0.20, 0.15, 0.00, 0.25, 0.00, 0.00, 0.40, 0.00},  // from iii
    {0.25, 0.15, 0.00, 0.10, 0.30, 0.15, 0.05, 0.00},  // from IV
    {0.55, 0.00, 0.00, 0.10, 0.10, 0.05, 0.20, 0.00},  // from V
    {0.70, 0.00, 0.00, 0.05, 0.05, 0.00, 0.20, 0.00},  // from V7
    {0.20, 0.25, 0.10, 0.25, 0.20, 0.00, 0.00, 0.00},  // from vi
    {0.60, 0.00, 0.10, 0.00, 0.15, 0.00, 0.15, 0.00},  // from vii
};

constexpr std::array<int, 7> kMajorScale{0, 2, 4, 5, 7, 9, 11};
constexpr std::array<int, 7> kMinorScale{0, 2, 3, 5, 7, 8, 11};

int pick_weighted(const double* weights, int n, double u) {
  double cum = 0.0;
  for (int i = 0; i < n; ++i) {
    cum += weights[i];
    if (u < cum) return i;
  }
  return n - 1;
}

} // namespace

std::vector<std::set<int>> tonal_event_sequence(int key, bool minor, int events,
                                                uint64_t seed) {
  if (key < 0 || key > 11) throw std::out_of_range("key must be in 0..11");
  if (events < 1) throw std::invalid_argument("need at least one event");

  const auto& chords = minor ? kMinorChords : kMajorChords;
  const auto& scale = minor ? kMinorScale : kMajorScale;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<std::set<int>> sequence;
  sequence.reserve(static_cast<size_t>(events));

  int state = 0;  // start on the tonic
  int run_left = 0, run_degree = 0, run_direction = 1;

  auto emit_chord = [&](int chord) {
    std::set<int> pcs;
    for (int i = 0; i < chords[static_cast<size_t>(chord)].size; ++i)
      pcs.insert((chords[static_cast<size_t>(chord)].pcs[static_cast<size_t>(i)] +
                  key) % 12);
    sequence.push_back(std::move(pcs));
  };

  emit_chord(state);
  while (static_cast<int>(sequence.size()) < events) {
    if (run_left > 0) {
      // stepwise melodic run over the scale
      sequence.push_back({(scale[static_cast<size_t>(run_degree)] + key) % 12});
      run_degree = (run_degree + run_direction + 7) % 7;
      --run_left;
      continue;
    }
    if (unit(rng) < 0.12) {
      run_left = 4 + static_cast<int>(unit(rng) * 5.0);  // 4..8 tones
      run_degree = static_cast<int>(unit(rng) * 7.0) % 7;
      run_direction = unit(rng) < 0.5 ? 1 : -1;
      continue;
    }
    state = pick_weighted(kProgression[state], 8, unit(rng));
    emit_chord(state);
  }
  sequence.resize(static_cast<size_t>(events));
  return sequence;
}

dsp::AudioSignal render_event_sequence(const std::vector<std::set<int>>& events,
                                       double event_duration, int sample_rate,
                                       const dsp::ShepardConfig& shepard) {
  if (events.empty()) throw std::invalid_argument("no events to render");
  const Index event_len =
      static_cast<Index>(std::llround(event_duration * sample_rate));

  dsp::AudioSignal audio;
  audio.sample_rate = sample_rate;
  audio.samples.resize(event_len * static_cast<Index>(events.size()));
  for (size_t i = 0; i < events.size(); ++i) {
    const auto chord =
        dsp::shepard_chord(events[i], event_duration, sample_rate, shepard);
    audio.samples.segment(static_cast<Index>(i) * event_len, event_len) =
        chord.samples;
  }
  return audio;
}

CorpusRecipe default_recipe(int pieces_per_mode, int events_per_piece,
                            uint64_t seed) {
  if (pieces_per_mode < 1 || events_per_piece < 1)
    throw std::invalid_argument("recipe sizes must be positive");
  CorpusRecipe recipe;
  uint64_t state = seed;
  for (int minor = 0; minor < 2; ++minor) {
    for (int key = 0; key < 12; ++key) {
      for (int i = 0; i < pieces_per_mode; ++i) {
        SynthPieceSpec piece;
        piece.id = std::string(minor ? "min" : "maj") + "_k" +
                   (key < 10 ? "0" : "") + std::to_string(key) + "_p" +
                   std::to_string(i);
        piece.key = key;
        piece.minor = minor == 1;
        piece.events = events_per_piece;
        piece.seed = splitmix64(state);
        recipe.pieces.push_back(std::move(piece));
      }
    }
  }
  return recipe;
}

void save_recipe(const fs::path& path, const CorpusRecipe& recipe) {
  json j;
  j["sample_rate"] = recipe.sample_rate;
  j["subdivision"] = recipe.subdivision;
  j["event_duration"] = recipe.event_duration;
  j["pieces"] = json::array();
  for (const SynthPieceSpec& piece : recipe.pieces)
    j["pieces"].push_back({{"id", piece.id},
                           {"key", piece.key},
                           {"minor", piece.minor},
                           {"events", piece.events},
                           {"seed", piece.seed}});
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write recipe: " + path.string());
  out << j.dump(2) << "\n";
}

CorpusRecipe load_recipe(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open recipe: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }

  CorpusRecipe recipe;
  recipe.sample_rate = j.value("sample_rate", 44100);
  recipe.subdivision = j.value("subdivision", 2);
  recipe.event_duration = j.value("event_duration", 0.25);
  for (const auto& p : j.at("pieces")) {
    SynthPieceSpec piece;
    piece.id = p.at("id").get<std::string>();
    piece.key = p.at("key").get<int>();
    piece.minor = p.at("minor").get<bool>();
    piece.events = p.at("events").get<int>();
    piece.seed = p.at("seed").get<uint64_t>();
    recipe.pieces.push_back(std::move(piece));
  }
  if (recipe.pieces.empty())
    throw std::runtime_error(path.string() + ": recipe has no pieces");
  return recipe;
}

fs::path synth_corpus(const CorpusRecipe& recipe,
                      const dsp::ShepardConfig& shepard,
                      const fs::path& out_dir) {
  fs::create_directories(out_dir);

  std::vector<CorpusEntry> entries;
  for (const SynthPieceSpec& piece : recipe.pieces) {
    const auto events =
        tonal_event_sequence(piece.key, piece.minor, piece.events, piece.seed);
    const auto audio = render_event_sequence(events, recipe.event_duration,
                                             recipe.sample_rate, shepard);
    const fs::path wav_path = out_dir / (piece.id + ".wav");
    dsp::write_wav(wav_path, audio);

    // one beat per event boundary, inclusive of the final edge
    const Index event_len = audio.samples.size() / static_cast<Index>(events.size());
    const fs::path beats_path = out_dir / (piece.id + ".beats");
    std::ofstream beats(beats_path, std::ios::trunc | std::ios::binary);
    if (!beats)
      throw std::runtime_error("cannot write beats: " + beats_path.string());
    char buffer[64];
    for (size_t b = 0; b <= events.size(); ++b) {
      const double t = static_cast<double>(static_cast<Index>(b) * event_len) /
                       recipe.sample_rate;
      std::snprintf(buffer, sizeof(buffer), "%.8f\n", t);
      beats << buffer;
    }

    entries.push_back(CorpusEntry{piece.id, piece.id + ".wav",
                                  piece.id + ".beats", recipe.subdivision});
  }

  const fs::path manifest = out_dir / "corpus.csv";
  save_corpus_manifest(manifest, entries);
  return manifest;
}

} // namespace tonalexp::experiment
