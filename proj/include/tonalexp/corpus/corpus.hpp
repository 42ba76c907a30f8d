#ifndef TONALEXP_CORPUS_CORPUS_HPP
#define TONALEXP_CORPUS_CORPUS_HPP

#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tonalexp/dsp/cqt.hpp"
#include "tonalexp/types.hpp"

namespace tonalexp::corpus {

/// Annotated beat times plus the per-beat frame subdivision.
struct BeatGrid {
  std::vector<double> beat_times;
  int subdivision = 4;
};

/// One ingested piece: its spectrogram plus provenance.
struct Piece {
  std::string piece_id;
  dsp::Spectrogram spectrogram;
  std::string source;
  bool shuffled = false;
  std::optional<uint64_t> shuffle_seed;

  Index frames() const { return spectrogram.size(); }
};

/// Train/test piece ids for one fold. Folds partition the corpus into
/// disjoint groups; the split is taken inside each group.
struct FoldSplit {
  int fold_index = 0;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

/// A training batch of fixed-length windows. inputs[t] and targets[t] are
/// bins x batch_size matrices; targets are the inputs advanced one frame.
struct Batch {
  int batch_size = 0;
  int seq_len = 0;
  std::vector<Matrix> inputs;
  std::vector<Matrix> targets;
  // provenance of each slot, for alignment checks
  std::vector<int> piece_index;
  std::vector<Index> start;
};

/// Parses a beat annotation file: one beat per line, first whitespace token
/// is the time in seconds, anything after it is ignored. Blank lines are
/// skipped. Throws with the offending line number on parse errors and on
/// non-increasing times.
BeatGrid load_beat_annotations(const std::filesystem::path& path,
                               int subdivision = 4);

/// Frame times for a grid: each inter-beat interval divided into
/// `subdivision` equal parts, frame times at subinterval starts, plus the
/// final beat time.
std::vector<double> subdivide_beats(const BeatGrid& grid);

/// Audio + beats -> beat-synchronous spectrogram. The piece id is the audio
/// file stem.
Piece ingest_piece(const std::filesystem::path& audio_path,
                   const std::filesystem::path& beats_path,
                   const dsp::CqtConfig& config, int subdivision);

/// Same, with a prebuilt analyzer (reuses its kernels across pieces).
Piece ingest_piece(const std::filesystem::path& audio_path,
                   const std::filesystem::path& beats_path,
                   const dsp::CqtAnalyzer& analyzer, int subdivision);

/// Permutes the frame contents of a piece with a seeded uniform shuffle.
/// Center times keep their original increasing order; only the value
/// vectors move, so the frame multiset is preserved exactly.
Piece piecewise_shuffle(Piece piece, uint64_t seed);

/// Partitions piece ids into n_folds near-equal disjoint groups and splits
/// each group train/test at train_fraction. Every group keeps at least one
/// train and one test piece.
std::vector<FoldSplit> make_folds(std::vector<std::string> piece_ids,
                                  int n_folds, double train_fraction,
                                  uint64_t seed);

/// Draws batch_size windows of seq_len+1 consecutive frames, uniformly over
/// eligible pieces (those with more than seq_len frames) and start offsets.
Batch sample_batch(std::span<const Piece> train_pieces, int batch_size,
                   int seq_len, std::mt19937_64& rng);

/// ceil(total training frames / (batch_size * seq_len)): the number of
/// batches after which the model has seen roughly one fold's worth of steps.
int epoch_batches(std::span<const Piece> train_pieces, int batch_size,
                  int seq_len);

} // namespace tonalexp::corpus

#endif
