#include "tonalexp/corpus/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "tonalexp/dsp/wav.hpp"

namespace tonalexp::corpus {

BeatGrid load_beat_annotations(const std::filesystem::path& path,
                               int subdivision) {
  if (subdivision < 1)
    throw std::invalid_argument("subdivision must be positive");
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open beat annotations: " + path.string());

  BeatGrid grid;
  grid.subdivision = subdivision;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::istringstream tokens(line);
    std::string first;
    if (!(tokens >> first)) continue;  // blank line

    double time;
    try {
      size_t used = 0;
      time = std::stod(first, &used);
      if (used != first.size()) throw std::invalid_argument(first);
    } catch (const std::exception&) {
      throw std::runtime_error(path.string() + ":" +
                               std::to_string(line_number) +
                               ": cannot parse beat time '" + first + "'");
    }
    if (!grid.beat_times.empty() && !(time > grid.beat_times.back()))
      throw std::runtime_error(path.string() + ":" +
                               std::to_string(line_number) +
                               ": beat times must be strictly increasing");
    grid.beat_times.push_back(time);
  }
  if (grid.beat_times.size() < 2)
    throw std::runtime_error(path.string() + ": need at least 2 beats");
  return grid;
}

std::vector<double> subdivide_beats(const BeatGrid& grid) {
  if (grid.beat_times.size() < 2)
    throw std::invalid_argument("beat grid needs at least 2 beats");
  if (grid.subdivision < 1)
    throw std::invalid_argument("subdivision must be positive");

  std::vector<double> times;
  times.reserve((grid.beat_times.size() - 1) * grid.subdivision + 1);
  for (size_t j = 0; j + 1 < grid.beat_times.size(); ++j) {
    const double b0 = grid.beat_times[j];
    const double span = grid.beat_times[j + 1] - b0;
    for (int i = 0; i < grid.subdivision; ++i)
      times.push_back(b0 + span * i / grid.subdivision);
  }
  times.push_back(grid.beat_times.back());
  return times;
}

Piece ingest_piece(const std::filesystem::path& audio_path,
                   const std::filesystem::path& beats_path,
                   const dsp::CqtAnalyzer& analyzer, int subdivision) {
  const auto signal = dsp::read_wav(audio_path);
  if (signal.sample_rate != analyzer.sample_rate())
    throw std::runtime_error(audio_path.string() + ": sample rate " +
                             std::to_string(signal.sample_rate) +
                             " does not match analyzer rate " +
                             std::to_string(analyzer.sample_rate()));
  const BeatGrid grid = load_beat_annotations(beats_path, subdivision);
  auto times = subdivide_beats(grid);
  // Annotations may place the final beat a rounding step past the audio end;
  // genuinely out-of-range times are left for the spectrogram to reject.
  if (times.back() > signal.duration() &&
      times.back() - signal.duration() <= 1.0 / signal.sample_rate)
    times.back() = signal.duration();

  Piece piece;
  piece.piece_id = audio_path.stem().string();
  piece.source = audio_path.string();
  piece.spectrogram = analyzer.spectrogram(signal, times, piece.piece_id);
  return piece;
}

Piece ingest_piece(const std::filesystem::path& audio_path,
                   const std::filesystem::path& beats_path,
                   const dsp::CqtConfig& config, int subdivision) {
  const auto signal = dsp::read_wav(audio_path);
  dsp::CqtAnalyzer analyzer(config, signal.sample_rate);
  return ingest_piece(audio_path, beats_path, analyzer, subdivision);
}

Piece piecewise_shuffle(Piece piece, uint64_t seed) {
  std::vector<double> times;
  times.reserve(piece.spectrogram.frames.size());
  for (const auto& f : piece.spectrogram.frames) times.push_back(f.center_time);

  std::mt19937_64 rng(seed);
  std::shuffle(piece.spectrogram.frames.begin(), piece.spectrogram.frames.end(),
               rng);
  for (size_t i = 0; i < times.size(); ++i)
    piece.spectrogram.frames[i].center_time = times[i];

  piece.shuffled = true;
  piece.shuffle_seed = seed;
  return piece;
}

std::vector<FoldSplit> make_folds(std::vector<std::string> piece_ids,
                                  int n_folds, double train_fraction,
                                  uint64_t seed) {
  if (n_folds < 1) throw std::invalid_argument("need at least one fold");
  if (static_cast<int>(piece_ids.size()) < n_folds)
    throw std::invalid_argument("fewer pieces than folds");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("train_fraction must lie in (0, 1)");

  std::mt19937_64 rng(seed);
  std::shuffle(piece_ids.begin(), piece_ids.end(), rng);

  const size_t n = piece_ids.size();
  const size_t base = n / static_cast<size_t>(n_folds);
  const size_t extra = n % static_cast<size_t>(n_folds);

  std::vector<FoldSplit> folds;
  size_t offset = 0;
  for (int f = 0; f < n_folds; ++f) {
    const size_t size = base + (static_cast<size_t>(f) < extra ? 1 : 0);
    if (size < 2)
      throw std::invalid_argument(
          "fold groups need at least 2 pieces for a train/test split");
    std::vector<std::string> group(piece_ids.begin() + offset,
                                   piece_ids.begin() + offset + size);
    offset += size;

    size_t n_train = static_cast<size_t>(std::lround(train_fraction * size));
    n_train = std::clamp<size_t>(n_train, 1, size - 1);

    FoldSplit split;
    split.fold_index = f;
    split.train_ids.assign(group.begin(), group.begin() + n_train);
    split.test_ids.assign(group.begin() + n_train, group.end());
    folds.push_back(std::move(split));
  }
  return folds;
}

Batch sample_batch(std::span<const Piece> train_pieces, int batch_size,
                   int seq_len, std::mt19937_64& rng) {
  if (batch_size < 1 || seq_len < 1)
    throw std::invalid_argument("batch_size and seq_len must be positive");

  std::vector<int> eligible;
  for (size_t i = 0; i < train_pieces.size(); ++i)
    if (train_pieces[i].frames() > seq_len) eligible.push_back(static_cast<int>(i));
  if (eligible.empty())
    throw std::runtime_error("no piece has more than seq_len frames");

  const Index bins = train_pieces[static_cast<size_t>(eligible.front())]
                         .spectrogram.frames.front()
                         .values.size();

  Batch batch;
  batch.batch_size = batch_size;
  batch.seq_len = seq_len;
  batch.inputs.assign(static_cast<size_t>(seq_len), Matrix(bins, batch_size));
  batch.targets.assign(static_cast<size_t>(seq_len), Matrix(bins, batch_size));
  batch.piece_index.resize(static_cast<size_t>(batch_size));
  batch.start.resize(static_cast<size_t>(batch_size));

  std::uniform_int_distribution<size_t> pick_piece(0, eligible.size() - 1);
  for (int s = 0; s < batch_size; ++s) {
    const int p = eligible[pick_piece(rng)];
    const Piece& piece = train_pieces[static_cast<size_t>(p)];
    std::uniform_int_distribution<Index> pick_start(0, piece.frames() - seq_len - 1);
    const Index start = pick_start(rng);
    batch.piece_index[static_cast<size_t>(s)] = p;
    batch.start[static_cast<size_t>(s)] = start;
    for (int t = 0; t < seq_len; ++t) {
      batch.inputs[static_cast<size_t>(t)].col(s) =
          piece.spectrogram.frames[static_cast<size_t>(start + t)].values;
      batch.targets[static_cast<size_t>(t)].col(s) =
          piece.spectrogram.frames[static_cast<size_t>(start + t + 1)].values;
    }
  }
  return batch;
}

int epoch_batches(std::span<const Piece> train_pieces, int batch_size,
                  int seq_len) {
  if (train_pieces.empty())
    throw std::invalid_argument("empty training set");
  Index total = 0;
  for (const Piece& p : train_pieces) total += p.frames();
  const Index per_batch = static_cast<Index>(batch_size) * seq_len;
  return static_cast<int>((total + per_batch - 1) / per_batch);
}

} // namespace tonalexp::corpus
