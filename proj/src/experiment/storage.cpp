#include "tonalexp/experiment/storage.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "tonalexp/dsp/wav.hpp"
#include "tonalexp/experiment/csv.hpp"

namespace tonalexp::experiment {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

} // namespace

std::vector<CorpusEntry> load_corpus_manifest(const fs::path& manifest_path,
                                              std::optional<fs::path> root) {
  std::ifstream in(manifest_path);
  if (!in)
    throw std::runtime_error("cannot open corpus manifest: " +
                             manifest_path.string());

  fs::path base;
  if (root) {
    base = *root;
  } else if (const char* env = std::getenv("TONALEXP_CORPUS_ROOT")) {
    base = env;
  } else {
    base = manifest_path.parent_path();
  }

  std::vector<CorpusEntry> entries;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty() || line == "\r") continue;
    const auto fields = parse_csv_line(line);
    if (line_number == 1 && !fields.empty() && fields[0] == "id") continue;
    if (fields.size() != 4)
      throw std::runtime_error(manifest_path.string() + ":" +
                               std::to_string(line_number) +
                               ": expected id,audio,beats,subdivision");
    CorpusEntry entry;
    entry.id = fields[0];
    entry.audio = fs::path(fields[1]).is_absolute() ? fs::path(fields[1])
                                                    : base / fields[1];
    entry.beats = fs::path(fields[2]).is_absolute() ? fs::path(fields[2])
                                                    : base / fields[2];
    try {
      entry.subdivision = std::stoi(fields[3]);
    } catch (const std::exception&) {
      throw std::runtime_error(manifest_path.string() + ":" +
                               std::to_string(line_number) +
                               ": bad subdivision '" + fields[3] + "'");
    }
    entries.push_back(std::move(entry));
  }
  if (entries.empty())
    throw std::runtime_error(manifest_path.string() + ": no corpus entries");
  return entries;
}

void save_corpus_manifest(const fs::path& manifest_path,
                          const std::vector<CorpusEntry>& entries) {
  std::ofstream out(manifest_path, std::ios::trunc | std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write corpus manifest: " +
                             manifest_path.string());
  csv_row(out, {"id", "audio", "beats", "subdivision"});
  for (const CorpusEntry& entry : entries)
    csv_row(out, {entry.id, entry.audio.string(), entry.beats.string(),
                  std::to_string(entry.subdivision)});
}

namespace {
constexpr const char* kSpectroMagic = "tonalexp-spectrogram";

std::string window_token(dsp::WindowKind kind) {
  return kind == dsp::WindowKind::hann ? "hann" : "hamming";
}
} // namespace

void save_spectrogram(const fs::path& path, const dsp::Spectrogram& spectrogram,
                      const dsp::CqtConfig& config) {
  if (spectrogram.frames.empty())
    throw std::invalid_argument("refusing to store an empty spectrogram");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw std::runtime_error("cannot write spectrogram: " + path.string());

  const Index bins = spectrogram.frames.front().values.size();
  out << kSpectroMagic << " 1\n";
  out << "piece " << spectrogram.piece_id << "\n";
  out << "bins " << bins << "\n";
  out << "frames " << spectrogram.frames.size() << "\n";
  out.precision(17);
  out << "cqt " << config.f_min << " " << config.f_max << " "
      << config.bins_per_octave << " " << window_token(config.window) << "\n";
  out << "DATA\n";
  for (const dsp::CqtFrame& frame : spectrogram.frames) {
    out.write(reinterpret_cast<const char*>(&frame.center_time), sizeof(double));
    out.write(reinterpret_cast<const char*>(frame.values.data()),
              static_cast<std::streamsize>(sizeof(double)) * bins);
  }
  if (!out) throw std::runtime_error("short write to " + path.string());
}

dsp::Spectrogram load_spectrogram(const fs::path& path,
                                  const dsp::CqtConfig& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open spectrogram: " + path.string());

  std::string line;
  if (!std::getline(in, line) || line.rfind(kSpectroMagic, 0) != 0)
    throw std::runtime_error(path.string() + " is not a spectrogram cache file");

  dsp::Spectrogram spectrogram;
  Index bins = 0;
  size_t frames = 0;
  double f_min = 0, f_max = 0;
  int bpo = 0;
  std::string window;

  while (std::getline(in, line) && line != "DATA") {
    std::istringstream tokens(line);
    std::string key;
    tokens >> key;
    if (key == "piece") tokens >> spectrogram.piece_id;
    else if (key == "bins") tokens >> bins;
    else if (key == "frames") tokens >> frames;
    else if (key == "cqt") tokens >> f_min >> f_max >> bpo >> window;
    else throw std::runtime_error(path.string() + ": unknown header " + key);
  }
  if (line != "DATA")
    throw std::runtime_error(path.string() + ": missing DATA marker");

  if (f_min != expected.f_min || f_max != expected.f_max ||
      bpo != expected.bins_per_octave || window != window_token(expected.window))
    throw std::runtime_error(path.string() +
                             ": cached CQT configuration differs");

  spectrogram.frames.resize(frames);
  for (dsp::CqtFrame& frame : spectrogram.frames) {
    in.read(reinterpret_cast<char*>(&frame.center_time), sizeof(double));
    frame.values.resize(bins);
    in.read(reinterpret_cast<char*>(frame.values.data()),
            static_cast<std::streamsize>(sizeof(double)) * bins);
  }
  if (!in) throw std::runtime_error("truncated spectrogram: " + path.string());
  return spectrogram;
}

std::vector<corpus::Piece> ingest_corpus(const std::vector<CorpusEntry>& entries,
                                         const dsp::CqtConfig& config,
                                         std::optional<fs::path> cache_dir) {
  if (cache_dir) fs::create_directories(*cache_dir);

  // analyzers are expensive to build; share one per sample rate
  std::map<int, dsp::CqtAnalyzer> analyzers;

  std::vector<corpus::Piece> pieces;
  pieces.reserve(entries.size());
  for (const CorpusEntry& entry : entries) {
    const fs::path cache_file =
        cache_dir ? *cache_dir / (entry.id + ".spgm") : fs::path{};

    if (cache_dir && fs::exists(cache_file)) {
      try {
        corpus::Piece piece;
        piece.piece_id = entry.id;
        piece.source = entry.audio.string();
        piece.spectrogram = load_spectrogram(cache_file, config);
        pieces.push_back(std::move(piece));
        continue;
      } catch (const std::exception&) {
        // stale or mismatched cache entry: fall through and recompute
      }
    }

    const auto signal = dsp::read_wav(entry.audio);
    auto it = analyzers.find(signal.sample_rate);
    if (it == analyzers.end())
      it = analyzers.emplace(signal.sample_rate,
                             dsp::CqtAnalyzer(config, signal.sample_rate))
               .first;
    corpus::Piece piece =
        corpus::ingest_piece(entry.audio, entry.beats, it->second, entry.subdivision);
    piece.piece_id = entry.id;
    piece.spectrogram.piece_id = entry.id;
    if (cache_dir) save_spectrogram(cache_file, piece.spectrogram, config);
    pieces.push_back(std::move(piece));
  }
  return pieces;
}

} // namespace tonalexp::experiment
