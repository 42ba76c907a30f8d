#ifndef TONALEXP_EXPERIMENT_STORAGE_HPP
#define TONALEXP_EXPERIMENT_STORAGE_HPP

#include <filesystem>
#include <optional>
#include <vector>

#include "tonalexp/corpus/corpus.hpp"
#include "tonalexp/dsp/cqt.hpp"

namespace tonalexp::experiment {

/// One row of a corpus manifest: where a piece's audio and beat annotations
/// live and how finely its beats are subdivided.
struct CorpusEntry {
  std::string id;
  std::filesystem::path audio;
  std::filesystem::path beats;
  int subdivision = 4;
};

/// Corpus manifests are CSV with the header id,audio,beats,subdivision.
/// Relative paths resolve against `root` (defaults to the manifest's
/// directory, overridable via the TONALEXP_CORPUS_ROOT environment).
std::vector<CorpusEntry> load_corpus_manifest(
    const std::filesystem::path& manifest_path,
    std::optional<std::filesystem::path> root = std::nullopt);

void save_corpus_manifest(const std::filesystem::path& manifest_path,
                          const std::vector<CorpusEntry>& entries);

/// Spectrogram cache files: plain-text header + raw doubles, bit-exact.
void save_spectrogram(const std::filesystem::path& path,
                      const dsp::Spectrogram& spectrogram,
                      const dsp::CqtConfig& config);

dsp::Spectrogram load_spectrogram(const std::filesystem::path& path,
                                  const dsp::CqtConfig& expected_config);

/// Ingests every entry, reusing `cache_dir` when given: cached spectrograms
/// whose CQT configuration matches are loaded instead of recomputed, and
/// fresh ones are stored.
std::vector<corpus::Piece> ingest_corpus(
    const std::vector<CorpusEntry>& entries, const dsp::CqtConfig& config,
    std::optional<std::filesystem::path> cache_dir = std::nullopt);

} // namespace tonalexp::experiment

#endif
