#ifndef TONALEXP_PROBETONE_CONTEXTS_HPP
#define TONALEXP_PROBETONE_CONTEXTS_HPP

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "tonalexp/types.hpp"

namespace tonalexp::probetone {

/// Which of the two aggregate profiles a context contributes to.
enum class ModeGroup { major, minor };

/// Scale/cadence contexts carry their mode directly; individual chords are
/// assigned to a group by their quality.
enum class ContextMode { major, minor, chord_major, chord_minor };

ModeGroup group_of(ContextMode mode);
std::string to_string(ContextMode mode);
ContextMode context_mode_from_string(const std::string& name);

struct ContextEvent {
  std::set<int> pitch_classes;  // relative to tonic = 0
  double duration = 1.0;        // seconds
};

/// One key-defining stimulus: a scale, a cadence, or a single chord.
struct TonalContext {
  std::string name;
  ContextMode mode = ContextMode::major;
  std::vector<ContextEvent> events;

  ModeGroup group() const { return group_of(mode); }
};

struct ContextLibrary {
  std::vector<TonalContext> contexts;

  const TonalContext& by_name(const std::string& name) const;
};

/// Loads the stimulus inventory from its data file:
///   context <name> <major|minor|chord-major|chord-minor>
///   <duration-seconds> <pc[,pc...]>      (one line per event)
///   end
/// Context names must be unique; pitch classes lie in 0..11.
ContextLibrary load_context_library(const std::filesystem::path& path);

/// Published probe-tone rating profiles for major and minor keys, indexed
/// by pitch class relative to the tonic.
struct KKReference {
  Vector major;
  Vector minor;
  std::string citation;
};

/// Loads the reference profiles:
///   citation <free text>
///   major <12 values>
///   minor <12 values>
KKReference load_kk_reference(const std::filesystem::path& path);

} // namespace tonalexp::probetone

#endif
