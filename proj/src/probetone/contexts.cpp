#include "tonalexp/probetone/contexts.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace tonalexp::probetone {

ModeGroup group_of(ContextMode mode) {
  switch (mode) {
    case ContextMode::major:
    case ContextMode::chord_major: return ModeGroup::major;
    case ContextMode::minor:
    case ContextMode::chord_minor: return ModeGroup::minor;
  }
  throw std::invalid_argument("unknown context mode");
}

std::string to_string(ContextMode mode) {
  switch (mode) {
    case ContextMode::major: return "major";
    case ContextMode::minor: return "minor";
    case ContextMode::chord_major: return "chord-major";
    case ContextMode::chord_minor: return "chord-minor";
  }
  throw std::invalid_argument("unknown context mode");
}

ContextMode context_mode_from_string(const std::string& name) {
  if (name == "major") return ContextMode::major;
  if (name == "minor") return ContextMode::minor;
  if (name == "chord-major") return ContextMode::chord_major;
  if (name == "chord-minor") return ContextMode::chord_minor;
  throw std::invalid_argument("unknown context mode: " + name);
}

const TonalContext& ContextLibrary::by_name(const std::string& name) const {
  for (const TonalContext& ctx : contexts)
    if (ctx.name == name) return ctx;
  throw std::out_of_range("no context named " + name);
}

ContextLibrary load_context_library(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open context library: " + path.string());

  ContextLibrary library;
  std::set<std::string> names;
  TonalContext current;
  bool open = false;

  std::string line;
  int line_number = 0;
  auto fail = [&](const std::string& message) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line_number) +
                             ": " + message);
  };

  while (std::getline(in, line)) {
    ++line_number;
    std::istringstream tokens(line);
    std::string first;
    if (!(tokens >> first) || first.front() == '#') continue;

    if (first == "context") {
      if (open) fail("missing 'end' before a new context");
      std::string name, mode;
      if (!(tokens >> name >> mode)) fail("expected: context <name> <mode>");
      if (!names.insert(name).second) fail("duplicate context name " + name);
      current = TonalContext{};
      current.name = name;
      current.mode = context_mode_from_string(mode);
      open = true;
    } else if (first == "end") {
      if (!open) fail("'end' outside a context");
      if (current.events.empty()) fail("context has no events");
      library.contexts.push_back(std::move(current));
      open = false;
    } else {
      if (!open) fail("event line outside a context");
      ContextEvent event;
      try {
        event.duration = std::stod(first);
      } catch (const std::exception&) {
        fail("cannot parse event duration '" + first + "'");
      }
      if (!(event.duration > 0.0)) fail("event duration must be positive");
      std::string pcs;
      if (!(tokens >> pcs)) fail("event needs a pitch-class list");
      std::istringstream split(pcs);
      std::string token;
      while (std::getline(split, token, ',')) {
        int pc;
        try {
          pc = std::stoi(token);
        } catch (const std::exception&) {
          fail("cannot parse pitch class '" + token + "'");
        }
        if (pc < 0 || pc > 11) fail("pitch class out of 0..11");
        event.pitch_classes.insert(pc);
      }
      if (event.pitch_classes.empty()) fail("event has no pitch classes");
      current.events.push_back(std::move(event));
    }
  }
  if (open)
    throw std::runtime_error(path.string() + ": unterminated context block");
  if (library.contexts.empty())
    throw std::runtime_error(path.string() + ": no contexts defined");
  return library;
}

KKReference load_kk_reference(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open reference profiles: " + path.string());

  KKReference ref;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream tokens(line);
    std::string first;
    if (!(tokens >> first) || first.front() == '#') continue;

    if (first == "citation") {
      std::getline(tokens >> std::ws, ref.citation);
    } else if (first == "major" || first == "minor") {
      Vector values(12);
      for (int i = 0; i < 12; ++i)
        if (!(tokens >> values[i]))
          throw std::runtime_error(path.string() + ": profile '" + first +
                                   "' needs 12 values");
      if ((values.array() <= 0.0).any())
        throw std::runtime_error(path.string() + ": ratings must be positive");
      (first == "major" ? ref.major : ref.minor) = values;
    } else {
      throw std::runtime_error(path.string() + ": unknown directive " + first);
    }
  }
  if (ref.major.size() != 12 || ref.minor.size() != 12)
    throw std::runtime_error(path.string() + ": missing major or minor profile");
  return ref;
}

} // namespace tonalexp::probetone
