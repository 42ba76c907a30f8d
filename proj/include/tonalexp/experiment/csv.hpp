#ifndef TONALEXP_EXPERIMENT_CSV_HPP
#define TONALEXP_EXPERIMENT_CSV_HPP

#include <ostream>
#include <span>
#include <string>

namespace tonalexp::experiment {

/// RFC-4180 quoting: fields containing commas, quotes, or newlines are
/// wrapped in quotes with internal quotes doubled.
inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void csv_row(std::ostream& out, std::span<const std::string> fields) {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(fields[i]);
  }
  out << "\r\n";
}

inline void csv_row(std::ostream& out, std::initializer_list<std::string> fields) {
  csv_row(out, std::span<const std::string>(fields.begin(), fields.size()));
}

} // namespace tonalexp::experiment

#endif
