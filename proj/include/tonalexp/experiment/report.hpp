#ifndef TONALEXP_EXPERIMENT_REPORT_HPP
#define TONALEXP_EXPERIMENT_REPORT_HPP

#include <filesystem>
#include <vector>

#include "tonalexp/experiment/manifest.hpp"
#include "tonalexp/probetone/probetone.hpp"

namespace tonalexp::experiment {

/// Writes the probe-tone outputs for one model into out_dir:
/// per_context.csv (tonic-aligned KL and fit per context), aggregates.csv
/// (mode-level fit profiles), correlations.csv, and optionally
/// fit_profiles.svg comparing the aggregates against the scaled reference.
void write_probe_result(const std::filesystem::path& out_dir,
                        const probetone::ProbeToneResult& result,
                        const probetone::KKReference* reference = nullptr,
                        bool svg = false);

/// A mode-aggregate profile pair reloaded from aggregates.csv.
struct ProfileData {
  std::string label;
  Vector major;
  Vector minor;
};

ProfileData load_profile_csv(const std::filesystem::path& path);

struct ReportOptions {
  std::filesystem::path manifest_dir;
  std::filesystem::path out_dir;
  std::vector<std::filesystem::path> profile_files;  // for pairwise KS tests
  bool svg = true;
};

/// Aggregates every manifest in manifest_dir into
///   correlation_table.csv  - per dataset, the lowest-MCE model's r values
///   mce_vs_correlation.csv - one row per manifest, "orig"/"shuf" labeled
///   ks_tests.csv           - pairwise KS per mode over the given profiles
///   mce_vs_correlation.svg - scatter of the table above (optional)
/// Deterministic: manifests are processed in filename order.
void generate_report(const ReportOptions& options);

} // namespace tonalexp::experiment

#endif
