#include "tonalexp/experiment/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "tonalexp/experiment/csv.hpp"
#include "tonalexp/experiment/svg.hpp"
#include "tonalexp/probetone/stats.hpp"

namespace tonalexp::experiment {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(10);
  out << v;
  return out.str();
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string group_name(probetone::ModeGroup group) {
  return group == probetone::ModeGroup::major ? "major" : "minor";
}

} // namespace

void write_probe_result(const fs::path& out_dir,
                        const probetone::ProbeToneResult& result,
                        const probetone::KKReference* reference, bool svg) {
  fs::create_directories(out_dir);

  {
    auto out = open_out(out_dir / "per_context.csv");
    csv_row(out, {"context", "group", "degree", "kl", "fit"});
    for (const auto& ctx : result.contexts)
      for (int i = 0; i < 12; ++i)
        csv_row(out, {ctx.context, group_name(ctx.group), std::to_string(i),
                      fmt(ctx.kl_profile.values[i]), fmt(ctx.fit_profile.values[i])});
  }
  {
    auto out = open_out(out_dir / "aggregates.csv");
    csv_row(out, {"group", "degree", "fit"});
    for (int i = 0; i < 12; ++i)
      csv_row(out, {"major", std::to_string(i), fmt(result.major_aggregate.values[i])});
    for (int i = 0; i < 12; ++i)
      csv_row(out, {"minor", std::to_string(i), fmt(result.minor_aggregate.values[i])});
  }
  {
    auto out = open_out(out_dir / "correlations.csv");
    csv_row(out, {"r_major", "r_minor"});
    csv_row(out, {fmt(result.r_major), fmt(result.r_minor)});
  }

  if (svg) {
    const std::vector<std::string> degrees{"0", "1", "2",  "3", "4", "5",
                                           "6", "7", "8",  "9", "10", "11"};
    for (auto group : {probetone::ModeGroup::major, probetone::ModeGroup::minor}) {
      const bool is_major = group == probetone::ModeGroup::major;
      const Vector& fit = is_major ? result.major_aggregate.values
                                   : result.minor_aggregate.values;
      std::vector<BarSeries> series;
      series.push_back({"model fit", "#1f77b4", fit});
      if (reference) {
        const Vector& ratings = is_major ? reference->major : reference->minor;
        const double lo = ratings.minCoeff(), hi = ratings.maxCoeff();
        series.push_back(
            {"reference (scaled)", "#ff7f0e",
             ((ratings.array() - lo) / (hi - lo)).matrix()});
      }
      auto out = open_out(out_dir / (std::string("fit_profile_") +
                                     group_name(group) + ".svg"));
      out << svg_grouped_bars(std::string("Probe-tone fit, ") +
                                  group_name(group) + " contexts",
                              degrees, series);
    }
  }
}

ProfileData load_profile_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profile CSV: " + path.string());

  ProfileData data;
  // conventionally written as <model dir>/aggregates.csv, so the directory
  // carries the identity
  data.label = path.stem() == "aggregates" && path.has_parent_path()
                   ? path.parent_path().filename().string()
                   : path.stem().string();
  data.major = Vector::Constant(12, -1.0);
  data.minor = Vector::Constant(12, -1.0);

  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.rfind("group", 0) == 0) continue;
    }
    std::istringstream tokens(line);
    std::string group, degree, value;
    if (!std::getline(tokens, group, ',') || !std::getline(tokens, degree, ',') ||
        !std::getline(tokens, value, ','))
      throw std::runtime_error(path.string() + ": expected group,degree,fit");
    const int d = std::stoi(degree);
    if (d < 0 || d > 11) throw std::runtime_error(path.string() + ": bad degree");
    if (group == "major") data.major[d] = std::stod(value);
    else if (group == "minor") data.minor[d] = std::stod(value);
    else throw std::runtime_error(path.string() + ": unknown group " + group);
  }
  if ((data.major.array() < 0.0).any() || (data.minor.array() < 0.0).any())
    throw std::runtime_error(path.string() + ": incomplete profiles");
  return data;
}

void generate_report(const ReportOptions& options) {
  std::vector<fs::path> manifest_paths;
  if (fs::is_directory(options.manifest_dir))
    for (const auto& entry : fs::directory_iterator(options.manifest_dir))
      if (entry.is_regular_file() && entry.path().extension() == ".json")
        manifest_paths.push_back(entry.path());
  std::sort(manifest_paths.begin(), manifest_paths.end());
  if (manifest_paths.empty())
    throw std::runtime_error("no manifests found in " +
                             options.manifest_dir.string());

  std::vector<RunManifest> manifests;
  for (const fs::path& path : manifest_paths)
    manifests.push_back(load_manifest(path));

  fs::create_directories(options.out_dir);

  {
    auto out = open_out(options.out_dir / "mce_vs_correlation.csv");
    csv_row(out, {"dataset", "kind", "ordering", "fold", "test_mce", "r_major",
                  "r_minor"});
    for (const RunManifest& m : manifests)
      csv_row(out, {m.dataset, rnn::to_string(m.kind), ordering_label(m.shuffled),
                    std::to_string(m.fold_index), fmt(m.test_mce),
                    m.r_major ? fmt(*m.r_major) : "",
                    m.r_minor ? fmt(*m.r_minor) : ""});
  }

  {
    // lowest test MCE per dataset
    std::map<std::string, const RunManifest*> best;
    for (const RunManifest& m : manifests) {
      auto [it, inserted] = best.try_emplace(m.dataset, &m);
      if (!inserted && m.test_mce < it->second->test_mce) it->second = &m;
    }
    auto out = open_out(options.out_dir / "correlation_table.csv");
    csv_row(out, {"dataset", "kind", "ordering", "fold", "test_mce", "r_major",
                  "r_minor"});
    for (const auto& [dataset, m] : best)
      csv_row(out, {dataset, rnn::to_string(m->kind), ordering_label(m->shuffled),
                    std::to_string(m->fold_index), fmt(m->test_mce),
                    m->r_major ? fmt(*m->r_major) : "",
                    m->r_minor ? fmt(*m->r_minor) : ""});
  }

  if (options.profile_files.size() >= 2) {
    std::vector<ProfileData> profiles;
    for (const fs::path& path : options.profile_files)
      profiles.push_back(load_profile_csv(path));
    auto out = open_out(options.out_dir / "ks_tests.csv");
    csv_row(out, {"profile_a", "profile_b", "group", "d", "p"});
    for (size_t i = 0; i < profiles.size(); ++i)
      for (size_t j = i + 1; j < profiles.size(); ++j) {
        for (bool major : {true, false}) {
          const Vector& a = major ? profiles[i].major : profiles[i].minor;
          const Vector& b = major ? profiles[j].major : profiles[j].minor;
          const auto ks = probetone::ks_two_sample(
              std::span<const double>(a.data(), static_cast<size_t>(a.size())),
              std::span<const double>(b.data(), static_cast<size_t>(b.size())));
          csv_row(out, {profiles[i].label, profiles[j].label,
                        major ? "major" : "minor", fmt(ks.statistic),
                        fmt(ks.p_value)});
        }
      }
  }

  if (options.svg) {
    ScatterSeries orig_major{"orig, r_major", "#1f77b4", {}};
    ScatterSeries shuf_major{"shuf, r_major", "#d62728", {}};
    ScatterSeries orig_minor{"orig, r_minor", "#2ca02c", {}};
    ScatterSeries shuf_minor{"shuf, r_minor", "#9467bd", {}};
    for (const RunManifest& m : manifests) {
      if (m.r_major)
        (m.shuffled ? shuf_major : orig_major)
            .points.push_back({m.test_mce, *m.r_major});
      if (m.r_minor)
        (m.shuffled ? shuf_minor : orig_minor)
            .points.push_back({m.test_mce, *m.r_minor});
    }
    auto out = open_out(options.out_dir / "mce_vs_correlation.svg");
    out << svg_scatter("Correlation with reference profiles vs predictive error",
                       "test MCE", "Pearson r",
                       {orig_major, shuf_major, orig_minor, shuf_minor});
  }
}

} // namespace tonalexp::experiment
