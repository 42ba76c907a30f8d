#include "tonalexp/experiment/manifest.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace tonalexp::experiment {

using nlohmann::json;

std::string ordering_label(bool shuffled) { return shuffled ? "shuf" : "orig"; }

namespace {

std::string window_name(dsp::WindowKind kind) {
  return kind == dsp::WindowKind::hann ? "hann" : "hamming";
}

dsp::WindowKind window_from_name(const std::string& name) {
  if (name == "hann") return dsp::WindowKind::hann;
  if (name == "hamming") return dsp::WindowKind::hamming;
  throw std::runtime_error("unknown window kind: " + name);
}

} // namespace

void save_manifest(const std::filesystem::path& path, const RunManifest& m) {
  json j;
  j["format"] = m.format;
  j["dataset"] = m.dataset;
  j["kind"] = rnn::to_string(m.kind);
  j["ordering"] = ordering_label(m.shuffled);
  j["fold"] = m.fold_index;
  j["n_folds"] = m.n_folds;
  j["train_fraction"] = m.train_fraction;
  j["subdivision"] = m.subdivision;
  j["hidden_size"] = m.hidden_size;
  j["seeds"] = {{"master", m.master_seed},
                {"fold", m.fold_seed},
                {"shuffle", m.shuffle_seed},
                {"train", m.train_seed}};
  j["cqt"] = {{"f_min", m.cqt.f_min},
              {"f_max", m.cqt.f_max},
              {"bins_per_octave", m.cqt.bins_per_octave},
              {"window", window_name(m.cqt.window)}};
  j["shepard"] = {{"component_count", m.shepard.component_count},
                  {"band_lo_hz", m.shepard.band_lo_hz},
                  {"band_hi_hz", m.shepard.band_hi_hz},
                  {"amplitude", m.shepard.amplitude},
                  {"ramp_seconds", m.shepard.ramp_seconds}};
  j["objective"] = {{"beta", m.objective.beta},
                    {"epsilon", m.objective.epsilon},
                    {"quantile", m.objective.quantile},
                    {"output_clamp", m.objective.output_clamp}};
  j["train"] = {{"learning_rate", m.train.learning_rate},
                {"truncation", m.train.truncation},
                {"clip", m.train.clip},
                {"batch_size", m.train.batch_size},
                {"seq_len", m.train.seq_len},
                {"patience", m.train.patience},
                {"max_epochs", m.train.max_epochs},
                {"rms_decay", m.train.rms_decay},
                {"rms_epsilon", m.train.rms_epsilon}};
  j["metrics"] = {{"test_mce", m.test_mce},
                  {"best_epoch", m.best_epoch},
                  {"epochs_run", m.epochs_run},
                  {"stop_reason", m.stop_reason},
                  {"r_major", m.r_major ? json(*m.r_major) : json(nullptr)},
                  {"r_minor", m.r_minor ? json(*m.r_minor) : json(nullptr)}};
  j["created"] = m.created;
  j["finished"] = m.finished;

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest: " + path.string());
  out << j.dump(2) << "\n";
}

RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }

  RunManifest m;
  m.format = j.at("format").get<int>();
  m.dataset = j.at("dataset").get<std::string>();
  m.kind = rnn::cell_kind_from_string(j.at("kind").get<std::string>());
  m.shuffled = j.at("ordering").get<std::string>() == "shuf";
  m.fold_index = j.at("fold").get<int>();
  m.n_folds = j.at("n_folds").get<int>();
  m.train_fraction = j.at("train_fraction").get<double>();
  m.subdivision = j.at("subdivision").get<int>();
  m.hidden_size = j.at("hidden_size").get<Index>();

  const auto& seeds = j.at("seeds");
  m.master_seed = seeds.at("master").get<uint64_t>();
  m.fold_seed = seeds.at("fold").get<uint64_t>();
  m.shuffle_seed = seeds.at("shuffle").get<uint64_t>();
  m.train_seed = seeds.at("train").get<uint64_t>();

  const auto& cqt = j.at("cqt");
  m.cqt.f_min = cqt.at("f_min").get<double>();
  m.cqt.f_max = cqt.at("f_max").get<double>();
  m.cqt.bins_per_octave = cqt.at("bins_per_octave").get<int>();
  m.cqt.window = window_from_name(cqt.at("window").get<std::string>());

  const auto& shepard = j.at("shepard");
  m.shepard.component_count = shepard.at("component_count").get<int>();
  m.shepard.band_lo_hz = shepard.at("band_lo_hz").get<double>();
  m.shepard.band_hi_hz = shepard.at("band_hi_hz").get<double>();
  m.shepard.amplitude = shepard.at("amplitude").get<double>();
  m.shepard.ramp_seconds = shepard.at("ramp_seconds").get<double>();

  const auto& objective = j.at("objective");
  m.objective.beta = objective.at("beta").get<double>();
  m.objective.epsilon = objective.at("epsilon").get<double>();
  m.objective.quantile = objective.at("quantile").get<double>();
  m.objective.output_clamp = objective.at("output_clamp").get<double>();

  const auto& train = j.at("train");
  m.train.learning_rate = train.at("learning_rate").get<double>();
  m.train.truncation = train.at("truncation").get<int>();
  m.train.clip = train.at("clip").get<double>();
  m.train.batch_size = train.at("batch_size").get<int>();
  m.train.seq_len = train.at("seq_len").get<int>();
  m.train.patience = train.at("patience").get<int>();
  m.train.max_epochs = train.at("max_epochs").get<int>();
  m.train.rms_decay = train.at("rms_decay").get<double>();
  m.train.rms_epsilon = train.at("rms_epsilon").get<double>();
  m.train.seed = m.train_seed;

  const auto& metrics = j.at("metrics");
  m.test_mce = metrics.at("test_mce").get<double>();
  m.best_epoch = metrics.at("best_epoch").get<int>();
  m.epochs_run = metrics.at("epochs_run").get<int>();
  m.stop_reason = metrics.at("stop_reason").get<std::string>();
  if (!metrics.at("r_major").is_null())
    m.r_major = metrics.at("r_major").get<double>();
  if (!metrics.at("r_minor").is_null())
    m.r_minor = metrics.at("r_minor").get<double>();

  m.created = j.value("created", "");
  m.finished = j.value("finished", "");
  return m;
}

} // namespace tonalexp::experiment
