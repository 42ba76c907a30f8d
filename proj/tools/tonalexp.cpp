// Command-line front end: corpus synthesis, ingestion, training runs,
// probe-tone evaluation, and report generation.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tonalexp/experiment/checkpoint.hpp"
#include "tonalexp/experiment/csv.hpp"
#include "tonalexp/experiment/report.hpp"
#include "tonalexp/experiment/run.hpp"
#include "tonalexp/experiment/storage.hpp"
#include "tonalexp/experiment/synth_corpus.hpp"
#include "tonalexp/trainer/gradcheck.hpp"

namespace fs = std::filesystem;
using namespace tonalexp;

#ifndef TONALEXP_DATA_DIR
#define TONALEXP_DATA_DIR "data"
#endif

namespace {

struct CqtFlags {
  dsp::CqtConfig config;

  void attach(CLI::App* cmd) {
    cmd->add_option("--f-min", config.f_min, "lowest CQT frequency (Hz)");
    cmd->add_option("--f-max", config.f_max, "highest CQT frequency (Hz)");
    cmd->add_option("--bins-per-octave", config.bins_per_octave,
                    "CQT bins per octave");
  }
};

struct ShepardFlags {
  dsp::ShepardConfig config;

  void attach(CLI::App* cmd) {
    cmd->add_option("--shepard-components", config.component_count,
                    "sinusoid components per tone");
    cmd->add_option("--shepard-band-lo", config.band_lo_hz,
                    "lower edge of the base band (Hz)");
    cmd->add_option("--shepard-amplitude", config.amplitude,
                    "peak amplitude of synthesized tones");
  }
};

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

int cmd_synth_corpus(const fs::path& out_dir, const std::string& recipe_file,
                     int pieces_per_mode, int events, uint64_t seed,
                     int sample_rate, int subdivision, double event_duration,
                     const std::string& write_recipe,
                     const dsp::ShepardConfig& shepard) {
  experiment::CorpusRecipe recipe;
  if (!recipe_file.empty()) {
    recipe = experiment::load_recipe(recipe_file);
  } else {
    recipe = experiment::default_recipe(pieces_per_mode, events, seed);
    recipe.sample_rate = sample_rate;
    recipe.subdivision = subdivision;
    recipe.event_duration = event_duration;
  }
  if (!write_recipe.empty()) experiment::save_recipe(write_recipe, recipe);

  const fs::path manifest = experiment::synth_corpus(recipe, shepard, out_dir);
  long frames = 0;
  for (const auto& piece : recipe.pieces)
    frames += piece.events * recipe.subdivision + 1;
  std::cout << "wrote " << recipe.pieces.size() << " pieces (" << frames
            << " frames at subdivision " << recipe.subdivision << ") to "
            << out_dir.string() << "\n";
  std::cout << "corpus manifest: " << manifest.string() << "\n";
  return 0;
}

int cmd_ingest(const fs::path& corpus, std::optional<fs::path> root,
               const fs::path& cache, const dsp::CqtConfig& cqt) {
  const auto entries = experiment::load_corpus_manifest(corpus, root);
  const auto pieces = experiment::ingest_corpus(entries, cqt, cache);
  long frames = 0;
  for (const auto& piece : pieces) frames += piece.frames();
  std::cout << "ingested " << pieces.size() << " pieces, " << frames
            << " frames into " << cache.string() << "\n";
  return 0;
}

int cmd_train(const fs::path& corpus, std::optional<fs::path> root,
              std::optional<fs::path> cache, const fs::path& out_dir,
              experiment::TrainRunSpec spec, const std::string& from_manifest) {
  if (!from_manifest.empty()) {
    const auto manifest = experiment::load_manifest(from_manifest);
    spec = experiment::spec_from_manifest(manifest);
  }

  const auto entries = experiment::load_corpus_manifest(corpus, root);
  const auto pieces = experiment::ingest_corpus(entries, spec.cqt, cache);

  experiment::TrainRunOutcome outcome = experiment::run_training(spec, pieces);

  fs::create_directories(out_dir);
  const std::string run_id = spec.run_id();
  const fs::path manifest_path = out_dir / (run_id + ".json");
  const fs::path checkpoint_path = out_dir / (run_id + ".ckpt");
  experiment::save_manifest(manifest_path, outcome.manifest);
  experiment::save_checkpoint(checkpoint_path, outcome.params, nullptr,
                              manifest_path.filename().string());

  std::cout << "run " << run_id << ": test MCE "
            << format_double(outcome.manifest.test_mce) << " (best epoch "
            << outcome.manifest.best_epoch << "/" << outcome.manifest.epochs_run
            << ", " << outcome.manifest.stop_reason << ", epsilon "
            << format_double(outcome.manifest.objective.epsilon) << ")\n";
  std::cout << "checkpoint: " << checkpoint_path.string() << "\n";
  std::cout << "manifest:   " << manifest_path.string() << "\n";
  return 0;
}

int cmd_probetone(const std::vector<fs::path>& checkpoints,
                  const fs::path& out_dir, const fs::path& contexts_file,
                  const fs::path& kk_file, bool svg, bool update_manifests,
                  const dsp::CqtConfig& cqt_flags,
                  const dsp::ShepardConfig& shepard_flags) {
  const auto library = probetone::load_context_library(contexts_file);
  const auto reference = probetone::load_kk_reference(kk_file);

  fs::create_directories(out_dir);
  std::ofstream scatter(out_dir / "scatter.csv", std::ios::trunc | std::ios::binary);
  experiment::csv_row(scatter, {"checkpoint", "dataset", "kind", "ordering",
                                "fold", "test_mce", "r_major", "r_minor"});

  // evaluators are reused across checkpoints with identical configs
  std::optional<probetone::ProbeToneEvaluator> evaluator;
  dsp::CqtConfig evaluator_cqt;
  dsp::ShepardConfig evaluator_shepard;

  for (const fs::path& ckpt_path : checkpoints) {
    const experiment::Checkpoint ckpt = experiment::load_checkpoint(ckpt_path);

    std::optional<experiment::RunManifest> manifest;
    fs::path manifest_path;
    if (!ckpt.manifest_ref.empty()) {
      manifest_path = fs::path(ckpt.manifest_ref).is_absolute()
                          ? fs::path(ckpt.manifest_ref)
                          : ckpt_path.parent_path() / ckpt.manifest_ref;
      if (fs::exists(manifest_path))
        manifest = experiment::load_manifest(manifest_path);
    }

    const dsp::CqtConfig cqt = manifest ? manifest->cqt : cqt_flags;
    const dsp::ShepardConfig shepard =
        manifest ? manifest->shepard : shepard_flags;
    if (!evaluator || evaluator_cqt.f_min != cqt.f_min ||
        evaluator_cqt.f_max != cqt.f_max ||
        evaluator_cqt.bins_per_octave != cqt.bins_per_octave ||
        evaluator_shepard.band_lo_hz != shepard.band_lo_hz ||
        evaluator_shepard.component_count != shepard.component_count) {
      evaluator.emplace(shepard, cqt);
      evaluator_cqt = cqt;
      evaluator_shepard = shepard;
    }

    const auto result = probetone::run_probe_experiment(
        *evaluator, probetone::expectation_of(ckpt.params), library, reference);

    const std::string label = ckpt_path.stem().string();
    experiment::write_probe_result(out_dir / label, result,
                                   svg ? &reference : nullptr, svg);

    if (manifest) {
      if (update_manifests) {
        manifest->r_major = result.r_major;
        manifest->r_minor = result.r_minor;
        experiment::save_manifest(manifest_path, *manifest);
      }
      experiment::csv_row(
          scatter,
          {label, manifest->dataset, rnn::to_string(manifest->kind),
           experiment::ordering_label(manifest->shuffled),
           std::to_string(manifest->fold_index), format_double(manifest->test_mce),
           format_double(result.r_major), format_double(result.r_minor)});
    } else {
      experiment::csv_row(scatter, {label, "", "", "", "", "",
                                    format_double(result.r_major),
                                    format_double(result.r_minor)});
    }

    std::cout << label << ": r_major " << format_double(result.r_major)
              << ", r_minor " << format_double(result.r_minor) << "\n";
  }
  return 0;
}

int cmd_report(const fs::path& manifest_dir, const fs::path& out_dir,
               const std::vector<fs::path>& profiles, bool svg) {
  experiment::ReportOptions options;
  options.manifest_dir = manifest_dir;
  options.out_dir = out_dir;
  options.profile_files = profiles;
  options.svg = svg;
  experiment::generate_report(options);
  std::cout << "report written to " << out_dir.string() << "\n";
  return 0;
}

int cmd_gradcheck(Index input, Index hidden, int steps, int batch,
                  uint64_t seed, double tolerance) {
  bool ok = true;
  for (rnn::CellKind kind :
       {rnn::CellKind::vanilla, rnn::CellKind::lstm, rnn::CellKind::gru,
        rnn::CellKind::vanilla_mi, rnn::CellKind::lstm_mi}) {
    const auto check =
        trainer::gradient_check(kind, input, hidden, steps, batch, seed);
    const bool pass = check.max_rel_error < tolerance;
    ok = ok && pass;
    std::cout << (pass ? "PASS" : "FAIL") << " " << rnn::to_string(kind)
              << ": max relative error " << check.max_rel_error << "\n";
  }
  return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recurrent next-frame prediction on constant-Q spectrograms "
               "with a simulated probe-tone evaluation"};
  app.require_subcommand(1);

  // --- synth-corpus ---------------------------------------------------
  auto* synth = app.add_subcommand(
      "synth-corpus", "Synthesize a tonal Shepard-chord corpus to WAV");
  fs::path synth_out;
  std::string synth_recipe, synth_write_recipe;
  int synth_pieces = 2, synth_events = 215, synth_rate = 44100, synth_subdiv = 2;
  uint64_t synth_seed = 1;
  double synth_event_duration = 0.25;
  ShepardFlags synth_shepard;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--recipe", synth_recipe, "recipe JSON to synthesize");
  synth->add_option("--pieces-per-mode", synth_pieces,
                    "pieces per key/mode for the default recipe");
  synth->add_option("--events", synth_events, "events per piece");
  synth->add_option("--seed", synth_seed, "recipe seed");
  synth->add_option("--sample-rate", synth_rate, "sample rate (Hz)");
  synth->add_option("--subdivision", synth_subdiv, "frames per beat");
  synth->add_option("--event-duration", synth_event_duration,
                    "seconds per event");
  synth->add_option("--write-recipe", synth_write_recipe,
                    "also save the effective recipe JSON here");
  synth_shepard.attach(synth);

  // --- ingest ----------------------------------------------------------
  auto* ingest = app.add_subcommand(
      "ingest", "Precompute beat-synchronous spectrograms into a cache");
  fs::path ingest_corpus_path, ingest_cache;
  std::string ingest_root;
  CqtFlags ingest_cqt;
  ingest->add_option("--corpus", ingest_corpus_path, "corpus manifest CSV")
      ->required();
  ingest->add_option("--corpus-root", ingest_root,
                     "base dir for relative paths (default: manifest dir or "
                     "TONALEXP_CORPUS_ROOT)");
  ingest->add_option("--cache", ingest_cache, "spectrogram cache directory")
      ->required();
  ingest_cqt.attach(ingest);

  // --- train -----------------------------------------------------------
  auto* train = app.add_subcommand("train", "Train one run-matrix entry");
  fs::path train_corpus, train_out;
  std::string train_root, train_cache, train_from_manifest;
  std::string train_kind = "gru", train_ordering = "orig";
  experiment::TrainRunSpec spec;
  CqtFlags train_cqt;
  ShepardFlags train_shepard;
  train->add_option("--corpus", train_corpus, "corpus manifest CSV")->required();
  train->add_option("--corpus-root", train_root, "base dir for relative paths");
  train->add_option("--cache", train_cache, "spectrogram cache directory");
  train->add_option("--out", train_out, "output directory")->required();
  train->add_option("--dataset", spec.dataset, "dataset id for reports");
  train->add_option("--kind", train_kind,
                    "cell kind: vanilla|lstm|gru|vanilla_mi|lstm_mi");
  train->add_option("--ordering", train_ordering,
                    "training data ordering: orig|shuf");
  train->add_option("--fold", spec.fold_index, "fold index");
  train->add_option("--folds", spec.n_folds, "number of folds");
  train->add_option("--train-fraction", spec.train_fraction,
                    "train share within the fold group");
  train->add_option("--subdivision", spec.subdivision,
                    "frames per beat (metadata)");
  train->add_option("--hidden", spec.hidden_size, "hidden units");
  train->add_option("--seed", spec.master_seed, "master seed");
  train->add_option("--beta", spec.objective.beta, "small-change weight");
  train->add_option("--quantile", spec.objective.quantile,
                    "epsilon calibration quantile");
  train->add_option("--output-clamp", spec.objective.output_clamp,
                    "prediction clamp eta");
  train->add_option("--lr", spec.train.learning_rate, "learning rate");
  train->add_option("--truncation", spec.train.truncation, "BPTT truncation");
  train->add_option("--clip", spec.train.clip, "gradient clip");
  train->add_option("--batch-size", spec.train.batch_size, "sequences per batch");
  train->add_option("--seq-len", spec.train.seq_len, "frames per sequence");
  train->add_option("--patience", spec.train.patience, "early-stopping patience");
  train->add_option("--max-epochs", spec.train.max_epochs, "epoch cap");
  train->add_option("--rms-decay", spec.train.rms_decay, "RMSProp decay");
  train->add_option("--rms-epsilon", spec.train.rms_epsilon, "RMSProp stabilizer");
  train->add_option("--from-manifest", train_from_manifest,
                    "reproduce the run described by this manifest");
  train_cqt.attach(train);
  train_shepard.attach(train);

  // --- probetone ---------------------------------------------------------
  auto* probe = app.add_subcommand(
      "probetone", "Evaluate checkpoints with the probe-tone protocol");
  std::vector<fs::path> probe_checkpoints;
  fs::path probe_out;
  fs::path probe_contexts = fs::path(TONALEXP_DATA_DIR) / "contexts.txt";
  fs::path probe_kk = fs::path(TONALEXP_DATA_DIR) / "kk_profiles.txt";
  bool probe_svg = false, probe_update = false;
  CqtFlags probe_cqt;
  ShepardFlags probe_shepard;
  probe->add_option("--checkpoint", probe_checkpoints, "checkpoint file(s)")
      ->required();
  probe->add_option("--out", probe_out, "output directory")->required();
  probe->add_option("--contexts", probe_contexts, "context library file");
  probe->add_option("--kk", probe_kk, "reference profile file");
  probe->add_flag("--svg", probe_svg, "also draw SVG profiles");
  probe->add_flag("--update-manifests", probe_update,
                  "write r values back into the run manifests");
  probe_cqt.attach(probe);
  probe_shepard.attach(probe);

  // --- report ------------------------------------------------------------
  auto* report = app.add_subcommand(
      "report", "Aggregate run manifests into summary tables");
  fs::path report_manifests, report_out;
  std::vector<fs::path> report_profiles;
  bool report_no_svg = false;
  report->add_option("--manifests", report_manifests, "manifest directory")
      ->required();
  report->add_option("--out", report_out, "output directory")->required();
  report->add_option("--profiles", report_profiles,
                     "aggregates.csv files for pairwise KS tests");
  report->add_flag("--no-svg", report_no_svg, "skip the scatter SVG");

  // --- gradcheck -----------------------------------------------------------
  auto* grad = app.add_subcommand(
      "gradcheck", "Compare analytic gradients against finite differences");
  Index grad_input = 8, grad_hidden = 5;
  int grad_steps = 7, grad_batch = 4;
  uint64_t grad_seed = 1;
  double grad_tolerance = 1e-4;
  grad->add_option("--input", grad_input, "input bins");
  grad->add_option("--hidden", grad_hidden, "hidden units");
  grad->add_option("--steps", grad_steps, "sequence length");
  grad->add_option("--batch", grad_batch, "batch size");
  grad->add_option("--seed", grad_seed, "seed");
  grad->add_option("--tolerance", grad_tolerance, "max relative error");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed())
      return cmd_synth_corpus(synth_out, synth_recipe, synth_pieces,
                              synth_events, synth_seed, synth_rate, synth_subdiv,
                              synth_event_duration, synth_write_recipe,
                              synth_shepard.config);
    if (ingest->parsed())
      return cmd_ingest(ingest_corpus_path,
                        ingest_root.empty()
                            ? std::nullopt
                            : std::optional<fs::path>(ingest_root),
                        ingest_cache, ingest_cqt.config);
    if (train->parsed()) {
      spec.kind = rnn::cell_kind_from_string(train_kind);
      if (train_ordering != "orig" && train_ordering != "shuf")
        throw std::invalid_argument("--ordering must be orig or shuf");
      spec.shuffled = train_ordering == "shuf";
      spec.cqt = train_cqt.config;
      spec.shepard = train_shepard.config;
      return cmd_train(train_corpus,
                       train_root.empty() ? std::nullopt
                                          : std::optional<fs::path>(train_root),
                       train_cache.empty() ? std::nullopt
                                           : std::optional<fs::path>(train_cache),
                       train_out, spec, train_from_manifest);
    }
    if (probe->parsed())
      return cmd_probetone(probe_checkpoints, probe_out, probe_contexts,
                           probe_kk, probe_svg, probe_update, probe_cqt.config,
                           probe_shepard.config);
    if (report->parsed())
      return cmd_report(report_manifests, report_out, report_profiles,
                        !report_no_svg);
    if (grad->parsed())
      return cmd_gradcheck(grad_input, grad_hidden, grad_steps, grad_batch,
                           grad_seed, grad_tolerance);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
