#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "tonalexp/trainer/gradcheck.hpp"
#include "tonalexp/trainer/train.hpp"

using namespace tonalexp;
using namespace tonalexp::trainer;
using rnn::CellKind;

namespace {

constexpr CellKind kAllKinds[] = {CellKind::vanilla, CellKind::lstm,
                                  CellKind::gru, CellKind::vanilla_mi,
                                  CellKind::lstm_mi};

corpus::Piece tonal_walk_piece(const std::string& id, int frames, int bins,
                               uint64_t seed) {
  corpus::Piece piece;
  piece.piece_id = id;
  piece.spectrogram.piece_id = id;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> hop(0, bins - 1);
  std::uniform_real_distribution<double> level(0.3, 1.0);
  int active = 0;
  for (int t = 0; t < frames; ++t) {
    if (t % 3 == 0) active = hop(rng);  // hold each state a few frames
    dsp::CqtFrame frame;
    frame.center_time = 0.25 * t;
    frame.values = Vector::Zero(bins);
    frame.values[active] = 1.0;
    frame.values[(active + 2) % bins] = level(rng);
    piece.spectrogram.frames.push_back(std::move(frame));
  }
  return piece;
}

corpus::Batch single_sequence_batch(const corpus::Batch& batch, int slot) {
  corpus::Batch one;
  one.batch_size = 1;
  one.seq_len = batch.seq_len;
  for (size_t t = 0; t < batch.inputs.size(); ++t) {
    one.inputs.push_back(batch.inputs[t].col(slot));
    one.targets.push_back(batch.targets[t].col(slot));
  }
  return one;
}

} // namespace

TEST_CASE("cross_entropy matches its closed forms") {
  const int n = 334;
  const Vector half = Vector::Constant(n, 0.5);
  CHECK(cross_entropy(half, half, 1e-7) ==
        doctest::Approx(n * std::log(2.0)).epsilon(1e-12));

  // a hard zero target against a prediction collapsing to zero is bounded
  // by the clamp, not infinite
  const Vector zeros = Vector::Zero(4);
  const Vector tiny = Vector::Constant(4, 1e-12);
  const double ce = cross_entropy(tiny, zeros, 1e-7);
  CHECK(ce > 0.0);
  CHECK(ce < 4 * 2e-7);

  // independent scalar evaluation of a small case
  Vector y(4), x(4);
  y << 0.2, 0.7, 0.9, 0.4;
  x << 0.0, 1.0, 0.5, 0.25;
  double expected = 0.0;
  for (int i = 0; i < 4; ++i)
    expected -= x[i] * std::log(y[i]) + (1.0 - x[i]) * std::log(1.0 - y[i]);
  CHECK(cross_entropy(y, x, 1e-7) == doctest::Approx(expected).epsilon(1e-12));

  CHECK_THROWS(cross_entropy(y, Vector::Zero(3), 1e-7));
}

TEST_CASE("frame_change is the L1 distance") {
  Vector a(2), b(2);
  a << 0.0, 1.0;
  b << 1.0, 0.0;
  CHECK(frame_change(a, a) == 0.0);
  CHECK(frame_change(a, b) == 2.0);
  CHECK(frame_change(a, b) == frame_change(b, a));
}

TEST_CASE("calibrate_epsilon finds the lowest value reaching the quantile") {
  const std::vector<double> changes{0.0, 1.0, 2.0, 3.0};
  CHECK(calibrate_epsilon(changes, 0.505) == 2.0);

  const std::vector<double> ties{0.7, 0.7, 0.7};
  CHECK(calibrate_epsilon(ties, 0.505) == 0.7);

  CHECK_THROWS(calibrate_epsilon(std::vector<double>{}, 0.505));
}

TEST_CASE("calibrated epsilon satisfies the quantile property") {
  std::mt19937_64 rng(31);
  std::exponential_distribution<double> dist(0.8);
  std::vector<double> changes;
  for (int i = 0; i < 997; ++i) changes.push_back(dist(rng));

  const double eps = calibrate_epsilon(changes, 0.505);
  const double m = static_cast<double>(changes.size());
  double at = 0, below = 0;
  for (double c : changes) {
    if (c <= eps) ++at;
    if (c < eps) ++below;
  }
  CHECK(at / m >= 0.505);
  CHECK(at / m <= 0.505 + 1.0 / m);  // no ties in a continuous sample
  CHECK(below / m < 0.505);
}

TEST_CASE("weighted_ce applies the binary change weight") {
  Vector y(3), x_same(3), x_far(3);
  y << 0.3, 0.6, 0.5;
  x_same << 0.2, 0.6, 0.5;
  x_far << 1.0, 0.0, 1.0;

  ObjectiveConfig cfg;
  cfg.epsilon = 0.5;

  SUBCASE("beta = 1 reduces to the plain objective") {
    cfg.beta = 1.0;
    CHECK(weighted_ce(y, x_same, x_far, cfg) ==
          cross_entropy(y, x_far, cfg.output_clamp));
    CHECK(weighted_ce(y, x_far, x_same, cfg) ==
          cross_entropy(y, x_same, cfg.output_clamp));
  }

  SUBCASE("small transitions are scaled by beta") {
    cfg.beta = 1e-3;
    const double same = weighted_ce(y, x_same, x_same, cfg);  // change 0
    CHECK(same == 1e-3 * cross_entropy(y, x_same, cfg.output_clamp));
    const double far = weighted_ce(y, x_same, x_far, cfg);  // change 2.4
    CHECK(far == cross_entropy(y, x_far, cfg.output_clamp));
  }

  SUBCASE("a change exactly at epsilon takes the small branch") {
    cfg.beta = 1e-3;
    Vector x_t(3), x_next(3);
    x_t << 0.25, 0.5, 0.5;  // binary-exact values, L1 change exactly 0.5
    x_next << 0.75, 0.5, 0.5;
    CHECK(frame_change(x_t, x_next) == 0.5);
    CHECK(weighted_ce(y, x_t, x_next, cfg) ==
          1e-3 * cross_entropy(y, x_next, cfg.output_clamp));
  }
}

TEST_CASE("clip_gradients clamps elementwise and is idempotent") {
  Gradients grads;
  Matrix g(1, 2);
  g << 0.5, -2.0;
  grads.push_back(g);
  clip_gradients(grads, 1.0);
  CHECK(grads[0](0, 0) == 0.5);
  CHECK(grads[0](0, 1) == -1.0);

  Gradients again = grads;
  clip_gradients(again, 1.0);
  CHECK(again[0] == grads[0]);
}

TEST_CASE("rmsprop_step follows the moving-average update rule") {
  rnn::CellParams params = rnn::init_params(CellKind::vanilla, 3, 2, 7);
  const rnn::CellParams before = params;
  OptimizerState state = OptimizerState::zeros_like(params);
  TrainConfig cfg;
  cfg.learning_rate = 0.01;

  SUBCASE("zero gradients leave parameters untouched and decay the average") {
    state.acc[0].setConstant(0.5);
    Gradients zero = zeros_like(params);
    rmsprop_step(params, zero, state, cfg);
    for (size_t i = 0; i < params.tensors.size(); ++i)
      CHECK(params.tensors[i] == before.tensors[i]);
    CHECK(state.acc[0](0, 0) == doctest::Approx(0.45).epsilon(1e-12));
  }

  SUBCASE("the first step matches the closed form") {
    Gradients grads = zeros_like(params);
    grads[0].setConstant(0.25);
    rmsprop_step(params, grads, state, cfg);
    const double expected_step =
        cfg.learning_rate * 0.25 /
        std::sqrt((1.0 - cfg.rms_decay) * 0.25 * 0.25 + cfg.rms_epsilon);
    const Matrix diff = before.tensors[0] - params.tensors[0];
    CHECK(diff.minCoeff() == doctest::Approx(expected_step).epsilon(1e-12));
    CHECK(diff.maxCoeff() == doctest::Approx(expected_step).epsilon(1e-12));
    // untouched tensors keep their values
    CHECK(params.tensors[1] == before.tensors[1]);
  }

  SUBCASE("updates are elementwise independent") {
    Gradients grads = zeros_like(params);
    grads[0](0, 0) = 1.0;
    rmsprop_step(params, grads, state, cfg);
    CHECK(params.tensors[0](0, 0) != before.tensors[0](0, 0));
    CHECK(params.tensors[0](1, 1) == before.tensors[0](1, 1));
  }
}

TEST_CASE("analytic BPTT gradients agree with central finite differences") {
  for (CellKind kind : kAllKinds) {
    const GradCheckResult check = gradient_check(kind, 8, 5, 7, 4, 1);
    CAPTURE(rnn::to_string(kind));
    CHECK(check.max_rel_error < 1e-4);
  }
}

TEST_CASE("a zero model with half targets has zero gradients") {
  rnn::CellParams params = rnn::init_params(CellKind::gru, 6, 4, 3);
  for (auto& t : params.tensors) t.setZero();

  corpus::Batch batch;
  batch.batch_size = 2;
  batch.seq_len = 5;
  for (int t = 0; t < 5; ++t) {
    batch.inputs.push_back(Matrix::Constant(6, 2, 0.5));
    batch.targets.push_back(Matrix::Constant(6, 2, 0.5));
  }

  ObjectiveConfig cfg;
  const BpttResult result = bptt_gradients(params, batch, cfg, 100);
  CHECK(result.gradients[static_cast<size_t>(params.index_of("b_out"))].isZero(0.0));
  for (const Matrix& g : result.gradients) CHECK(g.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the batch gradient is the mean of per-sequence gradients") {
  const rnn::CellParams params = rnn::init_params(CellKind::lstm, 6, 4, 11);

  std::vector<corpus::Piece> pieces;
  pieces.push_back(tonal_walk_piece("grad", 64, 6, 5));
  std::mt19937_64 rng(17);
  const corpus::Batch batch = corpus::sample_batch(pieces, 3, 10, rng);

  ObjectiveConfig cfg;
  cfg.epsilon = 0.8;
  const BpttResult whole = bptt_gradients(params, batch, cfg, 100);

  Gradients mean = zeros_like(params);
  for (int s = 0; s < 3; ++s) {
    const BpttResult one =
        bptt_gradients(params, single_sequence_batch(batch, s), cfg, 100);
    for (size_t i = 0; i < mean.size(); ++i) mean[i] += one.gradients[i] / 3.0;
  }
  for (size_t i = 0; i < mean.size(); ++i)
    CHECK((mean[i] - whole.gradients[i]).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("bptt rejects windows longer than the truncation") {
  const rnn::CellParams params = rnn::init_params(CellKind::vanilla, 4, 3, 0);
  corpus::Batch batch;
  batch.batch_size = 1;
  batch.seq_len = 8;
  for (int t = 0; t < 8; ++t) {
    batch.inputs.push_back(Matrix::Constant(4, 1, 0.4));
    batch.targets.push_back(Matrix::Constant(4, 1, 0.6));
  }
  CHECK_THROWS(bptt_gradients(params, batch, ObjectiveConfig{}, 7));
  CHECK_NOTHROW(bptt_gradients(params, batch, ObjectiveConfig{}, 8));
}

TEST_CASE("evaluate_mce of a zero model is the constant-prediction entropy") {
  rnn::CellParams params = rnn::init_params(CellKind::vanilla, 5, 3, 2);
  for (auto& t : params.tensors) t.setZero();

  std::vector<corpus::Piece> pieces;
  pieces.push_back(tonal_walk_piece("mce_a", 20, 5, 1));
  pieces.push_back(tonal_walk_piece("mce_b", 30, 5, 2));

  const double mce = evaluate_mce(params, pieces, ObjectiveConfig{});
  CHECK(std::abs(mce - 5 * std::log(2.0)) < 1e-9);

  std::vector<corpus::Piece> reversed{pieces[1], pieces[0]};
  CHECK(evaluate_mce(params, reversed, ObjectiveConfig{}) ==
        doctest::Approx(mce).epsilon(1e-15));

  std::vector<corpus::Piece> two;
  two.push_back(tonal_walk_piece("mce_c", 2, 5, 3));
  const auto& frames = two.front().spectrogram.frames;
  rnn::RnnState state = rnn::RnnState::zeros(params, 1);
  const Vector y = rnn::step(params, state, frames[0].values);
  CHECK(evaluate_mce(params, two, ObjectiveConfig{}) ==
        doctest::Approx(cross_entropy(y, frames[1].values, 1e-7)).epsilon(1e-12));
}

TEST_CASE("train_model validates patience and reproduces itself bit-exactly") {
  std::vector<corpus::Piece> pieces;
  pieces.push_back(tonal_walk_piece("train", 80, 6, 21));
  std::vector<corpus::Piece> test;
  test.push_back(tonal_walk_piece("test", 40, 6, 22));

  ObjectiveConfig objective;
  objective.epsilon =
      calibrate_epsilon(collect_transition_changes(pieces), objective.quantile);

  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.seq_len = 16;
  cfg.max_epochs = 3;
  cfg.seed = 13;

  SUBCASE("patience below one is rejected") {
    TrainConfig bad = cfg;
    bad.patience = 0;
    CHECK_THROWS(train_model(CellKind::gru, 5, pieces, test, objective, bad));
  }

  SUBCASE("identical seeds give bit-identical runs") {
    const TrainResult a = train_model(CellKind::gru, 5, pieces, test, objective, cfg);
    const TrainResult b = train_model(CellKind::gru, 5, pieces, test, objective, cfg);
    REQUIRE(a.report.epochs.size() == b.report.epochs.size());
    for (size_t e = 0; e < a.report.epochs.size(); ++e) {
      CHECK(a.report.epochs[e].train_weighted_ce == b.report.epochs[e].train_weighted_ce);
      CHECK(a.report.epochs[e].test_mce == b.report.epochs[e].test_mce);
    }
    for (size_t i = 0; i < a.best_params.tensors.size(); ++i)
      CHECK(a.best_params.tensors[i] == b.best_params.tensors[i]);
    CHECK(a.report.stop_reason == "max_epochs");
  }

  SUBCASE("the reported best MCE is the minimum of the trace") {
    const TrainResult r = train_model(CellKind::gru, 5, pieces, test, objective, cfg);
    double lowest = r.report.epochs.front().test_mce;
    for (const auto& e : r.report.epochs) lowest = std::min(lowest, e.test_mce);
    CHECK(r.report.best_test_mce == lowest);
    CHECK(r.report.epochs[static_cast<size_t>(r.report.best_epoch)].test_mce == lowest);
  }
}

TEST_CASE("training shrinks the objective on an overfit-scale task") {
  // deterministic cycle: every transition is learnable
  corpus::Piece piece;
  piece.piece_id = "overfit";
  for (int t = 0; t < 150; ++t) {
    dsp::CqtFrame frame;
    frame.center_time = 0.25 * t;
    frame.values = Vector::Zero(8);
    frame.values[(t / 3) % 8] = 1.0;
    frame.values[((t / 3) + 3) % 8] = 0.5;
    piece.spectrogram.frames.push_back(std::move(frame));
  }
  std::vector<corpus::Piece> pieces{piece};

  ObjectiveConfig objective;
  objective.epsilon =
      calibrate_epsilon(collect_transition_changes(pieces), objective.quantile);

  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.seq_len = 24;
  cfg.max_epochs = 40;
  cfg.learning_rate = 1e-2;
  cfg.seed = 3;

  const TrainResult r =
      train_model(CellKind::gru, 8, pieces, pieces, objective, cfg);
  CHECK(r.report.epochs.back().train_weighted_ce <
        0.5 * r.report.epochs.front().train_weighted_ce);
}
