#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "tonalexp/rnn/cell.hpp"

using namespace tonalexp;
using namespace tonalexp::rnn;

namespace {

constexpr CellKind kAllKinds[] = {CellKind::vanilla, CellKind::lstm,
                                  CellKind::gru, CellKind::vanilla_mi,
                                  CellKind::lstm_mi};

std::vector<Vector> random_sequence(Index n, int length, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<Vector> seq;
  for (int t = 0; t < length; ++t) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = dist(rng);
    seq.push_back(std::move(v));
  }
  return seq;
}

CellParams zero_params(CellKind kind, Index n, Index h) {
  CellParams p = init_params(kind, n, h, 0);
  for (auto& t : p.tensors) t.setZero();
  return p;
}

} // namespace

TEST_CASE("init_params is deterministic and honors the stated constants") {
  for (CellKind kind : kAllKinds) {
    const CellParams a = init_params(kind, 12, 7, 42);
    const CellParams b = init_params(kind, 12, 7, 42);
    REQUIRE(a.tensors.size() == b.tensors.size());
    for (size_t i = 0; i < a.tensors.size(); ++i)
      CHECK(a.tensors[i] == b.tensors[i]);

    const CellParams c = init_params(kind, 12, 7, 43);
    bool differs = false;
    for (size_t i = 0; i < a.tensors.size(); ++i)
      if (a.tensors[i] != c.tensors[i]) differs = true;
    CHECK(differs);
  }

  const CellParams lstm = init_params(CellKind::lstm, 6, 4, 1);
  CHECK(lstm.at("b_f") == Matrix::Ones(4, 1));
  CHECK(lstm.at("b_i") == Matrix::Zero(4, 1));

  const CellParams mi = init_params(CellKind::vanilla_mi, 6, 4, 1);
  CHECK(mi.at("alpha") == Matrix::Ones(4, 1));
  CHECK(mi.at("beta1") == Matrix::Constant(4, 1, 0.5));
  CHECK(mi.at("beta2") == Matrix::Constant(4, 1, 0.5));
}

TEST_CASE("recurrent weights are initialized orthogonal") {
  const CellParams p = init_params(CellKind::gru, 10, 6, 3);
  for (const char* name : {"U_z", "U_r", "U_c"}) {
    const Matrix& u = p.at(name);
    const Matrix gram = u.transpose() * u;
    CHECK((gram - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("vanilla tensors carry exactly the declared shapes") {
  const CellParams p = init_params(CellKind::vanilla, 334, 75, 0);
  REQUIRE(p.names == std::vector<std::string>{"W_in", "W_rec", "b", "W_out", "b_out"});
  CHECK(p.at("W_in").rows() == 75);
  CHECK(p.at("W_in").cols() == 334);
  CHECK(p.at("W_rec").rows() == 75);
  CHECK(p.at("W_rec").cols() == 75);
  CHECK(p.at("b").rows() == 75);
  CHECK(p.at("W_out").rows() == 334);
  CHECK(p.at("W_out").cols() == 75);
  CHECK(p.at("b_out").rows() == 334);
}

TEST_CASE("param_count enumerates the layout") {
  // oracle: sum of the declared shapes
  for (CellKind kind : kAllKinds) {
    Index expected = 0;
    for (const auto& [name, shape] : tensor_layout(kind, 13, 5))
      expected += shape.first * shape.second;
    CHECK(param_count(kind, 13, 5) == expected);

    const CellParams p = init_params(kind, 13, 5, 9);
    Index allocated = 0;
    for (const auto& t : p.tensors) allocated += t.size();
    CHECK(allocated == expected);
  }

  CHECK(param_count(CellKind::vanilla, 334, 75) ==
        75 * 334 + 75 * 75 + 75 + 334 * 75 + 334);
  CHECK(param_count(CellKind::vanilla, 334, 75) == 56134);

  // LSTM quadruples the recurrent block of the vanilla cell.
  const Index vanilla_rec = 75 * 334 + 75 * 75 + 75;
  CHECK(param_count(CellKind::lstm, 334, 75) == 4 * vanilla_rec + 334 * 75 + 334);

  // MI adds 3H per aggregation site.
  CHECK(param_count(CellKind::vanilla_mi, 334, 75) ==
        param_count(CellKind::vanilla, 334, 75) + 3 * 75);
  CHECK(param_count(CellKind::lstm_mi, 334, 75) ==
        param_count(CellKind::lstm, 334, 75) + 4 * 3 * 75);
}

TEST_CASE("mi_aggregate reduces to its limiting forms") {
  const Index h = 5, s = 3;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> dist;
  Matrix a(h, s), b(h, s);
  for (Index i = 0; i < a.size(); ++i) a.data()[i] = dist(rng);
  for (Index i = 0; i < b.size(); ++i) b.data()[i] = dist(rng);

  const Vector zero = Vector::Zero(h), one = Vector::Ones(h);

  CHECK((mi_aggregate(a, b, zero, one, one, zero) - (a + b)).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK((mi_aggregate(a, b, one, zero, zero, zero) -
         (a.array() * b.array()).matrix())
            .cwiseAbs()
            .maxCoeff() == 0.0);

  Vector bias(h);
  bias << 1, 2, 3, 4, 5;
  const Matrix out = mi_aggregate(Matrix::Zero(h, s), b, one, one, zero, bias);
  for (Index c = 0; c < s; ++c) CHECK(out.col(c) == bias);

  CHECK_THROWS(mi_aggregate(a, Matrix::Zero(h + 1, s), one, one, one, zero));
}

TEST_CASE("a zero-weight cell predicts one half everywhere") {
  for (CellKind kind : kAllKinds) {
    CellParams p = zero_params(kind, 9, 4);
    RnnState state = RnnState::zeros(p);
    const Vector x = random_sequence(9, 1, 4).front();
    const Vector y = step(p, state, x);
    CHECK((y.array() == 0.5).all());
    CHECK(state.hidden.isZero(0.0));
  }
}

TEST_CASE("without recurrence the state history is irrelevant") {
  CellParams p = init_params(CellKind::vanilla, 9, 4, 17);
  p.at("W_rec").setZero();

  const auto seq = random_sequence(9, 2, 5);
  RnnState fresh = RnnState::zeros(p);
  const Vector from_zero = step(p, fresh, seq[1]);

  RnnState warmed = RnnState::zeros(p);
  step(p, warmed, seq[0]);
  const Vector from_history = step(p, warmed, seq[1]);

  CHECK((from_zero - from_history).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("recurrence makes repeated inputs produce distinct outputs") {
  for (CellKind kind : kAllKinds) {
    const CellParams p = init_params(kind, 9, 4, 1);
    const Vector x = random_sequence(9, 1, 2).front();
    RnnState state = RnnState::zeros(p);
    const Vector y1 = step(p, state, x);
    const Vector y2 = step(p, state, x);
    CHECK((y1 - y2).cwiseAbs().maxCoeff() > 0.0);
  }
}

TEST_CASE("forward applies step from a zero state, left to right") {
  for (CellKind kind : kAllKinds) {
    const CellParams p = init_params(kind, 7, 5, 23);
    const auto seq = random_sequence(7, 9, 31);

    const ForwardResult full = forward(p, seq);
    REQUIRE(full.predictions.size() == seq.size());

    // prefix consistency (causality)
    const std::vector<Vector> prefix(seq.begin(), seq.begin() + 4);
    const ForwardResult head = forward(p, prefix);
    for (size_t t = 0; t < prefix.size(); ++t)
      CHECK(head.predictions[t] == full.predictions[t]);

    // range invariants
    for (const Vector& y : full.predictions) {
      CHECK((y.array() > 0.0).all());
      CHECK((y.array() < 1.0).all());
    }
    CHECK((full.final_state.hidden.array().abs() < 1.0).all());
  }

  const CellParams p = init_params(CellKind::gru, 7, 5, 23);
  const auto one = random_sequence(7, 1, 3);
  CHECK(forward(p, one).predictions.size() == 1);
  CHECK_THROWS(forward(p, std::vector<Vector>{}));
}

TEST_CASE("an MI cell with additive gains matches its additive counterpart") {
  const Index n = 8, h = 5;
  const auto seq = random_sequence(n, 6, 77);

  for (auto [mi_kind, add_kind] :
       {std::pair{CellKind::vanilla_mi, CellKind::vanilla},
        std::pair{CellKind::lstm_mi, CellKind::lstm}}) {
    const CellParams add = init_params(add_kind, n, h, 5);
    CellParams mi = init_params(mi_kind, n, h, 6);
    for (size_t i = 0; i < mi.names.size(); ++i) {
      const std::string& name = mi.names[i];
      if (name.starts_with("alpha"))
        mi.tensors[i].setZero();
      else if (name.starts_with("beta"))
        mi.tensors[i].setOnes();
      else
        mi.tensors[i] = add.at(name == "W_in"      ? "W_in"
                               : name == "W_rec"   ? "W_rec"
                                                   : name);
    }

    const ForwardResult a = forward(add, seq);
    const ForwardResult b = forward(mi, seq);
    for (size_t t = 0; t < seq.size(); ++t)
      CHECK((a.predictions[t] - b.predictions[t]).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("forward is a pure function of its inputs") {
  const CellParams p = init_params(CellKind::lstm_mi, 6, 4, 99);
  const auto seq = random_sequence(6, 11, 100);
  const ForwardResult a = forward(p, seq);
  const ForwardResult b = forward(p, seq);
  for (size_t t = 0; t < seq.size(); ++t)
    CHECK(a.predictions[t] == b.predictions[t]);
  CHECK(a.final_state.hidden == b.final_state.hidden);
}

TEST_CASE("cell kinds round-trip through their names") {
  for (CellKind kind : kAllKinds)
    CHECK(cell_kind_from_string(to_string(kind)) == kind);
  CHECK_THROWS(cell_kind_from_string("gru_mi"));
}
