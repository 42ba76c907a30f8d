#include "tonalexp/rnn/cell.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace tonalexp::rnn {

namespace {

Matrix sigmoid(const Matrix& z) {
  return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

Matrix with_bias(Matrix m, const Vector& b) {
  m.colwise() += b;
  return m;
}

constexpr const char* kLstmGates[] = {"i", "f", "g", "o"};
constexpr const char* kGruGates[] = {"z", "r", "c"};

} // namespace

std::string to_string(CellKind kind) {
  switch (kind) {
    case CellKind::vanilla: return "vanilla";
    case CellKind::lstm: return "lstm";
    case CellKind::gru: return "gru";
    case CellKind::vanilla_mi: return "vanilla_mi";
    case CellKind::lstm_mi: return "lstm_mi";
  }
  throw std::invalid_argument("unknown cell kind");
}

CellKind cell_kind_from_string(std::string_view name) {
  if (name == "vanilla") return CellKind::vanilla;
  if (name == "lstm") return CellKind::lstm;
  if (name == "gru") return CellKind::gru;
  if (name == "vanilla_mi") return CellKind::vanilla_mi;
  if (name == "lstm_mi") return CellKind::lstm_mi;
  throw std::invalid_argument("unknown cell kind: " + std::string(name));
}

int CellParams::index_of(std::string_view name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  throw std::out_of_range("no tensor named " + std::string(name));
}

RnnState RnnState::zeros(const CellParams& params, Index batch) {
  RnnState state;
  state.hidden = Matrix::Zero(params.hidden_size, batch);
  if (params.kind == CellKind::lstm || params.kind == CellKind::lstm_mi)
    state.cell = Matrix::Zero(params.hidden_size, batch);
  return state;
}

std::vector<std::pair<std::string, std::pair<Index, Index>>> tensor_layout(
    CellKind kind, Index n, Index h) {
  using Shape = std::pair<Index, Index>;
  std::vector<std::pair<std::string, Shape>> layout;
  auto vec = [h](const std::string& name) {
    return std::pair{name, Shape{h, 1}};
  };
  auto site = [&](const std::string& suffix, bool mi) {
    layout.push_back({"W" + suffix, Shape{h, n}});
    layout.push_back({"U" + suffix, Shape{h, h}});
    if (mi) {
      layout.push_back(vec("alpha" + suffix));
      layout.push_back(vec("beta1" + suffix));
      layout.push_back(vec("beta2" + suffix));
    }
    layout.push_back(vec("b" + suffix));
  };

  switch (kind) {
    case CellKind::vanilla:
    case CellKind::vanilla_mi: {
      layout.push_back({"W_in", Shape{h, n}});
      layout.push_back({"W_rec", Shape{h, h}});
      if (kind == CellKind::vanilla_mi) {
        layout.push_back(vec("alpha"));
        layout.push_back(vec("beta1"));
        layout.push_back(vec("beta2"));
      }
      layout.push_back(vec("b"));
      break;
    }
    case CellKind::lstm:
    case CellKind::lstm_mi:
      for (const char* gate : kLstmGates)
        site(std::string("_") + gate, kind == CellKind::lstm_mi);
      break;
    case CellKind::gru:
      for (const char* gate : kGruGates) site(std::string("_") + gate, false);
      break;
  }
  layout.push_back({"W_out", Shape{n, h}});
  layout.push_back({"b_out", Shape{n, 1}});
  return layout;
}

Index param_count(CellKind kind, Index input_size, Index hidden_size) {
  Index total = 0;
  for (const auto& [name, shape] : tensor_layout(kind, input_size, hidden_size))
    total += shape.first * shape.second;
  return total;
}

namespace {

Matrix orthogonal(Index h, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(h, h);
  for (Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(h, h);
  const Matrix r = qr.matrixQR();
  for (Index j = 0; j < h; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  return q;
}

} // namespace

CellParams init_params(CellKind kind, Index input_size, Index hidden_size,
                       uint64_t seed) {
  if (input_size < 1 || hidden_size < 1)
    throw std::invalid_argument("sizes must be positive");

  std::mt19937_64 rng(seed);
  CellParams params;
  params.kind = kind;
  params.input_size = input_size;
  params.hidden_size = hidden_size;

  for (const auto& [name, shape] : tensor_layout(kind, input_size, hidden_size)) {
    params.names.push_back(name);
    Matrix tensor;
    const bool recurrent = name.starts_with("U") || name == "W_rec";
    if (recurrent) {
      tensor = orthogonal(hidden_size, rng);
    } else if (name.starts_with("W")) {
      const double bound =
          std::sqrt(6.0 / static_cast<double>(shape.first + shape.second));
      std::uniform_real_distribution<double> uniform(-bound, bound);
      tensor.resize(shape.first, shape.second);
      for (Index i = 0; i < tensor.size(); ++i) tensor.data()[i] = uniform(rng);
    } else if (name.starts_with("alpha")) {
      tensor = Matrix::Ones(shape.first, shape.second);
    } else if (name.starts_with("beta")) {
      tensor = Matrix::Constant(shape.first, shape.second, 0.5);
    } else if (name == "b_f") {
      tensor = Matrix::Ones(shape.first, shape.second);  // open forget gate
    } else {
      tensor = Matrix::Zero(shape.first, shape.second);
    }
    params.tensors.push_back(std::move(tensor));
  }
  return params;
}

Matrix mi_aggregate(const Matrix& a, const Matrix& b, const Vector& alpha,
                    const Vector& beta1, const Vector& beta2,
                    const Vector& bias) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("mi_aggregate: operand shape mismatch");
  if (alpha.size() != a.rows() || beta1.size() != a.rows() ||
      beta2.size() != a.rows() || bias.size() != a.rows())
    throw std::invalid_argument("mi_aggregate: gain length mismatch");

  Matrix out = (a.array() * b.array()).colwise() * alpha.array();
  out.array() += a.array().colwise() * beta1.array();
  out.array() += b.array().colwise() * beta2.array();
  out.colwise() += bias;
  return out;
}

namespace {

// Pre-activation of one aggregation site: additive Wx + Uh + b, or the MI
// form when the site carries gain vectors.
Matrix site_preactivation(const CellParams& p, const std::string& suffix,
                          const Matrix& x, const Matrix& h,
                          const std::string& w_name, const std::string& u_name) {
  const Matrix wx = p.at(w_name) * x;
  const Matrix uh = p.at(u_name) * h;
  if (p.kind == CellKind::vanilla_mi || p.kind == CellKind::lstm_mi)
    return mi_aggregate(wx, uh, p.at("alpha" + suffix).col(0),
                        p.at("beta1" + suffix).col(0),
                        p.at("beta2" + suffix).col(0), p.at("b" + suffix).col(0));
  return with_bias(wx + uh, p.at("b" + suffix).col(0));
}

} // namespace

Matrix step(const CellParams& p, RnnState& state, const Matrix& x) {
  if (x.rows() != p.input_size)
    throw std::invalid_argument("input rows do not match the cell input size");
  if (state.hidden.rows() != p.hidden_size || state.hidden.cols() != x.cols())
    throw std::invalid_argument("state shape does not match the cell/batch");

  switch (p.kind) {
    case CellKind::vanilla:
    case CellKind::vanilla_mi: {
      const Matrix wx = p.at("W_in") * x;
      const Matrix uh = p.at("W_rec") * state.hidden;
      Matrix a;
      if (p.kind == CellKind::vanilla_mi)
        a = mi_aggregate(wx, uh, p.at("alpha").col(0), p.at("beta1").col(0),
                         p.at("beta2").col(0), p.at("b").col(0));
      else
        a = with_bias(wx + uh, p.at("b").col(0));
      state.hidden = a.array().tanh().matrix();
      break;
    }
    case CellKind::lstm:
    case CellKind::lstm_mi: {
      if (state.cell.rows() != p.hidden_size || state.cell.cols() != x.cols())
        throw std::invalid_argument("LSTM state is missing its memory cell");
      const Matrix i = sigmoid(site_preactivation(p, "_i", x, state.hidden, "W_i", "U_i"));
      const Matrix f = sigmoid(site_preactivation(p, "_f", x, state.hidden, "W_f", "U_f"));
      const Matrix g = site_preactivation(p, "_g", x, state.hidden, "W_g", "U_g")
                           .array().tanh().matrix();
      const Matrix o = sigmoid(site_preactivation(p, "_o", x, state.hidden, "W_o", "U_o"));
      state.cell = (f.array() * state.cell.array() + i.array() * g.array()).matrix();
      state.hidden = (o.array() * state.cell.array().tanh()).matrix();
      break;
    }
    case CellKind::gru: {
      const Matrix z = sigmoid(site_preactivation(p, "_z", x, state.hidden, "W_z", "U_z"));
      const Matrix r = sigmoid(site_preactivation(p, "_r", x, state.hidden, "W_r", "U_r"));
      const Matrix rh = (r.array() * state.hidden.array()).matrix();
      const Matrix c = with_bias(p.at("W_c") * x + p.at("U_c") * rh, p.at("b_c").col(0))
                           .array().tanh().matrix();
      state.hidden =
          ((1.0 - z.array()) * state.hidden.array() + z.array() * c.array())
              .matrix();
      break;
    }
  }
  return sigmoid(with_bias(p.at("W_out") * state.hidden, p.at("b_out").col(0)));
}

PredictionFrame step(const CellParams& p, RnnState& state, const Vector& x) {
  return step(p, state, Matrix(x)).col(0);
}

ForwardResult forward(const CellParams& p, const std::vector<Vector>& inputs) {
  if (inputs.empty()) throw std::invalid_argument("forward needs a nonempty sequence");
  ForwardResult result;
  result.final_state = RnnState::zeros(p, 1);
  result.predictions.reserve(inputs.size());
  for (const Vector& x : inputs)
    result.predictions.push_back(step(p, result.final_state, x));
  return result;
}

ForwardResult forward(const CellParams& p, const dsp::Spectrogram& spectrogram) {
  std::vector<Vector> inputs;
  inputs.reserve(spectrogram.frames.size());
  for (const auto& frame : spectrogram.frames) inputs.push_back(frame.values);
  return forward(p, inputs);
}

} // namespace tonalexp::rnn
