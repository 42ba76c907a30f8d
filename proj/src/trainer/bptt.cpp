#include "tonalexp/trainer/bptt.hpp"

#include <array>
#include <stdexcept>

namespace tonalexp::trainer {

using rnn::CellKind;
using rnn::CellParams;

namespace {

using RowVector = Eigen::RowVectorXd;

Matrix sigmoid(const Matrix& z) {
  return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

// 1 x S transition weights of one step, a function of the data only.
RowVector transition_weights(const Matrix& x_t, const Matrix& x_next,
                             const ObjectiveConfig& cfg) {
  const RowVector change = (x_next - x_t).cwiseAbs().colwise().sum();
  RowVector w(change.size());
  for (Index s = 0; s < change.size(); ++s)
    w[s] = change[s] > cfg.epsilon ? 1.0 : cfg.beta;
  return w;
}

// 1 x S per-sequence cross-entropy of one step, predictions clamped.
RowVector column_ce(const Matrix& y, const Matrix& target, double eta) {
  const auto clamped = y.array().min(1.0 - eta).max(eta);
  return -(target.array() * clamped.log() +
           (1.0 - target.array()) * (1.0 - clamped).log())
              .colwise()
              .sum();
}

// d(CE)/d(output pre-activation): (y - x) where the clamp is inactive,
// zero where it saturates the loss.
Matrix output_delta(const Matrix& y, const Matrix& target, double eta) {
  return ((y.array() > eta && y.array() < 1.0 - eta)
              .select((y - target).array(), 0.0))
      .matrix();
}

struct Accumulator {
  const CellParams& p;
  Gradients grads;

  explicit Accumulator(const CellParams& params)
      : p(params), grads(zeros_like(params)) {}

  Matrix& g(const std::string& name) {
    return grads[static_cast<size_t>(p.index_of(name))];
  }
};

// Backward through one MI aggregation site a = alpha.*wx.*uh + beta1.*wx +
// beta2.*uh + b. Returns (d_wx, d_uh) and accumulates the gain gradients.
std::pair<Matrix, Matrix> mi_site_backward(Accumulator& acc,
                                           const std::string& suffix,
                                           const Matrix& da, const Matrix& wx,
                                           const Matrix& uh) {
  const Vector alpha = acc.p.at("alpha" + suffix).col(0);
  const Vector beta1 = acc.p.at("beta1" + suffix).col(0);
  const Vector beta2 = acc.p.at("beta2" + suffix).col(0);

  acc.g("alpha" + suffix) += (da.array() * wx.array() * uh.array())
                                 .rowwise()
                                 .sum()
                                 .matrix();
  acc.g("beta1" + suffix) += (da.array() * wx.array()).rowwise().sum().matrix();
  acc.g("beta2" + suffix) += (da.array() * uh.array()).rowwise().sum().matrix();
  acc.g("b" + suffix) += da.rowwise().sum();

  Matrix gain_wx = (uh.array().colwise() * alpha.array()).matrix();
  gain_wx.colwise() += beta1;
  Matrix gain_uh = (wx.array().colwise() * alpha.array()).matrix();
  gain_uh.colwise() += beta2;

  Matrix d_wx = (da.array() * gain_wx.array()).matrix();
  Matrix d_uh = (da.array() * gain_uh.array()).matrix();
  return {std::move(d_wx), std::move(d_uh)};
}

// ---------------------------------------------------------------------------
// vanilla / vanilla_mi

struct VanillaCache {
  std::vector<Matrix> h;       // h[t+1] = hidden after step t; h[0] = 0
  std::vector<Matrix> wx, uh;  // MI only
  std::vector<Matrix> y;
};

VanillaCache vanilla_forward(const CellParams& p, const corpus::Batch& batch) {
  const bool mi = p.kind == CellKind::vanilla_mi;
  const Index s = batch.batch_size;
  const size_t t_len = batch.inputs.size();

  VanillaCache cache;
  cache.h.resize(t_len + 1);
  cache.y.resize(t_len);
  if (mi) {
    cache.wx.resize(t_len);
    cache.uh.resize(t_len);
  }
  cache.h[0] = Matrix::Zero(p.hidden_size, s);

  for (size_t t = 0; t < t_len; ++t) {
    Matrix wx = p.at("W_in") * batch.inputs[t];
    Matrix uh = p.at("W_rec") * cache.h[t];
    Matrix a;
    if (mi) {
      a = rnn::mi_aggregate(wx, uh, p.at("alpha").col(0), p.at("beta1").col(0),
                            p.at("beta2").col(0), p.at("b").col(0));
      cache.wx[t] = std::move(wx);
      cache.uh[t] = std::move(uh);
    } else {
      a = wx + uh;
      a.colwise() += p.at("b").col(0);
    }
    cache.h[t + 1] = a.array().tanh().matrix();
    Matrix z = p.at("W_out") * cache.h[t + 1];
    z.colwise() += p.at("b_out").col(0);
    cache.y[t] = sigmoid(z);
  }
  return cache;
}

void vanilla_backward(Accumulator& acc, const corpus::Batch& batch,
                      const VanillaCache& cache,
                      const std::vector<Matrix>& delta_h_out) {
  const CellParams& p = acc.p;
  const bool mi = p.kind == CellKind::vanilla_mi;
  Matrix dh = Matrix::Zero(p.hidden_size, batch.batch_size);

  for (int t = static_cast<int>(batch.inputs.size()) - 1; t >= 0; --t) {
    const size_t ut = static_cast<size_t>(t);
    dh += delta_h_out[ut];
    const Matrix da =
        (dh.array() * (1.0 - cache.h[ut + 1].array().square())).matrix();

    if (mi) {
      auto [d_wx, d_uh] = mi_site_backward(acc, "", da, cache.wx[ut], cache.uh[ut]);
      acc.g("W_in").noalias() += d_wx * batch.inputs[ut].transpose();
      acc.g("W_rec").noalias() += d_uh * cache.h[ut].transpose();
      dh.noalias() = p.at("W_rec").transpose() * d_uh;
    } else {
      acc.g("W_in").noalias() += da * batch.inputs[ut].transpose();
      acc.g("W_rec").noalias() += da * cache.h[ut].transpose();
      acc.g("b") += da.rowwise().sum();
      dh.noalias() = p.at("W_rec").transpose() * da;
    }
  }
}

// ---------------------------------------------------------------------------
// lstm / lstm_mi

struct LstmCache {
  std::vector<Matrix> h, c;               // states, index t = before step t
  std::vector<Matrix> i, f, g, o;         // gate activations
  std::vector<std::array<Matrix, 4>> wx;  // MI only, per gate
  std::vector<std::array<Matrix, 4>> uh;
  std::vector<Matrix> y;
};

constexpr const char* kLstmSuffix[] = {"_i", "_f", "_g", "_o"};

LstmCache lstm_forward(const CellParams& p, const corpus::Batch& batch) {
  const bool mi = p.kind == CellKind::lstm_mi;
  const Index s = batch.batch_size;
  const size_t t_len = batch.inputs.size();

  LstmCache cache;
  cache.h.resize(t_len + 1);
  cache.c.resize(t_len + 1);
  cache.i.resize(t_len);
  cache.f.resize(t_len);
  cache.g.resize(t_len);
  cache.o.resize(t_len);
  cache.y.resize(t_len);
  if (mi) {
    cache.wx.resize(t_len);
    cache.uh.resize(t_len);
  }
  cache.h[0] = Matrix::Zero(p.hidden_size, s);
  cache.c[0] = Matrix::Zero(p.hidden_size, s);

  for (size_t t = 0; t < t_len; ++t) {
    std::array<Matrix, 4> pre;
    for (int gate = 0; gate < 4; ++gate) {
      const std::string suffix = kLstmSuffix[gate];
      Matrix wx = p.at("W" + suffix) * batch.inputs[t];
      Matrix uh = p.at("U" + suffix) * cache.h[t];
      if (mi) {
        pre[static_cast<size_t>(gate)] = rnn::mi_aggregate(
            wx, uh, p.at("alpha" + suffix).col(0), p.at("beta1" + suffix).col(0),
            p.at("beta2" + suffix).col(0), p.at("b" + suffix).col(0));
        cache.wx[t][static_cast<size_t>(gate)] = std::move(wx);
        cache.uh[t][static_cast<size_t>(gate)] = std::move(uh);
      } else {
        pre[static_cast<size_t>(gate)] = wx + uh;
        pre[static_cast<size_t>(gate)].colwise() += p.at("b" + suffix).col(0);
      }
    }
    cache.i[t] = sigmoid(pre[0]);
    cache.f[t] = sigmoid(pre[1]);
    cache.g[t] = pre[2].array().tanh().matrix();
    cache.o[t] = sigmoid(pre[3]);

    cache.c[t + 1] = (cache.f[t].array() * cache.c[t].array() +
                      cache.i[t].array() * cache.g[t].array())
                         .matrix();
    cache.h[t + 1] =
        (cache.o[t].array() * cache.c[t + 1].array().tanh()).matrix();

    Matrix z = p.at("W_out") * cache.h[t + 1];
    z.colwise() += p.at("b_out").col(0);
    cache.y[t] = sigmoid(z);
  }
  return cache;
}

void lstm_backward(Accumulator& acc, const corpus::Batch& batch,
                   const LstmCache& cache,
                   const std::vector<Matrix>& delta_h_out) {
  const CellParams& p = acc.p;
  const bool mi = p.kind == CellKind::lstm_mi;
  Matrix dh = Matrix::Zero(p.hidden_size, batch.batch_size);
  Matrix dc = Matrix::Zero(p.hidden_size, batch.batch_size);

  for (int t = static_cast<int>(batch.inputs.size()) - 1; t >= 0; --t) {
    const size_t ut = static_cast<size_t>(t);
    dh += delta_h_out[ut];

    const auto tanh_c = cache.c[ut + 1].array().tanh();
    const Matrix d_o = (dh.array() * tanh_c).matrix();
    dc.array() += dh.array() * cache.o[ut].array() * (1.0 - tanh_c.square());

    const Matrix d_f = (dc.array() * cache.c[ut].array()).matrix();
    const Matrix d_i = (dc.array() * cache.g[ut].array()).matrix();
    const Matrix d_g = (dc.array() * cache.i[ut].array()).matrix();

    const std::array<Matrix, 4> da = {
        (d_i.array() * cache.i[ut].array() * (1.0 - cache.i[ut].array())).matrix(),
        (d_f.array() * cache.f[ut].array() * (1.0 - cache.f[ut].array())).matrix(),
        (d_g.array() * (1.0 - cache.g[ut].array().square())).matrix(),
        (d_o.array() * cache.o[ut].array() * (1.0 - cache.o[ut].array())).matrix()};

    dc = (dc.array() * cache.f[ut].array()).matrix();  // flows to step t-1

    Matrix dh_prev = Matrix::Zero(p.hidden_size, batch.batch_size);
    for (int gate = 0; gate < 4; ++gate) {
      const size_t ug = static_cast<size_t>(gate);
      const std::string suffix = kLstmSuffix[ug];
      if (mi) {
        auto [d_wx, d_uh] = mi_site_backward(acc, suffix, da[ug],
                                             cache.wx[ut][ug], cache.uh[ut][ug]);
        acc.g("W" + suffix).noalias() += d_wx * batch.inputs[ut].transpose();
        acc.g("U" + suffix).noalias() += d_uh * cache.h[ut].transpose();
        dh_prev.noalias() += p.at("U" + suffix).transpose() * d_uh;
      } else {
        acc.g("W" + suffix).noalias() += da[ug] * batch.inputs[ut].transpose();
        acc.g("U" + suffix).noalias() += da[ug] * cache.h[ut].transpose();
        acc.g("b" + suffix) += da[ug].rowwise().sum();
        dh_prev.noalias() += p.at("U" + suffix).transpose() * da[ug];
      }
    }
    dh = std::move(dh_prev);
  }
}

// ---------------------------------------------------------------------------
// gru

struct GruCache {
  std::vector<Matrix> h;        // h[t] = state before step t
  std::vector<Matrix> z, r, c;  // update gate, reset gate, candidate
  std::vector<Matrix> y;
};

GruCache gru_forward(const CellParams& p, const corpus::Batch& batch) {
  const Index s = batch.batch_size;
  const size_t t_len = batch.inputs.size();

  GruCache cache;
  cache.h.resize(t_len + 1);
  cache.z.resize(t_len);
  cache.r.resize(t_len);
  cache.c.resize(t_len);
  cache.y.resize(t_len);
  cache.h[0] = Matrix::Zero(p.hidden_size, s);

  for (size_t t = 0; t < t_len; ++t) {
    Matrix az = p.at("W_z") * batch.inputs[t] + p.at("U_z") * cache.h[t];
    az.colwise() += p.at("b_z").col(0);
    cache.z[t] = sigmoid(az);

    Matrix ar = p.at("W_r") * batch.inputs[t] + p.at("U_r") * cache.h[t];
    ar.colwise() += p.at("b_r").col(0);
    cache.r[t] = sigmoid(ar);

    Matrix ac = p.at("W_c") * batch.inputs[t] +
                p.at("U_c") * (cache.r[t].array() * cache.h[t].array()).matrix();
    ac.colwise() += p.at("b_c").col(0);
    cache.c[t] = ac.array().tanh().matrix();

    cache.h[t + 1] = ((1.0 - cache.z[t].array()) * cache.h[t].array() +
                      cache.z[t].array() * cache.c[t].array())
                         .matrix();

    Matrix out = p.at("W_out") * cache.h[t + 1];
    out.colwise() += p.at("b_out").col(0);
    cache.y[t] = sigmoid(out);
  }
  return cache;
}

void gru_backward(Accumulator& acc, const corpus::Batch& batch,
                  const GruCache& cache,
                  const std::vector<Matrix>& delta_h_out) {
  const CellParams& p = acc.p;
  Matrix dh = Matrix::Zero(p.hidden_size, batch.batch_size);

  for (int t = static_cast<int>(batch.inputs.size()) - 1; t >= 0; --t) {
    const size_t ut = static_cast<size_t>(t);
    dh += delta_h_out[ut];

    const Matrix dz = (dh.array() * (cache.c[ut].array() - cache.h[ut].array()))
                          .matrix();
    const Matrix da_z =
        (dz.array() * cache.z[ut].array() * (1.0 - cache.z[ut].array())).matrix();

    const Matrix dcand = (dh.array() * cache.z[ut].array()).matrix();
    const Matrix da_c =
        (dcand.array() * (1.0 - cache.c[ut].array().square())).matrix();

    Matrix dh_prev = (dh.array() * (1.0 - cache.z[ut].array())).matrix();

    const Matrix drh = p.at("U_c").transpose() * da_c;
    const Matrix dr = (drh.array() * cache.h[ut].array()).matrix();
    dh_prev.array() += drh.array() * cache.r[ut].array();
    const Matrix da_r =
        (dr.array() * cache.r[ut].array() * (1.0 - cache.r[ut].array())).matrix();

    dh_prev.noalias() += p.at("U_z").transpose() * da_z;
    dh_prev.noalias() += p.at("U_r").transpose() * da_r;

    acc.g("W_z").noalias() += da_z * batch.inputs[ut].transpose();
    acc.g("U_z").noalias() += da_z * cache.h[ut].transpose();
    acc.g("b_z") += da_z.rowwise().sum();

    acc.g("W_r").noalias() += da_r * batch.inputs[ut].transpose();
    acc.g("U_r").noalias() += da_r * cache.h[ut].transpose();
    acc.g("b_r") += da_r.rowwise().sum();

    acc.g("W_c").noalias() += da_c * batch.inputs[ut].transpose();
    acc.g("U_c").noalias() +=
        da_c * (cache.r[ut].array() * cache.h[ut].array()).matrix().transpose();
    acc.g("b_c") += da_c.rowwise().sum();

    dh = std::move(dh_prev);
  }
}

// ---------------------------------------------------------------------------

void validate_batch(const corpus::Batch& batch, const CellParams& p,
                    int truncation) {
  if (batch.inputs.empty() || batch.targets.size() != batch.inputs.size())
    throw std::invalid_argument("batch has no aligned input/target steps");
  if (batch.seq_len > truncation)
    throw std::invalid_argument(
        "batch windows exceed the BPTT truncation length");
  if (batch.inputs.front().rows() != p.input_size)
    throw std::invalid_argument("batch bins do not match the cell input size");
}

// Output-layer backward shared by all kinds: accumulates dW_out/db_out and
// returns the per-step deltas flowing into the hidden state.
std::vector<Matrix> output_backward(Accumulator& acc, const corpus::Batch& batch,
                                    const std::vector<Matrix>& h,
                                    const std::vector<Matrix>& y,
                                    const ObjectiveConfig& cfg,
                                    BatchLoss& loss) {
  const CellParams& p = acc.p;
  const size_t t_len = batch.inputs.size();
  const double scale =
      1.0 / (static_cast<double>(batch.batch_size) * static_cast<double>(t_len));

  std::vector<Matrix> delta_h(t_len);
  for (size_t t = 0; t < t_len; ++t) {
    const RowVector w = transition_weights(batch.inputs[t], batch.targets[t], cfg);
    const RowVector ce = column_ce(y[t], batch.targets[t], cfg.output_clamp);
    loss.weighted_ce += scale * (w.array() * ce.array()).sum();
    loss.unweighted_ce += scale * ce.sum();

    Matrix dz = output_delta(y[t], batch.targets[t], cfg.output_clamp);
    dz.array().rowwise() *= w.array() * scale;

    acc.g("W_out").noalias() += dz * h[t + 1].transpose();
    acc.g("b_out") += dz.rowwise().sum();
    delta_h[t].noalias() = p.at("W_out").transpose() * dz;
  }
  return delta_h;
}

} // namespace

Gradients zeros_like(const CellParams& params) {
  Gradients grads;
  grads.reserve(params.tensors.size());
  for (const Matrix& t : params.tensors)
    grads.push_back(Matrix::Zero(t.rows(), t.cols()));
  return grads;
}

BatchLoss batch_objective(const CellParams& params, const corpus::Batch& batch,
                          const ObjectiveConfig& cfg) {
  cfg.validate();
  if (batch.inputs.empty())
    throw std::invalid_argument("empty batch");

  rnn::RnnState state = rnn::RnnState::zeros(params, batch.batch_size);
  BatchLoss loss;
  const double scale = 1.0 / (static_cast<double>(batch.batch_size) *
                              static_cast<double>(batch.inputs.size()));
  for (size_t t = 0; t < batch.inputs.size(); ++t) {
    const Matrix y = rnn::step(params, state, batch.inputs[t]);
    const RowVector w = transition_weights(batch.inputs[t], batch.targets[t], cfg);
    const RowVector ce = column_ce(y, batch.targets[t], cfg.output_clamp);
    loss.weighted_ce += scale * (w.array() * ce.array()).sum();
    loss.unweighted_ce += scale * ce.sum();
  }
  return loss;
}

BpttResult bptt_gradients(const CellParams& params, const corpus::Batch& batch,
                          const ObjectiveConfig& cfg, int truncation) {
  cfg.validate();
  validate_batch(batch, params, truncation);

  BpttResult result;
  Accumulator acc(params);

  switch (params.kind) {
    case CellKind::vanilla:
    case CellKind::vanilla_mi: {
      const VanillaCache cache = vanilla_forward(params, batch);
      const auto delta_h =
          output_backward(acc, batch, cache.h, cache.y, cfg, result.loss);
      vanilla_backward(acc, batch, cache, delta_h);
      break;
    }
    case CellKind::lstm:
    case CellKind::lstm_mi: {
      const LstmCache cache = lstm_forward(params, batch);
      const auto delta_h =
          output_backward(acc, batch, cache.h, cache.y, cfg, result.loss);
      lstm_backward(acc, batch, cache, delta_h);
      break;
    }
    case CellKind::gru: {
      const GruCache cache = gru_forward(params, batch);
      const auto delta_h =
          output_backward(acc, batch, cache.h, cache.y, cfg, result.loss);
      gru_backward(acc, batch, cache, delta_h);
      break;
    }
  }

  result.gradients = std::move(acc.grads);
  return result;
}

} // namespace tonalexp::trainer
