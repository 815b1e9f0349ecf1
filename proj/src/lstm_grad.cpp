#include "pbrnn/lstm_grad.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace pbrnn {

namespace {
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

bool lstm_bptt_gradient(const CellSpec& spec, const WeightLayout& layout,
                        const ParameterVector& theta, const double* features,
                        const double* targets, std::size_t w_begin, std::size_t w_end,
                        std::size_t feature_dim, CellState& carried,
                        std::vector<double>& grad_out, double* loss_out) {
  if (spec.kind != CellKind::Lstm) {
    throw std::invalid_argument("analytic gradient is only implemented for the lstm cell");
  }
  if (w_end <= w_begin) {
    throw std::invalid_argument("gradient window is empty");
  }
  if (theta.size() != layout.size()) {
    throw std::invalid_argument("parameter vector length does not match layout");
  }
  if (feature_dim != static_cast<std::size_t>(spec.input_dim)) {
    throw std::invalid_argument("feature dimension does not match spec input_dim");
  }
  const std::size_t H = static_cast<std::size_t>(spec.hidden_dim);
  const std::size_t I = static_cast<std::size_t>(spec.input_dim);
  const std::size_t O = static_cast<std::size_t>(spec.output_dim);
  const std::size_t W = w_end - w_begin;

  const double* w_ih = layout.slice("w_ih", theta).data();
  const double* w_hh = layout.slice("w_hh", theta).data();
  const double* b = layout.slice("b", theta).data();
  const double* w_out = layout.slice("w_out", theta).data();
  const double* b_out = layout.slice("b_out", theta).data();

  // Forward pass with full caches. Row t of hs/cs is the state *entering*
  // step t; row t of gates/tanh_c/ys belongs to step t itself.
  std::vector<double> gates(W * 4 * H);
  std::vector<double> cs((W + 1) * H);
  std::vector<double> hs((W + 1) * H);
  std::vector<double> tanh_c(W * H);
  std::vector<double> ys(W * O);
  std::copy(carried.memory.begin(), carried.memory.end(), cs.begin());
  std::copy(carried.hidden.begin(), carried.hidden.end(), hs.begin());

  std::vector<double> acts(4 * H);
  double loss = 0.0;
  for (std::size_t t = 0; t < W; ++t) {
    const double* x = features + (w_begin + t) * feature_dim;
    const double* h_prev = &hs[t * H];
    const double* c_prev = &cs[t * H];
    // Partial sums grouped exactly like the forward-pass kernel so a window
    // replay reproduces its predictions bit for bit.
    for (std::size_t r = 0; r < 4 * H; ++r) {
      const double* wi = w_ih + r * I;
      double acc_x = 0.0;
      for (std::size_t i = 0; i < I; ++i) {
        acc_x += wi[i] * x[i];
      }
      const double* wh = w_hh + r * H;
      double acc_h = 0.0;
      for (std::size_t j = 0; j < H; ++j) {
        acc_h += wh[j] * h_prev[j];
      }
      acts[r] = b[r] + acc_x + acc_h;
    }
    double* gate = &gates[t * 4 * H];
    bool finite = true;
    for (std::size_t j = 0; j < H; ++j) {
      const double gi = sigmoid(acts[j]);
      const double gf = sigmoid(acts[H + j]);
      const double gg = std::tanh(acts[2 * H + j]);
      const double go = sigmoid(acts[3 * H + j]);
      gate[j] = gi;
      gate[H + j] = gf;
      gate[2 * H + j] = gg;
      gate[3 * H + j] = go;
      const double c = gf * c_prev[j] + gi * gg;
      const double tc = std::tanh(c);
      cs[(t + 1) * H + j] = c;
      tanh_c[t * H + j] = tc;
      hs[(t + 1) * H + j] = go * tc;
      finite = finite && std::isfinite(c);
    }
    const double* h_new = &hs[(t + 1) * H];
    for (std::size_t o = 0; o < O; ++o) {
      const double* row = w_out + o * H;
      double acc = b_out[o];
      for (std::size_t j = 0; j < H; ++j) {
        acc += row[j] * h_new[j];
      }
      ys[t * O + o] = acc;
      finite = finite && std::isfinite(acc);
      const double err = acc - targets[(w_begin + t) * O + o];
      loss += err * err;
    }
    if (!finite) {
      return false;
    }
  }
  const double inv = 1.0 / static_cast<double>(W * O);
  loss *= inv;

  grad_out.assign(layout.size(), 0.0);
  double* g_w_ih = grad_out.data() + layout.tensor("w_ih").offset;
  double* g_w_hh = grad_out.data() + layout.tensor("w_hh").offset;
  double* g_b = grad_out.data() + layout.tensor("b").offset;
  double* g_w_out = grad_out.data() + layout.tensor("w_out").offset;
  double* g_b_out = grad_out.data() + layout.tensor("b_out").offset;

  // Backward sweep. dh/dc hold the loss sensitivity of the state leaving
  // step t; the entering state of the window itself is a constant.
  std::vector<double> dh(H, 0.0), dc(H, 0.0), da(4 * H), dh_prev(H);
  for (std::size_t t = W; t-- > 0;) {
    const double* h_new = &hs[(t + 1) * H];
    for (std::size_t o = 0; o < O; ++o) {
      const double dy = 2.0 * inv * (ys[t * O + o] - targets[(w_begin + t) * O + o]);
      g_b_out[o] += dy;
      const double* row = w_out + o * H;
      double* g_row = g_w_out + o * H;
      for (std::size_t j = 0; j < H; ++j) {
        g_row[j] += dy * h_new[j];
        dh[j] += dy * row[j];
      }
    }
    const double* gate = &gates[t * 4 * H];
    const double* c_prev = &cs[t * H];
    for (std::size_t j = 0; j < H; ++j) {
      const double gi = gate[j];
      const double gf = gate[H + j];
      const double gg = gate[2 * H + j];
      const double go = gate[3 * H + j];
      const double tc = tanh_c[t * H + j];
      const double d_o = dh[j] * tc;
      dc[j] += dh[j] * go * (1.0 - tc * tc);
      const double d_i = dc[j] * gg;
      const double d_g = dc[j] * gi;
      const double d_f = dc[j] * c_prev[j];
      da[j] = d_i * gi * (1.0 - gi);
      da[H + j] = d_f * gf * (1.0 - gf);
      da[2 * H + j] = d_g * (1.0 - gg * gg);
      da[3 * H + j] = d_o * go * (1.0 - go);
      dc[j] *= gf;  // sensitivity of the cell state entering this step
    }
    const double* x = features + (w_begin + t) * feature_dim;
    const double* h_prev = &hs[t * H];
    std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
    for (std::size_t r = 0; r < 4 * H; ++r) {
      const double a = da[r];
      g_b[r] += a;
      double* gi_row = g_w_ih + r * I;
      for (std::size_t i = 0; i < I; ++i) {
        gi_row[i] += a * x[i];
      }
      const double* wh = w_hh + r * H;
      double* gh_row = g_w_hh + r * H;
      for (std::size_t j = 0; j < H; ++j) {
        gh_row[j] += a * h_prev[j];
        dh_prev[j] += a * wh[j];
      }
    }
    dh = dh_prev;
  }

  std::copy(hs.end() - static_cast<std::ptrdiff_t>(H), hs.end(), carried.hidden.begin());
  std::copy(cs.end() - static_cast<std::ptrdiff_t>(H), cs.end(), carried.memory.begin());
  carried.step_index += static_cast<long>(W);
  if (loss_out != nullptr) {
    *loss_out = loss;
  }
  return true;
}

}  // namespace pbrnn
