#include "pbrnn/cells.hpp"

#include <cmath>
#include <stdexcept>

#include "pbrnn/linalg.hpp"

namespace pbrnn {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double relu(double x) { return x > 0.0 ? x : 0.0; }

// Gate rows within the stacked [4H x *] LSTM kernels: input, forget,
// candidate, output.
enum GateBlock { kGateIn = 0, kGateForget = 1, kGateCand = 2, kGateOut = 3 };

void matvec_accum(const double* m, const double* v, double* out, std::size_t rows,
                  std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = m + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      acc += row[c] * v[c];
    }
    out[r] += acc;
  }
}

struct LstmView {
  const double* w_ih;
  const double* w_hh;
  const double* b;
  const double* w_out;
  const double* b_out;
  const double* gate_period = nullptr;
  const double* gate_shift = nullptr;
  const double* gate_ratio = nullptr;
  std::size_t input_dim = 0, hidden_dim = 0, output_dim = 0;
};

LstmView bind_lstm(const CellSpec& spec, const WeightLayout& layout,
                   const ParameterVector& theta) {
  LstmView v;
  v.input_dim = static_cast<std::size_t>(spec.input_dim);
  v.hidden_dim = static_cast<std::size_t>(spec.hidden_dim);
  v.output_dim = static_cast<std::size_t>(spec.output_dim);
  v.w_ih = layout.slice("w_ih", theta).data();
  v.w_hh = layout.slice("w_hh", theta).data();
  v.b = layout.slice("b", theta).data();
  v.w_out = layout.slice("w_out", theta).data();
  v.b_out = layout.slice("b_out", theta).data();
  if (spec.kind == CellKind::Plstm) {
    v.gate_period = layout.slice("gate_period", theta).data();
    v.gate_shift = layout.slice("gate_shift", theta).data();
    v.gate_ratio = layout.slice("gate_ratio", theta).data();
  }
  return v;
}

struct FruView {
  const double* w_x;
  const double* w_u;
  const double* b_h;
  const double* w_g;
  const double* b_g;
  const double* w_out;
  const double* b_out;
  std::size_t input_dim = 0, hidden_dim = 0, output_dim = 0, freq_count = 0;
};

FruView bind_fru(const CellSpec& spec, const WeightLayout& layout, const ParameterVector& theta) {
  FruView v;
  v.input_dim = static_cast<std::size_t>(spec.input_dim);
  v.hidden_dim = static_cast<std::size_t>(spec.hidden_dim);
  v.output_dim = static_cast<std::size_t>(spec.output_dim);
  v.freq_count = spec.fru_frequencies.size();
  v.w_x = layout.slice("w_x", theta).data();
  v.w_u = layout.slice("w_u", theta).data();
  v.b_h = layout.slice("b_h", theta).data();
  v.w_g = layout.slice("w_g", theta).data();
  v.b_g = layout.slice("b_g", theta).data();
  v.w_out = layout.slice("w_out", theta).data();
  v.b_out = layout.slice("b_out", theta).data();
  return v;
}

struct StepWorkspace {
  std::vector<double> acts;     // 4H gate pre-activations / FRU hidden pre-acts
  std::vector<double> scratch;  // candidate state or FRU summary
};

// Phase position of the time gate in [0, 1).
inline double gate_phase(double t, double period, double shift) {
  double phi = std::fmod((t - shift) / period, 1.0);
  if (phi < 0.0) {
    phi += 1.0;
  }
  return phi;
}

// Three-phase openness: linear rise to 1 over the first half of the open
// window, linear fall back over the second half, a small leak otherwise.
inline double time_gate_openness(double phi, double ratio, double leak) {
  if (phi < 0.5 * ratio) {
    return 2.0 * phi / ratio;
  }
  if (phi < ratio) {
    return 2.0 - 2.0 * phi / ratio;
  }
  return leak * phi;
}

bool lstm_like_step(const CellSpec& spec, const LstmView& v, CellState& state,
                    std::span<const double> x, double t, std::span<double> y_out,
                    StepWorkspace& ws) {
  const std::size_t h_dim = v.hidden_dim;
  ws.acts.assign(4 * h_dim, 0.0);
  for (std::size_t j = 0; j < 4 * h_dim; ++j) {
    ws.acts[j] = v.b[j];
  }
  matvec_accum(v.w_ih, x.data(), ws.acts.data(), 4 * h_dim, v.input_dim);
  matvec_accum(v.w_hh, state.hidden.data(), ws.acts.data(), 4 * h_dim, h_dim);

  ws.scratch.resize(2 * h_dim);
  double* cand_cell = ws.scratch.data();
  double* cand_hidden = ws.scratch.data() + h_dim;
  for (std::size_t j = 0; j < h_dim; ++j) {
    const double gi = sigmoid(ws.acts[kGateIn * h_dim + j]);
    const double gf = sigmoid(ws.acts[kGateForget * h_dim + j]);
    const double gg = std::tanh(ws.acts[kGateCand * h_dim + j]);
    const double go = sigmoid(ws.acts[kGateOut * h_dim + j]);
    cand_cell[j] = gf * state.memory[j] + gi * gg;
    cand_hidden[j] = go * std::tanh(cand_cell[j]);
  }

  if (spec.kind == CellKind::Plstm) {
    const double logit_ratio =
        std::log(spec.plstm.open_ratio / (1.0 - spec.plstm.open_ratio));
    for (std::size_t j = 0; j < h_dim; ++j) {
      double k = 1.0;
      if (!spec.plstm_force_open) {
        const double period = spec.plstm.period * std::exp(v.gate_period[j]);
        const double shift = v.gate_shift[j] * period;
        const double ratio = sigmoid(logit_ratio + v.gate_ratio[j]);
        const double phi = gate_phase(t, period, shift);
        k = time_gate_openness(phi, ratio, spec.plstm.leak);
      }
      cand_cell[j] = k * cand_cell[j] + (1.0 - k) * state.memory[j];
      cand_hidden[j] = k * cand_hidden[j] + (1.0 - k) * state.hidden[j];
    }
  }

  bool finite = true;
  for (std::size_t j = 0; j < h_dim; ++j) {
    state.memory[j] = cand_cell[j];
    state.hidden[j] = cand_hidden[j];
    finite = finite && std::isfinite(cand_cell[j]) && std::isfinite(cand_hidden[j]);
  }
  for (std::size_t o = 0; o < v.output_dim; ++o) {
    const double* row = v.w_out + o * h_dim;
    double acc = v.b_out[o];
    for (std::size_t j = 0; j < h_dim; ++j) {
      acc += row[j] * state.hidden[j];
    }
    y_out[o] = acc;
    finite = finite && std::isfinite(acc);
  }
  state.step_index += 1;
  return finite;
}

bool fru_step(const CellSpec& spec, const FruView& v, CellState& state, std::span<const double> x,
              double t, std::span<double> y_out, StepWorkspace& ws) {
  const std::size_t h_dim = v.hidden_dim;
  const std::size_t k_count = v.freq_count;
  ws.acts.assign(h_dim, 0.0);
  for (std::size_t j = 0; j < h_dim; ++j) {
    ws.acts[j] = v.b_h[j];
  }
  matvec_accum(v.w_x, x.data(), ws.acts.data(), h_dim, v.input_dim);
  matvec_accum(v.w_u, state.memory.data(), ws.acts.data(), h_dim, k_count * h_dim);

  // Finiteness is checked on the pre-activations: relu would silently turn
  // a NaN into 0 and hide the divergence.
  bool finite = true;
  for (std::size_t j = 0; j < h_dim; ++j) {
    finite = finite && std::isfinite(ws.acts[j]);
    state.hidden[j] = relu(ws.acts[j]);
  }

  // Projected summary of the new hidden state, accumulated into each
  // frequency statistic with its cosine basis weight.
  ws.scratch.assign(h_dim, 0.0);
  for (std::size_t j = 0; j < h_dim; ++j) {
    ws.scratch[j] = v.b_g[j];
  }
  matvec_accum(v.w_g, state.hidden.data(), ws.scratch.data(), h_dim, h_dim);
  for (std::size_t j = 0; j < h_dim; ++j) {
    finite = finite && std::isfinite(ws.scratch[j]);
    ws.scratch[j] = relu(ws.scratch[j]);
  }
  const double inv_scale = 1.0 / spec.fru_time_scale;
  for (std::size_t k = 0; k < k_count; ++k) {
    const double w = std::cos(2.0 * M_PI * spec.fru_frequencies[k] * t * inv_scale) * inv_scale;
    double* stat = &state.memory[k * h_dim];
    for (std::size_t j = 0; j < h_dim; ++j) {
      stat[j] += w * ws.scratch[j];
      finite = finite && std::isfinite(stat[j]);
    }
  }

  for (std::size_t o = 0; o < v.output_dim; ++o) {
    const double* row = v.w_out + o * h_dim;
    double acc = v.b_out[o];
    for (std::size_t j = 0; j < h_dim; ++j) {
      acc += row[j] * state.hidden[j];
    }
    y_out[o] = acc;
    finite = finite && std::isfinite(acc);
  }
  state.step_index += 1;
  return finite;
}

}  // namespace

std::string to_string(CellKind kind) {
  switch (kind) {
    case CellKind::Lstm:
      return "lstm";
    case CellKind::Plstm:
      return "plstm";
    case CellKind::Fru:
      return "fru";
  }
  return "?";
}

bool cell_kind_from_string(std::string_view name, CellKind& out) {
  if (name == "lstm") {
    out = CellKind::Lstm;
  } else if (name == "plstm") {
    out = CellKind::Plstm;
  } else if (name == "fru") {
    out = CellKind::Fru;
  } else {
    return false;
  }
  return true;
}

void CellSpec::validate() const {
  if (input_dim < 1 || hidden_dim < 1 || output_dim < 1) {
    throw std::invalid_argument("cell dimensions must be >= 1");
  }
  if ((kind == CellKind::Fru) != !fru_frequencies.empty()) {
    throw std::invalid_argument("fru_frequencies must be non-empty exactly for FRU cells");
  }
  if (kind == CellKind::Fru && fru_time_scale <= 0.0) {
    throw std::invalid_argument("fru_time_scale must be positive");
  }
  if (kind == CellKind::Plstm) {
    if (plstm.period <= 0.0 || plstm.open_ratio <= 0.0 || plstm.open_ratio >= 1.0 ||
        plstm.leak < 0.0) {
      throw std::invalid_argument("invalid phased-gate defaults");
    }
  }
}

void WeightLayout::add(std::string name, std::size_t rows, std::size_t cols) {
  TensorSpec t;
  t.name = std::move(name);
  t.rows = rows;
  t.cols = cols;
  t.offset = total_;
  total_ += t.size();
  tensors_.push_back(std::move(t));
}

WeightLayout WeightLayout::for_cell(const CellSpec& spec) {
  spec.validate();
  const auto in = static_cast<std::size_t>(spec.input_dim);
  const auto hid = static_cast<std::size_t>(spec.hidden_dim);
  const auto out = static_cast<std::size_t>(spec.output_dim);
  WeightLayout layout;
  switch (spec.kind) {
    case CellKind::Lstm:
    case CellKind::Plstm:
      layout.add("w_ih", 4 * hid, in);
      layout.add("w_hh", 4 * hid, hid);
      layout.add("b", 4 * hid);
      layout.add("w_out", out, hid);
      layout.add("b_out", out);
      if (spec.kind == CellKind::Plstm) {
        layout.add("gate_period", hid);
        layout.add("gate_shift", hid);
        layout.add("gate_ratio", hid);
      }
      break;
    case CellKind::Fru: {
      const std::size_t k_count = spec.fru_frequencies.size();
      layout.add("w_x", hid, in);
      layout.add("w_u", hid, k_count * hid);
      layout.add("b_h", hid);
      layout.add("w_g", hid, hid);
      layout.add("b_g", hid);
      layout.add("w_out", out, hid);
      layout.add("b_out", out);
      break;
    }
  }
  return layout;
}

const TensorSpec& WeightLayout::tensor(std::string_view name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) {
      return t;
    }
  }
  throw std::out_of_range("no tensor named " + std::string(name));
}

bool WeightLayout::has_tensor(std::string_view name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) {
      return true;
    }
  }
  return false;
}

std::span<double> WeightLayout::slice(std::string_view name, ParameterVector& theta) const {
  const TensorSpec& t = tensor(name);
  return {theta.data() + t.offset, t.size()};
}

std::span<const double> WeightLayout::slice(std::string_view name,
                                            const ParameterVector& theta) const {
  const TensorSpec& t = tensor(name);
  return {theta.data() + t.offset, t.size()};
}

std::vector<std::pair<std::string, std::vector<double>>> WeightLayout::unflatten(
    const ParameterVector& theta) const {
  if (theta.size() != total_) {
    throw std::invalid_argument("parameter vector length does not match layout");
  }
  std::vector<std::pair<std::string, std::vector<double>>> out;
  out.reserve(tensors_.size());
  for (const auto& t : tensors_) {
    out.emplace_back(t.name, std::vector<double>(theta.begin() + static_cast<std::ptrdiff_t>(t.offset),
                                                 theta.begin() + static_cast<std::ptrdiff_t>(t.offset + t.size())));
  }
  return out;
}

ParameterVector WeightLayout::flatten(
    const std::vector<std::pair<std::string, std::vector<double>>>& structured) const {
  if (structured.size() != tensors_.size()) {
    throw std::invalid_argument("tensor count mismatch");
  }
  ParameterVector theta(total_, 0.0);
  for (const auto& [name, values] : structured) {
    const TensorSpec& t = tensor(name);
    if (values.size() != t.size()) {
      throw std::invalid_argument("tensor size mismatch for " + name);
    }
    std::copy(values.begin(), values.end(), theta.begin() + static_cast<std::ptrdiff_t>(t.offset));
  }
  return theta;
}

CellState CellState::zero(const CellSpec& spec) {
  CellState s;
  s.hidden.assign(static_cast<std::size_t>(spec.hidden_dim), 0.0);
  const std::size_t mem =
      spec.kind == CellKind::Fru
          ? spec.fru_frequencies.size() * static_cast<std::size_t>(spec.hidden_dim)
          : static_cast<std::size_t>(spec.hidden_dim);
  s.memory.assign(mem, 0.0);
  s.step_index = 0;
  return s;
}

bool forward_step(const CellSpec& spec, const WeightLayout& layout, const ParameterVector& theta,
                  CellState& state, std::span<const double> x, double t,
                  std::span<double> y_out) {
  if (theta.size() != layout.size()) {
    throw std::invalid_argument("parameter vector length does not match layout");
  }
  if (x.size() != static_cast<std::size_t>(spec.input_dim) ||
      y_out.size() != static_cast<std::size_t>(spec.output_dim) ||
      state.hidden.size() != static_cast<std::size_t>(spec.hidden_dim)) {
    throw std::invalid_argument("state or buffer dimensions do not match spec");
  }
  StepWorkspace ws;
  if (spec.kind == CellKind::Fru) {
    return fru_step(spec, bind_fru(spec, layout, theta), state, x, t, y_out, ws);
  }
  return lstm_like_step(spec, bind_lstm(spec, layout, theta), state, x, t, y_out, ws);
}

bool forward_sequence(const CellSpec& spec, const WeightLayout& layout,
                      const ParameterVector& theta, const double* features, std::size_t steps,
                      std::size_t feature_dim, const double* time_axis,
                      std::vector<double>& predictions) {
  if (theta.size() != layout.size()) {
    throw std::invalid_argument("parameter vector length does not match layout");
  }
  if (feature_dim != static_cast<std::size_t>(spec.input_dim)) {
    throw std::invalid_argument("feature dimension does not match spec input_dim");
  }
  predictions.assign(steps, 0.0);
  CellState state = CellState::zero(spec);
  StepWorkspace ws;
  std::vector<double> y(static_cast<std::size_t>(spec.output_dim), 0.0);
  const bool fru = spec.kind == CellKind::Fru;
  LstmView lstm_view{};
  FruView fru_view{};
  if (fru) {
    fru_view = bind_fru(spec, layout, theta);
  } else {
    lstm_view = bind_lstm(spec, layout, theta);
  }
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = time_axis != nullptr ? time_axis[i] : static_cast<double>(state.step_index);
    const std::span<const double> x{features + i * feature_dim, feature_dim};
    const bool ok = fru ? fru_step(spec, fru_view, state, x, t, y, ws)
                        : lstm_like_step(spec, lstm_view, state, x, t, y, ws);
    if (!ok) {
      return false;
    }
    predictions[i] = y[0];
  }
  return true;
}

ParameterVector init_weights_glorot(const CellSpec& spec, const WeightLayout& layout,
                                    RngStream& rng) {
  ParameterVector theta(layout.size(), 0.0);
  const auto hid = static_cast<std::size_t>(spec.hidden_dim);
  for (const auto& t : layout.tensors()) {
    auto dst = std::span<double>{theta.data() + t.offset, t.size()};
    if (t.name == "b") {
      for (std::size_t j = 0; j < hid; ++j) {
        dst[kGateForget * hid + j] = 1.0;
      }
    } else if (t.name == "w_hh") {
      // Four stacked H x H gate blocks, each orthonormalized.
      for (std::size_t g = 0; g < 4; ++g) {
        std::vector<double> block(hid * hid);
        for (auto& v : block) {
          v = rng.gaussian();
        }
        orthonormalize_rows(block, hid);
        std::copy(block.begin(), block.end(), dst.begin() + static_cast<std::ptrdiff_t>(g * hid * hid));
      }
    } else if (t.name.starts_with("w_")) {
      const double r = std::sqrt(6.0 / static_cast<double>(t.rows + t.cols));
      for (auto& v : dst) {
        v = (2.0 * rng.uniform() - 1.0) * r;
      }
    }
    // Remaining vectors (output/summary biases, phased-gate raws) stay zero.
  }
  return theta;
}

}  // namespace pbrnn
