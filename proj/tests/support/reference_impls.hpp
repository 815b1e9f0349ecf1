#pragma once

// Independent reference implementations used as test oracles. These are
// written directly from the defining recursions with structured weights and
// plain scalar loops, on purpose sharing no code with the library paths they
// check.

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <vector>

namespace refimpl {

// ---------------------------------------------------------------------------
// Naive LSTM with structured weights. Gate order: input, forget, candidate,
// output, matching the library's stacked-kernel convention.
// ---------------------------------------------------------------------------

struct LstmWeights {
  // w_ih[g][j][i], w_hh[g][j][h], b[g][j] for gate g in {0:in,1:forget,2:cand,3:out}
  std::vector<std::vector<std::vector<double>>> w_ih;
  std::vector<std::vector<std::vector<double>>> w_hh;
  std::vector<std::vector<double>> b;
  std::vector<std::vector<double>> w_out;  // [o][j]
  std::vector<double> b_out;               // [o]
  std::size_t input_dim = 0, hidden_dim = 0, output_dim = 0;

  static LstmWeights zeros(std::size_t in, std::size_t hid, std::size_t out) {
    LstmWeights w;
    w.input_dim = in;
    w.hidden_dim = hid;
    w.output_dim = out;
    w.w_ih.assign(4, std::vector<std::vector<double>>(hid, std::vector<double>(in, 0.0)));
    w.w_hh.assign(4, std::vector<std::vector<double>>(hid, std::vector<double>(hid, 0.0)));
    w.b.assign(4, std::vector<double>(hid, 0.0));
    w.w_out.assign(out, std::vector<double>(hid, 0.0));
    w.b_out.assign(out, 0.0);
    return w;
  }

  // Loads from a flat vector laid out as stacked [4H x I], [4H x H], [4H],
  // [O x H], [O] blocks in that order (the library convention).
  static LstmWeights from_flat(const std::vector<double>& theta, std::size_t in, std::size_t hid,
                               std::size_t out) {
    LstmWeights w = zeros(in, hid, out);
    std::size_t p = 0;
    for (std::size_t g = 0; g < 4; ++g) {
      for (std::size_t j = 0; j < hid; ++j) {
        for (std::size_t i = 0; i < in; ++i) {
          w.w_ih[g][j][i] = theta[p++];
        }
      }
    }
    for (std::size_t g = 0; g < 4; ++g) {
      for (std::size_t j = 0; j < hid; ++j) {
        for (std::size_t h2 = 0; h2 < hid; ++h2) {
          w.w_hh[g][j][h2] = theta[p++];
        }
      }
    }
    for (std::size_t g = 0; g < 4; ++g) {
      for (std::size_t j = 0; j < hid; ++j) {
        w.b[g][j] = theta[p++];
      }
    }
    for (std::size_t o = 0; o < out; ++o) {
      for (std::size_t j = 0; j < hid; ++j) {
        w.w_out[o][j] = theta[p++];
      }
    }
    for (std::size_t o = 0; o < out; ++o) {
      w.b_out[o] = theta[p++];
    }
    return w;
  }
};

inline double ref_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct LstmRefState {
  std::vector<double> h;
  std::vector<double> c;
};

inline LstmRefState lstm_ref_zero_state(std::size_t hid) {
  return LstmRefState{std::vector<double>(hid, 0.0), std::vector<double>(hid, 0.0)};
}

// One reference step; returns the outputs.
inline std::vector<double> lstm_ref_step(const LstmWeights& w, LstmRefState& s,
                                         const std::vector<double>& x) {
  const std::size_t hid = w.hidden_dim;
  std::vector<double> h_new(hid), c_new(hid);
  for (std::size_t j = 0; j < hid; ++j) {
    double a[4];
    for (std::size_t g = 0; g < 4; ++g) {
      double acc = w.b[g][j];
      for (std::size_t i = 0; i < w.input_dim; ++i) {
        acc += w.w_ih[g][j][i] * x[i];
      }
      for (std::size_t h2 = 0; h2 < hid; ++h2) {
        acc += w.w_hh[g][j][h2] * s.h[h2];
      }
      a[g] = acc;
    }
    const double gi = ref_sigmoid(a[0]);
    const double gf = ref_sigmoid(a[1]);
    const double gg = std::tanh(a[2]);
    const double go = ref_sigmoid(a[3]);
    c_new[j] = gf * s.c[j] + gi * gg;
    h_new[j] = go * std::tanh(c_new[j]);
  }
  s.h = h_new;
  s.c = c_new;
  std::vector<double> y(w.output_dim, 0.0);
  for (std::size_t o = 0; o < w.output_dim; ++o) {
    double acc = w.b_out[o];
    for (std::size_t j = 0; j < hid; ++j) {
      acc += w.w_out[o][j] * h_new[j];
    }
    y[o] = acc;
  }
  return y;
}

// ---------------------------------------------------------------------------
// Reference phased time gate, straight from the three-phase definition.
// ---------------------------------------------------------------------------
inline double phased_gate_ref(double t, double period, double shift, double ratio, double leak) {
  double phi = std::fmod((t - shift) / period, 1.0);
  if (phi < 0.0) {
    phi += 1.0;
  }
  if (phi < ratio / 2.0) {
    return 2.0 * phi / ratio;
  }
  if (phi < ratio) {
    return 2.0 - 2.0 * phi / ratio;
  }
  return leak * phi;
}

// ---------------------------------------------------------------------------
// Central finite differences over an arbitrary scalar function of a flat
// parameter vector.
// ---------------------------------------------------------------------------
inline std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> theta,
    double step) {
  std::vector<double> grad(theta.size(), 0.0);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + step;
    const double up = f(theta);
    theta[i] = saved - step;
    const double down = f(theta);
    theta[i] = saved;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

// ---------------------------------------------------------------------------
// Group-by-window sum-of-squares aggregation: the realized-variance oracle.
// ---------------------------------------------------------------------------
inline std::map<long long, double> rv_by_bar_oracle(const std::vector<long long>& timestamps,
                                                    const std::vector<double>& returns,
                                                    long long bar_seconds) {
  std::map<long long, double> bars;
  for (std::size_t i = 0; i < timestamps.size(); ++i) {
    const long long bar = (timestamps[i] / bar_seconds) * bar_seconds;
    bars[bar] += returns[i] * returns[i];
  }
  return bars;
}

// ---------------------------------------------------------------------------
// Sample autocorrelation at a given lag.
// ---------------------------------------------------------------------------
inline double sample_acf(const std::vector<double>& x, std::size_t lag) {
  const std::size_t n = x.size();
  double mean = 0.0;
  for (double v : x) {
    mean += v;
  }
  mean /= static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - mean;
    den += d * d;
    if (i + lag < n) {
      num += d * (x[i + lag] - mean);
    }
  }
  return den > 0.0 ? num / den : 0.0;
}

// ---------------------------------------------------------------------------
// Minimal independent PSO on a generic loss, used to confirm the sphere
// convergence threshold is attainable by a textbook implementation.
// ---------------------------------------------------------------------------
inline double mini_pso_best_loss(const std::function<double(const std::vector<double>&)>& loss,
                                 std::size_t dim, std::size_t swarm, std::size_t iterations,
                                 double inertia, double init_std, unsigned seed) {
  // Park-Miller style LCG; quality is irrelevant, independence is the point.
  unsigned long long state = seed * 2862933555777941757ULL + 3037000493ULL;
  auto next_uniform = [&state]() {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(state >> 11) * 0x1.0p-53;
  };
  auto next_gaussian = [&]() {
    const double u1 = std::max(next_uniform(), 1e-300);
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  };
  std::vector<std::vector<double>> pos(swarm, std::vector<double>(dim));
  std::vector<std::vector<double>> vel(swarm, std::vector<double>(dim, 0.0));
  std::vector<std::vector<double>> local_best(swarm, std::vector<double>(dim, 0.0));
  std::vector<double> local_best_loss(swarm, HUGE_VAL);
  std::vector<double> global_best(dim, 0.0);
  double global_best_loss = HUGE_VAL;
  for (auto& p : pos) {
    for (auto& v : p) {
      v = init_std * next_gaussian();
    }
  }
  for (std::size_t k = 0; k < iterations; ++k) {
    for (std::size_t i = 0; i < swarm; ++i) {
      const double u1 = next_uniform();
      const double u2 = next_uniform();
      for (std::size_t d = 0; d < dim; ++d) {
        vel[i][d] = inertia * vel[i][d] + 2.0 * u1 * (local_best[i][d] - pos[i][d]) +
                    2.0 * u2 * (global_best[d] - pos[i][d]);
        pos[i][d] += vel[i][d];
      }
      const double l = loss(pos[i]);
      if (l < local_best_loss[i]) {
        local_best_loss[i] = l;
        local_best[i] = pos[i];
        if (l < global_best_loss) {
          global_best_loss = l;
          global_best = pos[i];
        }
      }
    }
  }
  return global_best_loss;
}

}  // namespace refimpl
