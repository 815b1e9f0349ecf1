#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pbrnn/evaluate.hpp"
#include "pbrnn/lstm_grad.hpp"
#include "pbrnn/optim.hpp"
#include "pbrnn/rng.hpp"

namespace pbrnn {

TrainResult train_sgd(const SgdConfig& cfg, const CellSpec& spec, const WeightLayout& layout,
                      const SequenceDataset& data, std::uint64_t seed, BudgetMeter* meter) {
  if (cfg.learning_rate < 0.0 || cfg.truncation < 1 || cfg.minibatch < 1 ||
      cfg.max_epochs < 0 || cfg.patience < 1) {
    throw std::invalid_argument("invalid sgd configuration");
  }
  if (data.train_end == 0) {
    throw std::invalid_argument("dataset has no training rows");
  }
  if (data.val_end <= data.train_end) {
    throw std::invalid_argument("validation-based early stopping needs a validation split");
  }
  const std::size_t train_rows = data.train_end;
  const auto window = static_cast<std::size_t>(cfg.truncation);

  RngStream init_rng(seed, RngPurpose::SgdInit);
  ParameterVector theta = init_weights_glorot(spec, layout, init_rng);
  const std::size_t dim = theta.size();

  std::vector<double> m(dim, 0.0), v(dim, 0.0);
  long adam_steps = 0;
  auto adam_update = [&](const std::vector<double>& grad) {
    ++adam_steps;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(adam_steps));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(adam_steps));
    for (std::size_t i = 0; i < dim; ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
      theta[i] -= cfg.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.epsilon);
    }
  };

  TrainResult result;
  result.final_train_loss = std::numeric_limits<double>::infinity();
  result.theta = theta;
  int stale_epochs = 0;
  std::vector<double> grad(dim), grad_sum(dim);

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    if (meter != nullptr && !meter->has(1)) {
      break;
    }
    if (meter != nullptr) {
      meter->consume(1);
    }

    CellState carried = CellState::zero(spec);
    double epoch_sse = 0.0;
    std::size_t epoch_steps = 0;
    bool blew_up = false;
    std::size_t start = 0;
    while (start < train_rows && !blew_up) {
      // One minibatch: up to `minibatch` consecutive windows, gradients
      // summed per prediction so the step descends the group's MSE.
      std::fill(grad_sum.begin(), grad_sum.end(), 0.0);
      std::size_t group_steps = 0;
      for (int w = 0; w < cfg.minibatch && start < train_rows; ++w) {
        const std::size_t end = std::min(start + window, train_rows);
        double window_loss = 0.0;
        if (!lstm_bptt_gradient(spec, layout, theta, data.features.data(), data.targets.data(),
                                start, end, data.feature_dim, carried, grad, &window_loss)) {
          blew_up = true;
          break;
        }
        const auto count = static_cast<double>(end - start);
        for (std::size_t i = 0; i < dim; ++i) {
          grad_sum[i] += grad[i] * count;
        }
        group_steps += end - start;
        epoch_sse += window_loss * count;
        epoch_steps += end - start;
        start = end;
      }
      if (blew_up || group_steps == 0) {
        break;
      }
      for (std::size_t i = 0; i < dim; ++i) {
        grad_sum[i] /= static_cast<double>(group_steps);
      }
      adam_update(grad_sum);
    }
    result.iterations_run = epoch + 1;
    if (blew_up) {
      break;
    }

    // Validation is scored against the frozen post-epoch weights, so the
    // snapshot pair (theta, val MSE) is exact.
    const double val_mse = sequence_mse(spec, layout, theta, data, val_range(data));
    if (val_mse < result.final_val_loss) {
      result.final_val_loss = val_mse;
      result.final_train_loss = epoch_sse / static_cast<double>(epoch_steps);
      result.theta = theta;
      stale_epochs = 0;
    } else {
      ++stale_epochs;
      if (stale_epochs >= cfg.patience) {
        break;
      }
    }
  }

  result.diverged = !std::isfinite(result.final_val_loss);
  return result;
}

}  // namespace pbrnn
