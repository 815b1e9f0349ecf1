#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pbrnn/optim.hpp"
#include "pbrnn/parallel.hpp"
#include "pbrnn/rng.hpp"

namespace pbrnn {

std::vector<double> es_step(const EsConfig& cfg, ParameterVector& center, long iteration,
                            std::uint64_t seed, const LossFn& loss, int workers) {
  if (cfg.population < 1 || cfg.noise_std <= 0.0) {
    throw std::invalid_argument("es_step needs population >= 1 and noise_std > 0");
  }
  const auto n = static_cast<std::size_t>(cfg.population);
  const std::size_t dim = center.size();

  std::vector<double> noise(n * dim);
  std::vector<double> losses(n);
  parallel_for(n, workers, [&](std::size_t i) {
    RngStream rng(seed, RngPurpose::EsNoise, static_cast<std::uint64_t>(i),
                  static_cast<std::uint64_t>(iteration));
    double* eps = noise.data() + i * dim;
    rng.fill_gaussian({eps, dim});
    ParameterVector candidate(dim);
    for (std::size_t c = 0; c < dim; ++c) {
      candidate[c] = center[c] + cfg.noise_std * eps[c];
    }
    losses[i] = loss(candidate);
  });

  // Rewards, with divergent individuals pinned to the worst finite reward.
  std::vector<double> rewards(n);
  double worst_finite = std::numeric_limits<double>::infinity();
  bool any_finite = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isfinite(losses[i])) {
      any_finite = true;
      worst_finite = std::min(worst_finite, -losses[i]);
    }
  }
  if (!any_finite) {
    return losses;  // nothing to learn from; the centre stays
  }
  for (std::size_t i = 0; i < n; ++i) {
    rewards[i] = std::isfinite(losses[i]) ? -losses[i] : worst_finite;
  }

  if (cfg.rank_shaping && n > 1) {
    // Centred ranks in [-0.5, 0.5], ties broken by individual index.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rewards[a] < rewards[b]; });
    std::vector<double> shaped(n);
    for (std::size_t r = 0; r < n; ++r) {
      shaped[order[r]] = static_cast<double>(r) / static_cast<double>(n - 1) - 0.5;
    }
    rewards = std::move(shaped);
  }

  const double scale = cfg.step_size / (cfg.noise_std * static_cast<double>(n));
  ParameterVector updated(dim);
  bool finite = true;
  for (std::size_t c = 0; c < dim; ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s += rewards[i] * noise[i * dim + c];
    }
    updated[c] = center[c] + scale * s;
    finite = finite && std::isfinite(updated[c]);
  }
  if (finite) {
    center = std::move(updated);
  }
  return losses;
}

TrainResult train_es(const EsConfig& cfg, std::size_t dim, std::uint64_t seed,
                     const LossFn& loss, BudgetMeter* meter, int workers) {
  if (cfg.iterations < 0) {
    throw std::invalid_argument("iterations must be >= 0");
  }
  TrainResult result;
  result.theta.assign(dim, 0.0);
  double best = std::numeric_limits<double>::infinity();
  const LossFn metered = [&](const ParameterVector& theta) {
    if (meter != nullptr) {
      meter->consume(1);
    }
    return loss(theta);
  };
  for (long k = 0; k < cfg.iterations; ++k) {
    if (meter != nullptr && !meter->has(static_cast<std::uint64_t>(cfg.population))) {
      break;
    }
    const std::vector<double> losses = es_step(cfg, result.theta, k, seed, metered, workers);
    for (double l : losses) {
      best = std::min(best, l);
    }
    result.iterations_run = k + 1;
  }
  result.final_train_loss = best;
  result.diverged = !std::isfinite(best);
  return result;
}

}  // namespace pbrnn
