#include <cmath>
#include <limits>
#include <stdexcept>

#include "pbrnn/optim.hpp"
#include "pbrnn/parallel.hpp"
#include "pbrnn/rng.hpp"

namespace pbrnn {

SwarmState npso_init(const NpsoConfig& cfg, std::size_t dim, std::uint64_t seed) {
  if (cfg.population < 1 || cfg.init_std < 0.0) {
    throw std::invalid_argument("npso needs population >= 1 and init_std >= 0");
  }
  const auto n = static_cast<std::size_t>(cfg.population);
  SwarmState s;
  s.position.assign(n, ParameterVector(dim, 0.0));
  s.velocity.assign(n, ParameterVector(dim, 0.0));
  s.local_best.assign(n, ParameterVector(dim, 0.0));
  s.local_best_loss.assign(n, std::numeric_limits<double>::infinity());
  s.global_best.assign(dim, 0.0);
  s.global_best_loss = std::numeric_limits<double>::infinity();
  s.iteration = 0;
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng(seed, RngPurpose::PopInit, static_cast<std::uint64_t>(i), 0);
    for (double& v : s.position[i]) {
      v = cfg.init_std * rng.gaussian();
    }
  }
  return s;
}

void pso_kinematics(double inertia, double c1, double c2, double u1, double u2,
                    std::span<const double> local_best, std::span<const double> global_best,
                    std::span<double> position, std::span<double> velocity) {
  const std::size_t dim = position.size();
  for (std::size_t c = 0; c < dim; ++c) {
    velocity[c] = inertia * velocity[c] + c1 * u1 * (local_best[c] - position[c]) +
                  c2 * u2 * (global_best[c] - position[c]);
    position[c] += velocity[c];
  }
}

std::vector<double> npso_step(const NpsoConfig& cfg, SwarmState& state, std::uint64_t seed,
                              const LossFn& loss, int workers) {
  const auto n = static_cast<std::size_t>(cfg.population);
  if (state.position.size() != n) {
    throw std::invalid_argument("swarm population does not match configuration");
  }
  const long k = state.iteration + 1;
  std::vector<double> losses(n);
  parallel_for(n, workers, [&](std::size_t i) {
    RngStream cog(seed, RngPurpose::PsoCognitive, static_cast<std::uint64_t>(i),
                  static_cast<std::uint64_t>(k));
    RngStream soc(seed, RngPurpose::PsoSocial, static_cast<std::uint64_t>(i),
                  static_cast<std::uint64_t>(k));
    auto& pos = state.position[i];
    auto& vel = state.velocity[i];
    if (cfg.per_coordinate) {
      for (std::size_t c = 0; c < pos.size(); ++c) {
        vel[c] = cfg.inertia * vel[c] +
                 cfg.cognitive * cog.uniform() * (state.local_best[i][c] - pos[c]) +
                 cfg.social * soc.uniform() * (state.global_best[c] - pos[c]);
        pos[c] += vel[c];
      }
    } else {
      pso_kinematics(cfg.inertia, cfg.cognitive, cfg.social, cog.uniform(), soc.uniform(),
                     state.local_best[i], state.global_best, pos, vel);
    }
    losses[i] = loss(pos);
  });

  // Best bookkeeping after the barrier, in particle order, on strict
  // improvement (a NaN loss fails every comparison and changes nothing).
  for (std::size_t i = 0; i < n; ++i) {
    if (losses[i] < state.local_best_loss[i]) {
      state.local_best_loss[i] = losses[i];
      state.local_best[i] = state.position[i];
      if (losses[i] < state.global_best_loss) {
        state.global_best_loss = losses[i];
        state.global_best = state.position[i];
      }
    }
  }
  state.iteration = k;
  return losses;
}

TrainResult train_npso(const NpsoConfig& cfg, std::size_t dim, std::uint64_t seed,
                       const LossFn& loss, BudgetMeter* meter, int workers) {
  if (cfg.iterations < 0) {
    throw std::invalid_argument("iterations must be >= 0");
  }
  SwarmState state = npso_init(cfg, dim, seed);
  const LossFn metered = [&](const ParameterVector& theta) {
    if (meter != nullptr) {
      meter->consume(1);
    }
    return loss(theta);
  };
  TrainResult result;
  for (long k = 0; k < cfg.iterations; ++k) {
    if (meter != nullptr && !meter->has(static_cast<std::uint64_t>(cfg.population))) {
      break;
    }
    npso_step(cfg, state, seed, metered, workers);
    result.iterations_run = k + 1;
  }
  result.theta = state.global_best;
  result.final_train_loss = state.global_best_loss;
  result.diverged = !std::isfinite(state.global_best_loss);
  return result;
}

}  // namespace pbrnn
