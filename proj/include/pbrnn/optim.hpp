#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "pbrnn/budget.hpp"
#include "pbrnn/cells.hpp"
#include "pbrnn/data.hpp"
#include "pbrnn/params.hpp"

namespace pbrnn {

// Scalar training loss of a parameter vector; lower is better. Implementations
// must map divergence to +inf rather than throwing.
using LossFn = std::function<double(const ParameterVector&)>;

// Outcome shared by all trainers. theta is the final model (the centre for
// evolution strategies, the global best for the swarm, the best-validation
// epoch for gradient descent); diverged means the trainer never recorded a
// finite result. final_val_loss is set only by trainers that monitor the
// validation split (the gradient baseline) and stays infinite otherwise.
struct TrainResult {
  ParameterVector theta;
  double final_train_loss = 0.0;
  double final_val_loss = std::numeric_limits<double>::infinity();
  long iterations_run = 0;
  bool diverged = false;
};

// ---------------------------------------------------------------------------
// Evolution strategies: a single centre perturbed by Gaussian noise, moved
// along the reward-weighted mean perturbation each iteration.
// ---------------------------------------------------------------------------
struct EsConfig {
  double step_size = 0.2;  // alpha
  double noise_std = 0.1;  // sigma
  int population = 30;     // N
  int iterations = 50;     // K
  // Replace raw rewards by centred ranks before averaging (off by default;
  // the plain update is the canonical method).
  bool rank_shaping = false;
};

// One iteration at index `iteration`: individual i draws its perturbation from
// the stream (seed, EsNoise, i, iteration), candidates centre + sigma * eps
// are scored (in parallel across `workers` threads), and the centre moves by
// alpha / (sigma N) * sum_i R_i eps_i with rewards R_i = -loss_i, accumulated
// in individual order. Non-finite losses take the worst finite reward; if no
// individual is finite, or the update itself is non-finite, the centre stays.
// Returns the N losses in individual order.
std::vector<double> es_step(const EsConfig& cfg, ParameterVector& center, long iteration,
                            std::uint64_t seed, const LossFn& loss, int workers);

// Runs from the zero vector for cfg.iterations, or until the meter cannot
// afford a full population. Each individual evaluation charges one unit.
TrainResult train_es(const EsConfig& cfg, std::size_t dim, std::uint64_t seed,
                     const LossFn& loss, BudgetMeter* meter, int workers);

// ---------------------------------------------------------------------------
// Particle swarm over the same flat parameter space.
// ---------------------------------------------------------------------------
struct NpsoConfig {
  double inertia = 0.7;    // w
  double cognitive = 2.0;  // c1
  double social = 2.0;     // c2
  double init_std = 0.5;   // std of the Gaussian initial positions
  int population = 30;     // N
  int iterations = 50;     // K
  // Draw the two uniforms per coordinate instead of once per particle and
  // iteration (the default broadcasts one scalar pair across coordinates).
  bool per_coordinate = false;
};

struct SwarmState {
  std::vector<ParameterVector> position;
  std::vector<ParameterVector> velocity;
  std::vector<ParameterVector> local_best;
  std::vector<double> local_best_loss;
  ParameterVector global_best;
  double global_best_loss = 0.0;
  long iteration = 0;  // completed iterations
};

// Particles start at Gaussian positions drawn from (seed, PopInit, i, 0);
// velocities, local bests and the global best start at zero with +inf losses.
// Initial positions are never scored.
SwarmState npso_init(const NpsoConfig& cfg, std::size_t dim, std::uint64_t seed);

// The velocity/position update for one particle given its two uniforms:
// v <- inertia v + c1 u1 (local - x) + c2 u2 (global - x); x <- x + v.
void pso_kinematics(double inertia, double c1, double c2, double u1, double u2,
                    std::span<const double> local_best, std::span<const double> global_best,
                    std::span<double> position, std::span<double> velocity);

// One iteration k = state.iteration + 1: every particle moves using uniforms
// from (seed, PsoCognitive, i, k) and (seed, PsoSocial, i, k) against the
// bests of iteration k-1, moved positions are scored in parallel, then local
// and global bests update sequentially in particle order on strict
// improvement only. Returns the N losses.
std::vector<double> npso_step(const NpsoConfig& cfg, SwarmState& state, std::uint64_t seed,
                              const LossFn& loss, int workers);

// Full run; the final model is the global best. Each particle evaluation
// charges one unit; iterations stop early when the meter cannot afford N.
TrainResult train_npso(const NpsoConfig& cfg, std::size_t dim, std::uint64_t seed,
                       const LossFn& loss, BudgetMeter* meter, int workers);

// ---------------------------------------------------------------------------
// Gradient baseline: Adam over truncated windows with state carried across
// window boundaries (truncation detaches gradients, not the state).
// ---------------------------------------------------------------------------
struct SgdConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int max_epochs = 300;
  int truncation = 20;  // window length
  int minibatch = 1;    // consecutive windows per Adam step
  int patience = 25;    // epochs without validation improvement before stopping
};

// Trains an LSTM on the training split, selecting by validation MSE.
// Weights start from the Glorot initialisation seeded by (seed, SgdInit).
// One epoch (one pass over the training split) charges one budget unit;
// validation passes are free. After each epoch the validation MSE of the
// frozen post-epoch weights either strictly improves (new snapshot) or goes
// stale; the run stops at max_epochs, an exhausted meter, or `patience`
// stale epochs. Returns the snapshot weights with their validation MSE in
// final_val_loss and that epoch's training MSE in final_train_loss. A
// divergent forward pass ends the run, returning the best weights seen
// before it; `diverged` is set only when no snapshot was ever recorded.
// Requires a non-empty validation split.
TrainResult train_sgd(const SgdConfig& cfg, const CellSpec& spec, const WeightLayout& layout,
                      const SequenceDataset& data, std::uint64_t seed, BudgetMeter* meter);

}  // namespace pbrnn
