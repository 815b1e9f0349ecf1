#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pbrnn/budget.hpp"
#include "pbrnn/params.hpp"
#include "pbrnn/rng.hpp"

namespace pbrnn {

// One hyperparameter dimension: either a continuous range (optionally
// sampled log-uniformly) or a discrete set of values.
struct AxisSpec {
  std::string name;
  double low = 0.0;
  double high = 0.0;
  bool log_scale = false;
  std::vector<double> choices;  // non-empty => discrete axis, range ignored

  // Throws std::invalid_argument on empty ranges or non-positive log bounds.
  void validate() const;
  // One draw from `rng`; low == high is allowed and degenerates to that value.
  double sample(RngStream& rng) const;
};

// Sampled values in axis order, keyed by axis name.
using HyperParams = std::vector<std::pair<std::string, double>>;

// Looks up a value by name; throws std::out_of_range when absent.
double hyper_value(const HyperParams& params, const std::string& name);

using SearchSpace = std::vector<AxisSpec>;

// Default per-trainer spaces. Population sizes and iteration budgets are
// pinned elsewhere; these ranges are free, so they are explicit, standard
// choices.
SearchSpace es_search_space();    // alpha, sigma log-uniform; hidden discrete
SearchSpace npso_search_space();  // inertia linear, init_std log; hidden discrete
SearchSpace sgd_search_space();   // learning_rate log; minibatch, hidden discrete

// What one trial reports back: trained weights plus their validation MSE
// (+inf when the trial diverged).
struct TrialOutcome {
  ParameterVector theta;
  double val_mse = 0.0;
};

// Trains one sampled configuration under its own budget share and scores it
// on the validation split. The runner must be pure: results may only depend
// on its arguments.
using TrialRunner =
    std::function<TrialOutcome(const HyperParams&, std::uint64_t trial_seed, BudgetMeter& meter)>;

struct SearchResult {
  long best_trial = -1;  // -1 when no trial produced a finite validation MSE
  HyperParams best_params;
  ParameterVector theta;
  double val_mse = 0.0;
  std::uint64_t passes_used = 0;          // summed over every trial's meter
  std::vector<double> trial_val_mse;      // per trial, +inf for divergent ones
  bool failed() const { return best_trial < 0; }
};

// Random hyperparameter search over `space`. Trial t samples every axis in
// order from the stream (seed, SearchDraw, t), trains via `runner` with
// trial_seed = derive_seed(seed, t) and a fresh BudgetMeter holding exactly
// budget / iterations units (the division must be exact), and the winner is
// the smallest finite validation MSE, ties to the earlier trial. Trials run
// in parallel across `workers`; selection is deterministic regardless.
SearchResult random_search(const SearchSpace& space, int iterations, std::uint64_t budget,
                           std::uint64_t seed, const TrialRunner& runner, int workers);

}  // namespace pbrnn
