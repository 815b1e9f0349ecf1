#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pbrnn/parallel.hpp"
#include "pbrnn/search.hpp"

namespace pbrnn {

void AxisSpec::validate() const {
  if (!choices.empty()) {
    return;
  }
  if (!(low <= high)) {
    throw std::invalid_argument("axis '" + name + "': low must not exceed high");
  }
  if (log_scale && low <= 0.0) {
    throw std::invalid_argument("axis '" + name + "': log scale needs positive bounds");
  }
}

double AxisSpec::sample(RngStream& rng) const {
  const double u = rng.uniform();
  if (!choices.empty()) {
    auto idx = static_cast<std::size_t>(u * static_cast<double>(choices.size()));
    idx = std::min(idx, choices.size() - 1);
    return choices[idx];
  }
  if (low == high) {
    return low;
  }
  if (log_scale) {
    return std::exp(std::log(low) + u * (std::log(high) - std::log(low)));
  }
  return low + u * (high - low);
}

double hyper_value(const HyperParams& params, const std::string& name) {
  for (const auto& [key, value] : params) {
    if (key == name) {
      return value;
    }
  }
  throw std::out_of_range("no hyperparameter named '" + name + "'");
}

namespace {

const std::vector<double> kHiddenChoices{5, 10, 20, 40};

}  // namespace

SearchSpace es_search_space() {
  return {
      {"alpha", 1e-3, 1.0, true, {}},
      {"sigma", 1e-3, 1.0, true, {}},
      {"hidden", 0, 0, false, kHiddenChoices},
  };
}

SearchSpace npso_search_space() {
  return {
      {"inertia", 0.4, 0.99, false, {}},
      {"init_std", 0.01, 1.0, true, {}},
      {"hidden", 0, 0, false, kHiddenChoices},
  };
}

SearchSpace sgd_search_space() {
  return {
      {"learning_rate", 1e-4, 1e-2, true, {}},
      {"minibatch", 0, 0, false, {1, 2, 4, 8}},
      {"hidden", 0, 0, false, kHiddenChoices},
  };
}

SearchResult random_search(const SearchSpace& space, int iterations, std::uint64_t budget,
                           std::uint64_t seed, const TrialRunner& runner, int workers) {
  if (space.empty()) {
    throw std::invalid_argument("search space has no axes");
  }
  for (const AxisSpec& axis : space) {
    axis.validate();
  }
  if (iterations < 1) {
    throw std::invalid_argument("search needs at least one iteration");
  }
  const auto n = static_cast<std::uint64_t>(iterations);
  if (budget % n != 0) {
    throw std::invalid_argument("budget does not divide evenly into per-trial shares");
  }
  const std::uint64_t share = budget / n;

  std::vector<HyperParams> params(n);
  std::vector<TrialOutcome> outcomes(n);
  std::vector<std::uint64_t> used(n);
  parallel_for(n, workers, [&](std::size_t t) {
    RngStream draw(seed, RngPurpose::SearchDraw, t);
    HyperParams hp;
    hp.reserve(space.size());
    for (const AxisSpec& axis : space) {
      hp.emplace_back(axis.name, axis.sample(draw));
    }
    BudgetMeter meter(share);
    outcomes[t] = runner(hp, derive_seed(seed, t), meter);
    used[t] = meter.used();
    params[t] = std::move(hp);
  });

  SearchResult result;
  result.val_mse = std::numeric_limits<double>::infinity();
  result.trial_val_mse.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    result.passes_used += used[t];
    result.trial_val_mse[t] = outcomes[t].val_mse;
    // Strict < keeps the earliest of tied trials; non-finite never wins.
    if (std::isfinite(outcomes[t].val_mse) && outcomes[t].val_mse < result.val_mse) {
      result.val_mse = outcomes[t].val_mse;
      result.best_trial = static_cast<long>(t);
      result.best_params = params[t];
      result.theta = outcomes[t].theta;
    }
  }
  return result;
}

}  // namespace pbrnn
