#include "pbrnn/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <climits>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "pbrnn/evaluate.hpp"
#include "pbrnn/rng.hpp"

namespace pbrnn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int arch_index(CellKind kind) { return static_cast<int>(kind); }
int trainer_index(TrainerKind kind) { return static_cast<int>(kind); }

template <typename T>
bool has_duplicates(const std::vector<T>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      if (v[i] == v[j]) {
        return true;
      }
    }
  }
  return false;
}

template <typename T>
bool contains(const std::vector<T>& v, T x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

CellSpec spec_for(CellKind kind, std::size_t input_dim, int hidden,
                  const ExperimentConfig& cfg, const SequenceDataset& data) {
  CellSpec spec;
  spec.kind = kind;
  spec.input_dim = static_cast<int>(input_dim);
  spec.hidden_dim = hidden;
  spec.output_dim = 1;
  if (kind == CellKind::Fru) {
    spec.fru_frequencies = cfg.fru_frequencies;
    spec.fru_time_scale = cfg.fru_time_scale > 0
                              ? cfg.fru_time_scale
                              : static_cast<double>(std::max<std::size_t>(data.train_end, 1));
  }
  spec.validate();
  return spec;
}

// Number of trainer iterations hidden inside one search trial, after the
// parity checks: budget -> equal trial shares -> whole populations.
int pbo_iterations(std::uint64_t budget, int search_iters, int population) {
  if (budget == 0 || budget % static_cast<std::uint64_t>(search_iters) != 0) {
    throw BudgetParityError("budget does not split evenly across search trials");
  }
  const std::uint64_t share = budget / static_cast<std::uint64_t>(search_iters);
  if (share % static_cast<std::uint64_t>(population) != 0) {
    throw BudgetParityError("per-trial share does not split into whole populations");
  }
  const std::uint64_t iters = share / static_cast<std::uint64_t>(population);
  if (iters == 0 || iters > static_cast<std::uint64_t>(INT_MAX)) {
    throw BudgetParityError("per-trial share yields no usable iteration count");
  }
  return static_cast<int>(iters);
}

int sgd_epoch_cap(std::uint64_t budget, int search_iters) {
  if (budget == 0 || budget % static_cast<std::uint64_t>(search_iters) != 0) {
    throw BudgetParityError("budget does not split evenly across search trials");
  }
  const std::uint64_t share = budget / static_cast<std::uint64_t>(search_iters);
  return static_cast<int>(std::min<std::uint64_t>(share, INT_MAX));
}

}  // namespace

const char* trainer_name(TrainerKind kind) {
  switch (kind) {
    case TrainerKind::Sgd:
      return "sgd";
    case TrainerKind::Es:
      return "es";
    case TrainerKind::Npso:
      return "npso";
  }
  throw std::invalid_argument("unknown trainer");
}

const char* arch_name(CellKind kind) {
  switch (kind) {
    case CellKind::Lstm:
      return "lstm";
    case CellKind::Plstm:
      return "plstm";
    case CellKind::Fru:
      return "fru";
  }
  throw std::invalid_argument("unknown architecture");
}

TrainerKind trainer_from_name(const std::string& name) {
  for (TrainerKind kind : {TrainerKind::Sgd, TrainerKind::Es, TrainerKind::Npso}) {
    if (name == trainer_name(kind)) {
      return kind;
    }
  }
  throw std::invalid_argument("unknown trainer: " + name);
}

CellKind arch_from_name(const std::string& name) {
  for (CellKind kind : {CellKind::Lstm, CellKind::Plstm, CellKind::Fru}) {
    if (name == arch_name(kind)) {
      return kind;
    }
  }
  throw std::invalid_argument("unknown architecture: " + name);
}

ResultTable run_benchmark(const ExperimentConfig& cfg, const SequenceDataset& data) {
  if (cfg.architectures.empty() || cfg.trainers.empty()) {
    throw std::invalid_argument("benchmark needs at least one architecture and one trainer");
  }
  if (has_duplicates(cfg.architectures) || has_duplicates(cfg.trainers)) {
    throw std::invalid_argument("duplicate cell requested");
  }
  if (cfg.sgd_search < 1 || cfg.pbo_search < 1 || cfg.population < 1 || cfg.workers < 1) {
    throw std::invalid_argument("search iterations, population and workers must be positive");
  }
  if (cfg.truncation < 1 || cfg.patience < 1) {
    throw std::invalid_argument("truncation and patience must be positive");
  }
  const bool wants_sgd = contains(cfg.trainers, TrainerKind::Sgd);
  const bool wants_pbo =
      contains(cfg.trainers, TrainerKind::Es) || contains(cfg.trainers, TrainerKind::Npso);
  if (cfg.normalize && !(wants_sgd && contains(cfg.architectures, CellKind::Lstm))) {
    throw std::invalid_argument("normalisation needs the lstm+sgd reference cell");
  }
  if (data.train_end == 0 || data.val_end <= data.train_end || data.rows() <= data.val_end) {
    throw std::invalid_argument("dataset needs non-empty train, validation and test splits");
  }

  // All parity checks run before any training starts; a bad split rejects
  // the whole experiment.
  const int pbo_iters = wants_pbo ? pbo_iterations(cfg.budget, cfg.pbo_search, cfg.population) : 0;
  const int epoch_cap = wants_sgd ? sgd_epoch_cap(cfg.budget, cfg.sgd_search) : 0;

  ResultTable table;
  table.budget = cfg.budget;
  table.seed = cfg.seed;
  table.normalized = cfg.normalize;

  for (CellKind arch : cfg.architectures) {
    for (TrainerKind trainer : cfg.trainers) {
      CellResult cell;
      cell.arch = arch;
      cell.trainer = trainer;

      if (trainer == TrainerKind::Sgd && arch != CellKind::Lstm) {
        // No gradient path exists for these cells.
        cell.implemented = false;
        cell.failed = true;
        cell.test_mse = kInf;
        cell.normalized_mse = kInf;
        table.cells.push_back(std::move(cell));
        continue;
      }

      // The id is fixed by the position in the full grid, so a subset run
      // reproduces the matching cells of the full table.
      const int cell_id = arch_index(arch) * 3 + trainer_index(trainer);
      const std::uint64_t cell_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(cell_id));

      const auto started = std::chrono::steady_clock::now();

      TrialRunner runner;
      int search_iters = cfg.pbo_search;
      SearchSpace space;
      switch (trainer) {
        case TrainerKind::Sgd:
          search_iters = cfg.sgd_search;
          space = sgd_search_space();
          runner = [&, epoch_cap](const HyperParams& hp, std::uint64_t trial_seed,
                                  BudgetMeter& meter) {
            const CellSpec spec =
                spec_for(arch, data.feature_dim, static_cast<int>(hyper_value(hp, "hidden")),
                         cfg, data);
            const WeightLayout layout = WeightLayout::for_cell(spec);
            SgdConfig sc;
            sc.learning_rate = hyper_value(hp, "learning_rate");
            sc.minibatch = static_cast<int>(hyper_value(hp, "minibatch"));
            sc.truncation = cfg.truncation;
            sc.patience = cfg.patience;
            sc.max_epochs = epoch_cap;
            const TrainResult r = train_sgd(sc, spec, layout, data, trial_seed, &meter);
            return TrialOutcome{r.theta, r.final_val_loss};
          };
          break;
        case TrainerKind::Es:
          space = es_search_space();
          runner = [&, pbo_iters](const HyperParams& hp, std::uint64_t trial_seed,
                                  BudgetMeter& meter) {
            const CellSpec spec =
                spec_for(arch, data.feature_dim, static_cast<int>(hyper_value(hp, "hidden")),
                         cfg, data);
            const WeightLayout layout = WeightLayout::for_cell(spec);
            EsConfig ec;
            ec.step_size = hyper_value(hp, "alpha");
            ec.noise_std = hyper_value(hp, "sigma");
            ec.population = cfg.population;
            ec.iterations = pbo_iters;
            const LossFn train_loss = [&](const ParameterVector& theta) {
              return sequence_mse(spec, layout, theta, data, train_range(data));
            };
            const TrainResult r =
                train_es(ec, layout.size(), trial_seed, train_loss, &meter, 1);
            const double val = r.diverged
                                   ? kInf
                                   : sequence_mse(spec, layout, r.theta, data, val_range(data));
            return TrialOutcome{r.theta, val};
          };
          break;
        case TrainerKind::Npso:
          space = npso_search_space();
          runner = [&, pbo_iters](const HyperParams& hp, std::uint64_t trial_seed,
                                  BudgetMeter& meter) {
            const CellSpec spec =
                spec_for(arch, data.feature_dim, static_cast<int>(hyper_value(hp, "hidden")),
                         cfg, data);
            const WeightLayout layout = WeightLayout::for_cell(spec);
            NpsoConfig nc;
            nc.inertia = hyper_value(hp, "inertia");
            nc.init_std = hyper_value(hp, "init_std");
            nc.population = cfg.population;
            nc.iterations = pbo_iters;
            const LossFn train_loss = [&](const ParameterVector& theta) {
              return sequence_mse(spec, layout, theta, data, train_range(data));
            };
            const TrainResult r =
                train_npso(nc, layout.size(), trial_seed, train_loss, &meter, 1);
            const double val = r.diverged
                                   ? kInf
                                   : sequence_mse(spec, layout, r.theta, data, val_range(data));
            return TrialOutcome{r.theta, val};
          };
          break;
      }

      const SearchResult search =
          random_search(space, search_iters, cfg.budget, cell_seed, runner, cfg.workers);

      cell.passes_used = search.passes_used;
      if (cell.passes_used > cfg.budget) {
        throw BudgetParityError("cell exceeded its budget");  // meter makes this unreachable
      }
      if (search.failed()) {
        cell.failed = true;
        cell.test_mse = kInf;
      } else {
        cell.best_params = search.best_params;
        const CellSpec spec =
            spec_for(arch, data.feature_dim,
                     static_cast<int>(hyper_value(search.best_params, "hidden")), cfg, data);
        const WeightLayout layout = WeightLayout::for_cell(spec);
        // The single test-split touch for this cell.
        cell.test_mse = sequence_mse(spec, layout, search.theta, data, test_range(data));
      }

      if (cfg.include_timing) {
        cell.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      }
      table.cells.push_back(std::move(cell));
    }
  }

  if (cfg.normalize) {
    double reference = kInf;
    for (const CellResult& cell : table.cells) {
      if (cell.arch == CellKind::Lstm && cell.trainer == TrainerKind::Sgd) {
        reference = cell.test_mse;
      }
    }
    if (!std::isfinite(reference) || reference <= 0.0) {
      // The reference cell diverged; a normalised column would be noise.
      table.normalized = false;
    } else {
      for (CellResult& cell : table.cells) {
        if (cell.arch == CellKind::Lstm && cell.trainer == TrainerKind::Sgd) {
          cell.normalized_mse = 1.0;  // exact, by definition
        } else {
          cell.normalized_mse = cell.test_mse / reference;
        }
      }
    }
  }

  return table;
}

LongMemoryOptions::LongMemoryOptions() {
  synth.length = 2600;
  synth.lag = 40;
  // phi = 0 makes the stochastic part a pure lag-D process: every
  // autocovariance at lags 1..D-1 is exactly zero, so nothing inside a
  // shorter gradient window carries linear information about the target and
  // the omitted-lag baseline equals the full variance g(0). A nonzero phi
  // would leak the lag-D signal into short lags that truncated windows can
  // exploit, blurring the comparison this gate exists to make.
  synth.phi = 0.0;
  synth.gamma = 0.8;
}

LongMemoryReport long_memory_acceptance(const LongMemoryOptions& opts) {
  if (opts.synth.lag <= opts.truncation) {
    throw std::invalid_argument(
        "long-memory lag must exceed the gradient truncation window");
  }
  if (opts.budget == 0 ||
      opts.budget % static_cast<std::uint64_t>(opts.es_population) != 0) {
    throw BudgetParityError("budget does not split into whole swarm populations");
  }
  if (opts.hidden < 1) {
    throw std::invalid_argument("hidden dimension must be positive");
  }

  SynthConfig sc = opts.synth;
  sc.seed = derive_seed(opts.seed, 1);
  const RvSeries rv = generate_synthetic(sc);

  DatasetOptions dopts;
  dopts.lags = 1;  // one value per step: older structure must live in the state
  const SequenceDataset data = build_dataset(rv, dopts);
  const double scale = data.transform.stdev * data.transform.stdev;

  LongMemoryReport report;
  report.mean_baseline_mse = synth_missing_lag_mse(sc);
  report.noise_floor = synth_noise_floor(sc);
  report.control = sc.gamma == 0.0;

  const CellSpec spec = [&] {
    CellSpec s;
    s.kind = CellKind::Lstm;
    s.input_dim = static_cast<int>(data.feature_dim);
    s.hidden_dim = opts.hidden;
    s.output_dim = 1;
    s.validate();
    return s;
  }();
  const WeightLayout layout = WeightLayout::for_cell(spec);

  // Gradient side: fixed hyperparameters, restarted from fresh seeds until
  // the budget is spent, keeping the best-validation model. Restarts are how
  // a truncated-window trainer best uses a pass budget this size.
  {
    BudgetMeter meter(opts.budget);
    SgdConfig cfg;
    cfg.learning_rate = opts.sgd_learning_rate;
    cfg.minibatch = opts.sgd_minibatch;
    cfg.truncation = opts.truncation;
    cfg.patience = opts.sgd_patience;
    cfg.max_epochs = 300;
    ParameterVector best;
    double best_val = kInf;
    for (std::uint64_t restart = 0; meter.remaining() > 0; ++restart) {
      const TrainResult r = train_sgd(cfg, spec, layout, data,
                                      derive_seed(opts.seed, 2, restart), &meter);
      if (r.final_val_loss < best_val) {
        best_val = r.final_val_loss;
        best = r.theta;
      }
    }
    report.sgd_passes = meter.used();
    report.sgd_mse = best.empty()
                         ? kInf
                         : scale * sequence_mse(spec, layout, best, data, test_range(data));
  }

  // Gradient-free side: one long full-sequence run under the same cap.
  {
    BudgetMeter meter(opts.budget);
    EsConfig cfg;
    cfg.step_size = opts.es_alpha;
    cfg.noise_std = opts.es_sigma;
    cfg.population = opts.es_population;
    cfg.iterations = static_cast<int>(opts.budget / static_cast<std::uint64_t>(opts.es_population));
    const LossFn train_loss = [&](const ParameterVector& theta) {
      return sequence_mse(spec, layout, theta, data, train_range(data));
    };
    const TrainResult r =
        train_es(cfg, layout.size(), derive_seed(opts.seed, 3), train_loss, &meter, opts.workers);
    report.es_passes = meter.used();
    report.es_mse = r.diverged
                        ? kInf
                        : scale * sequence_mse(spec, layout, r.theta, data, test_range(data));
  }

  report.pass = !report.control && report.es_mse <= 0.5 * report.sgd_mse &&
                report.sgd_mse >= 0.9 * report.mean_baseline_mse;
  return report;
}

LongMemoryReport long_memory_acceptance(std::uint64_t seed, int lag, int truncation) {
  LongMemoryOptions opts;
  opts.seed = seed;
  opts.synth.lag = lag;
  opts.truncation = truncation;
  return long_memory_acceptance(opts);
}

}  // namespace pbrnn
