#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pbrnn/cells.hpp"
#include "pbrnn/data.hpp"
#include "pbrnn/optim.hpp"
#include "pbrnn/search.hpp"

namespace pbrnn {

enum class TrainerKind { Sgd, Es, Npso };

const char* trainer_name(TrainerKind kind);
const char* arch_name(CellKind kind);
TrainerKind trainer_from_name(const std::string& name);  // throws std::invalid_argument
CellKind arch_from_name(const std::string& name);        // throws std::invalid_argument

// The per-cell budget cannot be split into the configured number of equal
// trial shares (or a share into whole swarm/population iterations). Mapped
// to its own exit code by the CLI, distinct from plain config errors.
struct BudgetParityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One full benchmark: every (architecture, trainer) cell runs a random
// hyperparameter search under the same forward-pass budget.
struct ExperimentConfig {
  std::vector<CellKind> architectures = {CellKind::Lstm, CellKind::Plstm, CellKind::Fru};
  std::vector<TrainerKind> trainers = {TrainerKind::Sgd, TrainerKind::Es, TrainerKind::Npso};
  std::uint64_t budget = 30000;  // forward passes per cell, identical across cells
  int sgd_search = 100;          // random-search trials for the gradient column
  int pbo_search = 20;           // random-search trials for ES / NPSO columns
  int population = 30;           // individuals (ES) / particles (NPSO) per iteration
  std::uint64_t seed = 1;
  int workers = 1;               // parallel trials inside a cell
  bool normalize = true;         // divide every cell by the LSTM+SGD cell
  bool include_timing = false;   // record wall time (off keeps output byte-stable)
  // Fixed (non-searched) trainer knobs.
  int truncation = 20;
  int patience = 25;
  std::vector<double> fru_frequencies = {0, 1, 2, 4, 8, 16};
  double fru_time_scale = 0;     // 0 = use the training-split length
};

struct CellResult {
  CellKind arch = CellKind::Lstm;
  TrainerKind trainer = TrainerKind::Sgd;
  bool implemented = true;  // false: gradient training requested for plstm/fru
  bool failed = false;      // every search trial diverged
  double test_mse = 0.0;
  double normalized_mse = 0.0;
  HyperParams best_params;
  std::uint64_t passes_used = 0;
  double wall_seconds = 0.0;
};

struct ResultTable {
  std::vector<CellResult> cells;  // architecture-major, trainer-minor order
  std::uint64_t budget = 0;
  std::uint64_t seed = 0;
  bool normalized = false;
};

// Runs the full grid on an already-built dataset. Validation picks each
// cell's winner; the test split is touched exactly once per cell. Trials
// inside a cell run across `workers` threads, each trial single-threaded,
// with all randomness derived from (seed, cell id, trial index) so the
// schedule never shows in the numbers. Cell ids are fixed by the full
// 3 x 3 grid (arch * 3 + trainer), so running a subset of cells reproduces
// the corresponding cells of the full run.
//
// Throws BudgetParityError when the budget does not divide into equal
// per-trial shares (SGD: budget % sgd_search; PBO: budget % pbo_search and
// share % population, share >= population), std::invalid_argument on other
// bad configs — duplicate cells, empty grid, normalisation without the
// LSTM+SGD reference cell, empty validation or test split.
ResultTable run_benchmark(const ExperimentConfig& cfg, const SequenceDataset& data);

// ---------------------------------------------------------------------------
// Long-memory gate: the central directional claim. An LSTM trained by
// truncated-window gradient descent cannot use structure older than its
// truncation window, a full-sequence gradient-free trainer can.
// ---------------------------------------------------------------------------
struct LongMemoryOptions {
  SynthConfig synth;             // synth.lag is the long-memory lag D
  int truncation = 20;           // gradient window, must be < synth.lag
  std::uint64_t budget = 6000;   // forward passes, same cap for both trainers
  std::uint64_t seed = 1;
  int workers = 1;
  int hidden = 8;
  // Fixed hyperparameters for the two single runs (recorded, not searched).
  // The raw-reward es update random-walks with step ~ alpha*loss*sqrt(K/N)
  // before descent takes over, so alpha must stay small at this budget or the
  // centre drifts into divergence before learning anything.
  double es_alpha = 0.02;
  double es_sigma = 0.05;
  int es_population = 30;
  double sgd_learning_rate = 5e-3;
  int sgd_minibatch = 1;
  int sgd_patience = 50;

  LongMemoryOptions();  // shapes the default synth config for the gate
};

struct LongMemoryReport {
  // Test MSEs in log-variance units (the transform is undone so the numbers
  // compare directly against the analytic baselines below).
  double sgd_mse = 0.0;
  double es_mse = 0.0;
  double mean_baseline_mse = 0.0;  // predictor that omits the lag-D term
  double noise_floor = 0.0;        // irreducible one-step noise variance
  std::uint64_t sgd_passes = 0;
  std::uint64_t es_passes = 0;
  bool control = false;  // gamma = 0 run: no long memory, pass not applicable
  bool pass = false;     // es <= 0.5 sgd and sgd >= 0.9 baseline
};

// Generates the seasonal lag-D series, trains SGD-LSTM (window `truncation`)
// and ES-LSTM (full sequence) under equal budgets, and scores both on the
// held-out test split. Throws std::invalid_argument when D <= truncation
// (the generator would not out-range the window) or the budget does not
// divide into whole ES iterations.
LongMemoryReport long_memory_acceptance(const LongMemoryOptions& opts);

// Convenience form used by the CLI: default options at the given seed.
LongMemoryReport long_memory_acceptance(std::uint64_t seed, int lag = 40, int truncation = 20);

}  // namespace pbrnn
