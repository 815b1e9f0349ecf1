#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pbrnn/params.hpp"
#include "pbrnn/rng.hpp"

namespace pbrnn {

enum class CellKind { Lstm, Plstm, Fru };

std::string to_string(CellKind kind);
bool cell_kind_from_string(std::string_view name, CellKind& out);

// Defaults for the phased time gate. Raw gate parameters live in the flat
// vector and modulate these: period scales by exp(raw), the open ratio moves
// on a logistic around its default, and the shift is raw * period.
struct PlstmDefaults {
  double period = 50.0;
  double open_ratio = 0.1;
  double leak = 0.001;
};

struct CellSpec {
  CellKind kind = CellKind::Lstm;
  int input_dim = 1;
  int hidden_dim = 8;
  int output_dim = 1;
  // FRU frequency grid, in cycles per time_scale steps. A frequency of zero
  // turns its accumulator into a plain running average of the summary.
  std::vector<double> fru_frequencies;
  double fru_time_scale = 256.0;
  PlstmDefaults plstm;
  bool plstm_force_open = false;  // pins the time gate at 1 (ablation/testing)

  // Throws std::invalid_argument on inconsistent fields.
  void validate() const;
};

struct TensorSpec {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 1;
  std::size_t offset = 0;

  std::size_t size() const { return rows * cols; }
};

// The bijection between structured weight tensors and the flat vector the
// optimizers act on. Tensors are laid out contiguously in declaration order.
class WeightLayout {
 public:
  static WeightLayout for_cell(const CellSpec& spec);

  std::size_t size() const { return total_; }
  const std::vector<TensorSpec>& tensors() const { return tensors_; }
  const TensorSpec& tensor(std::string_view name) const;
  bool has_tensor(std::string_view name) const;

  std::span<double> slice(std::string_view name, ParameterVector& theta) const;
  std::span<const double> slice(std::string_view name, const ParameterVector& theta) const;

  std::vector<std::pair<std::string, std::vector<double>>> unflatten(
      const ParameterVector& theta) const;
  ParameterVector flatten(
      const std::vector<std::pair<std::string, std::vector<double>>>& tensors) const;

 private:
  std::vector<TensorSpec> tensors_;
  std::size_t total_ = 0;

  void add(std::string name, std::size_t rows, std::size_t cols = 1);
};

// Recurrent state carried across steps. For LSTM/P-LSTM `memory` is the cell
// vector (size H); for FRU it is the K x H matrix of frequency statistics,
// row-major by frequency. step_index counts completed steps and provides the
// default time axis.
struct CellState {
  std::vector<double> hidden;
  std::vector<double> memory;
  long step_index = 0;

  static CellState zero(const CellSpec& spec);
};

// One recursion step. x has input_dim entries, y_out output_dim entries, and
// t is the time value used by the P-LSTM gate and the FRU basis (callers pass
// the step index unless an explicit time axis overrides it). Returns false if
// the new state or output is non-finite; state is then unspecified.
bool forward_step(const CellSpec& spec, const WeightLayout& layout, const ParameterVector& theta,
                  CellState& state, std::span<const double> x, double t,
                  std::span<double> y_out);

// Full, untruncated pass from the zero state over rows [0, steps) of a
// row-major feature matrix. Writes one prediction (first output dim) per step.
// time_axis may be null, in which case the step index is used. Returns false
// on divergence at any step.
bool forward_sequence(const CellSpec& spec, const WeightLayout& layout,
                      const ParameterVector& theta, const double* features, std::size_t steps,
                      std::size_t feature_dim, const double* time_axis,
                      std::vector<double>& predictions);

// Weight initialisation for the SGD baseline: per-tensor uniform in
// [-r, r] with r = sqrt(6 / (fan_in + fan_out)), recurrent kernel blocks
// orthonormalized, biases zero except the forget-gate block at 1.
ParameterVector init_weights_glorot(const CellSpec& spec, const WeightLayout& layout,
                                    RngStream& rng);

}  // namespace pbrnn
