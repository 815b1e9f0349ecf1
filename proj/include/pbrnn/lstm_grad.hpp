#pragma once

#include <cstddef>
#include <vector>

#include "pbrnn/cells.hpp"
#include "pbrnn/params.hpp"

namespace pbrnn {

// Exact gradient of the windowed mean-squared loss of an LSTM, computed by
// backpropagation through time over rows [w_begin, w_end) of a row-major
// feature matrix. `carried` supplies the state entering the window and is
// treated as a constant (truncation boundary); on success it is advanced to
// the state leaving the window so consecutive windows chain statefully.
//
// features and targets are indexed by absolute row: features + t * feature_dim
// and targets + t * output_dim. The loss is the mean over (steps x output
// dims) of squared prediction error; its value is written to *loss_out when
// non-null. grad_out is resized to the flat parameter count and overwritten.
//
// Returns false if any forward step produces a non-finite state or output; the
// gradient and carried state are then unspecified. Throws std::invalid_argument
// for non-LSTM specs or an empty window.
bool lstm_bptt_gradient(const CellSpec& spec, const WeightLayout& layout,
                        const ParameterVector& theta, const double* features,
                        const double* targets, std::size_t w_begin, std::size_t w_end,
                        std::size_t feature_dim, CellState& carried,
                        std::vector<double>& grad_out, double* loss_out);

}  // namespace pbrnn
