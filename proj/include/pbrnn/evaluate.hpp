#pragma once

#include <cstddef>
#include <vector>

#include "pbrnn/budget.hpp"
#include "pbrnn/cells.hpp"
#include "pbrnn/data.hpp"
#include "pbrnn/params.hpp"

namespace pbrnn {

// Half-open row range of a SequenceDataset.
struct SplitRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};

SplitRange train_range(const SequenceDataset& data);
SplitRange val_range(const SequenceDataset& data);
SplitRange test_range(const SequenceDataset& data);

// Mean squared prediction error over [range.begin, range.end). The cell runs
// from the zero state over rows [0, range.end) so later splits see the state
// warmed by everything before them; only rows inside the range score. Pure:
// never touches a budget meter. Returns +inf if the forward pass diverges.
// Throws std::invalid_argument on an empty or out-of-bounds range.
double sequence_mse(const CellSpec& spec, const WeightLayout& layout,
                    const ParameterVector& theta, const SequenceDataset& data, SplitRange range);

// Training-split evaluation that charges one budget unit (one full forward
// pass over the training sequence). Throws BudgetExhausted when the meter is
// spent; the meter is charged before the pass runs.
double metered_train_mse(const CellSpec& spec, const WeightLayout& layout,
                         const ParameterVector& theta, const SequenceDataset& data,
                         BudgetMeter& meter);

// Model-space predictions for every dataset row, from the zero state.
// Returns false on divergence.
bool predict_series(const CellSpec& spec, const WeightLayout& layout,
                    const ParameterVector& theta, const SequenceDataset& data,
                    std::vector<double>& predictions);

}  // namespace pbrnn
