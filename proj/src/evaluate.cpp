#include "pbrnn/evaluate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pbrnn {

SplitRange train_range(const SequenceDataset& data) { return {0, data.train_end}; }
SplitRange val_range(const SequenceDataset& data) { return {data.train_end, data.val_end}; }
SplitRange test_range(const SequenceDataset& data) { return {data.val_end, data.rows()}; }

double sequence_mse(const CellSpec& spec, const WeightLayout& layout,
                    const ParameterVector& theta, const SequenceDataset& data, SplitRange range) {
  if (range.begin >= range.end || range.end > data.rows()) {
    throw std::invalid_argument("evaluation range is empty or out of bounds");
  }
  std::vector<double> preds;
  if (!forward_sequence(spec, layout, theta, data.features.data(), range.end, data.feature_dim,
                        nullptr, preds)) {
    return std::numeric_limits<double>::infinity();
  }
  double sse = 0.0;
  for (std::size_t t = range.begin; t < range.end; ++t) {
    const double e = preds[t] - data.targets[t];
    sse += e * e;
  }
  if (!std::isfinite(sse)) {
    return std::numeric_limits<double>::infinity();
  }
  return sse / static_cast<double>(range.end - range.begin);
}

double metered_train_mse(const CellSpec& spec, const WeightLayout& layout,
                         const ParameterVector& theta, const SequenceDataset& data,
                         BudgetMeter& meter) {
  meter.consume(1);
  return sequence_mse(spec, layout, theta, data, train_range(data));
}

bool predict_series(const CellSpec& spec, const WeightLayout& layout,
                    const ParameterVector& theta, const SequenceDataset& data,
                    std::vector<double>& predictions) {
  return forward_sequence(spec, layout, theta, data.features.data(), data.rows(),
                          data.feature_dim, nullptr, predictions);
}

}  // namespace pbrnn
