#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace pbrnn {

// Flat vector of all network weights; the object every optimizer acts on.
// Its length is always the total size C of the associated WeightLayout.
using ParameterVector = std::vector<double>;

inline bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      return false;
    }
  }
  return true;
}

}  // namespace pbrnn
