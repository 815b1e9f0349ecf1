#pragma once

namespace pbrnn {

// Transform applied to realized variance before it becomes a feature/target.
// StandardizedLog is the default: log then z-score with training-split stats,
// which keeps losses comparable across architectures on heavy-tailed series.
enum class TargetTransform {
  Identity,
  Log,
  StandardizedLog,
};

struct LossSpec {
  enum class Kind { Mse };
  Kind kind = Kind::Mse;
  TargetTransform transform = TargetTransform::StandardizedLog;
};

}  // namespace pbrnn
