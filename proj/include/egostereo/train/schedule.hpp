#pragma once

#include <cstdint>

#include "egostereo/errors.hpp"

namespace egostereo::train {

// Learning rate for 0-based `step` out of `total_steps`: the base rate for
// the first half of training, then a linear ramp down that would hit zero
// one step past the end (so every executed step still updates).
inline double lr_at(std::int64_t step, std::int64_t total_steps,
                    double base) {
  if (total_steps <= 0 || step < 0 || step >= total_steps)
    throw ConfigError("lr_at: step outside schedule");
  const double p =
      static_cast<double>(step) / static_cast<double>(total_steps);
  return p <= 0.5 ? base : base * (1.0 - p) / 0.5;
}

}  // namespace egostereo::train
