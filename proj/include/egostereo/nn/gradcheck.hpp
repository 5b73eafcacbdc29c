#pragma once

#include <functional>

#include "egostereo/nn/tensor.hpp"
#include "egostereo/rng.hpp"

namespace egostereo::nn {

// Central-difference check of an analytic gradient.
//
// `eval` recomputes the scalar loss from the current parameter contents.
// `param` is perturbed in place and restored. `analytic` is the gradient
// under test. Checks every element when sample_count < 0, otherwise a
// random subset. Returns max |fd - analytic| / max(1, |fd|, |analytic|),
// relative for large gradients and absolute near zero.
inline double gradcheck_max_err(
    const std::function<double()>& eval, Tensor<double>& param,
    const Tensor<double>& analytic, Rng& rng, int sample_count = -1,
    double step = 1e-5) {
  if (!param.same_shape(analytic)) {
    throw ShapeError("gradcheck: gradient shape mismatch");
  }
  double worst = 0.0;
  const std::int64_t n = param.size();
  const std::int64_t checks = sample_count < 0 ? n : sample_count;
  for (std::int64_t s = 0; s < checks; ++s) {
    const std::int64_t i =
        sample_count < 0 ? s : static_cast<std::int64_t>(rng.index(n));
    const double saved = param.data[i];
    const double h = step * std::max(1.0, std::abs(saved));
    param.data[i] = saved + h;
    const double up = eval();
    param.data[i] = saved - h;
    const double dn = eval();
    param.data[i] = saved;
    const double fd = (up - dn) / (2.0 * h);
    const double an = analytic.data[i];
    const double err =
        std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
    if (err > worst) worst = err;
  }
  return worst;
}

}  // namespace egostereo::nn
