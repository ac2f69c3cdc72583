#pragma once

#include <string>

#include "sis/errors.hpp"

namespace sis {

/// beta: infection probability per infected link; delta: recovery probability.
struct EpidemicParams {
  double beta = 0.0;
  double delta = 0.0;

  EpidemicParams() = default;
  EpidemicParams(double beta_, double delta_) : beta(beta_), delta(delta_) {
    if (!(beta >= 0.0 && beta <= 1.0)) {
      throw ParameterError("beta must lie in [0, 1], got " + std::to_string(beta));
    }
    if (!(delta >= 0.0 && delta <= 1.0)) {
      throw ParameterError("delta must lie in [0, 1], got " + std::to_string(delta));
    }
  }

  /// Effective infection rate beta / delta.
  double tau() const {
    if (delta <= 0.0) throw ParameterError("tau is undefined for delta = 0");
    return beta / delta;
  }

  /// 1 - delta - beta >= 0: M'' is nonnegative and its bound propagates.
  bool q_bound_propagates() const { return 1.0 - delta - beta >= 0.0; }
};

}  // namespace sis
