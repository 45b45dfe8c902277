#pragma once

#include "optrec/functional.hpp"
#include "optrec/model.hpp"

#include <optional>

namespace optrec {

/// One estimation instance: the model set, the observations, the target and
/// an optional l_p noise ball on the observations.
struct Problem {
  ModelSet model;
  ObservationMap observations;
  TargetFunctional target;
  std::optional<NoiseModel> noise;

  int dim() const { return model_dim(model); }
  int m() const { return observations.m(); }
  /// Noise that actually changes anything: positive radius and m > 0.
  bool noisy() const { return noise.has_value() && noise->radius > 0.0 && m() > 0; }

  /// Throws DimensionError / InputError on inconsistent pieces.
  void validate() const;
};

}  // namespace optrec
