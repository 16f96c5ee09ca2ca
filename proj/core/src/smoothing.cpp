// SPDX-License-Identifier: Apache-2.0
#include "pyric/smoothing.hpp"

#include <cmath>

namespace pyric {

double smooth_branch(double x, double a, double y, double z,
                     const SmoothBranchParams& params) {
  if (!(std::isfinite(x) && std::isfinite(a) && std::isfinite(y) &&
        std::isfinite(z)))
    throw DomainError("smooth_branch: non-finite input");
  if (!(params.alpha > 0.0))
    throw DomainError("smooth_branch: alpha must be positive");
  if (params.hard_mode) return x < a ? y : z;
  const double s = sigmoid_value((x - a) * params.alpha);
  return s * (z - y) + y;
}

NodeId smooth_branch(Tape& tape, NodeId x, NodeId a, NodeId y, NodeId z,
                     NodeId alpha) {
  const NodeId s = tape.sigmoid(tape.mul(tape.sub(x, a), alpha));
  return tape.add(tape.mul(s, tape.sub(z, y)), y);
}

} // namespace pyric
