// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pyric/autodiff.hpp"

namespace pyric {

/// Differentiable relaxation of `if X < A then Y else Z`:
///
///     sigmoid((X - A) * alpha) * (Z - Y) + Y
///
/// where alpha > 0 controls the sharpness of the blend. In hard mode the
/// exact discrete branch is evaluated instead; the tie X == A takes the
/// else side (Z).
struct SmoothBranchParams {
  double alpha = 1.0;
  bool hard_mode = false;
};

/// Plain-double evaluation. Output always lies in the closed interval
/// between y and z.
double smooth_branch(double x, double a, double y, double z,
                     const SmoothBranchParams& params);

/// Exact discrete branch (hard_mode shortcut, used by reference-style
/// call sites).
inline double hard_branch(double x, double a, double y, double z) {
  return x < a ? y : z;
}

/// Tape-recorded smooth blend. `alpha` is a tape value so the sharpness
/// of each branch site is learnable.
NodeId smooth_branch(Tape& tape, NodeId x, NodeId a, NodeId y, NodeId z,
                     NodeId alpha);

} // namespace pyric
