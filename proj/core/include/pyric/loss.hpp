// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>

#include "pyric/autodiff.hpp"

namespace pyric {

/// 2x2 contingency table. In hard mode the counts are integers (stored as
/// doubles); soft counts are sigmoid-weighted and real-valued.
struct ConfusionCounts {
  double hits = 0.0;
  double misses = 0.0;
  double false_alarms = 0.0;
  double correct_negatives = 0.0;
  bool soft = false;

  double observed_positives() const { return hits + misses; }
  double observed_negatives() const { return false_alarms + correct_negatives; }
  ConfusionCounts& operator+=(const ConfusionCounts& o);
};

/// Extremal Dependency Index: (log F - log H) / (log F + log H), in
/// [-1, 1]; 1 is a perfect forecast, 0 a random one. `degenerate` is set
/// when a rate had to be floored to epsilon or capped at 1 - epsilon.
struct EdiScore {
  double value = 0.0;
  double h = 0.0; // hit rate
  double f = 0.0; // false-alarm rate
  bool degenerate = false;
};

/// Hard contingency accumulation; prediction = (index > threshold).
/// Throws DomainError on empty/misaligned series.
ConfusionCounts hard_counts(std::span<const double> index_values,
                            std::span<const std::uint8_t> observations,
                            double threshold);

/// Plain-double soft counts: p_i = sigmoid(beta * (index_i - threshold))
/// summed into the four cells by observation.
ConfusionCounts soft_counts(std::span<const double> index_values,
                            std::span<const std::uint8_t> observations,
                            double threshold, double beta);

/// EDI from counts; hit and false-alarm rates are floored to epsilon and
/// capped at 1 - epsilon before the logs. Throws DegenerateDataError when
/// there are no observed fires (H undefined) or no observed non-fires.
EdiScore edi(const ConfusionCounts& counts, double epsilon = 1e-6);

/// Tape-recorded soft counts over index-value nodes.
struct SoftCountNodes {
  NodeId hits;
  NodeId misses;
  NodeId false_alarms;
  NodeId correct_negatives;
  double n_fire;    // number of observed-fire samples
  double n_nofire;  // number of observed-no-fire samples
};

SoftCountNodes soft_counts(Tape& tape, std::span<const NodeId> index_values,
                           std::span<const std::uint8_t> observations,
                           double threshold, double beta);

/// Differentiable EDI over soft counts.
NodeId edi_node(Tape& tape, const SoftCountNodes& counts,
                double epsilon = 1e-6);

/// Differentiable training loss 1 - EDI(soft counts); minimizing the loss
/// maximizes EDI. Gradients flow to the index-value nodes.
NodeId edi_loss(Tape& tape, std::span<const NodeId> index_values,
                std::span<const std::uint8_t> observations, double threshold,
                double beta, double epsilon = 1e-6);

} // namespace pyric
