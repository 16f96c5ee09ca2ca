// SPDX-License-Identifier: Apache-2.0
#include "pyric/loss.hpp"

#include <cmath>

namespace pyric {

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  hits += o.hits;
  misses += o.misses;
  false_alarms += o.false_alarms;
  correct_negatives += o.correct_negatives;
  soft = soft || o.soft;
  return *this;
}

namespace {

void check_series(std::size_t n_index, std::size_t n_obs) {
  if (n_index == 0) throw DomainError("counts: empty series");
  if (n_index != n_obs)
    throw DomainError("counts: index and observation series differ in length");
}

} // namespace

ConfusionCounts hard_counts(std::span<const double> index_values,
                            std::span<const std::uint8_t> observations,
                            double threshold) {
  check_series(index_values.size(), observations.size());
  ConfusionCounts c;
  for (std::size_t i = 0; i < index_values.size(); ++i) {
    const bool predicted = index_values[i] > threshold;
    const bool observed = observations[i] != 0;
    if (observed) {
      (predicted ? c.hits : c.misses) += 1.0;
    } else {
      (predicted ? c.false_alarms : c.correct_negatives) += 1.0;
    }
  }
  return c;
}

ConfusionCounts soft_counts(std::span<const double> index_values,
                            std::span<const std::uint8_t> observations,
                            double threshold, double beta) {
  check_series(index_values.size(), observations.size());
  if (!(beta > 0.0)) throw DomainError("soft_counts: beta must be positive");
  ConfusionCounts c;
  c.soft = true;
  for (std::size_t i = 0; i < index_values.size(); ++i) {
    const double p = sigmoid_value(beta * (index_values[i] - threshold));
    if (observations[i] != 0) {
      c.hits += p;
      c.misses += 1.0 - p;
    } else {
      c.false_alarms += p;
      c.correct_negatives += 1.0 - p;
    }
  }
  return c;
}

EdiScore edi(const ConfusionCounts& counts, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 0.5))
    throw DomainError("edi: epsilon must be in (0, 0.5)");
  const double n_fire = counts.observed_positives();
  const double n_nofire = counts.observed_negatives();
  if (n_fire <= 0.0)
    throw DegenerateDataError("edi: no observed fires, hit rate undefined");
  if (n_nofire <= 0.0)
    throw DegenerateDataError(
        "edi: no observed non-fires, false-alarm rate undefined");

  EdiScore score;
  const double h_raw = counts.hits / n_fire;
  const double f_raw = counts.false_alarms / n_nofire;
  score.h = std::min(std::max(h_raw, epsilon), 1.0 - epsilon);
  score.f = std::min(std::max(f_raw, epsilon), 1.0 - epsilon);
  score.degenerate = (score.h != h_raw) || (score.f != f_raw);
  const double lh = std::log(score.h);
  const double lf = std::log(score.f);
  score.value = (lf - lh) / (lf + lh);
  return score;
}

SoftCountNodes soft_counts(Tape& tape, std::span<const NodeId> index_values,
                           std::span<const std::uint8_t> observations,
                           double threshold, double beta) {
  check_series(index_values.size(), observations.size());
  if (!(beta > 0.0)) throw DomainError("soft_counts: beta must be positive");

  SoftCountNodes out{};
  const NodeId thr = tape.constant(threshold);
  const NodeId beta_c = tape.constant(beta);
  NodeId hits = tape.constant(0.0);
  NodeId fas = tape.constant(0.0);
  double n_fire = 0.0, n_nofire = 0.0;
  for (std::size_t i = 0; i < index_values.size(); ++i) {
    const NodeId p =
        tape.sigmoid(tape.mul(tape.sub(index_values[i], thr), beta_c));
    if (observations[i] != 0) {
      hits = tape.add(hits, p);
      n_fire += 1.0;
    } else {
      fas = tape.add(fas, p);
      n_nofire += 1.0;
    }
  }
  out.hits = hits;
  out.false_alarms = fas;
  out.misses = tape.sub(tape.constant(n_fire), hits);
  out.correct_negatives = tape.sub(tape.constant(n_nofire), fas);
  out.n_fire = n_fire;
  out.n_nofire = n_nofire;
  return out;
}

NodeId edi_node(Tape& tape, const SoftCountNodes& counts, double epsilon) {
  if (counts.n_fire <= 0.0)
    throw DegenerateDataError("edi: no observed fires, hit rate undefined");
  if (counts.n_nofire <= 0.0)
    throw DegenerateDataError(
        "edi: no observed non-fires, false-alarm rate undefined");
  auto rate = [&](NodeId count, double total) {
    const NodeId r = tape.div(count, tape.constant(total));
    return tape.min_const(tape.max_const(r, epsilon), 1.0 - epsilon);
  };
  const NodeId h = rate(counts.hits, counts.n_fire);
  const NodeId f = rate(counts.false_alarms, counts.n_nofire);
  const NodeId lh = tape.log(h);
  const NodeId lf = tape.log(f);
  return tape.div(tape.sub(lf, lh), tape.add(lf, lh));
}

NodeId edi_loss(Tape& tape, std::span<const NodeId> index_values,
                std::span<const std::uint8_t> observations, double threshold,
                double beta, double epsilon) {
  const SoftCountNodes counts =
      soft_counts(tape, index_values, observations, threshold, beta);
  const NodeId score = edi_node(tape, counts, epsilon);
  return tape.sub(tape.constant(1.0), score);
}

} // namespace pyric
