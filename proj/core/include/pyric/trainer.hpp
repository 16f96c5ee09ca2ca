// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pyric/grid.hpp"
#include "pyric/loss.hpp"
#include "pyric/params.hpp"

namespace pyric {

struct TrainConfig {
  double learning_rate = 1e-3;
  int max_epochs = 100;
  double clip_limit = 10.0;   // per-node and per-parameter gradient bound
  double quantile_q = 0.5;    // forecast threshold quantile
  double beta = 10.0;         // soft-count temperature
  double beta_end = 0.0;      // > beta enables a linear anneal across epochs
  int patience = 10;          // epochs without validation improvement
  double validation_fraction = 0.0; // 0 = hold out the final calendar year
  int batch = 0;              // cell-days per step; 0 = full pooling
  std::uint64_t seed = 0;
  int threads = 0;            // 0 = PYRIC_THREADS env or hardware

  void validate() const;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_edi = 0.0;
  double threshold = 0.0;
  double beta = 0.0;
  std::uint64_t clip_events = 0;
  std::uint64_t nan_zeroed = 0;
};

/// A training snapshot; serializes losslessly together with its ledger.
struct Checkpoint {
  int epoch = 0;
  ParameterSet params;
  double train_loss = 0.0;
  double val_edi = 0.0;
  double threshold = 0.0;
  std::uint64_t clip_events = 0;
  std::uint64_t nan_zeroed = 0;

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

struct TrainResult {
  Checkpoint best;
  std::vector<EpochStats> history;
  bool early_stopped = false;
  bool diverged = false;
};

/// One plain-SGD update. `update_grads` holds one gradient per ledger
/// index, already transformed into each parameter's update space (log
/// space for the branch alphas) and clipped. Frozen parameters are
/// skipped regardless of their gradient.
void sgd_step(ParameterSet& params, std::span<const double> update_grads,
              double learning_rate);

/// Hard-mode IC series over the valid cell-days of a window, in (cell,
/// day) order, with the matching fire observations. Each cell spins up on
/// the first 30 days of the window.
struct IndexSeries {
  std::vector<double> ic;
  std::vector<std::uint8_t> obs;
};
IndexSeries hard_ic_series(const Dataset& data, const SplitView& window,
                           const ParameterSet& params, int threads);

/// Hard-mode validation: hard counts at `threshold`, hard EDI.
EdiScore validate(const Dataset& data, const SplitView& window,
                  const ParameterSet& params, double threshold, int threads);

/// Gradient-descent calibration against the EDI loss. Per epoch: refresh
/// the forecast threshold from the training portion, run the smooth
/// forward over training cell-days, backpropagate the soft-EDI loss with
/// clipping, apply SGD to the unfrozen parameters, and score hard-mode
/// EDI on the held-out validation tail. Returns the best-validation
/// checkpoint.
TrainResult train(const Dataset& data, const SplitView& train_window,
                  const ParameterSet& initial, const TrainConfig& config);

} // namespace pyric
