// SPDX-License-Identifier: Apache-2.0
#include "pyric/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "pyric/ic_model.hpp"
#include "pyric/rng.hpp"
#include "pyric/threading.hpp"

namespace pyric {

using ordered_json = nlohmann::ordered_json;

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw DomainError("train config: learning_rate must be >= 0");
  if (max_epochs <= 0) throw DomainError("train config: max_epochs must be > 0");
  if (!(clip_limit > 0.0)) throw DomainError("train config: clip_limit must be > 0");
  if (!(quantile_q > 0.0 && quantile_q < 1.0))
    throw DomainError("train config: quantile_q must be inside (0, 1)");
  if (!(beta > 0.0)) throw DomainError("train config: beta must be > 0");
  if (beta_end != 0.0 && beta_end < beta)
    throw DomainError("train config: beta_end must be >= beta (or 0)");
  if (patience <= 0) throw DomainError("train config: patience must be > 0");
  if (validation_fraction < 0.0 || validation_fraction >= 1.0)
    throw DomainError("train config: validation_fraction must be in [0, 1)");
  if (batch < 0) throw DomainError("train config: batch must be >= 0");
}

// ---------------------------------------------------------------------------
// Window tables: per-cell input series over a day window, built once.

namespace {

struct CellSeries {
  int row = 0;
  int col = 0;
  std::vector<CellInputs> inputs;     // one per window day
  std::vector<std::uint8_t> valid;    // missing-data mask
  std::vector<std::uint8_t> obs;      // fire observation
  std::size_t sample_begin = 0;       // index of this cell's first sample
  std::size_t n_samples = 0;          // number of valid days
};

struct WindowTable {
  std::vector<CellSeries> cells;
  std::size_t n_samples = 0;
  std::size_t n_fire = 0;
};

WindowTable build_table(const Dataset& data, const SplitView& window) {
  if (window.n_days() <= 0)
    throw DomainError("train: empty day window");
  WindowTable table;
  const GridDefinition& grid = data.stack.grid;
  const std::size_t cells = grid.n_cells();
  std::size_t next_sample = 0;
  for (int r = 0; r < grid.n_rows; ++r) {
    for (int c = 0; c < grid.n_cols; ++c) {
      if (!data.fire.cell_valid[grid.cell(r, c)]) continue;
      CellSeries cs;
      cs.row = r;
      cs.col = c;
      cs.inputs.resize(window.n_days());
      cs.valid.resize(window.n_days());
      cs.obs.resize(window.n_days());
      cs.sample_begin = next_sample;
      for (int i = 0; i < window.n_days(); ++i) {
        const int day = window.day_begin + i;
        const CellDay cd = cell_inputs(data, day, r, c);
        cs.inputs[i] = cd.inputs;
        cs.valid[i] = cd.valid ? 1 : 0;
        cs.obs[i] = data.fire.fire[static_cast<std::size_t>(day) * cells +
                                   grid.cell(r, c)];
        if (cd.valid) {
          ++cs.n_samples;
          if (cs.obs[i]) ++table.n_fire;
        }
      }
      next_sample += cs.n_samples;
      table.cells.push_back(std::move(cs));
    }
  }
  table.n_samples = next_sample;
  return table;
}

// Forward over one cell's window. Spin-up uses the first (up to 30)
// valid days; the carry is held across missing days. When `carry_in` is
// given, the carry entering each valid day is recorded for tape replay.
void forward_cell(const IcModel& model, const CellSeries& cs, Mode mode,
                  std::vector<double>& ic_out,
                  std::vector<MoistureCarry>* carry_in) {
  std::vector<CellInputs> warm;
  warm.reserve(30);
  for (std::size_t i = 0; i < cs.inputs.size() && warm.size() < 30; ++i)
    if (cs.valid[i]) warm.push_back(cs.inputs[i]);
  if (warm.empty()) return;
  MoistureCarry carry = model.spin_up(warm);
  std::size_t sample = 0;
  for (std::size_t i = 0; i < cs.inputs.size(); ++i) {
    if (!cs.valid[i]) continue;
    if (carry_in) (*carry_in)[sample] = carry;
    const ForwardResult out = model.forward(cs.inputs[i], carry, mode);
    ic_out[sample] = out.state.ic;
    carry = out.new_carry;
    ++sample;
  }
}

// Series over the whole table in (cell, day) order.
struct SeriesBuffers {
  std::vector<double> ic;
  std::vector<std::uint8_t> obs;
  std::vector<MoistureCarry> carry_in;
};

void run_series(const IcModel& model, const WindowTable& table, Mode mode,
                int threads, SeriesBuffers& buf, bool want_carry) {
  buf.ic.assign(table.n_samples, 0.0);
  buf.obs.assign(table.n_samples, 0);
  if (want_carry) buf.carry_in.assign(table.n_samples, MoistureCarry{});
  parallel_for(table.cells.size(), threads, [&](std::size_t i) {
    const CellSeries& cs = table.cells[i];
    if (cs.n_samples == 0) return;
    std::vector<double> ic(cs.n_samples, 0.0);
    std::vector<MoistureCarry> carries;
    if (want_carry) carries.resize(cs.n_samples);
    forward_cell(model, cs, mode, ic, want_carry ? &carries : nullptr);
    std::copy(ic.begin(), ic.end(), buf.ic.begin() + cs.sample_begin);
    if (want_carry)
      std::copy(carries.begin(), carries.end(),
                buf.carry_in.begin() + cs.sample_begin);
    std::size_t s = cs.sample_begin;
    for (std::size_t d = 0; d < cs.inputs.size(); ++d)
      if (cs.valid[d]) buf.obs[s++] = cs.obs[d];
  });
}

struct GradAccum {
  std::vector<double> grads; // per ledger index, value-space
  std::uint64_t clip_events = 0;
  std::uint64_t nan_zeroed = 0;
};

// Reverse pass over a set of cells: replays each valid day on a tape,
// seeds with dLoss/dIC, accumulates value-space parameter gradients.
// Cells are processed in parallel; the reduction runs in cell order so
// results do not depend on the thread count.
GradAccum accumulate_gradients(const IcModel& model, const WindowTable& table,
                               std::span<const std::size_t> cell_ids,
                               const SeriesBuffers& buf,
                               std::span<const double> seeds,
                               double clip_limit, int threads,
                               std::size_t n_params) {
  std::vector<GradAccum> per_cell(cell_ids.size());
  parallel_for(cell_ids.size(), threads, [&](std::size_t k) {
    const CellSeries& cs = table.cells[cell_ids[k]];
    GradAccum& acc = per_cell[k];
    Tape tape;
    tape.reserve(512);
    std::size_t sample = cs.sample_begin;
    for (std::size_t d = 0; d < cs.inputs.size(); ++d) {
      if (!cs.valid[d]) continue;
      const std::size_t s = sample++;
      const double seed = seeds[s];
      if (seed == 0.0) continue;
      if (acc.grads.empty()) acc.grads.assign(n_params, 0.0);
      tape.clear();
      const TapeForwardResult fwd =
          model.forward_tape(tape, cs.inputs[d], buf.carry_in[s]);
      const Gradients g = backward(tape, fwd.ic, clip_limit, seed);
      for (const auto& [idx, node] : fwd.param_nodes)
        acc.grads[idx] += g.get(node);
      acc.clip_events += g.clip_events;
      acc.nan_zeroed += g.nan_zeroed;
    }
  });

  GradAccum total;
  total.grads.assign(n_params, 0.0);
  for (const auto& acc : per_cell) {
    if (!acc.grads.empty())
      for (std::size_t i = 0; i < n_params; ++i) total.grads[i] += acc.grads[i];
    total.clip_events += acc.clip_events;
    total.nan_zeroed += acc.nan_zeroed;
  }
  return total;
}

// Value-space gradients -> clipped update-space gradients (log space for
// the positive-only parameters).
std::vector<double> to_update_space(const ParameterSet& params,
                                    std::span<const double> value_grads,
                                    double clip_limit,
                                    std::uint64_t* clip_events) {
  std::vector<double> u(value_grads.size(), 0.0);
  for (std::size_t i = 0; i < value_grads.size(); ++i) {
    const Parameter& p = params.param(static_cast<int>(i));
    double g = value_grads[i];
    if (p.log_space) g *= p.value; // d/d(log v) = v * d/dv
    if (g > clip_limit) {
      g = clip_limit;
      if (clip_events) ++*clip_events;
    } else if (g < -clip_limit) {
      g = -clip_limit;
      if (clip_events) ++*clip_events;
    }
    u[i] = g;
  }
  return u;
}

} // namespace

void sgd_step(ParameterSet& params, std::span<const double> update_grads,
              double learning_rate) {
  if (update_grads.size() != params.size())
    throw DomainError("sgd_step: gradient vector size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Parameter& p = params.param(static_cast<int>(i));
    if (p.frozen) continue;
    const double g = update_grads[i];
    if (!std::isfinite(g))
      throw DomainError("sgd_step: non-finite gradient for '" + p.name + "'");
    if (p.log_space) {
      params.set_value(static_cast<int>(i),
                       p.value * std::exp(-learning_rate * g));
    } else {
      params.set_value(static_cast<int>(i), p.value - learning_rate * g);
    }
  }
}

IndexSeries hard_ic_series(const Dataset& data, const SplitView& window,
                           const ParameterSet& params, int threads) {
  const WindowTable table = build_table(data, window);
  IcModel model(params);
  SeriesBuffers buf;
  run_series(model, table, Mode::Hard, threads, buf, false);
  return IndexSeries{std::move(buf.ic), std::move(buf.obs)};
}

EdiScore validate(const Dataset& data, const SplitView& window,
                  const ParameterSet& params, double threshold, int threads) {
  const IndexSeries series = hard_ic_series(data, window, params, threads);
  if (series.ic.empty())
    throw DegenerateDataError("validate: no valid cell-days in window");
  return edi(hard_counts(series.ic, series.obs, threshold));
}

// ---------------------------------------------------------------------------

namespace {

// Trailing validation split: an explicit fraction, or the final calendar
// year of the training range when the fraction is 0 (falling back to a
// trailing quarter when the range is shorter than two years).
std::pair<SplitView, SplitView> split_validation(const TimeAxis& axis,
                                                 const SplitView& window,
                                                 double fraction) {
  const int n = window.n_days();
  if (n < 8) throw DomainError("train: window too short to hold out validation");
  int val_days;
  if (fraction > 0.0) {
    val_days = std::clamp(static_cast<int>(std::lround(fraction * n)), 1,
                          n - 1);
  } else {
    const Date last = axis.date(window.day_end - 1);
    const int jan1 = axis.index(Date::ymd(last.year(), 1, 1));
    if (jan1 > window.day_begin) {
      val_days = window.day_end - jan1;
    } else {
      val_days = std::max(1, n / 4);
    }
  }
  if (val_days >= n) val_days = std::max(1, n / 4);
  const int fit_end = window.day_end - val_days;
  return {SplitView{window.day_begin, fit_end},
          SplitView{fit_end, window.day_end}};
}

double epoch_beta(const TrainConfig& cfg, int epoch) {
  if (cfg.beta_end <= cfg.beta || cfg.max_epochs <= 1) return cfg.beta;
  const double t = static_cast<double>(epoch - 1) / (cfg.max_epochs - 1);
  return cfg.beta + (cfg.beta_end - cfg.beta) * t;
}

} // namespace

TrainResult train(const Dataset& data, const SplitView& train_window,
                  const ParameterSet& initial, const TrainConfig& config) {
  config.validate();
  const auto [fit_window, val_window] =
      split_validation(data.stack.time, train_window,
                       config.validation_fraction);

  const WindowTable fit_table = build_table(data, fit_window);
  const WindowTable val_table = build_table(data, val_window);
  if (fit_table.n_samples == 0 || val_table.n_samples == 0)
    throw DegenerateDataError("train: no valid cell-days in fit/validation");
  if (fit_table.n_fire == 0)
    throw DegenerateDataError(
        "train: no observed fires in the fit portion, EDI undefined");
  if (fit_table.n_fire == fit_table.n_samples)
    throw DegenerateDataError("train: no observed non-fires in fit portion");
  if (val_table.n_fire == 0)
    throw DegenerateDataError(
        "train: no observed fires in the validation portion");

  ParameterSet current = initial;
  IcModel model(current);
  const std::size_t n_params = current.size();
  const int threads = resolve_threads(config.threads);

  std::vector<std::size_t> all_cells(fit_table.cells.size());
  std::iota(all_cells.begin(), all_cells.end(), 0);

  auto validate_current = [&](double* threshold_out) {
    SeriesBuffers hard;
    run_series(model, fit_table, Mode::Hard, threads, hard, false);
    const double thr = quantile_threshold(hard.ic, config.quantile_q);
    if (threshold_out) *threshold_out = thr;
    SeriesBuffers val;
    run_series(model, val_table, Mode::Hard, threads, val, false);
    return edi(hard_counts(val.ic, val.obs, thr));
  };

  TrainResult result;
  double thr0 = 0.0;
  const EdiScore val0 = validate_current(&thr0);
  result.best = Checkpoint{0, current, 0.0, val0.value, thr0, 0, 0};
  int since_best = 0;

  Rng batch_rng(config.seed, "batch-order");
  SeriesBuffers smooth;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const double beta = epoch_beta(config, epoch);
    EpochStats stats;
    stats.epoch = epoch;
    stats.beta = beta;

    try {
      // Smooth forward over the fit portion under the current parameters;
      // the epoch threshold comes from this distribution.
      run_series(model, fit_table, Mode::Smooth, threads, smooth, true);
      stats.threshold = quantile_threshold(smooth.ic, config.quantile_q);

      // Batch plan: full pooling, or seeded cell chunks.
      std::vector<std::vector<std::size_t>> steps;
      if (config.batch <= 0) {
        steps.push_back(all_cells);
      } else {
        const int window_days = std::max(1, fit_window.n_days());
        const std::size_t cells_per_step = std::max<std::size_t>(
            1, static_cast<std::size_t>(config.batch) / window_days);
        std::vector<std::size_t> order(all_cells);
        for (std::size_t i = order.size(); i > 1; --i)
          std::swap(order[i - 1], order[batch_rng.below(i)]);
        for (std::size_t at = 0; at < order.size(); at += cells_per_step) {
          const std::size_t end = std::min(at + cells_per_step, order.size());
          steps.emplace_back(order.begin() + at, order.begin() + end);
        }
      }

      bool recorded_loss = false;
      for (const auto& step_cells : steps) {
        // Index values and observations of this step's samples.
        std::vector<NodeId> vars;
        std::vector<std::uint8_t> obs;
        std::vector<std::size_t> sample_ids;
        Tape loss_tape;
        for (const std::size_t ci : step_cells) {
          const CellSeries& cs = fit_table.cells[ci];
          for (std::size_t s = cs.sample_begin;
               s < cs.sample_begin + cs.n_samples; ++s) {
            vars.push_back(loss_tape.variable(smooth.ic[s]));
            obs.push_back(smooth.obs[s]);
            sample_ids.push_back(s);
          }
        }
        const std::size_t fires =
            static_cast<std::size_t>(std::count(obs.begin(), obs.end(), 1));
        if (fires == 0 || fires == obs.size()) continue; // EDI undefined

        const NodeId loss_node =
            edi_loss(loss_tape, vars, obs, stats.threshold, beta);
        const double loss = loss_tape.value(loss_node);
        if (!std::isfinite(loss)) throw DomainError("train: loss diverged");
        if (!recorded_loss) {
          stats.train_loss = loss;
          recorded_loss = true;
        }

        const Gradients loss_grads =
            backward(loss_tape, loss_node, config.clip_limit);
        stats.clip_events += loss_grads.clip_events;
        stats.nan_zeroed += loss_grads.nan_zeroed;

        std::vector<double> seeds(fit_table.n_samples, 0.0);
        for (std::size_t k = 0; k < vars.size(); ++k)
          seeds[sample_ids[k]] = loss_grads.get(vars[k]);

        GradAccum acc = accumulate_gradients(
            model, fit_table, step_cells, smooth, seeds, config.clip_limit,
            threads, n_params);
        stats.clip_events += acc.clip_events;
        stats.nan_zeroed += acc.nan_zeroed;

        const std::vector<double> update = to_update_space(
            current, acc.grads, config.clip_limit, &stats.clip_events);
        sgd_step(current, update, config.learning_rate);

        if (config.batch > 0 && steps.size() > 1) {
          // Mini-batch steps change the parameters mid-epoch; refresh the
          // smooth forward for subsequent steps.
          run_series(model, fit_table, Mode::Smooth, threads, smooth, true);
        }
      }

      const EdiScore val = validate_current(nullptr);
      stats.val_edi = val.value;
    } catch (const DomainError&) {
      result.diverged = true;
      break;
    }

    result.history.push_back(stats);

    if (stats.val_edi > result.best.val_edi) {
      result.best = Checkpoint{epoch,        current,
                               stats.train_loss, stats.val_edi,
                               stats.threshold,  stats.clip_events,
                               stats.nan_zeroed};
      since_best = 0;
    } else {
      ++since_best;
      if (since_best >= config.patience) {
        result.early_stopped = true;
        break;
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Checkpoint I/O

void Checkpoint::save(const std::filesystem::path& path) const {
  ordered_json root;
  root["format"] = "pyric-checkpoint-v1";
  root["epoch"] = epoch;
  root["train_loss"] = train_loss;
  root["val_edi"] = val_edi;
  root["threshold"] = threshold;
  root["clip_events"] = clip_events;
  root["nan_zeroed"] = nan_zeroed;
  root["params"] = ordered_json::parse(params.to_json_text());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("checkpoint: cannot write " + path.string());
  out << root.dump(2) << "\n";
  if (!out) throw IoError("checkpoint: write failed " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("checkpoint: cannot open " + path.string());
  ordered_json root;
  try {
    in >> root;
  } catch (const std::exception& e) {
    throw IoError(std::string("checkpoint: parse failed: ") + e.what());
  }
  if (root.value("format", "") != "pyric-checkpoint-v1")
    throw IoError("checkpoint: unknown format marker");
  Checkpoint c;
  c.epoch = root.at("epoch").get<int>();
  c.train_loss = root.at("train_loss").get<double>();
  c.val_edi = root.at("val_edi").get<double>();
  c.threshold = root.at("threshold").get<double>();
  c.clip_events = root.at("clip_events").get<std::uint64_t>();
  c.nan_zeroed = root.at("nan_zeroed").get<std::uint64_t>();
  c.params = ParameterSet::from_json_text(root.at("params").dump());
  return c;
}

} // namespace pyric
