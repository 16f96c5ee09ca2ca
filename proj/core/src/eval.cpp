// SPDX-License-Identifier: Apache-2.0
#include "pyric/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>

#include <json.hpp>

#include "pyric/ic_model.hpp"
#include "pyric/image.hpp"
#include "pyric/threading.hpp"

namespace pyric {

using ordered_json = nlohmann::ordered_json;

SkillReport evaluate_region(const Dataset& data, const SplitView& window,
                            const ParameterSet& params, double threshold,
                            int fuzzy_radius, int threads) {
  if (window.n_days() <= 0) throw DomainError("evaluate: empty test range");
  if (fuzzy_radius < 0) throw DomainError("evaluate: fuzzy radius must be >= 0");
  const GridDefinition& grid = data.stack.grid;
  const std::size_t n_cells = grid.n_cells();
  const int n_days = window.n_days();

  // Hard-mode IC for every cell-day of the window; NaN marks cell-days
  // excluded for missing inputs.
  std::vector<double> ic(n_cells * static_cast<std::size_t>(n_days),
                         std::numeric_limits<double>::quiet_NaN());
  IcModel model(params);
  parallel_for(n_cells, threads, [&](std::size_t cell) {
    if (!data.fire.cell_valid[cell]) return;
    const int r = static_cast<int>(cell) / grid.n_cols;
    const int c = static_cast<int>(cell) % grid.n_cols;
    std::vector<CellInputs> inputs(n_days);
    std::vector<std::uint8_t> valid(n_days);
    std::vector<CellInputs> warm;
    for (int i = 0; i < n_days; ++i) {
      const CellDay cd = cell_inputs(data, window.day_begin + i, r, c);
      inputs[i] = cd.inputs;
      valid[i] = cd.valid ? 1 : 0;
      if (cd.valid && warm.size() < 30) warm.push_back(cd.inputs);
    }
    if (warm.empty()) return;
    MoistureCarry carry = model.spin_up(warm);
    for (int i = 0; i < n_days; ++i) {
      if (!valid[i]) continue;
      const ForwardResult out = model.forward(inputs[i], carry, Mode::Hard);
      carry = out.new_carry;
      ic[static_cast<std::size_t>(i) * n_cells + cell] = out.state.ic;
    }
  });

  // Daily fuzzy contingency, accumulated per cell. Missing cell-days are
  // excluded from the accumulation but observed fires still grant fuzzy
  // credit to their neighbors.
  SkillReport report;
  report.grid = grid;
  report.cells.assign(n_cells, CellSkill{});
  report.threshold = threshold;
  report.fuzzy_radius = fuzzy_radius;
  report.params_hash = params.content_hash();
  report.start = data.stack.time.date(window.day_begin);
  report.end = data.stack.time.date(window.day_end - 1);

  std::vector<std::uint8_t> pred(n_cells), obs(n_cells);
  for (int d = 0; d < n_days; ++d) {
    const std::size_t ic_base = static_cast<std::size_t>(d) * n_cells;
    const std::size_t fire_base =
        static_cast<std::size_t>(window.day_begin + d) * n_cells;
    for (std::size_t i = 0; i < n_cells; ++i) {
      const double v = ic[ic_base + i];
      pred[i] = (!std::isnan(v) && v > threshold) ? 1 : 0;
      obs[i] = data.fire.fire[fire_base + i];
    }
    const std::vector<Outcome> outcomes =
        fuzzy_classify(pred, obs, grid, fuzzy_radius);
    for (std::size_t i = 0; i < n_cells; ++i) {
      if (std::isnan(ic[ic_base + i])) continue; // excluded cell-day
      CellSkill& cs = report.cells[i];
      cs.valid = true;
      if (obs[i]) ++cs.fire_days;
      switch (outcomes[i]) {
        case Outcome::Hit: cs.hits += 1.0; break;
        case Outcome::Miss: cs.misses += 1.0; break;
        case Outcome::FalseAlarm: cs.false_alarms += 1.0; break;
        case Outcome::CorrectNegative: cs.correct_negatives += 1.0; break;
      }
    }
  }

  for (std::size_t i = 0; i < n_cells; ++i) {
    CellSkill& cs = report.cells[i];
    if (!cs.valid) continue;
    report.total += ConfusionCounts{cs.hits, cs.misses, cs.false_alarms,
                                    cs.correct_negatives, false};
    if (cs.hits + cs.misses <= 0.0 ||
        cs.false_alarms + cs.correct_negatives <= 0.0) {
      cs.degenerate = true;
      ++report.cells_degenerate;
      continue;
    }
    const EdiScore score =
        edi(ConfusionCounts{cs.hits, cs.misses, cs.false_alarms,
                            cs.correct_negatives, false});
    cs.h = score.h;
    cs.f = score.f;
    cs.edi = score.value;
    cs.degenerate = false;
    ++report.cells_scored;
  }
  if (report.total.observed_positives() > 0.0 &&
      report.total.observed_negatives() > 0.0) {
    report.aggregate = edi(report.total);
  } else {
    report.aggregate = EdiScore{0.0, 0.0, 0.0, true};
  }
  return report;
}

DiffReport diff_report(const SkillReport& a, const SkillReport& b) {
  if (!(a.grid == b.grid))
    throw MismatchError("diff: reports are on different grids");
  if (a.fuzzy_radius != b.fuzzy_radius || a.start != b.start || a.end != b.end)
    throw MismatchError("diff: reports use different evaluation protocols");

  DiffReport diff;
  diff.grid = a.grid;
  diff.cells.resize(a.cells.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    DiffCell& d = diff.cells[i];
    const CellSkill& ca = a.cells[i];
    const CellSkill& cb = b.cells[i];
    d.flagged = !ca.valid || !cb.valid || ca.degenerate || cb.degenerate;
    if (!d.flagged) {
      d.edi_a = ca.edi;
      d.edi_b = cb.edi;
      d.delta = ca.edi - cb.edi;
      sum += d.delta;
      ++diff.cells_compared;
    } else {
      ++diff.cells_flagged;
    }
  }
  diff.mean_delta = diff.cells_compared > 0 ? sum / diff.cells_compared : 0.0;
  diff.aggregate_delta = a.aggregate.value - b.aggregate.value;
  return diff;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

struct Color {
  std::uint8_t r, g, b;
};

// Diverging blue-white-red, t in [-1, 1], zero-centered.
Color diverging(double t) {
  t = std::clamp(t, -1.0, 1.0);
  const double blue[3] = {40.0, 75.0, 190.0};
  const double white[3] = {245.0, 245.0, 245.0};
  const double red[3] = {185.0, 25.0, 35.0};
  double rgb[3];
  if (t < 0.0) {
    for (int i = 0; i < 3; ++i) rgb[i] = white[i] + (-t) * (blue[i] - white[i]);
  } else {
    for (int i = 0; i < 3; ++i) rgb[i] = white[i] + t * (red[i] - white[i]);
  }
  return {static_cast<std::uint8_t>(rgb[0]), static_cast<std::uint8_t>(rgb[1]),
          static_cast<std::uint8_t>(rgb[2])};
}

constexpr int kCellPx = 16;
constexpr Color kMaskedGrey{128, 128, 128};

ImageRGB paint_cells(const GridDefinition& grid,
                     const std::function<Color(std::size_t)>& color_of) {
  ImageRGB img(grid.n_cols * kCellPx, grid.n_rows * kCellPx);
  for (int r = 0; r < grid.n_rows; ++r) {
    // Row 0 holds the smallest latitude; paint it at the image bottom.
    const int y0 = (grid.n_rows - 1 - r) * kCellPx;
    for (int c = 0; c < grid.n_cols; ++c) {
      const Color col = color_of(grid.cell(r, c));
      for (int dy = 0; dy < kCellPx; ++dy)
        for (int dx = 0; dx < kCellPx; ++dx)
          img.set(c * kCellPx + dx, y0 + dy, col.r, col.g, col.b);
    }
  }
  return img;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("report: cannot write " + path.string());
  return out;
}

} // namespace

void render_report(const SkillReport& report,
                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  {
    std::ofstream csv = open_out(dir / "report.csv");
    csv << "row,col,lat,lon,fire_days,hits,misses,false_alarms,"
           "correct_negatives,hit_rate,false_alarm_rate,edi,degenerate\n";
    for (int r = 0; r < report.grid.n_rows; ++r) {
      for (int c = 0; c < report.grid.n_cols; ++c) {
        const CellSkill& cs = report.cells[report.grid.cell(r, c)];
        char buf[320];
        const bool masked = !cs.valid || cs.degenerate;
        std::snprintf(buf, sizeof buf,
                      "%d,%d,%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,"
                      "%.17g,%.17g,%d\n",
                      r, c, report.grid.lat[r], report.grid.lon[c],
                      cs.fire_days, cs.hits, cs.misses, cs.false_alarms,
                      cs.correct_negatives, cs.h, cs.f, cs.edi,
                      masked ? 1 : 0);
        csv << buf;
      }
    }
    if (!csv) throw IoError("report: csv write failed");
  }

  {
    ordered_json root;
    root["format"] = "pyric-skill-summary-v1";
    ordered_json agg;
    agg["edi"] = report.aggregate.value;
    agg["hit_rate"] = report.aggregate.h;
    agg["false_alarm_rate"] = report.aggregate.f;
    agg["degenerate"] = report.aggregate.degenerate;
    agg["hits"] = report.total.hits;
    agg["misses"] = report.total.misses;
    agg["false_alarms"] = report.total.false_alarms;
    agg["correct_negatives"] = report.total.correct_negatives;
    root["aggregate"] = std::move(agg);
    root["threshold"] = report.threshold;
    root["fuzzy_radius"] = report.fuzzy_radius;
    root["params_hash"] = report.params_hash;
    root["date_range"] = {{"start", report.start.to_iso()},
                          {"end", report.end.to_iso()}};
    root["cells_scored"] = report.cells_scored;
    root["cells_degenerate"] = report.cells_degenerate;
    std::ofstream out = open_out(dir / "summary.json");
    out << root.dump(2) << "\n";
    if (!out) throw IoError("report: summary write failed");
  }

  const ImageRGB img = paint_cells(report.grid, [&](std::size_t i) {
    const CellSkill& cs = report.cells[i];
    if (!cs.valid || cs.degenerate) return kMaskedGrey;
    return diverging(cs.edi);
  });
  write_png(img, dir / "map.png");
}

void render_diff(const DiffReport& diff, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  {
    std::ofstream csv = open_out(dir / "report.csv");
    csv << "row,col,lat,lon,edi_trained,edi_untrained,delta,flagged\n";
    for (int r = 0; r < diff.grid.n_rows; ++r) {
      for (int c = 0; c < diff.grid.n_cols; ++c) {
        const DiffCell& d = diff.cells[diff.grid.cell(r, c)];
        char buf[200];
        std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                      r, c, diff.grid.lat[r], diff.grid.lon[c], d.edi_a,
                      d.edi_b, d.delta, d.flagged ? 1 : 0);
        csv << buf;
      }
    }
    if (!csv) throw IoError("diff: csv write failed");
  }

  {
    ordered_json root;
    root["format"] = "pyric-diff-summary-v1";
    root["aggregate_delta"] = diff.aggregate_delta;
    root["mean_delta"] = diff.mean_delta;
    root["cells_compared"] = diff.cells_compared;
    root["cells_flagged"] = diff.cells_flagged;
    std::ofstream out = open_out(dir / "summary.json");
    out << root.dump(2) << "\n";
    if (!out) throw IoError("diff: summary write failed");
  }

  // Symmetric zero-centered scale, stretched to the largest |delta|.
  double limit = 1e-6;
  for (const auto& d : diff.cells)
    if (!d.flagged) limit = std::max(limit, std::fabs(d.delta));
  const ImageRGB img = paint_cells(diff.grid, [&](std::size_t i) {
    const DiffCell& d = diff.cells[i];
    if (d.flagged) return kMaskedGrey;
    return diverging(d.delta / limit);
  });
  write_png(img, dir / "map.png");
}

} // namespace pyric
