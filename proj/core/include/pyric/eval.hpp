// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pyric/grid.hpp"
#include "pyric/loss.hpp"
#include "pyric/params.hpp"

namespace pyric {

struct CellSkill {
  double hits = 0.0;
  double misses = 0.0;
  double false_alarms = 0.0;
  double correct_negatives = 0.0;
  double h = 0.0;
  double f = 0.0;
  double edi = 0.0;
  int fire_days = 0;
  bool valid = false;      // cell had any scoreable day
  bool degenerate = false; // no observed fires: not scored
};

struct SkillReport {
  GridDefinition grid;
  std::vector<CellSkill> cells; // row-major, one per grid cell
  ConfusionCounts total;        // sum of per-cell counts
  EdiScore aggregate;           // edi(total)
  double threshold = 0.0;
  int fuzzy_radius = 0;
  std::string params_hash;
  Date start;
  Date end;
  int cells_scored = 0;
  int cells_degenerate = 0;
};

/// Test-period skill: hard-mode forward per cell-day, binary forecast at
/// `threshold` (which must come from the training period), fuzzy-pixel
/// contingency per day, per-cell EDI over the window. Cells without any
/// observed fire are flagged degenerate and excluded from per-cell
/// scores; their contingency counts still enter the pooled aggregate.
SkillReport evaluate_region(const Dataset& data, const SplitView& window,
                            const ParameterSet& params, double threshold,
                            int fuzzy_radius, int threads);

struct DiffCell {
  double edi_a = 0.0;
  double edi_b = 0.0;
  double delta = 0.0;
  bool flagged = false; // degenerate in either input
};

struct DiffReport {
  GridDefinition grid;
  std::vector<DiffCell> cells;
  double aggregate_delta = 0.0; // aggregate EDI difference a - b
  double mean_delta = 0.0;      // over unflagged cells
  int cells_compared = 0;
  int cells_flagged = 0;
};

/// Per-cell EDI difference a - b (trained minus untrained).
DiffReport diff_report(const SkillReport& a, const SkillReport& b);

/// Writes report.csv, summary.json and map.png into `dir`.
void render_report(const SkillReport& report,
                   const std::filesystem::path& dir);

/// Writes the difference artifacts (report.csv, summary.json, map.png).
void render_diff(const DiffReport& diff, const std::filesystem::path& dir);

} // namespace pyric
