// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "pyric/grid.hpp"
#include "pyric/params.hpp"

namespace pyric {

enum class Scenario : std::uint8_t {
  /// Weather plus fires sampled from a hard-mode IC run under a ledger
  /// with one shifted coefficient: a recoverable ground truth for
  /// calibration tests.
  ParameterShift,
  /// Fires driven by a simple hot-dry-windless-rain proxy.
  Seasonal,
  /// Rare i.i.d. fires, unrelated to the inputs.
  Random,
};

const char* to_string(Scenario s);
Scenario scenario_from_string(const std::string& name);

struct SyntheticResult {
  Dataset data;
  double fire_base_rate = 0.0; // fraction of cell-days with fire
  // Ground truth of the parameter-shift scenario:
  std::string shifted_parameter;
  double shifted_value = 0.0;  // generating value of that parameter
  double default_value = 0.0;  // untouched ledger value
};

/// Deterministic synthetic dataset: same (grid, days, seed, scenario)
/// always produces identical bytes. `start` anchors the daily time axis.
SyntheticResult generate_synthetic(const GridDefinition& grid, int days,
                                   std::uint64_t seed, Scenario scenario,
                                   Date start = Date::ymd(2010, 1, 1));

} // namespace pyric
