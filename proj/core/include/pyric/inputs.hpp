// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "pyric/errors.hpp"

namespace pyric {

enum class VegetationStage : std::uint8_t {
  Cured = 0,
  PreGreen = 1,
  Green = 2,
  Transition = 3,
};

const char* to_string(VegetationStage stage);
VegetationStage vegetation_stage_from_code(int code);

/// Fuel models carried by the default ledger. Raster class codes 0..3 map
/// onto the NFDRS-style letter codes below.
enum class FuelModel : std::uint8_t {
  A = 0, // western annual grass
  C = 1, // open pine with grass
  F = 2, // intermediate brush
  G = 3, // dense conifer with heavy dead load
};

const char* to_string(FuelModel model);
FuelModel fuel_model_from_code(int code);

/// One grid cell's weather and site description for one day. All
/// temperatures are Fahrenheit, humidities percent, wind mph.
struct CellInputs {
  double temp = 70.0;
  double temp_max = 80.0;
  double temp_min = 60.0;
  double rh = 40.0;
  double rh_max = 60.0;
  double rh_min = 25.0;
  double wind_speed = 5.0;        // mph
  double cloud_cover = 0.2;       // fraction [0, 1]
  double precip_duration = 0.0;   // hours [0, 24]
  double annual_precip_mean = 20.0; // inches/year climatology
  VegetationStage vegetation_stage = VegetationStage::Cured;
  int vegetation_cover = 1;       // class code
  int slope_class = 1;            // 1..5
  FuelModel fuel_model = FuelModel::A;
  int climate_zone = 2;           // NFDRS climate class 1..4

  /// Throws DomainError naming the offending field.
  void validate() const;
};

/// State the slow dead-fuel classes carry from day to day.
struct MoistureCarry {
  double prev_mc100 = 15.0;
  double prev_mc1000 = 15.0;

  void validate() const;
};

} // namespace pyric
