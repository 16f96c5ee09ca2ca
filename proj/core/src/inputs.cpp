// SPDX-License-Identifier: Apache-2.0
#include "pyric/inputs.hpp"

#include <cmath>
#include <sstream>

namespace pyric {

const char* to_string(VegetationStage stage) {
  switch (stage) {
    case VegetationStage::Cured: return "cured";
    case VegetationStage::PreGreen: return "pre-green";
    case VegetationStage::Green: return "green";
    case VegetationStage::Transition: return "transition";
  }
  return "?";
}

VegetationStage vegetation_stage_from_code(int code) {
  if (code < 0 || code > 3)
    throw DomainError("vegetation_stage: class code " + std::to_string(code) +
                      " not in 0..3");
  return static_cast<VegetationStage>(code);
}

const char* to_string(FuelModel model) {
  switch (model) {
    case FuelModel::A: return "A";
    case FuelModel::C: return "C";
    case FuelModel::F: return "F";
    case FuelModel::G: return "G";
  }
  return "?";
}

FuelModel fuel_model_from_code(int code) {
  if (code < 0 || code > 3)
    throw DomainError("fuel_model: class code " + std::to_string(code) +
                      " not in 0..3");
  return static_cast<FuelModel>(code);
}

namespace {

void check(bool ok, const char* field, double value) {
  if (!ok) {
    std::ostringstream msg;
    msg << "cell inputs: field '" << field << "' invalid (" << value << ")";
    throw DomainError(msg.str());
  }
}

bool finite(double v) { return std::isfinite(v); }

} // namespace

void CellInputs::validate() const {
  check(finite(temp) && temp >= -60.0 && temp <= 130.0, "temp", temp);
  check(finite(temp_max) && temp_max <= 140.0, "temp_max", temp_max);
  check(finite(temp_min) && temp_min >= -70.0, "temp_min", temp_min);
  check(temp_min <= temp && temp <= temp_max, "temp vs temp_min/temp_max",
        temp);
  check(finite(rh) && rh >= 0.0 && rh <= 100.0, "rh", rh);
  check(finite(rh_max) && rh_max >= 0.0 && rh_max <= 100.0, "rh_max", rh_max);
  check(finite(rh_min) && rh_min >= 0.0 && rh_min <= 100.0, "rh_min", rh_min);
  check(rh_min <= rh && rh <= rh_max, "rh vs rh_min/rh_max", rh);
  check(finite(wind_speed) && wind_speed >= 0.0 && wind_speed <= 150.0,
        "wind_speed", wind_speed);
  check(finite(cloud_cover) && cloud_cover >= 0.0 && cloud_cover <= 1.0,
        "cloud_cover", cloud_cover);
  check(finite(precip_duration) && precip_duration >= 0.0 &&
            precip_duration <= 24.0,
        "precip_duration", precip_duration);
  check(finite(annual_precip_mean) && annual_precip_mean >= 0.0 &&
            annual_precip_mean <= 500.0,
        "annual_precip_mean", annual_precip_mean);
  check(vegetation_cover >= 0 && vegetation_cover <= 99, "vegetation_cover",
        vegetation_cover);
  check(slope_class >= 1 && slope_class <= 5, "slope_class", slope_class);
  check(climate_zone >= 1 && climate_zone <= 4, "climate_zone", climate_zone);
}

void MoistureCarry::validate() const {
  check(finite(prev_mc100) && prev_mc100 >= 0.0, "prev_mc100", prev_mc100);
  check(finite(prev_mc1000) && prev_mc1000 >= 0.0, "prev_mc1000", prev_mc1000);
}

} // namespace pyric
