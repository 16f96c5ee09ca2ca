// SPDX-License-Identifier: Apache-2.0
#include "reference_ic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pyric::reference {

namespace {

double emc_of(double temp, double rh, const ParameterSet& p) {
  double emc;
  if (rh < p.value("emc.rh_lo")) {
    emc = p.value("emc.dry_c0") + p.value("emc.dry_c1") * rh -
          p.value("emc.dry_c2") * rh * temp;
  } else if (rh < p.value("emc.rh_hi")) {
    emc = p.value("emc.mid_c0") + p.value("emc.mid_c1") * rh -
          p.value("emc.mid_c2") * temp;
  } else {
    emc = p.value("emc.wet_c0") + p.value("emc.wet_c1") * rh * rh -
          p.value("emc.wet_c2") * rh * temp - p.value("emc.wet_c3") * rh;
  }
  if (emc < 0.0) emc = 0.0;
  return emc;
}

double clamp01_100(double v, double hi) {
  if (v < 0.0) return 0.0;
  if (v > hi) return hi;
  return v;
}

} // namespace

RefResult reference_forward(const CellInputs& in, const MoistureCarry& carry,
                            const ParameterSet& p) {
  in.validate();
  carry.validate();
  RefResult out;
  IntermediateState& s = out.state;

  // Equilibrium moisture content from today's air temperature/humidity.
  s.emc = emc_of(in.temp, in.rh, p);

  // Daily boundary from the EMC extremes, wetted by rain hours.
  const double emc_day = emc_of(in.temp_max, in.rh_min, p);
  const double emc_night = emc_of(in.temp_min, in.rh_max, p);
  const double w = p.value("moisture.day_weight");
  const double emcbar = w * emc_day + (1.0 - w) * emc_night;
  const double pd = in.precip_duration;
  const double bndryh =
      ((24.0 - pd) * emcbar +
       pd * (p.value("moisture.bndry_100h_rain_slope") * pd +
             p.value("moisture.bndry_100h_rain_intercept"))) /
      24.0;
  const double bndryt =
      ((24.0 - pd) * emcbar +
       pd * (p.value("moisture.bndry_1000h_rain_slope") * pd +
             p.value("moisture.bndry_1000h_rain_intercept"))) /
      24.0;
  s.mc100 = carry.prev_mc100 +
            (bndryh - carry.prev_mc100) * p.value("moisture.mc100_response");
  s.mc1000 = carry.prev_mc1000 +
             (bndryt - carry.prev_mc1000) * p.value("moisture.mc1000_response");
  if (s.mc100 < 0.0) s.mc100 = 0.0;
  if (s.mc1000 < 0.0) s.mc1000 = 0.0;

  // Fast classes follow today's EMC, blended toward saturation by rain.
  const double sat = p.value("moisture.saturation");
  s.mc1 = ((24.0 - pd) * p.value("moisture.mc1_ratio") * s.emc + pd * sat) /
          24.0;
  s.mc10 = ((24.0 - pd) * p.value("moisture.mc10_ratio") * s.emc + pd * sat) /
           24.0;
  if (s.mc1 < 0.0) s.mc1 = 0.0;
  if (s.mc10 < 0.0) s.mc10 = 0.0;

  // Live fuels.
  const std::string cc = "_cc" + std::to_string(in.climate_zone);
  const double herb_min = p.value("live.herb_min");
  const double herb_cured = std::min(s.mc1, herb_min);
  double herb_green = p.value("live.herb_green_intercept" + cc) +
                      p.value("live.herb_green_slope" + cc) * s.mc1000;
  herb_green = std::clamp(herb_green, herb_min, p.value("live.herb_max"));
  const double dormant = p.value("live.woody_dormant" + cc);
  double wood_green = p.value("live.woody_intercept" + cc) +
                      p.value("live.woody_slope" + cc) * s.mc1000;
  wood_green = std::clamp(wood_green, dormant, p.value("live.woody_max"));
  switch (in.vegetation_stage) {
    case VegetationStage::Cured:
    case VegetationStage::PreGreen:
      s.live_herb_mc = herb_cured;
      s.live_woody_mc = dormant;
      break;
    case VegetationStage::Green:
      s.live_herb_mc = herb_green;
      s.live_woody_mc = wood_green;
      break;
    case VegetationStage::Transition: {
      const double tw = p.value("live.transition_weight");
      s.live_herb_mc = tw * herb_green + (1.0 - tw) * herb_cured;
      s.live_woody_mc = tw * wood_green + (1.0 - tw) * dormant;
      break;
    }
  }
  if (s.live_herb_mc < 0.0) s.live_herb_mc = 0.0;
  if (s.live_woody_mc < 0.0) s.live_woody_mc = 0.0;

  // Fuel-atmosphere interface temperature.
  double increment;
  if (in.cloud_cover < p.value("tmpprm.cloud_break_1"))
    increment = p.value("tmpprm.increment_clear");
  else if (in.cloud_cover < p.value("tmpprm.cloud_break_2"))
    increment = p.value("tmpprm.increment_scattered");
  else if (in.cloud_cover < p.value("tmpprm.cloud_break_3"))
    increment = p.value("tmpprm.increment_broken");
  else
    increment = p.value("tmpprm.increment_overcast");
  s.tmpprm = in.temp + increment;

  // Heat of ignition.
  s.qign = p.value("qign.c0") - p.value("qign.c1") * s.tmpprm -
           p.value("qign.c2") *
               std::pow(s.tmpprm, p.value("qign.square_exponent")) -
           p.value("qign.c3") * s.tmpprm * s.mc1 +
           p.value("qign.c4") *
               (1.0 - std::exp(-p.value("qign.c5") * s.mc1)) +
           p.value("qign.c6") * s.mc1;

  // Spread component, normalized.
  const std::string fm = std::string("fuel.") + to_string(in.fuel_model) + ".";
  const double mdead = p.value(fm + "dead_w1") * s.mc1 +
                       p.value(fm + "dead_w10") * s.mc10 +
                       p.value(fm + "dead_w100") * s.mc100;
  const double mlive = p.value(fm + "live_herb_w") * s.live_herb_mc +
                       p.value(fm + "live_woody_w") * s.live_woody_mc;
  auto damping = [&](double moisture, double mext) {
    double r = moisture / mext;
    if (r > 1.0) r = 1.0;
    const double eta =
        (1.0 - r) * (p.value("spread.damp_quad") * r * r +
                     p.value("spread.damp_lin") * r + 1.0);
    return eta > 0.0 ? eta : 0.0;
  };
  const double eta_dead = damping(mdead, p.value(fm + "mext_dead"));
  const double eta_live = damping(mlive, p.value(fm + "mext_live"));
  const double phi_wind =
      p.value("spread.wind_coeff") *
      std::pow(in.wind_speed, p.value("spread.wind_exponent"));
  const double phi_slope =
      p.value("spread.slope_phi_" + std::to_string(in.slope_class));
  const double spread = p.value(fm + "reaction_velocity") * eta_dead *
                        eta_live * (1.0 + phi_wind + phi_slope);
  s.scn = clamp01_100(spread / p.value(fm + "spread_norm"), 1.0);

  // Probability of a reportable fire.
  s.p_fi = std::sqrt(s.scn);

  // Ignition component with the suppression branch.
  double chi = (p.value("ic.qmax") - s.qign) / p.value("ic.chi_scale");
  if (chi < 0.0) chi = 0.0;
  const double g =
      std::pow(chi, p.value("ic.chi_exponent")) * p.value("ic.pnorm3");
  if (g <= p.value("ic.pnorm1")) {
    s.ic = 0.0;
  } else {
    const double pi = clamp01_100((g - p.value("ic.pnorm1")) *
                                      p.value("ic.pi_scale") /
                                      p.value("ic.pnorm2"),
                                  p.value("ic.pi_scale"));
    s.ic = clamp01_100(pi * s.p_fi, 100.0);
  }

  out.new_carry = MoistureCarry{s.mc100, s.mc1000};
  return out;
}

} // namespace pyric::reference
