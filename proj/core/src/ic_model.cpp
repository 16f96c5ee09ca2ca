// SPDX-License-Identifier: Apache-2.0
#include "pyric/ic_model.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "pyric/smoothing.hpp"

namespace pyric {

const char* branch_site_name(BranchSite site) {
  switch (site) {
    case BranchSite::EmcLo: return "emc_lo";
    case BranchSite::EmcHi: return "emc_hi";
    case BranchSite::TmpprmCloud1: return "tmpprm_cloud_1";
    case BranchSite::TmpprmCloud2: return "tmpprm_cloud_2";
    case BranchSite::TmpprmCloud3: return "tmpprm_cloud_3";
    case BranchSite::HerbCuredCap: return "herb_cured_cap";
    case BranchSite::HerbGreenLo: return "herb_green_lo";
    case BranchSite::HerbGreenHi: return "herb_green_hi";
    case BranchSite::WoodyLo: return "woody_lo";
    case BranchSite::WoodyHi: return "woody_hi";
    case BranchSite::DampDeadCap: return "damp_dead_cap";
    case BranchSite::DampLiveCap: return "damp_live_cap";
    case BranchSite::ScnLo: return "scn_lo";
    case BranchSite::ScnHi: return "scn_hi";
    case BranchSite::ChiFloor: return "chi_floor";
    case BranchSite::PiLo: return "pi_lo";
    case BranchSite::PiHi: return "pi_hi";
    case BranchSite::IcZero: return "ic_zero";
    case BranchSite::Count: break;
  }
  return "?";
}

double branch_site_scale(BranchSite site) {
  switch (site) {
    case BranchSite::EmcLo:
    case BranchSite::EmcHi: return 1.0;           // RH percent
    case BranchSite::TmpprmCloud1:
    case BranchSite::TmpprmCloud2:
    case BranchSite::TmpprmCloud3: return 0.5;    // cloud fraction
    case BranchSite::HerbCuredCap:
    case BranchSite::HerbGreenLo:
    case BranchSite::HerbGreenHi:
    case BranchSite::WoodyLo:
    case BranchSite::WoodyHi: return 1.0;         // moisture percent
    case BranchSite::DampDeadCap:
    case BranchSite::DampLiveCap: return 0.5;     // moisture ratio
    case BranchSite::ScnLo:
    case BranchSite::ScnHi: return 0.2;           // normalized spread
    case BranchSite::ChiFloor: return 0.2;
    case BranchSite::PiLo:
    case BranchSite::PiHi: return 0.5;            // percent probability
    case BranchSite::IcZero: return 1.0;          // g vs pnorm1
    case BranchSite::Count: break;
  }
  return 1.0;
}

double BranchTrace::min_distance() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& e : entries) m = std::min(m, e.distance);
  return m;
}

// ---------------------------------------------------------------------------
// Ledger index resolution

struct IcModel::Resolved {
  int qign_c[7];
  double qign_square_exponent;
  int ic_qmax, ic_chi_scale, ic_pnorm1, ic_pnorm2, ic_pnorm3, ic_pi_scale;
  double ic_chi_exponent;
  int emc_dry[3], emc_mid[3], emc_wet[4], emc_rh_lo, emc_rh_hi;
  int mc1_ratio, mc10_ratio, saturation, day_weight;
  int b100_slope, b100_int, b1000_slope, b1000_int;
  int mc100_resp, mc1000_resp;
  int tmp_inc[4], cloud_break[3];
  int herb_int[4], herb_slp[4], herb_min, herb_max;
  int wood_int[4], wood_slp[4], wood_dormant[4], wood_max, transition_weight;
  int wind_coeff, slope_phi[5], damp_quad, damp_lin;
  double wind_exponent;
  struct Fuel {
    int dead_w1, dead_w10, dead_w100, herb_w, woody_w;
    int mext_dead, mext_live, gamma, norm;
  } fuel[4];
  int branch_alpha[kBranchSiteCount];

  explicit Resolved(const ParameterSet& p) {
    auto ix = [&p](const std::string& n) { return p.index(n); };
    for (int i = 0; i < 7; ++i) qign_c[i] = ix("qign.c" + std::to_string(i));
    qign_square_exponent = p.value("qign.square_exponent");
    ic_qmax = ix("ic.qmax");
    ic_chi_scale = ix("ic.chi_scale");
    ic_chi_exponent = p.value("ic.chi_exponent");
    ic_pnorm1 = ix("ic.pnorm1");
    ic_pnorm2 = ix("ic.pnorm2");
    ic_pnorm3 = ix("ic.pnorm3");
    ic_pi_scale = ix("ic.pi_scale");
    const char* dry[3] = {"emc.dry_c0", "emc.dry_c1", "emc.dry_c2"};
    const char* mid[3] = {"emc.mid_c0", "emc.mid_c1", "emc.mid_c2"};
    const char* wet[4] = {"emc.wet_c0", "emc.wet_c1", "emc.wet_c2",
                          "emc.wet_c3"};
    for (int i = 0; i < 3; ++i) emc_dry[i] = ix(dry[i]);
    for (int i = 0; i < 3; ++i) emc_mid[i] = ix(mid[i]);
    for (int i = 0; i < 4; ++i) emc_wet[i] = ix(wet[i]);
    emc_rh_lo = ix("emc.rh_lo");
    emc_rh_hi = ix("emc.rh_hi");
    mc1_ratio = ix("moisture.mc1_ratio");
    mc10_ratio = ix("moisture.mc10_ratio");
    saturation = ix("moisture.saturation");
    day_weight = ix("moisture.day_weight");
    b100_slope = ix("moisture.bndry_100h_rain_slope");
    b100_int = ix("moisture.bndry_100h_rain_intercept");
    b1000_slope = ix("moisture.bndry_1000h_rain_slope");
    b1000_int = ix("moisture.bndry_1000h_rain_intercept");
    mc100_resp = ix("moisture.mc100_response");
    mc1000_resp = ix("moisture.mc1000_response");
    tmp_inc[0] = ix("tmpprm.increment_clear");
    tmp_inc[1] = ix("tmpprm.increment_scattered");
    tmp_inc[2] = ix("tmpprm.increment_broken");
    tmp_inc[3] = ix("tmpprm.increment_overcast");
    for (int i = 0; i < 3; ++i)
      cloud_break[i] = ix("tmpprm.cloud_break_" + std::to_string(i + 1));
    for (int cc = 0; cc < 4; ++cc) {
      const std::string suffix = "_cc" + std::to_string(cc + 1);
      herb_int[cc] = ix("live.herb_green_intercept" + suffix);
      herb_slp[cc] = ix("live.herb_green_slope" + suffix);
      wood_int[cc] = ix("live.woody_intercept" + suffix);
      wood_slp[cc] = ix("live.woody_slope" + suffix);
      wood_dormant[cc] = ix("live.woody_dormant" + suffix);
    }
    herb_min = ix("live.herb_min");
    herb_max = ix("live.herb_max");
    wood_max = ix("live.woody_max");
    transition_weight = ix("live.transition_weight");
    wind_coeff = ix("spread.wind_coeff");
    wind_exponent = p.value("spread.wind_exponent");
    for (int i = 0; i < 5; ++i)
      slope_phi[i] = ix("spread.slope_phi_" + std::to_string(i + 1));
    damp_quad = ix("spread.damp_quad");
    damp_lin = ix("spread.damp_lin");
    const char* codes[4] = {"A", "C", "F", "G"};
    for (int f = 0; f < 4; ++f) {
      const std::string base = std::string("fuel.") + codes[f] + ".";
      fuel[f].dead_w1 = ix(base + "dead_w1");
      fuel[f].dead_w10 = ix(base + "dead_w10");
      fuel[f].dead_w100 = ix(base + "dead_w100");
      fuel[f].herb_w = ix(base + "live_herb_w");
      fuel[f].woody_w = ix(base + "live_woody_w");
      fuel[f].mext_dead = ix(base + "mext_dead");
      fuel[f].mext_live = ix(base + "mext_live");
      fuel[f].gamma = ix(base + "reaction_velocity");
      fuel[f].norm = ix(base + "spread_norm");
    }
    for (int b = 0; b < kBranchSiteCount; ++b)
      branch_alpha[b] = ix(std::string("branch_alpha.") +
                           branch_site_name(static_cast<BranchSite>(b)));
  }
};

// ---------------------------------------------------------------------------
// Evaluation contexts

namespace {

// Plain-double context; Smooth selects the sigmoid blend at branch sites.
struct DoubleCtx {
  using V = double;
  const ParameterSet& params;
  const IcModel::Resolved& ix;
  Mode mode;
  BranchTrace* trace;

  V constant(double c) const { return c; }
  V param(int idx) const { return params.value(idx); }
  static V add(V a, V b) { return a + b; }
  static V sub(V a, V b) { return a - b; }
  static V mul(V a, V b) { return a * b; }
  static V div(V a, V b) { return a / b; }
  static V exp(V a) { return std::exp(a); }
  V pow_c(V a, double e) const { return std::pow(a, e); }
  static V sqrt(V a) { return std::sqrt(a); }
  static V min_c(V a, double c) { return a < c ? a : c; }
  static V max_c(V a, double c) { return a > c ? a : c; }
  double value_of(V a) const { return a; }

  V branch(BranchSite site, V x, V a, V y, V z) {
    if (trace) trace->note(site, x - a);
    if (mode == Mode::Hard) return x < a ? y : z;
    const double alpha =
        params.value(ix.branch_alpha[static_cast<int>(site)]);
    return sigmoid_value((x - a) * alpha) * (z - y) + y;
  }
  void note_boundary(BranchSite site, double signed_distance) {
    if (trace) trace->note(site, signed_distance);
  }
};

// Tape-recording context (always smooth). Parameter nodes are memoized
// so each ledger parameter becomes exactly one variable node.
struct TapeCtx {
  using V = NodeId;
  Tape& tape;
  const ParameterSet& params;
  const IcModel::Resolved& ix;
  BranchTrace* trace;
  std::vector<NodeId> param_node;
  std::vector<int> touched;

  TapeCtx(Tape& t, const ParameterSet& p, const IcModel::Resolved& r,
          BranchTrace* tr)
      : tape(t), params(p), ix(r), trace(tr),
        param_node(p.size(), kUnset) {}

  static constexpr NodeId kUnset = 0xffffffffu;

  V constant(double c) { return tape.constant(c); }
  V param(int idx) {
    if (param_node[idx] == kUnset) {
      param_node[idx] = tape.variable(params.value(idx));
      touched.push_back(idx);
    }
    return param_node[idx];
  }
  V add(V a, V b) { return tape.add(a, b); }
  V sub(V a, V b) { return tape.sub(a, b); }
  V mul(V a, V b) { return tape.mul(a, b); }
  V div(V a, V b) { return tape.div(a, b); }
  V exp(V a) { return tape.exp(a); }
  V pow_c(V a, double e) { return tape.pow_const(a, e); }
  V sqrt(V a) { return tape.sqrt(a); }
  V min_c(V a, double c) { return tape.min_const(a, c); }
  V max_c(V a, double c) { return tape.max_const(a, c); }
  double value_of(V a) const { return tape.value(a); }

  V branch(BranchSite site, V x, V a, V y, V z) {
    if (trace) trace->note(site, tape.value(x) - tape.value(a));
    const NodeId alpha = param(ix.branch_alpha[static_cast<int>(site)]);
    return smooth_branch(tape, x, a, y, z, alpha);
  }
  void note_boundary(BranchSite site, double signed_distance) {
    if (trace) trace->note(site, signed_distance);
  }
};

// ---------------------------------------------------------------------------
// The chain itself, written once over the context concept.

template <class Ctx> struct ChainVals {
  using V = typename Ctx::V;
  V emc, mc1, mc10, mc100, mc1000;
  V live_herb, live_woody;
  V tmpprm, qign, scn, p_fi, ic;
};

// Equilibrium moisture content, percent; piecewise in RH with the two
// humidity regime boundaries as (smoothable) branch sites.
template <class Ctx>
typename Ctx::V emc_expr(Ctx& ctx, typename Ctx::V t, typename Ctx::V rh) {
  const auto& ix = ctx.ix;
  using V = typename Ctx::V;
  const V dry = ctx.sub(ctx.add(ctx.param(ix.emc_dry[0]),
                                ctx.mul(ctx.param(ix.emc_dry[1]), rh)),
                        ctx.mul(ctx.param(ix.emc_dry[2]), ctx.mul(rh, t)));
  const V mid = ctx.sub(ctx.add(ctx.param(ix.emc_mid[0]),
                                ctx.mul(ctx.param(ix.emc_mid[1]), rh)),
                        ctx.mul(ctx.param(ix.emc_mid[2]), t));
  const V wet = ctx.sub(
      ctx.sub(ctx.add(ctx.param(ix.emc_wet[0]),
                      ctx.mul(ctx.param(ix.emc_wet[1]), ctx.mul(rh, rh))),
              ctx.mul(ctx.param(ix.emc_wet[2]), ctx.mul(rh, t))),
      ctx.mul(ctx.param(ix.emc_wet[3]), rh));
  const V upper =
      ctx.branch(BranchSite::EmcHi, rh, ctx.param(ix.emc_rh_hi), mid, wet);
  const V emc =
      ctx.branch(BranchSite::EmcLo, rh, ctx.param(ix.emc_rh_lo), dry, upper);
  return ctx.max_c(emc, 0.0);
}

// Solar heating increment above air temperature, a step table in cloud
// cover (clear skies heat fuels the most).
template <class Ctx>
typename Ctx::V tmpprm_expr(Ctx& ctx, const CellInputs& in) {
  const auto& ix = ctx.ix;
  using V = typename Ctx::V;
  const V cc = ctx.constant(in.cloud_cover);
  const V overcast = ctx.param(ix.tmp_inc[3]);
  const V broken = ctx.branch(BranchSite::TmpprmCloud3, cc,
                              ctx.param(ix.cloud_break[2]),
                              ctx.param(ix.tmp_inc[2]), overcast);
  const V scattered = ctx.branch(BranchSite::TmpprmCloud2, cc,
                                 ctx.param(ix.cloud_break[1]),
                                 ctx.param(ix.tmp_inc[1]), broken);
  const V increment = ctx.branch(BranchSite::TmpprmCloud1, cc,
                                 ctx.param(ix.cloud_break[0]),
                                 ctx.param(ix.tmp_inc[0]), scattered);
  return ctx.add(ctx.constant(in.temp), increment);
}

struct DeadVals {
  template <class V> struct T {
    V mc1, mc10, mc100, mc1000;
  };
};

// Dead fuel moistures. Fast classes follow today's EMC, blended toward a
// saturation level by precipitation hours; slow classes relax toward a
// rain-adjusted boundary built from the EMC daily extremes.
template <class Ctx>
DeadVals::T<typename Ctx::V> dead_fuel_expr(Ctx& ctx, const CellInputs& in,
                                            const MoistureCarry& carry,
                                            typename Ctx::V emc_today) {
  const auto& ix = ctx.ix;
  using V = typename Ctx::V;
  const V day24 = ctx.constant(24.0);
  const V pd = ctx.constant(in.precip_duration);
  const V dry_hours = ctx.sub(day24, pd);

  const V emc_day = emc_expr(ctx, ctx.constant(in.temp_max),
                             ctx.constant(in.rh_min));
  const V emc_night = emc_expr(ctx, ctx.constant(in.temp_min),
                               ctx.constant(in.rh_max));
  const V w = ctx.param(ix.day_weight);
  const V emcbar = ctx.add(ctx.mul(w, emc_day),
                           ctx.mul(ctx.sub(ctx.constant(1.0), w), emc_night));

  auto boundary = [&](int slope_idx, int int_idx) {
    const V rain = ctx.mul(
        pd, ctx.add(ctx.mul(ctx.param(slope_idx), pd), ctx.param(int_idx)));
    return ctx.div(ctx.add(ctx.mul(dry_hours, emcbar), rain), day24);
  };
  const V bndry100 = boundary(ix.b100_slope, ix.b100_int);
  const V bndry1000 = boundary(ix.b1000_slope, ix.b1000_int);

  const V prev100 = ctx.constant(carry.prev_mc100);
  const V prev1000 = ctx.constant(carry.prev_mc1000);
  DeadVals::T<V> out;
  out.mc100 = ctx.max_c(
      ctx.add(prev100, ctx.mul(ctx.sub(bndry100, prev100),
                               ctx.param(ix.mc100_resp))),
      0.0);
  out.mc1000 = ctx.max_c(
      ctx.add(prev1000, ctx.mul(ctx.sub(bndry1000, prev1000),
                                ctx.param(ix.mc1000_resp))),
      0.0);

  auto fast = [&](int ratio_idx) {
    const V dry_part = ctx.mul(dry_hours,
                               ctx.mul(ctx.param(ratio_idx), emc_today));
    const V rain_part = ctx.mul(pd, ctx.param(ix.saturation));
    return ctx.max_c(ctx.div(ctx.add(dry_part, rain_part), day24), 0.0);
  };
  out.mc1 = fast(ix.mc1_ratio);
  out.mc10 = fast(ix.mc10_ratio);
  return out;
}

// Live fuel moistures. The vegetation stage is exogenous data, so the
// stage dispatch is exact; the moisture bounds are branch sites.
template <class Ctx>
std::pair<typename Ctx::V, typename Ctx::V>
live_fuel_expr(Ctx& ctx, const CellInputs& in, typename Ctx::V mc1,
               typename Ctx::V mc1000) {
  const auto& ix = ctx.ix;
  using V = typename Ctx::V;
  const int cc = in.climate_zone - 1;

  const V herb_floor = ctx.param(ix.herb_min);
  auto herb_cured = [&] {
    return ctx.branch(BranchSite::HerbCuredCap, mc1, herb_floor, mc1,
                      herb_floor);
  };
  auto herb_green = [&] {
    const V raw = ctx.add(ctx.param(ix.herb_int[cc]),
                          ctx.mul(ctx.param(ix.herb_slp[cc]), mc1000));
    const V lo =
        ctx.branch(BranchSite::HerbGreenLo, raw, herb_floor, herb_floor, raw);
    const V cap = ctx.param(ix.herb_max);
    return ctx.branch(BranchSite::HerbGreenHi, lo, cap, lo, cap);
  };

  const V dormant = ctx.param(ix.wood_dormant[cc]);
  auto wood_green = [&] {
    const V raw = ctx.add(ctx.param(ix.wood_int[cc]),
                          ctx.mul(ctx.param(ix.wood_slp[cc]), mc1000));
    const V lo = ctx.branch(BranchSite::WoodyLo, raw, dormant, dormant, raw);
    const V cap = ctx.param(ix.wood_max);
    return ctx.branch(BranchSite::WoodyHi, lo, cap, lo, cap);
  };

  V herb = herb_cured();
  V woody = dormant;
  switch (in.vegetation_stage) {
    case VegetationStage::Cured:
    case VegetationStage::PreGreen:
      break;
    case VegetationStage::Green:
      herb = herb_green();
      woody = wood_green();
      break;
    case VegetationStage::Transition: {
      const V tw = ctx.param(ix.transition_weight);
      const V cw = ctx.sub(ctx.constant(1.0), tw);
      herb = ctx.add(ctx.mul(tw, herb_green()), ctx.mul(cw, herb));
      woody = ctx.add(ctx.mul(tw, wood_green()), ctx.mul(cw, dormant));
      break;
    }
  }
  return {ctx.max_c(herb, 0.0), ctx.max_c(woody, 0.0)};
}

template <class Ctx>
typename Ctx::V qign_expr(Ctx& ctx, typename Ctx::V tmpprm,
                          typename Ctx::V mc1) {
  const auto& ix = ctx.ix;
  using V = typename Ctx::V;
  auto C = [&](int i) { return ctx.param(ix.qign_c[i]); };
  const V t2 = ctx.pow_c(tmpprm, ix.qign_square_exponent);
  const V sat = ctx.sub(
      ctx.constant(1.0),
      ctx.exp(ctx.mul(ctx.constant(-1.0), ctx.mul(C(5), mc1))));
  V q = ctx.sub(C(0), ctx.mul(C(1), tmpprm));
  q = ctx.sub(q, ctx.mul(C(2), t2));
  q = ctx.sub(q, ctx.mul(C(3), ctx.mul(tmpprm, mc1)));
  q = ctx.add(q, ctx.mul(C(4), sat));
  q = ctx.add(q, ctx.mul(C(6), mc1));
  return q;
}

// Spread component normalized to [0, 1]: reaction velocity damped by the
// dead and live moisture ratios, boosted by wind and slope class.
template <class Ctx>
typename Ctx::V scn_expr(Ctx& ctx, const CellInputs& in,
                         const DeadVals::T<typename Ctx::V>& dead,
                         typename Ctx::V herb, typename Ctx::V woody) {
  const auto& ix = ctx.ix;
  using V = typename Ctx::V;
  const auto& fm = ix.fuel[static_cast<int>(in.fuel_model)];

  const V mdead = ctx.add(
      ctx.add(ctx.mul(ctx.param(fm.dead_w1), dead.mc1),
              ctx.mul(ctx.param(fm.dead_w10), dead.mc10)),
      ctx.mul(ctx.param(fm.dead_w100), dead.mc100));
  const V mlive = ctx.add(ctx.mul(ctx.param(fm.herb_w), herb),
                          ctx.mul(ctx.param(fm.woody_w), woody));

  // Damping in factored form, (1 - r)(q r^2 + l r + 1): an exact zero at
  // the moisture of extinction for any learned coefficients.
  auto damping = [&](V moisture, int mext_idx, BranchSite cap_site) {
    const V ratio_raw = ctx.div(moisture, ctx.param(mext_idx));
    const V one = ctx.constant(1.0);
    const V ratio =
        ctx.min_c(ctx.branch(cap_site, ratio_raw, one, ratio_raw, one), 1.0);
    const V r2 = ctx.mul(ratio, ratio);
    V poly = ctx.add(ctx.mul(ctx.param(ix.damp_quad), r2),
                     ctx.add(ctx.mul(ctx.param(ix.damp_lin), ratio),
                             ctx.constant(1.0)));
    const V eta = ctx.mul(ctx.sub(one, ratio), poly);
    // The max floor below kinks at eta = 0; record the distance so
    // gradient checks can stay clear of the crossing.
    ctx.note_boundary(cap_site, ctx.value_of(eta));
    return ctx.max_c(eta, 0.0);
  };
  const V eta_dead = damping(mdead, fm.mext_dead, BranchSite::DampDeadCap);
  const V eta_live = damping(mlive, fm.mext_live, BranchSite::DampLiveCap);

  const V phi_wind = ctx.mul(
      ctx.param(ix.wind_coeff),
      ctx.pow_c(ctx.constant(in.wind_speed), ix.wind_exponent));
  const V phi_slope = ctx.param(ix.slope_phi[in.slope_class - 1]);
  const V boost = ctx.add(ctx.add(ctx.constant(1.0), phi_wind), phi_slope);

  const V spread = ctx.mul(ctx.mul(ctx.param(fm.gamma), boost),
                           ctx.mul(eta_dead, eta_live));
  const V raw = ctx.div(spread, ctx.param(fm.norm));

  const V one = ctx.constant(1.0);
  const V zero = ctx.constant(0.0);
  const V capped = ctx.branch(BranchSite::ScnHi, raw, one, raw, one);
  const V floored = ctx.branch(BranchSite::ScnLo, capped, zero, zero, capped);
  return ctx.max_c(ctx.min_c(floored, 1.0), 0.0);
}

// The IC head: heat-of-ignition transform, suppression branch, and the
// reportable-fire probability.
template <class Ctx>
typename Ctx::V ic_expr(Ctx& ctx, typename Ctx::V qign, typename Ctx::V p_fi) {
  const auto& ix = ctx.ix;
  using V = typename Ctx::V;
  const V zero = ctx.constant(0.0);
  const V chi_raw = ctx.div(ctx.sub(ctx.param(ix.ic_qmax), qign),
                            ctx.param(ix.ic_chi_scale));
  const V chi = ctx.max_c(
      ctx.branch(BranchSite::ChiFloor, chi_raw, zero, zero, chi_raw), 0.0);
  const V g = ctx.mul(ctx.pow_c(chi, ix.ic_chi_exponent),
                      ctx.param(ix.ic_pnorm3));

  const V pnorm1 = ctx.param(ix.ic_pnorm1);
  const V pi_scale = ctx.param(ix.ic_pi_scale);
  const double pi_cap = ctx.params.value(ix.ic_pi_scale);
  const V pi_raw = ctx.div(ctx.mul(ctx.sub(g, pnorm1), pi_scale),
                           ctx.param(ix.ic_pnorm2));
  const V pi_lo = ctx.branch(BranchSite::PiLo, pi_raw, zero, zero, pi_raw);
  const V pi_hi = ctx.branch(BranchSite::PiHi, pi_lo, pi_scale, pi_lo,
                             pi_scale);
  const V pi = ctx.max_c(ctx.min_c(pi_hi, pi_cap), 0.0);

  const V ic_unsup = ctx.mul(pi, p_fi);
  // Suppression: IC is zero when g <= pnorm1. The operands are arranged
  // so the hard-mode tie lands on the zero side.
  const V suppressed =
      ctx.branch(BranchSite::IcZero, pnorm1, g, ic_unsup, zero);
  return ctx.max_c(ctx.min_c(suppressed, 100.0), 0.0);
}

template <class Ctx>
ChainVals<Ctx> run_chain(Ctx& ctx, const CellInputs& in,
                         const MoistureCarry& carry) {
  in.validate();
  carry.validate();
  ChainVals<Ctx> v;
  v.emc = emc_expr(ctx, ctx.constant(in.temp), ctx.constant(in.rh));
  const auto dead = dead_fuel_expr(ctx, in, carry, v.emc);
  v.mc1 = dead.mc1;
  v.mc10 = dead.mc10;
  v.mc100 = dead.mc100;
  v.mc1000 = dead.mc1000;
  auto [herb, woody] = live_fuel_expr(ctx, in, v.mc1, v.mc1000);
  v.live_herb = herb;
  v.live_woody = woody;
  v.tmpprm = tmpprm_expr(ctx, in);
  v.qign = qign_expr(ctx, v.tmpprm, v.mc1);
  v.scn = scn_expr(ctx, in, dead, herb, woody);
  v.p_fi = ctx.sqrt(v.scn);
  v.ic = ic_expr(ctx, v.qign, v.p_fi);
  return v;
}

template <class Ctx>
IntermediateState extract_state(Ctx& ctx, const ChainVals<Ctx>& v) {
  IntermediateState s;
  s.emc = ctx.value_of(v.emc);
  s.mc1 = ctx.value_of(v.mc1);
  s.mc10 = ctx.value_of(v.mc10);
  s.mc100 = ctx.value_of(v.mc100);
  s.mc1000 = ctx.value_of(v.mc1000);
  s.live_herb_mc = ctx.value_of(v.live_herb);
  s.live_woody_mc = ctx.value_of(v.live_woody);
  s.tmpprm = ctx.value_of(v.tmpprm);
  s.qign = ctx.value_of(v.qign);
  s.scn = ctx.value_of(v.scn);
  s.p_fi = ctx.value_of(v.p_fi);
  s.ic = ctx.value_of(v.ic);
  return s;
}

} // namespace

// ---------------------------------------------------------------------------
// IcModel

IcModel::IcModel(const ParameterSet& params)
    : params_(&params), ix_(std::make_shared<const Resolved>(params)) {}

ForwardResult IcModel::forward(const CellInputs& inputs,
                               const MoistureCarry& carry, Mode mode,
                               BranchTrace* trace) const {
  DoubleCtx ctx{*params_, *ix_, mode, trace};
  const auto v = run_chain(ctx, inputs, carry);
  ForwardResult out;
  out.state = extract_state(ctx, v);
  out.new_carry = MoistureCarry{out.state.mc100, out.state.mc1000};
  return out;
}

TapeForwardResult IcModel::forward_tape(Tape& tape, const CellInputs& inputs,
                                        const MoistureCarry& carry,
                                        BranchTrace* trace) const {
  TapeCtx ctx(tape, *params_, *ix_, trace);
  const auto v = run_chain(ctx, inputs, carry);
  TapeForwardResult out;
  out.state = extract_state(ctx, v);
  out.new_carry = MoistureCarry{out.state.mc100, out.state.mc1000};
  out.ic = v.ic;
  out.param_nodes.reserve(ctx.touched.size());
  for (int idx : ctx.touched)
    out.param_nodes.emplace_back(idx, ctx.param_node[idx]);
  return out;
}

MoistureCarry IcModel::spin_up(std::span<const CellInputs> days) const {
  if (days.empty()) throw DomainError("spin_up: no days provided");
  // Start the slow classes at day-0 EMC and sweep the window twice: each
  // sweep shrinks the deviation from the cyclic steady state by
  // (1 - response)^n, which for a 30-day window is ~1e-5 per sweep.
  const CellInputs& d0 = days.front();
  const double emc0 = compute_emc(d0, Mode::Hard);
  MoistureCarry carry{emc0, emc0};
  for (int sweep = 0; sweep < 2; ++sweep) {
    for (const CellInputs& day : days) {
      carry = forward(day, carry, Mode::Hard).new_carry;
    }
  }
  return carry;
}

double IcModel::compute_emc(const CellInputs& inputs, Mode mode) const {
  inputs.validate();
  DoubleCtx ctx{*params_, *ix_, mode, nullptr};
  return emc_expr(ctx, inputs.temp, inputs.rh);
}

IcModel::DeadFuelMoistures IcModel::compute_dead_fuel_moistures(
    const CellInputs& inputs, const MoistureCarry& carry, Mode mode) const {
  inputs.validate();
  carry.validate();
  DoubleCtx ctx{*params_, *ix_, mode, nullptr};
  const double emc = emc_expr(ctx, inputs.temp, inputs.rh);
  const auto dead = dead_fuel_expr(ctx, inputs, carry, emc);
  return DeadFuelMoistures{dead.mc1, dead.mc10, dead.mc100, dead.mc1000,
                           MoistureCarry{dead.mc100, dead.mc1000}};
}

std::pair<double, double> IcModel::compute_live_fuel_moistures(
    const CellInputs& inputs, const MoistureCarry& carry, Mode mode) const {
  const auto dead = compute_dead_fuel_moistures(inputs, carry, mode);
  DoubleCtx ctx{*params_, *ix_, mode, nullptr};
  return live_fuel_expr(ctx, inputs, dead.mc1, dead.mc1000);
}

double IcModel::compute_tmpprm(const CellInputs& inputs, Mode mode) const {
  inputs.validate();
  DoubleCtx ctx{*params_, *ix_, mode, nullptr};
  return tmpprm_expr(ctx, inputs);
}

double IcModel::compute_qign(double tmpprm, double mc1) const {
  DoubleCtx ctx{*params_, *ix_, Mode::Hard, nullptr};
  return qign_expr(ctx, tmpprm, mc1);
}

double IcModel::compute_scn(const CellInputs& inputs,
                            const MoistureCarry& carry, Mode mode) const {
  inputs.validate();
  carry.validate();
  DoubleCtx ctx{*params_, *ix_, mode, nullptr};
  const double emc = emc_expr(ctx, inputs.temp, inputs.rh);
  const auto dead = dead_fuel_expr(ctx, inputs, carry, emc);
  auto [herb, woody] = live_fuel_expr(ctx, inputs, dead.mc1, dead.mc1000);
  return scn_expr(ctx, inputs, dead, herb, woody);
}

double IcModel::compute_pfi(double scn) const {
  if (!(scn >= 0.0 && scn <= 1.0))
    throw DomainError("compute_pfi: scn outside [0, 1]");
  return std::sqrt(scn);
}

double IcModel::compute_ic(double qign, double p_fi, Mode mode) const {
  DoubleCtx ctx{*params_, *ix_, mode, nullptr};
  return ic_expr(ctx, qign, p_fi);
}

// ---------------------------------------------------------------------------

ModelGradCheck grad_check_ic(const ParameterSet& params,
                             const CellInputs& inputs,
                             const MoistureCarry& carry, double step,
                             std::optional<double> clip_limit) {
  IcModel model(params);
  Tape tape;
  BranchTrace trace;
  const TapeForwardResult fwd = model.forward_tape(tape, inputs, carry, &trace);
  const Gradients grads = backward(tape, fwd.ic, clip_limit);

  ModelGradCheck report;
  report.min_boundary_distance = trace.min_distance();

  // Parameters span twelve orders of magnitude, so both the step and the
  // compared gradient are taken per *relative* parameter change: theta is
  // perturbed by step * s with s = max(|theta|, 1e-3), and the analytic
  // gradient is scaled by the same s. The floor of 1e-5 (on the 0-100 IC
  // scale) absorbs central-difference roundoff.
  ParameterSet scratch = params;
  IcModel scratch_model(scratch);
  for (const auto& [idx, node] : fwd.param_nodes) {
    if (params.frozen(idx)) continue;
    const double theta = params.value(idx);
    const double scale = std::max(std::fabs(theta), 1e-3);
    const double h = step * scale;
    scratch.set_value(idx, theta + h);
    const double fp =
        scratch_model.forward(inputs, carry, Mode::Smooth).state.ic;
    scratch.set_value(idx, theta - h);
    const double fm =
        scratch_model.forward(inputs, carry, Mode::Smooth).state.ic;
    scratch.set_value(idx, theta);
    const double numeric = (fp - fm) / (2.0 * step);
    const double analytic = grads.get(node) * scale;
    const double err = grad_rel_error(analytic, numeric, 1e-5);
    if (err > report.max_rel_error) {
      report.max_rel_error = err;
      report.worst_param = idx;
      report.worst_name = params.param(idx).name;
    }
  }
  return report;
}

} // namespace pyric
