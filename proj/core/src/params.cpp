// SPDX-License-Identifier: Apache-2.0
#include "pyric/params.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pyric {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kLedgerFormat = "pyric-parameter-ledger-v1";

// Reference strings shared by many entries.
constexpr const char* kNfdrs = "Deeming, Burgan & Cohen (1977); Cohen & Deeming (1985), NFDRS basic equations";
constexpr const char* kArtifact = "project default";

} // namespace

int ParameterSet::add(Parameter p) {
  if (by_name_.count(p.name))
    throw DomainError("ledger: duplicate parameter '" + p.name + "'");
  if (p.exponent) p.frozen = true;
  const int idx = static_cast<int>(params_.size());
  by_name_.emplace(p.name, idx);
  params_.push_back(std::move(p));
  return idx;
}

int ParameterSet::index(std::string_view name) const {
  const int idx = find(name);
  if (idx < 0)
    throw DomainError("ledger: unknown parameter '" + std::string(name) + "'");
  return idx;
}

int ParameterSet::find(std::string_view name) const {
  const auto it = by_name_.find(std::string(name));
  return it == by_name_.end() ? -1 : it->second;
}

void ParameterSet::set_value(int idx, double v) {
  if (!std::isfinite(v))
    throw DomainError("ledger: non-finite value for '" + params_[idx].name +
                      "'");
  if (params_[idx].log_space && !(v > 0.0))
    throw DomainError("ledger: '" + params_[idx].name +
                      "' must stay positive");
  params_[idx].value = v;
}

void ParameterSet::set_frozen(int idx, bool frozen) {
  if (params_[idx].exponent && !frozen)
    throw DomainError("ledger: '" + params_[idx].name +
                      "' is an exponent and stays frozen");
  params_[idx].frozen = frozen;
}

void ParameterSet::freeze_all() {
  for (auto& p : params_) p.frozen = true;
}

void ParameterSet::freeze_all_except(const std::vector<std::string>& names) {
  freeze_all();
  for (const auto& n : names) set_frozen(index(n), false);
}

std::vector<int> ParameterSet::unfrozen_indices() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (!params_[i].frozen) out.push_back(static_cast<int>(i));
  return out;
}

void ParameterSet::set_all_branch_alphas(double alpha) {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name.rfind("branch_alpha.", 0) == 0)
      set_value(static_cast<int>(i), alpha);
}

bool ParameterSet::operator==(const ParameterSet& other) const {
  if (params_.size() != other.params_.size()) return false;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Parameter& a = params_[i];
    const Parameter& b = other.params_[i];
    if (a.name != b.name || a.value != b.value || a.frozen != b.frozen ||
        a.log_space != b.log_space || a.exponent != b.exponent ||
        a.description != b.description || a.reference != b.reference)
      return false;
  }
  return true;
}

std::string ParameterSet::to_json_text() const {
  ordered_json root;
  root["format"] = kLedgerFormat;
  ordered_json entries = ordered_json::object();
  for (const auto& p : params_) {
    ordered_json e;
    e["value"] = p.value;
    e["frozen"] = p.frozen;
    if (p.log_space) e["log_space"] = true;
    if (p.exponent) e["exponent"] = true;
    e["description"] = p.description;
    e["reference"] = p.reference;
    entries[p.name] = std::move(e);
  }
  root["parameters"] = std::move(entries);
  return root.dump(2) + "\n";
}

ParameterSet ParameterSet::from_json_text(const std::string& text) {
  ordered_json root;
  try {
    root = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw IoError(std::string("ledger: JSON parse failed: ") + e.what());
  }
  if (!root.is_object() || root.value("format", "") != kLedgerFormat)
    throw IoError("ledger: missing or unknown format marker");
  if (!root.contains("parameters") || !root["parameters"].is_object())
    throw IoError("ledger: missing 'parameters' object");

  ParameterSet set;
  for (const auto& [name, e] : root["parameters"].items()) {
    Parameter p;
    p.name = name;
    if (!e.contains("value") || !e["value"].is_number())
      throw IoError("ledger: parameter '" + name + "' has no numeric value");
    p.value = e["value"].get<double>();
    p.frozen = e.value("frozen", false);
    p.log_space = e.value("log_space", false);
    p.exponent = e.value("exponent", false);
    p.description = e.value("description", "");
    p.reference = e.value("reference", "");
    if (!std::isfinite(p.value))
      throw IoError("ledger: parameter '" + name + "' is non-finite");
    set.add(std::move(p));
  }
  return set;
}

ParameterSet ParameterSet::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("ledger: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

void ParameterSet::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("ledger: cannot write " + path.string());
  out << to_json_text();
  if (!out) throw IoError("ledger: write failed for " + path.string());
}

std::string ParameterSet::content_hash() const {
  const std::string text = to_json_text();
  std::uint64_t h = 1469598103934665603ull;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

ParameterSet ParameterSet::defaults() {
  ParameterSet s;
  auto p = [&s](std::string name, double value, std::string desc,
                std::string ref) {
    Parameter q;
    q.name = std::move(name);
    q.value = value;
    q.description = std::move(desc);
    q.reference = std::move(ref);
    s.add(std::move(q));
  };
  auto frozen = [&s](std::string name, double value, std::string desc,
                     std::string ref) {
    Parameter q;
    q.name = std::move(name);
    q.value = value;
    q.frozen = true;
    q.description = std::move(desc);
    q.reference = std::move(ref);
    s.add(std::move(q));
  };
  auto expo = [&s](std::string name, double value, std::string desc,
                   std::string ref) {
    Parameter q;
    q.name = std::move(name);
    q.value = value;
    q.frozen = true;
    q.exponent = true;
    q.description = std::move(desc);
    q.reference = std::move(ref);
    s.add(std::move(q));
  };

  // --- heat of ignition -------------------------------------------------
  p("qign.c0", 144.5, "QIGN intercept, heat units", kNfdrs);
  p("qign.c1", 0.266, "QIGN linear fuel-temperature coefficient", kNfdrs);
  p("qign.c2", 0.00058, "QIGN quadratic fuel-temperature coefficient", kNfdrs);
  p("qign.c3", 0.01, "QIGN temperature x MC1 cross coefficient", kNfdrs);
  p("qign.c4", 18.54, "QIGN saturating MC1 term amplitude", kNfdrs);
  p("qign.c5", 0.151, "QIGN saturating MC1 term rate", kNfdrs);
  p("qign.c6", 6.4, "QIGN linear MC1 coefficient", kNfdrs);
  expo("qign.square_exponent", 2.0,
       "exponent of the TMPPRM square; base may be negative, never learnable",
       kNfdrs);

  // --- ignition component head -------------------------------------------
  frozen("ic.qmax", 344.0, "QIGN ceiling in the ignition-probability transform",
         kNfdrs);
  frozen("ic.chi_scale", 10.0, "divisor of (qmax - QIGN)", kNfdrs);
  expo("ic.chi_exponent", 3.6,
       "exponent of the ignition-probability transform; base may touch zero",
       kNfdrs);
  p("ic.pnorm1", 0.00232,
    "suppression threshold scaling factor (low confidence default)", kNfdrs);
  p("ic.pnorm2", 0.99767,
    "ignition-probability normalization factor (low confidence default)",
    kNfdrs);
  p("ic.pnorm3", 0.0000185,
    "ignition-probability scaling factor (low confidence default)", kNfdrs);
  frozen("ic.pi_scale", 100.0, "probability-of-ignition percent scale", kNfdrs);

  // --- equilibrium moisture content ---------------------------------------
  p("emc.dry_c0", 0.03229, "EMC dry regime (RH < rh_lo) intercept", kNfdrs);
  p("emc.dry_c1", 0.281073, "EMC dry regime RH coefficient", kNfdrs);
  p("emc.dry_c2", 0.000578, "EMC dry regime RH x T coefficient (subtracted)",
    kNfdrs);
  p("emc.mid_c0", 2.22749, "EMC mid regime intercept", kNfdrs);
  p("emc.mid_c1", 0.160107, "EMC mid regime RH coefficient", kNfdrs);
  p("emc.mid_c2", 0.014784, "EMC mid regime T coefficient (subtracted)",
    kNfdrs);
  p("emc.wet_c0", 21.0606, "EMC wet regime (RH >= rh_hi) intercept", kNfdrs);
  p("emc.wet_c1", 0.005565, "EMC wet regime RH^2 coefficient", kNfdrs);
  p("emc.wet_c2", 0.00035, "EMC wet regime RH x T coefficient (subtracted)",
    kNfdrs);
  p("emc.wet_c3", 0.483199, "EMC wet regime RH coefficient (subtracted)",
    kNfdrs);
  frozen("emc.rh_lo", 10.0, "RH boundary between dry and mid regimes, percent",
         kNfdrs);
  frozen("emc.rh_hi", 50.0, "RH boundary between mid and wet regimes, percent",
         kNfdrs);

  // --- dead fuel moisture ---------------------------------------------------
  p("moisture.mc1_ratio", 1.03, "1-hour moisture as a multiple of EMC", kNfdrs);
  p("moisture.mc10_ratio", 1.28, "10-hour moisture as a multiple of EMC",
    kNfdrs);
  p("moisture.saturation", 35.0,
    "rain-hour moisture level blended into the fast dead fuels, percent",
    kNfdrs);
  p("moisture.day_weight", 0.5,
    "weight of the daytime EMC extreme in the daily boundary average",
    kArtifact);
  p("moisture.bndry_100h_rain_slope", 0.5,
    "100-hour boundary: moisture per rain hour squared term", kNfdrs);
  p("moisture.bndry_100h_rain_intercept", 41.0,
    "100-hour boundary: rain-hour moisture offset", kNfdrs);
  p("moisture.bndry_1000h_rain_slope", 2.7,
    "1000-hour boundary: moisture per rain hour squared term", kNfdrs);
  p("moisture.bndry_1000h_rain_intercept", 76.0,
    "1000-hour boundary: rain-hour moisture offset", kNfdrs);
  p("moisture.mc100_response", 0.31563376,
    "daily fraction of the gap to the boundary closed by MC100 "
    "(1 - 0.87 exp(-0.24))",
    kNfdrs);
  p("moisture.mc1000_response", 0.30681020,
    "daily fraction of the gap to the boundary closed by MC1000 "
    "(1 - 0.82 exp(-0.168))",
    kNfdrs);

  // --- fuel-atmosphere interface temperature -------------------------------
  p("tmpprm.increment_clear", 25.0,
    "solar heating increment under clear sky, degF", kNfdrs);
  p("tmpprm.increment_scattered", 19.0,
    "solar heating increment under scattered clouds, degF", kNfdrs);
  p("tmpprm.increment_broken", 12.0,
    "solar heating increment under broken clouds, degF", kNfdrs);
  p("tmpprm.increment_overcast", 5.0,
    "solar heating increment under overcast sky, degF", kNfdrs);
  frozen("tmpprm.cloud_break_1", 0.1,
         "cloud fraction boundary clear/scattered", kNfdrs);
  frozen("tmpprm.cloud_break_2", 0.5,
         "cloud fraction boundary scattered/broken", kNfdrs);
  frozen("tmpprm.cloud_break_3", 0.9,
         "cloud fraction boundary broken/overcast", kNfdrs);

  // --- live fuel moisture ----------------------------------------------------
  static const double herb_int[4] = {-70.0, -100.0, -137.5, -185.0};
  static const double herb_slp[4] = {12.8, 14.0, 15.5, 17.4};
  static const double wood_int[4] = {12.5, -5.0, -22.5, -45.0};
  static const double wood_slp[4] = {7.5, 8.2, 8.9, 9.8};
  static const double wood_dormant[4] = {50.0, 60.0, 70.0, 80.0};
  for (int cc = 0; cc < 4; ++cc) {
    const std::string suffix = "_cc" + std::to_string(cc + 1);
    p("live.herb_green_intercept" + suffix, herb_int[cc],
      "green herbaceous moisture intercept, climate class " +
          std::to_string(cc + 1),
      kNfdrs);
    p("live.herb_green_slope" + suffix, herb_slp[cc],
      "green herbaceous moisture per MC1000 percent, climate class " +
          std::to_string(cc + 1),
      kNfdrs);
  }
  p("live.herb_min", 30.0, "green herbaceous moisture floor and cured cap",
    kNfdrs);
  p("live.herb_max", 250.0, "green herbaceous moisture ceiling", kNfdrs);
  for (int cc = 0; cc < 4; ++cc) {
    const std::string suffix = "_cc" + std::to_string(cc + 1);
    p("live.woody_intercept" + suffix, wood_int[cc],
      "green woody moisture intercept, climate class " + std::to_string(cc + 1),
      kNfdrs);
    p("live.woody_slope" + suffix, wood_slp[cc],
      "green woody moisture per MC1000 percent, climate class " +
          std::to_string(cc + 1),
      kNfdrs);
    p("live.woody_dormant" + suffix, wood_dormant[cc],
      "dormant (cured/pre-green) woody moisture, climate class " +
          std::to_string(cc + 1),
      kNfdrs);
  }
  p("live.woody_max", 200.0, "green woody moisture ceiling", kNfdrs);
  p("live.transition_weight", 0.5,
    "green-side weight of the transition stage blend", kArtifact);

  // --- spread component ---------------------------------------------------
  p("spread.wind_coeff", 0.2, "wind factor coefficient (wind speed in mph)",
    kArtifact);
  expo("spread.wind_exponent", 1.4,
       "wind factor exponent; base is wind speed which may be zero", kArtifact);
  static const double slope_phi[5] = {0.25, 0.5, 1.0, 2.0, 4.0};
  for (int sc = 0; sc < 5; ++sc) {
    p("spread.slope_phi_" + std::to_string(sc + 1), slope_phi[sc],
      "slope effect factor, slope class " + std::to_string(sc + 1), kArtifact);
  }
  // Moisture damping in factored form, eta = (1 - r)(q r^2 + l r + 1):
  // extinction (r = 1) is an exact zero for any coefficients. With the
  // defaults this expands to Rothermel's 1 - 2.59 r + 5.11 r^2 - 3.52 r^3.
  p("spread.damp_quad", 3.52, "moisture damping factor: quadratic coefficient",
    "Rothermel (1972) moisture damping polynomial, factored at extinction");
  p("spread.damp_lin", -1.59, "moisture damping factor: linear coefficient",
    "Rothermel (1972) moisture damping polynomial, factored at extinction");

  // --- fuel models ----------------------------------------------------------
  struct FuelRow {
    const char* code;
    const char* label;
    double w1, w10, w100, wherb, wwoody;
    double mext_dead, mext_live, gamma, norm;
  };
  static const FuelRow fuels[] = {
      {"A", "western annual grass", 0.80, 0.15, 0.05, 0.90, 0.10, 15.0, 150.0,
       25.0, 120.0},
      {"C", "open pine with grass", 0.70, 0.20, 0.10, 0.60, 0.40, 20.0, 160.0,
       12.0, 60.0},
      {"F", "intermediate brush", 0.55, 0.30, 0.15, 0.30, 0.70, 20.0, 180.0,
       8.0, 40.0},
      {"G", "dense conifer with heavy dead load", 0.45, 0.30, 0.25, 0.20, 0.80,
       25.0, 200.0, 5.0, 25.0},
  };
  for (const auto& f : fuels) {
    const std::string base = std::string("fuel.") + f.code + ".";
    const std::string label = std::string(" (model ") + f.code + ", " +
                              f.label + ")";
    frozen(base + "dead_w1", f.w1, "1-hour dead weighting" + label, kArtifact);
    frozen(base + "dead_w10", f.w10, "10-hour dead weighting" + label,
           kArtifact);
    frozen(base + "dead_w100", f.w100, "100-hour dead weighting" + label,
           kArtifact);
    frozen(base + "live_herb_w", f.wherb, "herbaceous live weighting" + label,
           kArtifact);
    frozen(base + "live_woody_w", f.wwoody, "woody live weighting" + label,
           kArtifact);
    p(base + "mext_dead", f.mext_dead,
      "dead moisture of extinction, percent" + label, kNfdrs);
    p(base + "mext_live", f.mext_live,
      "live moisture of extinction, percent" + label, kArtifact);
    p(base + "reaction_velocity", f.gamma,
      "reaction velocity scale" + label, kArtifact);
    p(base + "spread_norm", f.norm,
      "spread normalization (spread at SCN = 1)" + label, kArtifact);
  }

  // --- branch sharpness ------------------------------------------------------
  static const char* sites[] = {
      "emc_lo",       "emc_hi",       "tmpprm_cloud_1", "tmpprm_cloud_2",
      "tmpprm_cloud_3", "herb_cured_cap", "herb_green_lo", "herb_green_hi",
      "woody_lo",     "woody_hi",     "damp_dead_cap",  "damp_live_cap",
      "scn_lo",       "scn_hi",       "chi_floor",      "pi_lo",
      "pi_hi",        "ic_zero"};
  for (const char* site : sites) {
    Parameter q;
    q.name = std::string("branch_alpha.") + site;
    q.value = 1.0;
    q.log_space = true;
    q.description = std::string("sigmoid sharpness of branch site ") + site;
    q.reference = kArtifact;
    s.add(std::move(q));
  }

  return s;
}

} // namespace pyric
