// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "pyric/autodiff.hpp"
#include "pyric/inputs.hpp"
#include "pyric/params.hpp"

namespace pyric {

/// Branch sites of the ignition-component chain. Each site has its own
/// learnable sigmoid sharpness, ledger key "branch_alpha.<name>".
enum class BranchSite : int {
  EmcLo = 0,       // EMC dry/mid humidity regime boundary
  EmcHi,           // EMC mid/wet humidity regime boundary
  TmpprmCloud1,    // clear / scattered cloud boundary
  TmpprmCloud2,    // scattered / broken
  TmpprmCloud3,    // broken / overcast
  HerbCuredCap,    // cured herbaceous moisture capped at the herb floor
  HerbGreenLo,     // green herbaceous moisture floor
  HerbGreenHi,     // green herbaceous moisture ceiling
  WoodyLo,         // green woody moisture floor (dormant value)
  WoodyHi,         // green woody moisture ceiling
  DampDeadCap,     // dead moisture ratio capped at extinction
  DampLiveCap,     // live moisture ratio capped at extinction
  ScnLo,           // spread normalization floor at 0
  ScnHi,           // spread normalization ceiling at 1
  ChiFloor,        // (qmax - QIGN)/scale floored at 0 before the 3.6 power
  PiLo,            // probability of ignition floor at 0
  PiHi,            // probability of ignition ceiling at 100
  IcZero,          // IC suppression: zero when g <= pnorm1
  Count
};

constexpr int kBranchSiteCount = static_cast<int>(BranchSite::Count);

const char* branch_site_name(BranchSite site);
/// Characteristic scale of the branch variable at a site, used to
/// normalize boundary distances (RH percent vs cloud fraction etc.).
double branch_site_scale(BranchSite site);

/// Distances of an evaluation from every branch boundary it crossed,
/// normalized by the site scale. Used to keep gradient checks and
/// smooth-vs-hard fixtures away from kinks.
struct BranchTrace {
  struct Entry {
    BranchSite site;
    double distance; // |x - a| / site scale
  };
  std::vector<Entry> entries;

  void note(BranchSite site, double signed_distance) {
    entries.push_back(
        {site, std::abs(signed_distance) / branch_site_scale(site)});
  }
  double min_distance() const;
};

/// Named physical intermediates of one forward pass.
struct IntermediateState {
  double emc = 0.0;           // equilibrium moisture content, percent
  double mc1 = 0.0;           // 1-hour dead fuel moisture, percent
  double mc10 = 0.0;          // 10-hour
  double mc100 = 0.0;         // 100-hour
  double mc1000 = 0.0;        // 1000-hour
  double live_herb_mc = 0.0;  // herbaceous live fuel moisture, percent
  double live_woody_mc = 0.0; // woody live fuel moisture, percent
  double tmpprm = 0.0;        // fuel-atmosphere interface temperature, degF
  double qign = 0.0;          // heat of ignition
  double scn = 0.0;           // normalized rate of spread, [0, 1]
  double p_fi = 0.0;          // probability of a reportable fire, sqrt(scn)
  double ic = 0.0;            // ignition component, [0, 100]
};

enum class Mode { Hard, Smooth };

struct ForwardResult {
  IntermediateState state;
  MoistureCarry new_carry;
};

/// Smooth-mode pass recorded on a tape. `ic` is the output node;
/// `param_nodes` maps ledger parameter index -> variable node for every
/// parameter the pass touched, so adjoints can be routed back into
/// ParameterSet gradients.
struct TapeForwardResult {
  IntermediateState state;
  MoistureCarry new_carry;
  NodeId ic = 0;
  std::vector<std::pair<int, NodeId>> param_nodes;
};

/// The ignition-component chain. Instances resolve ledger indices once;
/// parameter *values* are read live from the ParameterSet on every call,
/// so the trainer can update values in place between epochs.
class IcModel {
public:
  explicit IcModel(const ParameterSet& params);

  const ParameterSet& params() const { return *params_; }

  /// Full chain: EMC -> dead fuels -> live fuels -> TMPPRM -> QIGN ->
  /// SCN -> P(F/I) -> IC.
  ForwardResult forward(const CellInputs& inputs, const MoistureCarry& carry,
                        Mode mode, BranchTrace* trace = nullptr) const;

  /// Smooth-mode pass recorded on `tape`, differentiable w.r.t. every
  /// parameter node.
  TapeForwardResult forward_tape(Tape& tape, const CellInputs& inputs,
                                 const MoistureCarry& carry,
                                 BranchTrace* trace = nullptr) const;

  /// Hard-mode relaxation of the slow dead-fuel classes over a window of
  /// days (normally 30); the result seeds MoistureCarry for day 0.
  MoistureCarry spin_up(std::span<const CellInputs> days) const;

  // Stage-level entry points (hard or smooth on plain doubles).
  double compute_emc(const CellInputs& inputs, Mode mode) const;
  struct DeadFuelMoistures {
    double mc1, mc10, mc100, mc1000;
    MoistureCarry new_carry;
  };
  DeadFuelMoistures compute_dead_fuel_moistures(const CellInputs& inputs,
                                                const MoistureCarry& carry,
                                                Mode mode) const;
  std::pair<double, double> compute_live_fuel_moistures(
      const CellInputs& inputs, const MoistureCarry& carry, Mode mode) const;
  double compute_tmpprm(const CellInputs& inputs, Mode mode) const;
  double compute_qign(double tmpprm, double mc1) const;
  double compute_scn(const CellInputs& inputs, const MoistureCarry& carry,
                     Mode mode) const;
  double compute_pfi(double scn) const;
  double compute_ic(double qign, double p_fi, Mode mode) const;

  /// Ledger indices resolved once per model instance (opaque).
  struct Resolved;

private:
  const ParameterSet* params_;
  std::shared_ptr<const Resolved> ix_;
};

/// Model-level gradient check: tape adjoints of IC w.r.t. every unfrozen
/// parameter vs central finite differences of the smooth forward pass.
/// Steps are relative: h_i = step * max(1, |theta_i|).
struct ModelGradCheck {
  double max_rel_error = 0.0;
  int worst_param = -1;
  std::string worst_name;
  double min_boundary_distance = 0.0;
  bool pass(double tolerance) const { return max_rel_error <= tolerance; }
};

ModelGradCheck grad_check_ic(const ParameterSet& params,
                             const CellInputs& inputs,
                             const MoistureCarry& carry, double step,
                             std::optional<double> clip_limit = std::nullopt);

} // namespace pyric
