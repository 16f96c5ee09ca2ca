// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pyric/errors.hpp"

namespace pyric {

/// One learnable (or frozen) constant of the ignition-component chain.
///
/// `log_space` marks parameters that must stay positive (branch
/// sharpness alphas): their SGD updates are applied in the log domain.
/// `exponent` marks exponents whose base can be negative or zero; they
/// are permanently frozen, and loading a ledger that says otherwise
/// re-freezes them.
struct Parameter {
  std::string name;
  double value = 0.0;
  bool frozen = false;
  bool log_space = false;
  bool exponent = false;
  std::string description;
  std::string reference;
};

/// The parameter ledger: an ordered set of named constants. The JSON
/// serialization is canonical and round-trips bit-exactly; the committed
/// ledger file is the single source of truth for every default below the
/// printed equations.
class ParameterSet {
public:
  /// The built-in default ledger (kept in lockstep with the committed
  /// ledger file by a unit test).
  static ParameterSet defaults();

  static ParameterSet load(const std::filesystem::path& path);
  static ParameterSet from_json_text(const std::string& text);
  void save(const std::filesystem::path& path) const;
  std::string to_json_text() const;

  std::size_t size() const { return params_.size(); }
  const Parameter& param(int idx) const { return params_[idx]; }

  /// Index of a parameter; throws DomainError for unknown names.
  int index(std::string_view name) const;
  /// Index or -1 when absent.
  int find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) >= 0; }

  double value(int idx) const { return params_[idx].value; }
  double value(std::string_view name) const { return value(index(name)); }
  void set_value(int idx, double v);
  void set_value(std::string_view name, double v) {
    set_value(index(name), v);
  }

  bool frozen(int idx) const { return params_[idx].frozen; }
  void set_frozen(int idx, bool frozen);
  void set_frozen(std::string_view name, bool frozen) {
    set_frozen(index(name), frozen);
  }
  void freeze_all();
  /// Freeze everything except the named parameters (used for
  /// single-coefficient calibration experiments).
  void freeze_all_except(const std::vector<std::string>& names);

  std::vector<int> unfrozen_indices() const;

  /// Set the sharpness of every branch site (branch_alpha.*) at once.
  void set_all_branch_alphas(double alpha);

  /// FNV-1a hash of the canonical JSON text, hex-encoded; recorded in
  /// evaluation reports so results are traceable to an exact ledger.
  std::string content_hash() const;

  bool operator==(const ParameterSet& other) const;

private:
  int add(Parameter p);

  std::vector<Parameter> params_;
  std::unordered_map<std::string, int> by_name_;

  friend class LedgerBuilder;
};

} // namespace pyric
