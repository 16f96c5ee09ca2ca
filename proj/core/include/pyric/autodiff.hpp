// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pyric/errors.hpp"

namespace pyric {

/// Index of a node on a Tape. Parents always have smaller ids than their
/// children, so a single reverse sweep visits nodes in valid order.
using NodeId = std::uint32_t;

enum class Op : std::uint8_t {
  Const,
  Var,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Exp,
  Log,
  Sqrt,
  PowC,    // power with a constant (non-learnable) exponent
  Sigmoid,
  MinC,    // min(x, c) with constant c
  MaxC,    // max(x, c) with constant c
};

const char* op_name(Op op);

/// One recorded scalar operation. Local partials w.r.t. the parents are
/// cached at record time; they may be infinite at domain edges (sqrt at
/// zero) and are bounded later by gradient clipping in backward().
struct TapeNode {
  Op op;
  std::uint8_t n_parents;
  NodeId a;
  NodeId b;
  double value;
  double grad_a;
  double grad_b;
};

/// Result of reverse accumulation. Adjoints are stored per node id.
struct Gradients {
  std::vector<double> adjoint;
  std::optional<double> clip_limit;
  std::size_t clip_events = 0;   // adjoints clamped to +-clip_limit
  std::size_t nan_zeroed = 0;    // NaN adjoints (0*inf products) zeroed
  std::size_t saturated = 0;     // infinite adjoints saturated (no clip set)

  double get(NodeId id) const { return adjoint[id]; }
};

/// Append-only scalar operation tape. Single-owner while being written;
/// immutable (and freely shareable) once the forward pass is complete.
/// Every recorded value must be finite: a non-finite forward value throws
/// DomainError naming the offending primitive instead of propagating.
class Tape {
public:
  Tape() = default;

  void clear() { nodes_.clear(); }
  void reserve(std::size_t n) { nodes_.reserve(n); }
  std::size_t size() const { return nodes_.size(); }
  const TapeNode& node(NodeId id) const { return nodes_[id]; }
  double value(NodeId id) const { return nodes_[id].value; }

  NodeId constant(double v);
  NodeId variable(double v);

  NodeId add(NodeId x, NodeId y);
  NodeId sub(NodeId x, NodeId y);
  NodeId mul(NodeId x, NodeId y);
  NodeId div(NodeId x, NodeId y);
  NodeId neg(NodeId x);
  NodeId exp(NodeId x);
  NodeId log(NodeId x);
  NodeId sqrt(NodeId x);
  /// x^e with e fixed at record time. The exponent is deliberately not a
  /// tape value: bases may touch zero (and would be invalid below it), so
  /// exponents stay non-learnable throughout the model.
  NodeId pow_const(NodeId x, double exponent);
  NodeId sigmoid(NodeId x);
  NodeId min_const(NodeId x, double c);
  NodeId max_const(NodeId x, double c);

  // Convenience: affine helpers used all over the model code.
  NodeId add_const(NodeId x, double c) { return add(x, constant(c)); }
  NodeId mul_const(NodeId x, double c) { return mul(x, constant(c)); }

private:
  NodeId record(Op op, std::uint8_t n_parents, NodeId a, NodeId b,
                double value, double grad_a, double grad_b);

  std::vector<TapeNode> nodes_;
};

/// Numerically stable logistic function, shared by the tape primitive and
/// the plain-double evaluation contexts.
double sigmoid_value(double x);

/// Reverse accumulation from `output` (seeded with `seed`, normally 1).
/// The accumulated adjoint of each node is clipped to [-clip, +clip]
/// *after* accumulation and *before* propagation to its parents, so a
/// singular local partial (sqrt at zero) cannot blow up anything
/// upstream. NaN adjoints arising from 0*inf products are replaced by
/// zero and counted. All returned adjoints are finite.
Gradients backward(const Tape& tape, NodeId output,
                   std::optional<double> clip_limit, double seed = 1.0);

/// Gradient check report: reverse-mode vs central finite differences.
struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_input = 0;
  std::vector<double> analytic;
  std::vector<double> numeric;
  bool pass(double tolerance) const { return max_rel_error <= tolerance; }
  std::string summary() const;
};

/// Builds the function under test on a fresh tape: given the tape and the
/// variable ids for the inputs, returns the output node.
using TapeBuilder =
    std::function<NodeId(Tape&, std::span<const NodeId>)>;

/// Compares backward() against (f(x+h)-f(x-h))/2h per input. Relative
/// error uses an absolute floor of 1e-6 in the denominator so gradients
/// that are legitimately ~0 compare by absolute difference.
GradCheckReport grad_check(const TapeBuilder& build,
                           std::span<const double> inputs, double step,
                           std::optional<double> clip_limit = std::nullopt);

/// The relative-error metric used by grad_check and the model-level
/// checks: |a-b| / max(|a|, |b|, floor).
double grad_rel_error(double analytic, double numeric, double floor = 1e-6);

} // namespace pyric
