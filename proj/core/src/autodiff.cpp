// SPDX-License-Identifier: Apache-2.0
#include "pyric/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pyric {

const char* op_name(Op op) {
  switch (op) {
    case Op::Const: return "constant";
    case Op::Var: return "variable";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Neg: return "neg";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    case Op::PowC: return "pow";
    case Op::Sigmoid: return "sigmoid";
    case Op::MinC: return "min";
    case Op::MaxC: return "max";
  }
  return "?";
}

double sigmoid_value(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

NodeId Tape::record(Op op, std::uint8_t n_parents, NodeId a, NodeId b,
                    double value, double grad_a, double grad_b) {
  const NodeId id = static_cast<NodeId>(nodes_.size());
  if (n_parents >= 1 && a >= id)
    throw DomainError("tape: parent not on tape for " +
                      std::string(op_name(op)));
  if (n_parents >= 2 && b >= id)
    throw DomainError("tape: parent not on tape for " +
                      std::string(op_name(op)));
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "tape: non-finite forward value in '" << op_name(op) << "'";
    if (n_parents >= 1) msg << " of " << nodes_[a].value;
    if (n_parents >= 2) msg << ", " << nodes_[b].value;
    throw DomainError(msg.str());
  }
  nodes_.push_back(TapeNode{op, n_parents, a, b, value, grad_a, grad_b});
  return id;
}

NodeId Tape::constant(double v) {
  return record(Op::Const, 0, 0, 0, v, 0.0, 0.0);
}

NodeId Tape::variable(double v) {
  return record(Op::Var, 0, 0, 0, v, 0.0, 0.0);
}

NodeId Tape::add(NodeId x, NodeId y) {
  return record(Op::Add, 2, x, y, nodes_[x].value + nodes_[y].value, 1.0, 1.0);
}

NodeId Tape::sub(NodeId x, NodeId y) {
  return record(Op::Sub, 2, x, y, nodes_[x].value - nodes_[y].value, 1.0, -1.0);
}

NodeId Tape::mul(NodeId x, NodeId y) {
  const double vx = nodes_[x].value, vy = nodes_[y].value;
  return record(Op::Mul, 2, x, y, vx * vy, vy, vx);
}

NodeId Tape::div(NodeId x, NodeId y) {
  const double vx = nodes_[x].value, vy = nodes_[y].value;
  const double v = vx / vy;
  return record(Op::Div, 2, x, y, v, 1.0 / vy, -vx / (vy * vy));
}

NodeId Tape::neg(NodeId x) {
  return record(Op::Neg, 1, x, 0, -nodes_[x].value, -1.0, 0.0);
}

NodeId Tape::exp(NodeId x) {
  const double v = std::exp(nodes_[x].value);
  return record(Op::Exp, 1, x, 0, v, v, 0.0);
}

NodeId Tape::log(NodeId x) {
  const double vx = nodes_[x].value;
  return record(Op::Log, 1, x, 0, std::log(vx), 1.0 / vx, 0.0);
}

NodeId Tape::sqrt(NodeId x) {
  const double vx = nodes_[x].value;
  const double v = std::sqrt(vx);
  // At vx = 0 the local partial is +inf; it is recorded as such and
  // bounded by clipping during backward.
  const double g = (v == 0.0) ? std::numeric_limits<double>::infinity()
                              : 0.5 / v;
  return record(Op::Sqrt, 1, x, 0, v, g, 0.0);
}

NodeId Tape::pow_const(NodeId x, double exponent) {
  const double vx = nodes_[x].value;
  const double v = std::pow(vx, exponent);
  // Integral exponents keep negative bases valid (TMPPRM^2 with TMPPRM
  // below zero); fractional exponents of negative bases yield NaN and are
  // rejected by record(). At vx = 0 with exponent < 1 the local partial
  // is +inf, bounded later by clipping.
  const double g = exponent * std::pow(vx, exponent - 1.0);
  return record(Op::PowC, 1, x, 0, v, g, 0.0);
}

NodeId Tape::sigmoid(NodeId x) {
  const double s = sigmoid_value(nodes_[x].value);
  return record(Op::Sigmoid, 1, x, 0, s, s * (1.0 - s), 0.0);
}

NodeId Tape::min_const(NodeId x, double c) {
  const double vx = nodes_[x].value;
  // Sub-gradient at the tie goes to the constant side.
  const bool pass = vx < c;
  return record(Op::MinC, 1, x, 0, pass ? vx : c, pass ? 1.0 : 0.0, 0.0);
}

NodeId Tape::max_const(NodeId x, double c) {
  const double vx = nodes_[x].value;
  const bool pass = vx > c;
  return record(Op::MaxC, 1, x, 0, pass ? vx : c, pass ? 1.0 : 0.0, 0.0);
}

Gradients backward(const Tape& tape, NodeId output,
                   std::optional<double> clip_limit, double seed) {
  if (output >= tape.size())
    throw DomainError("backward: output id not on tape");
  Gradients g;
  g.clip_limit = clip_limit;
  g.adjoint.assign(tape.size(), 0.0);
  g.adjoint[output] = seed;

  const double limit = clip_limit.value_or(0.0);
  const double big = std::numeric_limits<double>::max();

  for (NodeId i = output + 1; i-- > 0;) {
    double a = g.adjoint[i];
    if (std::isnan(a)) {
      a = 0.0;
      ++g.nan_zeroed;
    } else if (clip_limit) {
      if (a > limit) {
        a = limit;
        ++g.clip_events;
      } else if (a < -limit) {
        a = -limit;
        ++g.clip_events;
      }
    } else if (std::isinf(a)) {
      a = (a > 0.0) ? big : -big;
      ++g.saturated;
    }
    g.adjoint[i] = a;

    const TapeNode& n = tape.node(i);
    if (n.n_parents >= 1) {
      const double c = a * n.grad_a;
      if (std::isnan(c)) {
        ++g.nan_zeroed;
      } else {
        g.adjoint[n.a] += c;
      }
    }
    if (n.n_parents >= 2) {
      const double c = a * n.grad_b;
      if (std::isnan(c)) {
        ++g.nan_zeroed;
      } else {
        g.adjoint[n.b] += c;
      }
    }
  }
  return g;
}

double grad_rel_error(double analytic, double numeric, double floor) {
  const double scale =
      std::max({std::fabs(analytic), std::fabs(numeric), floor});
  return std::fabs(analytic - numeric) / scale;
}

GradCheckReport grad_check(const TapeBuilder& build,
                           std::span<const double> inputs, double step,
                           std::optional<double> clip_limit) {
  const std::size_t n = inputs.size();

  auto evaluate = [&](std::span<const double> x, Tape& tape,
                      std::vector<NodeId>& vars) {
    tape.clear();
    vars.clear();
    vars.reserve(n);
    for (double v : x) vars.push_back(tape.variable(v));
    return build(tape, vars);
  };

  Tape tape;
  std::vector<NodeId> vars;
  const NodeId out = evaluate(inputs, tape, vars);
  const Gradients grads = backward(tape, out, clip_limit);

  GradCheckReport report;
  report.analytic.resize(n);
  report.numeric.resize(n);
  std::vector<double> x(inputs.begin(), inputs.end());
  Tape scratch;
  std::vector<NodeId> scratch_vars;
  for (std::size_t i = 0; i < n; ++i) {
    report.analytic[i] = grads.get(vars[i]);
    const double x0 = x[i];
    x[i] = x0 + step;
    const double fp = scratch.value(evaluate(x, scratch, scratch_vars));
    x[i] = x0 - step;
    const double fm = scratch.value(evaluate(x, scratch, scratch_vars));
    x[i] = x0;
    report.numeric[i] = (fp - fm) / (2.0 * step);

    const double err = grad_rel_error(report.analytic[i], report.numeric[i]);
    if (err > report.max_rel_error) {
      report.max_rel_error = err;
      report.worst_input = i;
    }
  }
  return report;
}

std::string GradCheckReport::summary() const {
  std::ostringstream os;
  os << "max rel error " << max_rel_error << " at input " << worst_input;
  if (worst_input < analytic.size()) {
    os << " (analytic " << analytic[worst_input] << ", numeric "
       << numeric[worst_input] << ")";
  }
  return os.str();
}

} // namespace pyric
