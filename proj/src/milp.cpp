#include "skygrid/milp.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "skygrid/lp_format.hpp"

namespace skygrid {

VarId MilpInstance::add_variable(VarDef def) {
  if (def.name.empty()) def.name = "v" + std::to_string(vars_.size());
  def.name = sanitize_name(def.name);
  if (by_name_.contains(def.name)) throw ModelError("duplicate variable name '" + def.name + "'");
  if (std::isnan(def.lo) || std::isnan(def.hi) || def.lo > def.hi) {
    throw ModelError("variable '" + def.name + "' has lo > hi");
  }
  if (def.kind == VarKind::binary && (def.lo < 0.0 || def.hi > 1.0)) {
    throw ModelError("binary variable '" + def.name + "' has bounds outside [0,1]");
  }
  const int id = static_cast<int>(vars_.size());
  by_name_.emplace(def.name, id);
  vars_.push_back(std::move(def));
  return VarId{id};
}

void MilpInstance::check_terms(const std::vector<Term>& terms, const std::string& where) const {
  std::unordered_set<int> seen;
  for (const Term& t : terms) {
    if (t.var.index < 0 || static_cast<std::size_t>(t.var.index) >= vars_.size()) {
      throw ModelError(where + " references undefined variable id " + std::to_string(t.var.index));
    }
    if (!seen.insert(t.var.index).second) {
      throw ModelError(where + " references variable '" + vars_[t.var.index].name + "' twice");
    }
    if (!std::isfinite(t.coef)) throw ModelError(where + " has a non-finite coefficient");
  }
}

void MilpInstance::add_constraint(LinConstraint c) {
  if (c.name.empty()) c.name = "c" + std::to_string(rows_.size());
  c.name = sanitize_name(c.name);
  if (row_names_.contains(c.name)) throw ModelError("duplicate constraint name '" + c.name + "'");
  check_terms(c.terms, "constraint '" + c.name + "'");
  if (!std::isfinite(c.rhs)) throw ModelError("constraint '" + c.name + "' has non-finite rhs");
  row_names_.emplace(c.name, static_cast<int>(rows_.size()));
  rows_.push_back(std::move(c));
}

void MilpInstance::set_objective(std::vector<Term> terms) {
  check_terms(terms, "objective");
  objective_ = std::move(terms);
}

void MilpInstance::set_bounds(VarId v, double lo, double hi) {
  if (v.index < 0 || static_cast<std::size_t>(v.index) >= vars_.size()) {
    throw ModelError("set_bounds on undefined variable");
  }
  VarDef& d = vars_[v.index];
  if (lo > hi) throw ModelError("variable '" + d.name + "' has lo > hi");
  if (d.kind == VarKind::binary && (lo < 0.0 || hi > 1.0)) {
    throw ModelError("binary variable '" + d.name + "' has bounds outside [0,1]");
  }
  d.lo = lo;
  d.hi = hi;
}

std::size_t MilpInstance::num_binaries() const {
  return static_cast<std::size_t>(std::count_if(
      vars_.begin(), vars_.end(), [](const VarDef& d) { return d.kind == VarKind::binary; }));
}

VarId MilpInstance::find(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? VarId{} : VarId{it->second};
}

std::vector<double> MilpInstance::objective_dense() const {
  std::vector<double> c(vars_.size(), 0.0);
  for (const Term& t : objective_) c[t.var.index] += t.coef;
  return c;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::limit_reached: return "limit-reached";
    case SolveStatus::error: return "error";
  }
  return "?";
}

double row_activity(const LinConstraint& c, const std::vector<double>& values) {
  double a = 0.0;
  for (const Term& t : c.terms) a += t.coef * values[t.var.index];
  return a;
}

Evaluation evaluate(const MilpInstance& inst, const std::vector<double>& values) {
  if (values.size() != inst.num_variables()) {
    throw ModelError("solution has " + std::to_string(values.size()) + " values, instance has " +
                     std::to_string(inst.num_variables()) + " variables");
  }
  Evaluation ev;
  for (const Term& t : inst.objective()) ev.objective += t.coef * values[t.var.index];

  const auto& rows = inst.constraints();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const LinConstraint& c = rows[i];
    const double act = row_activity(c, values);
    double viol = 0.0;
    switch (c.sense) {
      case Sense::le: viol = std::max(0.0, act - c.rhs); break;
      case Sense::ge: viol = std::max(0.0, c.rhs - act); break;
      case Sense::eq: viol = std::abs(act - c.rhs); break;
    }
    viol /= 1.0 + std::abs(c.rhs);
    if (viol > ev.max_violation) {
      ev.max_violation = viol;
      ev.worst_row = static_cast<int>(i);
    }
  }
  const auto& vars = inst.variables();
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const double v = values[j];
    const double bv = std::max(vars[j].lo - v, v - vars[j].hi);
    if (bv > 0.0) ev.max_bound_violation = std::max(ev.max_bound_violation, bv / (1.0 + std::abs(v)));
    if (vars[j].kind == VarKind::binary) {
      ev.max_integrality = std::max(ev.max_integrality, std::abs(v - std::round(v)));
    }
  }
  return ev;
}

}  // namespace skygrid
