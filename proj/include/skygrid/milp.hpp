#pragma once

// Solver-agnostic sparse MILP representation (minimization only).

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace skygrid {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Feasibility tolerance, relative to 1 + |rhs|.
inline constexpr double kFeasTol = 1e-6;
inline constexpr double kIntTol = 1e-6;

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct VarId {
  int index = -1;
  friend bool operator==(VarId, VarId) = default;
  friend auto operator<=>(VarId, VarId) = default;
};

enum class VarKind { continuous, binary };

struct VarDef {
  std::string name;
  VarKind kind = VarKind::continuous;
  double lo = 0.0;
  double hi = kInf;
};

struct Term {
  VarId var;
  double coef = 0.0;
};

enum class Sense { le, ge, eq };

struct LinConstraint {
  std::string name;
  std::vector<Term> terms;
  Sense sense = Sense::le;
  double rhs = 0.0;
};

class MilpInstance {
 public:
  VarId add_variable(VarDef def);
  void add_constraint(LinConstraint c);
  void set_objective(std::vector<Term> terms);

  /// Overwrites the bounds of an existing variable.
  void set_bounds(VarId v, double lo, double hi);

  const std::vector<VarDef>& variables() const { return vars_; }
  const std::vector<LinConstraint>& constraints() const { return rows_; }
  const std::vector<Term>& objective() const { return objective_; }
  const VarDef& var(VarId v) const { return vars_.at(static_cast<std::size_t>(v.index)); }

  std::size_t num_variables() const { return vars_.size(); }
  std::size_t num_constraints() const { return rows_.size(); }
  std::size_t num_binaries() const;

  /// Returns an invalid VarId (index -1) if no variable has that name.
  VarId find(const std::string& name) const;

  /// Dense objective vector.
  std::vector<double> objective_dense() const;

 private:
  void check_terms(const std::vector<Term>& terms, const std::string& where) const;

  std::vector<VarDef> vars_;
  std::vector<LinConstraint> rows_;
  std::vector<Term> objective_;
  std::unordered_map<std::string, int> by_name_;
  std::unordered_map<std::string, int> row_names_;
};

enum class SolveStatus { optimal, infeasible, limit_reached, error };

const char* to_string(SolveStatus s);

struct SolverStats {
  long nodes = 0;
  long lp_iterations = 0;
  long bland_activations = 0;
  double seconds = 0.0;
  double best_bound = -kInf;
  bool warm_start_used = false;
};

struct MilpSolution {
  SolveStatus status = SolveStatus::error;
  std::vector<double> values;
  double objective = kInf;
  SolverStats stats;

  double value(VarId v) const { return values.at(static_cast<std::size_t>(v.index)); }
};

struct Evaluation {
  double objective = 0.0;
  /// Largest row violation scaled by 1 + |rhs|.
  double max_violation = 0.0;
  int worst_row = -1;
  double max_bound_violation = 0.0;
  double max_integrality = 0.0;

  bool feasible(double feas_tol = kFeasTol, double int_tol = kIntTol) const {
    return max_violation <= feas_tol && max_bound_violation <= feas_tol &&
           max_integrality <= int_tol;
  }
};

/// Recomputes objective and violations of `values` against `inst`.
Evaluation evaluate(const MilpInstance& inst, const std::vector<double>& values);

double row_activity(const LinConstraint& c, const std::vector<double>& values);

}  // namespace skygrid
