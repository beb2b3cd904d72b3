#pragma once

// Bounded-variable revised primal simplex.
//
// Computational form: every row i gets a logical variable r_i with
//   a_i x - r_i = 0,  r_i in [row_lo_i, row_hi_i],
// so the slack basis is -I and all bounds live on variables. Phase 1
// minimizes the sum of bound infeasibilities of basic variables starting
// from whatever basis is current, which is also how warm starts after
// bound changes are handled.

#include <cstdint>
#include <memory>
#include <vector>

#include "skygrid/milp.hpp"

namespace skygrid {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit, numerical_failure };

const char* to_string(LpStatus s);

struct LpOptions {
  double primal_tol = 1e-9;
  double dual_tol = 1e-9;
  double pivot_tol = 1e-9;
  int refactor_interval = 60;
  /// Consecutive non-improving pivots before Bland's rule takes over.
  int degenerate_limit = 80;
  long iteration_limit = 200000;
};

class SimplexSolver {
 public:
  enum class VarStatus : std::uint8_t { basic, at_lower, at_upper, at_zero };

  struct Basis {
    std::vector<int> head;  // basic variable per row position
    std::vector<VarStatus> status;
  };

  /// Builds the LP relaxation of `inst` (binary kinds are ignored).
  explicit SimplexSolver(const MilpInstance& inst, LpOptions opts = {});
  ~SimplexSolver();
  SimplexSolver(const SimplexSolver&) = delete;
  SimplexSolver& operator=(const SimplexSolver&) = delete;

  int num_cols() const { return n_; }
  int num_rows() const { return m_; }

  void set_col_bounds(int j, double lo, double hi);
  double col_lo(int j) const { return lo_[j]; }
  double col_hi(int j) const { return hi_[j]; }

  LpStatus solve();

  /// Structural values (size num_cols()).
  std::vector<double> primal() const;
  double objective() const;

  Basis basis() const { return {head_, status_}; }
  void set_basis(const Basis& b);
  /// Resets to the all-logical basis.
  void reset_basis();

  long iterations() const { return total_iterations_; }
  long bland_activations() const { return bland_activations_; }

 private:
  struct Factor;
  struct Eta {
    int row;
    double pivot;
    std::vector<int> idx;
    std::vector<double> val;
  };

  void column(int j, std::vector<int>& idx, std::vector<double>& val) const;
  bool refactor();
  void ftran(std::vector<double>& v) const;
  void btran(std::vector<double>& v) const;
  void compute_basic_values();
  double nonbasic_value(int j) const;
  double infeasibility(int j) const;
  LpStatus iterate();

  LpOptions opts_;
  int n_ = 0;
  int m_ = 0;
  // Structural columns in CSC.
  std::vector<int> col_start_;
  std::vector<int> row_idx_;
  std::vector<double> vals_;
  std::vector<double> cost_;  // size n_
  std::vector<double> lo_, hi_;  // size n_ + m_
  std::vector<double> x_;        // size n_ + m_

  std::vector<int> head_;
  std::vector<int> pos_;  // row position if basic, -1 otherwise
  std::vector<VarStatus> status_;

  std::unique_ptr<Factor> factor_;
  std::vector<Eta> etas_;
  bool factor_valid_ = false;
  bool values_valid_ = false;

  long total_iterations_ = 0;
  long bland_activations_ = 0;
};

}  // namespace skygrid
