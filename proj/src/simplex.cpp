#include "skygrid/simplex.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

namespace skygrid {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration-limit";
    case LpStatus::numerical_failure: return "numerical-failure";
  }
  return "?";
}

struct SimplexSolver::Factor {
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
};

SimplexSolver::SimplexSolver(const MilpInstance& inst, LpOptions opts)
    : opts_(opts), factor_(std::make_unique<Factor>()) {
  n_ = static_cast<int>(inst.num_variables());
  m_ = static_cast<int>(inst.num_constraints());

  std::vector<int> count(n_ + 1, 0);
  for (const LinConstraint& c : inst.constraints()) {
    for (const Term& t : c.terms) {
      if (t.coef != 0.0) ++count[t.var.index + 1];
    }
  }
  col_start_.assign(n_ + 1, 0);
  for (int j = 0; j < n_; ++j) col_start_[j + 1] = col_start_[j] + count[j + 1];
  row_idx_.resize(col_start_[n_]);
  vals_.resize(col_start_[n_]);
  std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
  for (int i = 0; i < m_; ++i) {
    for (const Term& t : inst.constraints()[i].terms) {
      if (t.coef == 0.0) continue;
      const int p = fill[t.var.index]++;
      row_idx_[p] = i;
      vals_[p] = t.coef;
    }
  }

  cost_ = inst.objective_dense();
  lo_.resize(n_ + m_);
  hi_.resize(n_ + m_);
  for (int j = 0; j < n_; ++j) {
    lo_[j] = inst.variables()[j].lo;
    hi_[j] = inst.variables()[j].hi;
  }
  for (int i = 0; i < m_; ++i) {
    const LinConstraint& c = inst.constraints()[i];
    const int j = n_ + i;
    switch (c.sense) {
      case Sense::le: lo_[j] = -kInf; hi_[j] = c.rhs; break;
      case Sense::ge: lo_[j] = c.rhs; hi_[j] = kInf; break;
      case Sense::eq: lo_[j] = hi_[j] = c.rhs; break;
    }
  }
  x_.assign(n_ + m_, 0.0);
  reset_basis();
}

SimplexSolver::~SimplexSolver() = default;

void SimplexSolver::reset_basis() {
  head_.resize(m_);
  pos_.assign(n_ + m_, -1);
  status_.assign(n_ + m_, VarStatus::at_lower);
  for (int j = 0; j < n_; ++j) {
    if (std::isfinite(lo_[j])) status_[j] = VarStatus::at_lower;
    else if (std::isfinite(hi_[j])) status_[j] = VarStatus::at_upper;
    else status_[j] = VarStatus::at_zero;
    x_[j] = nonbasic_value(j);
  }
  for (int i = 0; i < m_; ++i) {
    head_[i] = n_ + i;
    pos_[n_ + i] = i;
    status_[n_ + i] = VarStatus::basic;
  }
  factor_valid_ = false;
  values_valid_ = false;
}

void SimplexSolver::set_basis(const Basis& b) {
  head_ = b.head;
  status_ = b.status;
  pos_.assign(n_ + m_, -1);
  for (int r = 0; r < m_; ++r) pos_[head_[r]] = r;
  for (int j = 0; j < n_ + m_; ++j) {
    if (status_[j] != VarStatus::basic) x_[j] = nonbasic_value(j);
  }
  factor_valid_ = false;
  values_valid_ = false;
}

double SimplexSolver::nonbasic_value(int j) const {
  switch (status_[j]) {
    case VarStatus::at_lower:
      if (std::isfinite(lo_[j])) return lo_[j];
      return std::isfinite(hi_[j]) ? hi_[j] : 0.0;
    case VarStatus::at_upper:
      if (std::isfinite(hi_[j])) return hi_[j];
      return std::isfinite(lo_[j]) ? lo_[j] : 0.0;
    default: return 0.0;
  }
}

void SimplexSolver::set_col_bounds(int j, double lo, double hi) {
  lo_[j] = lo;
  hi_[j] = hi;
  if (status_[j] != VarStatus::basic) {
    if (status_[j] == VarStatus::at_upper && !std::isfinite(hi)) status_[j] = VarStatus::at_lower;
    if (status_[j] == VarStatus::at_lower && !std::isfinite(lo) && std::isfinite(hi)) {
      status_[j] = VarStatus::at_upper;
    }
    x_[j] = nonbasic_value(j);
  }
  values_valid_ = false;
}

void SimplexSolver::column(int j, std::vector<int>& idx, std::vector<double>& val) const {
  idx.clear();
  val.clear();
  if (j < n_) {
    for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) {
      idx.push_back(row_idx_[p]);
      val.push_back(vals_[p]);
    }
  } else {
    idx.push_back(j - n_);
    val.push_back(-1.0);
  }
}

bool SimplexSolver::refactor() {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(m_) * 3);
  std::vector<int> idx;
  std::vector<double> val;
  for (int r = 0; r < m_; ++r) {
    column(head_[r], idx, val);
    for (std::size_t k = 0; k < idx.size(); ++k) trips.emplace_back(idx[k], r, val[k]);
  }
  Eigen::SparseMatrix<double> B(m_, m_);
  B.setFromTriplets(trips.begin(), trips.end());
  B.makeCompressed();
  etas_.clear();
  factor_valid_ = false;
  if (m_ == 0) {
    factor_valid_ = true;
    return true;
  }
  factor_->lu.analyzePattern(B);
  factor_->lu.factorize(B);
  if (factor_->lu.info() != Eigen::Success) return false;
  factor_valid_ = true;
  return true;
}

void SimplexSolver::ftran(std::vector<double>& v) const {
  if (m_ == 0) return;
  Eigen::Map<Eigen::VectorXd> vm(v.data(), m_);
  Eigen::VectorXd s = factor_->lu.solve(vm);
  vm = s;
  for (const Eta& e : etas_) {
    const double t = v[e.row];
    if (t == 0.0) continue;
    const double tr = t / e.pivot;
    for (std::size_t k = 0; k < e.idx.size(); ++k) v[e.idx[k]] -= e.val[k] * tr;
    v[e.row] = tr;
  }
}

void SimplexSolver::btran(std::vector<double>& v) const {
  if (m_ == 0) return;
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    const Eta& e = *it;
    double s = v[e.row];
    for (std::size_t k = 0; k < e.idx.size(); ++k) s -= e.val[k] * v[e.idx[k]];
    v[e.row] = s / e.pivot;
  }
  Eigen::Map<Eigen::VectorXd> vm(v.data(), m_);
  Eigen::VectorXd s = factor_->lu.transpose().solve(vm);
  vm = s;
}

void SimplexSolver::compute_basic_values() {
  std::vector<double> rhs(m_, 0.0);
  for (int j = 0; j < n_ + m_; ++j) {
    if (status_[j] == VarStatus::basic) continue;
    x_[j] = nonbasic_value(j);
    const double xj = x_[j];
    if (xj == 0.0) continue;
    if (j < n_) {
      for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) rhs[row_idx_[p]] -= vals_[p] * xj;
    } else {
      rhs[j - n_] += xj;
    }
  }
  ftran(rhs);
  for (int r = 0; r < m_; ++r) x_[head_[r]] = rhs[r];
  values_valid_ = true;
}

double SimplexSolver::infeasibility(int j) const {
  const double tol_lo = opts_.primal_tol * (1.0 + std::abs(lo_[j]));
  const double tol_hi = opts_.primal_tol * (1.0 + std::abs(hi_[j]));
  if (x_[j] < lo_[j] - tol_lo) return lo_[j] - x_[j];
  if (x_[j] > hi_[j] + tol_hi) return x_[j] - hi_[j];
  return 0.0;
}

LpStatus SimplexSolver::solve() {
  if (!factor_valid_) {
    if (!refactor()) {
      reset_basis();
      if (!refactor()) return LpStatus::numerical_failure;
    }
  }
  if (!values_valid_) compute_basic_values();
  return iterate();
}

LpStatus SimplexSolver::iterate() {
  const int total = n_ + m_;
  std::vector<double> y(m_), alpha(m_);
  std::vector<int> cidx;
  std::vector<double> cval;
  int degenerate = 0;
  bool bland = false;
  bool verified = false;  // basic values freshly recomputed since last pivot
  long local_iter = 0;

  for (;;) {
    if (local_iter++ > opts_.iteration_limit) return LpStatus::iteration_limit;

    bool phase1 = false;
    for (int r = 0; r < m_; ++r) {
      if (infeasibility(head_[r]) > 0.0) {
        phase1 = true;
        break;
      }
    }
    for (int r = 0; r < m_; ++r) {
      const int b = head_[r];
      if (phase1) {
        const double inf = infeasibility(b);
        y[r] = inf > 0.0 ? (x_[b] < lo_[b] ? -1.0 : 1.0) : 0.0;
      } else {
        y[r] = b < n_ ? cost_[b] : 0.0;
      }
    }
    btran(y);

    // Pricing.
    int q = -1;
    double q_dir = 0.0;
    double q_score = 0.0;
    double q_d = 0.0;
    for (int j = 0; j < total; ++j) {
      const VarStatus st = status_[j];
      if (st == VarStatus::basic || lo_[j] == hi_[j]) continue;
      double d;
      if (j < n_) {
        d = phase1 ? 0.0 : cost_[j];
        for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) d -= y[row_idx_[p]] * vals_[p];
      } else {
        d = y[j - n_];
      }
      double dir = 0.0;
      if (st == VarStatus::at_lower && d < -opts_.dual_tol && std::isfinite(lo_[j])) dir = 1.0;
      else if (st == VarStatus::at_upper && d > opts_.dual_tol && std::isfinite(hi_[j])) dir = -1.0;
      else if (st == VarStatus::at_zero && std::abs(d) > opts_.dual_tol) dir = d < 0.0 ? 1.0 : -1.0;
      // Nonbasic at an infinite bound means "at the finite one" (see nonbasic_value).
      else if (st == VarStatus::at_lower && !std::isfinite(lo_[j]) && d > opts_.dual_tol) dir = -1.0;
      else if (st == VarStatus::at_upper && !std::isfinite(hi_[j]) && d < -opts_.dual_tol) dir = 1.0;
      if (dir == 0.0) continue;
      if (bland) {
        q = j;
        q_dir = dir;
        q_d = d;
        break;
      }
      if (std::abs(d) > q_score) {
        q_score = std::abs(d);
        q = j;
        q_dir = dir;
        q_d = d;
      }
    }

    if (q < 0) {
      if (!verified) {
        if (!refactor()) {
          reset_basis();
          if (!refactor()) return LpStatus::numerical_failure;
        }
        compute_basic_values();
        verified = true;
        continue;
      }
      return phase1 ? LpStatus::infeasible : LpStatus::optimal;
    }

    column(q, cidx, cval);
    std::fill(alpha.begin(), alpha.end(), 0.0);
    for (std::size_t k = 0; k < cidx.size(); ++k) alpha[cidx[k]] = cval[k];
    ftran(alpha);

    // Ratio test (Harris two-pass; exact min-ratio with index ties under Bland).
    const double range = (std::isfinite(lo_[q]) && std::isfinite(hi_[q])) ? hi_[q] - lo_[q] : kInf;
    double theta_relaxed = range;
    auto target_of = [&](int r, double& target) -> double {  // returns rate, 0 if not blocking
      const double a = alpha[r];
      if (std::abs(a) <= opts_.pivot_tol) return 0.0;
      const int b = head_[r];
      const double rate = -q_dir * a;
      if (rate < 0.0) {
        if (x_[b] > hi_[b] + opts_.primal_tol * (1.0 + std::abs(hi_[b]))) target = hi_[b];
        else if (x_[b] >= lo_[b] - opts_.primal_tol * (1.0 + std::abs(lo_[b])) && std::isfinite(lo_[b]))
          target = lo_[b];
        else return 0.0;
      } else {
        if (x_[b] < lo_[b] - opts_.primal_tol * (1.0 + std::abs(lo_[b]))) target = lo_[b];
        else if (x_[b] <= hi_[b] + opts_.primal_tol * (1.0 + std::abs(hi_[b])) && std::isfinite(hi_[b]))
          target = hi_[b];
        else return 0.0;
      }
      return rate;
    };
    for (int r = 0; r < m_; ++r) {
      double target;
      const double rate = target_of(r, target);
      if (rate == 0.0) continue;
      const double tol = opts_.primal_tol * (1.0 + std::abs(target));
      const double rel = (std::abs(x_[head_[r]] - target) + tol) / std::abs(rate);
      theta_relaxed = std::min(theta_relaxed, rel);
    }
    int leave = -1;
    double leave_target = 0.0;
    double theta = 0.0;
    if (bland) {
      double best = kInf;
      for (int r = 0; r < m_; ++r) {
        double target;
        const double rate = target_of(r, target);
        if (rate == 0.0) continue;
        const double ratio = std::max(0.0, std::abs(x_[head_[r]] - target) / std::abs(rate));
        if (ratio < best - 1e-12 || (ratio <= best + 1e-12 && leave >= 0 && head_[r] < head_[leave])) {
          best = ratio;
          leave = r;
          leave_target = target;
        }
      }
      theta = best;
      if (leave >= 0 && range <= best) leave = -1;
    } else {
      double best_alpha = 0.0;
      for (int r = 0; r < m_; ++r) {
        double target;
        const double rate = target_of(r, target);
        if (rate == 0.0) continue;
        const double ratio = std::abs(x_[head_[r]] - target) / std::abs(rate);
        if (ratio <= theta_relaxed && std::abs(alpha[r]) > best_alpha) {
          best_alpha = std::abs(alpha[r]);
          leave = r;
          leave_target = target;
          theta = ratio;
        }
      }
      if (leave >= 0 && range <= theta) leave = -1;
    }
    if (leave < 0) {
      if (!std::isfinite(range)) {
        if (phase1) return LpStatus::numerical_failure;
        return LpStatus::unbounded;
      }
      theta = range;
    }
    theta = std::max(theta, 0.0);

    // Update values.
    x_[q] += q_dir * theta;
    if (theta != 0.0) {
      for (int r = 0; r < m_; ++r) {
        if (alpha[r] != 0.0) x_[head_[r]] -= q_dir * theta * alpha[r];
      }
    }
    ++total_iterations_;
    verified = false;

    if (theta * std::abs(q_d) <= 1e-12) {
      if (++degenerate > opts_.degenerate_limit && !bland) {
        bland = true;
        ++bland_activations_;
      }
    } else {
      degenerate = 0;
      bland = false;
    }

    if (leave < 0) {
      status_[q] = q_dir > 0 ? VarStatus::at_upper : VarStatus::at_lower;
      x_[q] = q_dir > 0 ? hi_[q] : lo_[q];
      continue;
    }

    const int b = head_[leave];
    x_[b] = leave_target;
    status_[b] = (leave_target == lo_[b]) ? VarStatus::at_lower : VarStatus::at_upper;
    head_[leave] = q;
    pos_[q] = leave;
    pos_[b] = -1;
    status_[q] = VarStatus::basic;

    Eta e;
    e.row = leave;
    e.pivot = alpha[leave];
    for (int r = 0; r < m_; ++r) {
      if (r != leave && std::abs(alpha[r]) > 1e-14) {
        e.idx.push_back(r);
        e.val.push_back(alpha[r]);
      }
    }
    etas_.push_back(std::move(e));

    if (static_cast<int>(etas_.size()) >= opts_.refactor_interval) {
      if (!refactor()) {
        reset_basis();
        if (!refactor()) return LpStatus::numerical_failure;
      }
      compute_basic_values();
    }
  }
}

std::vector<double> SimplexSolver::primal() const {
  return std::vector<double>(x_.begin(), x_.begin() + n_);
}

double SimplexSolver::objective() const {
  double z = 0.0;
  for (int j = 0; j < n_; ++j) z += cost_[j] * x_[j];
  return z;
}

}  // namespace skygrid
