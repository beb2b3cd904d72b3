#include "skygrid/branch_bound.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <queue>

namespace skygrid {

namespace {

using Clock = std::chrono::steady_clock;

struct Node {
  std::vector<std::pair<int, std::int8_t>> fixings;  // (binary var, 0/1)
  std::shared_ptr<const SimplexSolver::Basis> basis;
  double bound = -kInf;
  int depth = 0;
  long id = 0;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const MilpInstance& inst, const SolveLimits& limits, const ProgressHook& hook)
      : inst_(inst), limits_(limits), hook_(hook), lp_(inst), start_(Clock::now()) {
    for (std::size_t j = 0; j < inst.num_variables(); ++j) {
      if (inst.variables()[j].kind == VarKind::binary) binaries_.push_back(static_cast<int>(j));
    }
    fixed_.assign(inst.num_variables(), -1);
  }

  MilpSolution run(const std::optional<std::vector<double>>& warm) {
    MilpSolution out;
    Node root;
    root.id = next_id_++;

    if (warm && warm->size() == inst_.num_variables()) try_warm_start(*warm);

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    std::optional<Node> dive = std::move(root);
    bool limit_hit = false;

    while (dive || !open.empty()) {
      if (elapsed() > limits_.time_seconds || nodes_ >= limits_.max_nodes) {
        limit_hit = true;
        break;
      }
      Node node;
      bool continuing = false;
      if (dive) {
        node = std::move(*dive);
        dive.reset();
        continuing = true;
      } else {
        node = open.top();
        open.pop();
        if (pruned(node.bound)) continue;
      }
      ++nodes_;
      apply(node.fixings);
      if (!continuing && node.basis) lp_.set_basis(*node.basis);

      LpStatus st = lp_.solve();
      if (st == LpStatus::numerical_failure || st == LpStatus::iteration_limit) {
        lp_.reset_basis();
        st = lp_.solve();
      }
      if (st != LpStatus::optimal) {
        report(open);
        continue;
      }
      const double bound = std::max(lp_.objective(), node.bound);
      if (pruned(bound)) {
        report(open);
        continue;
      }
      const std::vector<double> x = lp_.primal();

      int branch_var = -1;
      double best_frac = kIntTol;
      for (int j : binaries_) {
        const double f = std::abs(x[j] - std::round(x[j]));
        if (f > best_frac + 1e-12) {
          best_frac = f;
          branch_var = j;
        }
      }
      if (branch_var < 0) {
        polish_incumbent(x);
        report(open);
        continue;
      }

      auto basis = std::make_shared<const SimplexSolver::Basis>(lp_.basis());
      Node down, up;
      for (Node* c : {&down, &up}) {
        c->fixings = node.fixings;
        c->basis = basis;
        c->bound = bound;
        c->depth = node.depth + 1;
        c->id = next_id_++;
      }
      down.fixings.emplace_back(branch_var, 0);
      up.fixings.emplace_back(branch_var, 1);
      const bool prefer_up = x[branch_var] >= 0.5;
      if (!has_incumbent_) {
        dive = prefer_up ? std::move(up) : std::move(down);
        open.push(prefer_up ? std::move(down) : std::move(up));
      } else {
        open.push(std::move(down));
        open.push(std::move(up));
      }
      report(open, bound);
    }

    out.stats.nodes = nodes_;
    out.stats.lp_iterations = lp_.iterations();
    out.stats.bland_activations = lp_.bland_activations();
    out.stats.seconds = elapsed();
    out.stats.warm_start_used = warm_used_;
    if (has_incumbent_) {
      out.values = incumbent_;
      out.objective = incumbent_obj_;
      out.status = limit_hit ? SolveStatus::limit_reached : SolveStatus::optimal;
      out.stats.best_bound = limit_hit ? best_bound_ : incumbent_obj_;
    } else {
      out.status = limit_hit ? SolveStatus::limit_reached : SolveStatus::infeasible;
      out.stats.best_bound = best_bound_;
    }
    return out;
  }

 private:
  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

  double gap_tol() const {
    return std::max(limits_.abs_gap, limits_.rel_gap * std::abs(incumbent_obj_));
  }

  bool pruned(double bound) const { return has_incumbent_ && bound >= incumbent_obj_ - gap_tol(); }

  void report(const std::priority_queue<Node, std::vector<Node>, NodeOrder>& open,
              double current = kInf) {
    double bb = open.empty() ? kInf : open.top().bound;
    bb = std::min(bb, current);
    if (has_incumbent_) bb = std::min(bb, incumbent_obj_);
    if (std::isfinite(bb)) best_bound_ = std::max(best_bound_, bb);
    if (hook_) hook_(best_bound_, has_incumbent_ ? incumbent_obj_ : kInf);
  }

  void set_fix(int j, std::int8_t v) {
    if (fixed_[j] == v) return;
    fixed_[j] = v;
    const VarDef& d = inst_.variables()[j];
    if (v < 0) lp_.set_col_bounds(j, d.lo, d.hi);
    else lp_.set_col_bounds(j, std::max(d.lo, double(v)), std::min(d.hi, double(v)));
  }

  void apply(const std::vector<std::pair<int, std::int8_t>>& fixings) {
    std::vector<std::int8_t> target(inst_.num_variables(), -1);
    for (auto [j, v] : fixings) target[j] = v;
    for (int j : binaries_) set_fix(j, target[j]);
  }

  void accept(const std::vector<double>& x, double obj) {
    if (has_incumbent_ && obj >= incumbent_obj_) return;
    const Evaluation ev = evaluate(inst_, x);
    if (!ev.feasible()) return;
    incumbent_ = x;
    incumbent_obj_ = ev.objective;
    has_incumbent_ = true;
  }

  // Fix binaries at their rounded values and re-solve for exact continuous values.
  void polish_incumbent(const std::vector<double>& x) {
    if (binaries_.empty()) {
      accept(x, lp_.objective());
      return;
    }
    const auto saved = fixed_;
    for (int j : binaries_) set_fix(j, static_cast<std::int8_t>(std::lround(x[j])));
    if (lp_.solve() == LpStatus::optimal) {
      std::vector<double> px = lp_.primal();
      for (int j : binaries_) px[j] = std::round(px[j]);
      accept(px, lp_.objective());
    }
    for (int j : binaries_) set_fix(j, saved[j]);
  }

  void try_warm_start(const std::vector<double>& warm) {
    for (int j : binaries_) {
      const long v = std::lround(warm[j]);
      const VarDef& d = inst_.variables()[j];
      if (v < d.lo || v > d.hi) {
        for (int k : binaries_) set_fix(k, -1);
        return;
      }
      set_fix(j, static_cast<std::int8_t>(v));
    }
    if (lp_.solve() == LpStatus::optimal) {
      std::vector<double> px = lp_.primal();
      for (int j : binaries_) px[j] = std::round(px[j]);
      const bool had = has_incumbent_;
      accept(px, lp_.objective());
      warm_used_ = !had && has_incumbent_;
    }
    for (int j : binaries_) set_fix(j, -1);
  }

  const MilpInstance& inst_;
  SolveLimits limits_;
  ProgressHook hook_;
  SimplexSolver lp_;
  Clock::time_point start_;
  std::vector<int> binaries_;
  std::vector<std::int8_t> fixed_;
  std::vector<double> incumbent_;
  double incumbent_obj_ = kInf;
  bool has_incumbent_ = false;
  bool warm_used_ = false;
  double best_bound_ = -kInf;
  long nodes_ = 0;
  long next_id_ = 0;
};

}  // namespace

MilpSolution solve_lp(const MilpInstance& inst, const LpOptions& opts) {
  const auto start = Clock::now();
  SimplexSolver lp(inst, opts);
  const LpStatus st = lp.solve();
  MilpSolution sol;
  sol.stats.lp_iterations = lp.iterations();
  sol.stats.bland_activations = lp.bland_activations();
  sol.stats.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  switch (st) {
    case LpStatus::optimal:
      sol.status = SolveStatus::optimal;
      sol.values = lp.primal();
      sol.objective = lp.objective();
      sol.stats.best_bound = sol.objective;
      break;
    case LpStatus::infeasible: sol.status = SolveStatus::infeasible; break;
    case LpStatus::iteration_limit: sol.status = SolveStatus::limit_reached; break;
    default: sol.status = SolveStatus::error; break;
  }
  return sol;
}

MilpSolution solve_milp(const MilpInstance& inst, const SolveLimits& limits,
                        const std::optional<std::vector<double>>& warm_start, const ProgressHook& hook) {
  BranchAndBound bb(inst, limits, hook);
  return bb.run(warm_start);
}

}  // namespace skygrid
