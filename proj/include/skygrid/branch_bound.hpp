#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "skygrid/milp.hpp"
#include "skygrid/simplex.hpp"

namespace skygrid {

struct SolveLimits {
  double time_seconds = 600.0;
  long max_nodes = 1'000'000;
  /// Relative best-bound gap at which the search stops.
  double rel_gap = 1e-6;
  double abs_gap = 1e-9;
};

/// Called after every processed node with (best bound, incumbent objective).
using ProgressHook = std::function<void(double best_bound, double incumbent)>;

/// LP relaxation solve (binary kinds ignored).
MilpSolution solve_lp(const MilpInstance& inst, const LpOptions& opts = {});

/// Branch and bound: most-fractional branching (lowest VarId on ties),
/// best-first node selection with a depth-first dive until the first incumbent.
/// `warm_start` is a full value vector; its binaries are rounded and fixed and
/// the induced LP is solved to produce an initial incumbent if feasible.
MilpSolution solve_milp(const MilpInstance& inst, const SolveLimits& limits = {},
                        const std::optional<std::vector<double>>& warm_start = std::nullopt,
                        const ProgressHook& hook = {});

}  // namespace skygrid
