#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "skygrid/milp.hpp"

namespace oracle {

/// Random bounded MILP. Row right-hand sides are derived from a random point
/// so most instances are feasible; some are made infeasible on purpose.
inline skygrid::MilpInstance random_milp(std::mt19937& rng, int max_bin = 12, int max_cont = 30) {
  using namespace skygrid;
  std::uniform_int_distribution<int> nb(1, max_bin), nc(1, max_cont), coef(-6, 6);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int n_bin = nb(rng);
  const int n_cont = nc(rng);
  const int n_rows = std::uniform_int_distribution<int>(2, 14)(rng);

  MilpInstance inst;
  std::vector<double> point;
  for (int j = 0; j < n_bin + n_cont; ++j) {
    VarDef d;
    d.name = "x" + std::to_string(j);
    if (j < n_bin) {
      d.kind = VarKind::binary;
      d.lo = 0.0;
      d.hi = 1.0;
      point.push_back(u01(rng) < 0.5 ? 0.0 : 1.0);
    } else {
      d.lo = std::floor(-5.0 * u01(rng));
      d.hi = d.lo + 1.0 + std::floor(9.0 * u01(rng));
      point.push_back(d.lo + (d.hi - d.lo) * u01(rng));
    }
    inst.add_variable(d);
  }
  const int n = n_bin + n_cont;
  for (int i = 0; i < n_rows; ++i) {
    LinConstraint c;
    c.name = "r" + std::to_string(i);
    const int k = std::uniform_int_distribution<int>(1, std::min(n, 6))(rng);
    std::vector<int> picks;
    while (static_cast<int>(picks.size()) < k) {
      const int j = std::uniform_int_distribution<int>(0, n - 1)(rng);
      if (std::find(picks.begin(), picks.end(), j) == picks.end()) picks.push_back(j);
    }
    double act = 0.0;
    for (int j : picks) {
      int a = coef(rng);
      if (a == 0) a = 1;
      c.terms.push_back({VarId{j}, double(a)});
      act += a * point[j];
    }
    const double r = u01(rng);
    const double slack = std::floor(3.0 * u01(rng));
    if (r < 0.45) {
      c.sense = Sense::le;
      c.rhs = std::round(act) + slack;
    } else if (r < 0.9) {
      c.sense = Sense::ge;
      c.rhs = std::round(act) - slack;
    } else {
      c.sense = Sense::eq;
      c.rhs = act;
    }
    inst.add_constraint(c);
  }
  std::vector<Term> obj;
  for (int j = 0; j < n; ++j) {
    const int a = coef(rng);
    if (a != 0) obj.push_back({VarId{j}, double(a) + 0.25 * u01(rng)});
  }
  inst.set_objective(obj);
  return inst;
}

}  // namespace oracle
