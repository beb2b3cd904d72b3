#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "oracles/dense_lp.hpp"
#include "oracles/random_milp.hpp"
#include "skygrid/branch_bound.hpp"
#include "skygrid/external_solver.hpp"
#include "skygrid/lp_format.hpp"

using namespace skygrid;

TEST_CASE("solve_lp: single bounded variable") {
  MilpInstance inst;
  const VarId x = inst.add_variable({"x", VarKind::continuous, 0.0, 10.0});
  inst.add_constraint({"lb", {{x, 1.0}}, Sense::ge, 3.0});
  inst.set_objective({{x, 1.0}});
  auto sol = solve_lp(inst);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.value(x) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(sol.objective == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("solve_lp: degenerate LP with redundant equalities") {
  // min -x - y  s.t. x + y = 2 (three copies), x - y = 0, x,y in [0,5], x + y <= 2.
  // Hand solution: x = y = 1, objective -2.
  MilpInstance inst;
  const VarId x = inst.add_variable({"x", VarKind::continuous, 0.0, 5.0});
  const VarId y = inst.add_variable({"y", VarKind::continuous, 0.0, 5.0});
  for (int k = 0; k < 3; ++k) {
    inst.add_constraint({"sum" + std::to_string(k), {{x, 1.0}, {y, 1.0}}, Sense::eq, 2.0});
  }
  inst.add_constraint({"diff", {{x, 1.0}, {y, -1.0}}, Sense::eq, 0.0});
  inst.add_constraint({"cap", {{x, 1.0}, {y, 1.0}}, Sense::le, 2.0});
  inst.add_constraint({"twice", {{x, 2.0}, {y, 2.0}}, Sense::le, 4.0});
  inst.set_objective({{x, -1.0}, {y, -1.0}});
  auto sol = solve_lp(inst);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.value(x) == doctest::Approx(1.0));
  CHECK(sol.value(y) == doctest::Approx(1.0));
  CHECK(sol.objective == doctest::Approx(-2.0));
}

TEST_CASE("solve_lp: classic cycling example terminates") {
  // Beale's example (cycles under textbook Dantzig without anti-cycling).
  MilpInstance inst;
  std::vector<VarId> v;
  for (int j = 0; j < 4; ++j) v.push_back(inst.add_variable({"x" + std::to_string(j), VarKind::continuous, 0.0, 100.0}));
  inst.add_constraint({"r1", {{v[0], 0.25}, {v[1], -60.0}, {v[2], -0.04}, {v[3], 9.0}}, Sense::le, 0.0});
  inst.add_constraint({"r2", {{v[0], 0.5}, {v[1], -90.0}, {v[2], -0.02}, {v[3], 3.0}}, Sense::le, 0.0});
  inst.add_constraint({"r3", {{v[2], 1.0}}, Sense::le, 1.0});
  inst.set_objective({{v[0], -0.75}, {v[1], 150.0}, {v[2], -0.02}, {v[3], 6.0}});
  auto sol = solve_lp(inst);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.objective == doctest::Approx(-0.05));
}

TEST_CASE("solve_lp: infeasible") {
  MilpInstance inst;
  const VarId x = inst.add_variable({"x", VarKind::continuous, 0.0, 1.0});
  const VarId y = inst.add_variable({"y", VarKind::continuous, 0.0, 1.0});
  inst.add_constraint({"c", {{x, 1.0}, {y, 1.0}}, Sense::ge, 3.0});
  CHECK(solve_lp(inst).status == SolveStatus::infeasible);
}

TEST_CASE("solve_milp: pure LP matches solve_lp") {
  std::mt19937 rng(3);
  for (int t = 0; t < 20; ++t) {
    MilpInstance inst = oracle::random_milp(rng, 1, 20);
    for (std::size_t j = 0; j < inst.num_variables(); ++j) {
      if (inst.variables()[j].kind == VarKind::binary) {
        // Turn the one binary into a continuous variable.
        MilpInstance copy;
        for (std::size_t k = 0; k < inst.num_variables(); ++k) {
          VarDef d = inst.variables()[k];
          d.kind = VarKind::continuous;
          copy.add_variable(d);
        }
        for (const auto& c : inst.constraints()) copy.add_constraint(c);
        copy.set_objective(inst.objective());
        inst = std::move(copy);
        break;
      }
    }
    auto lp = solve_lp(inst);
    auto mip = solve_milp(inst);
    CHECK(lp.status == mip.status);
    if (lp.status == SolveStatus::optimal) CHECK(lp.objective == doctest::Approx(mip.objective).epsilon(1e-9));
  }
}

TEST_CASE("solve_milp: 2x2 assignment") {
  // costs (1,2;2,1): assigning aircraft i to flight i costs 1 each -> optimum 2.
  MilpInstance inst;
  VarId x[2][2];
  const double cost[2][2] = {{1, 2}, {2, 1}};
  std::vector<Term> obj;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      x[i][j] = inst.add_variable({"x_" + std::to_string(i) + "_" + std::to_string(j), VarKind::binary, 0, 1});
      obj.push_back({x[i][j], cost[i][j]});
    }
  }
  for (int i = 0; i < 2; ++i) {
    inst.add_constraint({"ac" + std::to_string(i), {{x[i][0], 1}, {x[i][1], 1}}, Sense::eq, 1});
    inst.add_constraint({"fl" + std::to_string(i), {{x[0][i], 1}, {x[1][i], 1}}, Sense::eq, 1});
  }
  inst.set_objective(obj);
  // Hand enumeration: identity = 1 + 1 = 2, swap = 2 + 2 = 4.
  auto sol = solve_milp(inst);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.objective == doctest::Approx(2.0));
  CHECK(sol.value(x[0][0]) == 1.0);
  CHECK(sol.value(x[1][1]) == 1.0);
}

TEST_CASE("solve_milp agrees with brute-force enumeration") {
  std::mt19937 rng(11);
  int feasible = 0;
  for (int t = 0; t < 40; ++t) {
    MilpInstance inst = oracle::random_milp(rng, 10, 15);
    const auto expect = oracle::brute_force_milp(inst);
    std::vector<double> bounds_trace;
    auto sol = solve_milp(inst, {}, std::nullopt, [&](double bb, double) { bounds_trace.push_back(bb); });
    if (!expect) {
      CHECK(sol.status == SolveStatus::infeasible);
      continue;
    }
    ++feasible;
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.objective == doctest::Approx(*expect).epsilon(1e-6));
    CHECK(evaluate(inst, sol.values).feasible());
    for (std::size_t k = 1; k < bounds_trace.size(); ++k) CHECK(bounds_trace[k] >= bounds_trace[k - 1] - 1e-9);
  }
  CHECK(feasible > 10);
}

TEST_CASE("solve_milp: incumbent objective never increases") {
  std::mt19937 rng(5);
  for (int t = 0; t < 10; ++t) {
    MilpInstance inst = oracle::random_milp(rng, 12, 10);
    std::vector<double> inc;
    solve_milp(inst, {}, std::nullopt, [&](double, double z) { inc.push_back(z); });
    for (std::size_t k = 1; k < inc.size(); ++k) CHECK(inc[k] <= inc[k - 1]);
  }
}

TEST_CASE("solve_milp: warm start and limits") {
  std::mt19937 rng(21);
  MilpInstance inst;
  do {
    inst = oracle::random_milp(rng, 12, 8);
  } while (!oracle::brute_force_milp(inst));
  auto ref = solve_milp(inst);
  REQUIRE(ref.status == SolveStatus::optimal);

  auto warm = solve_milp(inst, {}, ref.values);
  CHECK(warm.stats.warm_start_used);
  CHECK(warm.objective == doctest::Approx(ref.objective).epsilon(1e-9));

  SolveLimits tight;
  tight.max_nodes = 1;
  auto lim = solve_milp(inst, tight, ref.values);
  if (lim.status == SolveStatus::limit_reached) {
    CHECK(lim.values.size() == inst.num_variables());
  }
}

namespace {

std::filesystem::path write_script(const std::string& name, const std::string& body) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << "#!/bin/sh\n" << body;
  std::filesystem::permissions(p, std::filesystem::perms::owner_all);
  return p;
}

}  // namespace

TEST_CASE("solve_external: file exchange contract") {
  MilpInstance inst;
  const VarId x = inst.add_variable({"x", VarKind::continuous, 0.0, 10.0});
  const VarId b = inst.add_variable({"b", VarKind::binary, 0.0, 1.0});
  inst.add_constraint({"c", {{x, 1.0}, {b, 2.0}}, Sense::ge, 3.0});
  inst.set_objective({{x, 1.0}, {b, 1.5}});
  auto ref = solve_milp(inst);
  REQUIRE(ref.status == SolveStatus::optimal);
  CHECK(ref.objective == doctest::Approx(2.5));

  const auto known = std::filesystem::temp_directory_path() / "skygrid_known.sol";
  write_solution_file(inst, ref.values, known);

  SUBCASE("echo of a known-optimal file is accepted") {
    auto s = write_script("skygrid_echo.sh", "cp '" + known.string() + "' \"$2\"\n");
    auto sol = solve_external(inst, s.string());
    CHECK(sol.status == SolveStatus::optimal);
    CHECK(sol.objective == doctest::Approx(ref.objective));
  }
  SUBCASE("violating values are rejected") {
    auto s = write_script("skygrid_bad.sh", "printf 'x 0\\nb 0\\n' > \"$2\"\n");
    CHECK_THROWS_AS(solve_external(inst, s.string()), ExternalSolverError);
  }
  SUBCASE("exit code 2 means infeasible") {
    auto s = write_script("skygrid_inf.sh", "exit 2\n");
    CHECK(solve_external(inst, s.string()).status == SolveStatus::infeasible);
  }
  SUBCASE("other exit codes fail") {
    auto s = write_script("skygrid_fail.sh", "exit 7\n");
    CHECK_THROWS_AS(solve_external(inst, s.string()), ExternalSolverError);
  }
}
