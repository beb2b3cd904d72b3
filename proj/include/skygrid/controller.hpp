#pragma once

// Receding-horizon loop: measure, forecast, build and solve the assignment
// problem, commit the first-step inputs, repeat.

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "skygrid/assignment_model.hpp"
#include "skygrid/forecast.hpp"
#include "skygrid/milp.hpp"
#include "skygrid/plant.hpp"
#include "skygrid/scenario.hpp"
#include "skygrid/timegraph.hpp"

namespace skygrid {

struct ControllerOptions {
  /// Empty: built-in branch and bound. Otherwise an external solver command.
  std::string external_solver;
  /// Per-iteration plan_<t>.json (and instance_<t>.lp with dump_lp) go here;
  /// empty disables artifacts.
  std::filesystem::path artifact_dir;
  bool dump_lp = false;
  bool warm_start = true;
  /// Overrides the scenario's forecast mode when set.
  std::optional<ForecastMode> forecast_mode;
};

/// Controlled stop: the problem stayed infeasible through the recovery
/// ladder, a flight missed its window, or the solver hit its limit without a
/// feasible plan.
class ControlAbort : public std::runtime_error {
 public:
  ControlAbort(const std::string& what, std::string flight, SolveStatus status)
      : std::runtime_error(what), flight_(std::move(flight)), status_(status) {}
  const std::string& flight() const { return flight_; }
  SolveStatus status() const { return status_; }

 private:
  std::string flight_;
  SolveStatus status_;
};

struct IterationDiagnostics {
  int t_now = 0;
  /// 0 = nominal, 1 = reserve softened, 2 = delay window widened as well.
  int ladder_step = 0;
  SolveStatus status = SolveStatus::error;
  double objective = 0.0;
  SolverStats stats;
  double solve_seconds = 0.0;  // all solves of this iteration
  int in_horizon_flights = 0;
  bool forecast_fallback = false;
  /// Flights whose aircraft / departure step differ from the previous plan.
  std::vector<std::string> reassigned;
  std::vector<std::string> retimed;
  std::vector<std::string> widened;
};

struct Iteration {
  Commands commands;
  FleetPlan plan;
  IterationDiagnostics diag;
  /// Inputs of the accepted solve, for a-posteriori checks.
  TimeExpandedGraph graph;
  std::vector<std::vector<double>> forecast;
  std::vector<double> initial_energy;
};

class Controller {
 public:
  explicit Controller(const Scenario& s, ControllerOptions opts = {});

  /// One MPC step at snap.t_now. Steps must be non-decreasing.
  Iteration iterate(const MeasurementSnapshot& snap);

  /// Solar forecast used for the horizon starting at snap.t_now (offset 0 is
  /// the measurement). Feeds the forecasters up to t_now.
  std::vector<std::vector<double>> forecast(const MeasurementSnapshot& snap, bool* fallback = nullptr);

  /// The nominal (step-0 ladder) problem iterate() would solve first, built
  /// without solving or committing anything.
  Problem nominal_problem(const MeasurementSnapshot& snap);

  const std::vector<int>& departed_at() const { return departed_at_; }
  const std::map<int, int>& delay_overrides() const { return overrides_; }
  const Scenario& scenario() const { return s_; }

 private:
  struct Prepared {
    std::vector<double> energies;
    GraphOptions graph_options;
  };
  /// Updates the energy estimates, checks departure windows and collects the
  /// graph options for this step.
  Prepared prepare(const MeasurementSnapshot& snap);
  int max_delay(int flight) const;

  struct Attempt {
    std::optional<Problem> problem;
    MilpSolution solution;
  };
  Attempt solve(const TimeExpandedGraph& g, const MeasurementSnapshot& snap, const std::vector<double>& energies,
                const std::vector<std::vector<double>>& fc, const BuildOptions& bo, double& seconds);
  void observe(int airport, int step, double value);

  const Scenario& s_;
  ControllerOptions opts_;
  std::vector<HoltWinters> forecasters_;
  std::vector<int> observed_through_;  // last step fed per airport
  EnergyEstimator estimator_;
  std::vector<int> departed_at_;
  std::map<int, int> overrides_;
  std::optional<FleetPlan> previous_;
  std::optional<TimeExpandedGraph> previous_graph_;
};

struct SolveTimeStats {
  int count = 0;
  double total = 0.0;
  double mean = 0.0;
  double max = 0.0;
};

struct ClosedLoopResult {
  bool completed = false;
  std::string abort_reason;
  std::string abort_flight;
  SolveStatus abort_status = SolveStatus::optimal;
  int steps = 0;
  std::vector<double> grid_kwh;  // per airport
  int total_delay_steps = 0;
  int delayed_departures = 0;
  int reassignments = 0;
  int flights_departed = 0;
  int ladder_activations = 0;
  SolveTimeStats solve_time;
  std::vector<double> objective_trace;
  std::vector<IterationDiagnostics> diagnostics;
  std::vector<FleetPlan> plans;
  std::vector<StepRecord> log;
  PlantState final_state;
  std::map<int, int> delay_overrides;
};

/// Observer called after every accepted iteration with the snapshot it used.
using IterationHook = std::function<void(const MeasurementSnapshot&, const Iteration&)>;

/// Runs `duration` steps from step 0. Control aborts are reported in the
/// result; plant faults propagate.
ClosedLoopResult run_closed_loop(const Scenario& s, const DisturbanceScript& script, int duration,
                                 const ControllerOptions& opts = {}, const IterationHook& hook = {});

nlohmann::json summary_json(const ClosedLoopResult& r, const Scenario& s);

}  // namespace skygrid
