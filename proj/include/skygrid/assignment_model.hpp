#pragma once

// Aircraft assignment and charge scheduling MILP over a time-expanded graph,
// and decoding of its solutions into an executable fleet plan.
//
// Time indexing inside one horizon: offset n = 0..N-1 is the interval
// [t_now + n, t_now + n + 1). Energies are states at offsets 0..N; offset 0 is
// the measurement and is a constant, offsets 1..N are decision variables.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "skygrid/milp.hpp"
#include "skygrid/scenario.hpp"
#include "skygrid/timegraph.hpp"

namespace skygrid {

struct AircraftMeasurement {
  bool on_ground = true;
  /// On the ground: current airport. En route: destination airport.
  int airport = -1;
  /// En route: estimated arrival step.
  int eta = 0;
  /// Scenario flight index being flown (en route only).
  int flight = -1;
  /// Measured energy; only present while on the ground.
  std::optional<double> energy;
};

struct AirportMeasurement {
  double bess_energy = 0.0;
  double solar_kw = 0.0;
};

struct MeasurementSnapshot {
  int t_now = 0;
  std::vector<AircraftMeasurement> aircraft;
  std::vector<AirportMeasurement> airports;
};

/// Energy bookkeeping for aircraft whose battery is not measured in flight:
/// last measured value minus the estimated energy of flights launched since,
/// plus metered charging.
class EnergyEstimator {
 public:
  explicit EnergyEstimator(const Scenario& s);
  void measured(int aircraft, double energy);
  void departed(int aircraft, double est_energy);
  void charged(int aircraft, double kwh);
  double estimate(int aircraft) const { return estimate_.at(static_cast<std::size_t>(aircraft)); }

 private:
  std::vector<double> estimate_;
};

struct ProblemIndex {
  struct Aircraft {
    std::vector<VarId> x;       // per edge
    std::vector<VarId> charge;  // per ground edge
    std::vector<VarId> energy;  // offsets 1..N (index n-1)
    std::vector<VarId> reserve_slack;  // offsets 1..N, only when softened
    int source_node = -1;
    double initial_energy = 0.0;
  };
  struct Airport {
    std::vector<VarId> bess_power;   // offsets 0..N-1, positive = discharge
    std::vector<VarId> bess_energy;  // offsets 1..N
    std::vector<VarId> grid_power;   // offsets 0..N-1
    double initial_energy = 0.0;
  };
  std::vector<Aircraft> aircraft;
  std::vector<Airport> airports;
};

struct BuildOptions {
  /// Replaces the hard reserve rows by E + s >= E_res * membership with a
  /// penalized slack s >= 0.
  bool soft_reserve = false;
  /// Fixes x = 0 on edges whose tail is unreachable from the aircraft source.
  bool fix_unreachable = true;
};

struct Problem {
  MilpInstance instance;
  ProblemIndex index;
  TimeExpandedGraph graph;
  /// Per airport, per offset 0..N-1: solar power used in the balance rows.
  std::vector<std::vector<double>> forecast;
  double dt_hours = 0.0;
};

/// `energies` holds the energy used as the initial state of each aircraft
/// (measurement on the ground, estimate en route).
Problem build_problem(const TimeExpandedGraph& g, const MeasurementSnapshot& snap, const std::vector<double>& energies,
                      const std::vector<std::vector<double>>& forecast, const Scenario& s,
                      const BuildOptions& opts = {});

/// Source node of an aircraft: its airport now if on the ground, otherwise its
/// destination at the estimated arrival clipped into the horizon.
int source_node(const TimeExpandedGraph& g, const AircraftMeasurement& m);

struct AircraftPlan {
  std::string id;
  std::vector<int> path;       // edge ids from the source to z
  std::vector<double> charge;  // kW per offset 0..N-1
  std::vector<double> energy;  // kWh per offset 0..N
  std::vector<double> reserve_slack;  // per offset 1..N (empty unless softened)
  /// Airport index per offset 0..N, -1 while airborne or before the source.
  std::vector<int> location;
};

struct AirportPlan {
  std::string id;
  std::vector<double> bess_power;   // offsets 0..N-1
  std::vector<double> grid_power;   // offsets 0..N-1
  std::vector<double> apron_power;  // offsets 0..N-1
  std::vector<double> forecast;     // offsets 0..N-1
  std::vector<double> bess_energy;  // offsets 0..N
  /// Grid power minus its balance lower bound max(0, apron - solar - bess).
  std::vector<double> grid_slack;
};

struct FlightAssignment {
  std::string flight;
  int flight_index = -1;  // scenario flight index
  int aircraft = -1;
  int departure = 0;  // absolute step
  int delay = 0;
  int edge = -1;
};

struct FleetPlan {
  int t_now = 0;
  int horizon = 0;
  double objective = 0.0;
  std::vector<AircraftPlan> aircraft;
  std::vector<AirportPlan> airports;
  std::vector<FlightAssignment> assignments;

  const FlightAssignment* assignment_of(int flight_index) const;
};

class PlanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws PlanError naming the aircraft if its x values do not form a path.
FleetPlan decode_plan(const MilpSolution& sol, const Problem& p, const Scenario& s);

nlohmann::json to_json(const FleetPlan& plan, const Scenario& s);

/// Maps the previous plan's paths into `p`'s graph (same absolute steps,
/// continuing on the ground past the old horizon). Returns a full value
/// vector with binaries set, or nullopt if some path cannot be mapped.
std::optional<std::vector<double>> warm_start_from(const FleetPlan& previous, const TimeExpandedGraph& previous_graph,
                                                   const Problem& p);

}  // namespace skygrid
