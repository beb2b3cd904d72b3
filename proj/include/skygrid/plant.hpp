#pragma once

// Ground-truth network simulator: advances aircraft, BESS and solar one step
// at a time under committed controls and scripted disturbances.

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "skygrid/assignment_model.hpp"
#include "skygrid/scenario.hpp"

namespace skygrid {

struct DisturbanceEvent {
  enum class Type { flight_delay, energy_deviation, solar_scale };
  Type type = Type::flight_delay;
  std::string flight;
  std::string airport;
  int extra_steps = 0;
  double delta_kwh = 0.0;
  int from_step = 0;  // inclusive
  int to_step = 0;    // exclusive
  double factor = 1.0;
};

struct DisturbanceScript {
  std::vector<DisturbanceEvent> events;

  static DisturbanceScript load(const std::filesystem::path& path);
  /// Violations of the script invariants (unknown ids, negative factors).
  std::vector<std::string> check(const Scenario& s) const;

  int extra_delay(const std::string& flight) const;
  double energy_delta(const std::string& flight) const;
  double solar_factor(const std::string& airport, int step) const;
};

class PlantFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AircraftState {
  bool on_ground = true;
  /// On the ground: current airport; en route: destination.
  int airport = -1;
  double energy = 0.0;
  int flight = -1;
  int departure = -1;
  int arrival = -1;  // realized arrival step (includes scripted delay)
};

struct PlantState {
  int clock = 0;
  std::vector<AircraftState> aircraft;
  std::vector<double> bess;
  std::vector<int> departed_at;  // per flight, -1 if not yet departed
};

/// First-step controls committed by the controller.
struct Commands {
  std::vector<double> charge_kw;  // per aircraft
  std::vector<double> bess_kw;    // per airport, positive = discharge
  struct Departure {
    int flight = -1;
    int aircraft = -1;
  };
  std::vector<Departure> departures;
};

struct AircraftRecord {
  bool on_ground = true;
  int airport = -1;
  double energy_start = 0.0;
  double energy_end = 0.0;
  double charge_cmd_kw = 0.0;
  double charge_kw = 0.0;  // delivered
};

struct AirportRecord {
  double solar_kw = 0.0;
  double apron_kw = 0.0;
  double bess_cmd_kw = 0.0;
  double bess_kw = 0.0;
  double grid_kw = 0.0;
  double curtail_kw = 0.0;
  double bess_start = 0.0;
  double bess_end = 0.0;
};

struct DepartureRecord {
  int flight = -1;
  int aircraft = -1;
  int step = 0;
  int delay = 0;
  int origin = -1;
  int destination = -1;
};

struct ArrivalRecord {
  int flight = -1;
  int aircraft = -1;
  int step = 0;
  double energy_used = 0.0;
};

struct StepRecord {
  int step = 0;
  std::vector<AircraftRecord> aircraft;
  std::vector<AirportRecord> airports;
  std::vector<DepartureRecord> departures;
  std::vector<ArrivalRecord> arrivals;
};

class Plant {
 public:
  Plant(const Scenario& s, DisturbanceScript script);

  const PlantState& state() const { return state_; }
  const std::vector<StepRecord>& log() const { return log_; }
  const DisturbanceScript& script() const { return script_; }

  /// Realized solar power at an airport for a step, disturbances applied.
  double solar(int airport, int step) const;
  /// Snapshot at the current clock; aircraft energy only while on the ground,
  /// en-route aircraft report the nominal arrival (or the next step if late).
  MeasurementSnapshot measure() const;
  /// Applies one step of commands and advances the clock.
  const StepRecord& step(const Commands& c);

  /// Tidy CSV: entity,step,variable,value.
  void write_log_csv(std::ostream& out) const;

 private:
  [[noreturn]] void fault(const std::string& what) const;

  const Scenario& s_;
  DisturbanceScript script_;
  PlantState state_;
  std::vector<StepRecord> log_;
};

/// Tidy CSV of a trajectory log: entity,step,variable,value.
void write_trajectory_csv(const std::vector<StepRecord>& log, const Scenario& s, std::ostream& out);

}  // namespace skygrid
