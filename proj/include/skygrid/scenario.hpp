#pragma once

// Input data: airports, fleet, flight schedule, weather and controller
// parameters. Units: energy kWh, power kW, time in integer steps relative to
// the start of the simulated day (step length ControllerParams::dt_minutes).

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace skygrid {

struct AirportSpec {
  std::string id;
  double bess_capacity_min = 0.0;
  double bess_capacity_max = 0.0;
  double bess_initial = 0.0;
  double bess_power_max = 0.0;
  double pv_peak = 0.0;
  /// Cost per kW of grid import per step.
  double grid_weight = 1.0;

  friend bool operator==(const AirportSpec&, const AirportSpec&) = default;
};

struct AircraftSpec {
  std::string id;
  double batt_min = 0.0;
  double batt_max = 0.0;
  double reserve = 0.0;
  double charge_min = 0.0;
  double charge_max = 0.0;
  double terminal_min = 0.0;
  // Quasi-static flight model.
  double mass = 0.0;           // kg
  double wing_area = 0.0;      // m^2
  double cd_min = 0.0;
  double induced_k = 0.0;
  double powertrain_eff = 1.0;
  double cl_max = 1.8;              // takeoff configuration
  double takeoff_thrust = 0.0;      // N, constant over the ground roll
  std::string initial_airport;
  double initial_energy = 0.0;

  friend bool operator==(const AircraftSpec&, const AircraftSpec&) = default;
};

struct FlightSpec {
  std::string id;
  int sched_departure = 0;
  int est_flight_time = 1;  // steps
  std::string origin;
  std::string destination;
  double est_energy = 0.0;

  friend bool operator==(const FlightSpec&, const FlightSpec&) = default;
};

/// Realized solar power for one airport, one value per step starting at
/// `first_step` (negative steps are history before the simulated day).
struct WeatherSeries {
  int first_step = 0;
  std::vector<double> solar_kw;

  int end_step() const { return first_step + static_cast<int>(solar_kw.size()); }
  bool covers(int step) const { return step >= first_step && step < end_step(); }
  double at(int step) const;

  friend bool operator==(const WeatherSeries&, const WeatherSeries&) = default;
};

enum class ForecastMode { holt_winters, perfect };

struct ForecastParams {
  double alpha = 0.3;
  double beta = 0.05;
  double gamma = 0.4;
  /// Season length in steps; 0 means one day.
  int season_steps = 0;
  ForecastMode mode = ForecastMode::holt_winters;

  friend bool operator==(const ForecastParams&, const ForecastParams&) = default;
};

struct ControllerParams {
  double dt_minutes = 5.0;
  int horizon_steps = 24;
  int max_delay_steps = 2;
  double delay_weight = 50.0;
  double terminal_weight = 6.0;
  /// 0 means "max charge_max over the fleet".
  double big_m = 0.0;
  /// Penalty per kWh of reserve shortfall when the reserve is softened.
  double reserve_slack_penalty = 1e4;
  /// Wall-clock budget per MILP solve.
  double solve_time_limit = 60.0;
  ForecastParams forecast;

  double dt_hours() const { return dt_minutes / 60.0; }
  int season_length() const;

  friend bool operator==(const ControllerParams&, const ControllerParams&) = default;
};

struct Scenario {
  std::string name;
  /// ISO-8601 local time of step 0; only needed for timestamped weather files.
  std::string day_start;
  int duration_steps = 0;
  std::vector<AirportSpec> airports;
  std::vector<AircraftSpec> aircraft;
  std::vector<FlightSpec> flights;
  std::vector<WeatherSeries> weather;  // parallel to airports
  ControllerParams controller;

  /// Index of an airport id, or -1.
  int airport_index(const std::string& id) const;
  int aircraft_index(const std::string& id) const;
  int flight_index(const std::string& id) const;
  double big_m() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct Violation {
  std::string entity;
  std::string field;
  std::string message;

  std::string to_string() const { return entity + "." + field + ": " + message; }
};

/// One entry per violated invariant; empty iff the scenario is consistent.
std::vector<Violation> validate(const Scenario& s);

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Violation> v);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// Parses a scenario bundle without validating it. `path` is either the
/// bundle directory or its scenario.json.
Scenario parse_scenario(const std::filesystem::path& path);

/// parse_scenario + validate; throws ValidationError on any violation.
Scenario load_scenario(const std::filesystem::path& path);

/// Writes scenario.json and weather_<id>.csv (integer step index) into `dir`.
void write_scenario(const Scenario& s, const std::filesystem::path& dir);

/// Minutes between two ISO-8601 local timestamps "YYYY-MM-DDTHH:MM[:SS]".
std::optional<double> iso_minutes_between(const std::string& from, const std::string& to);

}  // namespace skygrid
