#pragma once

// Small hand-built scenarios and snapshots shared by the model, plant and
// controller tests.

#include <random>
#include <string>
#include <vector>

#include "skygrid/assignment_model.hpp"
#include "skygrid/scenario.hpp"

namespace fixture {

inline skygrid::AirportSpec airport(const std::string& id, double cap_max = 0.0, double initial = 0.0,
                                    double power = 0.0) {
  skygrid::AirportSpec a;
  a.id = id;
  a.bess_capacity_min = 0.0;
  a.bess_capacity_max = cap_max;
  a.bess_initial = initial;
  a.bess_power_max = power;
  a.pv_peak = 1000.0;
  a.grid_weight = 1.0;
  return a;
}

inline skygrid::AircraftSpec aircraft(const std::string& id, const std::string& at, double energy) {
  skygrid::AircraftSpec a;
  a.id = id;
  a.initial_airport = at;
  a.initial_energy = energy;
  a.batt_min = 0.0;
  a.batt_max = 100.0;
  a.reserve = 0.0;
  a.charge_min = 0.0;
  a.charge_max = 60.0;
  a.terminal_min = 0.0;
  a.mass = 2000.0;
  a.wing_area = 15.0;
  a.cd_min = 0.03;
  a.induced_k = 0.05;
  a.powertrain_eff = 0.9;
  return a;
}

inline skygrid::FlightSpec flight(const std::string& id, int sd, int dur, const std::string& o,
                                  const std::string& d, double energy) {
  skygrid::FlightSpec f;
  f.id = id;
  f.sched_departure = sd;
  f.est_flight_time = dur;
  f.origin = o;
  f.destination = d;
  f.est_energy = energy;
  return f;
}

/// Scenario skeleton with a constant solar series per airport covering
/// [-2 days, duration + horizon).
inline skygrid::Scenario scenario(std::vector<skygrid::AirportSpec> airports,
                                  std::vector<skygrid::AircraftSpec> fleet, std::vector<skygrid::FlightSpec> flights,
                                  int N, int delta, double solar = 0.0, int duration = 48) {
  skygrid::Scenario s;
  s.name = "fixture";
  s.duration_steps = duration;
  s.controller.horizon_steps = N;
  s.controller.max_delay_steps = delta;
  s.controller.delay_weight = 100.0;
  s.controller.terminal_weight = 0.0;
  s.airports = std::move(airports);
  s.aircraft = std::move(fleet);
  s.flights = std::move(flights);
  const int history = 2 * s.controller.season_length();
  for (std::size_t h = 0; h < s.airports.size(); ++h) {
    skygrid::WeatherSeries w;
    w.first_step = -history;
    w.solar_kw.assign(static_cast<std::size_t>(history + duration + N), solar);
    s.weather.push_back(w);
  }
  return s;
}

/// Every aircraft parked at its initial airport with its initial energy.
inline skygrid::MeasurementSnapshot initial_snapshot(const skygrid::Scenario& s, int t) {
  skygrid::MeasurementSnapshot snap;
  snap.t_now = t;
  for (const auto& a : s.aircraft) {
    skygrid::AircraftMeasurement m;
    m.airport = s.airport_index(a.initial_airport);
    m.energy = a.initial_energy;
    snap.aircraft.push_back(m);
  }
  for (std::size_t h = 0; h < s.airports.size(); ++h) {
    snap.airports.push_back({s.airports[h].bess_initial, s.weather[h].at(t)});
  }
  return snap;
}

inline std::vector<double> initial_energies(const skygrid::Scenario& s) {
  std::vector<double> e;
  for (const auto& a : s.aircraft) e.push_back(a.initial_energy);
  return e;
}

/// The realized weather over the horizon.
inline std::vector<std::vector<double>> weather_forecast(const skygrid::Scenario& s, int t) {
  std::vector<std::vector<double>> out;
  for (const auto& w : s.weather) {
    std::vector<double> f;
    for (int n = 0; n < s.controller.horizon_steps; ++n) f.push_back(w.covers(t + n) ? w.at(t + n) : 0.0);
    out.push_back(f);
  }
  return out;
}

/// Random small network: 2-3 airports, 1-3 aircraft, 1-4 flights inside the
/// first horizon, random solar, BESS and weights. Not guaranteed feasible.
inline skygrid::Scenario random_scenario(std::mt19937& rng) {
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto pick = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };
  const int H = pick(2, 3);
  const int K = pick(1, 3);
  const int F = pick(1, 4);
  const int N = pick(8, 14);
  const int delta = pick(0, 2);
  const std::vector<std::string> names = {"A", "B", "C"};
  std::vector<skygrid::AirportSpec> airports;
  for (int h = 0; h < H; ++h) {
    auto a = airport(names[h], uni(50.0, 200.0), 0.0, uni(10.0, 80.0));
    a.bess_capacity_min = uni(0.0, 20.0);
    a.bess_initial = uni(a.bess_capacity_min, a.bess_capacity_max);
    a.grid_weight = uni(0.5, 2.0);
    airports.push_back(a);
  }
  std::vector<skygrid::AircraftSpec> fleet;
  for (int k = 0; k < K; ++k) {
    auto a = aircraft("K" + std::to_string(k), names[pick(0, H - 1)], uni(40.0, 100.0));
    a.batt_min = uni(0.0, 10.0);
    a.reserve = uni(0.0, 20.0);
    a.terminal_min = a.batt_min + uni(0.0, 25.0);
    a.charge_max = uni(20.0, 120.0);
    fleet.push_back(a);
  }
  std::vector<skygrid::FlightSpec> flights;
  for (int f = 0; f < F; ++f) {
    const int o = pick(0, H - 1);
    int d = pick(0, H - 2);
    if (d >= o) ++d;
    flights.push_back(flight("F" + std::to_string(f), pick(0, N - 2), pick(1, 4), names[o], names[d], uni(5.0, 40.0)));
  }
  auto s = scenario(airports, fleet, flights, N, delta, 0.0, 48);
  s.controller.dt_minutes = 15.0;
  s.controller.delay_weight = uni(1.0, 100.0);
  s.controller.terminal_weight = uni(0.0, 2.0);
  for (auto& w : s.weather) {
    for (auto& v : w.solar_kw) v = uni(0.0, 60.0);
  }
  return s;
}

}  // namespace fixture
