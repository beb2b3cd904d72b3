#include "skygrid/plant.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "skygrid/lp_format.hpp"

namespace skygrid {

namespace {

constexpr double kTol = 1e-7;

}  // namespace

DisturbanceScript DisturbanceScript::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ScenarioError("cannot open disturbance script '" + path.string() + "'");
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(path.filename().string() + ": " + e.what());
  }
  DisturbanceScript s;
  if (!j.contains("events") || !j["events"].is_array()) {
    throw ScenarioError(path.filename().string() + ": expected an \"events\" array");
  }
  for (std::size_t i = 0; i < j["events"].size(); ++i) {
    const auto& e = j["events"][i];
    const std::string ctx = path.filename().string() + ": events[" + std::to_string(i) + "]";
    try {
      DisturbanceEvent ev;
      const std::string type = e.at("type").get<std::string>();
      if (type == "flight_delay") {
        ev.type = DisturbanceEvent::Type::flight_delay;
        ev.flight = e.at("flight").get<std::string>();
        ev.extra_steps = e.at("extra_steps").get<int>();
      } else if (type == "energy_deviation") {
        ev.type = DisturbanceEvent::Type::energy_deviation;
        ev.flight = e.at("flight").get<std::string>();
        ev.delta_kwh = e.at("delta_kwh").get<double>();
      } else if (type == "solar_scale") {
        ev.type = DisturbanceEvent::Type::solar_scale;
        ev.airport = e.at("airport").get<std::string>();
        ev.from_step = e.at("from_step").get<int>();
        ev.to_step = e.at("to_step").get<int>();
        ev.factor = e.at("factor").get<double>();
      } else {
        throw ScenarioError(ctx + ": unknown event type '" + type + "'");
      }
      s.events.push_back(ev);
    } catch (const nlohmann::json::exception& ex) {
      throw ScenarioError(ctx + ": " + ex.what());
    }
  }
  return s;
}

std::vector<std::string> DisturbanceScript::check(const Scenario& s) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    const std::string ctx = "events[" + std::to_string(i) + "]";
    switch (e.type) {
      case DisturbanceEvent::Type::flight_delay:
        if (s.flight_index(e.flight) < 0) out.push_back(ctx + ".flight: unknown flight '" + e.flight + "'");
        if (e.extra_steps < 0) out.push_back(ctx + ".extra_steps: must be >= 0");
        break;
      case DisturbanceEvent::Type::energy_deviation:
        if (s.flight_index(e.flight) < 0) out.push_back(ctx + ".flight: unknown flight '" + e.flight + "'");
        break;
      case DisturbanceEvent::Type::solar_scale:
        if (s.airport_index(e.airport) < 0) out.push_back(ctx + ".airport: unknown airport '" + e.airport + "'");
        if (!(e.factor >= 0.0)) out.push_back(ctx + ".factor: must be >= 0");
        if (e.to_step < e.from_step) out.push_back(ctx + ".to_step: precedes from_step");
        break;
    }
  }
  return out;
}

int DisturbanceScript::extra_delay(const std::string& flight) const {
  int d = 0;
  for (const auto& e : events) {
    if (e.type == DisturbanceEvent::Type::flight_delay && e.flight == flight) d += e.extra_steps;
  }
  return d;
}

double DisturbanceScript::energy_delta(const std::string& flight) const {
  double d = 0.0;
  for (const auto& e : events) {
    if (e.type == DisturbanceEvent::Type::energy_deviation && e.flight == flight) d += e.delta_kwh;
  }
  return d;
}

double DisturbanceScript::solar_factor(const std::string& airport, int step) const {
  double f = 1.0;
  for (const auto& e : events) {
    if (e.type == DisturbanceEvent::Type::solar_scale && e.airport == airport && step >= e.from_step &&
        step < e.to_step) {
      f *= e.factor;
    }
  }
  return f;
}

Plant::Plant(const Scenario& s, DisturbanceScript script) : s_(s), script_(std::move(script)) {
  const auto problems = script_.check(s);
  if (!problems.empty()) {
    std::string msg = "invalid disturbance script:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ScenarioError(msg);
  }
  for (const auto& a : s.aircraft) {
    AircraftState st;
    st.airport = s.airport_index(a.initial_airport);
    st.energy = a.initial_energy;
    state_.aircraft.push_back(st);
  }
  for (const auto& h : s.airports) state_.bess.push_back(h.bess_initial);
  state_.departed_at.assign(s.flights.size(), -1);
}

double Plant::solar(int h, int step) const {
  return s_.weather.at(static_cast<std::size_t>(h)).at(step) * script_.solar_factor(s_.airports[h].id, step);
}

MeasurementSnapshot Plant::measure() const {
  MeasurementSnapshot snap;
  snap.t_now = state_.clock;
  for (const auto& a : state_.aircraft) {
    AircraftMeasurement m;
    m.on_ground = a.on_ground;
    m.airport = a.airport;
    if (a.on_ground) {
      m.energy = a.energy;
    } else {
      // The controller tracks the nominal arrival; a late aircraft is only
      // noticed when it has not landed by then.
      const int nominal = a.departure + s_.flights[a.flight].est_flight_time;
      m.eta = std::max(nominal, state_.clock + 1);
      m.flight = a.flight;
    }
    snap.aircraft.push_back(m);
  }
  for (std::size_t h = 0; h < state_.bess.size(); ++h) {
    snap.airports.push_back({state_.bess[h], solar(static_cast<int>(h), state_.clock)});
  }
  return snap;
}

void Plant::fault(const std::string& what) const {
  std::ostringstream os;
  os << "plant fault at step " << state_.clock << ": " << what << "\nstate:";
  for (std::size_t k = 0; k < state_.aircraft.size(); ++k) {
    const auto& a = state_.aircraft[k];
    os << "\n  " << s_.aircraft[k].id << (a.on_ground ? " ground@" : " enroute->") << s_.airports[a.airport].id
       << " E=" << a.energy;
  }
  for (std::size_t h = 0; h < state_.bess.size(); ++h) os << "\n  BESS " << s_.airports[h].id << " " << state_.bess[h];
  throw PlantFault(os.str());
}

const StepRecord& Plant::step(const Commands& c) {
  const int t = state_.clock;
  const int K = static_cast<int>(state_.aircraft.size());
  const int H = static_cast<int>(state_.bess.size());
  const double dt = s_.controller.dt_hours();
  if (static_cast<int>(c.charge_kw.size()) != K || static_cast<int>(c.bess_kw.size()) != H) {
    throw std::invalid_argument("commands do not match the scenario");
  }
  StepRecord rec;
  rec.step = t;
  rec.aircraft.resize(K);
  rec.airports.resize(H);
  for (int k = 0; k < K; ++k) rec.aircraft[k].energy_start = state_.aircraft[k].energy;

  // Departures.
  for (const auto& d : c.departures) {
    const FlightSpec& f = s_.flights.at(static_cast<std::size_t>(d.flight));
    AircraftState& a = state_.aircraft.at(static_cast<std::size_t>(d.aircraft));
    if (state_.departed_at[d.flight] >= 0) fault("flight " + f.id + " departs twice");
    if (!a.on_ground) fault("flight " + f.id + " assigned to airborne aircraft " + s_.aircraft[d.aircraft].id);
    if (a.airport != s_.airport_index(f.origin)) {
      fault("aircraft " + s_.aircraft[d.aircraft].id + " is not at " + f.origin + " for flight " + f.id);
    }
    if (t < f.sched_departure) fault("flight " + f.id + " departs before its schedule");
    a.on_ground = false;
    a.airport = s_.airport_index(f.destination);
    a.flight = d.flight;
    a.departure = t;
    a.arrival = t + f.est_flight_time + script_.extra_delay(f.id);
    state_.departed_at[d.flight] = t;
    rec.departures.push_back(
        {d.flight, d.aircraft, t, t - f.sched_departure, s_.airport_index(f.origin), s_.airport_index(f.destination)});
  }

  // Charging.
  std::vector<double> apron(H, 0.0);
  for (int k = 0; k < K; ++k) {
    AircraftState& a = state_.aircraft[k];
    const AircraftSpec& spec = s_.aircraft[k];
    const double cmd = c.charge_kw[k];
    rec.aircraft[k].charge_cmd_kw = cmd;
    if (cmd > kTol && !a.on_ground) fault("charging commanded for airborne aircraft " + spec.id);
    if (cmd < -kTol || cmd > spec.charge_max + kTol) fault("charging power out of range for " + spec.id);
    double p = std::clamp(cmd, 0.0, spec.charge_max);
    if (a.energy + p * dt > spec.batt_max) p = std::max(0.0, (spec.batt_max - a.energy) / dt);  // saturate
    a.energy += p * dt;
    rec.aircraft[k].charge_kw = p;
    if (a.on_ground) apron[a.airport] += p;
  }

  // Airport energy balance.
  for (int h = 0; h < H; ++h) {
    const AirportSpec& spec = s_.airports[h];
    AirportRecord& r = rec.airports[h];
    const double bess = state_.bess[h];
    r.bess_start = bess;
    r.solar_kw = solar(h, t);
    r.apron_kw = apron[h];
    r.bess_cmd_kw = c.bess_kw[h];
    if (std::abs(c.bess_kw[h]) > spec.bess_power_max + kTol) fault("BESS power at " + spec.id + " out of range");
    double pb = c.bess_kw[h];
    // Surplus solar is absorbed down to this (charging) power before curtailment.
    const double lo = std::max(-spec.bess_power_max, (bess - spec.bess_capacity_max) / dt);
    double deficit = r.apron_kw - r.solar_kw - pb;
    if (std::abs(deficit) < 1e-9) deficit = 0.0;  // rounding noise of an exact balance
    if (deficit >= 0.0) {
      r.grid_kw = deficit;
    } else {
      const double surplus = -deficit;
      const double absorb = std::clamp(pb - lo, 0.0, surplus);
      pb -= absorb;
      r.curtail_kw = surplus - absorb;
    }
    r.bess_kw = pb;
    state_.bess[h] = bess - pb * dt;
    r.bess_end = state_.bess[h];
    if (state_.bess[h] < spec.bess_capacity_min - kTol || state_.bess[h] > spec.bess_capacity_max + kTol) {
      fault("BESS at " + spec.id + " out of bounds");
    }
  }

  // Arrivals at the end of the step.
  for (int k = 0; k < K; ++k) {
    AircraftState& a = state_.aircraft[k];
    if (a.on_ground || a.arrival != t + 1) continue;
    const FlightSpec& f = s_.flights[a.flight];
    const double used = f.est_energy + script_.energy_delta(f.id);
    a.energy -= used;
    a.on_ground = true;
    rec.arrivals.push_back({a.flight, k, t + 1, used});
    if (a.energy < s_.aircraft[k].batt_min - kTol) {
      fault("aircraft " + s_.aircraft[k].id + " lands below its minimum energy after flight " + f.id);
    }
  }
  for (int k = 0; k < K; ++k) {
    rec.aircraft[k].on_ground = state_.aircraft[k].on_ground;
    rec.aircraft[k].airport = state_.aircraft[k].airport;
    rec.aircraft[k].energy_end = state_.aircraft[k].energy;
  }
  ++state_.clock;
  log_.push_back(std::move(rec));
  return log_.back();
}

void Plant::write_log_csv(std::ostream& out) const { write_trajectory_csv(log_, s_, out); }

void write_trajectory_csv(const std::vector<StepRecord>& log, const Scenario& s_, std::ostream& out) {
  out << "entity,step,variable,value\n";
  auto row = [&](const std::string& entity, int step, const char* var, double v) {
    out << entity << ',' << step << ',' << var << ',' << format_number(v) << '\n';
  };
  for (const auto& r : log) {
    for (std::size_t k = 0; k < r.aircraft.size(); ++k) {
      const auto& a = r.aircraft[k];
      const std::string& id = s_.aircraft[k].id;
      row(id, r.step, "energy_kwh", a.energy_start);
      row(id, r.step, "charge_kw", a.charge_kw);
      row(id, r.step, "charge_cmd_kw", a.charge_cmd_kw);
      row(id, r.step, "on_ground", a.on_ground ? 1.0 : 0.0);
      row(id, r.step, "airport", a.airport);
    }
    for (std::size_t h = 0; h < r.airports.size(); ++h) {
      const auto& a = r.airports[h];
      const std::string& id = s_.airports[h].id;
      row(id, r.step, "bess_energy_kwh", a.bess_start);
      row(id, r.step, "bess_power_kw", a.bess_kw);
      row(id, r.step, "bess_cmd_kw", a.bess_cmd_kw);
      row(id, r.step, "grid_power_kw", a.grid_kw);
      row(id, r.step, "apron_power_kw", a.apron_kw);
      row(id, r.step, "solar_kw", a.solar_kw);
      row(id, r.step, "curtailment_kw", a.curtail_kw);
    }
    for (const auto& d : r.departures) {
      row(s_.flights[d.flight].id, r.step, "departure_aircraft", d.aircraft);
      row(s_.flights[d.flight].id, r.step, "delay_steps", d.delay);
    }
    for (const auto& a : r.arrivals) row(s_.flights[a.flight].id, a.step, "arrival_energy_kwh", a.energy_used);
  }
}

}  // namespace skygrid
