#include "skygrid/controller.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <stdexcept>

#include "skygrid/branch_bound.hpp"
#include "skygrid/external_solver.hpp"
#include "skygrid/lp_format.hpp"

namespace skygrid {

namespace {

bool usable(const MilpSolution& sol) {
  return sol.status == SolveStatus::optimal || (sol.status == SolveStatus::limit_reached && !sol.values.empty());
}

}  // namespace

Controller::Controller(const Scenario& s, ControllerOptions opts)
    : s_(s), opts_(std::move(opts)), estimator_(s) {
  const int season = s.controller.season_length();
  for (std::size_t h = 0; h < s.airports.size(); ++h) {
    forecasters_.emplace_back(season, s.controller.forecast, s.airports[h].pv_peak);
    const WeatherSeries& w = s.weather[h];
    for (int step = w.first_step; step < 0; ++step) forecasters_.back().update(w.at(step));
  }
  observed_through_.assign(s.airports.size(), -1);
  departed_at_.assign(s.flights.size(), -1);
}

void Controller::observe(int h, int step, double value) {
  if (step <= observed_through_[h]) return;
  const WeatherSeries& w = s_.weather[h];
  for (int k = observed_through_[h] + 1; k < step; ++k) forecasters_[h].update(w.covers(k) ? w.at(k) : 0.0);
  forecasters_[h].update(value);
  observed_through_[h] = step;
}

std::vector<std::vector<double>> Controller::forecast(const MeasurementSnapshot& snap, bool* fallback) {
  const int N = s_.controller.horizon_steps;
  const ForecastMode mode = opts_.forecast_mode.value_or(s_.controller.forecast.mode);
  std::vector<std::vector<double>> out(s_.airports.size());
  bool fell_back = false;
  for (std::size_t h = 0; h < s_.airports.size(); ++h) {
    const double now = snap.airports.at(h).solar_kw;
    observe(static_cast<int>(h), snap.t_now, now);
    std::vector<double>& f = out[h];
    f.assign(static_cast<std::size_t>(N), now);
    if (mode == ForecastMode::perfect) {
      const WeatherSeries& w = s_.weather[h];
      for (int n = 1; n < N; ++n) f[n] = w.covers(snap.t_now + n) ? w.at(snap.t_now + n) : 0.0;
    } else if (forecasters_[h].ready()) {
      const auto p = forecasters_[h].predict(N - 1);
      std::copy(p.begin(), p.end(), f.begin() + 1);
    } else {
      fell_back = true;  // persistence
    }
  }
  if (fallback) *fallback = fell_back;
  return out;
}

Controller::Attempt Controller::solve(const TimeExpandedGraph& g, const MeasurementSnapshot& snap,
                                      const std::vector<double>& energies,
                                      const std::vector<std::vector<double>>& fc, const BuildOptions& bo,
                                      double& seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  Attempt a;
  a.problem = build_problem(g, snap, energies, fc, s_, bo);
  if (!opts_.external_solver.empty()) {
    a.solution = solve_external(a.problem->instance, opts_.external_solver);
  } else {
    SolveLimits limits;
    limits.time_seconds = s_.controller.solve_time_limit;
    std::optional<std::vector<double>> warm;
    if (opts_.warm_start && previous_ && previous_graph_) warm = warm_start_from(*previous_, *previous_graph_, *a.problem);
    a.solution = solve_milp(a.problem->instance, limits, warm);
  }
  seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return a;
}

Controller::Prepared Controller::prepare(const MeasurementSnapshot& snap) {
  const int t = snap.t_now;
  const int K = static_cast<int>(s_.aircraft.size());
  Prepared p;
  p.energies.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    const auto& m = snap.aircraft.at(static_cast<std::size_t>(k));
    if (m.on_ground) {
      if (!m.energy) throw std::invalid_argument("snapshot lacks the energy of a grounded aircraft");
      estimator_.measured(k, *m.energy);
    }
    p.energies[k] = estimator_.estimate(k);
  }

  for (std::size_t f = 0; f < s_.flights.size(); ++f) {
    if (departed_at_[f] >= 0) continue;
    const FlightSpec& fl = s_.flights[f];
    const int latest = fl.sched_departure + max_delay(static_cast<int>(f));
    if (latest < t) {
      throw ControlAbort("flight " + fl.id + " missed its departure window (latest step " + std::to_string(latest) +
                             ", now " + std::to_string(t) + ")",
                         fl.id, SolveStatus::infeasible);
    }
  }

  for (std::size_t f = 0; f < s_.flights.size(); ++f) {
    if (departed_at_[f] >= 0) p.graph_options.exclude.push_back(static_cast<int>(f));
  }
  p.graph_options.max_delay_override = overrides_;
  return p;
}

int Controller::max_delay(int flight) const {
  const auto it = overrides_.find(flight);
  return it == overrides_.end() ? s_.controller.max_delay_steps : it->second;
}

Problem Controller::nominal_problem(const MeasurementSnapshot& snap) {
  const Prepared p = prepare(snap);
  const auto fc = forecast(snap);
  return build_problem(build_graph(s_, snap.t_now, p.graph_options), snap, p.energies, fc, s_);
}

Iteration Controller::iterate(const MeasurementSnapshot& snap) {
  const int t = snap.t_now;
  const int K = static_cast<int>(s_.aircraft.size());
  const int delta = s_.controller.max_delay_steps;

  Prepared prep = prepare(snap);
  const std::vector<double>& energies = prep.energies;
  const GraphOptions& go = prep.graph_options;

  Iteration it;
  IterationDiagnostics& d = it.diag;
  d.t_now = t;
  const auto fc = forecast(snap, &d.forecast_fallback);

  TimeExpandedGraph g = build_graph(s_, t, go);
  d.in_horizon_flights = static_cast<int>(g.flights.size());
  BuildOptions bo;
  Attempt a = solve(g, snap, energies, fc, bo, d.solve_seconds);

  auto check_limit = [&](const Attempt& at) {
    if (at.solution.status == SolveStatus::limit_reached && at.solution.values.empty()) {
      throw ControlAbort("solver limit reached at step " + std::to_string(t) + " without a feasible plan", "",
                         SolveStatus::limit_reached);
    }
    if (at.solution.status == SolveStatus::error) {
      throw ControlAbort("solver error at step " + std::to_string(t), "", SolveStatus::error);
    }
  };
  check_limit(a);

  if (!usable(a.solution)) {
    d.ladder_step = 1;
    bo.soft_reserve = true;
    a = solve(g, snap, energies, fc, bo, d.solve_seconds);
    check_limit(a);
  }
  if (!usable(a.solution)) {
    d.ladder_step = 2;
    // Widen the window of one pending flight at a time, earliest first.
    std::vector<int> pending;
    for (const auto& gf : g.flights) {
      if (!overrides_.count(gf.source_index)) pending.push_back(gf.source_index);
    }
    std::stable_sort(pending.begin(), pending.end(), [&](int x, int y) {
      return s_.flights[x].sched_departure < s_.flights[y].sched_departure;
    });
    for (int f : pending) {
      GraphOptions wide = go;
      wide.max_delay_override[f] = 2 * delta;
      TimeExpandedGraph g2 = build_graph(s_, t, wide);
      Attempt a2 = solve(g2, snap, energies, fc, bo, d.solve_seconds);
      check_limit(a2);
      if (usable(a2.solution)) {
        overrides_[f] = 2 * delta;
        d.widened.push_back(s_.flights[f].id);
        g = std::move(g2);
        a = std::move(a2);
        break;
      }
    }
    if (!usable(a.solution)) {
      // Name the flight whose removal restores feasibility, if any.
      std::string culprit;
      for (int f : pending) {
        GraphOptions without = go;
        without.exclude.push_back(f);
        Attempt a3 = solve(build_graph(s_, t, without), snap, energies, fc, bo, d.solve_seconds);
        if (usable(a3.solution)) {
          culprit = s_.flights[f].id;
          break;
        }
      }
      if (culprit.empty() && !pending.empty()) culprit = s_.flights[pending.front()].id;
      throw ControlAbort("infeasible at step " + std::to_string(t) + " after the recovery ladder" +
                             (culprit.empty() ? std::string() : "; blocking flight " + culprit),
                         culprit, SolveStatus::infeasible);
    }
  }

  d.status = a.solution.status;
  d.objective = a.solution.objective;
  d.stats = a.solution.stats;
  it.plan = decode_plan(a.solution, *a.problem, s_);

  if (previous_) {
    for (const auto& asg : it.plan.assignments) {
      const FlightAssignment* before = previous_->assignment_of(asg.flight_index);
      if (!before) continue;
      if (before->aircraft != asg.aircraft) d.reassigned.push_back(asg.flight);
      if (before->departure != asg.departure) d.retimed.push_back(asg.flight);
    }
  }

  // First-step commitments.
  const double dt = s_.controller.dt_hours();
  Commands& c = it.commands;
  c.charge_kw.assign(static_cast<std::size_t>(K), 0.0);
  for (int k = 0; k < K; ++k) {
    const double p = it.plan.aircraft[k].charge.at(0);
    if (p > 1e-6 && !snap.aircraft[k].on_ground) {
      throw std::logic_error("plan charges airborne aircraft " + s_.aircraft[k].id);
    }
    c.charge_kw[k] = snap.aircraft[k].on_ground ? std::clamp(p, 0.0, s_.aircraft[k].charge_max) : 0.0;
    estimator_.charged(k, c.charge_kw[k] * dt);
  }
  for (std::size_t h = 0; h < s_.airports.size(); ++h) {
    const double pmax = s_.airports[h].bess_power_max;
    c.bess_kw.push_back(std::clamp(it.plan.airports[h].bess_power.at(0), -pmax, pmax));
  }
  for (const auto& asg : it.plan.assignments) {
    if (asg.departure != t) continue;
    if (asg.delay < 0 || asg.delay > max_delay(asg.flight_index)) {
      throw std::logic_error("plan departs flight " + asg.flight + " outside its delay window");
    }
    c.departures.push_back({asg.flight_index, asg.aircraft});
    departed_at_[asg.flight_index] = t;
    estimator_.departed(asg.aircraft, s_.flights[asg.flight_index].est_energy);
  }

  if (!opts_.artifact_dir.empty()) {
    std::filesystem::create_directories(opts_.artifact_dir);
    const std::string tag = std::to_string(t);
    std::ofstream pj(opts_.artifact_dir / ("plan_" + tag + ".json"));
    nlohmann::json j = to_json(it.plan, s_);
    j["ladder_step"] = d.ladder_step;
    j["status"] = to_string(d.status);
    pj << j.dump(2) << '\n';
    if (!pj) throw IoError("cannot write plan artifact for step " + tag);
    if (opts_.dump_lp) write_lp_file(a.problem->instance, opts_.artifact_dir / ("instance_" + tag + ".lp"));
  }

  it.graph = g;
  it.forecast = fc;
  it.initial_energy = energies;
  previous_ = it.plan;
  previous_graph_ = std::move(g);
  return it;
}

ClosedLoopResult run_closed_loop(const Scenario& s, const DisturbanceScript& script, int duration,
                                 const ControllerOptions& opts, const IterationHook& hook) {
  Plant plant(s, script);
  Controller ctl(s, opts);
  ClosedLoopResult r;
  for (int step = 0; step < duration; ++step) {
    const MeasurementSnapshot snap = plant.measure();
    Iteration it;
    try {
      it = ctl.iterate(snap);
    } catch (const ControlAbort& e) {
      r.abort_reason = e.what();
      r.abort_flight = e.flight();
      r.abort_status = e.status();
      break;
    }
    if (hook) hook(snap, it);
    plant.step(it.commands);
    r.steps = step + 1;
    r.reassignments += static_cast<int>(it.diag.reassigned.size());
    if (it.diag.ladder_step > 0) ++r.ladder_activations;
    r.objective_trace.push_back(it.diag.objective);
    r.diagnostics.push_back(it.diag);
    r.plans.push_back(std::move(it.plan));
  }
  r.completed = r.abort_reason.empty();
  r.log = plant.log();
  r.final_state = plant.state();
  r.delay_overrides = ctl.delay_overrides();

  const double dt = s.controller.dt_hours();
  r.grid_kwh.assign(s.airports.size(), 0.0);
  for (const auto& rec : r.log) {
    for (std::size_t h = 0; h < rec.airports.size(); ++h) r.grid_kwh[h] += rec.airports[h].grid_kw * dt;
    for (const auto& dep : rec.departures) {
      ++r.flights_departed;
      r.total_delay_steps += dep.delay;
      if (dep.delay > 0) ++r.delayed_departures;
    }
  }
  for (const auto& dg : r.diagnostics) {
    ++r.solve_time.count;
    r.solve_time.total += dg.solve_seconds;
    r.solve_time.max = std::max(r.solve_time.max, dg.solve_seconds);
  }
  if (r.solve_time.count > 0) r.solve_time.mean = r.solve_time.total / r.solve_time.count;
  return r;
}

nlohmann::json summary_json(const ClosedLoopResult& r, const Scenario& s) {
  nlohmann::json j;
  j["scenario"] = s.name;
  j["steps"] = r.steps;
  j["completed"] = r.completed;
  if (!r.completed) j["abort"] = {{"reason", r.abort_reason}, {"flight", r.abort_flight}};
  nlohmann::json grid = nlohmann::json::object();
  for (std::size_t h = 0; h < s.airports.size(); ++h) grid[s.airports[h].id] = r.grid_kwh[h];
  j["grid_kwh_per_airport"] = grid;
  j["total_delay_steps"] = r.total_delay_steps;
  j["delayed_departures"] = r.delayed_departures;
  j["reassignments"] = r.reassignments;
  j["flights_departed"] = r.flights_departed;
  j["flights_scheduled"] = s.flights.size();
  j["ladder_activations"] = r.ladder_activations;
  nlohmann::json widened = nlohmann::json::object();
  for (const auto& [f, m] : r.delay_overrides) widened[s.flights[f].id] = m;
  j["widened_delay_windows"] = widened;
  j["solve_time_stats"] = {{"count", r.solve_time.count},
                           {"total_s", r.solve_time.total},
                           {"mean_s", r.solve_time.mean},
                           {"max_s", r.solve_time.max}};
  j["objective_trace"] = r.objective_trace;
  return j;
}

}  // namespace skygrid
