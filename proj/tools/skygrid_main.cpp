// skygrid: command-line entry point for closed-loop runs, single solves and
// the debug exports.
//
// Exit codes: 0 ok, 1 usage (or an internal error), 2 validation, 3
// infeasible, 4 solver limit, 5 I/O.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "skygrid/controller.hpp"
#include "skygrid/external_solver.hpp"
#include "skygrid/flightsim.hpp"
#include "skygrid/forecast.hpp"
#include "skygrid/lp_format.hpp"
#include "skygrid/plant.hpp"
#include "skygrid/scenario.hpp"
#include "skygrid/timegraph.hpp"

namespace fs = std::filesystem;
using namespace skygrid;

namespace {

enum Exit { kOk = 0, kUsage = 1, kValidation = 2, kInfeasible = 3, kLimit = 4, kIo = 5 };

/// Carries an exit code through the subcommand handlers.
struct CliFailure {
  int code;
  std::string message;
};

int exit_code(SolveStatus s) { return s == SolveStatus::limit_reached ? kLimit : kInfeasible; }

ControllerOptions solver_options(const std::string& solver) {
  ControllerOptions o;
  if (solver == "builtin") return o;
  const std::string prefix = "external:";
  if (solver.rfind(prefix, 0) == 0 && solver.size() > prefix.size()) {
    o.external_solver = solver.substr(prefix.size());
    o.warm_start = false;
    return o;
  }
  throw CliFailure{kUsage, "--solver must be 'builtin' or 'external:<command>', got '" + solver + "'"};
}

std::optional<ForecastMode> forecast_mode(const std::string& mode) {
  if (mode.empty()) return std::nullopt;
  if (mode == "holt-winters") return ForecastMode::holt_winters;
  if (mode == "perfect") return ForecastMode::perfect;
  throw CliFailure{kUsage, "--forecast must be 'holt-winters' or 'perfect', got '" + mode + "'"};
}

Scenario scenario_from(const std::string& path) {
  if (!fs::exists(path)) throw CliFailure{kIo, "scenario '" + path + "' not found"};
  return load_scenario(path);
}

DisturbanceScript load_script(const std::string& path, const Scenario& s) {
  if (path.empty()) return {};
  if (!fs::exists(path)) throw CliFailure{kIo, "disturbance script '" + path + "' not found"};
  auto script = DisturbanceScript::load(path);
  const auto problems = script.check(s);
  if (!problems.empty()) {
    std::string msg = "disturbance script '" + path + "' does not fit the scenario:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw CliFailure{kValidation, msg};
  }
  return script;
}

void check_step(const Scenario& s, int t) {
  if (t < 0 || t > s.duration_steps) {
    throw CliFailure{kValidation, "--at-step must lie in [0, " + std::to_string(s.duration_steps) + "], got " +
                                      std::to_string(t)};
  }
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw CliFailure{kIo, "cannot open '" + path.string() + "' for writing"};
  return out;
}

/// The plant and controller after executing steps 0..t-1 in closed loop, so
/// that single-step commands see the state the loop would see at step t.
struct Replay {
  Plant plant;
  Controller controller;

  Replay(const Scenario& s, const DisturbanceScript& script, const ControllerOptions& opts, int t)
      : plant(s, script), controller(s, opts) {
    for (int step = 0; step < t; ++step) {
      try {
        plant.step(controller.iterate(plant.measure()).commands);
      } catch (const ControlAbort& e) {
        throw CliFailure{exit_code(e.status()), "replay to step " + std::to_string(t) + " aborted: " + e.what()};
      }
    }
  }
};

GraphOptions graph_options(const Controller& c) {
  GraphOptions go;
  for (std::size_t f = 0; f < c.departed_at().size(); ++f) {
    if (c.departed_at()[f] >= 0) go.exclude.push_back(static_cast<int>(f));
  }
  go.max_delay_override = c.delay_overrides();
  return go;
}

void write_iterations_csv(const ClosedLoopResult& r, std::ostream& out) {
  out << "step,ladder_step,status,objective,solve_s,nodes,lp_iterations,in_horizon_flights,forecast_fallback,"
         "reassigned,retimed,widened\n";
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ";") + x;
    return s;
  };
  for (const auto& d : r.diagnostics) {
    out << d.t_now << ',' << d.ladder_step << ',' << to_string(d.status) << ',' << format_number(d.objective) << ','
        << format_number(d.solve_seconds) << ',' << d.stats.nodes << ',' << d.stats.lp_iterations << ','
        << d.in_horizon_flights << ',' << (d.forecast_fallback ? 1 : 0) << ',' << join(d.reassigned) << ','
        << join(d.retimed) << ',' << join(d.widened) << '\n';
  }
}

void print_plan(const FleetPlan& plan, const IterationDiagnostics& d, const Scenario& s, std::ostream& out) {
  out << "plan at step " << plan.t_now << " (horizon " << plan.horizon << ")\n";
  out << "  status " << to_string(d.status) << ", ladder step " << d.ladder_step << ", objective "
      << format_number(plan.objective) << ", solve " << std::fixed << std::setprecision(3) << d.solve_seconds
      << " s\n";
  out.unsetf(std::ios::floatfield);
  out << "  assignments: " << plan.assignments.size() << '\n';
  for (const auto& a : plan.assignments) {
    out << "    " << a.flight << " -> " << s.aircraft[a.aircraft].id << " departs step " << a.departure
        << " (delay " << a.delay << ")\n";
  }
  const double dt = s.controller.dt_hours();
  for (const auto& ap : plan.airports) {
    double grid = 0.0;
    double apron = 0.0;
    for (double g : ap.grid_power) grid += g * dt;
    for (double p : ap.apron_power) apron += p * dt;
    out << "  " << ap.id << ": grid " << format_number(grid) << " kWh, apron " << format_number(apron)
        << " kWh, BESS " << format_number(ap.bess_energy.front()) << " -> " << format_number(ap.bess_energy.back())
        << " kWh\n";
  }
}

// ---------------------------------------------------------------------------
// Subcommands

struct SimulateArgs {
  std::string scenario, script, out, solver = "builtin", forecast;
  int duration = -1;
  bool dump_lp = false;
  bool no_warm_start = false;
};

int cmd_simulate(const SimulateArgs& a) {
  const Scenario s = scenario_from(a.scenario);
  const auto script = load_script(a.script, s);
  auto opts = solver_options(a.solver);
  opts.forecast_mode = forecast_mode(a.forecast);
  if (a.no_warm_start) opts.warm_start = false;
  opts.dump_lp = a.dump_lp;
  const fs::path out = a.out;
  opts.artifact_dir = out / "iterations";
  const int duration = a.duration < 0 ? s.duration_steps : a.duration;
  if (duration > s.duration_steps) {
    throw CliFailure{kValidation, "--duration-steps exceeds the scenario's " + std::to_string(s.duration_steps)};
  }
  fs::create_directories(out);

  const auto r = run_closed_loop(s, script, duration, opts);
  {
    auto f = open_out(out / "trajectory.csv");
    write_trajectory_csv(r.log, s, f);
  }
  {
    auto f = open_out(out / "iterations.csv");
    write_iterations_csv(r, f);
  }
  const auto summary = summary_json(r, s);
  {
    auto f = open_out(out / "summary.json");
    f << summary.dump(2) << '\n';
    if (!f) throw CliFailure{kIo, "cannot write summary.json"};
  }

  std::cout << s.name << ": " << r.steps << "/" << duration << " steps, " << r.flights_departed << "/"
            << s.flights.size() << " flights, " << r.total_delay_steps << " delay steps, " << r.reassignments
            << " reassignments, max solve " << format_number(r.solve_time.max) << " s\n";
  std::cout << "outputs in " << out.string() << '\n';
  if (!r.completed) {
    std::cerr << "run aborted: " << r.abort_reason << '\n';
    return exit_code(r.abort_status);
  }
  return kOk;
}

struct PlanArgs {
  std::string scenario, script, out, solver = "builtin", forecast;
  int at = 0;
};

int cmd_plan(const PlanArgs& a) {
  const Scenario s = scenario_from(a.scenario);
  check_step(s, a.at);
  const auto script = load_script(a.script, s);
  auto opts = solver_options(a.solver);
  opts.forecast_mode = forecast_mode(a.forecast);
  Replay replay(s, script, opts, a.at);
  Iteration it;
  try {
    it = replay.controller.iterate(replay.plant.measure());
  } catch (const ControlAbort& e) {
    throw CliFailure{exit_code(e.status()), e.what()};
  }
  print_plan(it.plan, it.diag, s, std::cout);
  const fs::path path = a.out.empty() ? fs::path("plan_" + std::to_string(a.at) + ".json") : fs::path(a.out);
  auto f = open_out(path);
  auto j = to_json(it.plan, s);
  j["ladder_step"] = it.diag.ladder_step;
  j["status"] = to_string(it.diag.status);
  f << j.dump(2) << '\n';
  if (!f) throw CliFailure{kIo, "cannot write '" + path.string() + "'"};
  std::cout << "plan written to " << path.string() << '\n';
  return kOk;
}

struct FlightEnergyArgs {
  std::string profile, aircraft, scenario;
  bool no_takeoff = false;
};

int cmd_flight_energy(const FlightEnergyArgs& a) {
  const Scenario s = scenario_from(a.scenario);
  const int k = s.aircraft_index(a.aircraft);
  if (k < 0) throw CliFailure{kValidation, "unknown aircraft '" + a.aircraft + "'"};
  if (!fs::exists(a.profile)) throw CliFailure{kIo, "profile '" + a.profile + "' not found"};
  const auto profile = FlightProfile::read_csv(a.profile);
  FlightEnergyOptions fo;
  fo.include_takeoff = !a.no_takeoff;
  const auto e = flight_energy(profile, s.aircraft[k], fo);
  std::cout << "aircraft " << a.aircraft << ", profile " << a.profile << " ("
            << format_number(profile.samples.back().t - profile.samples.front().t) << " s)\n";
  std::cout << std::fixed << std::setprecision(3);
  std::cout << "  E_f      " << e.total_kwh << " kWh\n";
  std::cout << "  takeoff  " << e.takeoff_kwh << " kWh\n";
  std::cout << "  climb    " << e.climb_kwh << " kWh\n";
  std::cout << "  cruise   " << e.cruise_kwh << " kWh\n";
  std::cout << "  descent  " << e.descent_kwh << " kWh\n";
  return kOk;
}

struct ForecastArgs {
  std::string scenario, airport, mode;
  int at = 0;
  int horizon = 0;
};

int cmd_forecast(const ForecastArgs& a) {
  Scenario s = scenario_from(a.scenario);
  check_step(s, a.at);
  const int h = s.airport_index(a.airport);
  if (h < 0) throw CliFailure{kValidation, "unknown airport '" + a.airport + "'"};
  if (a.horizon < 1) throw CliFailure{kValidation, "--horizon must be positive"};
  const WeatherSeries& w = s.weather[h];
  if (!w.covers(a.at)) throw CliFailure{kValidation, "weather does not cover step " + std::to_string(a.at)};
  s.controller.horizon_steps = a.horizon;
  ControllerOptions opts;
  opts.forecast_mode = forecast_mode(a.mode);
  Controller ctl(s, opts);

  MeasurementSnapshot snap;
  snap.t_now = a.at;
  for (std::size_t i = 0; i < s.airports.size(); ++i) {
    snap.airports.push_back({s.airports[i].bess_initial, s.weather[i].covers(a.at) ? s.weather[i].at(a.at) : 0.0});
  }
  bool fallback = false;
  const auto fc = ctl.forecast(snap, &fallback);
  if (fallback) std::cerr << "note: fewer than two seasons of history; persistence forecast\n";
  std::cout << "step,forecast_kw,actual_kw\n";
  for (int n = 0; n < a.horizon; ++n) {
    const int step = a.at + n;
    std::cout << step << ',' << format_number(fc[h][n]) << ',';
    if (w.covers(step)) std::cout << format_number(w.at(step));
    std::cout << '\n';
  }
  return kOk;
}

struct StepFileArgs {
  std::string scenario, script, out;
  int at = 0;
};

int cmd_export_lp(const StepFileArgs& a) {
  const Scenario s = scenario_from(a.scenario);
  check_step(s, a.at);
  const auto script = load_script(a.script, s);
  Replay replay(s, script, {}, a.at);
  Problem p;
  try {
    p = replay.controller.nominal_problem(replay.plant.measure());
  } catch (const ControlAbort& e) {
    throw CliFailure{exit_code(e.status()), e.what()};
  }
  auto f = open_out(a.out);
  write_lp(p.instance, f);
  if (!f) throw CliFailure{kIo, "cannot write '" + a.out + "'"};
  std::cout << "step " << a.at << ": " << p.instance.num_variables() << " variables ("
            << p.instance.num_binaries() << " binary), " << p.instance.num_constraints() << " constraints -> "
            << a.out << '\n';
  return kOk;
}

int cmd_graph(const StepFileArgs& a) {
  const Scenario s = scenario_from(a.scenario);
  check_step(s, a.at);
  const auto script = load_script(a.script, s);
  Replay replay(s, script, {}, a.at);
  const auto g = build_graph(s, a.at, graph_options(replay.controller));
  auto f = open_out(a.out);
  write_dot(g, f);
  if (!f) throw CliFailure{kIo, "cannot write '" + a.out + "'"};
  std::cout << "step " << a.at << ": " << g.num_nodes() << " nodes, " << g.num_edges() << " edges, "
            << g.flights.size() << " flights in horizon -> " << a.out << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fleet assignment and charge scheduling for electric regional aircraft"};
  app.require_subcommand(1);
  std::optional<long> seed;
  app.add_option("--seed", seed, "Reserved; every command is deterministic");

  std::function<int()> run;

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Closed-loop run over the scenario day");
  c_sim->add_option("--scenario", sim.scenario, "Scenario directory")->required();
  c_sim->add_option("--script", sim.script, "Disturbance script (JSON)")->required();
  c_sim->add_option("--out", sim.out, "Output directory")->required();
  c_sim->add_option("--duration-steps", sim.duration, "Steps to simulate (default: the whole day)");
  c_sim->add_option("--solver", sim.solver, "builtin | external:<command>");
  c_sim->add_option("--forecast", sim.forecast, "holt-winters | perfect (default: scenario setting)");
  c_sim->add_flag("--dump-lp", sim.dump_lp, "Write instance_<t>.lp next to every plan");
  c_sim->add_flag("--no-warm-start", sim.no_warm_start, "Do not seed the solver with the previous plan");
  c_sim->callback([&] { run = [&] { return cmd_simulate(sim); }; });

  PlanArgs plan;
  auto* c_plan = app.add_subcommand("plan", "Single solve at a step (after a nominal replay up to it)");
  c_plan->add_option("--scenario", plan.scenario, "Scenario directory")->required();
  c_plan->add_option("--at-step", plan.at, "Step of the solve")->required();
  c_plan->add_option("--script", plan.script, "Disturbance script applied during the replay");
  c_plan->add_option("--out", plan.out, "Plan JSON path (default plan_<t>.json)");
  c_plan->add_option("--solver", plan.solver, "builtin | external:<command>");
  c_plan->add_option("--forecast", plan.forecast, "holt-winters | perfect");
  c_plan->callback([&] { run = [&] { return cmd_plan(plan); }; });

  FlightEnergyArgs fe;
  auto* c_fe = app.add_subcommand("flight-energy", "Energy of a recorded flight profile");
  c_fe->add_option("--profile", fe.profile, "Profile CSV (t_s,alt_m,v_ms,vz_ms)")->required();
  c_fe->add_option("--aircraft", fe.aircraft, "Aircraft id")->required();
  c_fe->add_option("--scenario", fe.scenario, "Scenario directory")->required();
  c_fe->add_flag("--no-takeoff", fe.no_takeoff, "Leave out the takeoff ground roll");
  c_fe->callback([&] { run = [&] { return cmd_flight_energy(fe); }; });

  ForecastArgs fc;
  auto* c_fc = app.add_subcommand("forecast", "Solar forecast of one airport");
  c_fc->add_option("--scenario", fc.scenario, "Scenario directory")->required();
  c_fc->add_option("--airport", fc.airport, "Airport id")->required();
  c_fc->add_option("--at-step", fc.at, "Forecast origin step")->required();
  c_fc->add_option("--horizon", fc.horizon, "Number of steps")->required();
  c_fc->add_option("--mode", fc.mode, "holt-winters | perfect");
  c_fc->callback([&] { run = [&] { return cmd_forecast(fc); }; });

  StepFileArgs lp;
  auto* c_lp = app.add_subcommand("export-lp", "Write the step's assignment problem as an LP file");
  c_lp->add_option("--scenario", lp.scenario, "Scenario directory")->required();
  c_lp->add_option("--at-step", lp.at, "Step")->required();
  c_lp->add_option("--out", lp.out, "LP file")->required();
  c_lp->add_option("--script", lp.script, "Disturbance script applied during the replay");
  c_lp->callback([&] { run = [&] { return cmd_export_lp(lp); }; });

  StepFileArgs gr;
  auto* c_gr = app.add_subcommand("graph", "Write the step's time-expanded graph in DOT format");
  c_gr->add_option("--scenario", gr.scenario, "Scenario directory")->required();
  c_gr->add_option("--at-step", gr.at, "Step")->required();
  c_gr->add_option("--dot", gr.out, "DOT file")->required();
  c_gr->add_option("--script", gr.script, "Disturbance script applied during the replay");
  c_gr->callback([&] { run = [&] { return cmd_graph(gr); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    return run();
  } catch (const CliFailure& e) {
    std::cerr << "error: " << e.message << '\n';
    return e.code;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const ProfileError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const ExternalSolverError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kUsage;
  }
}
