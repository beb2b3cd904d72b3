#include "skygrid/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "skygrid/lp_format.hpp"

namespace skygrid {

using nlohmann::json;

double WeatherSeries::at(int step) const {
  if (!covers(step)) {
    throw std::out_of_range("weather series does not cover step " + std::to_string(step));
  }
  return solar_kw[static_cast<std::size_t>(step - first_step)];
}

int ControllerParams::season_length() const {
  if (forecast.season_steps > 0) return forecast.season_steps;
  return static_cast<int>(std::lround(24.0 * 60.0 / dt_minutes));
}

int Scenario::airport_index(const std::string& id) const {
  for (std::size_t i = 0; i < airports.size(); ++i) {
    if (airports[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

int Scenario::aircraft_index(const std::string& id) const {
  for (std::size_t i = 0; i < aircraft.size(); ++i) {
    if (aircraft[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

int Scenario::flight_index(const std::string& id) const {
  for (std::size_t i = 0; i < flights.size(); ++i) {
    if (flights[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

double Scenario::big_m() const {
  if (controller.big_m > 0.0) return controller.big_m;
  double m = 0.0;
  for (const auto& a : aircraft) m = std::max(m, a.charge_max);
  return m;
}

ValidationError::ValidationError(std::vector<Violation> v)
    : std::runtime_error([&] {
        std::string msg = "scenario has " + std::to_string(v.size()) + " violation(s):";
        for (const auto& x : v) msg += "\n  " + x.to_string();
        return msg;
      }()),
      violations_(std::move(v)) {}

// ---------------------------------------------------------------------------
// Validation

std::vector<Violation> validate(const Scenario& s) {
  std::vector<Violation> out;
  auto bad = [&](const std::string& entity, const std::string& field, const std::string& msg) {
    out.push_back({entity, field, msg});
  };

  std::set<std::string> seen;
  for (const auto& a : s.airports) {
    const std::string e = "airport " + a.id;
    if (a.id.empty()) bad(e, "id", "empty id");
    if (!seen.insert(a.id).second) bad(e, "id", "duplicate airport id");
    const bool box_ok = a.bess_capacity_min <= a.bess_capacity_max;
    if (!box_ok) bad(e, "bess_capacity_min", "exceeds bess_capacity_max");
    if (box_ok && (a.bess_initial < a.bess_capacity_min || a.bess_initial > a.bess_capacity_max)) {
      bad(e, "bess_initial", "outside [bess_capacity_min, bess_capacity_max]");
    }
    if (a.pv_peak < 0.0) bad(e, "pv_peak", "must be >= 0");
    if (a.bess_power_max < 0.0) bad(e, "bess_power_max", "must be >= 0");
    if (a.grid_weight < 0.0) bad(e, "grid_weight", "must be >= 0");
  }

  seen.clear();
  for (const auto& k : s.aircraft) {
    const std::string e = "aircraft " + k.id;
    if (k.id.empty()) bad(e, "id", "empty id");
    if (!seen.insert(k.id).second) bad(e, "id", "duplicate aircraft id");
    // With an empty battery box the dependent range checks carry no extra
    // information, so only the inverted bound itself is reported.
    const bool box_ok = k.batt_min <= k.batt_max;
    if (!box_ok) bad(e, "batt_min", "exceeds batt_max");
    if (box_ok && (k.terminal_min < k.batt_min || k.terminal_min > k.batt_max)) {
      bad(e, "terminal_min", "outside [batt_min, batt_max]");
    }
    if (k.reserve < 0.0) bad(e, "reserve", "must be >= 0");
    if (box_ok && k.batt_min + k.reserve > k.batt_max) bad(e, "reserve", "batt_min + reserve exceeds batt_max");
    if (k.charge_min < 0.0) bad(e, "charge_min", "must be >= 0");
    if (k.charge_min > k.charge_max) bad(e, "charge_min", "exceeds charge_max");
    if (!(k.powertrain_eff > 0.0 && k.powertrain_eff <= 1.0)) bad(e, "powertrain_eff", "must be in (0, 1]");
    if (k.mass <= 0.0) bad(e, "mass", "must be > 0");
    if (k.wing_area <= 0.0) bad(e, "wing_area", "must be > 0");
    if (k.cd_min < 0.0) bad(e, "cd_min", "must be >= 0");
    if (k.induced_k < 0.0) bad(e, "induced_k", "must be >= 0");
    if (k.cl_max <= 0.0) bad(e, "cl_max", "must be > 0");
    if (k.takeoff_thrust < 0.0) bad(e, "takeoff_thrust", "must be >= 0");
    if (s.airport_index(k.initial_airport) < 0) {
      bad(e, "initial_airport", "unknown airport '" + k.initial_airport + "'");
    }
    if (box_ok && (k.initial_energy < k.batt_min || k.initial_energy > k.batt_max)) {
      bad(e, "initial_energy", "outside [batt_min, batt_max]");
    }
  }

  seen.clear();
  for (const auto& f : s.flights) {
    const std::string e = "flight " + f.id;
    if (f.id.empty()) bad(e, "id", "empty id");
    if (!seen.insert(f.id).second) bad(e, "id", "duplicate flight id");
    if (s.airport_index(f.origin) < 0) bad(e, "origin", "unknown airport '" + f.origin + "'");
    if (s.airport_index(f.destination) < 0) bad(e, "destination", "unknown airport '" + f.destination + "'");
    if (f.origin == f.destination) bad(e, "destination", "equals origin");
    if (f.est_flight_time < 1) bad(e, "est_flight_time", "must be >= 1 step");
    if (!(f.est_energy > 0.0)) bad(e, "est_energy", "must be > 0");
    if (f.sched_departure < 0) bad(e, "sched_departure", "must be >= 0");
  }

  const ControllerParams& c = s.controller;
  if (!(c.dt_minutes > 0.0)) bad("controller", "dt_minutes", "must be > 0");
  if (c.horizon_steps < 1) bad("controller", "horizon_steps", "must be >= 1");
  if (c.max_delay_steps < 0) bad("controller", "max_delay_steps", "must be >= 0");
  if (c.delay_weight < 0.0) bad("controller", "delay_weight", "must be >= 0");
  if (c.terminal_weight < 0.0) bad("controller", "terminal_weight", "must be >= 0");
  if (c.reserve_slack_penalty < 0.0) bad("controller", "reserve_slack_penalty", "must be >= 0");
  if (!(c.solve_time_limit > 0.0)) bad("controller", "solve_time_limit", "must be > 0");
  for (const auto& k : s.aircraft) {
    if (c.big_m > 0.0 && c.big_m < k.charge_max) {
      bad("controller", "big_m", "smaller than charge_max of aircraft " + k.id);
    }
  }
  if (c.big_m < 0.0) bad("controller", "big_m", "must be >= 0");
  for (auto [name, v] : {std::pair{"alpha", c.forecast.alpha}, std::pair{"beta", c.forecast.beta},
                         std::pair{"gamma", c.forecast.gamma}}) {
    if (!(v >= 0.0 && v <= 1.0)) bad("controller", std::string("forecast.") + name, "must be in [0, 1]");
  }
  if (c.forecast.season_steps != 0 && c.forecast.season_steps < 2) {
    bad("controller", "forecast.season_steps", "must be >= 2");
  }
  if (s.duration_steps < 0) bad("scenario", "duration_steps", "must be >= 0");

  if (s.weather.size() != s.airports.size()) {
    bad("scenario", "weather", "expected one weather series per airport");
  } else {
    for (std::size_t h = 0; h < s.airports.size(); ++h) {
      const std::string e = "weather " + s.airports[h].id;
      const WeatherSeries& w = s.weather[h];
      if (std::any_of(w.solar_kw.begin(), w.solar_kw.end(), [](double v) { return !(v >= 0.0); })) {
        bad(e, "solar_kw", "negative or non-finite value");
      }
      if (w.first_step > 0) bad(e, "solar_kw", "series starts after step 0");
      if (w.end_step() < s.duration_steps + c.horizon_steps) {
        bad(e, "solar_kw", "series ends at step " + std::to_string(w.end_step()) + ", need " +
                               std::to_string(s.duration_steps + c.horizon_steps));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::optional<std::chrono::sys_seconds> parse_iso(const std::string& s) {
  int y, mo, d, h = 0, mi = 0, sec = 0;
  char t;
  std::istringstream is(s);
  char dash1, dash2;
  if (!(is >> y >> dash1 >> mo >> dash2 >> d) || dash1 != '-' || dash2 != '-') return std::nullopt;
  if (is >> t) {
    if (t != 'T' && t != ' ') return std::nullopt;
    char c1;
    if (!(is >> h >> c1 >> mi) || c1 != ':') return std::nullopt;
    if (is.peek() == ':') {
      is.get();
      if (!(is >> sec)) return std::nullopt;
    }
    std::string rest;
    is >> rest;
    if (!rest.empty() && rest != "Z") return std::nullopt;
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0 || sec > 60) return std::nullopt;
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec};
}

std::string ctx_str(const std::string& ctx, const std::string& key) { return ctx.empty() ? key : ctx + "." + key; }

const json& field(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) throw ScenarioError(ctx_str(ctx, key) + ": missing field");
  return j.at(key);
}

double num(const json& j, const std::string& key, const std::string& ctx) {
  const json& v = field(j, key, ctx);
  if (!v.is_number()) throw ScenarioError(ctx_str(ctx, key) + ": expected a number");
  return v.get<double>();
}

double num_or(const json& j, const std::string& key, const std::string& ctx, double dflt) {
  return j.contains(key) ? num(j, key, ctx) : dflt;
}

int integer(const json& j, const std::string& key, const std::string& ctx) {
  const json& v = field(j, key, ctx);
  if (!v.is_number_integer()) throw ScenarioError(ctx_str(ctx, key) + ": expected an integer");
  return v.get<int>();
}

std::string str(const json& j, const std::string& key, const std::string& ctx) {
  const json& v = field(j, key, ctx);
  if (!v.is_string()) throw ScenarioError(ctx_str(ctx, key) + ": expected a string");
  return v.get<std::string>();
}

// Integer step, or "HH:MM" local time converted with dt.
int step_field(const json& j, const std::string& key, const std::string& ctx, double dt_minutes) {
  const json& v = field(j, key, ctx);
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    int h, m;
    char colon;
    std::istringstream is(s);
    if (is >> h >> colon >> m && colon == ':') {
      const double steps = (h * 60.0 + m) / dt_minutes;
      if (std::abs(steps - std::round(steps)) < 1e-9) return static_cast<int>(std::lround(steps));
      throw ScenarioError(ctx_str(ctx, key) + ": time '" + s + "' is not on the step grid");
    }
  }
  throw ScenarioError(ctx_str(ctx, key) + ": expected a step index or \"HH:MM\"");
}

WeatherSeries read_weather(const std::filesystem::path& path, const std::string& day_start, double dt_minutes) {
  std::ifstream f(path);
  if (!f) throw ScenarioError("cannot open weather file '" + path.string() + "'");
  std::string line;
  int lineno = 0;
  WeatherSeries w;
  std::optional<int> prev;
  auto err = [&](const std::string& m) {
    return ScenarioError(path.filename().string() + ":" + std::to_string(lineno) + ": " + m);
  };
  bool header = false;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);
    if (line.empty()) continue;
    if (!header) {
      if (line.find("solar_kw") == std::string::npos) throw err("expected header 'timestamp,solar_kw'");
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw err("expected two columns");
    const std::string ts = line.substr(0, comma);
    const std::string val = line.substr(comma + 1);
    int step;
    char* end = nullptr;
    const long as_int = std::strtol(ts.c_str(), &end, 10);
    if (end != ts.c_str() && *end == '\0') {
      step = static_cast<int>(as_int);
    } else {
      if (day_start.empty()) throw err("timestamp '" + ts + "' needs day_start in scenario.json");
      auto mins = iso_minutes_between(day_start, ts);
      if (!mins) throw err("malformed timestamp '" + ts + "'");
      const double st = *mins / dt_minutes;
      if (std::abs(st - std::round(st)) > 1e-9) throw err("timestamp '" + ts + "' is not on the step grid");
      step = static_cast<int>(std::lround(st));
    }
    const double kw = std::strtod(val.c_str(), &end);
    if (end == val.c_str() || *end != '\0') throw err("malformed solar_kw '" + val + "'");
    if (!prev) {
      w.first_step = step;
    } else if (step != *prev + 1) {
      throw err("steps must be consecutive (got " + std::to_string(step) + " after " + std::to_string(*prev) + ")");
    }
    prev = step;
    w.solar_kw.push_back(kw);
  }
  if (!header) throw err("empty weather file");
  return w;
}

}  // namespace

std::optional<double> iso_minutes_between(const std::string& from, const std::string& to) {
  auto a = parse_iso(from);
  auto b = parse_iso(to);
  if (!a || !b) return std::nullopt;
  return std::chrono::duration<double, std::ratio<60>>(*b - *a).count();
}

Scenario parse_scenario(const std::filesystem::path& path) {
  const auto manifest = std::filesystem::is_directory(path) ? path / "scenario.json" : path;
  const auto dir = manifest.parent_path();
  std::ifstream f(manifest);
  if (!f) throw ScenarioError("cannot open '" + manifest.string() + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  const std::string text = buf.str();

  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const long line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    throw ScenarioError(manifest.filename().string() + ":" + std::to_string(line) + ": " + e.what());
  }

  Scenario s;
  s.name = j.value("name", std::string{});
  s.day_start = j.value("day_start", std::string{});

  if (j.contains("controller")) {
    const json& c = j.at("controller");
    const std::string ctx = "controller";
    ControllerParams& p = s.controller;
    p.dt_minutes = num_or(c, "dt_minutes", ctx, p.dt_minutes);
    if (c.contains("horizon_steps")) p.horizon_steps = integer(c, "horizon_steps", ctx);
    if (c.contains("max_delay_steps")) p.max_delay_steps = integer(c, "max_delay_steps", ctx);
    p.delay_weight = num_or(c, "delay_weight", ctx, p.delay_weight);
    p.terminal_weight = num_or(c, "terminal_weight", ctx, p.terminal_weight);
    p.big_m = num_or(c, "big_m", ctx, p.big_m);
    p.reserve_slack_penalty = num_or(c, "reserve_slack_penalty", ctx, p.reserve_slack_penalty);
    p.solve_time_limit = num_or(c, "solve_time_limit", ctx, p.solve_time_limit);
    if (c.contains("forecast")) {
      const json& fc = c.at("forecast");
      const std::string fctx = "controller.forecast";
      p.forecast.alpha = num_or(fc, "alpha", fctx, p.forecast.alpha);
      p.forecast.beta = num_or(fc, "beta", fctx, p.forecast.beta);
      p.forecast.gamma = num_or(fc, "gamma", fctx, p.forecast.gamma);
      if (fc.contains("season_steps")) p.forecast.season_steps = integer(fc, "season_steps", fctx);
      if (fc.contains("mode")) {
        const std::string m = str(fc, "mode", fctx);
        if (m == "holt_winters") p.forecast.mode = ForecastMode::holt_winters;
        else if (m == "perfect") p.forecast.mode = ForecastMode::perfect;
        else throw ScenarioError(fctx + ".mode: unknown mode '" + m + "'");
      }
    }
  }
  s.duration_steps = j.contains("duration_steps")
                         ? integer(j, "duration_steps", "")
                         : static_cast<int>(std::lround(24.0 * 60.0 / s.controller.dt_minutes));

  const json& airports = field(j, "airports", "");
  if (!airports.is_array()) throw ScenarioError("airports: expected an array");
  std::vector<std::string> weather_files;
  for (std::size_t i = 0; i < airports.size(); ++i) {
    const json& a = airports[i];
    const std::string ctx = "airports[" + std::to_string(i) + "]";
    AirportSpec sp;
    sp.id = str(a, "id", ctx);
    sp.bess_capacity_min = num(a, "bess_capacity_min", ctx);
    sp.bess_capacity_max = num(a, "bess_capacity_max", ctx);
    sp.bess_initial = num(a, "bess_initial", ctx);
    sp.bess_power_max = num(a, "bess_power_max", ctx);
    sp.pv_peak = num(a, "pv_peak", ctx);
    sp.grid_weight = num_or(a, "grid_weight", ctx, 1.0);
    weather_files.push_back(a.contains("weather_file") ? str(a, "weather_file", ctx) : "weather_" + sp.id + ".csv");
    s.airports.push_back(std::move(sp));
  }

  const json& fleet = field(j, "aircraft", "");
  if (!fleet.is_array()) throw ScenarioError("aircraft: expected an array");
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    const json& a = fleet[i];
    const std::string ctx = "aircraft[" + std::to_string(i) + "]";
    AircraftSpec k;
    k.id = str(a, "id", ctx);
    k.batt_min = num(a, "batt_min", ctx);
    k.batt_max = num(a, "batt_max", ctx);
    k.reserve = num(a, "reserve", ctx);
    k.charge_min = num_or(a, "charge_min", ctx, 0.0);
    k.charge_max = num(a, "charge_max", ctx);
    k.terminal_min = num(a, "terminal_min", ctx);
    k.mass = num(a, "mass", ctx);
    k.wing_area = num(a, "wing_area", ctx);
    k.cd_min = num(a, "cd_min", ctx);
    k.induced_k = num(a, "induced_k", ctx);
    k.powertrain_eff = num(a, "powertrain_eff", ctx);
    k.cl_max = num_or(a, "cl_max", ctx, k.cl_max);
    k.takeoff_thrust = num_or(a, "takeoff_thrust", ctx, 0.0);
    k.initial_airport = str(a, "initial_airport", ctx);
    k.initial_energy = num(a, "initial_energy", ctx);
    s.aircraft.push_back(std::move(k));
  }

  const json& flights = field(j, "flights", "");
  if (!flights.is_array()) throw ScenarioError("flights: expected an array");
  for (std::size_t i = 0; i < flights.size(); ++i) {
    const json& a = flights[i];
    const std::string ctx = "flights[" + std::to_string(i) + "]";
    FlightSpec fl;
    fl.id = str(a, "id", ctx);
    fl.sched_departure = step_field(a, "sched_departure", ctx, s.controller.dt_minutes);
    fl.est_flight_time = integer(a, "est_flight_time", ctx);
    fl.origin = str(a, "origin", ctx);
    fl.destination = str(a, "destination", ctx);
    fl.est_energy = num(a, "est_energy", ctx);
    s.flights.push_back(std::move(fl));
  }

  for (const auto& wf : weather_files) {
    s.weather.push_back(read_weather(dir / wf, s.day_start, s.controller.dt_minutes));
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  Scenario s = parse_scenario(path);
  auto v = validate(s);
  if (!v.empty()) throw ValidationError(std::move(v));
  return s;
}

void write_scenario(const Scenario& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json j;
  j["name"] = s.name;
  if (!s.day_start.empty()) j["day_start"] = s.day_start;
  j["duration_steps"] = s.duration_steps;
  const ControllerParams& p = s.controller;
  j["controller"] = {
      {"dt_minutes", p.dt_minutes},
      {"horizon_steps", p.horizon_steps},
      {"max_delay_steps", p.max_delay_steps},
      {"delay_weight", p.delay_weight},
      {"terminal_weight", p.terminal_weight},
      {"big_m", p.big_m},
      {"reserve_slack_penalty", p.reserve_slack_penalty},
      {"solve_time_limit", p.solve_time_limit},
      {"forecast",
       {{"alpha", p.forecast.alpha},
        {"beta", p.forecast.beta},
        {"gamma", p.forecast.gamma},
        {"season_steps", p.forecast.season_steps},
        {"mode", p.forecast.mode == ForecastMode::perfect ? "perfect" : "holt_winters"}}}};
  j["airports"] = json::array();
  for (const auto& a : s.airports) {
    j["airports"].push_back({{"id", a.id},
                             {"bess_capacity_min", a.bess_capacity_min},
                             {"bess_capacity_max", a.bess_capacity_max},
                             {"bess_initial", a.bess_initial},
                             {"bess_power_max", a.bess_power_max},
                             {"pv_peak", a.pv_peak},
                             {"grid_weight", a.grid_weight},
                             {"weather_file", "weather_" + a.id + ".csv"}});
  }
  j["aircraft"] = json::array();
  for (const auto& k : s.aircraft) {
    j["aircraft"].push_back({{"id", k.id},
                             {"batt_min", k.batt_min},
                             {"batt_max", k.batt_max},
                             {"reserve", k.reserve},
                             {"charge_min", k.charge_min},
                             {"charge_max", k.charge_max},
                             {"terminal_min", k.terminal_min},
                             {"mass", k.mass},
                             {"wing_area", k.wing_area},
                             {"cd_min", k.cd_min},
                             {"induced_k", k.induced_k},
                             {"powertrain_eff", k.powertrain_eff},
                             {"cl_max", k.cl_max},
                             {"takeoff_thrust", k.takeoff_thrust},
                             {"initial_airport", k.initial_airport},
                             {"initial_energy", k.initial_energy}});
  }
  j["flights"] = json::array();
  for (const auto& fl : s.flights) {
    j["flights"].push_back({{"id", fl.id},
                            {"sched_departure", fl.sched_departure},
                            {"est_flight_time", fl.est_flight_time},
                            {"origin", fl.origin},
                            {"destination", fl.destination},
                            {"est_energy", fl.est_energy}});
  }
  {
    std::ofstream f(dir / "scenario.json");
    if (!f) throw IoError("cannot write '" + (dir / "scenario.json").string() + "'");
    f << j.dump(2) << '\n';
  }
  for (std::size_t h = 0; h < s.airports.size() && h < s.weather.size(); ++h) {
    std::ofstream f(dir / ("weather_" + s.airports[h].id + ".csv"));
    if (!f) throw IoError("cannot write weather file for " + s.airports[h].id);
    f << "timestamp,solar_kw\n";
    const WeatherSeries& w = s.weather[h];
    for (std::size_t i = 0; i < w.solar_kw.size(); ++i) {
      f << (w.first_step + static_cast<int>(i)) << ',' << format_number(w.solar_kw[i]) << '\n';
    }
  }
}

}  // namespace skygrid
