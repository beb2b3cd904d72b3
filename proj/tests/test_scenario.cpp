#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>

#include "doctest.h"
#include "skygrid/scenario.hpp"

using namespace skygrid;
namespace fs = std::filesystem;

namespace {

const fs::path kDemo = fs::path(SKYGRID_SOURCE_DIR) / "scenarios" / "abc_demo";

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("skygrid-test-scenario-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Scenario small() {
  Scenario s;
  s.name = "small";
  s.duration_steps = 4;
  s.controller.horizon_steps = 2;
  AirportSpec a;
  a.id = "A";
  a.bess_capacity_max = 10;
  a.bess_initial = 5;
  a.bess_power_max = 5;
  a.pv_peak = 3;
  AirportSpec b = a;
  b.id = "B";
  s.airports = {a, b};
  AircraftSpec k;
  k.id = "K1";
  k.batt_min = 1;
  k.batt_max = 100;
  k.reserve = 5;
  k.charge_max = 20;
  k.terminal_min = 10;
  k.mass = 1000;
  k.wing_area = 10;
  k.cd_min = 0.02;
  k.induced_k = 0.04;
  k.powertrain_eff = 0.9;
  k.initial_airport = "A";
  k.initial_energy = 50;
  s.aircraft = {k};
  FlightSpec f;
  f.id = "F1";
  f.sched_departure = 1;
  f.est_flight_time = 2;
  f.origin = "A";
  f.destination = "B";
  f.est_energy = 12.5;
  s.flights = {f};
  WeatherSeries w;
  w.first_step = -2;
  w.solar_kw = {0, 0, 1, 2, 3, 2.5, 1, 0};
  s.weather = {w, w};
  return s;
}

}  // namespace

TEST_CASE("demo bundle loads with the authored counts and validates cleanly") {
  const Scenario s = load_scenario(kDemo);
  CHECK(s.airports.size() == 3);
  CHECK(s.aircraft.size() == 4);
  CHECK(s.flights.size() == 12);
  CHECK(validate(s).empty());
  CHECK(s.duration_steps == 288);
  // "HH:MM" departures are converted with the 5-minute step.
  CHECK(s.flights[s.flight_index("F01")].sched_departure == 84);
  CHECK(s.flights[s.flight_index("F07")].sched_departure == 131);
  // ISO timestamps: two days of history precede step 0.
  CHECK(s.weather[0].first_step == -576);
  CHECK(s.weather[0].end_step() >= s.duration_steps + s.controller.horizon_steps);
  CHECK(s.big_m() == doctest::Approx(200.0));
}

TEST_CASE("the small fixture is consistent") { CHECK(validate(small()).empty()); }

TEST_CASE("unknown airport is reported by id") {
  Scenario s = small();
  s.flights[0].destination = "XYZ";
  const auto v = validate(s);
  REQUIRE(v.size() == 1);
  CHECK(v[0].message.find("XYZ") != std::string::npos);
  CHECK(v[0].entity == "flight F1");
  CHECK(v[0].field == "destination");

  const auto dir = scratch("xyz");
  write_scenario(s, dir);
  try {
    load_scenario(dir);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("XYZ") != std::string::npos);
    CHECK(e.violations().size() == 1);
  }
}

TEST_CASE("empty flight list is a valid scenario") {
  Scenario s = small();
  s.flights.clear();
  CHECK(validate(s).empty());
  const auto dir = scratch("noflights");
  write_scenario(s, dir);
  CHECK(load_scenario(dir).flights.empty());
}

TEST_CASE("inverted battery bounds give exactly one violation") {
  Scenario s = small();
  s.aircraft[0].batt_min = 200;
  s.aircraft[0].batt_max = 150;
  const auto v = validate(s);
  REQUIRE(v.size() == 1);
  CHECK(v[0].entity == "aircraft K1");
  CHECK(v[0].field == "batt_min");
}

TEST_CASE("zero flight time gives one violation") {
  Scenario s = small();
  s.flights[0].est_flight_time = 0;
  const auto v = validate(s);
  REQUIRE(v.size() == 1);
  CHECK(v[0].entity == "flight F1");
  CHECK(v[0].field == "est_flight_time");
}

TEST_CASE("each invariant is named with entity and field") {
  struct Case {
    std::function<void(Scenario&)> edit;
    std::string entity, field;
  };
  const std::vector<Case> cases = {
      {[](Scenario& s) { s.airports[0].bess_initial = 11; }, "airport A", "bess_initial"},
      {[](Scenario& s) { s.airports[0].pv_peak = -1; }, "airport A", "pv_peak"},
      {[](Scenario& s) { s.airports[1].bess_power_max = -1; }, "airport B", "bess_power_max"},
      {[](Scenario& s) { s.airports[1].grid_weight = -1; }, "airport B", "grid_weight"},
      {[](Scenario& s) { s.aircraft[0].terminal_min = 0; }, "aircraft K1", "terminal_min"},
      {[](Scenario& s) { s.aircraft[0].reserve = 99.5; }, "aircraft K1", "reserve"},
      {[](Scenario& s) { s.aircraft[0].charge_min = 30; }, "aircraft K1", "charge_min"},
      {[](Scenario& s) { s.aircraft[0].powertrain_eff = 0; }, "aircraft K1", "powertrain_eff"},
      {[](Scenario& s) { s.aircraft[0].initial_airport = "Q"; }, "aircraft K1", "initial_airport"},
      {[](Scenario& s) { s.flights[0].destination = "A"; }, "flight F1", "destination"},
      {[](Scenario& s) { s.flights[0].est_energy = 0; }, "flight F1", "est_energy"},
      {[](Scenario& s) { s.controller.dt_minutes = 0; }, "controller", "dt_minutes"},
      {[](Scenario& s) { s.controller.horizon_steps = 0; }, "controller", "horizon_steps"},
      {[](Scenario& s) { s.controller.max_delay_steps = -1; }, "controller", "max_delay_steps"},
      {[](Scenario& s) { s.controller.delay_weight = -1; }, "controller", "delay_weight"},
      {[](Scenario& s) { s.controller.terminal_weight = -1; }, "controller", "terminal_weight"},
      {[](Scenario& s) { s.controller.big_m = 5; }, "controller", "big_m"},
      {[](Scenario& s) { s.weather[0].solar_kw[3] = -1; }, "weather A", "solar_kw"},
      {[](Scenario& s) { s.weather[1].solar_kw.pop_back(); }, "weather B", "solar_kw"},
  };
  for (const auto& c : cases) {
    Scenario s = small();
    c.edit(s);
    const auto v = validate(s);
    INFO(c.entity << "." << c.field);
    REQUIRE(v.size() == 1);
    CHECK(v[0].entity == c.entity);
    CHECK(v[0].field == c.field);
    CHECK(v[0].to_string().find(c.field) != std::string::npos);
  }
}

TEST_CASE("write then load round-trips exactly") {
  const Scenario demo = load_scenario(kDemo);
  const auto dir = scratch("roundtrip");
  write_scenario(demo, dir);
  const Scenario back = load_scenario(dir);
  CHECK(back == demo);
  // And a second generation is byte-identical.
  const auto dir2 = scratch("roundtrip2");
  write_scenario(back, dir2);
  auto slurp = [](const fs::path& p) {
    std::ifstream f(p);
    return std::string(std::istreambuf_iterator<char>(f), {});
  };
  CHECK(slurp(dir / "scenario.json") == slurp(dir2 / "scenario.json"));
  CHECK(slurp(dir / "weather_BON.csv") == slurp(dir2 / "weather_BON.csv"));

  Scenario s = small();
  s.controller.forecast.mode = ForecastMode::perfect;
  s.aircraft[0].batt_max = 0.1 + 99.9;  // not exactly representable in short decimal form
  const auto dir3 = scratch("roundtrip3");
  write_scenario(s, dir3);
  CHECK(load_scenario(dir3) == s);
}

TEST_CASE("parse errors carry context") {
  const auto dir = scratch("broken");
  {
    std::ofstream f(dir / "scenario.json");
    f << "{\n  \"airports\": [\n    {\"id\": \"A\",,}\n  ]\n}\n";
  }
  try {
    parse_scenario(dir);
    FAIL("expected a parse error");
  } catch (const ScenarioError& e) {
    CHECK(std::string(e.what()).find("scenario.json:3") != std::string::npos);
  }
  {
    std::ofstream f(dir / "scenario.json");
    f << R"({"airports": [{"id": "A", "bess_capacity_min": "x"}], "aircraft": [], "flights": []})";
  }
  try {
    parse_scenario(dir);
    FAIL("expected a field error");
  } catch (const ScenarioError& e) {
    CHECK(std::string(e.what()).find("airports[0].bess_capacity_min") != std::string::npos);
  }
}

TEST_CASE("weather files accept integer steps and report bad rows by line") {
  Scenario s = small();
  const auto dir = scratch("weather");
  write_scenario(s, dir);
  CHECK(parse_scenario(dir).weather[0] == s.weather[0]);
  {
    std::ofstream f(dir / "weather_A.csv");
    f << "timestamp,solar_kw\n0,1\n1,2\n3,4\n";
  }
  try {
    parse_scenario(dir);
    FAIL("expected a weather error");
  } catch (const ScenarioError& e) {
    CHECK(std::string(e.what()).find("weather_A.csv:4") != std::string::npos);
  }
  {
    std::ofstream f(dir / "weather_A.csv");
    f << "timestamp,solar_kw\n0,1\n1,abc\n";
  }
  CHECK_THROWS_AS(parse_scenario(dir), ScenarioError);
}

TEST_CASE("ISO minute arithmetic") {
  CHECK(iso_minutes_between("2024-08-15T00:00", "2024-08-15T07:05").value() == 425.0);
  CHECK(iso_minutes_between("2024-08-15T00:00", "2024-08-13T00:00").value() == -2880.0);
  CHECK(iso_minutes_between("2024-03-01T00:00", "2024-02-29T23:55").value() == -5.0);
  CHECK_FALSE(iso_minutes_between("2024-08-15T00:00", "2024-13-01T00:00").has_value());
  CHECK_FALSE(iso_minutes_between("garbage", "2024-08-15").has_value());
}
