#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "skygrid/flightsim.hpp"
#include "skygrid/scenario.hpp"

using namespace skygrid;

namespace {

AircraftSpec airframe(double m = 6000, double S = 30, double cd0 = 0.025, double k = 0.045, double eta = 0.9) {
  AircraftSpec a;
  a.id = "T";
  a.mass = m;
  a.wing_area = S;
  a.cd_min = cd0;
  a.induced_k = k;
  a.powertrain_eff = eta;
  a.cl_max = 1.8;
  a.takeoff_thrust = 15000;
  return a;
}

SampleState level(double v, double rho = 1.225) {
  SampleState s;
  s.rho = rho;
  s.v = v;
  s.vx = v;
  return s;
}

FlightProfile cruise(double v, double duration, double dt, double alt = 0.0) {
  FlightProfile p;
  for (double t = 0.0; t <= duration + 1e-9; t += dt) p.samples.push_back({t, alt, v, 0.0});
  return p;
}

FlightEnergyOptions no_takeoff() {
  FlightEnergyOptions o;
  o.include_takeoff = false;
  return o;
}

}  // namespace

TEST_CASE("ISA density") {
  CHECK(isa_density(0.0) == doctest::Approx(1.225).epsilon(1e-12));
  CHECK(isa_density(1000.0) == doctest::Approx(1.1117).epsilon(1e-3));
  CHECK(isa_density(5000.0) == doctest::Approx(0.7361).epsilon(1e-3));
  for (double h = 0; h < 11000; h += 500) CHECK(isa_density(h + 500) < isa_density(h));
}

TEST_CASE("lift, drag and thrust in steady level flight") {
  const auto a = airframe();
  const double cl = lift_coefficient(level(70), a);
  CHECK(cl == doctest::Approx(2 * 6000 * 9.80665 / (1.225 * 30 * 4900)).epsilon(1e-12));
  CHECK(cl == doctest::Approx(0.6536).epsilon(1e-4));
  const double cd = drag_coefficient(cl, a);
  CHECK(cd == doctest::Approx(0.04422).epsilon(1e-3));
  CHECK(drag_coefficient(0.0, a) == 0.025);
  CHECK(drag_coefficient(-cl, a) == cd);
  const double T = thrust(level(70), cd, a);
  CHECK(T == doctest::Approx(1.225 * 30 * cd * 4900 / 2).epsilon(1e-12));
  CHECK(T == doctest::Approx(3981).epsilon(1e-3));
  // Doubling speed quarters the lift coefficient.
  CHECK(lift_coefficient(level(140), a) == doctest::Approx(cl / 4).epsilon(1e-12));
  // Vertical steady flight needs no lift.
  SampleState up = level(70);
  up.theta = M_PI / 2;
  CHECK(std::abs(lift_coefficient(up, a)) < 1e-12);
  // A steady 0.05 rad climb adds m g sin(theta).
  SampleState climb = level(70);
  climb.theta = 0.05;
  CHECK(thrust(climb, cd, a) - T == doctest::Approx(6000 * 9.80665 * std::sin(0.05)).epsilon(1e-12));
  CHECK(6000 * 9.80665 * std::sin(0.05) == doctest::Approx(2941).epsilon(1e-3));
  CHECK_THROWS_AS(lift_coefficient(level(0.0), a), ProfileError);
}

TEST_CASE("level cruise matches the closed form") {
  const auto a = airframe();
  const auto e = flight_energy(cruise(70, 1800, 10), a, no_takeoff());
  const double cd = drag_coefficient(lift_coefficient(level(70), a), a);
  const double closed = 1.225 * 30 * cd * 70 * 70 * 70 * 1800 / (2 * 0.9) / 3.6e6;
  CHECK(e.total_kwh == doctest::Approx(closed).epsilon(1e-9));
  CHECK(e.total_kwh == doctest::Approx(154.8).epsilon(1e-3));
  CHECK(e.cruise_kwh == e.total_kwh);
}

TEST_CASE("trapezoid converges on an analytic profile") {
  const auto a = airframe();
  auto make = [](double dt) {
    FlightProfile p;
    for (double t = 0.0; t <= 1200 + 1e-9; t += dt) {
      const double v = 70 + 8 * std::sin(t / 150.0);
      const double vz = 3 * std::sin(t / 200.0);
      p.samples.push_back({t, 800 + 600 * (1 - std::cos(t / 200.0)), v, vz});
    }
    return p;
  };
  const double coarse = flight_energy(make(4), a, no_takeoff()).total_kwh;
  const double fine = flight_energy(make(2), a, no_takeoff()).total_kwh;
  CHECK(std::abs(coarse - fine) / fine < 1e-3);
  CHECK(fine > 0);
}

TEST_CASE("efficiency scaling, zero length, short profiles") {
  const auto p = cruise(65, 600, 5);
  const double e9 = flight_energy(p, airframe(6000, 30, 0.025, 0.045, 0.9)).total_kwh;
  const double e6 = flight_energy(p, airframe(6000, 30, 0.025, 0.045, 0.6)).total_kwh;
  CHECK(e9 * 0.9 == doctest::Approx(e6 * 0.6).epsilon(1e-12));
  FlightProfile zero;
  zero.samples = {{0, 0, 50, 0}, {0, 0, 50, 0}};
  CHECK(flight_energy(zero, airframe()).total_kwh == 0.0);
  FlightProfile one;
  one.samples = {{0, 0, 50, 0}};
  CHECK_THROWS_AS(flight_energy(one, airframe()), ProfileError);
  FlightProfile back;
  back.samples = {{5, 0, 50, 0}, {0, 0, 50, 0}};
  CHECK_THROWS_AS(back.check(), ProfileError);
  FlightProfile steep;
  steep.samples = {{0, 0, 5, 6}, {1, 0, 5, 6}};
  CHECK_THROWS_AS(steep.check(), ProfileError);
}

TEST_CASE("takeoff roll reaches 1.1 stall speed with positive energy") {
  const auto a = airframe();
  const auto r = takeoff_roll(a);
  CHECK(r.liftoff_speed == doctest::Approx(1.1 * std::sqrt(2 * 6000 * 9.80665 / (1.225 * 30 * 1.8))));
  CHECK(r.distance > 0);
  // Frictionless, dragless bound: distance >= v^2 / (2 T / m).
  CHECK(r.distance >= r.liftoff_speed * r.liftoff_speed / (2 * 15000.0 / 6000) * 0.999);
  CHECK(r.energy_kwh == doctest::Approx(15000 * r.distance / 0.9 / 3.6e6));
  const auto e = flight_energy(cruise(70, 600, 10), a);
  CHECK(e.takeoff_kwh == doctest::Approx(r.energy_kwh));
  CHECK(e.total_kwh == doctest::Approx(e.takeoff_kwh + e.cruise_kwh));
  auto weak = a;
  weak.takeoff_thrust = 500;
  CHECK_THROWS_AS(takeoff_roll(weak), ProfileError);
}

TEST_CASE("phases are split by vertical speed") {
  FlightProfile p;
  for (int i = 0; i <= 10; ++i) p.samples.push_back({i * 10.0, i * 30.0, 60, 3});
  for (int i = 11; i <= 20; ++i) p.samples.push_back({i * 10.0, 300, 60, 0});
  for (int i = 21; i <= 30; ++i) p.samples.push_back({i * 10.0, 300 - (i - 20) * 20.0, 60, -2});
  const auto e = flight_energy(p, airframe(), no_takeoff());
  CHECK(e.climb_kwh > 0);
  CHECK(e.cruise_kwh > 0);
  CHECK(e.descent_kwh != 0);
  CHECK(e.total_kwh == doctest::Approx(e.climb_kwh + e.cruise_kwh + e.descent_kwh));
}

TEST_CASE("bundled hop profiles fit the demo battery and match the scheduled estimates") {
  const auto root = std::filesystem::path(SKYGRID_SOURCE_DIR) / "scenarios" / "abc_demo";
  const Scenario s = load_scenario(root);
  const auto& a = s.aircraft.front();
  for (const auto& f : s.flights) {
    auto name = f.origin + "-" + f.destination + ".csv";
    if (!std::filesystem::exists(root / "profiles" / name)) name = f.destination + "-" + f.origin + ".csv";
    const auto e = flight_energy(FlightProfile::read_csv(root / "profiles" / name), a);
    INFO(f.id << " " << name << " " << e.total_kwh);
    CHECK(e.total_kwh < a.batt_max - a.batt_min);
    CHECK(e.total_kwh == doctest::Approx(f.est_energy).epsilon(1e-3));
  }
}
