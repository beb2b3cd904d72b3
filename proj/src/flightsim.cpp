#include "skygrid/flightsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace skygrid {

void FlightProfile::check() const {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (i > 0 && s.t < samples[i - 1].t) {
      throw ProfileError("sample " + std::to_string(i) + ": time decreases");
    }
    if (s.v < 0.0 || std::abs(s.vz) > s.v * (1.0 + 1e-9)) {
      throw ProfileError("sample " + std::to_string(i) + ": |v_z| exceeds v");
    }
    if (s.alt < 0.0 || s.alt > 11000.0) {
      throw ProfileError("sample " + std::to_string(i) + ": altitude outside the troposphere model");
    }
  }
}

FlightProfile FlightProfile::read_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ProfileError("cannot open profile '" + path.string() + "'");
  FlightProfile p;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1) {
      if (line.rfind("t_s", 0) != 0) throw ProfileError(path.filename().string() + ":1: expected header t_s,alt_m,v_ms,vz_ms");
      continue;
    }
    std::istringstream is(line);
    ProfileSample s;
    char c1, c2, c3;
    if (!(is >> s.t >> c1 >> s.alt >> c2 >> s.v >> c3 >> s.vz) || c1 != ',' || c2 != ',' || c3 != ',') {
      throw ProfileError(path.filename().string() + ":" + std::to_string(lineno) + ": malformed row");
    }
    p.samples.push_back(s);
  }
  p.check();
  return p;
}

double isa_density(double h) {
  constexpr double T0 = 288.15, L = 0.0065, rho0 = 1.225, R = 287.05287;
  const double exponent = kGravity / (R * L) - 1.0;
  return rho0 * std::pow(1.0 - L * h / T0, exponent);
}

std::vector<SampleState> sample_states(const FlightProfile& p) {
  const auto& s = p.samples;
  const std::size_t n = s.size();
  std::vector<SampleState> out(n);
  std::vector<double> vx(n);
  for (std::size_t i = 0; i < n; ++i) {
    vx[i] = std::sqrt(std::max(s[i].v * s[i].v - s[i].vz * s[i].vz, 0.0));
  }
  auto diff = [&](const std::vector<double>& y, std::size_t i) {
    if (n < 2) return 0.0;
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
    const double dt = s[hi].t - s[lo].t;
    return dt > 0.0 ? (y[hi] - y[lo]) / dt : 0.0;
  };
  std::vector<double> vz(n);
  for (std::size_t i = 0; i < n; ++i) vz[i] = s[i].vz;
  for (std::size_t i = 0; i < n; ++i) {
    SampleState& st = out[i];
    st.rho = isa_density(s[i].alt);
    st.v = s[i].v;
    st.vz = s[i].vz;
    st.vx = vx[i];
    st.theta = s[i].v > 0.0 ? std::asin(std::clamp(s[i].vz / s[i].v, -1.0, 1.0)) : 0.0;
    st.vz_dot = diff(vz, i);
    st.vx_dot = diff(vx, i);
  }
  return out;
}

double lift_coefficient(const SampleState& s, const AircraftSpec& a) {
  if (!(s.v > 0.0) || !(s.rho > 0.0)) throw ProfileError("lift coefficient needs v > 0 and rho > 0");
  return 2.0 * a.mass / (s.rho * a.wing_area * s.v * s.v) * (s.vz_dot + kGravity * std::cos(s.theta));
}

double drag_coefficient(double cl, const AircraftSpec& a) { return a.cd_min + a.induced_k * cl * cl; }

double thrust(const SampleState& s, double cd, const AircraftSpec& a) {
  return a.mass * (s.vx_dot + kGravity * std::sin(s.theta)) + s.rho * a.wing_area * cd * s.v * s.v / 2.0;
}

TakeoffResult takeoff_roll(const AircraftSpec& a, double mu) {
  TakeoffResult r;
  const double rho = isa_density(0.0);
  r.liftoff_speed = 1.1 * std::sqrt(2.0 * a.mass * kGravity / (rho * a.wing_area * a.cl_max));
  const double T = a.takeoff_thrust;
  if (T <= 0.0) return r;
  double v = 0.0, x = 0.0, t = 0.0;
  const double dt = 0.01;
  auto accel = [&](double vel) {
    const double q = 0.5 * rho * vel * vel * a.wing_area;
    const double lift = std::min(q * a.cl_max / 1.21, a.mass * kGravity);  // rotation near lift-off
    const double drag = q * a.cd_min;
    return (T - drag - mu * (a.mass * kGravity - lift)) / a.mass;
  };
  while (v < r.liftoff_speed) {
    // Midpoint step.
    const double a1 = accel(v);
    if (a1 <= 0.0) throw ProfileError("takeoff thrust cannot overcome friction and drag");
    const double vm = v + 0.5 * dt * a1;
    const double a2 = accel(vm);
    x += vm * dt;
    v += a2 * dt;
    t += dt;
  }
  r.distance = x;
  r.duration = t;
  r.energy_kwh = T * x / a.powertrain_eff / 3.6e6;
  return r;
}

EnergyBreakdown flight_energy(const FlightProfile& p, const AircraftSpec& a, const FlightEnergyOptions& opts) {
  if (p.samples.size() < 2) throw ProfileError("profile needs at least 2 samples");
  p.check();
  EnergyBreakdown out;
  if (p.samples.back().t == p.samples.front().t) return out;  // zero-length flight

  const auto st = sample_states(p);
  std::vector<double> power(st.size(), 0.0);  // F_T * v [W]
  for (std::size_t i = 0; i < st.size(); ++i) {
    if (!(st[i].v > 0.0)) continue;
    const double cl = lift_coefficient(st[i], a);
    power[i] = thrust(st[i], drag_coefficient(cl, a), a) * st[i].v;
  }
  for (std::size_t i = 0; i + 1 < st.size(); ++i) {
    if (!(st[i].v > 0.0) || !(st[i + 1].v > 0.0)) continue;
    const double dt = p.samples[i + 1].t - p.samples[i].t;
    const double e = 0.5 * (power[i] + power[i + 1]) * dt / a.powertrain_eff / 3.6e6;
    const double vz = 0.5 * (st[i].vz + st[i + 1].vz);
    if (vz > opts.phase_vz) out.climb_kwh += e;
    else if (vz < -opts.phase_vz) out.descent_kwh += e;
    else out.cruise_kwh += e;
  }
  if (opts.include_takeoff) out.takeoff_kwh = takeoff_roll(a, opts.rolling_friction).energy_kwh;
  out.total_kwh = out.takeoff_kwh + out.climb_kwh + out.cruise_kwh + out.descent_kwh;
  return out;
}

}  // namespace skygrid
