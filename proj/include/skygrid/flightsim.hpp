#pragma once

// Quasi-static flight energy model driven by a recorded flight profile.

#include <filesystem>
#include <stdexcept>
#include <vector>

#include "skygrid/scenario.hpp"

namespace skygrid {

inline constexpr double kGravity = 9.80665;

class ProfileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProfileSample {
  double t = 0.0;    // s
  double alt = 0.0;  // m
  double v = 0.0;    // m/s, airspeed
  double vz = 0.0;   // m/s, vertical component
};

struct FlightProfile {
  std::vector<ProfileSample> samples;

  /// Throws ProfileError on non-monotone time or |v_z| > v.
  void check() const;
  static FlightProfile read_csv(const std::filesystem::path& path);
};

/// ISA troposphere density [kg/m^3], valid below 11 km.
double isa_density(double altitude_m);

/// Kinematic state at one sample, with time derivatives from finite differences.
struct SampleState {
  double rho = 0.0;
  double v = 0.0;
  double vz = 0.0;
  double vx = 0.0;
  double theta = 0.0;
  double vz_dot = 0.0;
  double vx_dot = 0.0;
};

/// Central differences inside, one-sided at the ends.
std::vector<SampleState> sample_states(const FlightProfile& p);

double lift_coefficient(const SampleState& s, const AircraftSpec& a);
double drag_coefficient(double cl, const AircraftSpec& a);
/// Thrust [N]; uses the horizontal acceleration dv_x/dt.
double thrust(const SampleState& s, double cd, const AircraftSpec& a);

struct TakeoffResult {
  double liftoff_speed = 0.0;  // m/s
  double distance = 0.0;       // m
  double duration = 0.0;       // s
  double energy_kwh = 0.0;
};

/// Ground roll at constant takeoff_thrust from standstill to 1.1 * stall speed
/// (stall at cl_max, sea level), against rolling friction and parasitic drag.
TakeoffResult takeoff_roll(const AircraftSpec& a, double rolling_friction = 0.02);

struct EnergyBreakdown {
  double total_kwh = 0.0;
  double takeoff_kwh = 0.0;
  double climb_kwh = 0.0;
  double cruise_kwh = 0.0;
  double descent_kwh = 0.0;
};

struct FlightEnergyOptions {
  bool include_takeoff = true;
  double rolling_friction = 0.02;
  /// Vertical speed [m/s] above which an interval counts as climb (below its
  /// negative as descent).
  double phase_vz = 0.5;
};

/// (1/eta) * integral of F_T v dt by the trapezoidal rule over the airborne
/// samples (v > 0), plus the takeoff roll if requested.
EnergyBreakdown flight_energy(const FlightProfile& p, const AircraftSpec& a, const FlightEnergyOptions& opts = {});

}  // namespace skygrid
