#!/usr/bin/env python3
"""Regenerates the bundled three-airport demo scenario under scenarios/abc_demo.

The output is deterministic: solar data come from a clear-sky curve modulated
by seeded cloud noise, so rerunning the script reproduces the files byte for
byte.
"""

import argparse
import json
import math
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

DT_MIN = 5
DAY_STEPS = 24 * 60 // DT_MIN
HISTORY_DAYS = 2
HORIZON = 24
DAY_START = datetime(2024, 8, 15)

AIRPORTS = [
    # id, pv_peak kW, BESS min/max/initial kWh, BESS power kW, grid weight
    ("AUA", 180.0, 80.0, 400.0, 200.0, 150.0, 1.0),
    ("BON", 120.0, 60.0, 300.0, 150.0, 120.0, 1.0),
    ("CUR", 160.0, 80.0, 350.0, 180.0, 150.0, 1.0),
]

# Minutes of block time per route (both directions).
ROUTE_MINUTES = {("AUA", "CUR"): 25, ("BON", "CUR"): 20, ("AUA", "BON"): 35}

FLIGHTS = [
    ("F01", "07:00", "AUA", "CUR"),
    ("F02", "07:30", "BON", "CUR"),
    ("F03", "08:15", "CUR", "AUA"),
    ("F04", "08:45", "CUR", "BON"),
    ("F05", "09:30", "AUA", "BON"),
    ("F06", "10:15", "BON", "AUA"),
    ("F07", "10:55", "AUA", "CUR"),
    ("F08", "11:40", "CUR", "AUA"),
    ("F09", "13:00", "BON", "CUR"),
    ("F10", "14:30", "CUR", "BON"),
    ("F11", "16:00", "AUA", "CUR"),
    ("F12", "17:30", "CUR", "AUA"),
]

AIRCRAFT = [
    # id, initial airport, initial energy kWh
    ("PJ-EA1", "AUA", 420.0),
    ("PJ-EA2", "AUA", 380.0),
    ("PJ-EA3", "CUR", 400.0),
    ("PJ-EA4", "BON", 360.0),
]

AIRFRAME = {
    "batt_min": 50.0,
    "batt_max": 500.0,
    "reserve": 100.0,
    "charge_min": 0.0,
    "charge_max": 200.0,
    "terminal_min": 150.0,
    "mass": 6350.0,
    "wing_area": 28.0,
    "cd_min": 0.024,
    "induced_k": 0.042,
    "powertrain_eff": 0.85,
    "cl_max": 1.9,
    "takeoff_thrust": 18000.0,
}


def route_key(o, d):
    return (o, d) if (o, d) in ROUTE_MINUTES else (d, o)


def clear_sky(minute_of_day):
    sunrise, sunset = 6.5 * 60, 18.75 * 60
    if minute_of_day <= sunrise or minute_of_day >= sunset:
        return 0.0
    return math.sin(math.pi * (minute_of_day - sunrise) / (sunset - sunrise)) ** 1.2


def solar_series(peak, rng, steps):
    # Smooth cloud attenuation: low-pass filtered noise in [0.55, 1].
    noise = rng.uniform(0.0, 1.0, size=steps)
    smooth = np.convolve(noise, np.ones(9) / 9.0, mode="same")
    attenuation = 1.0 - 0.45 * np.clip((smooth - 0.35) / 0.3, 0.0, 1.0)
    out = []
    for i in range(steps):
        step = i - HISTORY_DAYS * DAY_STEPS
        minute = (step * DT_MIN) % (24 * 60)
        out.append(round(peak * clear_sky(minute) * attenuation[i], 2))
    return out


def profile(minutes):
    """Level-ground-to-level-ground hop: climb at 5 m/s to a cruise level,
    cruise at 75 m/s, descend at 4 m/s; starts at lift-off speed."""
    dt = 5.0
    total = minutes * 60.0
    cruise_alt = 1500.0 if minutes >= 25 else 1200.0
    climb_t = cruise_alt / 5.0
    descent_t = cruise_alt / 4.0
    rows = []
    t = 0.0
    while t <= total + 1e-9:
        if t < climb_t:
            alt = 5.0 * t
            vz = 5.0
            v = 45.0 + (62.0 - 45.0) * min(t / 60.0, 1.0)
        elif t < total - descent_t:
            alt = cruise_alt
            vz = 0.0
            v = 62.0 + (75.0 - 62.0) * min((t - climb_t) / 60.0, 1.0)
        else:
            alt = max(cruise_alt - 4.0 * (t - (total - descent_t)), 0.0)
            vz = -4.0 if alt > 0.0 else 0.0
            frac = (t - (total - descent_t)) / descent_t
            v = 75.0 + (50.0 - 75.0) * frac
        rows.append((t, alt, v, vz))
        t += dt
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "scenarios" / "abc_demo"))
    ap.add_argument("--energies", help="JSON map 'AUA-CUR' -> kWh overriding the recorded values")
    args = ap.parse_args()
    out = Path(args.out)
    (out / "profiles").mkdir(parents=True, exist_ok=True)

    # Estimated flight energies [kWh]: output of `skygrid flight-energy` on the
    # profiles written below, rounded to 0.1 kWh.
    energies = {("AUA", "CUR"): 139.1, ("BON", "CUR"): 111.6, ("AUA", "BON"): 197.2}
    if args.energies:
        for k, v in json.loads(Path(args.energies).read_text()).items():
            o, d = k.split("-")
            energies[(o, d)] = float(v)

    for (o, d), minutes in ROUTE_MINUTES.items():
        with open(out / "profiles" / f"{o}-{d}.csv", "w", newline="\n") as f:
            f.write("t_s,alt_m,v_ms,vz_ms\n")
            for t, alt, v, vz in profile(minutes):
                f.write(f"{t:g},{alt:g},{v:.4f},{vz:g}\n")

    flights = []
    for fid, hhmm, o, d in FLIGHTS:
        key = route_key(o, d)
        flights.append({
            "id": fid,
            "sched_departure": hhmm,
            "est_flight_time": ROUTE_MINUTES[key] // DT_MIN,
            "origin": o,
            "destination": d,
            "est_energy": energies[key],
        })

    scenario = {
        "name": "abc_demo",
        "day_start": DAY_START.strftime("%Y-%m-%dT%H:%M"),
        "duration_steps": DAY_STEPS,
        "controller": {
            "dt_minutes": DT_MIN,
            "horizon_steps": HORIZON,
            "max_delay_steps": 2,
            "delay_weight": 1000.0,
            "terminal_weight": 6.0,
            "big_m": 0.0,
            "reserve_slack_penalty": 10000.0,
            "solve_time_limit": 60.0,
            "forecast": {"alpha": 0.3, "beta": 0.05, "gamma": 0.4, "season_steps": 0, "mode": "holt_winters"},
        },
        "airports": [
            {
                "id": hid,
                "bess_capacity_min": bmin,
                "bess_capacity_max": bmax,
                "bess_initial": binit,
                "bess_power_max": bpow,
                "pv_peak": peak,
                "grid_weight": q,
                "weather_file": f"weather_{hid}.csv",
            }
            for hid, peak, bmin, bmax, binit, bpow, q in AIRPORTS
        ],
        "aircraft": [
            dict({"id": kid, "initial_airport": at, "initial_energy": e}, **AIRFRAME) for kid, at, e in AIRCRAFT
        ],
        "flights": flights,
    }
    (out / "scenario.json").write_text(json.dumps(scenario, indent=2) + "\n")

    rng = np.random.default_rng(20240815)
    steps = (HISTORY_DAYS + 1) * DAY_STEPS + HORIZON
    for hid, peak, *_ in AIRPORTS:
        series = solar_series(peak, rng, steps)
        with open(out / f"weather_{hid}.csv", "w", newline="\n") as f:
            f.write("timestamp,solar_kw\n")
            for i, kw in enumerate(series):
                ts = DAY_START + timedelta(minutes=DT_MIN * (i - HISTORY_DAYS * DAY_STEPS))
                f.write(f"{ts.strftime('%Y-%m-%dT%H:%M')},{kw:g}\n")

    (out / "script_none.json").write_text(json.dumps({"events": []}, indent=2) + "\n")
    disturbance = {
        "events": [
            {"type": "energy_deviation", "flight": "F01", "delta_kwh": 40.0},
            {"type": "flight_delay", "flight": "F05", "extra_steps": 2},
            {"type": "energy_deviation", "flight": "F05", "delta_kwh": 15.0},
            {"type": "solar_scale", "airport": "BON", "from_step": 114, "to_step": 138, "factor": 0.3},
        ]
    }
    (out / "script_disturbance.json").write_text(json.dumps(disturbance, indent=2) + "\n")


if __name__ == "__main__":
    main()
