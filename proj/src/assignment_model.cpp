#include "skygrid/assignment_model.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace skygrid {

EnergyEstimator::EnergyEstimator(const Scenario& s) {
  for (const auto& a : s.aircraft) estimate_.push_back(a.initial_energy);
}

void EnergyEstimator::measured(int k, double e) { estimate_.at(static_cast<std::size_t>(k)) = e; }
void EnergyEstimator::departed(int k, double est) { estimate_.at(static_cast<std::size_t>(k)) -= est; }
void EnergyEstimator::charged(int k, double kwh) { estimate_.at(static_cast<std::size_t>(k)) += kwh; }

int source_node(const TimeExpandedGraph& g, const AircraftMeasurement& m) {
  if (m.on_ground) return g.node(m.airport, 0);
  const int offset = std::clamp(m.eta - g.t_now, 0, g.horizon);
  return g.node(m.airport, offset);
}

namespace {

std::string k_tag(int k) { return "k" + std::to_string(k); }

std::vector<bool> reachable_nodes(const TimeExpandedGraph& g, int source) {
  std::vector<std::vector<int>> out(g.num_nodes());
  for (const auto& e : g.edges) out[e.tail].push_back(e.head);
  std::vector<bool> seen(g.num_nodes(), false);
  std::queue<int> q;
  q.push(source);
  seen[source] = true;
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (int w : out[v]) {
      if (!seen[w]) {
        seen[w] = true;
        q.push(w);
      }
    }
  }
  return seen;
}

}  // namespace

Problem build_problem(const TimeExpandedGraph& g, const MeasurementSnapshot& snap, const std::vector<double>& energies,
                      const std::vector<std::vector<double>>& forecast, const Scenario& s, const BuildOptions& opts) {
  const int N = g.horizon;
  const int H = g.num_airports();
  const int K = static_cast<int>(s.aircraft.size());
  const int E = g.num_edges();
  const int G = g.num_ground();
  if (static_cast<int>(forecast.size()) != H) throw std::invalid_argument("one forecast series per airport required");
  for (const auto& f : forecast) {
    if (static_cast<int>(f.size()) != N) throw std::invalid_argument("forecast length must equal the horizon");
  }
  if (static_cast<int>(snap.aircraft.size()) != K || static_cast<int>(energies.size()) != K ||
      static_cast<int>(snap.airports.size()) != H) {
    throw std::invalid_argument("snapshot does not match the scenario");
  }

  Problem p;
  p.graph = g;
  p.forecast = forecast;
  p.dt_hours = s.controller.dt_hours();
  const double dt = p.dt_hours;
  const double big_m = s.big_m();
  MilpInstance& m = p.instance;
  std::vector<Term> objective;

  const auto C = virtual_edge_matrix(g);
  // chain_of_ground[a]: flight copies b whose chain contains ground edge a.
  std::vector<std::vector<int>> covering(G);
  for (const auto& t : C.entries) covering[t.row].push_back(t.col);
  // Flight copies grouped by tail offset.
  std::vector<std::vector<int>> copies_at(N);
  for (int a = 0; a < E; ++a) {
    if (g.edges[a].kind == EdgeKind::flight) copies_at[g.edges[a].offset].push_back(a);
  }

  p.index.aircraft.resize(K);
  for (int k = 0; k < K; ++k) {
    const AircraftSpec& spec = s.aircraft[k];
    auto& ix = p.index.aircraft[k];
    const std::string tag = k_tag(k);
    ix.source_node = source_node(g, snap.aircraft[k]);
    ix.initial_energy = energies[k];
    const auto reach = reachable_nodes(g, ix.source_node);
    for (int a = 0; a < E; ++a) {
      const bool fixed = opts.fix_unreachable && !reach[g.edges[a].tail];
      ix.x.push_back(m.add_variable({"x_" + tag + "_e" + std::to_string(a), VarKind::binary, 0.0, fixed ? 0.0 : 1.0}));
    }
    for (int a = 0; a < G; ++a) {
      ix.charge.push_back(
          m.add_variable({"P_" + tag + "_g" + std::to_string(a), VarKind::continuous, spec.charge_min, spec.charge_max}));
    }
    for (int n = 1; n <= N; ++n) {
      ix.energy.push_back(
          m.add_variable({"soc_" + tag + "_n" + std::to_string(n), VarKind::continuous, spec.batt_min, spec.batt_max}));
    }
    if (opts.soft_reserve) {
      for (int n = 1; n <= N; ++n) {
        ix.reserve_slack.push_back(
            m.add_variable({"rslack_" + tag + "_n" + std::to_string(n), VarKind::continuous, 0.0, spec.reserve}));
        objective.push_back({ix.reserve_slack.back(), s.controller.reserve_slack_penalty});
      }
    }

    // Flow conservation, one row per node.
    std::vector<LinConstraint> flow(g.num_nodes());
    for (int v = 0; v < g.num_nodes(); ++v) {
      flow[v].name = "flow_" + tag + "_v" + std::to_string(v);
      flow[v].sense = Sense::eq;
      flow[v].rhs = v == ix.source_node ? -1.0 : v == g.terminal() ? 1.0 : 0.0;
    }
    for (int a = 0; a < E; ++a) {
      flow[g.edges[a].tail].terms.push_back({ix.x[a], -1.0});
      flow[g.edges[a].head].terms.push_back({ix.x[a], 1.0});
    }
    for (auto& row : flow) m.add_constraint(std::move(row));

    // Virtual flight edges follow their flight copy; no charging on them.
    for (int a = 0; a < G; ++a) {
      if (covering[a].empty()) continue;
      LinConstraint chain{"chain_" + tag + "_g" + std::to_string(a), {{ix.x[a], 1.0}}, Sense::ge, 0.0};
      LinConstraint block{"nochg_" + tag + "_g" + std::to_string(a), {{ix.charge[a], 1.0}}, Sense::le, big_m};
      for (int b : covering[a]) {
        chain.terms.push_back({ix.x[b], -1.0});
        block.terms.push_back({ix.x[b], big_m});
      }
      m.add_constraint(std::move(chain));
      m.add_constraint(std::move(block));
    }
    // Charging only on traversed ground edges.
    for (int a = 0; a < G; ++a) {
      m.add_constraint({"gate_" + tag + "_g" + std::to_string(a), {{ix.charge[a], 1.0}, {ix.x[a], -big_m}}, Sense::le, 0.0});
    }

    // Energy dynamics: E_n = E_{n-1} + dt * sum_h P_(h, n-1) - sum_f Ehat_f x_(copies leaving at n-1).
    for (int n = 1; n <= N; ++n) {
      LinConstraint row;
      row.name = "soc_dyn_" + tag + "_n" + std::to_string(n);
      row.sense = Sense::eq;
      row.terms.push_back({ix.energy[n - 1], 1.0});
      if (n == 1) {
        row.rhs = energies[k];
      } else {
        row.terms.push_back({ix.energy[n - 2], -1.0});
      }
      for (int h = 0; h < H; ++h) row.terms.push_back({ix.charge[g.ground_edge(h, n - 1)], -dt});
      for (int b : copies_at[n - 1]) {
        row.terms.push_back({ix.x[b], g.flights[g.edges[b].flight].spec.est_energy});
      }
      m.add_constraint(std::move(row));
    }
    // Reserve after a flight: E_(n+1) >= E_res * (membership of ground edges at offset n).
    for (int n = 0; n < N; ++n) {
      LinConstraint row;
      row.name = "reserve_" + tag + "_n" + std::to_string(n + 1);
      row.sense = Sense::ge;
      row.rhs = 0.0;
      row.terms.push_back({ix.energy[n], 1.0});
      bool any = false;
      for (int h = 0; h < H; ++h) {
        for (int b : covering[g.ground_edge(h, n)]) {
          row.terms.push_back({ix.x[b], -spec.reserve});
          any = true;
        }
      }
      if (!any || spec.reserve == 0.0) continue;
      if (opts.soft_reserve) row.terms.push_back({ix.reserve_slack[n], 1.0});
      m.add_constraint(std::move(row));
    }
    // Terminal set.
    m.add_constraint({"terminal_" + tag, {{ix.energy[N - 1], 1.0}}, Sense::ge, spec.terminal_min});
  }

  // Airports.
  p.index.airports.resize(H);
  for (int h = 0; h < H; ++h) {
    const AirportSpec& spec = s.airports[h];
    auto& ix = p.index.airports[h];
    const std::string tag = "h" + std::to_string(h);
    ix.initial_energy = snap.airports[h].bess_energy;
    double grid_cap = spec.bess_power_max;
    for (const auto& a : s.aircraft) grid_cap += a.charge_max;
    for (int n = 0; n < N; ++n) {
      ix.bess_power.push_back(m.add_variable({"Pb_" + tag + "_n" + std::to_string(n), VarKind::continuous,
                                              -spec.bess_power_max, spec.bess_power_max}));
      ix.bess_energy.push_back(m.add_variable({"bess_" + tag + "_n" + std::to_string(n + 1), VarKind::continuous,
                                               spec.bess_capacity_min, spec.bess_capacity_max}));
      ix.grid_power.push_back(
          m.add_variable({"Pgr_" + tag + "_n" + std::to_string(n), VarKind::continuous, 0.0, grid_cap}));
    }
    for (int n = 0; n < N; ++n) {
      LinConstraint dyn;
      dyn.name = "bess_dyn_" + tag + "_n" + std::to_string(n + 1);
      dyn.sense = Sense::eq;
      dyn.terms.push_back({ix.bess_energy[n], 1.0});
      dyn.terms.push_back({ix.bess_power[n], dt});
      if (n == 0) dyn.rhs = ix.initial_energy;
      else dyn.terms.push_back({ix.bess_energy[n - 1], -1.0});
      m.add_constraint(std::move(dyn));

      LinConstraint bal;
      bal.name = "grid_" + tag + "_n" + std::to_string(n);
      bal.sense = Sense::ge;
      bal.rhs = -forecast[h][n];
      bal.terms.push_back({ix.grid_power[n], 1.0});
      for (int k = 0; k < K; ++k) bal.terms.push_back({p.index.aircraft[k].charge[g.ground_edge(h, n)], -1.0});
      bal.terms.push_back({ix.bess_power[n], 1.0});
      m.add_constraint(std::move(bal));

      objective.push_back({ix.grid_power[n], spec.grid_weight});
    }
    if (s.controller.terminal_weight != 0.0) objective.push_back({ix.bess_energy[N - 1], -s.controller.terminal_weight});
  }

  // Delay cost on flight copies.
  if (s.controller.delay_weight != 0.0) {
    for (int k = 0; k < K; ++k) {
      for (int a = 0; a < E; ++a) {
        const Edge& e = g.edges[a];
        if (e.kind != EdgeKind::flight || e.delay == 0) continue;
        objective.push_back({p.index.aircraft[k].x[a], s.controller.delay_weight * e.delay * e.delay});
      }
    }
  }
  m.set_objective(std::move(objective));

  // Every in-horizon flight is flown exactly once.
  for (std::size_t f = 0; f < g.flights.size(); ++f) {
    LinConstraint row;
    row.name = "assign_" + g.flights[f].spec.id;
    row.sense = Sense::eq;
    row.rhs = 1.0;
    for (int k = 0; k < K; ++k) {
      for (int a : g.flights[f].copies) row.terms.push_back({p.index.aircraft[k].x[a], 1.0});
    }
    m.add_constraint(std::move(row));
  }
  return p;
}

const FlightAssignment* FleetPlan::assignment_of(int flight_index) const {
  for (const auto& a : assignments) {
    if (a.flight_index == flight_index) return &a;
  }
  return nullptr;
}

FleetPlan decode_plan(const MilpSolution& sol, const Problem& p, const Scenario& s) {
  const TimeExpandedGraph& g = p.graph;
  const int N = g.horizon;
  const int H = g.num_airports();
  FleetPlan plan;
  plan.t_now = g.t_now;
  plan.horizon = N;
  plan.objective = sol.objective;

  std::vector<std::vector<int>> out(g.num_nodes());
  for (int a = 0; a < g.num_edges(); ++a) out[g.edges[a].tail].push_back(a);

  for (std::size_t k = 0; k < p.index.aircraft.size(); ++k) {
    const auto& ix = p.index.aircraft[k];
    AircraftPlan ap;
    ap.id = s.aircraft[k].id;
    ap.charge.assign(N, 0.0);
    ap.location.assign(N + 1, -1);
    int v = ix.source_node;
    int used = 0;
    for (int a = 0; a < g.num_edges(); ++a) used += sol.value(ix.x[a]) > 0.5;
    while (v != g.terminal()) {
      int next = -1;
      for (int a : out[v]) {
        if (sol.value(ix.x[a]) > 0.5) {
          if (next >= 0) throw PlanError("aircraft " + ap.id + ": path branches at " + g.node_label(v));
          next = a;
        }
      }
      if (next < 0) throw PlanError("aircraft " + ap.id + ": path breaks at " + g.node_label(v));
      ap.path.push_back(next);
      v = g.edges[next].head;
    }
    if (static_cast<int>(ap.path.size()) != used) {
      throw PlanError("aircraft " + ap.id + ": selected edges outside the source-to-terminal path");
    }
    for (int a : ap.path) {
      const Edge& e = g.edges[a];
      if (e.kind == EdgeKind::ground) {
        ap.location[e.offset] = e.airport;
        ap.location[e.offset + 1] = e.airport;
      } else if (e.kind == EdgeKind::final) {
        ap.location[N] = e.airport;
      } else {
        ap.location[e.offset] = e.airport;
      }
    }
    for (int h = 0; h < H; ++h) {
      for (int n = 0; n < N; ++n) ap.charge[n] += sol.value(ix.charge[g.ground_edge(h, n)]);
    }
    ap.energy.push_back(ix.initial_energy);
    for (int n = 0; n < N; ++n) ap.energy.push_back(sol.value(ix.energy[n]));
    for (const auto& v2 : ix.reserve_slack) ap.reserve_slack.push_back(sol.value(v2));
    plan.aircraft.push_back(std::move(ap));

    for (int a : plan.aircraft.back().path) {
      const Edge& e = g.edges[a];
      if (e.kind != EdgeKind::flight) continue;
      const GraphFlight& f = g.flights[e.flight];
      FlightAssignment fa;
      fa.flight = f.spec.id;
      fa.flight_index = f.source_index;
      fa.aircraft = static_cast<int>(k);
      fa.departure = g.step(e.offset);
      fa.delay = fa.departure - f.spec.sched_departure;
      fa.edge = a;
      plan.assignments.push_back(fa);
    }
  }
  std::sort(plan.assignments.begin(), plan.assignments.end(),
            [](const FlightAssignment& a, const FlightAssignment& b) { return a.flight_index < b.flight_index; });
  for (std::size_t f = 0; f < g.flights.size(); ++f) {
    int n = 0;
    for (const auto& a : plan.assignments) n += a.flight_index == g.flights[f].source_index;
    if (n != 1) {
      throw PlanError("flight " + g.flights[f].spec.id + " assigned " + std::to_string(n) + " times");
    }
  }

  for (int h = 0; h < H; ++h) {
    const auto& ix = p.index.airports[h];
    AirportPlan hp;
    hp.id = s.airports[h].id;
    hp.forecast = p.forecast[h];
    hp.bess_energy.push_back(ix.initial_energy);
    for (int n = 0; n < N; ++n) {
      hp.bess_power.push_back(sol.value(ix.bess_power[n]));
      hp.grid_power.push_back(sol.value(ix.grid_power[n]));
      hp.bess_energy.push_back(sol.value(ix.bess_energy[n]));
      double apron = 0.0;
      for (const auto& k : p.index.aircraft) apron += sol.value(k.charge[g.ground_edge(h, n)]);
      hp.apron_power.push_back(apron);
      hp.grid_slack.push_back(hp.grid_power[n] - std::max(0.0, apron - hp.forecast[n] - hp.bess_power[n]));
    }
    plan.airports.push_back(std::move(hp));
  }
  return plan;
}

nlohmann::json to_json(const FleetPlan& plan, const Scenario& s) {
  using nlohmann::json;
  json j;
  j["t_now"] = plan.t_now;
  j["horizon"] = plan.horizon;
  j["objective"] = plan.objective;
  j["assignments"] = json::array();
  for (const auto& a : plan.assignments) {
    j["assignments"].push_back({{"flight", a.flight},
                                {"aircraft", s.aircraft.at(static_cast<std::size_t>(a.aircraft)).id},
                                {"departure", a.departure},
                                {"delay", a.delay}});
  }
  j["aircraft"] = json::array();
  for (const auto& a : plan.aircraft) {
    json locs = json::array();
    for (int l : a.location) locs.push_back(l < 0 ? json(nullptr) : json(s.airports[l].id));
    j["aircraft"].push_back({{"id", a.id}, {"charge_kw", a.charge}, {"energy_kwh", a.energy}, {"location", locs}});
  }
  j["airports"] = json::array();
  for (const auto& h : plan.airports) {
    j["airports"].push_back({{"id", h.id},
                             {"bess_power_kw", h.bess_power},
                             {"grid_power_kw", h.grid_power},
                             {"apron_power_kw", h.apron_power},
                             {"solar_forecast_kw", h.forecast},
                             {"bess_energy_kwh", h.bess_energy}});
  }
  return j;
}

std::optional<std::vector<double>> warm_start_from(const FleetPlan& previous, const TimeExpandedGraph& pg,
                                                   const Problem& p) {
  const TimeExpandedGraph& g = p.graph;
  std::vector<double> values(p.instance.num_variables(), 0.0);
  if (previous.aircraft.size() != p.index.aircraft.size()) return std::nullopt;
  for (std::size_t k = 0; k < previous.aircraft.size(); ++k) {
    // Old path edges keyed by (tail airport, absolute tail step).
    struct Old {
      int airport, step;
      const Edge* e;
    };
    std::vector<Old> old;
    for (int a : previous.aircraft[k].path) {
      const Edge& e = pg.edges[a];
      old.push_back({e.tail == pg.terminal() ? -1 : e.tail / (pg.horizon + 1), pg.step(e.offset), &e});
    }
    const auto& ix = p.index.aircraft[k];
    int v = ix.source_node;
    while (v != g.terminal()) {
      const int h = v / (g.horizon + 1);
      const int off = v % (g.horizon + 1);
      const int step = g.step(off);
      const Old* match = nullptr;
      for (const auto& o : old) {
        if (o.airport == h && o.step == step && o.e->kind != EdgeKind::final) match = &o;
      }
      int chosen = -1;
      if (match && match->e->kind == EdgeKind::flight) {
        const int src = pg.flights[match->e->flight].source_index;
        for (const auto& f : g.flights) {
          if (f.source_index != src) continue;
          for (int c : f.copies) {
            if (g.edges[c].offset == off) chosen = c;
          }
        }
        if (chosen < 0) return std::nullopt;
      } else if (off < g.horizon) {
        chosen = g.ground_edge(h, off);
      } else {
        chosen = g.first_final_edge() + h;
      }
      if (p.instance.var(ix.x[chosen]).hi < 0.5) return std::nullopt;
      values[ix.x[chosen].index] = 1.0;
      v = g.edges[chosen].head;
    }
  }
  return values;
}

}  // namespace skygrid
