#include "skygrid/timegraph.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace skygrid {

std::string TimeExpandedGraph::node_label(int node) const {
  if (node == terminal()) return "z";
  const int h = node / (horizon + 1);
  const int n = node % (horizon + 1);
  return airports.at(static_cast<std::size_t>(h)) + "@" + std::to_string(step(n));
}

TimeExpandedGraph build_graph(int t_now, const ControllerParams& params, const std::vector<std::string>& airports,
                              const std::vector<FlightSpec>& flights, const GraphOptions& opts) {
  TimeExpandedGraph g;
  g.t_now = t_now;
  g.horizon = params.horizon_steps;
  g.airports = airports;
  const int H = g.num_airports();
  const int N = g.horizon;
  auto airport_of = [&](const std::string& id) {
    const auto it = std::find(airports.begin(), airports.end(), id);
    if (it == airports.end()) throw std::invalid_argument("unknown airport '" + id + "'");
    return static_cast<int>(it - airports.begin());
  };

  for (int h = 0; h < H; ++h) {
    for (int n = 0; n < N; ++n) {
      Edge e;
      e.tail = g.node(h, n);
      e.head = g.node(h, n + 1);
      e.kind = EdgeKind::ground;
      e.airport = h;
      e.offset = n;
      g.edges.push_back(e);
    }
  }

  for (std::size_t fi = 0; fi < flights.size(); ++fi) {
    const int src = static_cast<int>(fi);
    if (std::find(opts.exclude.begin(), opts.exclude.end(), src) != opts.exclude.end()) continue;
    const FlightSpec& f = flights[fi];
    const auto ov = opts.max_delay_override.find(src);
    const int max_delay = ov != opts.max_delay_override.end() ? ov->second : params.max_delay_steps;
    GraphFlight gf;
    gf.source_index = src;
    gf.spec = f;
    gf.origin = airport_of(f.origin);
    gf.destination = airport_of(f.destination);
    gf.max_delay = max_delay;
    const int index = static_cast<int>(g.flights.size());
    for (int tau = 0; tau <= max_delay; ++tau) {
      const int dep = f.sched_departure + tau;
      if (dep < t_now || dep > t_now + N - 1) continue;
      Edge e;
      e.offset = dep - t_now;
      e.tail = g.node(gf.origin, e.offset);
      e.head = g.node(gf.destination, e.offset + 1);
      e.kind = EdgeKind::flight;
      e.airport = gf.origin;
      e.flight = index;
      e.delay = tau;
      gf.copies.push_back(g.num_edges());
      g.edges.push_back(e);
    }
    if (!gf.copies.empty()) {
      g.flights.push_back(std::move(gf));
    }
  }

  for (int h = 0; h < H; ++h) {
    Edge e;
    e.tail = g.node(h, N);
    e.head = g.terminal();
    e.kind = EdgeKind::final;
    e.airport = h;
    e.offset = N;
    g.edges.push_back(e);
  }

  g.chains.assign(g.edges.size(), {});
  for (int b = 0; b < g.num_edges(); ++b) {
    const Edge& e = g.edges[b];
    if (e.kind != EdgeKind::flight) continue;
    const GraphFlight& gf = g.flights[e.flight];
    const int arrival = e.offset + 1;
    for (int tau = 1; tau <= gf.spec.est_flight_time - 1; ++tau) {
      const int from = arrival + tau - 1;
      if (from + 1 > N) break;
      g.chains[b].push_back(g.ground_edge(gf.destination, from));
    }
  }
  return g;
}

TimeExpandedGraph build_graph(const Scenario& s, int t_now, const GraphOptions& opts) {
  std::vector<std::string> ids;
  for (const auto& a : s.airports) ids.push_back(a.id);
  return build_graph(t_now, s.controller, ids, s.flights, opts);
}

std::vector<std::vector<double>> SparseMatrix::dense() const {
  std::vector<std::vector<double>> d(rows, std::vector<double>(cols, 0.0));
  for (const auto& t : entries) d[t.row][t.col] = t.value;
  return d;
}

std::vector<double> SparseMatrix::multiply(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != cols) throw std::invalid_argument("dimension mismatch in multiply");
  std::vector<double> y(rows, 0.0);
  for (const auto& t : entries) y[t.row] += t.value * x[t.col];
  return y;
}

namespace {

SparseMatrix finish(int rows, int cols, std::vector<Triplet> t) {
  std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i].row == t[i - 1].row && t[i].col == t[i - 1].col) {
      throw std::logic_error("duplicate matrix entry");
    }
  }
  return SparseMatrix{rows, cols, std::move(t)};
}

}  // namespace

SparseMatrix incidence_matrix(const TimeExpandedGraph& g) {
  std::vector<Triplet> t;
  for (int a = 0; a < g.num_edges(); ++a) {
    t.push_back({g.edges[a].tail, a, -1.0});
    t.push_back({g.edges[a].head, a, 1.0});
  }
  return finish(g.num_nodes(), g.num_edges(), std::move(t));
}

SparseMatrix virtual_edge_matrix(const TimeExpandedGraph& g) {
  std::vector<Triplet> t;
  for (int b = 0; b < g.num_edges(); ++b) {
    for (int a : g.chains[b]) t.push_back({a, b, 1.0});
  }
  return finish(g.num_edges(), g.num_edges(), std::move(t));
}

SparseMatrix ground_selector(const TimeExpandedGraph& g, double big_m) {
  std::vector<Triplet> t;
  for (int a = 0; a < g.num_ground(); ++a) t.push_back({a, a, big_m});
  return finish(g.num_ground(), g.num_edges(), std::move(t));
}

SparseMatrix flight_selector(const TimeExpandedGraph& g) {
  std::vector<Triplet> t;
  for (std::size_t f = 0; f < g.flights.size(); ++f) {
    for (int a : g.flights[f].copies) t.push_back({static_cast<int>(f), a, 1.0});
  }
  return finish(static_cast<int>(g.flights.size()), g.num_edges(), std::move(t));
}

SparseMatrix flight_energy_matrix(const TimeExpandedGraph& g) {
  std::vector<Triplet> t;
  for (std::size_t f = 0; f < g.flights.size(); ++f) {
    for (int a : g.flights[f].copies) t.push_back({static_cast<int>(f), a, g.flights[f].spec.est_energy});
  }
  return finish(static_cast<int>(g.flights.size()), g.num_edges(), std::move(t));
}

SparseMatrix cumulative_charge_operator(const TimeExpandedGraph& g) {
  std::vector<Triplet> t;
  const int N = g.horizon;
  for (int h = 0; h < g.num_airports(); ++h) {
    for (int row = 0; row < N; ++row) {
      for (int n = 0; n <= row; ++n) t.push_back({row, h * N + n, 1.0});
    }
  }
  return finish(N, g.num_ground(), std::move(t));
}

void write_dot(const TimeExpandedGraph& g, std::ostream& out) {
  out << "digraph timegraph {\n  rankdir=LR;\n";
  for (int v = 0; v < g.num_nodes(); ++v) {
    out << "  n" << v << " [label=\"" << g.node_label(v) << "\"];\n";
  }
  for (int a = 0; a < g.num_edges(); ++a) {
    const Edge& e = g.edges[a];
    out << "  n" << e.tail << " -> n" << e.head;
    switch (e.kind) {
      case EdgeKind::ground:
        out << " [color=gray]";
        break;
      case EdgeKind::flight: {
        const GraphFlight& f = g.flights[e.flight];
        out << " [color=blue,label=\"" << f.spec.id << "+" << e.delay << "\"]";
        break;
      }
      case EdgeKind::final:
        out << " [style=dashed]";
        break;
    }
    out << ";\n";
  }
  out << "}\n";
}

}  // namespace skygrid
