#pragma once

// Time-expanded flight graph over a receding horizon and the sparse selector
// matrices derived from it.
//
// Node layout: airport h at horizon offset n (0..N) has id h*(N+1) + n; the
// terminal node z has id H*(N+1).
// Edge layout: ground edges first (airport-major, then time; ground edge of
// airport h leaving offset n has id h*N + n), then flight copies (flight
// order, then delay), then one virtual-final edge per airport.

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "skygrid/scenario.hpp"

namespace skygrid {

enum class EdgeKind { ground, flight, final };

struct Edge {
  int tail = -1;
  int head = -1;
  EdgeKind kind = EdgeKind::ground;
  /// Ground and final edges: the airport. Flight edges: the origin airport.
  int airport = -1;
  /// Horizon offset of the tail node.
  int offset = 0;
  /// Flight edges: index into TimeExpandedGraph::flights and the delay.
  int flight = -1;
  int delay = 0;
};

struct GraphFlight {
  /// Index into the scenario flight list.
  int source_index = -1;
  FlightSpec spec;
  int origin = -1;
  int destination = -1;
  int max_delay = 0;
  /// Edge ids of the copies present in the horizon, ascending delay.
  std::vector<int> copies;
};

struct TimeExpandedGraph {
  int t_now = 0;
  int horizon = 0;  // N
  std::vector<std::string> airports;
  std::vector<Edge> edges;
  std::vector<GraphFlight> flights;
  /// Per edge: the ground edges of its virtual-flight chain (empty unless flight).
  std::vector<std::vector<int>> chains;

  int num_airports() const { return static_cast<int>(airports.size()); }
  int num_nodes() const { return num_airports() * (horizon + 1) + 1; }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_ground() const { return num_airports() * horizon; }
  int node(int airport, int offset) const { return airport * (horizon + 1) + offset; }
  int terminal() const { return num_airports() * (horizon + 1); }
  int ground_edge(int airport, int offset) const { return airport * horizon + offset; }
  int first_final_edge() const { return num_edges() - num_airports(); }
  /// Absolute step of a node offset.
  int step(int offset) const { return t_now + offset; }
  std::string node_label(int node) const;
};

struct GraphOptions {
  /// Scenario flight indices that must not appear (already departed).
  std::vector<int> exclude;
  /// Per-flight overrides of the maximum delay in steps.
  std::map<int, int> max_delay_override;
};

/// A flight copy departing at step s is present iff t_now <= s <= t_now + N - 1;
/// a flight appears iff at least one copy is present and it is not excluded.
TimeExpandedGraph build_graph(int t_now, const ControllerParams& params,
                              const std::vector<std::string>& airports,
                              const std::vector<FlightSpec>& flights, const GraphOptions& opts = {});
TimeExpandedGraph build_graph(const Scenario& s, int t_now, const GraphOptions& opts = {});

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
  friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Triplets sorted by (row, col) without duplicates.
struct SparseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<Triplet> entries;

  std::vector<std::vector<double>> dense() const;
  std::vector<double> multiply(const std::vector<double>& x) const;
  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;
};

SparseMatrix incidence_matrix(const TimeExpandedGraph& g);
SparseMatrix virtual_edge_matrix(const TimeExpandedGraph& g);
SparseMatrix ground_selector(const TimeExpandedGraph& g, double big_m);
SparseMatrix flight_selector(const TimeExpandedGraph& g);
SparseMatrix flight_energy_matrix(const TimeExpandedGraph& g);
SparseMatrix cumulative_charge_operator(const TimeExpandedGraph& g);

void write_dot(const TimeExpandedGraph& g, std::ostream& out);

}  // namespace skygrid
