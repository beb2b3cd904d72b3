#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles/graph_oracle.hpp"
#include "skygrid/timegraph.hpp"

using namespace skygrid;

namespace {

ControllerParams params(int N, int delay) {
  ControllerParams p;
  p.horizon_steps = N;
  p.max_delay_steps = delay;
  return p;
}

FlightSpec flight(const std::string& id, int sd, int dur, const std::string& o, const std::string& d,
                  double e = 10.0) {
  FlightSpec f;
  f.id = id;
  f.sched_departure = sd;
  f.est_flight_time = dur;
  f.origin = o;
  f.destination = d;
  f.est_energy = e;
  return f;
}

int count(const TimeExpandedGraph& g, EdgeKind k) {
  int c = 0;
  for (const auto& e : g.edges) c += e.kind == k;
  return c;
}

}  // namespace

TEST_CASE("empty schedule gives ground and final edges only") {
  const auto g = build_graph(0, params(3, 0), {"A", "B"}, {});
  CHECK(g.num_nodes() == 9);
  CHECK(count(g, EdgeKind::ground) == 6);
  CHECK(count(g, EdgeKind::final) == 2);
  CHECK(count(g, EdgeKind::flight) == 0);
  CHECK(g.flights.empty());
}

TEST_CASE("one flight with one delay step contributes two copies") {
  const auto g = build_graph(10, params(6, 1), {"A", "B"}, {flight("F1", 11, 3, "A", "B")});
  CHECK(count(g, EdgeKind::flight) == 2);
  REQUIRE(g.flights.size() == 1);
  CHECK(g.flights[0].copies.size() == 2);
  // The first copy departs offset 1, arrives offset 2, chain covers B 2->3 and 3->4.
  const int b = g.flights[0].copies[0];
  CHECK(g.chains[b] == std::vector<int>{g.ground_edge(1, 2), g.ground_edge(1, 3)});
}

TEST_CASE("flight edge and chain counts for the three-airport example") {
  const auto g = build_graph(0, params(24, 2), {"A", "B", "C"},
                             {flight("F1", 3, 3, "A", "B"), flight("F2", 10, 3, "C", "A")});
  CHECK(count(g, EdgeKind::flight) == 6);
  std::size_t memberships = 0;
  for (const auto& c : g.chains) memberships += c.size();
  CHECK(memberships == 12);
  const auto C = virtual_edge_matrix(g);
  CHECK(C.entries.size() == 12);
}

TEST_CASE("chains are clipped at the horizon end") {
  const auto g = build_graph(0, params(4, 1), {"A", "B"}, {flight("F1", 2, 5, "A", "B")});
  REQUIRE(g.flights.size() == 1);
  REQUIRE(g.flights[0].copies.size() == 2);
  // copy 0 arrives at offset 3: room for one chain edge; copy 1 arrives at 4: none.
  CHECK(g.chains[g.flights[0].copies[0]].size() == 1);
  CHECK(g.chains[g.flights[0].copies[1]].empty());
}

TEST_CASE("copies outside the horizon are dropped individually") {
  // Departure at the last step would arrive past the horizon: excluded.
  const auto g = build_graph(0, params(4, 2), {"A", "B"}, {flight("F1", 2, 1, "A", "B")});
  REQUIRE(g.flights.size() == 1);
  CHECK(g.flights[0].copies.size() == 2);
  // A flight scheduled before t_now keeps only its later copies.
  const auto late = build_graph(5, params(4, 2), {"A", "B"}, {flight("F1", 4, 1, "A", "B")});
  REQUIRE(late.flights.size() == 1);
  CHECK(late.flights[0].copies.size() == 2);
  CHECK(late.edges[late.flights[0].copies[0]].delay == 1);
  // Excluded flights vanish entirely.
  GraphOptions opts;
  opts.exclude = {0};
  CHECK(build_graph(0, params(4, 2), {"A", "B"}, {flight("F1", 1, 1, "A", "B")}, opts).flights.empty());
}

TEST_CASE("delay override widens one flight only") {
  GraphOptions opts;
  opts.max_delay_override[1] = 3;
  const auto g = build_graph(0, params(10, 1), {"A", "B"},
                             {flight("F1", 1, 1, "A", "B"), flight("F2", 1, 1, "B", "A")}, opts);
  CHECK(g.flights[0].copies.size() == 2);
  CHECK(g.flights[1].copies.size() == 4);
}

TEST_CASE("matrix shapes and small identities") {
  const auto g = build_graph(0, params(3, 1), {"A", "B"}, {flight("F1", 0, 1, "A", "B", 7.5)});
  const auto B = incidence_matrix(g);
  CHECK(B.rows == g.num_nodes());
  CHECK(B.cols == g.num_edges());
  // Column sums vanish.
  const auto ones = std::vector<double>(g.num_nodes(), 1.0);
  std::vector<double> colsum(B.cols, 0.0);
  for (const auto& t : B.entries) colsum[t.col] += t.value;
  for (double v : colsum) CHECK(v == 0.0);
  // Single ground edge column is (-1, +1).
  const auto d = B.dense();
  CHECK(d[g.node(0, 0)][0] == -1.0);
  CHECK(d[g.node(0, 1)][0] == 1.0);
  // Flight with duration 1 has no chain.
  CHECK(virtual_edge_matrix(g).entries.empty());
  const auto A = flight_selector(g);
  const auto F = flight_energy_matrix(g);
  double arow = 0.0, frow = 0.0;
  for (const auto& t : A.entries) arow += t.value;
  for (const auto& t : F.entries) frow += t.value;
  CHECK(arow == 2.0);
  CHECK(frow == doctest::Approx(2 * 7.5));
  const auto M = ground_selector(g, 99.0);
  CHECK(M.rows == g.num_ground());
  CHECK(M.entries.size() == static_cast<std::size_t>(g.num_ground()));
  // Cumulative operator on a unit charge at the first step is a step function.
  const auto G = cumulative_charge_operator(g);
  std::vector<double> p(g.num_ground(), 0.0);
  p[0] = 1.0;
  CHECK(G.multiply(p) == std::vector<double>{1.0, 1.0, 1.0});
}

TEST_CASE("path telescopes to destination minus origin") {
  const auto g = build_graph(0, params(4, 0), {"A", "B"}, {flight("F1", 1, 2, "A", "B")});
  const auto B = incidence_matrix(g);
  std::vector<double> x(g.num_edges(), 0.0);
  x[g.ground_edge(0, 0)] = 1;
  x[g.flights[0].copies[0]] = 1;
  x[g.ground_edge(1, 2)] = 1;
  x[g.ground_edge(1, 3)] = 1;
  x[g.first_final_edge() + 1] = 1;
  const auto r = B.multiply(x);
  for (int v = 0; v < g.num_nodes(); ++v) {
    const double want = v == g.node(0, 0) ? -1.0 : v == g.terminal() ? 1.0 : 0.0;
    CHECK(r[v] == want);
  }
}

TEST_CASE("builder matches brute-force set construction on random configurations") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const int H = std::uniform_int_distribution<int>(1, 3)(rng);
    const int N = std::uniform_int_distribution<int>(1, 8)(rng);
    const int delay = std::uniform_int_distribution<int>(0, 2)(rng);
    const int t_now = std::uniform_int_distribution<int>(0, 5)(rng);
    const int nf = H < 2 ? 0 : std::uniform_int_distribution<int>(0, 3)(rng);
    std::vector<std::string> ids;
    for (int h = 0; h < H; ++h) ids.push_back(std::string(1, char('A' + h)));
    std::vector<FlightSpec> flights;
    std::vector<oracle::OFlight> of;
    for (int f = 0; f < nf; ++f) {
      const int o = std::uniform_int_distribution<int>(0, H - 1)(rng);
      int d = std::uniform_int_distribution<int>(0, H - 2)(rng);
      if (d >= o) ++d;
      const int sd = t_now + std::uniform_int_distribution<int>(-1, N)(rng);
      const int dur = std::uniform_int_distribution<int>(1, 4)(rng);
      const double e = std::uniform_int_distribution<int>(1, 50)(rng);
      flights.push_back(flight("F" + std::to_string(f), std::max(sd, 0), dur, ids[o], ids[d], e));
      of.push_back({std::max(sd, 0), dur, o, d, e});
    }
    ControllerParams p = params(N, delay);
    const auto g = build_graph(t_now, p, ids, flights);
    const auto o = oracle::brute_graph(H, N, t_now, delay, of);
    INFO("trial " << trial);
    REQUIRE(g.num_nodes() == static_cast<int>(o.nodes.size()));
    REQUIRE(g.num_edges() == static_cast<int>(o.edges.size()));
    for (int a = 0; a < g.num_edges(); ++a) {
      CHECK(g.edges[a].tail == oracle::node_index(o, o.edges[a].tail));
      CHECK(g.edges[a].head == oracle::node_index(o, o.edges[a].head));
    }
    CHECK(incidence_matrix(g).dense() == oracle::brute_B(o));
    CHECK(virtual_edge_matrix(g).dense() == oracle::brute_C(o, of));
    CHECK(ground_selector(g, 123.0).dense() == oracle::brute_M(o, 123.0));
    CHECK(flight_selector(g).dense() == oracle::brute_AF(o, of, false));
    CHECK(flight_energy_matrix(g).dense() == oracle::brute_AF(o, of, true));
    CHECK(cumulative_charge_operator(g).dense() == oracle::brute_cumulative(H, N));
  }
}

TEST_CASE("construction is deterministic and DOT export labels nodes") {
  const std::vector<FlightSpec> fl{flight("F1", 1, 2, "A", "B"), flight("F2", 2, 1, "B", "A")};
  const auto g1 = build_graph(0, params(5, 1), {"A", "B"}, fl);
  const auto g2 = build_graph(0, params(5, 1), {"A", "B"}, fl);
  CHECK(incidence_matrix(g1) == incidence_matrix(g2));
  CHECK(virtual_edge_matrix(g1) == virtual_edge_matrix(g2));
  std::ostringstream a, b;
  write_dot(g1, a);
  write_dot(g2, b);
  CHECK(a.str() == b.str());
  CHECK(a.str().find("\"A@0\"") != std::string::npos);
  CHECK(a.str().find("F2+1") != std::string::npos);
}
