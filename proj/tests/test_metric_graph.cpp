#include <algorithm>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "relhyp/metric_graph.hpp"

using namespace relhyp;

namespace {

// Independent all-pairs reference: Floyd-Warshall straight off the edge list.
std::vector<std::vector<double>> floyd_warshall(const MetricGraph& g) {
  int n = g.vertex_count();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, kInf));
  for (int i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const Edge& e : g.edges()) {
    d[e.u][e.v] = std::min(d[e.u][e.v], e.length);
    d[e.v][e.u] = d[e.u][e.v];
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

// Exhaustive simple-path search used only on tiny inputs.
void dfs_paths(const MetricGraph& g, Vertex cur, Vertex to,
               std::vector<char>& used, double len, double& best) {
  if (len >= best) return;
  if (cur == to) {
    best = len;
    return;
  }
  for (const auto& [w, elen] : g.neighbors(cur)) {
    if (used[w]) continue;
    used[w] = 1;
    dfs_paths(g, w, to, used, len + elen, best);
    used[w] = 0;
  }
}

double brute_force_distance(const MetricGraph& g, Vertex from, Vertex to,
                            const VertexSet& forbidden) {
  std::vector<char> used(g.vertex_count(), 0);
  for (Vertex v : forbidden) used[v] = 1;
  used[from] = 1;
  double best = kInf;
  dfs_paths(g, from, to, used, 0.0, best);
  return best;
}

}  // namespace

TEST_CASE("shortest path on a line") {
  auto g = line_graph(4);
  auto p = shortest_path(g, 0, 3);
  REQUIRE(p.has_value());
  CHECK(p->vertices == std::vector<Vertex>{0, 1, 2, 3});
  CHECK(p->length() == doctest::Approx(3.0));
  CHECK(p->geodesic);

  CHECK_FALSE(shortest_path(g, 0, 3, VertexSet{1}).has_value());
}

TEST_CASE("grid shortest path with forbidden center matches exhaustive search") {
  auto g = grid_graph(5, 5);
  Vertex center = 2 * 5 + 2;
  auto p = shortest_path(g, 0, 24, VertexSet{center});
  REQUIRE(p.has_value());
  CHECK(p->length() ==
        doctest::Approx(brute_force_distance(g, 0, 24, VertexSet{center})));
  // corner-to-corner detour around the center costs nothing on a grid
  CHECK(p->length() == doctest::Approx(8.0));

  // also check a pair where the blocked vertex genuinely lies in the way
  auto q = shortest_path(g, 2 * 5 + 1, 2 * 5 + 3, VertexSet{center});
  REQUIRE(q.has_value());
  CHECK(q->length() ==
        doctest::Approx(brute_force_distance(g, 11, 13, VertexSet{center})));
  CHECK(q->length() == doctest::Approx(4.0));
}

TEST_CASE("distances agree with Floyd-Warshall on random graphs") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 6; ++trial) {
    bool unit = trial % 2 == 0;
    auto g = random_connected(40 + trial * 25, 30, rng, unit);
    auto ref = floyd_warshall(g);
    DistanceOracle oracle(g);
    for (Vertex u = 0; u < g.vertex_count(); u += 7)
      for (Vertex v = 0; v < g.vertex_count(); v += 3)
        CHECK(oracle.dist(u, v) == doctest::Approx(ref[u][v]).epsilon(1e-9));

    // shortest_path length equals the all-pairs distance
    std::uniform_int_distribution<int> pick(0, g.vertex_count() - 1);
    for (int i = 0; i < 20; ++i) {
      Vertex u = pick(rng), v = pick(rng);
      auto p = shortest_path(g, u, v);
      REQUIRE(p.has_value());
      CHECK(p->length() == doctest::Approx(ref[u][v]).epsilon(1e-9));
      // consecutive vertices joined by edges, cum increments correct
      for (size_t j = 0; j + 1 < p->size(); ++j)
        CHECK(g.adjacent(p->vertices[j], p->vertices[j + 1]));
    }
  }
}

TEST_CASE("triangle inequality on sampled triples") {
  std::mt19937_64 rng(11);
  auto g = random_connected(120, 80, rng, false);
  DistanceOracle oracle(g);
  std::uniform_int_distribution<int> pick(0, g.vertex_count() - 1);
  for (int i = 0; i < 500; ++i) {
    Vertex u = pick(rng), v = pick(rng), w = pick(rng);
    CHECK(oracle.dist(u, w) <= oracle.dist(u, v) + oracle.dist(v, w) + 1e-9);
  }
}

TEST_CASE("shortest path tie-break is deterministic and lex-least") {
  // 4-cycle 0-1-3-2-0: two length-2 routes from 0 to 3; the canonical one
  // steps through vertex 1.
  MetricGraph g(4);
  g.add_edge(0, 1, 1.0);
  g.add_edge(1, 3, 1.0);
  g.add_edge(0, 2, 1.0);
  g.add_edge(2, 3, 1.0);
  auto p = shortest_path(g, 0, 3);
  REQUIRE(p.has_value());
  CHECK(p->vertices == std::vector<Vertex>{0, 1, 3});
}

TEST_CASE("neighborhood basics") {
  auto g = line_graph(11);
  DistanceOracle oracle(g);
  VertexSet s{5};
  CHECK(neighborhood(g, oracle, s, 0.0) == VertexSet{5});
  CHECK(neighborhood(g, oracle, s, 2.0) == VertexSet{3, 4, 5, 6, 7});
  VertexSet multi{0, 10};
  CHECK(neighborhood(g, oracle, multi, 1.0) == VertexSet{0, 1, 9, 10});
}

TEST_CASE("hausdorff distance matches double loop") {
  auto g = grid_graph(6, 6);
  DistanceOracle oracle(g);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> pick(0, g.vertex_count() - 1);
  for (int trial = 0; trial < 10; ++trial) {
    VertexSet a, b;
    for (int i = 0; i < 5; ++i) a.push_back(pick(rng));
    for (int i = 0; i < 7; ++i) b.push_back(pick(rng));
    normalize_set(a);
    normalize_set(b);
    double brute = 0.0;
    for (Vertex x : a) {
      double inf = kInf;
      for (Vertex y : b) inf = std::min(inf, oracle.dist(x, y));
      brute = std::max(brute, inf);
    }
    for (Vertex y : b) {
      double inf = kInf;
      for (Vertex x : a) inf = std::min(inf, oracle.dist(x, y));
      brute = std::max(brute, inf);
    }
    CHECK(hausdorff_distance(g, a, b) == doctest::Approx(brute));
  }
  CHECK(hausdorff_distance(g, VertexSet{0, 1}, VertexSet{0, 1}) == 0.0);
}

TEST_CASE("hausdorff two points on a line") {
  auto g = line_graph(11);
  CHECK(hausdorff_distance(g, VertexSet{0}, VertexSet{10}) ==
        doctest::Approx(10.0));
}

TEST_CASE("maximal net: line and exhaustive validation") {
  auto g = line_graph(11);
  VertexSet all;
  for (int i = 0; i <= 10; ++i) all.push_back(i);
  CHECK(maximal_net(g, all, 3.0) == VertexSet{0, 3, 6, 9});
  // k below the minimum positive distance keeps everything
  CHECK(maximal_net(g, all, 0.5) == all);

  auto grid = grid_graph(5, 5);
  VertexSet s;
  for (int i = 0; i < 25; ++i) s.push_back(i);
  for (double k : {2.0, 3.0}) {
    VertexSet net = maximal_net(grid, s, k);
    DistanceOracle oracle(grid);
    for (size_t i = 0; i < net.size(); ++i)
      for (size_t j = i + 1; j < net.size(); ++j)
        CHECK(oracle.dist(net[i], net[j]) >= k - 1e-9);
    for (Vertex v : s) {
      if (set_contains(net, v)) continue;
      double dmin = kInf;
      for (Vertex w : net) dmin = std::min(dmin, oracle.dist(v, w));
      CHECK(dmin < k);  // maximality: v cannot be added
    }
  }
}

TEST_CASE("four point defect formula on one quadruple") {
  // distances: dwx=2, dyz=2, dwy=3, dxz=3, dwz=4, dxy=1
  // sums: 4, 6, 5 -> (6-5)/2 = 0.5
  CHECK(four_point_defect(2, 2, 3, 3, 4, 1) == doctest::Approx(0.5));
}

TEST_CASE("four point delta: trees are exactly zero") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 5; ++trial) {
    auto t = random_tree(18, rng, trial % 2 == 0);
    auto res = four_point_delta(t, FourPointMode{});
    CHECK(res.delta == 0.0);
  }
}

TEST_CASE("four point delta: grid grows with side, sampled <= exhaustive") {
  auto small = grid_graph(6, 6);
  auto big = grid_graph(10, 10);
  auto ds = four_point_delta(small, FourPointMode{});
  auto db = four_point_delta(big, FourPointMode{});
  CHECK(db.delta > ds.delta);
  CHECK(ds.delta > 0.0);

  FourPointMode sampled;
  sampled.kind = FourPointMode::SampledQuadruples;
  sampled.count = 4000;
  sampled.seed = 5;
  auto dsmp = four_point_delta(big, sampled);
  CHECK(dsmp.delta <= db.delta + 1e-12);
  CHECK(dsmp.quadruples > 0);

  // witness achieves the reported delta
  DistanceOracle oracle(big);
  auto [w, x, y, z] = db.witness;
  CHECK(four_point_defect(oracle.dist(w, x), oracle.dist(y, z),
                          oracle.dist(w, y), oracle.dist(x, z),
                          oracle.dist(w, z), oracle.dist(x, y)) ==
        doctest::Approx(db.delta));
}

TEST_CASE("pool mode covers the space deterministically") {
  auto g = grid_graph(8, 8);
  FourPointMode pool;
  pool.kind = FourPointMode::PoolExhaustive;
  pool.pool_size = 24;
  pool.seed = 9;
  auto a = four_point_delta(g, pool);
  auto b = four_point_delta(g, pool);
  CHECK(a.delta == b.delta);
  CHECK(a.witness == b.witness);
  auto exact = four_point_delta(g, FourPointMode{});
  CHECK(a.delta <= exact.delta + 1e-12);
  CHECK(a.delta > 0.0);
}

TEST_CASE("coarse connectivity") {
  auto g = line_graph(11);
  VertexSet single{4};
  CHECK(is_coarsely_connected(g, single, 1.0).connected);

  VertexSet far{0, 10};
  auto r = is_coarsely_connected(g, far, 5.0);
  CHECK_FALSE(r.connected);
  CHECK(((r.witness_a == 0 && r.witness_b == 10) ||
         (r.witness_a == 10 && r.witness_b == 0)));
  CHECK(r.gap == doctest::Approx(10.0));

  VertexSet chain{0, 4, 8};
  CHECK(is_coarsely_connected(g, chain, 4.0).connected);
  CHECK_FALSE(is_coarsely_connected(g, chain, 3.0).connected);
}

TEST_CASE("graph validation rejects malformed input") {
  MetricGraph g(3);
  CHECK_THROWS_AS(g.add_edge(0, 0, 1.0), GraphError);
  CHECK_THROWS_AS(g.add_edge(0, 1, 0.0), GraphError);
  CHECK_THROWS_AS(g.add_edge(0, 1, -2.0), GraphError);
  g.add_edge(0, 1, 1.0);
  CHECK_THROWS_AS(g.add_edge(1, 0, 2.0), GraphError);
  CHECK_THROWS_AS(g.add_edge(0, 3, 1.0), GraphError);

  // vertex 2 is isolated
  CHECK_FALSE(g.is_connected());
  CHECK_THROWS_WITH_AS(g.require_connected(),
                       doctest::Contains("disconnected-graph"), GraphError);
}

TEST_CASE("distances avoiding a set") {
  auto g = grid_graph(5, 5);
  VertexSet wall{2, 7, 12, 17};  // vertical wall x=2, y=0..3
  auto d = distances_avoiding(g, 0, wall);
  CHECK(d[4] == doctest::Approx(brute_force_distance(g, 0, 4, wall)));
  CHECK(d[4] > 4.0);  // forced around the wall
  for (Vertex v : wall) CHECK(d[v] == kInf);
}

TEST_CASE("set diameter and oracle diameter") {
  auto g = grid_graph(4, 4);
  DistanceOracle oracle(g);
  CHECK(oracle.diameter() == doctest::Approx(6.0));
  CHECK(oracle.set_diameter(VertexSet{0, 3, 12, 15}) == doctest::Approx(6.0));
  CHECK(oracle.set_diameter(VertexSet{5}) == 0.0);
}
