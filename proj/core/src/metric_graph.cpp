#include "relhyp/metric_graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <random>

namespace relhyp {

void normalize_set(VertexSet& s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
}

bool set_contains(const VertexSet& s, Vertex v) {
  return std::binary_search(s.begin(), s.end(), v);
}

VertexSet set_union(const VertexSet& a, const VertexSet& b) {
  VertexSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

VertexSet set_intersection(const VertexSet& a, const VertexSet& b) {
  VertexSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

uint64_t mix_seed(uint64_t a, uint64_t b) {
  uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

const std::string& MetricGraph::label(Vertex v) const {
  static const std::string empty;
  if (v < 0 || v >= static_cast<Vertex>(labels_.size())) return empty;
  return labels_[v];
}

void MetricGraph::set_label(Vertex v, std::string text) {
  if (labels_.empty()) labels_.resize(adj_.size());
  labels_.at(v) = std::move(text);
}

void MetricGraph::add_edge(Vertex u, Vertex v, double length) {
  if (u < 0 || v < 0 || u >= vertex_count() || v >= vertex_count())
    throw GraphError("edge endpoint out of range");
  if (u == v) throw GraphError("self-loop at vertex " + std::to_string(u));
  if (!(length > 0.0))
    throw GraphError("non-positive edge length on (" + std::to_string(u) +
                     "," + std::to_string(v) + ")");
  if (adjacent(u, v))
    throw GraphError("duplicate edge (" + std::to_string(u) + "," +
                     std::to_string(v) + ")");
  adj_[u].push_back({v, length});
  adj_[v].push_back({u, length});
  edges_.push_back({std::min(u, v), std::max(u, v), length});
  if (std::abs(length - 1.0) > kTol) all_unit_ = false;
  max_len_ = std::max(max_len_, length);
}

bool MetricGraph::adjacent(Vertex u, Vertex v) const {
  const auto& row = adj_[u].size() <= adj_[v].size() ? adj_[u] : adj_[v];
  Vertex other = adj_[u].size() <= adj_[v].size() ? v : u;
  for (const auto& [w, len] : row)
    if (w == other) return true;
  return false;
}

bool MetricGraph::is_connected() const {
  if (vertex_count() == 0) return true;
  std::vector<char> seen(vertex_count(), 0);
  std::deque<Vertex> q{0};
  seen[0] = 1;
  int reached = 1;
  while (!q.empty()) {
    Vertex v = q.front();
    q.pop_front();
    for (const auto& [w, len] : adj_[v])
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        q.push_back(w);
      }
  }
  return reached == vertex_count();
}

void MetricGraph::require_connected() const {
  if (vertex_count() == 0) return;
  std::vector<char> seen(vertex_count(), 0);
  std::deque<Vertex> q{0};
  seen[0] = 1;
  while (!q.empty()) {
    Vertex v = q.front();
    q.pop_front();
    for (const auto& [w, len] : adj_[v])
      if (!seen[w]) {
        seen[w] = 1;
        q.push_back(w);
      }
  }
  for (Vertex v = 0; v < vertex_count(); ++v)
    if (!seen[v])
      throw GraphError("disconnected-graph: no path between 0 and " +
                       std::to_string(v));
}

namespace {

constexpr uint16_t kUnreached = 0xFFFF;

std::vector<uint16_t> bfs_hops(const MetricGraph& g, Vertex from) {
  std::vector<uint16_t> d(g.vertex_count(), kUnreached);
  std::deque<Vertex> q{from};
  d[from] = 0;
  while (!q.empty()) {
    Vertex v = q.front();
    q.pop_front();
    for (const auto& [w, len] : g.neighbors(v))
      if (d[w] == kUnreached) {
        d[w] = static_cast<uint16_t>(d[v] + 1);
        q.push_back(w);
      }
  }
  return d;
}

std::vector<double> dijkstra_sums(const MetricGraph& g, Vertex from,
                                  const std::vector<char>* blocked = nullptr) {
  std::vector<double> d(g.vertex_count(), kInf);
  using Item = std::pair<double, Vertex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  d[from] = 0.0;
  pq.push({0.0, from});
  while (!pq.empty()) {
    auto [dv, v] = pq.top();
    pq.pop();
    if (dv > d[v] + kTol) continue;
    for (const auto& [w, len] : g.neighbors(v)) {
      if (blocked && (*blocked)[w]) continue;
      double cand = dv + len;
      if (cand + kTol < d[w]) {
        d[w] = cand;
        pq.push({cand, w});
      }
    }
  }
  return d;
}

}  // namespace

std::vector<double> single_source_distances(const MetricGraph& g,
                                            Vertex from) {
  if (g.all_unit_lengths()) {
    auto hops = bfs_hops(g, from);
    std::vector<double> d(hops.size());
    for (size_t i = 0; i < hops.size(); ++i)
      d[i] = hops[i] == kUnreached ? kInf : hops[i];
    return d;
  }
  return dijkstra_sums(g, from);
}

std::vector<double> multi_source_distances(const MetricGraph& g,
                                           const VertexSet& sources) {
  std::vector<double> d(g.vertex_count(), kInf);
  if (sources.empty()) return d;
  if (g.all_unit_lengths()) {
    std::deque<Vertex> q;
    for (Vertex s : sources) {
      d[s] = 0.0;
      q.push_back(s);
    }
    while (!q.empty()) {
      Vertex v = q.front();
      q.pop_front();
      for (const auto& [w, len] : g.neighbors(v))
        if (d[w] == kInf) {
          d[w] = d[v] + 1.0;
          q.push_back(w);
        }
    }
    return d;
  }
  using Item = std::pair<double, Vertex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (Vertex s : sources) {
    d[s] = 0.0;
    pq.push({0.0, s});
  }
  while (!pq.empty()) {
    auto [dv, v] = pq.top();
    pq.pop();
    if (dv > d[v] + kTol) continue;
    for (const auto& [w, len] : g.neighbors(v)) {
      double cand = dv + len;
      if (cand + kTol < d[w]) {
        d[w] = cand;
        pq.push({cand, w});
      }
    }
  }
  return d;
}

DistanceOracle::DistanceOracle(const MetricGraph& g) : g_(g) {
  if (g.all_unit_lengths())
    urows_.resize(g.vertex_count());
  else
    drows_.resize(g.vertex_count());
}

const std::vector<uint16_t>& DistanceOracle::urow(Vertex u) const {
  if (urows_[u].empty()) {
    urows_[u] = bfs_hops(g_, u);
    ++cached_;
  }
  return urows_[u];
}

const std::vector<double>& DistanceOracle::drow(Vertex u) const {
  if (drows_[u].empty()) {
    drows_[u] = dijkstra_sums(g_, u);
    ++cached_;
  }
  return drows_[u];
}

double DistanceOracle::dist(Vertex u, Vertex v) const {
  if (u == v) return 0.0;
  if (g_.all_unit_lengths()) {
    if (!urows_[u].empty()) {
      uint16_t h = urows_[u][v];
      return h == kUnreached ? kInf : h;
    }
    if (!urows_[v].empty()) {
      uint16_t h = urows_[v][u];
      return h == kUnreached ? kInf : h;
    }
    uint16_t h = urow(u)[v];
    return h == kUnreached ? kInf : h;
  }
  if (!drows_[u].empty()) return drows_[u][v];
  if (!drows_[v].empty()) return drows_[v][u];
  return drow(u)[v];
}

std::vector<double> DistanceOracle::dist_to_set(const VertexSet& sources) const {
  return multi_source_distances(g_, sources);
}

double DistanceOracle::dist_to_set(Vertex v, const VertexSet& s) const {
  double best = kInf;
  for (Vertex w : s) best = std::min(best, dist(v, w));
  return best;
}

double DistanceOracle::diameter() const {
  if (diameter_ < 0.0) {
    double d = 0.0;
    for (Vertex v = 0; v < g_.vertex_count(); ++v)
      for (double x : single_source_distances(g_, v))
        if (x != kInf) d = std::max(d, x);
    diameter_ = d;
  }
  return diameter_;
}

double DistanceOracle::set_diameter(const VertexSet& s) const {
  double d = 0.0;
  for (size_t i = 0; i + 1 < s.size(); ++i) {
    auto row = single_source_distances(g_, s[i]);
    for (size_t j = i + 1; j < s.size(); ++j) d = std::max(d, row[s[j]]);
  }
  return d;
}

void DistanceOracle::attributed_sweep(const VertexSet& sources,
                                      std::vector<double>& dist,
                                      std::vector<Vertex>& nearest) const {
  int n = g_.vertex_count();
  dist = multi_source_distances(g_, sources);
  nearest.assign(n, -1);
  for (Vertex s : sources) nearest[s] = s;
  // visit in distance order; least-id attribution over all shortest routes
  std::vector<Vertex> order;
  order.reserve(n);
  for (Vertex v = 0; v < n; ++v)
    if (dist[v] != kInf) order.push_back(v);
  std::sort(order.begin(), order.end(), [&](Vertex a, Vertex b) {
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    return a < b;
  });
  for (Vertex v : order) {
    if (nearest[v] != -1 && dist[v] == 0.0) continue;  // a source
    for (const auto& [w, len] : g_.neighbors(v)) {
      if (std::abs(dist[w] + len - dist[v]) > kTol) continue;
      if (nearest[w] == -1) continue;
      if (nearest[v] == -1 || nearest[w] < nearest[v]) nearest[v] = nearest[w];
    }
  }
}

std::vector<double> distances_avoiding(const MetricGraph& g, Vertex from,
                                       const VertexSet& forbidden) {
  std::vector<char> blocked(g.vertex_count(), 0);
  for (Vertex v : forbidden) blocked[v] = 1;
  if (blocked[from]) {
    std::vector<double> d(g.vertex_count(), kInf);
    return d;
  }
  if (g.all_unit_lengths()) {
    std::vector<double> d(g.vertex_count(), kInf);
    std::deque<Vertex> q{from};
    d[from] = 0.0;
    while (!q.empty()) {
      Vertex v = q.front();
      q.pop_front();
      for (const auto& [w, len] : g.neighbors(v))
        if (!blocked[w] && d[w] == kInf) {
          d[w] = d[v] + 1.0;
          q.push_back(w);
        }
    }
    return d;
  }
  return dijkstra_sums(g, from, &blocked);
}

std::optional<PathInSpace> shortest_path(const MetricGraph& g, Vertex from,
                                         Vertex to,
                                         const VertexSet& forbidden) {
  if (set_contains(forbidden, from) || set_contains(forbidden, to))
    return std::nullopt;
  // Distances from `to`, then walk forward from `from` always stepping to the
  // least-id neighbor that stays on a shortest route. This makes equal-length
  // choices deterministic without a global path ordering.
  std::vector<double> dt = distances_avoiding(g, to, forbidden);
  if (dt[from] == kInf) return std::nullopt;
  PathInSpace p;
  p.geodesic = true;
  p.vertices.push_back(from);
  p.cum.push_back(0.0);
  Vertex cur = from;
  while (cur != to) {
    Vertex next = -1;
    double step = 0.0;
    for (const auto& [w, len] : g.neighbors(cur)) {
      if (set_contains(forbidden, w)) continue;
      if (std::abs(dt[cur] - (len + dt[w])) <= kTol) {
        if (next == -1 || w < next) {
          next = w;
          step = len;
        }
      }
    }
    if (next == -1) return std::nullopt;  // defensive; cannot happen
    cur = next;
    p.vertices.push_back(cur);
    p.cum.push_back(p.cum.back() + step);
  }
  return p;
}

VertexSet neighborhood(const MetricGraph& g, const DistanceOracle& oracle,
                       const VertexSet& s, double r) {
  VertexSet out;
  if (s.empty()) return out;
  std::vector<double> d = oracle.dist_to_set(s);
  for (Vertex v = 0; v < g.vertex_count(); ++v)
    if (d[v] <= r + kTol) out.push_back(v);
  return out;
}

PathInSpace concat_paths(const PathInSpace& a, const PathInSpace& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.back() != b.front()) throw GraphError("concat endpoints disagree");
  PathInSpace out = a;
  double base = out.cum.back();
  for (size_t i = 1; i < b.size(); ++i) {
    out.vertices.push_back(b.vertices[i]);
    out.cum.push_back(base + b.cum[i]);
  }
  out.geodesic = false;
  return out;
}

std::vector<PathInSpace> geodesic_variants(const MetricGraph& g,
                                           const DistanceOracle& oracle,
                                           Vertex x, Vertex y, int extra,
                                           uint64_t seed) {
  std::vector<PathInSpace> out;
  auto canonical = shortest_path(g, x, y);
  if (!canonical) return out;
  out.push_back(*canonical);
  double dxy = oracle.dist(x, y);
  VertexSet midpoints;
  for (Vertex v = 0; v < g.vertex_count(); ++v)
    if (v != x && v != y &&
        std::abs(oracle.dist(x, v) + oracle.dist(v, y) - dxy) <= kTol)
      midpoints.push_back(v);
  if (midpoints.empty()) return out;

  VertexSet canon_set(canonical->vertices);
  normalize_set(canon_set);
  std::vector<double> to_canon = oracle.dist_to_set(canon_set);

  auto add_through = [&](Vertex m) {
    auto first = shortest_path(g, x, m);
    auto second = shortest_path(g, m, y);
    if (!first || !second) return;
    PathInSpace p = concat_paths(*first, *second);
    p.geodesic = true;  // m is a true midpoint, so length == d(x,y)
    for (const PathInSpace& q : out)
      if (q.vertices == p.vertices) return;
    out.push_back(std::move(p));
  };

  Vertex extremal = midpoints[0];
  for (Vertex m : midpoints)
    if (to_canon[m] > to_canon[extremal]) extremal = m;
  add_through(extremal);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<size_t> pick(0, midpoints.size() - 1);
  for (int i = 0; i < extra; ++i) add_through(midpoints[pick(rng)]);
  return out;
}

double directed_hausdorff(const MetricGraph& g, const VertexSet& a,
                          const VertexSet& b) {
  if (a.empty()) return 0.0;
  if (b.empty()) return kInf;
  std::vector<double> d = multi_source_distances(g, b);
  double worst = 0.0;
  for (Vertex v : a) worst = std::max(worst, d[v]);
  return worst;
}

double hausdorff_distance(const MetricGraph& g, const VertexSet& a,
                          const VertexSet& b) {
  return std::max(directed_hausdorff(g, a, b), directed_hausdorff(g, b, a));
}

VertexSet maximal_net(const MetricGraph& g, const VertexSet& s, double k) {
  VertexSet net;
  if (s.empty()) return net;
  std::vector<double> to_net(g.vertex_count(), kInf);
  for (Vertex v : s) {
    if (to_net[v] + kTol < k) continue;
    net.push_back(v);
    auto row = single_source_distances(g, v);
    for (Vertex w : s) to_net[w] = std::min(to_net[w], row[w]);
  }
  return net;
}

double four_point_defect(double dwx, double dyz, double dwy, double dxz,
                         double dwz, double dxy) {
  double s1 = dwx + dyz;
  double s2 = dwy + dxz;
  double s3 = dwz + dxy;
  double hi = std::max({s1, s2, s3});
  double mid = s1 + s2 + s3 - hi - std::min({s1, s2, s3});
  double defect = (hi - mid) / 2.0;
  return defect < kTol ? 0.0 : defect;  // swallow summation noise
}

namespace {

FourPointResult delta_over_pool(const MetricGraph& g, const VertexSet& pool,
                                const std::string& mode_name) {
  FourPointResult res;
  res.mode = mode_name;
  const size_t n = pool.size();
  // pool-restricted distance matrix keeps the quadruple loop in cache
  std::vector<double> m(n * n);
  for (size_t i = 0; i < n; ++i) {
    auto row = single_source_distances(g, pool[i]);
    for (size_t j = 0; j < n; ++j) m[i * n + j] = row[pool[j]];
  }
  for (size_t iw = 0; iw < n; ++iw)
    for (size_t ix = iw + 1; ix < n; ++ix)
      for (size_t iy = ix + 1; iy < n; ++iy)
        for (size_t iz = iy + 1; iz < n; ++iz) {
          double defect = four_point_defect(
              m[iw * n + ix], m[iy * n + iz], m[iw * n + iy], m[ix * n + iz],
              m[iw * n + iz], m[ix * n + iy]);
          ++res.quadruples;
          if (defect > res.delta) {
            res.delta = defect;
            res.witness = {pool[iw], pool[ix], pool[iy], pool[iz]};
          }
        }
  return res;
}

}  // namespace

FourPointResult four_point_delta(const MetricGraph& g,
                                 const FourPointMode& mode) {
  const int n = g.vertex_count();
  if (n < 4) {
    FourPointResult res;
    res.mode = "exhaustive";
    return res;
  }
  switch (mode.kind) {
    case FourPointMode::Exhaustive: {
      VertexSet all(n);
      for (Vertex v = 0; v < n; ++v) all[v] = v;
      return delta_over_pool(g, all, "exhaustive");
    }
    case FourPointMode::SampledQuadruples: {
      DistanceOracle oracle(g);
      std::mt19937_64 rng(mode.seed);
      std::uniform_int_distribution<Vertex> pick(0, n - 1);
      FourPointResult res;
      res.mode = "sampled";
      for (int i = 0; i < mode.count; ++i) {
        Vertex w = pick(rng), x = pick(rng), y = pick(rng), z = pick(rng);
        if (w == x || w == y || w == z || x == y || x == z || y == z) continue;
        double defect = four_point_defect(
            oracle.dist(w, x), oracle.dist(y, z), oracle.dist(w, y),
            oracle.dist(x, z), oracle.dist(w, z), oracle.dist(x, y));
        ++res.quadruples;
        if (defect > res.delta) {
          res.delta = defect;
          res.witness = {w, x, y, z};
        }
      }
      return res;
    }
    case FourPointMode::PoolExhaustive: {
      // Seeded uniform draw topped up with farthest-point picks so the pool
      // reaches into every corner of the space.
      std::mt19937_64 rng(mode.seed);
      std::uniform_int_distribution<Vertex> pick(0, n - 1);
      int base = std::max(4, mode.pool_size * 3 / 4);
      int spread = std::max(0, mode.pool_size - base);
      VertexSet pool;
      for (int i = 0; i < base; ++i) pool.push_back(pick(rng));
      normalize_set(pool);
      for (int i = 0; i < spread && static_cast<int>(pool.size()) < n; ++i) {
        std::vector<double> d = multi_source_distances(g, pool);
        Vertex far = 0;
        for (Vertex v = 1; v < n; ++v)
          if (d[v] > d[far]) far = v;
        if (set_contains(pool, far)) break;
        pool.push_back(far);
        normalize_set(pool);
      }
      return delta_over_pool(g, pool, "pool");
    }
  }
  throw CheckError("unknown four-point mode");
}

CoarseConnectivity is_coarsely_connected(const MetricGraph& g,
                                         const VertexSet& s, double k) {
  CoarseConnectivity out;
  if (s.size() <= 1) return out;
  std::unordered_map<Vertex, int> comp;
  int next_comp = 0;
  for (Vertex seed : s) {
    if (comp.count(seed)) continue;
    int id = next_comp++;
    VertexSet frontier{seed};
    comp[seed] = id;
    while (!frontier.empty()) {
      std::vector<double> d = multi_source_distances(g, frontier);
      VertexSet grown;
      for (Vertex v : s)
        if (!comp.count(v) && d[v] <= k + kTol) {
          comp[v] = id;
          grown.push_back(v);
        }
      frontier = std::move(grown);
    }
  }
  if (next_comp <= 1) return out;
  out.connected = false;
  // witnesses: closest pair across two distinct components
  out.gap = kInf;
  DistanceOracle oracle(g);
  for (size_t i = 0; i < s.size(); ++i)
    for (size_t j = i + 1; j < s.size(); ++j) {
      if (comp[s[i]] == comp[s[j]]) continue;
      double d = oracle.dist(s[i], s[j]);
      if (d < out.gap) {
        out.gap = d;
        out.witness_a = s[i];
        out.witness_b = s[j];
      }
    }
  return out;
}

}  // namespace relhyp
