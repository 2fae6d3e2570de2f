#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>
#include <utility>

#include "relhyp/types.hpp"

namespace relhyp {

struct Edge {
  Vertex u = 0;
  Vertex v = 0;
  double length = 1.0;
};

// Finite connected graph with positive edge lengths, metric = shortest path.
// Vertices are 0..n-1. At most one edge per unordered pair, no loops.
class MetricGraph {
 public:
  MetricGraph() = default;
  explicit MetricGraph(int n) : adj_(n) {}

  int vertex_count() const { return static_cast<int>(adj_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::pair<Vertex, double>>& neighbors(Vertex v) const {
    return adj_[v];
  }
  const std::string& label(Vertex v) const;
  void set_label(Vertex v, std::string text);
  bool has_labels() const { return !labels_.empty(); }

  void add_edge(Vertex u, Vertex v, double length);
  bool adjacent(Vertex u, Vertex v) const;
  bool all_unit_lengths() const { return all_unit_; }
  double max_edge_length() const { return max_len_; }

  bool is_connected() const;
  // Throws GraphError("disconnected-graph ...") naming two separated vertices.
  void require_connected() const;

 private:
  std::vector<std::vector<std::pair<Vertex, double>>> adj_;
  std::vector<Edge> edges_;
  std::vector<std::string> labels_;
  bool all_unit_ = true;
  double max_len_ = 0.0;
};

// One full single-source sweep, no caching: BFS counts on unit graphs,
// Dijkstra otherwise. kInf marks unreachable vertices.
std::vector<double> single_source_distances(const MetricGraph& g, Vertex from);
std::vector<double> multi_source_distances(const MetricGraph& g,
                                           const VertexSet& sources);

// Lazy point-to-point distance table. dist() caches one row per queried
// source — uint16 hops on unit graphs so large balls stay cheap — while the
// bulk operations (dist_to_set, set_diameter, diameter, attributed_sweep)
// run scratch sweeps and leave the cache alone. Keep the number of distinct
// dist() sources bounded on big graphs.
class DistanceOracle {
 public:
  explicit DistanceOracle(const MetricGraph& g);

  double dist(Vertex u, Vertex v) const;
  std::vector<double> dist_to_set(const VertexSet& sources) const;
  double dist_to_set(Vertex v, const VertexSet& s) const;
  double diameter() const;
  double set_diameter(const VertexSet& s) const;
  // Multi-source distances plus, per vertex, the least-id source realizing
  // them (min over all shortest routes).
  void attributed_sweep(const VertexSet& sources, std::vector<double>& dist,
                        std::vector<Vertex>& nearest) const;

  const MetricGraph& graph() const { return g_; }
  long cached_rows() const { return cached_; }

 private:
  const std::vector<uint16_t>& urow(Vertex u) const;
  const std::vector<double>& drow(Vertex u) const;

  const MetricGraph& g_;
  mutable std::vector<std::vector<uint16_t>> urows_;
  mutable std::vector<std::vector<double>> drows_;
  mutable long cached_ = 0;
  mutable double diameter_ = -1.0;
};

// Dijkstra with an excluded vertex set and a deterministic tie-break: among
// equal-length routes the reconstruction walks the lexicographically least
// next-vertex id at every hop. Returns nullopt when target is unreachable.
std::optional<PathInSpace> shortest_path(const MetricGraph& g, Vertex from,
                                         Vertex to,
                                         const VertexSet& forbidden = {});

// Distances from `from` avoiding `forbidden` (kInf where unreachable).
std::vector<double> distances_avoiding(const MetricGraph& g, Vertex from,
                                       const VertexSet& forbidden);

VertexSet neighborhood(const MetricGraph& g, const DistanceOracle& oracle,
                       const VertexSet& s, double r);

// a.back() must equal b.front().
PathInSpace concat_paths(const PathInSpace& a, const PathInSpace& b);

// Canonical geodesic plus midpoint-forced variants, all true geodesics:
// the extremal variant routes through the midpoint vertex farthest from the
// canonical path (least id on ties), then `extra` seeded midpoints follow.
// Deduplicated; the canonical path always comes first.
std::vector<PathInSpace> geodesic_variants(const MetricGraph& g,
                                           const DistanceOracle& oracle,
                                           Vertex x, Vertex y, int extra,
                                           uint64_t seed);

double hausdorff_distance(const MetricGraph& g, const VertexSet& a,
                          const VertexSet& b);
// Directed variant: sup over a of dist(a, B).
double directed_hausdorff(const MetricGraph& g, const VertexSet& a,
                          const VertexSet& b);

// Greedy maximal k-separated subset of s, scanning ascending vertex ids.
VertexSet maximal_net(const MetricGraph& g, const VertexSet& s, double k);

struct FourPointMode {
  enum Kind { Exhaustive, SampledQuadruples, PoolExhaustive } kind = Exhaustive;
  int count = 0;       // quadruple draws for SampledQuadruples
  int pool_size = 60;  // for PoolExhaustive
  uint64_t seed = 0;
};

struct FourPointResult {
  double delta = 0.0;
  std::array<Vertex, 4> witness{0, 0, 0, 0};
  long quadruples = 0;
  std::string mode;
};

double four_point_defect(double dwx, double dyz, double dwy, double dxz,
                         double dwz, double dxy);
FourPointResult four_point_delta(const MetricGraph& g, const FourPointMode& mode);

struct CoarseConnectivity {
  bool connected = true;
  // When disconnected: representatives of two distinct chain components and
  // the smallest gap between components.
  Vertex witness_a = -1;
  Vertex witness_b = -1;
  double gap = 0.0;
};
CoarseConnectivity is_coarsely_connected(const MetricGraph& g,
                                         const VertexSet& s, double k);

// Deterministic 64-bit mix for deriving per-sample seeds.
uint64_t mix_seed(uint64_t a, uint64_t b);

}  // namespace relhyp
