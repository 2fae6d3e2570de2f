#include "relhyp/bowditch.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "relhyp/io.hpp"

namespace relhyp {

namespace {

std::string vertex_list(const VertexSet& s, size_t cap = 8) {
  std::string out = "{";
  for (size_t i = 0; i < s.size() && i < cap; ++i) {
    if (i) out += ", ";
    out += std::to_string(s[i]);
  }
  if (s.size() > cap) out += ", ...";
  return out + "}";
}

std::string num(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

}  // namespace

Horoball build_horoball(const MetricGraph& base, int depth) {
  if (depth < 1) throw ConfigError("horoball depth must be positive");
  base.require_connected();
  Horoball h;
  h.base_count = base.vertex_count();
  h.depth = depth;
  h.graph = MetricGraph(h.base_count * (depth + 1));
  for (Vertex v = 0; v < h.base_count; ++v)
    for (int n = 0; n < depth; ++n)
      h.graph.add_edge(h.at(v, n), h.at(v, n + 1), 1.0);
  for (const Edge& e : base.edges())
    for (int n = 0; n <= depth; ++n)
      h.graph.add_edge(h.at(e.u, n), h.at(e.v, n),
                       std::exp(-double(n)) * e.length);
  return h;
}

int ApproximationGraph::index_of(Vertex x) const {
  auto it = std::lower_bound(net.begin(), net.end(), x);
  if (it == net.end() || *it != x) return -1;
  return static_cast<int>(it - net.begin());
}

ApproximationGraph build_approximation_graph(const MetricGraph& g,
                                             const VertexSet& P, double k,
                                             double R) {
  if (P.empty())
    throw ConfigError("approximation graph needs a nonempty peripheral");
  for (Vertex v : P)
    if (v < 0 || v >= g.vertex_count())
      throw ConfigError("peripheral vertex " + std::to_string(v) +
                        " out of range");
  if (k <= 0) throw ConfigError("net scale k must be positive");
  if (R < k - kTol)
    throw ConfigError("connection radius R must be at least the net scale k");

  ApproximationGraph a;
  a.k = k;
  a.R = R;
  a.net = maximal_net(g, P, k);
  int n = static_cast<int>(a.net.size());
  a.graph = MetricGraph(n);
  for (int i = 0; i < n; ++i) {
    auto row = single_source_distances(g, a.net[i]);
    for (int j = i + 1; j < n; ++j)
      if (row[a.net[j]] <= R + kTol) a.graph.add_edge(i, j, R);
  }
  if (n > 1 && !a.graph.is_connected()) {
    // name two components by their ambient ids
    std::vector<int> comp(n, -1);
    int comps = 0;
    for (int s = 0; s < n; ++s) {
      if (comp[s] != -1) continue;
      std::vector<int> stack{s};
      comp[s] = comps;
      while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (auto [w, len] : a.graph.neighbors(u))
          if (comp[w] == -1) {
            comp[w] = comps;
            stack.push_back(w);
          }
      }
      ++comps;
    }
    VertexSet first, second;
    for (int i = 0; i < n; ++i) {
      if (comp[i] == 0) first.push_back(a.net[i]);
      if (comp[i] == 1) second.push_back(a.net[i]);
    }
    throw CheckError("net-disconnected: " + std::to_string(comps) +
                     " components, e.g. " + vertex_list(first) + " vs " +
                     vertex_list(second));
  }
  return a;
}

Vertex BowditchSpace::horo_vertex(int member, int net_index, int level) const {
  if (level == 0) return nets[member].net[net_index];
  int width = static_cast<int>(nets[member].net.size());
  return offsets[member] + (level - 1) * width + net_index;
}

BowditchSpace build_bowditch(const MetricGraph& g, const PeripheralFamily& fam,
                             const BowditchParams& params) {
  if (params.depth > 64)
    throw ConfigError("horoball depth beyond 64 adds nothing measurable");
  BowditchSpace bow;
  bow.x_count = g.vertex_count();
  for (int m = 0; m < fam.size(); ++m)
    bow.nets.push_back(
        build_approximation_graph(g, fam[m], params.k, params.R));

  for (const auto& a : bow.nets) {
    int depth = params.depth;
    if (depth <= 0) {
      double diam = 0.0;
      for (int i = 0; i < static_cast<int>(a.net.size()); ++i) {
        auto row = single_source_distances(a.graph, i);
        for (double d : row) diam = std::max(diam, d);
      }
      depth = static_cast<int>(std::ceil(std::log2(std::max(diam, 2.0)))) + 2;
    }
    bow.depths.push_back(depth);
  }

  int total = bow.x_count;
  for (size_t m = 0; m < bow.nets.size(); ++m) {
    bow.offsets.push_back(total);
    total += static_cast<int>(bow.nets[m].net.size()) * bow.depths[m];
  }

  // glued edges can run parallel to ambient ones; metrically only the
  // shorter of the two matters
  std::map<std::pair<Vertex, Vertex>, double> emap;
  auto put = [&emap](Vertex u, Vertex v, double len) {
    auto key = std::minmax(u, v);
    auto [it, fresh] = emap.try_emplace({key.first, key.second}, len);
    if (!fresh) it->second = std::min(it->second, len);
  };
  for (const Edge& e : g.edges()) put(e.u, e.v, e.length);
  for (size_t m = 0; m < bow.nets.size(); ++m) {
    const auto& a = bow.nets[m];
    int width = static_cast<int>(a.net.size());
    int depth = bow.depths[m];
    for (const Edge& e : a.graph.edges())
      for (int n = 0; n <= depth; ++n)
        put(bow.horo_vertex(m, e.u, n), bow.horo_vertex(m, e.v, n),
            std::exp(-double(n)) * e.length);
    for (int i = 0; i < width; ++i)
      for (int n = 0; n < depth; ++n)
        put(bow.horo_vertex(m, i, n), bow.horo_vertex(m, i, n + 1), 1.0);
  }

  bow.graph = MetricGraph(total);
  for (const auto& [key, len] : emap)
    bow.graph.add_edge(key.first, key.second, len);
  if (g.has_labels())
    for (Vertex v = 0; v < g.vertex_count(); ++v)
      if (!g.label(v).empty()) bow.graph.set_label(v, g.label(v));

  bow.back.resize(total);
  for (Vertex v = 0; v < bow.x_count; ++v) bow.back[v] = {BowVertex::kX, v, -1, -1, 0};
  for (size_t m = 0; m < bow.nets.size(); ++m) {
    int width = static_cast<int>(bow.nets[m].net.size());
    for (int level = 1; level <= bow.depths[m]; ++level)
      for (int i = 0; i < width; ++i)
        bow.back[bow.horo_vertex(static_cast<int>(m), i, level)] = {
            BowVertex::kHoro, -1, static_cast<int>(m), i, level};
  }

  bow.coarse = coarse_equivalence(bow, g, params.coarse_samples, params.seed);
  return bow;
}

ConstantsReport coarse_equivalence(const BowditchSpace& bow,
                                   const MetricGraph& g, int sources,
                                   uint64_t seed) {
  if (g.vertex_count() != bow.x_count)
    throw ConfigError("ambient graph does not match the Bowditch space");
  ConstantsReport rep;
  if (sources <= 0) {
    rep.notes.push_back("coarse comparison skipped (no sources)");
    return rep;
  }
  std::vector<Vertex> order(bow.x_count);
  std::iota(order.begin(), order.end(), 0);
  bool exhaustive = sources >= bow.x_count;
  if (!exhaustive) {
    std::mt19937_64 rng(mix_seed(seed, 0xb0d17c));
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(sources);
    std::sort(order.begin(), order.end());
  }

  double slope = 1.0;
  Vertex sa = -1, sb = -1;
  long pairs = 0;
  for (Vertex s : order) {
    auto rowB = single_source_distances(bow.graph, s);
    auto rowX = single_source_distances(g, s);
    for (Vertex t = 0; t < bow.x_count; ++t) {
      if (t == s) continue;
      ++pairs;
      if (rowB[t] > rowX[t] + kTol) {
        rep.violation = true;
        if (rep.violations.size() < 8)
          rep.violations.push_back(
              {{s, t}, {}, rowB[t] - rowX[t],
               "glued metric exceeds the ambient metric"});
      }
      double r = rowX[t] / std::max(rowB[t], kTol);
      if (r > slope) {
        slope = r;
        sa = s;
        sb = t;
      }
    }
  }
  rep.record("g_slope", slope,
             {sa >= 0 ? VertexSet{sa, sb} : VertexSet{}, {}, slope,
              "widest ambient-to-glued distance ratio"});
  rep.samples = pairs;
  rep.notes.push_back("g(t) = " + num(slope) + " t over " +
                      std::to_string(pairs) + " pairs, sources " +
                      (exhaustive ? std::string("exhaustive")
                                  : "sampled(" + std::to_string(sources) + ")"));
  return rep;
}

ConstantsReport check_rh1(const BowditchSpace& bow, const FourPointMode& mode) {
  FourPointResult r = four_point_delta(bow.graph, mode);
  ConstantsReport rep;
  rep.record("delta", r.delta,
             {VertexSet(r.witness.begin(), r.witness.end()), {}, r.delta,
              r.mode});
  rep.samples = r.quadruples;
  rep.notes.push_back(r.mode);
  return rep;
}

ConstantsReport check_rh1(const BowditchSpace& bow, uint64_t seed) {
  int n = bow.graph.vertex_count();
  if (n <= 60) {
    FourPointMode mode;
    mode.kind = FourPointMode::Exhaustive;
    return check_rh1(bow, mode);
  }
  FourPointMode pool;
  pool.kind = FourPointMode::PoolExhaustive;
  pool.pool_size = 60;
  pool.seed = seed;
  FourPointMode sampled;
  sampled.kind = FourPointMode::SampledQuadruples;
  sampled.count = 4000;
  sampled.seed = seed;
  FourPointResult a = four_point_delta(bow.graph, pool);
  FourPointResult b = four_point_delta(bow.graph, sampled);
  const FourPointResult& best = a.delta >= b.delta ? a : b;
  ConstantsReport rep;
  rep.record("delta", best.delta,
             {VertexSet(best.witness.begin(), best.witness.end()), {},
              best.delta, best.mode});
  rep.samples = a.quadruples + b.quadruples;
  rep.notes.push_back(a.mode + ": delta " + num(a.delta));
  rep.notes.push_back(b.mode + ": delta " + num(b.delta));
  return rep;
}

double trace_vs_transient(const BowditchSpace& bow, const MetricGraph& g,
                          const PeripheralFamily& fam, Vertex x, Vertex y,
                          double mu, double R) {
  for (Vertex v : {x, y})
    if (v < 0 || v >= bow.x_count)
      throw ConfigError("trace endpoints must lie in the ambient graph");
  auto bowpath = shortest_path(bow.graph, x, y);
  VertexSet trace;
  for (Vertex v : bowpath->vertices)
    if (bow.in_x(v)) trace.push_back(v);
  normalize_set(trace);

  auto xpath = shortest_path(g, x, y);
  DistanceOracle oracle(g);
  FamilyOracle famO(g, oracle, fam);
  auto dec = decompose(famO, *xpath, {mu, R, false});
  return hausdorff_distance(g, trace, dec.transient_vertices());
}

DeverticalResult devertical(const BowditchSpace& bow, const MetricGraph& g,
                            const PathInSpace& bow_geodesic) {
  if (bow_geodesic.empty())
    throw ConfigError("devertical needs a nonempty geodesic");
  if (!bow.in_x(bow_geodesic.front()) || !bow.in_x(bow_geodesic.back()))
    throw ConfigError("devertical endpoints must lie in the ambient graph");

  std::vector<Vertex> stops;
  for (Vertex v : bow_geodesic.vertices)
    if (bow.in_x(v) && (stops.empty() || stops.back() != v))
      stops.push_back(v);

  DeverticalResult out;
  out.path.vertices = {stops.front()};
  out.path.cum = {0.0};
  auto step_len = [&g](Vertex u, Vertex v) {
    for (auto [w, len] : g.neighbors(u))
      if (w == v) return len;
    return -1.0;
  };
  for (size_t i = 1; i < stops.size(); ++i) {
    Vertex u = stops[i - 1], v = stops[i];
    double len = step_len(u, v);
    if (len > 0) {
      out.path.vertices.push_back(v);
      out.path.cum.push_back(out.path.cum.back() + len);
    } else {
      auto sp = shortest_path(g, u, v);
      for (size_t j = 1; j < sp->size(); ++j) {
        out.path.vertices.push_back(sp->vertices[j]);
        out.path.cum.push_back(out.path.cum.back() + sp->cum[j] -
                               sp->cum[j - 1]);
      }
    }
  }

  std::vector<Vertex> uniq = out.path.vertices;
  normalize_set(uniq);
  std::map<Vertex, std::vector<double>> rows;
  for (Vertex v : uniq) rows[v] = single_source_distances(g, v);
  double need = 1.0;
  int n = static_cast<int>(out.path.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double arc = out.path.cum[j] - out.path.cum[i];
      double d = rows[out.path.vertices[i]][out.path.vertices[j]];
      need = std::max(need, arc / (d + 1.0));
    }
  out.K = std::max(1.0, std::ceil(need - kTol));
  out.path.geodesic =
      std::abs(out.path.length() -
               rows[out.path.vertices.front()][out.path.vertices.back()]) <=
      kTol;
  out.path.qL = out.K;
  out.path.qC = out.K;
  return out;
}

void save_bowditch(std::ostream& out, const BowditchSpace& bow) {
  save_graph(out, bow.graph);
  for (Vertex v = 0; v < bow.graph.vertex_count(); ++v) {
    const BowVertex& b = bow.back[v];
    if (b.kind == BowVertex::kX)
      out << "BACKMAP " << v << " " << b.x << "\n";
    else
      out << "BACKMAP " << v << " H:" << b.member << ":" << b.level << "\n";
  }
}

void save_bowditch_file(const std::string& path, const BowditchSpace& bow) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open bowditch file: " + path);
  save_bowditch(out, bow);
  out.flush();
  if (!out) throw ConfigError("failed writing bowditch file: " + path);
}

}  // namespace relhyp
