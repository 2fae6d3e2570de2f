#include "relhyp/transient.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

namespace relhyp {

namespace {

constexpr double kStep = 1e-6;  // nudges escape thresholds past measured distances

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

VertexSet effective_pool(const MetricGraph& g, const VertexSet& pool) {
  if (pool.empty()) {
    VertexSet all(g.vertex_count());
    std::iota(all.begin(), all.end(), 0);
    return all;
  }
  for (Vertex v : pool)
    if (v < 0 || v >= g.vertex_count())
      throw ConfigError("pool vertex " + std::to_string(v) + " out of range");
  return pool;
}

double pointwise_diameter(const DistanceOracle& oracle, const VertexSet& s) {
  double d = 0.0;
  for (size_t i = 0; i < s.size(); ++i)
    for (size_t j = i + 1; j < s.size(); ++j)
      d = std::max(d, oracle.dist(s[i], s[j]));
  return d;
}

PathInSpace reverse_path(const PathInSpace& p) {
  PathInSpace out;
  int n = static_cast<int>(p.size());
  out.vertices.assign(p.vertices.rbegin(), p.vertices.rend());
  out.cum.resize(n);
  double total = p.length();
  for (int i = 0; i < n; ++i) out.cum[i] = total - p.cum[n - 1 - i];
  out.geodesic = p.geodesic;
  out.qL = p.qL;
  out.qC = p.qC;
  return out;
}

PathInSpace oriented(const PathInSpace& p, Vertex from) {
  return p.front() == from ? p : reverse_path(p);
}

std::vector<std::array<Vertex, 3>> corner_triples(const VertexSet& pool, int cap,
                                                  int budget,
                                                  std::mt19937_64& rng,
                                                  bool* exhaustive) {
  std::vector<std::array<Vertex, 3>> out;
  int n = static_cast<int>(pool.size());
  if (n <= cap) {
    *exhaustive = true;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int k = j + 1; k < n; ++k)
          out.push_back({pool[i], pool[j], pool[k]});
    return out;
  }
  *exhaustive = false;
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::set<std::array<Vertex, 3>> seen;
  long guard = 0;
  while (static_cast<int>(out.size()) < budget && guard < 20L * budget) {
    ++guard;
    int i = pick(rng), j = pick(rng), k = pick(rng);
    if (i == j || j == k || i == k) continue;
    std::array<Vertex, 3> t{pool[i], pool[j], pool[k]};
    std::sort(t.begin(), t.end());
    if (seen.insert(t).second) out.push_back(t);
  }
  return out;
}

// Geodesic variants per unordered corner pair, computed once per audit.
class SideCache {
 public:
  SideCache(const MetricGraph& g, const DistanceOracle& oracle, int extra,
            uint64_t seed)
      : g_(g), oracle_(oracle), extra_(extra), seed_(seed) {}

  const std::vector<PathInSpace>& variants(Vertex a, Vertex b) {
    Vertex lo = std::min(a, b), hi = std::max(a, b);
    auto it = cache_.find({lo, hi});
    if (it == cache_.end())
      it = cache_
               .emplace(std::make_pair(lo, hi),
                        geodesic_variants(
                            g_, oracle_, lo, hi, extra_,
                            mix_seed(seed_, uint64_t(lo) * 1315423911ull +
                                                uint64_t(hi))))
               .first;
    return it->second;
  }

 private:
  const MetricGraph& g_;
  const DistanceOracle& oracle_;
  int extra_;
  uint64_t seed_;
  std::map<std::pair<Vertex, Vertex>, std::vector<PathInSpace>> cache_;
};

struct NearPair {
  int m = 0;
  Vertex x = 0;
  Vertex y = 0;
};

// Pool vertex pairs lying within k of a common member, budget split evenly
// across the qualifying members; small members are enumerated outright.
std::vector<NearPair> near_member_pairs(const FamilyOracle& fam,
                                        const VertexSet& pool, double k,
                                        int budget, std::mt19937_64& rng) {
  std::vector<std::pair<int, std::vector<Vertex>>> nears;
  for (int m = 0; m < fam.size(); ++m) {
    const auto& dP = fam.member_distances(m);
    std::vector<Vertex> near;
    for (Vertex v : pool)
      if (dP[v] <= k + kTol) near.push_back(v);
    if (near.size() >= 2) nears.emplace_back(m, std::move(near));
  }
  std::vector<NearPair> out;
  if (nears.empty()) return out;
  long share = std::max<long>(1, budget / static_cast<long>(nears.size()));
  for (const auto& [m, near] : nears) {
    long all = static_cast<long>(near.size()) * (near.size() - 1) / 2;
    if (all <= share) {
      for (size_t i = 0; i < near.size(); ++i)
        for (size_t j = i + 1; j < near.size(); ++j)
          out.push_back({m, near[i], near[j]});
      continue;
    }
    std::uniform_int_distribution<size_t> pick(0, near.size() - 1);
    std::set<std::pair<Vertex, Vertex>> seen;
    long guard = 0;
    while (static_cast<long>(seen.size()) < share && guard < 20 * share) {
      ++guard;
      size_t i = pick(rng), j = pick(rng);
      if (i == j) continue;
      Vertex a = std::min(near[i], near[j]), b = std::max(near[i], near[j]);
      if (seen.insert({a, b}).second) out.push_back({m, a, b});
    }
  }
  return out;
}

}  // namespace

VertexSet TransientDecomposition::transient_vertices() const {
  VertexSet out;
  out.reserve(transient.size());
  for (int i : transient) out.push_back(path.vertices[i]);
  normalize_set(out);
  return out;
}

bool TransientDecomposition::is_transient(int index) const {
  return std::binary_search(transient.begin(), transient.end(), index);
}

TransientDecomposition decompose(const FamilyOracle& fam,
                                 const PathInSpace& path,
                                 const TransientParams& params) {
  if (params.mu < 0 || params.c < 0)
    throw ConfigError("transient scales must be nonnegative");
  if (path.empty()) throw ConfigError("cannot decompose an empty path");
  int n = static_cast<int>(path.size());
  std::vector<int> tag(n, -1);
  bool along_path = params.arclength || path.geodesic;
  const DistanceOracle& oracle = fam.oracle();
  for (int m = 0; m < fam.size(); ++m) {
    const std::vector<double>& dP = fam.member_distances(m);
    std::vector<int> witnesses;
    for (int i = 0; i < n; ++i)
      if (dP[path.vertices[i]] <= params.mu + kTol) witnesses.push_back(i);
    if (witnesses.size() < 2) continue;
    for (int i = 0; i < n; ++i) {
      if (tag[i] != -1) continue;
      bool before = false, after = false;
      if (along_path) {
        // separations along the path grow with the index gap, so the
        // extreme witnesses decide
        before = witnesses.front() < i &&
                 path.cum[i] - path.cum[witnesses.front()] > params.c + kTol;
        after = witnesses.back() > i &&
                path.cum[witnesses.back()] - path.cum[i] > params.c + kTol;
      } else {
        for (int j : witnesses) {
          if (j >= i) break;
          if (oracle.dist(path.vertices[j], path.vertices[i]) >
              params.c + kTol) {
            before = true;
            break;
          }
        }
        if (before)
          for (auto it = witnesses.rbegin();
               it != witnesses.rend() && *it > i; ++it)
            if (oracle.dist(path.vertices[*it], path.vertices[i]) >
                params.c + kTol) {
              after = true;
              break;
            }
      }
      if (before && after) tag[i] = m;
    }
  }
  TransientDecomposition out;
  out.path = path;
  for (int i = 0; i < n; ++i) {
    if (tag[i] == -1) {
      out.transient.push_back(i);
      continue;
    }
    if (!out.deep_components.empty() &&
        out.deep_components.back().member == tag[i] &&
        out.deep_components.back().end == i - 1)
      out.deep_components.back().end = i;
    else
      out.deep_components.push_back({tag[i], i, i});
  }
  return out;
}

TransientDecomposition decompose(const MetricGraph& g,
                                 const PeripheralFamily& fam,
                                 const PathInSpace& path,
                                 const TransientParams& params) {
  DistanceOracle oracle(g);
  FamilyOracle famO(g, oracle, fam);
  return decompose(famO, path, params);
}

TriangleSample make_triangle(const MetricGraph& g, Vertex a, Vertex b,
                             Vertex c) {
  TriangleSample t;
  t.corners = {a, b, c};
  const Vertex u[4] = {a, b, c, a};
  for (int i = 0; i < 3; ++i) {
    auto p = shortest_path(g, u[i], u[i + 1]);
    if (!p) throw GraphError("triangle corners are not connected");
    t.sides[i] = std::move(*p);
  }
  return t;
}

ConstantsReport check_relative_rips(const MetricGraph& g,
                                    const PeripheralFamily& fam,
                                    const RelRipsParams& params) {
  if (params.mu < 0 || params.R < 0)
    throw ConfigError("relative Rips scales must be nonnegative");
  DistanceOracle oracle(g);
  FamilyOracle famO(g, oracle, fam);
  VertexSet pool = effective_pool(g, params.pool);
  if (pool.size() < 3)
    throw ConfigError("relative Rips audit needs at least 3 pool vertices");
  std::mt19937_64 rng(mix_seed(params.seed, 0x9e3779b97f4a7c15ull));
  bool exhaustive = false;
  auto triples =
      corner_triples(pool, params.corner_cap, params.budget, rng, &exhaustive);
  ConstantsReport rep;
  rep.notes.push_back(exhaustive ? "corner triples exhaustive"
                                 : "corner triples sampled");
  TransientParams tp{params.mu, params.R, false};
  SideCache sides(g, oracle, std::max(0, params.variant_count - 1),
                  params.seed);
  // transient sets per (pair, variant) — triples share sides heavily
  std::map<std::tuple<Vertex, Vertex, int>, VertexSet> trans_cache;
  auto trans_of = [&](Vertex a, Vertex b, int idx,
                      const PathInSpace& p) -> const VertexSet& {
    auto key = std::make_tuple(std::min(a, b), std::max(a, b), idx);
    auto it = trans_cache.find(key);
    if (it == trans_cache.end())
      it = trans_cache.emplace(key, decompose(famO, p, tp).transient_vertices())
               .first;
    return it->second;
  };
  double D = 0.0;
  Witness best;
  long evals = 0;
  for (const auto& tri : triples) {
    std::array<int, 3> prev{-1, -1, -1};
    for (int round = 0; round <= params.variant_count; ++round) {
      std::array<const VertexSet*, 3> T{};
      std::array<int, 3> idx{};
      bool same = round > 0;
      for (int i = 0; i < 3; ++i) {
        const auto& vars = sides.variants(tri[i], tri[(i + 1) % 3]);
        idx[i] = std::min<int>(round, static_cast<int>(vars.size()) - 1);
        if (idx[i] != prev[i]) same = false;
        T[i] = &trans_of(tri[i], tri[(i + 1) % 3], idx[i], vars[idx[i]]);
      }
      if (same) break;
      prev = idx;
      ++evals;
      for (int r = 0; r < 3; ++r) {
        if (T[r]->empty()) continue;
        VertexSet uni = set_union(*T[(r + 1) % 3], *T[(r + 2) % 3]);
        std::vector<double> field = multi_source_distances(g, uni);
        for (Vertex z : *T[r])
          if (field[z] > D) {
            D = field[z];
            best = Witness{{tri[0], tri[1], tri[2], z},
                           {},
                           D,
                           "rotation " + std::to_string(r) + ", round " +
                               std::to_string(round)};
          }
      }
    }
  }
  rep.record("D", D, best);
  rep.samples = evals;
  return rep;
}

ConstantsReport check_rh3_cond2(const MetricGraph& g,
                                const PeripheralFamily& fam,
                                const Rh3Cond2Params& params) {
  if (params.mu < 0 || params.R < 0 || params.k < 0)
    throw ConfigError("rh3 scales must be nonnegative");
  DistanceOracle oracle(g);
  FamilyOracle famO(g, oracle, fam);
  VertexSet pool = effective_pool(g, params.pool);
  std::mt19937_64 rng(mix_seed(params.seed, 0xbf58476d1ce4e5b9ull));
  auto cands = near_member_pairs(famO, pool, params.k, params.budget, rng);
  if (cands.empty())
    throw CheckError("no-admissible-pairs: no two pool vertices sit within k=" +
                     num(params.k) + " of a common member");
  ConstantsReport rep;
  TransientParams tp{params.mu, params.R, false};
  double K = 0.0;
  Witness best;
  for (const auto& c : cands) {
    auto vars = geodesic_variants(
        g, oracle, c.x, c.y, params.variant_count,
        mix_seed(params.seed, uint64_t(c.x) * 2654435761ull + uint64_t(c.y)));
    const auto& dP = famO.member_distances(c.m);
    double quality = 0.0;
    bool reaches = true;
    for (const auto& p : vars) {
      auto dec = decompose(famO, p, tp);
      bool hit = false;
      for (int idx : dec.transient) {
        double dzx = p.cum[idx], dzy = p.length() - p.cum[idx];
        quality = std::max(quality, std::min(dzx, dzy));
        if (dP[p.vertices[idx]] <= params.mu + kTol) hit = true;
      }
      reaches = reaches && hit;
    }
    double dxy = oracle.dist(c.x, c.y);
    // a pair stops binding once K exceeds its separation
    double need = reaches ? std::min(quality, dxy + kStep) : dxy + kStep;
    if (need > K) {
      K = need;
      best = Witness{{c.x, c.y},
                     {c.m},
                     K,
                     reaches ? "ball clause"
                             : "no transient vertex reaches the member"};
    }
    ++rep.samples;
  }
  rep.record("K", K, best);
  return rep;
}

AtgClass classify_triangle_atg(const MetricGraph& g,
                               const PeripheralFamily& fam,
                               const TriangleSample& tri, double sigma,
                               double delta) {
  if (sigma < 0 || delta < 0)
    throw ConfigError("triangle classification scales must be nonnegative");
  std::array<std::vector<double>, 3> f;
  for (int i = 0; i < 3; ++i) {
    VertexSet s = tri.sides[i].vertices;
    normalize_set(s);
    f[i] = multi_source_distances(g, s);
  }
  AtgClass out;
  for (Vertex v = 0; v < g.vertex_count(); ++v)
    if (std::max({f[0][v], f[1][v], f[2][v]}) <= sigma + kTol) {
      out.kind = AtgClass::kCentre;
      out.centre = v;
      return out;
    }
  for (int m = 0; m < fam.size(); ++m) {
    std::vector<double> dP = multi_source_distances(g, fam[m]);
    std::array<int, 3> ent{-1, -1, -1}, ext{-1, -1, -1};
    bool meets = true;
    for (int i = 0; i < 3 && meets; ++i) {
      const auto& vs = tri.sides[i].vertices;
      for (int t = 0; t < static_cast<int>(vs.size()); ++t)
        if (dP[vs[t]] <= sigma + kTol) {
          if (ent[i] < 0) ent[i] = t;
          ext[i] = t;
        }
      meets = ent[i] >= 0;
    }
    if (!meets) continue;
    std::array<double, 3> gaps{};
    bool tight = true;
    for (int i = 0; i < 3; ++i) {
      Vertex from = tri.sides[i].vertices[ext[i]];
      Vertex to = tri.sides[(i + 1) % 3].vertices[ent[(i + 1) % 3]];
      gaps[i] = single_source_distances(g, from)[to];
      tight = tight && gaps[i] <= delta + kTol;
    }
    if (!tight) continue;
    out.kind = AtgClass::kPeripheral;
    out.member = m;
    for (int i = 0; i < 3; ++i) {
      out.entries[i] = tri.sides[i].vertices[ent[i]];
      out.exits[i] = tri.sides[i].vertices[ext[i]];
      out.gaps[i] = gaps[i];
    }
    return out;
  }
  return out;
}

ConstantsReport atg_audit(const MetricGraph& g, const PeripheralFamily& fam,
                          const AtgAuditParams& params) {
  DistanceOracle oracle(g);
  FamilyOracle famO(g, oracle, fam);
  VertexSet pool = effective_pool(g, params.pool);
  if (pool.size() < 3)
    throw ConfigError("triangle audit needs at least 3 pool vertices");
  std::mt19937_64 rng(mix_seed(params.seed, 0x94d049bb133111ebull));
  bool exhaustive = false;
  auto triples =
      corner_triples(pool, params.corner_cap, params.budget, rng, &exhaustive);
  ConstantsReport rep;
  rep.notes.push_back(exhaustive ? "corner triples exhaustive"
                                 : "corner triples sampled");
  SideCache cache(g, oracle, std::max(0, params.variant_count - 1),
                  params.seed);
  double sig = 0.0, del = 0.0;
  Witness wsig, wdel;
  long evals = 0;
  for (const auto& tri : triples) {
    std::array<int, 3> prev{-1, -1, -1};
    for (int round = 0; round <= params.variant_count; ++round) {
      std::array<PathInSpace, 3> side;
      std::array<int, 3> idx{};
      bool same = round > 0;
      for (int i = 0; i < 3; ++i) {
        const auto& vars = cache.variants(tri[i], tri[(i + 1) % 3]);
        idx[i] = std::min<int>(round, static_cast<int>(vars.size()) - 1);
        if (idx[i] != prev[i]) same = false;
        side[i] = oriented(vars[idx[i]], tri[i]);
      }
      if (same) break;
      prev = idx;
      ++evals;
      std::array<std::vector<double>, 3> f;
      for (int i = 0; i < 3; ++i) {
        VertexSet s = side[i].vertices;
        normalize_set(s);
        f[i] = multi_source_distances(g, s);
      }
      double sigC = kInf;
      Vertex centre = -1;
      for (Vertex v = 0; v < g.vertex_count(); ++v) {
        double cost = std::max({f[0][v], f[1][v], f[2][v]});
        if (cost < sigC) {
          sigC = cost;
          centre = v;
        }
      }
      double sigP = kInf;
      int mbest = -1;
      for (int m = 0; m < famO.size(); ++m) {
        const auto& dP = famO.member_distances(m);
        double need = 0.0;
        for (int i = 0; i < 3; ++i) {
          double dmin = kInf;
          for (Vertex v : side[i].vertices) dmin = std::min(dmin, dP[v]);
          need = std::max(need, dmin);
        }
        if (need < sigP - kTol) {
          sigP = need;
          mbest = m;
        }
      }
      if (mbest < 0 || sigC <= sigP + kTol) {
        if (sigC > sig) {
          sig = sigC;
          wsig = Witness{{tri[0], tri[1], tri[2], centre},
                         {},
                         sigC,
                         "central ball"};
        }
        continue;
      }
      const auto& dP = famO.member_distances(mbest);
      std::array<int, 3> ent{}, ext{};
      for (int i = 0; i < 3; ++i) {
        ent[i] = -1;
        for (int t = 0; t < static_cast<int>(side[i].size()); ++t)
          if (dP[side[i].vertices[t]] <= sigP + kTol) {
            if (ent[i] < 0) ent[i] = t;
            ext[i] = t;
          }
      }
      double gap = 0.0;
      for (int i = 0; i < 3; ++i) {
        Vertex from = side[i].vertices[ext[i]];
        Vertex to = side[(i + 1) % 3].vertices[ent[(i + 1) % 3]];
        gap = std::max(gap, single_source_distances(g, from)[to]);
      }
      if (sigP > sig) {
        sig = sigP;
        wsig = Witness{{tri[0], tri[1], tri[2]},
                       {mbest},
                       sigP,
                       "peripheral neighborhood"};
      }
      if (gap > del) {
        del = gap;
        wdel = Witness{{tri[0], tri[1], tri[2]},
                       {mbest},
                       gap,
                       "exit-to-entrance gap"};
      }
    }
  }
  rep.record("sigma", sig, wsig);
  rep.record("delta", del, wdel);
  rep.samples = evals;
  return rep;
}

ConstantsReport check_transient_stability(
    const MetricGraph& g, const PeripheralFamily& fam,
    const std::vector<std::pair<PathInSpace, PathInSpace>>& pairs,
    const StabilityParams& params) {
  if (params.mu < 0 || params.R < 0)
    throw ConfigError("stability scales must be nonnegative");
  DistanceOracle oracle(g);
  FamilyOracle famO(g, oracle, fam);
  ConstantsReport rep;
  TransientParams tp{params.mu, params.R, params.arclength};
  double M = 0.0, t = 1.0;
  Witness wM, wt;
  bool mu_zero_deep = false;
  int pair_no = 0;
  for (const auto& pr : pairs) {
    ++pair_no;
    const PathInSpace& a = pr.first;
    const PathInSpace& b = pr.second;
    if (a.empty() || b.empty())
      throw ConfigError("stability pair " + std::to_string(pair_no) +
                        " holds an empty path");
    if (a.front() != b.front() || a.back() != b.back())
      throw CheckError(
          "endpoint-mismatch at pair " + std::to_string(pair_no) + ": (" +
          std::to_string(a.front()) + ", " + std::to_string(a.back()) +
          ") vs (" + std::to_string(b.front()) + ", " +
          std::to_string(b.back()) + ")");
    auto da = decompose(famO, a, tp);
    auto db = decompose(famO, b, tp);
    double h = hausdorff_distance(g, da.transient_vertices(),
                                  db.transient_vertices());
    if (h > M) {
      M = h;
      wM = Witness{{a.front(), a.back()}, {}, M,
                   "pair " + std::to_string(pair_no)};
    }
    for (const auto* decp : {&da, &db}) {
      const auto& dec = *decp;
      for (const auto& comp : dec.deep_components) {
        const auto& dP = famO.member_distances(comp.member);
        double depth = 0.0;
        for (int i = comp.start; i <= comp.end; ++i)
          depth = std::max(depth, dP[dec.path.vertices[i]]);
        if (params.mu > kTol) {
          double ratio = std::max(1.0, depth / params.mu);
          if (ratio > t) {
            t = ratio;
            wt = Witness{{dec.path.vertices[comp.start]},
                         {comp.member},
                         ratio,
                         "deep component reaches depth " + num(depth)};
          }
        } else if (depth > kTol) {
          mu_zero_deep = true;
        }
      }
      for (int m = 0; m < famO.size(); ++m) {
        const auto& dP = famO.member_distances(m);
        std::vector<int> inside;
        for (int i = 0; i < static_cast<int>(dec.path.size()); ++i)
          if (dP[dec.path.vertices[i]] <= params.mu + kTol) inside.push_back(i);
        if (inside.empty()) continue;
        VertexSet visit;
        for (int i : inside) visit.push_back(dec.path.vertices[i]);
        normalize_set(visit);
        if (pointwise_diameter(oracle, visit) < 2 * params.R - kTol) continue;
        if (!dec.is_transient(inside.front())) {
          rep.violation = true;
          if (rep.violations.size() < 16)
            rep.violations.push_back(
                Witness{{dec.path.vertices[inside.front()]},
                        {m},
                        dP[dec.path.vertices[inside.front()]],
                        "entrance of a wide peripheral visit is deep (pair " +
                            std::to_string(pair_no) + ")"});
        }
      }
    }
    ++rep.samples;
  }
  if (mu_zero_deep)
    rep.notes.push_back("mu=0: containment stretch not measured");
  rep.record("M", M, wM);
  rep.record("t", t, wt);
  return rep;
}

// --- guessed geodesics -----------------------------------------------------

VertexSet GGPair::trans_vertices() const {
  VertexSet out;
  out.reserve(trans.size());
  for (int i : trans) out.push_back(eta.vertices[i]);
  normalize_set(out);
  return out;
}

void GGFamily::insert(Vertex x, Vertex y, GGPair p) {
  std::sort(p.trans.begin(), p.trans.end());
  p.trans.erase(std::unique(p.trans.begin(), p.trans.end()), p.trans.end());
  pairs[{x, y}] = std::move(p);
}

bool GGFamily::has(Vertex x, Vertex y) const {
  return pairs.count({x, y}) > 0 || pairs.count({y, x}) > 0;
}

GGPair GGFamily::pair(Vertex x, Vertex y) const {
  auto it = pairs.find({x, y});
  if (it != pairs.end()) return it->second;
  it = pairs.find({y, x});
  if (it == pairs.end())
    throw CheckError("gg family has no pair (" + std::to_string(x) + ", " +
                     std::to_string(y) + ")");
  const GGPair& src = it->second;
  GGPair out;
  out.eta = reverse_path(src.eta);
  int n = static_cast<int>(src.eta.size());
  out.trans.reserve(src.trans.size());
  for (int i : src.trans) out.trans.push_back(n - 1 - i);
  std::sort(out.trans.begin(), out.trans.end());
  return out;
}

GGPair FileGGProvider::pair(Vertex x, Vertex y) const {
  if (!fam_.has(x, y))
    throw CheckError("gg family missing pool pair (" + std::to_string(x) +
                     ", " + std::to_string(y) + ")");
  return fam_.pair(x, y);
}

bool TransientGGProvider::has(Vertex x, Vertex y) const {
  int n = fam_.graph().vertex_count();
  return x >= 0 && x < n && y >= 0 && y < n;
}

GGPair TransientGGProvider::pair(Vertex x, Vertex y) const {
  if (!has(x, y))
    throw CheckError("gg pair (" + std::to_string(x) + ", " +
                     std::to_string(y) + ") out of range");
  auto sp = shortest_path(fam_.graph(), x, y);
  if (!sp)
    throw CheckError("no path between " + std::to_string(x) + " and " +
                     std::to_string(y));
  auto dec = decompose(fam_, *sp, params_);
  GGPair out;
  out.eta = std::move(dec.path);
  out.trans = std::move(dec.transient);
  return out;
}

HubDetourProvider::HubDetourProvider(const MetricGraph& g,
                                     const DistanceOracle& oracle)
    : g_(g), oracle_(oracle) {
  // double sweep: a diameter endpoint makes a maximally eccentric hub
  auto d0 = single_source_distances(g, 0);
  Vertex u = 0;
  for (Vertex v = 1; v < g.vertex_count(); ++v)
    if (d0[v] > d0[u]) u = v;
  auto du = single_source_distances(g, u);
  hub_ = 0;
  for (Vertex v = 1; v < g.vertex_count(); ++v)
    if (du[v] > du[hub_]) hub_ = v;
}

bool HubDetourProvider::has(Vertex x, Vertex y) const {
  return x >= 0 && x < g_.vertex_count() && y >= 0 && y < g_.vertex_count();
}

GGPair HubDetourProvider::pair(Vertex x, Vertex y) const {
  if (!has(x, y))
    throw CheckError("gg pair (" + std::to_string(x) + ", " +
                     std::to_string(y) + ") out of range");
  GGPair out;
  if (x == y) {
    out.eta.vertices = {x};
    out.eta.cum = {0.0};
    out.eta.geodesic = true;
    out.trans = {0};
    return out;
  }
  Vertex a = std::max(x, y), b = std::min(x, y);
  double depth = std::min(oracle_.dist(a, b), oracle_.dist(a, hub_));
  auto burrow = shortest_path(g_, a, hub_);
  int w = 0;
  while (w + 1 < static_cast<int>(burrow->size()) &&
         burrow->cum[w + 1] <= depth + kTol)
    ++w;
  PathInSpace eta;
  if (w == 0) {
    eta = *shortest_path(g_, a, b);
  } else {
    PathInSpace prefix;
    prefix.vertices.assign(burrow->vertices.begin(),
                           burrow->vertices.begin() + w + 1);
    prefix.cum.assign(burrow->cum.begin(), burrow->cum.begin() + w + 1);
    prefix.geodesic = true;
    eta = concat_paths(prefix, *shortest_path(g_, burrow->vertices[w], b));
    eta.geodesic = std::abs(eta.length() - oracle_.dist(a, b)) <= kTol;
  }
  if (x < y) eta = reverse_path(eta);
  out.eta = std::move(eta);
  out.trans.resize(out.eta.size());
  std::iota(out.trans.begin(), out.trans.end(), 0);
  return out;
}

ConstantsReport gg_condition_audit(const MetricGraph& g,
                                   const PeripheralFamily& fam,
                                   const GGProvider& provider,
                                   const GGAuditParams& params) {
  if (params.cap <= 0)
    throw ConfigError("plausibility cap must be positive");
  DistanceOracle oracle(g);
  FamilyOracle famO(g, oracle, fam);
  VertexSet pool = effective_pool(g, params.pool);
  if (pool.size() < 2)
    throw ConfigError("gg audit needs at least 2 pool vertices");
  std::mt19937_64 rng(mix_seed(params.seed, 0xd6e8feb86659fd93ull));
  ConstantsReport rep;

  std::map<std::pair<Vertex, Vertex>, GGPair> cache;
  auto fetch = [&](Vertex x, Vertex y) -> const GGPair& {
    auto it = cache.find({x, y});
    if (it != cache.end()) return it->second;
    if (!provider.has(x, y))
      throw CheckError("gg family missing pool pair (" + std::to_string(x) +
                       ", " + std::to_string(y) + ")");
    return cache.emplace(std::make_pair(x, y), provider.pair(x, y))
        .first->second;
  };
  std::map<std::pair<Vertex, Vertex>, VertexSet> tcache;
  auto fetch_trans = [&](Vertex x, Vertex y) -> const VertexSet& {
    auto it = tcache.find({x, y});
    if (it != tcache.end()) return it->second;
    return tcache.emplace(std::make_pair(x, y), fetch(x, y).trans_vertices())
        .first->second;
  };

  std::vector<std::pair<Vertex, Vertex>> all_pairs;
  for (size_t i = 0; i < pool.size(); ++i)
    for (size_t j = i + 1; j < pool.size(); ++j)
      all_pairs.emplace_back(pool[i], pool[j]);
  std::vector<std::pair<Vertex, Vertex>> sampled = all_pairs;
  std::shuffle(sampled.begin(), sampled.end(), rng);
  if (static_cast<int>(sampled.size()) > params.budget)
    sampled.resize(params.budget);

  // (1) short pairs keep small transient diameter
  {
    double D1 = 0.0;
    Witness w1;
    long n1 = 0;
    for (const auto& [x, y] : all_pairs) {
      if (oracle.dist(x, y) > 2 + kTol) continue;
      double d = pointwise_diameter(oracle, fetch_trans(x, y));
      ++n1;
      if (d > D1) {
        D1 = d;
        w1 = Witness{{x, y}, {}, d, "short pair"};
      }
    }
    if (n1 == 0) rep.notes.push_back("condition (1): no pool pairs within distance 2");
    rep.record("D1", D1, w1);
    rep.samples += n1;
  }

  // (2) trans behaves under passing to subpaths
  {
    double D2 = 0.0;
    Witness w2;
    bool skipped = false;
    long n2 = 0;
    for (const auto& [x, y] : sampled) {
      const GGPair& gp = fetch(x, y);
      int n = static_cast<int>(gp.eta.size());
      if (n < 2) continue;
      std::vector<std::pair<int, int>> subs{{0, n - 1}};
      std::uniform_int_distribution<int> pos(0, n - 1);
      for (int s = 0; s < params.subpairs; ++s) {
        int i = pos(rng), j = pos(rng);
        if (i > j) std::swap(i, j);
        subs.emplace_back(i, j);
      }
      std::sort(subs.begin(), subs.end());
      subs.erase(std::unique(subs.begin(), subs.end()), subs.end());
      for (const auto& [i, j] : subs) {
        Vertex xs = gp.eta.vertices[i], ys = gp.eta.vertices[j];
        if (xs == ys) continue;
        if (!provider.has(xs, ys)) {
          skipped = true;
          continue;
        }
        VertexSet inner = provider.pair(xs, ys).trans_vertices();
        VertexSet outer;
        for (int t : gp.trans)
          if (t >= i && t <= j) outer.push_back(gp.eta.vertices[t]);
        outer.push_back(xs);
        outer.push_back(ys);
        normalize_set(outer);
        double h = hausdorff_distance(g, inner, outer);
        ++n2;
        if (h > D2) {
          D2 = h;
          w2 = Witness{{x, y, xs, ys}, {}, h, "subpath restriction"};
        }
      }
    }
    if (skipped)
      rep.notes.push_back("condition (2): subpairs limited to stored pairs");
    rep.record("D2", D2, w2);
    rep.samples += n2;
  }

  // (3) transient sets of triangles stay thin
  {
    double D3 = 0.0;
    Witness w3;
    bool exhaustive = false;
    auto triples = corner_triples(pool, params.triple_cap, params.budget, rng,
                                  &exhaustive);
    rep.notes.push_back(exhaustive ? "condition (3): triples exhaustive"
                                   : "condition (3): triples sampled");
    for (const auto& tri : triples) {
      for (int r = 0; r < 3; ++r) {
        const VertexSet& t0 = fetch_trans(tri[r], tri[(r + 1) % 3]);
        VertexSet uni = set_union(fetch_trans(tri[r], tri[(r + 2) % 3]),
                                  fetch_trans(tri[(r + 1) % 3], tri[(r + 2) % 3]));
        double d = directed_hausdorff(g, t0, uni);
        if (d > D3) {
          D3 = d;
          w3 = Witness{{tri[r], tri[(r + 1) % 3], tri[(r + 2) % 3]},
                       {},
                       d,
                       "triple rotation"};
        }
      }
      rep.samples += 3;
    }
    rep.record("D3", D3, w3);
  }

  // (4) transient-free stretches stay inside single members
  {
    std::vector<std::vector<int>> members_of(g.vertex_count());
    for (int m = 0; m < fam.size(); ++m)
      for (Vertex v : fam[m]) members_of[v].push_back(m);
    double D4 = 0.0;
    Witness w4;
    bool endpoint_note = false;
    for (const auto& [x, y] : sampled) {
      const GGPair& gp = fetch(x, y);
      int n = static_cast<int>(gp.eta.size());
      std::vector<int> ti = gp.trans;
      if (ti.empty() || ti.front() != 0) {
        ti.insert(ti.begin(), 0);
        endpoint_note = true;
      }
      if (ti.back() != n - 1) {
        ti.push_back(n - 1);
        endpoint_note = true;
      }
      for (size_t s = 0; s + 1 < ti.size(); ++s) {
        int lo = ti[s], hi = ti[s + 1];
        if (hi - lo < 2) continue;
        for (int i = lo + 1; i < hi; ++i) {
          const auto& mi = members_of[gp.eta.vertices[i]];
          for (int j = i; j < hi; ++j) {
            const auto& mj = members_of[gp.eta.vertices[j]];
            bool common = false;
            for (int m : mi) {
              if (std::binary_search(mj.begin(), mj.end(), m)) {
                common = true;
                break;
              }
            }
            if (common) continue;
            double sev = gp.eta.cum[j] - gp.eta.cum[i];
            rep.violation = true;
            if (rep.violations.size() < 16)
              rep.violations.push_back(
                  Witness{{x, y, gp.eta.vertices[i], gp.eta.vertices[j]},
                          {},
                          sev,
                          "transient-free stretch leaves every member"});
            if (sev > D4) {
              D4 = sev;
              w4 = Witness{{x, y, gp.eta.vertices[i], gp.eta.vertices[j]},
                           {},
                           sev,
                           "uncovered stretch"};
            }
          }
        }
      }
      ++rep.samples;
    }
    if (endpoint_note)
      rep.notes.push_back("condition (4): endpoints treated as transient");
    rep.record("D4", D4, w4);
  }

  // (5) members overlap boundedly
  {
    Alpha1Params a1;
    a1.K = params.alpha1_K;
    a1.pool = pool;
    auto sub = check_alpha1(g, fam, a1);
    Witness w5;
    if (sub.witnesses.count("B")) w5 = sub.witnesses.at("B");
    rep.record("B5", sub.has("B") ? sub.at("B") : 0.0, w5);
    if (sub.violation) {
      rep.violation = true;
      rep.notes.push_back("condition (5): member overlap violation");
    }
    rep.samples += sub.samples;
  }

  // (6) pairs near one member pin their transient sets to the endpoints
  {
    double K6 = 0.0, D6 = 0.0;
    Witness wk, wd;
    long n6 = 0;
    for (double k : params.k_grid) {
      auto cands = near_member_pairs(famO, pool, k, params.budget, rng);
      if (cands.empty()) {
        rep.notes.push_back("condition (6): no admissible pairs at k=" +
                            num(k));
        continue;
      }
      struct Row {
        const NearPair* c;
        double dxy, quality, depth;
      };
      std::vector<Row> rows;
      rows.reserve(cands.size());
      double Kk = 0.0;
      for (const auto& c : cands) {
        const GGPair& gp = fetch(c.x, c.y);
        const auto& dP = famO.member_distances(c.m);
        double quality = 0.0, depth = kInf;
        for (int t : gp.trans) {
          Vertex z = gp.eta.vertices[t];
          quality = std::max(
              quality, std::min(oracle.dist(c.x, z), oracle.dist(c.y, z)));
          depth = std::min(depth, dP[z]);
        }
        double dxy = oracle.dist(c.x, c.y);
        double need = std::min(quality, dxy + kStep);
        if (need > Kk) {
          Kk = need;
          if (need > K6)
            wk = Witness{{c.x, c.y}, {c.m}, need, "k=" + num(k)};
        }
        rows.push_back({&c, dxy, quality, depth});
      }
      double Dk = 0.0;
      for (const auto& r : rows)
        if (r.dxy >= Kk - kTol && r.depth > Dk) {
          Dk = r.depth;
          if (r.depth > D6)
            wd = Witness{{r.c->x, r.c->y}, {r.c->m}, r.depth, "k=" + num(k)};
        }
      K6 = std::max(K6, Kk);
      D6 = std::max(D6, Dk);
      n6 += static_cast<long>(cands.size());
      rep.notes.push_back("condition (6): k=" + num(k) + " K=" + num(Kk) +
                          " depth=" + num(Dk) + " over " +
                          std::to_string(cands.size()) + " pairs");
    }
    rep.record("K6", K6, wk);
    rep.record("D6", D6, wd);
    rep.samples += n6;
  }

  bool ok = !rep.violation;
  for (const auto& [sym, value] : rep.constants)
    if (value > params.cap + kTol) ok = false;
  rep.notes.push_back(std::string("verdict: ") +
                      (ok ? "plausible" : "implausible") + " (cap " +
                      num(params.cap) + ")");
  return rep;
}

ConstantsReport gg_compare(const MetricGraph& g, const PeripheralFamily& fam,
                           const GGProvider& provider,
                           const std::vector<PathInSpace>& betas,
                           const GGCompareParams& params) {
  if (params.mu < 0 || params.c < 0)
    throw ConfigError("gg compare scales must be nonnegative");
  DistanceOracle oracle(g);
  FamilyOracle famO(g, oracle, fam);
  ConstantsReport rep;
  TransientParams tp{params.mu, params.c, params.arclength};
  double L = 0.0;
  Witness best;
  for (const auto& beta : betas) {
    if (beta.empty()) throw ConfigError("gg compare given an empty path");
    Vertex x = beta.front(), y = beta.back();
    if (!provider.has(x, y))
      throw CheckError("gg family missing pool pair (" + std::to_string(x) +
                       ", " + std::to_string(y) + ")");
    VertexSet guessed = provider.pair(x, y).trans_vertices();
    VertexSet measured = decompose(famO, beta, tp).transient_vertices();
    double h = hausdorff_distance(g, guessed, measured);
    if (h > L) {
      L = h;
      best = Witness{{x, y}, {}, h, "guessed vs measured transient sets"};
    }
    ++rep.samples;
  }
  rep.record("L", L, best);
  return rep;
}

GGFamily load_gg_family(std::istream& in, const MetricGraph& g) {
  GGFamily out;
  std::string line;
  int lineno = 0, pair_line = 0;
  bool have_pair = false, have_eta = false, have_trans = false;
  Vertex px = 0, py = 0;
  GGPair cur;

  auto edge_len = [&g](Vertex u, Vertex v) -> double {
    for (const auto& [to, w] : g.neighbors(u))
      if (to == v) return w;
    return -1.0;
  };
  auto fail = [&lineno](const std::string& what) {
    throw FormatError("line " + std::to_string(lineno) + ": " + what);
  };
  auto flush = [&]() {
    if (!have_pair) return;
    if (!have_eta)
      throw FormatError("line " + std::to_string(pair_line) +
                        ": PAIR without ETA");
    if (!have_trans)
      throw FormatError("line " + std::to_string(pair_line) +
                        ": PAIR without TRANS");
    if (out.has(px, py))
      throw FormatError("line " + std::to_string(pair_line) +
                        ": duplicate pair (" + std::to_string(px) + ", " +
                        std::to_string(py) + ")");
    out.insert(px, py, std::move(cur));
    cur = GGPair{};
    have_pair = have_eta = have_trans = false;
  };

  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    std::vector<long> ints;
    std::string tok;
    while (ss >> tok) {
      try {
        size_t used = 0;
        long v = std::stol(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        ints.push_back(v);
      } catch (const std::exception&) {
        fail("bad integer '" + tok + "'");
      }
    }
    if (tag == "PAIR") {
      flush();
      if (ints.size() != 2) fail("PAIR wants exactly two vertex ids");
      for (long v : ints)
        if (v < 0 || v >= g.vertex_count())
          fail("vertex " + std::to_string(v) + " out of range");
      if (ints[0] == ints[1]) fail("PAIR endpoints coincide");
      px = static_cast<Vertex>(ints[0]);
      py = static_cast<Vertex>(ints[1]);
      have_pair = true;
      pair_line = lineno;
    } else if (tag == "ETA") {
      if (!have_pair || have_eta) fail("stray ETA");
      if (ints.empty()) fail("empty ETA");
      PathInSpace p;
      for (long v : ints) {
        if (v < 0 || v >= g.vertex_count())
          fail("vertex " + std::to_string(v) + " out of range");
        p.vertices.push_back(static_cast<Vertex>(v));
      }
      if (p.front() != px || p.back() != py)
        fail("eta endpoints disagree with PAIR");
      p.cum.resize(p.size());
      p.cum[0] = 0.0;
      for (size_t i = 1; i < p.size(); ++i) {
        double w = edge_len(p.vertices[i - 1], p.vertices[i]);
        if (w < 0)
          fail("eta vertices " + std::to_string(p.vertices[i - 1]) + " and " +
               std::to_string(p.vertices[i]) + " are not adjacent");
        p.cum[i] = p.cum[i - 1] + w;
      }
      cur.eta = std::move(p);
      have_eta = true;
    } else if (tag == "TRANS") {
      if (!have_eta || have_trans) fail("stray TRANS");
      for (long v : ints) {
        if (v < 0 || v >= static_cast<long>(cur.eta.size()))
          fail("trans index " + std::to_string(v) + " out of range");
        cur.trans.push_back(static_cast<int>(v));
      }
      have_trans = true;
    } else {
      fail("unknown tag '" + tag + "'");
    }
  }
  flush();
  return out;
}

GGFamily load_gg_family_file(const std::string& path, const MetricGraph& g) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open gg family file: " + path);
  return load_gg_family(in, g);
}

void save_gg_family(std::ostream& out, const GGFamily& fam) {
  for (const auto& [key, gp] : fam.pairs) {
    out << "PAIR " << key.first << ' ' << key.second << '\n';
    out << "ETA";
    for (Vertex v : gp.eta.vertices) out << ' ' << v;
    out << '\n';
    out << "TRANS";
    for (int i : gp.trans) out << ' ' << i;
    out << '\n';
  }
}

void save_gg_family_file(const std::string& path, const GGFamily& fam) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open gg family file: " + path);
  save_gg_family(out, fam);
  if (!out.flush()) throw ConfigError("failed writing gg family file: " + path);
}

}  // namespace relhyp
