#include "relhyp/peripherals.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace relhyp {

void PeripheralFamily::validate(const MetricGraph& g) const {
  for (size_t i = 0; i < members.size(); ++i) {
    const VertexSet& m = members[i];
    if (m.empty())
      throw ConfigError("peripheral member " + std::to_string(i) +
                        " is empty");
    for (Vertex v : m)
      if (v < 0 || v >= g.vertex_count())
        throw ConfigError("peripheral member " + std::to_string(i) +
                          " mentions vertex " + std::to_string(v) +
                          " outside the graph");
    if (!std::is_sorted(m.begin(), m.end()) ||
        std::adjacent_find(m.begin(), m.end()) != m.end())
      throw ConfigError("peripheral member " + std::to_string(i) +
                        " is not a normalized vertex set");
    CoarseConnectivity cc =
        is_coarsely_connected(g, m, coarse_connectivity_K);
    if (!cc.connected)
      throw ConfigError(
          "peripheral member " + std::to_string(i) + " splits at scale " +
          std::to_string(coarse_connectivity_K) + ": vertices " +
          std::to_string(cc.witness_a) + " and " + std::to_string(cc.witness_b) +
          " sit " + std::to_string(cc.gap) + " apart");
  }
}

const std::vector<double>& FamilyOracle::member_distances(int i) const {
  if (!dist_[i])
    dist_[i] = std::make_unique<std::vector<double>>(
        multi_source_distances(g_, fam_.members[i]));
  return *dist_[i];
}

const std::vector<Vertex>& FamilyOracle::member_projections(int i) const {
  if (!proj_[i]) {
    auto dist = std::make_unique<std::vector<double>>();
    auto proj = std::make_unique<std::vector<Vertex>>();
    oracle_.attributed_sweep(fam_.members[i], *dist, *proj);
    if (!dist_[i]) dist_[i] = std::move(dist);
    proj_[i] = std::move(proj);
  }
  return *proj_[i];
}

Vertex project(const MetricGraph& g, const DistanceOracle& oracle, Vertex x,
               const VertexSet& member) {
  (void)g;
  if (member.empty()) throw ConfigError("projection to an empty set");
  Vertex best = member.front();
  double bd = oracle.dist(x, best);
  for (Vertex p : member) {
    double d = oracle.dist(x, p);
    if (d < bd - kTol) {
      bd = d;
      best = p;
    }
  }
  return best;
}

void ConstantsReport::record(const std::string& symbol, double value,
                             Witness w) {
  constants[symbol] = value;
  w.value = value;
  witnesses[symbol] = std::move(w);
}

double ConstantsReport::at(const std::string& symbol) const {
  auto it = constants.find(symbol);
  if (it == constants.end())
    throw CheckError("report has no constant '" + symbol + "'");
  return it->second;
}

namespace {

VertexSet full_pool(const MetricGraph& g) {
  VertexSet pool(g.vertex_count());
  for (Vertex v = 0; v < g.vertex_count(); ++v) pool[v] = v;
  return pool;
}

VertexSet effective_pool(const MetricGraph& g, const VertexSet& requested) {
  return requested.empty() ? full_pool(g) : requested;
}

// diameter of a small vertex set through cached point rows
double pointwise_diameter(const DistanceOracle& oracle, const VertexSet& s,
                          Vertex& far_a, Vertex& far_b) {
  double best = 0.0;
  far_a = far_b = s.empty() ? -1 : s.front();
  for (size_t i = 0; i < s.size(); ++i)
    for (size_t j = i + 1; j < s.size(); ++j) {
      double d = oracle.dist(s[i], s[j]);
      if (d > best) {
        best = d;
        far_a = s[i];
        far_b = s[j];
      }
    }
  return best;
}

}  // namespace

ConstantsReport check_alpha1(const MetricGraph& g, const PeripheralFamily& fam,
                             const Alpha1Params& params) {
  if (params.K < 0) throw ConfigError("alpha1: K must be nonnegative");
  DistanceOracle oracle(g);
  FamilyOracle fo(g, oracle, fam);
  VertexSet pool = effective_pool(g, params.pool);

  ConstantsReport report;
  if (fam.size() < 2) {
    report.record("B", 0.0, {{}, {}, 0.0, "fewer than two members"});
    report.notes.push_back("alpha1 needs two members to say anything");
    return report;
  }

  // each pool vertex lists the members whose K-neighborhood holds it; only
  // co-listed pairs can intersect, so the quadratic pair scan never runs
  std::vector<std::vector<int>> holders(g.vertex_count());
  for (int i = 0; i < fo.size(); ++i) {
    const std::vector<double>& d = fo.member_distances(i);
    for (Vertex v : pool)
      if (d[v] <= params.K + kTol) holders[v].push_back(i);
  }
  std::map<std::pair<int, int>, VertexSet> overlap;
  for (Vertex v = 0; v < g.vertex_count(); ++v)
    for (size_t a = 0; a < holders[v].size(); ++a)
      for (size_t b = a + 1; b < holders[v].size(); ++b)
        overlap[{holders[v][a], holders[v][b]}].push_back(v);

  double space_diam = 0.0;
  if (pool.size() <= 64) {
    Vertex fa, fb;
    space_diam = pointwise_diameter(oracle, pool, fa, fb);
  } else {
    space_diam = oracle.diameter();
  }

  double B = 0.0;
  Witness best{{}, {}, 0.0, "all neighborhood intersections trivial"};
  report.samples = static_cast<long>(overlap.size());
  for (auto& [pair, inter] : overlap) {
    Vertex fa, fb;
    double d = pointwise_diameter(oracle, inter, fa, fb);
    if (d > B) {
      B = d;
      best = {{fa, fb},
              {pair.first, pair.second},
              d,
              "diameter of the K-neighborhood intersection"};
    }
    if (space_diam > 0 && d >= params.violation_fraction * space_diam) {
      report.violation = true;
      report.violations.push_back(
          {{fa, fb},
           {pair.first, pair.second},
           d,
           "intersection stretches across the space"});
    }
  }
  report.record("B", B, best);
  return report;
}

ConstantsReport check_alpha2(const MetricGraph& g, const PeripheralFamily& fam,
                             const Alpha2Params& params) {
  if (params.epsilon <= 0.0 || params.epsilon >= 0.5)
    throw ConfigError("alpha2: epsilon must lie strictly between 0 and 1/2");
  DistanceOracle oracle(g);
  FamilyOracle fo(g, oracle, fam);
  VertexSet pool = effective_pool(g, params.pool);

  ConstantsReport report;
  double M = 0.0;
  Witness best{{}, {}, 0.0, "no admissible pair found"};
  long found = 0;
  std::mt19937_64 rng(mix_seed(params.seed, 0xa2));

  // separation between pool points never beats a round trip through any
  // fixed vertex, which bounds which x can open an admissible pair
  double sep_ub = 0.0;
  for (Vertex v : pool) sep_ub = std::max(sep_ub, oracle.dist(pool.front(), v));
  sep_ub *= 2.0;

  for (int i = 0; i < fo.size() && found < params.budget; ++i) {
    const std::vector<double>& dP = fo.member_distances(i);
    VertexSet near;
    for (Vertex v : pool)
      if (dP[v] <= params.epsilon * sep_ub + kTol) near.push_back(v);
    if (near.empty()) continue;
    std::shuffle(near.begin(), near.end(), rng);

    long share = std::max<long>(1, params.budget / fam.size());
    long taken = 0;
    for (Vertex x : near) {
      if (taken >= share || found >= params.budget) break;
      VertexSet mates;
      for (Vertex y : pool) {
        if (y == x) continue;
        double dxy = oracle.dist(x, y);
        if (dxy <= 0) continue;
        if (dP[x] <= params.epsilon * dxy + kTol &&
            dP[y] <= params.epsilon * dxy + kTol)
          mates.push_back(y);
      }
      if (mates.empty()) continue;
      Vertex y = mates[std::uniform_int_distribution<size_t>(
          0, mates.size() - 1)(rng)];
      ++taken;
      ++found;
      auto paths = geodesic_variants(g, oracle, x, y, params.variant_count,
                                     mix_seed(params.seed, x * 131071 + y));
      for (const PathInSpace& p : paths) {
        double reach_in = kInf;
        Vertex at = p.front();
        for (Vertex z : p.vertices)
          if (dP[z] < reach_in) {
            reach_in = dP[z];
            at = z;
          }
        if (reach_in > M) {
          M = reach_in;
          best = {{x, y, at}, {i}, M, "geodesic stays this far from the member"};
        }
      }
    }
  }
  report.samples = found;
  if (found == 0)
    report.notes.push_back("no admissible pairs at epsilon=" +
                           std::to_string(params.epsilon));
  report.record("M", M, best);
  return report;
}

namespace {

// first vertex of the path whose member distance drops to mu
std::optional<Vertex> first_entry(const PathInSpace& p,
                                  const std::vector<double>& dP, double mu) {
  for (Vertex z : p.vertices)
    if (dP[z] <= mu + kTol) return z;
  return std::nullopt;
}

}  // namespace

ConstantsReport audit_projection_lemmas(const MetricGraph& g,
                                        const PeripheralFamily& fam,
                                        const ProjectionAuditParams& params) {
  DistanceOracle oracle(g);
  FamilyOracle fo(g, oracle, fam);
  VertexSet pool = effective_pool(g, params.pool);
  ConstantsReport report;
  if (fam.empty()) {
    report.notes.push_back("no peripheral members to audit");
    return report;
  }
  const double step = 1e-6;
  std::mt19937_64 rng(mix_seed(params.seed, 0x5ec5));
  auto pick_pool = [&]() {
    return pool[std::uniform_int_distribution<size_t>(0, pool.size() - 1)(rng)];
  };
  auto variants = [&](Vertex x, Vertex y) {
    return geodesic_variants(g, oracle, x, y, params.variant_count,
                             mix_seed(params.seed, x * 600011 + y));
  };
  // budget counts pairs for one lemma across the whole family; a shuffled
  // member order keeps small budgets from starving late members
  std::vector<int> member_order(fam.size());
  std::iota(member_order.begin(), member_order.end(), 0);
  auto next_order = [&]() {
    std::shuffle(member_order.begin(), member_order.end(), rng);
    return member_order;
  };

  // retention: geodesics between points L-close to a member stay tL-close
  {
    double t = 0.0;
    Witness w{{}, {}, 0.0, "no eligible pair"};
    long n = 0;
    for (double L : params.L_grid) {
      long done = 0;
      long cap = std::max<long>(1, params.budget / params.L_grid.size());
      for (int i : next_order()) {
        if (done >= cap) break;
        const std::vector<double>& dP = fo.member_distances(i);
        VertexSet close;
        for (Vertex v : pool)
          if (dP[v] <= L + kTol) close.push_back(v);
        if (close.size() < 2) continue;
        long share = std::max<long>(1, cap / fam.size());
        for (long s = 0; s < share; ++s) {
          ++done;
          Vertex x = close[std::uniform_int_distribution<size_t>(
              0, close.size() - 1)(rng)];
          Vertex y = close[std::uniform_int_distribution<size_t>(
              0, close.size() - 1)(rng)];
          if (x == y) continue;
          ++n;
          for (const PathInSpace& p : variants(x, y))
            for (Vertex z : p.vertices)
              if (dP[z] / L > t) {
                t = dP[z] / L;
                w = {{x, y, z}, {i}, t, "excursion at scale L=" +
                                            std::to_string(L)};
              }
        }
      }
    }
    report.samples += n;
    report.record("t", t, w);
  }

  // landing: a geodesic from x into N_M(P) passes near the projection of x
  {
    double R = 0.0;
    Witness w{{}, {}, 0.0, "no eligible pair"};
    long done = 0;
    for (int i : next_order()) {
      if (done >= params.budget) break;
      const std::vector<double>& dP = fo.member_distances(i);
      const std::vector<Vertex>& pP = fo.member_projections(i);
      VertexSet targets;
      for (Vertex v : pool)
        if (dP[v] <= params.M + kTol) targets.push_back(v);
      if (targets.empty()) continue;
      long share = std::max<long>(1, params.budget / fam.size());
      for (long s = 0; s < share; ++s) {
        ++done;
        Vertex x = pick_pool();
        Vertex y = targets[std::uniform_int_distribution<size_t>(
            0, targets.size() - 1)(rng)];
        if (x == y) continue;
        report.samples += 1;
        Vertex px = pP[x];
        for (const PathInSpace& p : variants(x, y)) {
          double close = kInf;
          Vertex at = p.front();
          for (Vertex z : p.vertices) {
            double d = oracle.dist(z, px);
            if (d < close) {
              close = d;
              at = z;
            }
          }
          if (close > R) {
            R = close;
            w = {{x, y, at, px}, {i}, R, "closest approach to the projection"};
          }
        }
      }
    }
    report.record("R", R, w);
  }

  // separation: far-apart projections force the geodesic through both balls
  {
    double L = 0.0;
    Witness w{{}, {}, 0.0, "no eligible pair"};
    long done = 0;
    for (int i : next_order()) {
      if (done >= params.budget) break;
      const std::vector<Vertex>& pP = fo.member_projections(i);
      long share = std::max<long>(1, params.budget / fam.size());
      for (long s = 0; s < share; ++s) {
        ++done;
        Vertex x = pick_pool(), y = pick_pool();
        if (x == y) continue;
        report.samples += 1;
        Vertex px = pP[x], py = pP[y];
        double gap = oracle.dist(px, py);
        double quality = 0.0;
        Vertex qa = x, qb = y;
        for (const PathInSpace& p : variants(x, y)) {
          double cx = kInf, cy = kInf;
          Vertex ax = p.front(), ay = p.front();
          for (Vertex z : p.vertices) {
            double dx = oracle.dist(z, px), dy = oracle.dist(z, py);
            if (dx < cx) {
              cx = dx;
              ax = z;
            }
            if (dy < cy) {
              cy = dy;
              ay = z;
            }
          }
          double q = std::max(cx, cy);
          if (q > quality) {
            quality = q;
            qa = ax;
            qb = ay;
          }
        }
        double need = std::min(quality, gap + step);
        if (need > L) {
          L = need;
          w = {{x, y, qa, qb},
               {i},
               L,
               quality <= gap + step ? "forced by approach quality"
                                     : "forced by the projection gap"};
        }
      }
    }
    report.record("L", L, w);
  }

  // first entry: where a geodesic first enters N_mu(P) sits near proj(x)
  {
    double Rp = 0.0;
    Witness w{{}, {}, 0.0, "no geodesic entered the neighborhood"};
    long done = 0;
    for (int i : next_order()) {
      if (done >= params.budget) break;
      const std::vector<double>& dP = fo.member_distances(i);
      const std::vector<Vertex>& pP = fo.member_projections(i);
      long share = std::max<long>(1, params.budget / fam.size());
      for (long s = 0; s < share; ++s) {
        ++done;
        Vertex x = pick_pool(), y = pick_pool();
        if (x == y) continue;
        report.samples += 1;
        for (const PathInSpace& p : variants(x, y)) {
          auto entry = first_entry(p, dP, params.mu);
          if (!entry) continue;
          double d = oracle.dist(*entry, pP[x]);
          if (d > Rp) {
            Rp = d;
            w = {{x, y, *entry, pP[x]}, {i}, Rp, "first entry strays"};
          }
        }
      }
    }
    report.record("Rprime", Rp, w);
  }

  // cross projections: one member shadows another in a bounded set
  {
    double C = 0.0;
    Witness w{{}, {}, 0.0, "no member pair"};
    long pairs = 0;
    std::vector<std::pair<int, int>> order;
    if (fam.size() >= 2) {
      if (fam.size() <= params.cross_pair_cap) {
        for (int i = 0; i < fo.size(); ++i)
          for (int j = 0; j < fo.size(); ++j)
            if (i != j) order.push_back({i, j});
      } else {
        std::uniform_int_distribution<int> pick(0, fo.size() - 1);
        while (static_cast<int>(order.size()) < params.budget) {
          int i = pick(rng), j = pick(rng);
          if (i != j) order.push_back({i, j});
        }
        report.notes.push_back("cross projections sampled, not exhaustive");
      }
    }
    for (auto [i, j] : order) {
      const std::vector<Vertex>& pP = fo.member_projections(i);
      VertexSet shadow;
      for (Vertex q : fo.member(j)) shadow.push_back(pP[q]);
      normalize_set(shadow);
      ++pairs;
      Vertex fa, fb;
      double d = pointwise_diameter(oracle, shadow, fa, fb);
      if (d > C) {
        C = d;
        w = {{fa, fb}, {i, j}, C, "spread of one member seen from another"};
      }
    }
    report.samples += pairs;
    report.record("C", C, w);
  }

  // detour gap: pairs whose member distances leave slack force an entry
  // near the fiber over x
  {
    double K = 0.0;
    Witness w{{}, {}, 0.0, "no eligible pair"};
    long done = 0;
    for (int i : next_order()) {
      if (done >= params.budget) break;
      const std::vector<double>& dP = fo.member_distances(i);
      long share = std::max<long>(1, params.budget / fam.size());
      for (long s = 0; s < share; ++s) {
        ++done;
        Vertex x = pick_pool(), y = pick_pool();
        if (x == y) continue;
        report.samples += 1;
        double gap = oracle.dist(x, y) - dP[x] - dP[y];
        double quality = 0.0;
        Vertex qa = x;
        for (const PathInSpace& p : variants(x, y)) {
          double q = kInf;
          Vertex at = p.front();
          for (size_t k = 0; k < p.vertices.size(); ++k) {
            Vertex z = p.vertices[k];
            double v = std::max(dP[z], std::abs(p.cum[k] - dP[x]));
            if (v < q) {
              q = v;
              at = z;
            }
          }
          if (q > quality) {
            quality = q;
            qa = at;
          }
        }
        double need = std::min(quality, gap + step);
        if (need > K) {
          K = need;
          w = {{x, y, qa},
               {i},
               K,
               quality <= gap + step ? "forced by entry quality"
                                     : "forced by the slack gap"};
        }
      }
    }
    report.record("K", K, w);
  }

  return report;
}

PeripheralFamily load_family(std::istream& in) {
  PeripheralFamily fam;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag != "P")
      throw FormatError("line " + std::to_string(lineno) +
                        ": expected 'P <index> <v...>', got '" + line + "'");
    int index;
    if (!(ss >> index))
      throw FormatError("line " + std::to_string(lineno) + ": missing index");
    if (index != static_cast<int>(fam.members.size()))
      throw FormatError("line " + std::to_string(lineno) +
                        ": member indices must be contiguous from 0");
    VertexSet m;
    Vertex v;
    while (ss >> v) m.push_back(v);
    if (m.empty())
      throw FormatError("line " + std::to_string(lineno) +
                        ": member has no vertices");
    normalize_set(m);
    fam.members.push_back(std::move(m));
  }
  return fam;
}

PeripheralFamily load_family_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open family file '" + path + "'");
  return load_family(in);
}

void save_family(std::ostream& out, const PeripheralFamily& fam) {
  for (size_t i = 0; i < fam.members.size(); ++i) {
    out << "P " << i;
    for (Vertex v : fam.members[i]) out << ' ' << v;
    out << '\n';
  }
}

void save_family_file(const std::string& path, const PeripheralFamily& fam) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  save_family(out, fam);
  if (!out) throw GraphError("failed writing family to '" + path + "'");
}

}  // namespace relhyp
