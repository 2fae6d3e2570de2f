#include "relhyp/coned_off.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "relhyp/io.hpp"

namespace relhyp {

namespace {

constexpr double kStep = 1e-6;  // nudges escape thresholds past measured lengths

std::string num(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

// ambient edge length, kInf when the pair has no ambient edge
double edge_length(const MetricGraph& g, Vertex u, Vertex v) {
  for (const auto& [w, len] : g.neighbors(u))
    if (w == v) return len;
  return kInf;
}

}  // namespace

int ConedOffSpace::component_between(int member, Vertex x, Vertex y) const {
  if (x > y) std::swap(x, y);
  auto it = lookup_.find({x, y});
  if (it == lookup_.end()) return -1;
  for (int idx : it->second)
    if (components[idx].member == member) return idx;
  return -1;
}

int ConedOffSpace::any_component_between(Vertex x, Vertex y) const {
  if (x > y) std::swap(x, y);
  auto it = lookup_.find({x, y});
  return it == lookup_.end() ? -1 : it->second.front();
}

ConedOffSpace build_coned_off(const MetricGraph& g, const PeripheralFamily& fam,
                              double k) {
  if (k <= 0.0) throw ConfigError("net scale k must be positive");
  g.require_connected();
  const int n = g.vertex_count();
  ConedOffSpace coned;
  coned.ambient = g;
  coned.k = k;
  for (int m = 0; m < fam.size(); ++m) {
    const VertexSet& member = fam[m];
    if (member.empty())
      throw ConfigError("coned-off member " + std::to_string(m) + " is empty");
    for (Vertex v : member)
      if (v < 0 || v >= n)
        throw ConfigError("member vertex " + std::to_string(v) +
                          " out of range");
    coned.nets.push_back(maximal_net(g, member, k));
  }
  for (int m = 0; m < fam.size(); ++m) {
    const VertexSet& net = coned.nets[m];
    if (net.size() < 2) continue;
    for (size_t i = 0; i + 1 < net.size(); ++i) {
      auto row = single_source_distances(g, net[i]);
      for (size_t j = i + 1; j < net.size(); ++j) {
        int idx = static_cast<int>(coned.components.size());
        coned.components.push_back({m, net[i], net[j], row[net[j]]});
        coned.lookup_[{net[i], net[j]}].push_back(idx);
      }
    }
  }
  // parallel edges collapse to the shorter length, which preserves the metric
  std::map<std::pair<Vertex, Vertex>, double> lens;
  auto put = [&lens](Vertex u, Vertex v, double len) {
    if (u > v) std::swap(u, v);
    auto [it, fresh] = lens.try_emplace(std::make_pair(u, v), len);
    if (!fresh && len < it->second) it->second = len;
  };
  for (const Edge& e : g.edges()) put(e.u, e.v, e.length);
  for (const ComponentEdge& c : coned.components) put(c.x, c.y, 1.0);
  coned.graph = MetricGraph(n);
  for (const auto& [uv, len] : lens)
    coned.graph.add_edge(uv.first, uv.second, len);
  if (g.has_labels())
    for (Vertex v = 0; v < n; ++v)
      if (!g.label(v).empty()) coned.graph.set_label(v, g.label(v));
  return coned;
}

StandardPath standardize(const ConedOffSpace& coned,
                         const std::vector<Vertex>& path) {
  if (path.empty()) throw ConfigError("standard form needs a nonempty path");
  const int n = coned.graph.vertex_count();
  for (Vertex v : path)
    if (v < 0 || v >= n)
      throw ConfigError("path vertex " + std::to_string(v) + " out of range");
  std::vector<Vertex> vs;
  for (Vertex v : path)
    if (vs.empty() || vs.back() != v) vs.push_back(v);
  StandardPath sp;
  std::vector<Vertex> run{vs.front()};
  auto flush = [&sp, &run]() {
    if (run.size() >= 2) sp.pieces.push_back({false, run, -1});
    run.clear();
  };
  for (size_t i = 0; i + 1 < vs.size(); ++i) {
    Vertex u = vs[i], v = vs[i + 1];
    if (!coned.graph.adjacent(u, v))
      throw ConfigError("path step " + std::to_string(u) + " -> " +
                        std::to_string(v) + " is not a coned edge");
    int comp = coned.any_component_between(u, v);
    if (comp >= 0 && edge_length(coned.ambient, u, v) > 1.0 + kTol) {
      flush();
      sp.pieces.push_back({true, {u, v}, coned.components[comp].member});
      run = {v};
    } else {
      run.push_back(v);
    }
  }
  flush();
  if (sp.pieces.empty()) sp.pieces.push_back({false, {vs.front()}, -1});
  return sp;
}

std::string validate_standard_path(const ConedOffSpace& coned,
                                   const StandardPath& sp) {
  if (sp.pieces.empty()) return "empty standard path";
  const int n = coned.graph.vertex_count();
  for (size_t i = 0; i < sp.pieces.size(); ++i) {
    const auto& piece = sp.pieces[i];
    std::string at = "piece " + std::to_string(i);
    if (piece.vertices.empty()) return at + " is empty";
    for (Vertex v : piece.vertices)
      if (v < 0 || v >= n)
        return at + " vertex " + std::to_string(v) + " out of range";
    if (piece.component) {
      if (piece.vertices.size() != 2)
        return at + " wants exactly two component feet";
      if (piece.member < 0 || piece.member >= static_cast<int>(coned.nets.size()))
        return at + " member " + std::to_string(piece.member) + " out of range";
      if (coned.component_between(piece.member, piece.vertices[0],
                                  piece.vertices[1]) < 0)
        return at + " is not a component of member " +
               std::to_string(piece.member);
    } else {
      for (size_t j = 0; j + 1 < piece.vertices.size(); ++j)
        if (!coned.ambient.adjacent(piece.vertices[j], piece.vertices[j + 1]))
          return at + " jumps " + std::to_string(piece.vertices[j]) + " -> " +
                 std::to_string(piece.vertices[j + 1]) +
                 " without an ambient edge";
    }
    if (i && sp.pieces[i - 1].vertices.back() != piece.vertices.front())
      return "pieces " + std::to_string(i - 1) + " and " + std::to_string(i) +
             " do not share an endpoint";
  }
  return "";
}

PathAnalysis analyze_standard_path(const ConedOffSpace& coned,
                                   const StandardPath& sp) {
  std::string bad = validate_standard_path(coned, sp);
  if (!bad.empty()) throw CheckError("malformed-standard-path: " + bad);
  PathAnalysis out;
  for (size_t i = 0; i < sp.pieces.size(); ++i) {
    const auto& piece = sp.pieces[i];
    if (piece.component) {
      out.components.push_back(static_cast<int>(i));
      out.coned_length += 1.0;
    } else {
      for (size_t j = 0; j + 1 < piece.vertices.size(); ++j)
        out.coned_length +=
            edge_length(coned.ambient, piece.vertices[j], piece.vertices[j + 1]);
    }
  }
  for (size_t a = 0; a < out.components.size(); ++a)
    for (size_t b = a + 1; b < out.components.size(); ++b)
      if (sp.pieces[out.components[a]].member ==
          sp.pieces[out.components[b]].member)
        out.tied.push_back({out.components[a], out.components[b]});
  std::set<int> in_tie;
  for (const auto& [a, b] : out.tied) {
    in_tie.insert(a);
    in_tie.insert(b);
  }
  for (int c : out.components)
    if (!in_tie.count(c)) out.isolated.push_back(c);
  out.without_backtracking = out.tied.empty();
  return out;
}

namespace {

struct FlatPath {
  std::vector<Vertex> vs;
  std::vector<double> cum;  // coned arc length
};

FlatPath flatten(const ConedOffSpace& coned, const StandardPath& sp) {
  FlatPath f;
  f.vs.push_back(sp.front());
  f.cum.push_back(0.0);
  for (const auto& piece : sp.pieces)
    for (size_t j = 0; j + 1 < piece.vertices.size(); ++j) {
      double step = piece.component
                        ? 1.0
                        : edge_length(coned.ambient, piece.vertices[j],
                                      piece.vertices[j + 1]);
      f.vs.push_back(piece.vertices[j + 1]);
      f.cum.push_back(f.cum.back() + step);
    }
  return f;
}

// Least L with arc <= L*d + L across sampled vertex pairs of the path.
// Geodesics measure exactly 1.
double measured_level(const DistanceOracle& coned_oracle, const FlatPath& f) {
  std::vector<size_t> idx;
  const size_t sz = f.vs.size();
  if (sz <= 32) {
    idx.resize(sz);
    std::iota(idx.begin(), idx.end(), size_t{0});
  } else {
    for (size_t i = 0; i < 31; ++i) idx.push_back(i * (sz - 1) / 31);
    idx.push_back(sz - 1);
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  }
  double L = 1.0;
  for (size_t a = 0; a < idx.size(); ++a)
    for (size_t b = a + 1; b < idx.size(); ++b) {
      double arc = f.cum[idx[b]] - f.cum[idx[a]];
      double d = coned_oracle.dist(f.vs[idx[a]], f.vs[idx[b]]);
      L = std::max(L, arc / (d + 1.0));
    }
  return L;
}

struct TraversedComp {
  int member = -1;
  Vertex entry = -1;
  Vertex exit = -1;
  double len = 0.0;
};

std::vector<TraversedComp> traversed_components(const ConedOffSpace& coned,
                                                const StandardPath& sp,
                                                const PathAnalysis& a) {
  std::vector<TraversedComp> cs;
  for (int i : a.components) {
    const auto& piece = sp.pieces[i];
    int idx = coned.component_between(piece.member, piece.vertices[0],
                                      piece.vertices[1]);
    cs.push_back({piece.member, piece.vertices[0], piece.vertices[1],
                  coned.components[idx].x_length});
  }
  return cs;
}

}  // namespace

BCPReport check_bcp(
    const ConedOffSpace& coned,
    const std::vector<std::pair<StandardPath, StandardPath>>& pairs,
    const BCPParams& params) {
  std::vector<double> grid = params.grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.empty()) throw ConfigError("bcp grid must not be empty");
  if (grid.front() < 1.0)
    throw ConfigError("bcp grid levels must be at least 1");

  DistanceOracle coned_oracle(coned.graph);
  DistanceOracle ambient_oracle(coned.ambient);

  BCPReport report;
  for (double g : grid) report.levels.push_back({g, 0, 0.0, {}});

  for (size_t p = 0; p < pairs.size(); ++p) {
    BCPPairOutcome out;
    out.pair = static_cast<int>(p);
    const StandardPath& g1 = pairs[p].first;
    const StandardPath& g2 = pairs[p].second;
    std::string bad = validate_standard_path(coned, g1);
    if (bad.empty()) {
      std::string bad2 = validate_standard_path(coned, g2);
      if (!bad2.empty()) bad = "second path malformed: " + bad2;
    } else {
      bad = "first path malformed: " + bad;
    }
    if (!bad.empty()) {
      out.note = bad;
      report.outcomes.push_back(out);
      continue;
    }
    PathAnalysis a1 = analyze_standard_path(coned, g1);
    PathAnalysis a2 = analyze_standard_path(coned, g2);
    if (!a1.without_backtracking || !a2.without_backtracking) {
      out.note = a1.without_backtracking ? "second path backtracks"
                                         : "first path backtracks";
      report.outcomes.push_back(out);
      continue;
    }
    double front_gap = ambient_oracle.dist(g1.front(), g2.front());
    double back_gap = ambient_oracle.dist(g1.back(), g2.back());
    if (front_gap > 1.0 + kTol || back_gap > 1.0 + kTol) {
      out.note =
          "endpoints separated by " + num(std::max(front_gap, back_gap));
      report.outcomes.push_back(out);
      continue;
    }
    FlatPath f1 = flatten(coned, g1);
    FlatPath f2 = flatten(coned, g2);
    out.L = std::max(measured_level(coned_oracle, f1),
                     measured_level(coned_oracle, f2));

    std::vector<TraversedComp> c1 = traversed_components(coned, g1, a1);
    std::vector<TraversedComp> c2 = traversed_components(coned, g2, a2);

    // clause (1): a long component with no tied partner forces K past it
    double unmatched = 0.0;
    TraversedComp worst1;
    auto scan = [&unmatched, &worst1](const std::vector<TraversedComp>& mine,
                                      const std::vector<TraversedComp>& others) {
      for (const auto& c : mine) {
        bool tied = std::any_of(
            others.begin(), others.end(),
            [&c](const TraversedComp& d) { return d.member == c.member; });
        if (!tied && c.len > unmatched) {
          unmatched = c.len;
          worst1 = c;
        }
      }
    };
    scan(c1, c2);
    scan(c2, c1);
    out.k1 = unmatched > 0.0 ? unmatched + kStep : 0.0;

    // clause (2): feet of tied components must stay together
    double sep = 0.0;
    TraversedComp left, right;
    for (const auto& c : c1)
      for (const auto& d : c2) {
        if (c.member != d.member) continue;
        double s = std::max(ambient_oracle.dist(c.entry, d.entry),
                            ambient_oracle.dist(c.exit, d.exit));
        if (s > sep) {
          sep = s;
          left = c;
          right = d;
        }
      }
    out.k2 = sep;

    if (out.k1 >= out.k2 && out.k1 > 0.0)
      out.note = "clause (1): member " + std::to_string(worst1.member) +
                 " component of length " + num(unmatched) + " unmatched";
    else if (out.k2 > 0.0)
      out.note = "clause (2): member " + std::to_string(left.member) +
                 " feet separated by " + num(sep);
    else
      out.note = "components agree";

    if (out.L <= 1.0 + kTol && unmatched >= params.violation_length - kTol) {
      report.violation = true;
      Witness w;
      w.points = {worst1.entry, worst1.exit};
      w.members = {worst1.member};
      w.value = unmatched;
      w.detail = "pair " + std::to_string(p) +
                 ": geodesics disagree on a member " +
                 std::to_string(worst1.member) + " component of length " +
                 num(unmatched);
      report.violations.push_back(w);
    }

    if (out.L > grid.back() + kTol) {
      ++report.skipped;
      out.note += "; beyond the grid at L " + num(out.L);
      report.outcomes.push_back(out);
      continue;
    }
    out.admitted = true;
    ++report.admitted;
    double need = std::max(out.k1, out.k2);
    for (auto& lvl : report.levels) {
      if (out.L > lvl.L + kTol) continue;
      ++lvl.pairs;
      if (need > lvl.K) {
        lvl.K = need;
        Witness w;
        if (out.k1 >= out.k2)
          w.points = {worst1.entry, worst1.exit};
        else
          w.points = {left.entry, left.exit, right.entry, right.exit};
        w.members = {out.k1 >= out.k2 ? worst1.member : left.member};
        w.value = need;
        w.detail = out.note + " (pair " + std::to_string(p) + ")";
        lvl.binding = w;
      }
    }
    report.outcomes.push_back(out);
  }
  report.K = report.levels.back().K;
  return report;
}

ConstantsReport check_rh2(const ConedOffSpace& coned, const Rh2Params& params) {
  const int n = coned.graph.vertex_count();
  ConstantsReport report;

  if (n <= 60) {
    FourPointMode mode;
    mode.kind = FourPointMode::Exhaustive;
    FourPointResult r = four_point_delta(coned.graph, mode);
    report.record("delta", r.delta,
                  {VertexSet(r.witness.begin(), r.witness.end()), {}, r.delta,
                   r.mode});
    report.samples += r.quadruples;
    report.notes.push_back(r.mode + ": delta " + num(r.delta));
  } else {
    FourPointMode pool;
    pool.kind = FourPointMode::PoolExhaustive;
    pool.pool_size = 60;
    pool.seed = params.seed;
    FourPointMode sampled;
    sampled.kind = FourPointMode::SampledQuadruples;
    sampled.count = 4000;
    sampled.seed = params.seed;
    FourPointResult a = four_point_delta(coned.graph, pool);
    FourPointResult b = four_point_delta(coned.graph, sampled);
    const FourPointResult& best = a.delta >= b.delta ? a : b;
    report.record("delta", best.delta,
                  {VertexSet(best.witness.begin(), best.witness.end()), {},
                   best.delta, best.mode});
    report.samples += a.quadruples + b.quadruples;
    report.notes.push_back(a.mode + ": delta " + num(a.delta));
    report.notes.push_back(b.mode + ": delta " + num(b.delta));
  }

  VertexSet pool = params.pool;
  if (pool.empty()) {
    pool.resize(n);
    std::iota(pool.begin(), pool.end(), 0);
  }
  std::vector<std::pair<Vertex, Vertex>> cands;
  for (size_t i = 0; i < pool.size(); ++i) {
    auto row = single_source_distances(coned.ambient, pool[i]);
    for (size_t j = i + 1; j < pool.size(); ++j)
      if (row[pool[j]] >= params.min_separation - kTol)
        cands.push_back({pool[i], pool[j]});
  }
  std::mt19937_64 rng(mix_seed(params.seed, 0xc09ed0ff));
  if (static_cast<int>(cands.size()) > params.budget) {
    std::shuffle(cands.begin(), cands.end(), rng);
    cands.resize(params.budget);
  }

  std::vector<std::pair<StandardPath, StandardPath>> bcp_pairs;
  for (const auto& [x, y] : cands) {
    auto base = shortest_path(coned.graph, x, y);
    StandardPath gamma = standardize(coned, base->vertices);

    std::vector<Vertex> as{x}, bs{y};
    for (const auto& [w, len] : coned.ambient.neighbors(x))
      if (len <= 1.0 + kTol) as.push_back(w);
    for (const auto& [w, len] : coned.ambient.neighbors(y))
      if (len <= 1.0 + kTol) bs.push_back(w);
    std::vector<std::pair<Vertex, Vertex>> shifted;
    for (Vertex a : as)
      for (Vertex b : bs)
        if (!(a == x && b == y)) shifted.push_back({a, b});
    std::shuffle(shifted.begin(), shifted.end(), rng);
    if (static_cast<int>(shifted.size()) > params.shifts)
      shifted.resize(params.shifts);
    for (const auto& [a, b] : shifted) {
      auto alt = shortest_path(coned.graph, a, b);
      bcp_pairs.push_back({gamma, standardize(coned, alt->vertices)});
    }

    if (params.detours > 0 && !coned.nets.empty()) {
      auto rowx = single_source_distances(coned.ambient, x);
      auto rowy = single_source_distances(coned.ambient, y);
      struct Detour {
        double cost = 0.0;
        int member = -1;
        Vertex p = -1;
        Vertex q = -1;
      };
      std::vector<Detour> options;
      for (size_t m = 0; m < coned.nets.size(); ++m) {
        const VertexSet& net = coned.nets[m];
        if (net.size() < 2) continue;
        Vertex p = net.front(), q = net.front();
        for (Vertex v : net) {
          if (rowx[v] < rowx[p]) p = v;
          if (rowy[v] < rowy[q]) q = v;
        }
        if (p == q) continue;
        options.push_back(
            {rowx[p] + rowy[q], static_cast<int>(m), p, q});
      }
      std::sort(options.begin(), options.end(),
                [](const Detour& a, const Detour& b) {
                  return a.cost != b.cost ? a.cost < b.cost
                                          : a.member < b.member;
                });
      if (static_cast<int>(options.size()) > params.detours)
        options.resize(params.detours);
      for (const Detour& d : options) {
        StandardPath via;
        if (x != d.p) {
          auto leg = shortest_path(coned.ambient, x, d.p);
          via.pieces.push_back({false, leg->vertices, -1});
        }
        via.pieces.push_back({true, {d.p, d.q}, d.member});
        if (d.q != y) {
          auto leg = shortest_path(coned.ambient, d.q, y);
          via.pieces.push_back({false, leg->vertices, -1});
        }
        bcp_pairs.push_back({gamma, via});
      }
    }
  }

  BCPReport bcp =
      check_bcp(coned, bcp_pairs, {params.grid, params.violation_length});
  for (const BCPLevel& lvl : bcp.levels)
    report.record("K_L" + num(lvl.L), lvl.K, lvl.binding);
  report.record("K", bcp.K, bcp.levels.back().binding);
  report.samples += bcp.admitted;
  if (bcp.violation) report.violation = true;
  for (const Witness& w : bcp.violations) report.violations.push_back(w);
  report.notes.push_back("endpoint pairs " + std::to_string(cands.size()) +
                         ", bcp pairs admitted " + std::to_string(bcp.admitted) +
                         ", skipped " + std::to_string(bcp.skipped) +
                         " beyond L " + num(bcp.levels.back().L));
  return report;
}

FilledPath fill_components(const ConedOffSpace& coned,
                           const PathInSpace& coned_geodesic) {
  if (coned_geodesic.empty())
    throw ConfigError("fill_components needs a nonempty path");
  StandardPath sp = standardize(coned, coned_geodesic.vertices);
  std::vector<Vertex> vs{sp.front()};
  for (const auto& piece : sp.pieces) {
    if (piece.component) {
      auto leg =
          shortest_path(coned.ambient, piece.vertices[0], piece.vertices[1]);
      for (size_t j = 1; j < leg->vertices.size(); ++j)
        vs.push_back(leg->vertices[j]);
    } else {
      for (size_t j = 1; j < piece.vertices.size(); ++j)
        vs.push_back(piece.vertices[j]);
    }
  }
  FilledPath out;
  out.path.vertices = vs;
  out.path.cum.resize(vs.size(), 0.0);
  for (size_t i = 0; i + 1 < vs.size(); ++i)
    out.path.cum[i + 1] =
        out.path.cum[i] + edge_length(coned.ambient, vs[i], vs[i + 1]);
  DistanceOracle oracle(coned.ambient);
  double worst = 0.0;
  for (size_t i = 0; i < vs.size(); ++i)
    for (size_t j = i + 1; j < vs.size(); ++j) {
      double arc = out.path.cum[j] - out.path.cum[i];
      worst = std::max(worst, arc / (oracle.dist(vs[i], vs[j]) + 1.0));
    }
  out.K = std::max(1.0, std::ceil(worst - kTol));
  out.path.qL = out.K;
  out.path.qC = out.K;
  out.path.geodesic =
      std::abs(out.path.length() - oracle.dist(vs.front(), vs.back())) <= kTol;
  return out;
}

StandardPath load_standard_path(std::istream& in) {
  LineReader reader(in);
  StandardPath sp;
  while (reader.next()) {
    if (reader.tag() == "SEG") {
      if (reader.args().empty()) reader.fail("SEG wants at least one vertex");
      StandardPath::Piece piece;
      for (size_t i = 0; i < reader.args().size(); ++i)
        piece.vertices.push_back(static_cast<Vertex>(reader.integer(i)));
      sp.pieces.push_back(std::move(piece));
    } else if (reader.tag() == "CMP") {
      if (reader.args().size() != 3) reader.fail("CMP wants <member> <x> <y>");
      StandardPath::Piece piece;
      piece.component = true;
      piece.member = static_cast<int>(reader.integer(0));
      piece.vertices = {static_cast<Vertex>(reader.integer(1)),
                        static_cast<Vertex>(reader.integer(2))};
      sp.pieces.push_back(std::move(piece));
    } else {
      reader.fail("unknown tag '" + reader.tag() + "'");
    }
  }
  if (sp.pieces.empty()) throw FormatError("empty standard path input");
  return sp;
}

StandardPath load_standard_path_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open standard path file: " + path);
  return load_standard_path(in);
}

void save_standard_path(std::ostream& out, const StandardPath& sp) {
  for (const auto& piece : sp.pieces) {
    if (piece.component) {
      out << "CMP " << piece.member << ' ' << piece.vertices[0] << ' '
          << piece.vertices[1] << '\n';
    } else {
      out << "SEG";
      for (Vertex v : piece.vertices) out << ' ' << v;
      out << '\n';
    }
  }
}

void save_standard_path_file(const std::string& path, const StandardPath& sp) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open standard path file: " + path);
  save_standard_path(out, sp);
  out.flush();
  if (!out) throw ConfigError("failed writing standard path file: " + path);
}

}  // namespace relhyp
