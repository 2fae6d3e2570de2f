#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "relhyp/cayley.hpp"
#include "relhyp/transient.hpp"

using namespace relhyp;

namespace {

PeripheralFamily family_of(std::vector<VertexSet> members) {
  PeripheralFamily fam;
  for (auto& m : members) {
    normalize_set(m);
    fam.members.push_back(std::move(m));
  }
  return fam;
}

// Direct translation of the deep-vertex rule: full metric rows per path
// vertex, full member fields, least member wins. No cum shortcut, no
// extreme-witness pruning — an independent reference for decompose.
std::vector<int> brute_tags(const MetricGraph& g, const PeripheralFamily& fam,
                            const PathInSpace& p, double mu, double c) {
  int n = static_cast<int>(p.size());
  std::vector<std::vector<double>> row(n);
  for (int i = 0; i < n; ++i)
    row[i] = single_source_distances(g, p.vertices[i]);
  std::vector<int> tag(n, -1);
  for (int m = 0; m < fam.size(); ++m) {
    std::vector<double> dP = multi_source_distances(g, fam[m]);
    for (int i = 0; i < n; ++i) {
      if (tag[i] != -1) continue;
      bool before = false, after = false;
      for (int j = 0; j < n; ++j) {
        if (dP[p.vertices[j]] > mu + kTol) continue;
        if (row[j][p.vertices[i]] <= c + kTol) continue;
        if (j < i) before = true;
        if (j > i) after = true;
      }
      if (before && after) tag[i] = m;
    }
  }
  return tag;
}

std::vector<int> tags_of(const TransientDecomposition& dec) {
  std::vector<int> tag(dec.path.size(), -1);
  for (const auto& comp : dec.deep_components)
    for (int i = comp.start; i <= comp.end; ++i) tag[i] = comp.member;
  return tag;
}

PathInSpace unit_path(const std::vector<Vertex>& vs) {
  PathInSpace p;
  p.vertices = vs;
  p.cum.resize(vs.size());
  for (size_t i = 0; i < vs.size(); ++i) p.cum[i] = static_cast<double>(i);
  return p;
}

}  // namespace

TEST_CASE("line decomposition matches the worked example") {
  auto g = line_graph(21);
  VertexSet all(21);
  std::iota(all.begin(), all.end(), 0);
  PeripheralFamily fam = family_of({all});
  auto path = *shortest_path(g, 0, 20);
  auto dec = decompose(g, fam, path, {0.0, 3.0, false});
  std::vector<int> expect_transient{0, 1, 2, 3, 17, 18, 19, 20};
  CHECK(dec.transient == expect_transient);
  REQUIRE(dec.deep_components.size() == 1);
  CHECK(dec.deep_components[0].member == 0);
  CHECK(dec.deep_components[0].start == 4);
  CHECK(dec.deep_components[0].end == 16);
  CHECK(dec.is_transient(0));
  CHECK(!dec.is_transient(10));
}

TEST_CASE("arclength and metric witness separation disagree on overshoots") {
  auto g = line_graph(7);
  PeripheralFamily fam = family_of({{0, 2}});
  // walk to the far end and double back: 0..6 then 5..2
  PathInSpace p = unit_path({0, 1, 2, 3, 4, 5, 6, 5, 4, 3, 2});

  auto metric = decompose(g, fam, p, {0.0, 3.0, false});
  std::vector<int> metric_deep;
  for (int i = 0; i < 11; ++i)
    if (!metric.is_transient(i)) metric_deep.push_back(i);
  CHECK(metric_deep == std::vector<int>{6});

  auto arc = decompose(g, fam, p, {0.0, 3.0, true});
  std::vector<int> arc_deep;
  for (int i = 0; i < 11; ++i)
    if (!arc.is_transient(i)) arc_deep.push_back(i);
  CHECK(arc_deep == std::vector<int>{4, 5, 6});
}

TEST_CASE("decompose agrees with the direct double scan on a Cayley ball") {
  auto ball = build_ball(GroupSpec::parse("free(2)"), 4);
  const MetricGraph& g = ball.graph;
  auto fam = peripheral_cosets(ball, {{"a", std::nullopt}});
  REQUIRE(fam.size() >= 3);
  DistanceOracle oracle(g);
  FamilyOracle famO(g, oracle, fam);

  std::mt19937_64 rng(421);
  std::uniform_int_distribution<int> pick(0, g.vertex_count() - 1);
  int checked = 0;
  for (int trial = 0; trial < 12; ++trial) {
    Vertex x = pick(rng), y = pick(rng);
    if (oracle.dist(x, y) < 4) continue;
    for (const auto& p : geodesic_variants(g, oracle, x, y, 1, 99 + trial)) {
      for (double mu : {0.0, 1.0}) {
        for (double c : {2.0, 4.0}) {
          auto dec = decompose(famO, p, {mu, c, false});
          CHECK(tags_of(dec) == brute_tags(g, fam, p, mu, c));
          ++checked;
        }
      }
    }
  }
  CHECK(checked >= 40);
}

TEST_CASE("transient sets grow with c, shrink with mu, keep endpoints") {
  std::mt19937_64 rng(77);
  auto g = random_connected(30, 8, rng);
  DistanceOracle oracle(g);
  VertexSet ballA = neighborhood(g, oracle, {3}, 2.0);
  VertexSet ballB = neighborhood(g, oracle, {20}, 2.0);
  PeripheralFamily fam = family_of({ballA, ballB});
  FamilyOracle famO(g, oracle, fam);
  PeripheralFamily empty;
  FamilyOracle emptyO(g, oracle, empty);

  std::uniform_int_distribution<int> pick(0, 29);
  for (int trial = 0; trial < 6; ++trial) {
    Vertex x = pick(rng), y = pick(rng);
    if (x == y) continue;
    auto p = *shortest_path(g, x, y);
    int last = static_cast<int>(p.size()) - 1;

    auto none = decompose(emptyO, p, {1.0, 2.0, false});
    CHECK(static_cast<int>(none.transient.size()) == last + 1);
    CHECK(none.deep_components.empty());

    for (double mu : {0.0, 1.0, 2.0}) {
      std::vector<int> prev;
      for (double c : {1.0, 2.0, 4.0}) {
        auto dec = decompose(famO, p, {mu, c, false});
        CHECK(dec.is_transient(0));
        CHECK(dec.is_transient(last));
        if (!prev.empty())
          CHECK(std::includes(dec.transient.begin(), dec.transient.end(),
                              prev.begin(), prev.end()));
        prev = dec.transient;
      }
    }
    for (double c : {1.0, 2.0}) {
      std::vector<int> prev;
      for (double mu : {2.0, 1.0, 0.0}) {
        auto dec = decompose(famO, p, {mu, c, false});
        if (!prev.empty())
          CHECK(std::includes(dec.transient.begin(), dec.transient.end(),
                              prev.begin(), prev.end()));
        prev = dec.transient;
      }
    }
  }
}

TEST_CASE("relative Rips defect vanishes on trees and grows on grids") {
  std::mt19937_64 rng(5);
  auto tree = random_tree(24, rng);
  PeripheralFamily empty;
  RelRipsParams tp;
  tp.mu = 1.0;
  tp.R = 2.0;
  auto rep = check_relative_rips(tree, empty, tp);
  CHECK(rep.at("D") == 0.0);
  CHECK(rep.samples > 1000);
  REQUIRE(!rep.notes.empty());
  CHECK(rep.notes[0] == "corner triples exhaustive");

  RelRipsParams gp;
  gp.budget = 150;
  gp.seed = 3;
  double d3 = check_relative_rips(grid_graph(3, 3), empty, gp).at("D");
  double d5 = check_relative_rips(grid_graph(5, 5), empty, gp).at("D");
  double d7 = check_relative_rips(grid_graph(7, 7), empty, gp).at("D");
  CHECK(d3 >= 1.0);
  CHECK(d5 >= d3);
  CHECK(d7 > d3);
}

TEST_CASE("rh3 endpoint pinning on Cayley coset pairs") {
  auto ball = build_ball(GroupSpec::parse("free(2)"), 4);
  auto fam = peripheral_cosets(ball, {{"a", std::nullopt}});
  Rh3Cond2Params params;
  params.mu = 1.0;
  params.R = 2.0;
  params.k = 1.0;
  params.budget = 120;
  params.seed = 7;
  params.pool = ball.interior(1);
  auto rep = check_rh3_cond2(ball.graph, fam, params);
  CHECK(rep.samples > 20);
  CHECK(rep.at("K") <= 6.0);
  auto again = check_rh3_cond2(ball.graph, fam, params);
  CHECK(rep.at("K") == again.at("K"));
  CHECK(rep.samples == again.samples);
}

TEST_CASE("rh3 audit refuses pools with no admissible pairs") {
  auto g = line_graph(21);
  PeripheralFamily fam = family_of({{0, 1}});
  Rh3Cond2Params params;
  params.k = 1.0;
  params.pool = {14, 15, 16, 17, 18, 19, 20};
  CHECK_THROWS_WITH_AS(check_rh3_cond2(g, fam, params),
                       doctest::Contains("no-admissible-pairs"), CheckError);
}

TEST_CASE("triangle classification finds centres and peripheral crossings") {
  // three legs of length 3 glued at vertex 0
  MetricGraph star(10);
  int legs[3][3] = {{1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
  for (auto& leg : legs) {
    star.add_edge(0, leg[0], 1.0);
    star.add_edge(leg[0], leg[1], 1.0);
    star.add_edge(leg[1], leg[2], 1.0);
  }
  PeripheralFamily empty;
  auto tri = make_triangle(star, 3, 6, 9);
  auto cls = classify_triangle_atg(star, empty, tri, 0.0, 0.0);
  CHECK(cls.kind == AtgClass::kCentre);
  CHECK(cls.centre == 0);

  auto ring = cycle_graph(12);
  auto rtri = make_triangle(ring, 0, 4, 8);
  auto none = classify_triangle_atg(ring, empty, rtri, 0.0, 0.0);
  CHECK(none.kind == AtgClass::kNeither);

  VertexSet whole(12);
  std::iota(whole.begin(), whole.end(), 0);
  PeripheralFamily ringfam = family_of({whole});
  auto per = classify_triangle_atg(ring, ringfam, rtri, 0.0, 0.0);
  CHECK(per.kind == AtgClass::kPeripheral);
  CHECK(per.member == 0);
  CHECK(per.entries == std::array<Vertex, 3>{0, 4, 8});
  CHECK(per.exits == std::array<Vertex, 3>{4, 8, 0});
  CHECK(per.gaps == std::array<double, 3>{0.0, 0.0, 0.0});
}

TEST_CASE("triangle audit is exact on trees and cycles") {
  std::mt19937_64 rng(11);
  auto tree = random_tree(14, rng);
  PeripheralFamily empty;
  auto rep = atg_audit(tree, empty, {});
  CHECK(rep.at("sigma") == 0.0);
  CHECK(rep.at("delta") == 0.0);
  REQUIRE(!rep.notes.empty());
  CHECK(rep.notes[0] == "corner triples exhaustive");

  auto ring = cycle_graph(12);
  auto crep = atg_audit(ring, empty, {});
  CHECK(crep.at("sigma") == doctest::Approx(2.0));
  CHECK(crep.at("delta") == 0.0);
}

TEST_CASE("stability of shared-endpoint paths") {
  auto g = grid_graph(7, 7);
  PeripheralFamily empty;
  DistanceOracle oracle(g);

  std::vector<std::pair<PathInSpace, PathInSpace>> pairs;
  auto vars = geodesic_variants(g, oracle, 0, 48, 1, 15);
  REQUIRE(vars.size() >= 2);
  pairs.emplace_back(vars[0], vars[1]);
  auto rep = check_transient_stability(g, empty, pairs, {1.0, 2.0, false});
  VertexSet a = vars[0].vertices, b = vars[1].vertices;
  normalize_set(a);
  normalize_set(b);
  CHECK(rep.at("M") == hausdorff_distance(g, a, b));
  CHECK(rep.at("t") == 1.0);
  CHECK(!rep.violation);

  std::vector<std::pair<PathInSpace, PathInSpace>> bad;
  bad.emplace_back(*shortest_path(g, 0, 5), *shortest_path(g, 0, 4));
  CHECK_THROWS_WITH_AS(check_transient_stability(g, empty, bad, {}),
                       doctest::Contains("endpoint-mismatch"), CheckError);
}

TEST_CASE("stability flags buried entrance points") {
  auto g = line_graph(21);
  // the singleton at 2 is entered exactly where {0, 10} makes the path deep
  PeripheralFamily fam = family_of({{2}, {0, 10}});
  auto p = *shortest_path(g, 0, 20);
  std::vector<std::pair<PathInSpace, PathInSpace>> pairs{{p, p}};
  StabilityParams params;
  params.mu = 0.0;
  params.R = 0.0;
  auto rep = check_transient_stability(g, fam, pairs, params);
  CHECK(rep.at("M") == 0.0);
  CHECK(rep.violation);
  REQUIRE(!rep.violations.empty());
  CHECK(rep.violations[0].members == std::vector<int>{0});
  CHECK(rep.violations[0].points == std::vector<Vertex>{2});
}

TEST_CASE("gg family io round trips and validates") {
  auto g = line_graph(6);
  GGFamily fam;
  GGPair gp;
  gp.eta = unit_path({0, 1, 2, 3});
  gp.trans = {0, 3};
  fam.insert(0, 3, gp);

  std::ostringstream out;
  save_gg_family(out, fam);
  CHECK(out.str() == "PAIR 0 3\nETA 0 1 2 3\nTRANS 0 3\n");

  std::istringstream in(out.str());
  GGFamily back = load_gg_family(in, g);
  REQUIRE(back.has(0, 3));
  auto got = back.pair(0, 3);
  CHECK(got.eta.vertices == std::vector<Vertex>{0, 1, 2, 3});
  CHECK(got.trans == std::vector<int>{0, 3});
  CHECK(got.eta.cum.back() == 3.0);

  auto rev = back.pair(3, 0);
  CHECK(rev.eta.vertices == std::vector<Vertex>{3, 2, 1, 0});
  CHECK(rev.trans == std::vector<int>{0, 3});
  CHECK(rev.eta.cum.front() == 0.0);
  CHECK(rev.eta.cum.back() == 3.0);

  FileGGProvider provider(back);
  CHECK(!provider.has(1, 2));
  CHECK_THROWS_WITH_AS(provider.pair(1, 2), doctest::Contains("missing"),
                       CheckError);

  auto load = [&g](const std::string& text) {
    std::istringstream ss(text);
    return load_gg_family(ss, g);
  };
  CHECK_THROWS_WITH_AS(load("PAIR 0 3\nTRANS 0\n"),
                       doctest::Contains("stray TRANS"), FormatError);
  CHECK_THROWS_WITH_AS(load("PAIR 0 3\nETA 0 1 2 3\n"),
                       doctest::Contains("PAIR without TRANS"), FormatError);
  CHECK_THROWS_WITH_AS(load("PAIR 0 3\nETA 0 2 3\nTRANS 0\n"),
                       doctest::Contains("not adjacent"), FormatError);
  CHECK_THROWS_WITH_AS(load("PAIR 0 3\nETA 0 1 2 3\nTRANS 7\n"),
                       doctest::Contains("out of range"), FormatError);
  CHECK_THROWS_WITH_AS(load("PAIR 0 x\n"), doctest::Contains("bad integer"),
                       FormatError);
  CHECK_THROWS_WITH_AS(load("PAIR 0 3\nETA 0 1 2\nTRANS 0\n"),
                       doctest::Contains("disagree"), FormatError);
}

TEST_CASE("honest guessed geodesics pass the audit, hub detours drift") {
  auto run = [](int radius, bool expect_clean, double* d3_honest,
                double* d3_hub) {
    auto ball = build_ball(GroupSpec::parse("free(2)"), radius);
    const MetricGraph& g = ball.graph;
    auto fam = peripheral_cosets(ball, {{"a", std::nullopt}});
    DistanceOracle oracle(g);
    FamilyOracle famO(g, oracle, fam);

    // audits measure membership against the mu-thickened cosets
    PeripheralFamily thick;
    for (int m = 0; m < fam.size(); ++m)
      thick.members.push_back(neighborhood(g, oracle, fam[m], 1.0));

    GGAuditParams params;
    params.pool = ball.interior(1);
    params.budget = 120;
    params.k_grid = {1.0, 2.0};
    params.cap = 10.0;
    params.seed = 5;

    TransientGGProvider honest(famO, {1.0, 2.0, false});
    auto hrep = gg_condition_audit(g, thick, honest, params);
    HubDetourProvider hub(g, oracle);
    auto brep = gg_condition_audit(g, thick, hub, params);

    *d3_honest = hrep.at("D3");
    *d3_hub = brep.at("D3");

    CHECK(hrep.at("D4") == 0.0);
    CHECK(hrep.at("D1") <= 2.0);
    if (expect_clean) {
      CHECK(!hrep.violation);
      bool plausible = false;
      for (const auto& n : hrep.notes)
        if (n.find("verdict: plausible") != std::string::npos) plausible = true;
      CHECK(plausible);
    }

    auto again = gg_condition_audit(g, thick, honest, params);
    CHECK(again.constants == hrep.constants);
    CHECK(again.samples == hrep.samples);
  };

  // the radius-3 ball is tiny: thickened cosets honestly overlap across a
  // visible fraction of it, so plausibility is only demanded at radius 5
  double h3 = 0, b3 = 0, h5 = 0, b5 = 0;
  run(3, false, &h3, &b3);
  run(5, true, &h5, &b5);
  // detour depth scales with the ball, honest constants stay put
  CHECK(b5 > b3 + 1.0);
  CHECK(b5 > h5 + 1.0);
  CHECK(h5 <= h3 + 2.0);
}

TEST_CASE("gg compare vanishes when the family tells the truth") {
  auto ball = build_ball(GroupSpec::parse("free(2)"), 4);
  const MetricGraph& g = ball.graph;
  auto fam = peripheral_cosets(ball, {{"a", std::nullopt}});
  DistanceOracle oracle(g);
  FamilyOracle famO(g, oracle, fam);
  TransientGGProvider honest(famO, {1.0, 2.0, false});

  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> pick(0, g.vertex_count() - 1);
  std::vector<PathInSpace> betas;
  while (betas.size() < 10) {
    Vertex x = pick(rng), y = pick(rng);
    if (x == y) continue;
    betas.push_back(*shortest_path(g, x, y));
  }
  auto rep = gg_compare(g, fam, honest, betas, {1.0, 2.0, false});
  CHECK(rep.at("L") == 0.0);
  CHECK(rep.samples == 10);
}
