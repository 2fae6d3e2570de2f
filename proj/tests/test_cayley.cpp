#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "relhyp/cayley.hpp"

using namespace relhyp;

namespace {

// ---- independent oracles ----------------------------------------------

// every freely reduced word over the first n base letters, up to maxlen
std::vector<std::string> freely_reduced_words(int n, int maxlen) {
  std::string letters;
  for (int i = 0; i < n; ++i) {
    letters.push_back(static_cast<char>('a' + i));
    letters.push_back(static_cast<char>('A' + i));
  }
  std::vector<std::string> out{""};
  size_t level_begin = 0;
  for (int len = 1; len <= maxlen; ++len) {
    size_t level_end = out.size();
    for (size_t i = level_begin; i < level_end; ++i)
      for (char c : letters) {
        const std::string& w = out[i];
        if (!w.empty() && w.back() == letter_inverse(c)) continue;
        out.push_back(w + c);
      }
    level_begin = level_end;
  }
  return out;
}

std::string genus2_relator() { return "abABcdCD"; }

std::set<std::string> relator_rotations() {
  std::set<std::string> rot;
  for (std::string r : {genus2_relator(), word_inverse(genus2_relator())})
    for (size_t i = 0; i < r.size(); ++i)
      rot.insert(r.substr(i) + r.substr(0, i));
  return rot;
}

// Dehn's algorithm: free reduction plus replacement of any more-than-half
// relator piece by the inverse of its complement. Decides the word problem
// for the genus-2 surface group without touching the rewriting system.
std::string dehn_reduce(std::string w) {
  static const std::vector<std::pair<std::string, std::string>> moves = [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const std::string& r : relator_rotations())
      for (size_t take = 5; take <= r.size(); ++take)
        out.push_back({r.substr(0, take), word_inverse(r.substr(take))});
    return out;
  }();
  bool changed = true;
  while (changed) {
    w = free_reduce(w);
    changed = false;
    for (size_t pos = 0; pos < w.size() && !changed; ++pos)
      for (const auto& [piece, repl] : moves) {
        if (pos + piece.size() > w.size()) continue;
        if (w.compare(pos, piece.size(), piece) != 0) continue;
        w = w.substr(0, pos) + repl + w.substr(pos + piece.size());
        changed = true;
        break;
      }
  }
  return w;
}

// sphere-series arithmetic for the free-product count oracle
std::vector<long long> series_inverse(const std::vector<long long>& s) {
  std::vector<long long> r(s.size(), 0);
  r[0] = 1;  // s[0] == 1
  for (size_t n = 1; n < s.size(); ++n) {
    long long acc = 0;
    for (size_t k = 1; k <= n; ++k) acc += s[k] * r[n - k];
    r[n] = -acc;
  }
  return r;
}

// spheres of A*B from spheres of A and B: 1/S_{A*B} = 1/S_A + 1/S_B - 1
std::vector<long long> free_product_spheres(std::vector<long long> a,
                                            std::vector<long long> b) {
  std::vector<long long> ia = series_inverse(a), ib = series_inverse(b);
  std::vector<long long> c(a.size());
  for (size_t n = 0; n < c.size(); ++n) c[n] = ia[n] + ib[n];
  c[0] -= 1;
  return series_inverse(c);
}

long long free_ball_count(int n, int r) {
  if (n == 1) return 2 * r + 1;
  long long total = 1, sphere = 2 * n;
  for (int k = 1; k <= r; ++k) {
    total += sphere;
    sphere *= 2 * n - 1;
  }
  return total;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  }
  void unite(int a, int b) {
    a = find(a), b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

bool word_over(const std::string& w, const std::string& letters) {
  return std::all_of(w.begin(), w.end(), [&](char c) {
    return letters.find(c) != std::string::npos;
  });
}

}  // namespace

TEST_CASE("letter utilities and shortlex order") {
  CHECK(letter_inverse('a') == 'A');
  CHECK(letter_inverse('C') == 'c');
  CHECK(letter_order('a') == 0);
  CHECK(letter_order('A') == 1);
  CHECK(letter_order('b') == 2);
  CHECK(word_inverse("abC") == "cBA");
  CHECK(free_reduce("abBA") == "");
  CHECK(free_reduce("abBc") == "ac");
  CHECK(shortlex_less("z", "aa"));
  CHECK(shortlex_less("ab", "ba"));
  CHECK(shortlex_less("a", "A"));
  CHECK(!shortlex_less("A", "a"));
  CHECK(!shortlex_less("ab", "ab"));
}

TEST_CASE("free ball counts match the closed formula") {
  for (int n = 1; n <= 3; ++n) {
    int rmax = n == 1 ? 6 : (n == 2 ? 5 : 4);
    GroupSpec spec = GroupSpec::parse("free(" + std::to_string(n) + ")");
    for (int r = 0; r <= rmax; ++r) {
      CayleyBall ball = build_ball(spec, r);
      CHECK(ball.graph.vertex_count() == free_ball_count(n, r));
    }
  }
  // radius-2 balls from the worked examples
  CHECK(build_ball(GroupSpec::parse("free(2)"), 2).graph.vertex_count() == 17);
  CHECK(build_ball(GroupSpec::parse("free_abelian(2)"), 2)
            .graph.vertex_count() == 13);
}

TEST_CASE("free balls are trees, free(1) is a path") {
  CayleyBall ball = build_ball(GroupSpec::parse("free(2)"), 4);
  CHECK(ball.graph.edges().size() ==
        static_cast<size_t>(ball.graph.vertex_count() - 1));
  CayleyBall line = build_ball(GroupSpec::parse("free(1)"), 3);
  CHECK(line.graph.vertex_count() == 7);
  CHECK(line.graph.edges().size() == 6);
  for (Vertex v = 0; v < line.graph.vertex_count(); ++v)
    CHECK(line.graph.neighbors(v).size() <= 2);
}

TEST_CASE("free_abelian(2) balls are taxicab diamonds") {
  GroupSpec spec = GroupSpec::parse("free_abelian(2)");
  for (int r = 0; r <= 4; ++r) {
    CayleyBall ball = build_ball(spec, r);
    CHECK(ball.graph.vertex_count() == 2 * r * r + 2 * r + 1);
  }
  CayleyBall ball = build_ball(spec, 3);
  CHECK(ball.system.normalize("ba") == "ab");
  CHECK(ball.system.normalize("bA") == "Ab");
  CHECK(ball.system.normalize("BaBa") == "aaBB");
  CHECK(ball.system.normalize("abAB") == "");
}

TEST_CASE("direct_product(free(1),free(1)) agrees with free_abelian(2)") {
  GroupSpec prod = GroupSpec::parse("direct_product(free(1),free(1))");
  GroupSpec ab = GroupSpec::parse("free_abelian(2)");
  for (int r = 0; r <= 3; ++r) {
    CayleyBall bp = build_ball(prod, r);
    CayleyBall ba = build_ball(ab, r);
    CHECK(bp.graph.vertex_count() == ba.graph.vertex_count());
    std::set<std::string> wp(bp.words.begin(), bp.words.end());
    std::set<std::string> wa(ba.words.begin(), ba.words.end());
    CHECK(wp == wa);
  }
}

TEST_CASE("normal-form words are geodesic labels") {
  for (const char* text : {"free_abelian(2)", "surface(2)"}) {
    CayleyBall ball = build_ball(GroupSpec::parse(text), 3);
    CHECK(ball.graph.label(0) == "1");
    CHECK(ball.words[0] == "");
    std::vector<double> dist = single_source_distances(ball.graph, 0);
    for (Vertex v = 0; v < ball.graph.vertex_count(); ++v) {
      CHECK(dist[v] == doctest::Approx(static_cast<double>(
                           ball.words[v].size())));
      if (v > 0) CHECK(ball.graph.label(v) == ball.words[v]);
    }
  }
}

TEST_CASE("ball edges join words differing by one generator") {
  for (const char* text : {"free_abelian(2)", "surface(2)"}) {
    CayleyBall ball = build_ball(GroupSpec::parse(text), 3);
    std::string letters = ball.system.alphabet();
    for (const Edge& e : ball.graph.edges()) {
      bool ok = false;
      for (char x : letters) {
        if (ball.system.normalize(ball.words[e.u] + x) == ball.words[e.v])
          ok = true;
        if (ball.system.normalize(ball.words[e.v] + x) == ball.words[e.u])
          ok = true;
      }
      CHECK(ok);
      CHECK(e.length == 1.0);
    }
  }
}

TEST_CASE("surface(2) radius 3 ball is the free-group ball") {
  // below length 4 no relator piece is more than half, so elements are
  // exactly the freely reduced words
  std::vector<std::string> oracle = freely_reduced_words(4, 3);
  CayleyBall ball = build_ball(GroupSpec::parse("surface(2)"), 3);
  CHECK(oracle.size() == 457);
  CHECK(ball.graph.vertex_count() == 457);
  std::set<std::string> ball_words(ball.words.begin(), ball.words.end());
  std::set<std::string> oracle_words(oracle.begin(), oracle.end());
  CHECK(ball_words == oracle_words);
}

TEST_CASE("surface(2) radius 4 count via relator identifications") {
  // Oracle: enumerate freely reduced words of length <= 4 and glue u ~ v
  // whenever u v^-1 reduces to a relator rotation. Trivial reduced words
  // shorter than the relator do not exist, so these are all coincidences.
  std::vector<std::string> words = freely_reduced_words(4, 4);
  CHECK(words.size() == 3201);
  std::set<std::string> rot = relator_rotations();
  CHECK(rot.size() == 16);
  UnionFind uf(words.size());
  long glued = 0;
  for (size_t i = 0; i < words.size(); ++i)
    for (size_t j = i + 1; j < words.size(); ++j) {
      if (words[i].size() + words[j].size() < 8) continue;
      std::string p = free_reduce(words[i] + word_inverse(words[j]));
      if (rot.count(p)) {
        uf.unite(static_cast<int>(i), static_cast<int>(j));
        ++glued;
      }
    }
  CHECK(glued == 8);
  std::set<int> roots;
  for (size_t i = 0; i < words.size(); ++i)
    roots.insert(uf.find(static_cast<int>(i)));
  CHECK(roots.size() == 3193);

  CayleyBall ball = build_ball(GroupSpec::parse("surface(2)"), 4);
  CHECK(ball.graph.vertex_count() == 3193);

  // each glued pair keeps exactly its shortlex-smaller member as a word
  std::set<std::string> ball_words(ball.words.begin(), ball.words.end());
  std::map<int, std::vector<std::string>> classes;
  for (size_t i = 0; i < words.size(); ++i)
    classes[uf.find(static_cast<int>(i))].push_back(words[i]);
  for (auto& [root, cls] : classes) {
    std::sort(cls.begin(), cls.end(), shortlex_less);
    CHECK(ball_words.count(cls.front()) == 1);
    for (size_t k = 1; k < cls.size(); ++k)
      CHECK(ball_words.count(cls[k]) == 0);
  }
}

TEST_CASE("surface(2) normal forms agree with Dehn's algorithm") {
  CayleyBall ball = build_ball(GroupSpec::parse("surface(2)"), 4);
  // normal forms never contain a more-than-half relator piece
  for (const std::string& w : ball.words) CHECK(dehn_reduce(w) == w);
  // distinct normal forms name distinct elements
  std::mt19937_64 rng(2026);
  std::uniform_int_distribution<int> pick(0, ball.graph.vertex_count() - 1);
  for (int t = 0; t < 300; ++t) {
    int i = pick(rng), j = pick(rng);
    if (i == j) continue;
    CHECK(dehn_reduce(ball.words[i] + word_inverse(ball.words[j])) != "");
  }
  // and multiplying in a relator rotation does not change the element
  std::set<std::string> all_rot = relator_rotations();
  std::vector<std::string> rot(all_rot.begin(), all_rot.end());
  for (int t = 0; t < 100; ++t) {
    const std::string& w = ball.words[pick(rng)];
    const std::string& r = rot[t % rot.size()];
    CHECK(dehn_reduce(w + r + word_inverse(w)) == "");
  }
  CHECK(ball.system.normalize("abABc") == "dcD");
}

TEST_CASE("free product ball counts match the sphere-series oracle") {
  // Z^2 spheres 4r, free(1) spheres 2; convolve via 1/S_A + 1/S_B - 1
  std::vector<long long> za(7, 0), fr(7, 2);
  za[0] = 1;
  for (int r = 1; r <= 6; ++r) za[r] = 4 * r;
  fr[0] = 1;
  std::vector<long long> spheres = free_product_spheres(za, fr);
  std::vector<long long> balls(7);
  std::partial_sum(spheres.begin(), spheres.end(), balls.begin());

  GroupSpec spec = GroupSpec::parse("free_product(free_abelian(2),free(1))");
  for (int r = 0; r <= 6; ++r) {
    CayleyBall ball = build_ball(spec, r);
    CHECK(ball.graph.vertex_count() == balls[r]);
  }
  CHECK(balls[4] == 609);
  CHECK(balls[5] == 2583);
  CHECK(balls[6] == 10945);
}

TEST_CASE("group spec parse and describe round trip") {
  CHECK(GroupSpec::parse("free2").describe() == "free(2)");
  CHECK(GroupSpec::parse(" free( 2 ) ").describe() == "free(2)");
  CHECK(GroupSpec::parse("surface(3)").describe() == "surface(3)");
  const char* nested = "free_product(free_abelian(2),free(1))";
  CHECK(GroupSpec::parse(nested).describe() == nested);
  const char* deep = "direct_product(free(2),free_product(free(1),free(1)))";
  CHECK(GroupSpec::parse(deep).describe() == deep);
  CHECK(GroupSpec::parse(deep).letter_count() == 4);

  CHECK_THROWS_AS(GroupSpec::parse("surface(1)"), ConfigError);
  CHECK_THROWS_AS(GroupSpec::parse("free(0)"), ConfigError);
  CHECK_THROWS_AS(GroupSpec::parse("banana(2)"), ConfigError);
  CHECK_THROWS_AS(GroupSpec::parse("free(2)junk"), ConfigError);
  CHECK_THROWS_AS(GroupSpec::parse("free_product(free(1))"), ConfigError);
  CHECK_THROWS_AS(GroupSpec::parse("rewriting"), ConfigError);
}

TEST_CASE("group config files") {
  {
    std::istringstream in("family=surface\ngenus=2\n");
    CHECK(GroupSpec::load_config(in).describe() == "surface(2)");
  }
  {
    std::istringstream in("# comment\nfamily=free_product(free(1),free(1))\n");
    CHECK(GroupSpec::load_config(in).describe() ==
          "free_product(free(1),free(1))");
  }
  {
    // Z/3 as a rewriting system: aa -> A, AA -> a
    std::istringstream in(
        "family=rewriting\ngenerators=a\nrules=\naa->A\nAA->a\n");
    GroupSpec spec = GroupSpec::load_config(in);
    CayleyBall ball = build_ball(spec, 2);
    CHECK(ball.graph.vertex_count() == 3);
    CHECK(ball.graph.edges().size() == 3);
  }
  {
    // Z/2 where the formal inverse folds onto the generator
    std::istringstream in(
        "family=rewriting\ngenerators=a\nrules=\naa->\nA->a\n");
    CayleyBall ball = build_ball(GroupSpec::load_config(in), 3);
    CHECK(ball.graph.vertex_count() == 2);
  }
  {
    std::istringstream in("genus=2\n");
    CHECK_THROWS_AS(GroupSpec::load_config(in), FormatError);
  }
  {
    std::istringstream in("family=rewriting\ngenerators=a\nrules=\nnope\n");
    CHECK_THROWS_AS(GroupSpec::load_config(in), FormatError);
  }
  {
    std::istringstream in("family=rewriting\ngenerators=aq\n");
    CHECK_THROWS_AS(GroupSpec::load_config(in), FormatError);
  }
}

TEST_CASE("rewriting validation rejects bad rule sets") {
  {
    // not order-decreasing
    std::istringstream in("family=rewriting\ngenerators=ab\nrules=\nab->ba\n");
    GroupSpec spec = GroupSpec::load_config(in);
    CHECK_THROWS_WITH_AS(build_ball(spec, 2),
                         doctest::Contains("does not decrease"), ConfigError);
  }
  {
    // terminating but not confluent: ab -> a leaves a lone b irreducible
    std::istringstream in("family=rewriting\ngenerators=ab\nrules=\nab->a\n");
    GroupSpec spec = GroupSpec::load_config(in);
    CHECK_THROWS_WITH_AS(build_ball(spec, 2), doctest::Contains("diverge"),
                         ConfigError);
  }
}

TEST_CASE("build_ball caps") {
  CHECK_THROWS_AS(build_ball(GroupSpec::parse("free(2)"), 9), ConfigError);
  CHECK_THROWS_AS(build_ball(GroupSpec::parse("free(2)"), -1), ConfigError);
  CHECK_THROWS_AS(build_ball(GroupSpec::parse("free(2)"), 5, 8, 100),
                  GraphError);
}

TEST_CASE("coset of the a-axis in free(2)") {
  CayleyBall ball = build_ball(GroupSpec::parse("free(2)"), 4);
  PeripheralFamily fam =
      peripheral_cosets(ball, {{"a", std::optional<std::string>("")}});
  REQUIRE(fam.size() == 1);
  VertexSet expect;
  for (const char* w : {"", "a", "aa", "aaa", "aaaa", "A", "AA", "AAA", "AAAA"})
    expect.push_back(*ball.find(w));
  normalize_set(expect);
  CHECK(fam[0] == expect);
  CHECK(fam[0].size() == 9);
}

TEST_CASE("all a-cosets in free(2) against the algebraic membership oracle") {
  CayleyBall ball = build_ball(GroupSpec::parse("free(2)"), 4);
  PeripheralFamily fam = peripheral_cosets(ball, {{"a", std::nullopt}});
  int n = ball.graph.vertex_count();

  // oracle: u, v share a coset iff u^-1 v normalizes to a power of a
  auto same_coset = [&](Vertex u, Vertex v) {
    std::string d =
        ball.system.normalize(word_inverse(ball.words[u]) + ball.words[v]);
    return word_over(d, "aA");
  };

  std::vector<int> member_of(n, -1);
  for (int m = 0; m < fam.size(); ++m)
    for (Vertex v : fam[m]) {
      CHECK(member_of[v] == -1);  // members are disjoint
      member_of[v] = m;
    }
  for (Vertex u = 0; u < n; ++u) {
    int cls = 1;
    for (Vertex v = 0; v < n; ++v) {
      if (u == v) continue;
      bool oracle = same_coset(u, v);
      if (oracle) ++cls;
      if (member_of[u] >= 0 && member_of[v] >= 0)
        CHECK(oracle == (member_of[u] == member_of[v]));
    }
    // every vertex with a big enough coset landed in some member
    CHECK((member_of[u] >= 0) == (cls >= 3));
  }
}

TEST_CASE("a-cosets of the taxicab ball are the seven horizontal lines") {
  CayleyBall ball = build_ball(GroupSpec::parse("free_abelian(2)"), 3);
  PeripheralFamily fam = peripheral_cosets(ball, {{"a", std::nullopt}}, 1);
  CHECK(fam.size() == 7);
  std::vector<size_t> sizes;
  for (int m = 0; m < fam.size(); ++m) sizes.push_back(fam[m].size());
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<size_t>{1, 1, 3, 3, 5, 5, 7});
  size_t total = 0;
  for (size_t s : sizes) total += s;
  CHECK(total == static_cast<size_t>(ball.graph.vertex_count()));
}

TEST_CASE("coset spec errors") {
  CayleyBall ball = build_ball(GroupSpec::parse("free(2)"), 3);
  CHECK_THROWS_AS(
      peripheral_cosets(ball, {{"z", std::nullopt}}), ConfigError);
  CHECK_THROWS_AS(
      peripheral_cosets(ball, {{"", std::nullopt}}), ConfigError);
  CHECK_THROWS_AS(
      peripheral_cosets(ball,
                        {{"a", std::optional<std::string>("bbbb")}}),
      ConfigError);
}
