#include "relhyp/cayley.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

namespace relhyp {

char letter_inverse(char c) {
  return std::islower(static_cast<unsigned char>(c))
             ? static_cast<char>(std::toupper(static_cast<unsigned char>(c)))
             : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

int letter_order(char c) {
  if (std::islower(static_cast<unsigned char>(c))) return 2 * (c - 'a');
  return 2 * (c - 'A') + 1;
}

std::string word_inverse(const std::string& w) {
  std::string out(w.rbegin(), w.rend());
  for (char& c : out) c = letter_inverse(c);
  return out;
}

bool shortlex_less(const std::string& u, const std::string& v) {
  if (u.size() != v.size()) return u.size() < v.size();
  for (size_t i = 0; i < u.size(); ++i)
    if (u[i] != v[i]) return letter_order(u[i]) < letter_order(v[i]);
  return false;
}

std::string free_reduce(std::string w) {
  std::string out;
  for (char c : w) {
    if (!out.empty() && out.back() == letter_inverse(c))
      out.pop_back();
    else
      out.push_back(c);
  }
  return out;
}

std::string RewritingSystem::alphabet() const {
  std::string out;
  for (int i = 0; i < letter_count; ++i) {
    out.push_back(static_cast<char>('a' + i));
    out.push_back(static_cast<char>('A' + i));
  }
  return out;
}

std::string RewritingSystem::normalize(std::string w) const {
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t pos = 0; pos < w.size() && !changed; ++pos)
      for (const RewriteRule& r : rules) {
        if (pos + r.lhs.size() > w.size()) continue;
        if (w.compare(pos, r.lhs.size(), r.lhs) != 0) continue;
        w = w.substr(0, pos) + r.rhs + w.substr(pos + r.lhs.size());
        changed = true;
        break;
      }
  }
  return w;
}

void RewritingSystem::validate(int max_word_len) const {
  std::string letters = alphabet();
  auto known = [&](const std::string& s) {
    return std::all_of(s.begin(), s.end(), [&](char c) {
      return letters.find(c) != std::string::npos;
    });
  };
  for (const RewriteRule& r : rules) {
    if (r.lhs.empty())
      throw ConfigError("rewriting-system validation failure: empty rule lhs");
    if (!known(r.lhs) || !known(r.rhs))
      throw ConfigError(
          "rewriting-system validation failure: unknown letter in rule '" +
          r.lhs + "->" + r.rhs + "'");
    if (r.rhs.size() > r.lhs.size() ||
        (r.rhs.size() == r.lhs.size() && !shortlex_less(r.rhs, r.lhs)))
      throw ConfigError(
          "rewriting-system validation failure: rule '" + r.lhs + "->" +
          r.rhs + "' does not decrease shortlex order");
  }
  // local confluence on every superposition short enough to arise in a ball
  for (size_t i = 0; i < rules.size(); ++i)
    for (size_t j = 0; j < rules.size(); ++j) {
      const std::string& l1 = rules[i].lhs;
      const std::string& l2 = rules[j].lhs;
      for (size_t off = 0; off < l1.size(); ++off) {
        if (i == j && off == 0) continue;
        size_t k = std::min(l1.size() - off, l2.size());
        if (l1.compare(off, k, l2, 0, k) != 0) continue;
        // overlapping applications inside one word
        std::string w = off + l2.size() <= l1.size()
                            ? l1
                            : l1 + l2.substr(l1.size() - off);
        if (w.size() > static_cast<size_t>(max_word_len)) continue;
        std::string via1 = rules[i].rhs + w.substr(l1.size());
        std::string via2 =
            w.substr(0, off) + rules[j].rhs + w.substr(off + l2.size());
        if (normalize(via1) != normalize(via2))
          throw ConfigError(
              "rewriting-system validation failure: rules '" + l1 + "->" +
              rules[i].rhs + "' and '" + l2 + "->" + rules[j].rhs +
              "' diverge on '" + w + "'");
      }
    }
}

int GroupSpec::letter_count() const {
  switch (family) {
    case Free:
    case FreeAbelian:
      return rank;
    case Surface:
      return 2 * genus;
    case FreeProduct:
    case DirectProduct:
      return factors[0].letter_count() + factors[1].letter_count();
    case Rewriting:
      return generator_count;
  }
  return 0;
}

std::string GroupSpec::describe() const {
  switch (family) {
    case Free:
      return "free(" + std::to_string(rank) + ")";
    case FreeAbelian:
      return "free_abelian(" + std::to_string(rank) + ")";
    case Surface:
      return "surface(" + std::to_string(genus) + ")";
    case FreeProduct:
      return "free_product(" + factors[0].describe() + "," +
             factors[1].describe() + ")";
    case DirectProduct:
      return "direct_product(" + factors[0].describe() + "," +
             factors[1].describe() + ")";
    case Rewriting:
      return "rewriting";
  }
  return "?";
}

namespace {

// recursive-descent for: name | name(int) | name(spec,spec) | name<digits>
GroupSpec parse_spec(const std::string& text, size_t& pos);

std::string parse_name(const std::string& text, size_t& pos) {
  size_t start = pos;
  while (pos < text.size() &&
         (std::isalpha(static_cast<unsigned char>(text[pos])) ||
          text[pos] == '_'))
    ++pos;
  if (start == pos)
    throw ConfigError("group spec: expected family name at position " +
                      std::to_string(start) + " in '" + text + "'");
  return text.substr(start, pos - start);
}

int parse_int(const std::string& text, size_t& pos) {
  size_t start = pos;
  while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
    ++pos;
  if (start == pos)
    throw ConfigError("group spec: expected integer at position " +
                      std::to_string(start) + " in '" + text + "'");
  return std::stoi(text.substr(start, pos - start));
}

GroupSpec parse_spec(const std::string& text, size_t& pos) {
  std::string name = parse_name(text, pos);
  GroupSpec spec;
  bool wants_int = false;
  if (name == "free")
    spec.family = GroupSpec::Free, wants_int = true;
  else if (name == "free_abelian")
    spec.family = GroupSpec::FreeAbelian, wants_int = true;
  else if (name == "surface")
    spec.family = GroupSpec::Surface, wants_int = true;
  else if (name == "free_product")
    spec.family = GroupSpec::FreeProduct;
  else if (name == "direct_product")
    spec.family = GroupSpec::DirectProduct;
  else if (name == "rewriting")
    spec.family = GroupSpec::Rewriting;
  else
    throw ConfigError("group spec: unknown family '" + name + "'");

  if (wants_int) {
    int value = 0;
    if (pos < text.size() && text[pos] == '(') {
      ++pos;
      value = parse_int(text, pos);
      if (pos >= text.size() || text[pos] != ')')
        throw ConfigError("group spec: missing ')' in '" + text + "'");
      ++pos;
    } else if (pos < text.size() &&
               std::isdigit(static_cast<unsigned char>(text[pos]))) {
      value = parse_int(text, pos);  // shorthand free2
    } else {
      throw ConfigError("group spec: family '" + name +
                        "' needs a parameter, e.g. " + name + "(2)");
    }
    if (spec.family == GroupSpec::Surface) {
      spec.genus = value;
      if (value < 2)
        throw ConfigError("group spec: surface genus must be >= 2");
    } else {
      spec.rank = value;
      if (value < 1) throw ConfigError("group spec: rank must be >= 1");
    }
    return spec;
  }
  if (spec.family == GroupSpec::Rewriting) return spec;

  if (pos >= text.size() || text[pos] != '(')
    throw ConfigError("group spec: '" + name + "' needs two factors");
  ++pos;
  spec.factors.push_back(parse_spec(text, pos));
  if (pos >= text.size() || text[pos] != ',')
    throw ConfigError("group spec: expected ',' between factors in '" + text +
                      "'");
  ++pos;
  spec.factors.push_back(parse_spec(text, pos));
  if (pos >= text.size() || text[pos] != ')')
    throw ConfigError("group spec: missing ')' in '" + text + "'");
  ++pos;
  for (const GroupSpec& f : spec.factors)
    if (f.family == GroupSpec::Rewriting)
      throw ConfigError("group spec: rewriting cannot be a product factor");
  return spec;
}

std::vector<RewriteRule> commutation_rules(const std::string& low_letters,
                                           const std::string& high_letters) {
  // letters of the high block hop left over letters of the low block
  std::vector<RewriteRule> out;
  for (char hi : high_letters)
    for (char lo : low_letters)
      out.push_back({std::string{hi, lo}, std::string{lo, hi}});
  return out;
}

std::string case_letters(int first, int count) {
  std::string out;
  for (int i = 0; i < count; ++i) {
    out.push_back(static_cast<char>('a' + first + i));
    out.push_back(static_cast<char>('A' + first + i));
  }
  return out;
}

}  // namespace

GroupSpec GroupSpec::parse(const std::string& text) {
  std::string clean;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) clean.push_back(c);
  size_t pos = 0;
  GroupSpec spec = parse_spec(clean, pos);
  if (pos != clean.size())
    throw ConfigError("group spec: trailing text '" + clean.substr(pos) +
                      "'");
  if (spec.family == Rewriting)
    throw ConfigError(
        "group spec: 'rewriting' needs a config file with generators= and "
        "rules=");
  return spec;
}

GroupSpec GroupSpec::load_config(std::istream& in) {
  GroupSpec spec;
  bool have_family = false;
  bool in_rules = false;
  std::optional<int> genus, rank;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = line;
    if (auto hash = t.find('#'); hash != std::string::npos) t = t.substr(0, hash);
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back())))
      t.pop_back();
    size_t first = 0;
    while (first < t.size() && std::isspace(static_cast<unsigned char>(t[first])))
      ++first;
    t = t.substr(first);
    if (t.empty()) continue;

    if (in_rules) {
      auto arrow = t.find("->");
      if (arrow == std::string::npos)
        throw FormatError("line " + std::to_string(lineno) +
                          ": expected rule 'lhs->rhs', got '" + t + "'");
      std::string lhs = t.substr(0, arrow), rhs = t.substr(arrow + 2);
      auto strip = [](std::string s) {
        std::string out;
        for (char c : s)
          if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
        return out;
      };
      spec.user_rules.push_back({strip(lhs), strip(rhs)});
      continue;
    }

    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw FormatError("line " + std::to_string(lineno) +
                        ": expected key=value, got '" + t + "'");
    std::string key = t.substr(0, eq), value = t.substr(eq + 1);
    if (key == "family") {
      have_family = true;
      if (value == "rewriting") {
        spec.family = Rewriting;
      } else if (value == "surface" || value == "free" ||
                 value == "free_abelian") {
        // parameter may come from genus=/rank= keys
        spec.family = value == "surface"
                          ? Surface
                          : (value == "free" ? Free : FreeAbelian);
      } else {
        GroupSpec parsed = GroupSpec::parse(value);
        parsed.user_rules = spec.user_rules;
        spec = parsed;
      }
    } else if (key == "genus") {
      genus = std::stoi(value);
    } else if (key == "rank") {
      rank = std::stoi(value);
    } else if (key == "generators") {
      std::string letters;
      for (char c : value)
        if (!std::isspace(static_cast<unsigned char>(c))) letters.push_back(c);
      for (char c : letters)
        if (!std::islower(static_cast<unsigned char>(c)))
          throw FormatError("line " + std::to_string(lineno) +
                            ": generators must be lowercase letters");
      std::string sorted = letters;
      std::sort(sorted.begin(), sorted.end());
      std::string expect;
      for (size_t i = 0; i < letters.size(); ++i)
        expect.push_back(static_cast<char>('a' + i));
      if (sorted != expect)
        throw FormatError("line " + std::to_string(lineno) +
                          ": generators must be a,b,c,... without gaps");
      spec.generator_count = static_cast<int>(letters.size());
    } else if (key == "rules") {
      in_rules = true;
    } else {
      throw FormatError("line " + std::to_string(lineno) + ": unknown key '" +
                        key + "'");
    }
  }
  if (!have_family) throw FormatError("group config: missing family=");
  if (spec.family == Surface && spec.genus == 0) {
    if (!genus) throw FormatError("group config: surface needs genus=");
    spec.genus = *genus;
    if (spec.genus < 2) throw FormatError("group config: genus must be >= 2");
  }
  if ((spec.family == Free || spec.family == FreeAbelian) && spec.rank == 0) {
    if (!rank) throw FormatError("group config: missing rank=");
    spec.rank = *rank;
    if (spec.rank < 1) throw FormatError("group config: rank must be >= 1");
  }
  if (spec.family == Rewriting && spec.generator_count == 0)
    throw FormatError("group config: rewriting needs generators=");
  return spec;
}

GroupSpec GroupSpec::load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open group config '" + path + "'");
  return load_config(in);
}

namespace {

void build_rules(const GroupSpec& spec, int first_letter,
                 std::vector<RewriteRule>& out) {
  int count = spec.letter_count();
  if (spec.family == GroupSpec::FreeProduct ||
      spec.family == GroupSpec::DirectProduct) {
    int left = spec.factors[0].letter_count();
    build_rules(spec.factors[0], first_letter, out);
    build_rules(spec.factors[1], first_letter + left, out);
    if (spec.family == GroupSpec::DirectProduct) {
      std::string lo = case_letters(first_letter, left);
      std::string hi =
          case_letters(first_letter + left, spec.factors[1].letter_count());
      for (const RewriteRule& r : commutation_rules(lo, hi)) out.push_back(r);
    }
    return;
  }
  // free reduction is always present
  for (int i = 0; i < count; ++i) {
    char x = static_cast<char>('a' + first_letter + i);
    char X = static_cast<char>('A' + first_letter + i);
    out.push_back({std::string{x, X}, ""});
    out.push_back({std::string{X, x}, ""});
  }
  switch (spec.family) {
    case GroupSpec::Free:
    case GroupSpec::FreeProduct:
    case GroupSpec::DirectProduct:
      break;
    case GroupSpec::FreeAbelian: {
      for (int i = 0; i < count; ++i)
        for (int j = i + 1; j < count; ++j) {
          std::string lo = case_letters(first_letter + i, 1);
          std::string hi = case_letters(first_letter + j, 1);
          for (const RewriteRule& r : commutation_rules(lo, hi))
            out.push_back(r);
        }
      break;
    }
    case GroupSpec::Surface: {
      // relator a b A B c d C D ... ; Dehn rules replace long halves
      std::string relator;
      for (int i = 0; i < spec.genus; ++i) {
        char x = static_cast<char>('a' + first_letter + 2 * i);
        char y = static_cast<char>('a' + first_letter + 2 * i + 1);
        relator.push_back(x);
        relator.push_back(y);
        relator.push_back(letter_inverse(x));
        relator.push_back(letter_inverse(y));
      }
      size_t n = relator.size();
      std::set<std::pair<std::string, std::string>> seen;
      auto add_dehn = [&](const std::string& rel) {
        for (size_t rot = 0; rot < n; ++rot) {
          std::string w = rel.substr(rot) + rel.substr(0, rot);
          for (size_t take = n / 2; take <= n; ++take) {
            std::string lhs = w.substr(0, take);
            std::string rhs = word_inverse(w.substr(take));
            if (take == n / 2 && !shortlex_less(rhs, lhs)) continue;
            if (seen.insert({lhs, rhs}).second) out.push_back({lhs, rhs});
          }
        }
      };
      add_dehn(relator);
      add_dehn(word_inverse(relator));
      break;
    }
    case GroupSpec::Rewriting: {
      for (const RewriteRule& r : spec.user_rules) out.push_back(r);
      break;
    }
  }
}

}  // namespace

RewritingSystem compile_rules(const GroupSpec& spec) {
  RewritingSystem sys;
  sys.letter_count = spec.letter_count();
  if (sys.letter_count < 1)
    throw ConfigError("group spec has no generators");
  if (sys.letter_count > 26)
    throw ConfigError("group spec needs more than 26 letters");
  build_rules(spec, 0, sys.rules);
  // deterministic rule order: shortlex on lhs then rhs
  std::sort(sys.rules.begin(), sys.rules.end(),
            [](const RewriteRule& a, const RewriteRule& b) {
              if (a.lhs != b.lhs) return shortlex_less(a.lhs, b.lhs);
              return shortlex_less(a.rhs, b.rhs);
            });
  sys.rules.erase(std::unique(sys.rules.begin(), sys.rules.end(),
                              [](const RewriteRule& a, const RewriteRule& b) {
                                return a.lhs == b.lhs && a.rhs == b.rhs;
                              }),
                  sys.rules.end());
  return sys;
}

std::optional<Vertex> CayleyBall::find(const std::string& normal_form) const {
  auto it = index_.find(normal_form);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

VertexSet CayleyBall::interior(int margin) const {
  VertexSet out;
  size_t keep = margin >= radius ? 0 : static_cast<size_t>(radius - margin);
  for (size_t i = 0; i < words.size(); ++i)
    if (words[i].size() <= keep) out.push_back(static_cast<Vertex>(i));
  return out;
}

CayleyBall build_ball(const GroupSpec& spec, int radius, int max_radius,
                      int vertex_cap) {
  if (radius < 0) throw ConfigError("radius must be nonnegative");
  if (radius > max_radius)
    throw ConfigError("radius " + std::to_string(radius) +
                      " exceeds configured maximum " +
                      std::to_string(max_radius));
  CayleyBall ball;
  ball.spec = spec;
  ball.radius = radius;
  ball.system = compile_rules(spec);
  ball.system.validate(radius + 1);
  const RewritingSystem& sys = ball.system;
  std::string letters = sys.alphabet();

  std::map<std::string, Vertex> ids;
  std::vector<std::string> words;
  std::set<std::pair<Vertex, Vertex>> edges;
  std::deque<std::string> queue;
  ids[""] = 0;
  words.push_back("");
  queue.push_back("");
  while (!queue.empty()) {
    std::string w = queue.front();
    queue.pop_front();
    Vertex wid = ids[w];
    for (char x : letters) {
      std::string u = sys.normalize(w + x);
      if (u.size() > static_cast<size_t>(radius)) continue;
      auto [it, fresh] = ids.try_emplace(u, static_cast<Vertex>(words.size()));
      if (fresh) {
        words.push_back(u);
        if (static_cast<int>(words.size()) > vertex_cap)
          throw GraphError("ball size cap exceeded (" +
                           std::to_string(vertex_cap) + " vertices)");
        queue.push_back(u);
      }
      Vertex uid = it->second;
      if (uid != wid)
        edges.insert({std::min(wid, uid), std::max(wid, uid)});
    }
  }

  MetricGraph g(static_cast<int>(words.size()));
  for (const auto& [u, v] : edges) g.add_edge(u, v, 1.0);
  for (Vertex v = 0; v < g.vertex_count(); ++v)
    g.set_label(v, words[v].empty() ? "1" : words[v]);
  g.require_connected();
  ball.graph = std::move(g);
  ball.words = std::move(words);
  for (size_t i = 0; i < ball.words.size(); ++i)
    ball.index_[ball.words[i]] = static_cast<Vertex>(i);
  return ball;
}

PeripheralFamily peripheral_cosets(const CayleyBall& ball,
                                   const std::vector<CosetSpec>& specs,
                                   int min_size) {
  const RewritingSystem& sys = ball.system;
  PeripheralFamily fam;
  std::set<VertexSet> seen;
  int n = ball.graph.vertex_count();
  for (const CosetSpec& cs : specs) {
    if (cs.subgroup.empty())
      throw ConfigError("coset spec: empty subgroup alphabet");
    std::string sub;
    for (char c : cs.subgroup) {
      if (!std::islower(static_cast<unsigned char>(c)) ||
          c - 'a' >= sys.letter_count)
        throw ConfigError(std::string("coset spec: unknown generator '") + c +
                          "'");
      sub.push_back(c);
      sub.push_back(letter_inverse(c));  // close under inversion
    }
    // union-find over right multiplication by subgroup generators
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int v) {
      while (parent[v] != v) v = parent[v] = parent[parent[v]];
      return v;
    };
    for (Vertex v = 0; v < n; ++v)
      for (char s : sub) {
        std::string u = sys.normalize(ball.words[v] + s);
        auto uid = ball.find(u);
        if (!uid) continue;
        int a = find(v), b = find(*uid);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    std::map<int, VertexSet> classes;
    for (Vertex v = 0; v < n; ++v) classes[find(v)].push_back(v);

    if (cs.representative) {
      std::string rep = sys.normalize(*cs.representative);
      auto rid = ball.find(rep);
      if (!rid)
        throw ConfigError("coset representative '" + *cs.representative +
                          "' lies outside the ball");
      VertexSet member = classes[find(*rid)];
      normalize_set(member);
      if (static_cast<int>(member.size()) >= min_size &&
          seen.insert(member).second)
        fam.members.push_back(std::move(member));
    } else {
      for (auto& [root, member] : classes) {
        normalize_set(member);
        if (static_cast<int>(member.size()) >= min_size &&
            seen.insert(member).second)
          fam.members.push_back(std::move(member));
      }
    }
  }
  return fam;
}

}  // namespace relhyp
