#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "relhyp/metric_graph.hpp"
#include "relhyp/peripherals.hpp"

namespace relhyp {

// Generators are single letters: 'a'+i lowercase, with 'A'+i as the formal
// inverse. Shortlex order interleaves them: a < A < b < B < ...
char letter_inverse(char c);
int letter_order(char c);
std::string word_inverse(const std::string& w);
bool shortlex_less(const std::string& u, const std::string& v);
std::string free_reduce(std::string w);

struct RewriteRule {
  std::string lhs;
  std::string rhs;
};

// Length-nonincreasing, shortlex-decreasing rewriting. normalize() is a
// leftmost fixpoint scan; validate() checks termination order plus local
// confluence via critical pairs up to the given word length.
struct RewritingSystem {
  int letter_count = 0;  // base letters 'a'..'a'+count-1
  std::vector<RewriteRule> rules;

  std::string alphabet() const;  // all 2*letter_count letters, shortlex order
  std::string normalize(std::string w) const;
  void validate(int max_word_len) const;
};

struct GroupSpec {
  enum Family {
    Free,
    FreeAbelian,
    FreeProduct,
    DirectProduct,
    Surface,
    Rewriting
  };
  Family family = Free;
  int rank = 0;   // free / free_abelian
  int genus = 0;  // surface
  std::vector<GroupSpec> factors;         // binary products
  int generator_count = 0;                // rewriting
  std::vector<RewriteRule> user_rules;    // rewriting

  int letter_count() const;
  std::string describe() const;  // round-trips through parse()

  // "free(2)", "free2", "surface(2)", "free_product(free_abelian(2),free(1))"
  static GroupSpec parse(const std::string& text);
  // key=value config: family=, rank=, genus=, generators=, rules= (one
  // lhs->rhs per following line)
  static GroupSpec load_config(std::istream& in);
  static GroupSpec load_config_file(const std::string& path);
};

RewritingSystem compile_rules(const GroupSpec& spec);

struct CayleyBall {
  MetricGraph graph;  // unit edges, labels = normal-form words ("1" = identity)
  std::vector<std::string> words;  // words[0] == ""
  int radius = 0;
  GroupSpec spec;
  RewritingSystem system;

  std::optional<Vertex> find(const std::string& normal_form) const;
  // vertices whose word length stays at least `margin` away from the radius;
  // checkers restrict sample endpoints here so ball truncation cannot bend
  // geodesics
  VertexSet interior(int margin) const;

 private:
  friend CayleyBall build_ball(const GroupSpec&, int, int, int);
  std::map<std::string, Vertex> index_;
};

CayleyBall build_ball(const GroupSpec& spec, int radius, int max_radius = 8,
                      int vertex_cap = 200000);

struct CosetSpec {
  std::string subgroup;  // base letters, e.g. "a" or "ab"
  std::optional<std::string> representative;  // nullopt = all cosets in ball
};

PeripheralFamily peripheral_cosets(const CayleyBall& ball,
                                   const std::vector<CosetSpec>& specs,
                                   int min_size = 3);

}  // namespace relhyp
