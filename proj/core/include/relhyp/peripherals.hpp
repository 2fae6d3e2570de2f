#pragma once

#include <iosfwd>
#include <map>
#include <memory>

#include "relhyp/metric_graph.hpp"

namespace relhyp {

// A finite family of candidate peripheral subsets of one graph.
struct PeripheralFamily {
  std::vector<VertexSet> members;
  // each member should look connected at this scale; validate() enforces it
  double coarse_connectivity_K = 2.0;

  bool empty() const { return members.empty(); }
  int size() const { return static_cast<int>(members.size()); }
  const VertexSet& operator[](int i) const { return members[i]; }
  void validate(const MetricGraph& g) const;
};

// Lazily cached per-member distance fields and projection maps. The audits
// hammer the same members over and over; one multi-source sweep per member
// is the right amount of caching at ball sizes in the tens of thousands.
class FamilyOracle {
 public:
  FamilyOracle(const MetricGraph& g, const DistanceOracle& oracle,
               const PeripheralFamily& fam)
      : g_(g), oracle_(oracle), fam_(fam), dist_(fam.members.size()),
        proj_(fam.members.size()) {}

  const MetricGraph& graph() const { return g_; }
  const DistanceOracle& oracle() const { return oracle_; }
  const PeripheralFamily& family() const { return fam_; }
  int size() const { return fam_.size(); }
  const VertexSet& member(int i) const { return fam_.members[i]; }

  // d(., P_i) for every vertex
  const std::vector<double>& member_distances(int i) const;
  // nearest member vertex, least id among nearest, for every vertex
  const std::vector<Vertex>& member_projections(int i) const;

 private:
  const MetricGraph& g_;
  const DistanceOracle& oracle_;
  const PeripheralFamily& fam_;
  mutable std::vector<std::unique_ptr<std::vector<double>>> dist_;
  mutable std::vector<std::unique_ptr<std::vector<Vertex>>> proj_;
};

// Closest point of the member to x; least vertex id breaks ties.
Vertex project(const MetricGraph& g, const DistanceOracle& oracle, Vertex x,
               const VertexSet& member);

struct Witness {
  std::vector<Vertex> points;
  std::vector<int> members;
  double value = 0.0;
  std::string detail;
};

// One audit's output: named constants with the samples that force them.
struct ConstantsReport {
  std::map<std::string, double> constants;
  std::map<std::string, Witness> witnesses;
  long samples = 0;
  std::vector<std::string> notes;
  bool violation = false;
  std::vector<Witness> violations;

  void record(const std::string& symbol, double value, Witness w);
  double at(const std::string& symbol) const;
  bool has(const std::string& symbol) const { return constants.count(symbol); }
};

// Bounded coset penetration: for neighborhoods at scale K, intersections of
// distinct members stay uniformly small. Reports B = max observed diameter;
// flags a violation when some pair's intersection stretches along a
// violation_fraction of the whole space.
struct Alpha1Params {
  double K = 1.0;
  double violation_fraction = 0.5;
  VertexSet pool;  // empty = all vertices
};
ConstantsReport check_alpha1(const MetricGraph& g, const PeripheralFamily& fam,
                             const Alpha1Params& params = {});

// Geodesics between points that lie deep in a member's cone pass near the
// member. Reports the least M that every sampled geodesic satisfies.
struct Alpha2Params {
  double epsilon = 0.25;  // must sit in (0, 1/2)
  int variant_count = 2;
  int budget = 400;  // admissible pairs across all members
  uint64_t seed = 1;
  VertexSet pool;
};
ConstantsReport check_alpha2(const MetricGraph& g, const PeripheralFamily& fam,
                             const Alpha2Params& params = {});

// The bundle of projection estimates: neighborhood retention t, projection
// landing R, separated-projection gate L, first-entry radius Rprime,
// cross-projection diameter C, and the detour gap K.
struct ProjectionAuditParams {
  double M = 2.0;             // cone scale reused from the alpha2 audit
  std::vector<double> L_grid{1, 2, 4};
  double mu = 4.0;            // first-entry neighborhood scale
  int variant_count = 2;
  int budget = 300;           // sampled pairs per lemma, all members together
  int cross_pair_cap = 60;    // exhaustive member pairs up to this count
  uint64_t seed = 1;
  VertexSet pool;
};
ConstantsReport audit_projection_lemmas(const MetricGraph& g,
                                        const PeripheralFamily& fam,
                                        const ProjectionAuditParams& params = {});

// P <index> <v1> <v2> ... lines, indices contiguous from 0
PeripheralFamily load_family(std::istream& in);
PeripheralFamily load_family_file(const std::string& path);
void save_family(std::ostream& out, const PeripheralFamily& fam);
void save_family_file(const std::string& path, const PeripheralFamily& fam);

}  // namespace relhyp
