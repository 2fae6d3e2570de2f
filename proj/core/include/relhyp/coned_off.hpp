#pragma once

#include <iosfwd>
#include <map>

#include "relhyp/peripherals.hpp"

namespace relhyp {

// One cone shortcut joining two net points of a member. In the coned graph
// it costs 1; x_length remembers the ambient distance between its feet,
// which is the length the BCP clauses measure.
struct ComponentEdge {
  int member = -1;
  Vertex x = -1;
  Vertex y = -1;  // x < y
  double x_length = 0.0;
};

// The ambient graph plus a length-1 edge for every unordered pair of
// distinct net points of each member. Components live in their own list so
// the coned metric and the ambient lengths stay separately queryable; where
// a component parallels an ambient edge the combined graph keeps the
// shorter length, which leaves the metric intact.
struct ConedOffSpace {
  MetricGraph ambient;
  MetricGraph graph;  // coned metric
  std::vector<VertexSet> nets;
  std::vector<ComponentEdge> components;
  double k = 1.0;

  // Index of the component joining x and y for this member, -1 when none.
  int component_between(int member, Vertex x, Vertex y) const;
  // Least member owning a component between x and y, -1 when none.
  int any_component_between(Vertex x, Vertex y) const;

 private:
  friend ConedOffSpace build_coned_off(const MetricGraph&,
                                       const PeripheralFamily&, double);
  std::map<std::pair<Vertex, Vertex>, std::vector<int>> lookup_;
};

// Nets are greedy maximal k-nets of the members; k = 1 keeps every member
// vertex on unit-edge graphs.
ConedOffSpace build_coned_off(const MetricGraph& g, const PeripheralFamily& fam,
                              double k = 1.0);

// A concatenation of paths in the ambient graph and cone shortcuts.
// Consecutive pieces share their endpoint vertex; component pieces store
// their two feet in traversal order.
struct StandardPath {
  struct Piece {
    bool component = false;
    std::vector<Vertex> vertices;
    int member = -1;  // component pieces only
  };
  std::vector<Piece> pieces;
  // quasi-geodesic metadata in the coned metric when known
  double qL = 1.0;
  double qC = 0.0;

  bool empty() const { return pieces.empty(); }
  Vertex front() const { return pieces.front().vertices.front(); }
  Vertex back() const { return pieces.back().vertices.back(); }
};

// Rewrites a vertex path of the coned graph in standard form: maximal runs
// over ambient edges become segments, steps that only a component explains
// become component pieces (least member on ties; an ambient edge of length
// at most 1 wins over a parallel component).
StandardPath standardize(const ConedOffSpace& coned,
                         const std::vector<Vertex>& path);

// "" when sp is structurally valid, otherwise the complaint that
// analyze_standard_path would raise.
std::string validate_standard_path(const ConedOffSpace& coned,
                                   const StandardPath& sp);

// Two components are tied when they belong to the same member; a component
// is isolated when tied to no other one on the path, and the path is
// without backtracking when every component is isolated. Throws
// CheckError("malformed-standard-path ...") on broken concatenations.
struct PathAnalysis {
  std::vector<int> components;  // piece indices
  std::vector<std::pair<int, int>> tied;
  std::vector<int> isolated;
  bool without_backtracking = true;
  double coned_length = 0.0;  // components count 1, segments their X-length
};
PathAnalysis analyze_standard_path(const ConedOffSpace& coned,
                                   const StandardPath& sp);

// Bounded coset penetration for standard paths without backtracking whose
// corresponding endpoints sit within ambient distance 1. Clause (1): a
// component of ambient length at least K on one path forces a tied one on
// the other. Clause (2): feet of tied components across the pair stay
// within K. Pairs are bucketed by their measured quasi-geodesic level into
// the grid; pairs beyond the top level are skipped. An unmatched component
// of ambient length at least violation_length on a pair of coned geodesics
// is reported as a violation: no bounded K can ever satisfy clause (1) for
// routes that cheap.
struct BCPParams {
  std::vector<double> grid{2, 4};
  double violation_length = 4.0;
};

struct BCPPairOutcome {
  int pair = -1;
  bool admitted = false;
  double L = 1.0;  // measured: least L with arc <= L*d + L in the coned metric
  double k1 = 0.0;
  double k2 = 0.0;
  std::string note;  // failed precondition, or the binding clause
};

struct BCPLevel {
  double L = 0.0;
  long pairs = 0;
  double K = 0.0;
  Witness binding;
};

struct BCPReport {
  double K = 0.0;  // top-of-grid constant
  std::vector<BCPLevel> levels;
  std::vector<BCPPairOutcome> outcomes;
  long admitted = 0;
  long skipped = 0;
  bool violation = false;
  std::vector<Witness> violations;
};

BCPReport check_bcp(
    const ConedOffSpace& coned,
    const std::vector<std::pair<StandardPath, StandardPath>>& pairs,
    const BCPParams& params = {});

// Hyperbolicity of the coned graph plus a BCP sweep over generated
// candidate pairs: canonical coned geodesics between sampled endpoint
// pairs, the same geodesics re-run from endpoints shifted by one ambient
// edge, and member detours (geodesic to the nearest net point, one
// component, geodesic onward). Records delta, per-level K_L constants and
// the headline K.
struct Rh2Params {
  std::vector<double> grid{2, 4};
  double violation_length = 4.0;
  VertexSet pool;            // endpoint candidates; empty = all vertices
  double min_separation = 4.0;  // least ambient distance between endpoints
  int budget = 40;           // endpoint pairs
  int shifts = 4;            // shifted partners per pair
  int detours = 2;           // member detour partners per pair
  uint64_t seed = 1;
};
ConstantsReport check_rh2(const ConedOffSpace& coned,
                          const Rh2Params& params = {});

struct FilledPath {
  PathInSpace path;  // ambient path joining the same endpoints
  double K = 1.0;    // least integer with arc(i,j) <= K * d(i,j) + K
};

// Replace every component of a coned-graph path by the canonical ambient
// geodesic between its feet.
FilledPath fill_components(const ConedOffSpace& coned,
                           const PathInSpace& coned_geodesic);

// SEG <v...> / CMP <member> <x> <y> records in traversal order.
StandardPath load_standard_path(std::istream& in);
StandardPath load_standard_path_file(const std::string& path);
void save_standard_path(std::ostream& out, const StandardPath& sp);
void save_standard_path_file(const std::string& path, const StandardPath& sp);

}  // namespace relhyp
