#pragma once

#include <array>

#include "relhyp/peripherals.hpp"

namespace relhyp {

// Splits a path into transient vertices and deep excursions into peripheral
// neighborhoods. A vertex is deep for P when some earlier and some later
// path vertex both sit in N_mu(P) farther than c away from it.
struct TransientParams {
  double mu = 2.0;
  double c = 8.0;
  // measure witness separation along the path instead of through the graph
  // (only differs from the default on non-geodesic paths)
  bool arclength = false;
};

struct DeepComponent {
  int member = -1;
  int start = 0;  // inclusive index range into path.vertices
  int end = 0;
};

struct TransientDecomposition {
  PathInSpace path;
  std::vector<int> transient;  // ascending indices into path.vertices
  std::vector<DeepComponent> deep_components;

  VertexSet transient_vertices() const;
  bool is_transient(int index) const;
};

TransientDecomposition decompose(const FamilyOracle& fam,
                                 const PathInSpace& path,
                                 const TransientParams& params = {});
// Convenience overload that builds throwaway oracles; prefer the one above
// inside loops.
TransientDecomposition decompose(const MetricGraph& g,
                                 const PeripheralFamily& fam,
                                 const PathInSpace& path,
                                 const TransientParams& params = {});

struct TriangleSample {
  std::array<Vertex, 3> corners{};
  std::array<PathInSpace, 3> sides{};  // sides[i] runs corners[i] -> corners[(i+1)%3]
};
TriangleSample make_triangle(const MetricGraph& g, Vertex a, Vertex b, Vertex c);

// Relative thin-triangle audit: each side's transient set must lie near the
// union of the other two sides' transient sets. Reports the largest directed
// defect D over sampled triangles. With an empty family this degenerates to
// the classical thinness defect of full sides.
struct RelRipsParams {
  double mu = 2.0;
  double R = 8.0;
  VertexSet pool;         // triangle corners; empty = all vertices
  int corner_cap = 40;    // exhaustive corner triples up to this pool size
  int budget = 200;       // sampled triangles otherwise
  int variant_count = 1;  // extra rounds with midpoint-forced sides
  uint64_t seed = 1;
};
ConstantsReport check_relative_rips(const MetricGraph& g,
                                    const PeripheralFamily& fam,
                                    const RelRipsParams& params = {});

// Long geodesics between two points near one member keep their transient
// vertices close to the endpoints, and at least one transient vertex enters
// N_mu(P). Reports the smallest K making both clauses hold for every
// sampled pair at distance >= K; throws CheckError("no-admissible-pairs...")
// when the pool holds no two vertices within k of a common member.
struct Rh3Cond2Params {
  double mu = 2.0;
  double R = 8.0;
  double k = 2.0;  // how far endpoints may sit from the member
  VertexSet pool;
  int budget = 200;
  int variant_count = 2;
  uint64_t seed = 1;
};
ConstantsReport check_rh3_cond2(const MetricGraph& g,
                                const PeripheralFamily& fam,
                                const Rh3Cond2Params& params = {});

// Almost-thin triangle shapes: either a sigma-ball around one vertex meets
// all three sides, or one peripheral neighborhood does and consecutive
// exit/entrance points are delta-close.
struct AtgClass {
  enum Kind { kCentre, kPeripheral, kNeither } kind = kNeither;
  Vertex centre = -1;  // kCentre only
  int member = -1;     // kPeripheral only
  std::array<Vertex, 3> entries{-1, -1, -1};
  std::array<Vertex, 3> exits{-1, -1, -1};
  std::array<double, 3> gaps{0.0, 0.0, 0.0};
};
AtgClass classify_triangle_atg(const MetricGraph& g,
                               const PeripheralFamily& fam,
                               const TriangleSample& tri, double sigma,
                               double delta);

// Smallest (sigma, delta) classifying every sampled triangle: per triangle
// the cheaper of a central ball at (sigma_C, 0) and the best peripheral
// option at (sigma_P, delta_P), maximized over triangles.
struct AtgAuditParams {
  VertexSet pool;
  int corner_cap = 16;
  int budget = 120;
  int variant_count = 1;
  uint64_t seed = 1;
};
ConstantsReport atg_audit(const MetricGraph& g, const PeripheralFamily& fam,
                          const AtgAuditParams& params = {});

// Paths sharing endpoints should share transient sets up to bounded
// Hausdorff distance M. Also validates that deep components stay inside
// N_{t*mu}(P) (reporting the stretch t) and that the entrance point of any
// serious peripheral visit (diameter >= 2R inside N_mu(P)) is transient.
struct StabilityParams {
  double mu = 2.0;
  double R = 8.0;
  bool arclength = false;
};
ConstantsReport check_transient_stability(
    const MetricGraph& g, const PeripheralFamily& fam,
    const std::vector<std::pair<PathInSpace, PathInSpace>>& pairs,
    const StabilityParams& params = {});

// --- guessed geodesics -----------------------------------------------------

// One guessed geodesic eta with its guessed transient subset.
struct GGPair {
  PathInSpace eta;
  std::vector<int> trans;  // ascending indices into eta.vertices

  VertexSet trans_vertices() const;
};

// Supplies (eta, trans) per endpoint pair. Complete providers accept any
// vertex pair; file-backed ones only what was stored.
class GGProvider {
 public:
  virtual ~GGProvider() = default;
  virtual bool has(Vertex x, Vertex y) const = 0;
  // throws CheckError when the pair is unavailable
  virtual GGPair pair(Vertex x, Vertex y) const = 0;
  virtual bool complete() const = 0;
};

// In-memory pair store, symmetric lookup: asking for (y, x) reverses the
// stored path and remaps trans indices.
struct GGFamily {
  std::map<std::pair<Vertex, Vertex>, GGPair> pairs;

  void insert(Vertex x, Vertex y, GGPair p);
  bool has(Vertex x, Vertex y) const;
  GGPair pair(Vertex x, Vertex y) const;
};

class FileGGProvider : public GGProvider {
 public:
  explicit FileGGProvider(const GGFamily& fam) : fam_(fam) {}
  bool has(Vertex x, Vertex y) const override { return fam_.has(x, y); }
  GGPair pair(Vertex x, Vertex y) const override;
  bool complete() const override { return false; }

 private:
  const GGFamily& fam_;
};

// The honest family: canonical geodesics with their measured transient sets.
class TransientGGProvider : public GGProvider {
 public:
  TransientGGProvider(const FamilyOracle& fam, TransientParams params)
      : fam_(fam), params_(params) {}
  bool has(Vertex x, Vertex y) const override;
  GGPair pair(Vertex x, Vertex y) const override;
  bool complete() const override { return true; }

 private:
  const FamilyOracle& fam_;
  TransientParams params_;
};

// A deliberately broken family: from the higher-numbered endpoint every path
// first burrows toward a fixed hub for min(d(x,y), d(·,hub)) before heading
// to the other endpoint, so short sides stop burrowing early and triangles
// of unequal side lengths pull guessed transient sets far apart.
class HubDetourProvider : public GGProvider {
 public:
  HubDetourProvider(const MetricGraph& g, const DistanceOracle& oracle);
  bool has(Vertex x, Vertex y) const override;
  GGPair pair(Vertex x, Vertex y) const override;
  bool complete() const override { return true; }
  Vertex hub() const { return hub_; }

 private:
  const MetricGraph& g_;
  const DistanceOracle& oracle_;
  Vertex hub_ = 0;
};

// Smallest constants for the six geodesic-guessing conditions:
//   D1 diameter of trans over pairs at distance <= 2,
//   D2 Hausdorff stability of trans under passing to subpaths,
//   D3 thinness of trans over triples,
//   D4 arc length of trans-free stretches not covered by one member,
//   B5 bounded overlap of distinct members (alpha1 at alpha1_K),
//   K6/D6 endpoint pinning and member depth for pairs near one member.
// The report notes a verdict: plausible iff every constant stays <= cap and
// no violation fired. Missing pool pairs raise CheckError.
struct GGAuditParams {
  VertexSet pool;
  double alpha1_K = 1.0;
  std::vector<double> k_grid{1, 2, 4};
  double cap = 16.0;
  int budget = 200;    // sampled pool pairs per condition
  int subpairs = 4;    // sampled subpairs per eta for condition (2)
  int triple_cap = 20; // exhaustive triples for condition (3) up to this size
  uint64_t seed = 1;
};
ConstantsReport gg_condition_audit(const MetricGraph& g,
                                   const PeripheralFamily& fam,
                                   const GGProvider& provider,
                                   const GGAuditParams& params = {});

// Sup Hausdorff distance between guessed transient sets and measured
// transient sets of supplied paths with the same endpoints.
struct GGCompareParams {
  double mu = 2.0;
  double c = 8.0;
  bool arclength = false;
};
ConstantsReport gg_compare(const MetricGraph& g, const PeripheralFamily& fam,
                           const GGProvider& provider,
                           const std::vector<PathInSpace>& betas,
                           const GGCompareParams& params = {});

// PAIR <x> <y> / ETA <v...> / TRANS <i...> triples; trans indices point into
// the ETA line. Consecutive eta vertices must be adjacent in g.
GGFamily load_gg_family(std::istream& in, const MetricGraph& g);
GGFamily load_gg_family_file(const std::string& path, const MetricGraph& g);
void save_gg_family(std::ostream& out, const GGFamily& fam);
void save_gg_family_file(const std::string& path, const GGFamily& fam);

}  // namespace relhyp
