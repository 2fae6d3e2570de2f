#pragma once

#include <iosfwd>
#include <optional>

#include "relhyp/peripherals.hpp"
#include "relhyp/transient.hpp"

namespace relhyp {

// Finite-depth combinatorial horoball over a connected base graph.
// Vertex (v, n) lives at id n*base_count + v, so level 0 keeps base ids.
struct Horoball {
  MetricGraph graph;
  int base_count = 0;
  int depth = 0;

  Vertex at(Vertex base_v, int level) const {
    return level * base_count + base_v;
  }
  int level_of(Vertex h) const { return h / base_count; }
  Vertex base_of(Vertex h) const { return h % base_count; }
};

// Vertical edges ((v,n),(v,n+1)) of length 1, horizontal edges
// ((v,n),(v',n)) of length e^{-n} * l((v,v')).
Horoball build_horoball(const MetricGraph& base, int depth);

// Maximal k-net of a peripheral, net points joined by an edge of length R
// exactly when their ambient distance is at most R. Must come out connected.
struct ApproximationGraph {
  VertexSet net;  // ambient vertex ids, ascending
  double k = 2.0;
  double R = 2.0;
  MetricGraph graph;  // on net positions 0..net.size()-1

  int index_of(Vertex x) const;  // position in net, -1 when absent
};

ApproximationGraph build_approximation_graph(const MetricGraph& g,
                                             const VertexSet& P, double k,
                                             double R);

struct BowVertex {
  enum Kind { kX, kHoro } kind = kX;
  Vertex x = -1;       // kX: ambient id (equals the Bowditch id)
  int member = -1;     // kHoro
  int net_index = -1;  // kHoro: position in that member's net
  int level = 0;       // kHoro: 1..depth
};

// Ambient graph with a horoball glued over each member's approximation
// graph. Ambient ids are preserved; horoball interiors are appended.
struct BowditchSpace {
  MetricGraph graph;
  int x_count = 0;
  std::vector<ApproximationGraph> nets;  // one per member
  std::vector<int> depths;               // one per member
  std::vector<int> offsets;              // first interior id per member
  std::vector<BowVertex> back;           // size graph.vertex_count()
  ConstantsReport coarse;                // sampled d_Bow vs d_X comparison

  bool in_x(Vertex b) const { return b < x_count; }
  // level 0 returns the glued ambient net vertex itself
  Vertex horo_vertex(int member, int net_index, int level) const;
};

struct BowditchParams {
  double k = 2.0;
  double R = 2.0;
  int depth = 0;  // <= 0: per member, ceil(log2(net diameter)) + 2
  int coarse_samples = 16;
  uint64_t seed = 1;
};

BowditchSpace build_bowditch(const MetricGraph& g, const PeripheralFamily& fam,
                             const BowditchParams& params = {});

// d_Bow <= d_X on sampled ambient pairs, plus the affine envelope
// g(t) = slope * t making d_X <= g(d_Bow); records "g_slope".
ConstantsReport coarse_equivalence(const BowditchSpace& bow,
                                   const MetricGraph& g, int sources,
                                   uint64_t seed);

// Four-point hyperbolicity estimate of the glued space; records "delta".
ConstantsReport check_rh1(const BowditchSpace& bow, const FourPointMode& mode);
// Auto protocol: exhaustive up to 60 vertices, otherwise pool-exhaustive on
// a 60-vertex net plus seeded quadruples, reporting the max of the two.
ConstantsReport check_rh1(const BowditchSpace& bow, uint64_t seed = 1);

// Hausdorff distance in the ambient metric between the ambient trace of the
// canonical Bowditch geodesic x -> y and trans_{mu,R} of the canonical
// ambient geodesic.
double trace_vs_transient(const BowditchSpace& bow, const MetricGraph& g,
                          const PeripheralFamily& fam, Vertex x, Vertex y,
                          double mu, double R);

struct DeverticalResult {
  PathInSpace path;  // ambient path joining the same endpoints
  double K = 1.0;    // least integer with arc(i,j) <= K * d(i,j) + K
};

// Replace every excursion of a Bowditch geodesic outside the ambient graph
// (horoball dips and glued net hops alike) by canonical ambient geodesics.
DeverticalResult devertical(const BowditchSpace& bow, const MetricGraph& g,
                            const PathInSpace& bow_geodesic);

// Standard graph format followed by one BACKMAP line per vertex:
// `BACKMAP <id> <ambient-id>` or `BACKMAP <id> H:<member>:<level>`.
void save_bowditch(std::ostream& out, const BowditchSpace& bow);
void save_bowditch_file(const std::string& path, const BowditchSpace& bow);

}  // namespace relhyp
