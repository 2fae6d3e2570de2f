#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "relhyp/bowditch.hpp"
#include "relhyp/peripherals.hpp"
#include "relhyp/transient.hpp"

namespace relhyp {

// A finite configuration: marked points plus whole peripheral members.
struct Configuration {
  VertexSet points;
  std::vector<int> peripheral_indices;

  int cardinality() const {
    return static_cast<int>(points.size() + peripheral_indices.size());
  }
  void validate(const MetricGraph& g, const PeripheralFamily& fam) const;
};

// Union of the configuration (points, and a net for each chosen member)
// with the transient parts of the canonical geodesics joining every pair
// of representatives.
VertexSet transient_hull(const MetricGraph& g, const PeripheralFamily& fam,
                         const Configuration& conf,
                         const TransientParams& params = {},
                         double net_k = 2.0);

struct TreeGradedSpace {
  struct Piece {
    VertexSet vertices;  // vertex ids of `graph`
    int member = -1;
  };

  MetricGraph graph;
  std::vector<Piece> pieces;

  // edge indices whose endpoints do not both lie in one piece
  std::vector<int> tree_part() const;
};

struct TreeApproxParams {
  TransientParams transient;
  double net_k = 2.0;
  double net_R = 2.0;  // edge scale of the member approximation graphs
  int n_max = 6;
  // four-point slack of the landmark metric before the build is flagged
  double tolerance = 2.0;
};

struct EmbeddingReport {
  VertexSet hull;
  std::vector<Vertex> image;  // image[i] carries hull[i]
  double C_mul = 1.0;
  double C_add = 0.0;
  Witness mul_witness;
  Witness add_witness;
  bool tree_realizable = true;
  double landmark_defect = 0.0;  // worst four-point defect over landmarks
  Witness defect_witness;        // the violating quadruple when over tolerance
  double realization_error = 0.0;  // worst |tree distance - landmark distance|
  long samples = 0;
  std::vector<std::string> notes;

  Vertex image_of(Vertex x) const;
};

// Collapse each chosen member to a marker, realize the resulting landmark
// metric as a tree by iterative Gromov-product insertion, then swap every
// marker for the member's approximation graph, attached where the incident
// branches point. The report measures distortion over all hull pairs.
std::pair<TreeGradedSpace, EmbeddingReport> build_tree_graded_approx(
    const MetricGraph& g, const PeripheralFamily& fam,
    const Configuration& conf, const TreeApproxParams& params = {});

struct TreeGradedVerdict {
  enum Kind { kPass, kT1, kT2 };
  Kind kind = kPass;
  int piece_a = -1;  // the offending pair for a T1 failure
  int piece_b = -1;
  // shared vertices (T1) or the offending cycle in traversal order (T2)
  std::vector<Vertex> vertices;
  std::string detail;

  bool pass() const { return kind == kPass; }
};

// (T1) distinct pieces meet in at most one vertex, checked over all pairs;
// (T2) every cycle-space basis cycle stays inside a single piece.
TreeGradedVerdict verify_tree_graded(const TreeGradedSpace& T);

// Graph records followed by one `PIECE <member> <v...>` line per piece.
TreeGradedSpace load_tree_graded(std::istream& in);
TreeGradedSpace load_tree_graded_file(const std::string& path);
void save_tree_graded(std::ostream& out, const TreeGradedSpace& T);
void save_tree_graded_file(const std::string& path, const TreeGradedSpace& T);

}  // namespace relhyp
