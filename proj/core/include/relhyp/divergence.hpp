#pragma once

#include <cstdint>
#include <iosfwd>

#include "relhyp/metric_graph.hpp"
#include "relhyp/peripherals.hpp"

namespace relhyp {

// d(c, {a,b}) = r fixes the forbidden ball B(c, delta*r - gamma); div is the
// cheapest a-b route that stays outside it, kInf when none survives. The
// ball is open: sitting at distance exactly delta*r - gamma is allowed
// unless closed_ball flips the reading.
struct DivergenceParams {
  double delta = 0.5;
  double gamma = 0.0;
  bool closed_ball = false;
};

double div_point(const MetricGraph& g, Vertex a, Vertex b, Vertex c,
                 const DivergenceParams& params = {});

struct DivRecord {
  int n = 0;
  double sup = 0.0;  // kInf when every inspected triple disconnects
  Witness top;       // triple achieving the sup
  long infinite_count = 0;
  long samples = 0;
};

struct DivSampling {
  enum Kind { Exhaustive, Sampled };
  Kind kind = Exhaustive;
  long samples = 2000;
  std::uint64_t seed = 1;
};

struct DivergenceReport {
  DivergenceParams params;
  int n_max = 0;
  int margin = 0;
  long pool_size = 0;
  std::string mode;
  std::uint64_t seed = 0;
  // records[i] covers every inspected triple with d(a,b) <= records[i].n,
  // so sups and sample counts are cumulative and monotone by construction
  std::vector<DivRecord> records;
  std::string growth = "unclassified";
  std::vector<std::string> notes;
};

// Sup of div over triples drawn from the sub-ball around `base` that keeps
// a margin of n_max/3 to the boundary, bucketed by separation n = 2..n_max.
// Detours may still use the full graph; only the triples are pulled inward.
DivergenceReport div_function(const MetricGraph& g, Vertex base, int n_max,
                              const DivergenceParams& params = {},
                              const DivSampling& sampling = {});

struct GrowthFit {
  std::string tag;
  double linear_slope = 0.0;
  double linear_offset = 0.0;
  double linear_rms = 0.0;
  double exp_base = 1.0;
  double exp_scale = 0.0;
  double exp_rms = 0.0;
  std::string note;
};

// Least-squares linear vs exponential fit on the finite sups; the winner
// needs half the other's relative residual, otherwise convex superlinear
// data lands in the middle tag. Stamps report.growth.
GrowthFit classify_growth(DivergenceReport& report);

struct LogDetourParams {
  int max_radius = 0;  // 0: grow the forbidden ball until a,b disconnect
  int center_stride = 1;
};

// Forces detours around interior points of the axis and measures the least
// C with d(c, detour) <= C * log2(len(detour)) + C over all of them.
ConstantsReport check_log_detour(const MetricGraph& g, const PathInSpace& axis,
                                 const LogDetourParams& params = {});

void save_divergence_csv(std::ostream& out, const DivergenceReport& report);
void save_divergence_csv_file(const std::string& path,
                              const DivergenceReport& report);

}  // namespace relhyp
