#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace relhyp {

using Vertex = int;
using VertexSet = std::vector<Vertex>;  // kept sorted, no duplicates

constexpr double kTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GraphError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CheckError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sorted-set helpers. All VertexSet values flowing through the library are
// normalized through these so set algebra stays cheap and deterministic.
void normalize_set(VertexSet& s);
bool set_contains(const VertexSet& s, Vertex v);
VertexSet set_union(const VertexSet& a, const VertexSet& b);
VertexSet set_intersection(const VertexSet& a, const VertexSet& b);

// Vertex path with cumulative arclength. cum[0] == 0, cum.back() == length().
struct PathInSpace {
  std::vector<Vertex> vertices;
  std::vector<double> cum;
  bool geodesic = false;
  // Quasi-geodesic metadata when known: arc(i,j) <= L*d(i,j) + C.
  double qL = 1.0;
  double qC = 0.0;

  double length() const { return cum.empty() ? 0.0 : cum.back(); }
  size_t size() const { return vertices.size(); }
  bool empty() const { return vertices.empty(); }
  Vertex front() const { return vertices.front(); }
  Vertex back() const { return vertices.back(); }
};

}  // namespace relhyp
