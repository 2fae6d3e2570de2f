#pragma once

#include <random>

#include "relhyp/metric_graph.hpp"

// Small graph builders shared across suites.

inline relhyp::MetricGraph line_graph(int n) {
  relhyp::MetricGraph g(n);
  for (int i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1, 1.0);
  return g;
}

inline relhyp::MetricGraph grid_graph(int w, int h) {
  relhyp::MetricGraph g(w * h);
  auto id = [w](int x, int y) { return y * w + x; };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (x + 1 < w) g.add_edge(id(x, y), id(x + 1, y), 1.0);
      if (y + 1 < h) g.add_edge(id(x, y), id(x, y + 1), 1.0);
    }
  return g;
}

inline relhyp::MetricGraph cycle_graph(int n) {
  relhyp::MetricGraph g(n);
  for (int i = 0; i < n; ++i) g.add_edge(i, (i + 1) % n, 1.0);
  return g;
}

// Random tree on n vertices: each vertex attaches to a random earlier one.
inline relhyp::MetricGraph random_tree(int n, std::mt19937_64& rng,
                                       bool unit_lengths = true) {
  relhyp::MetricGraph g(n);
  for (int v = 1; v < n; ++v) {
    std::uniform_int_distribution<int> parent(0, v - 1);
    double len = 1.0;
    if (!unit_lengths) {
      std::uniform_real_distribution<double> u(0.5, 2.5);
      len = u(rng);
    }
    g.add_edge(parent(rng), v, len);
  }
  return g;
}

// Random connected graph: tree skeleton plus extra chords.
inline relhyp::MetricGraph random_connected(int n, int extra_edges,
                                            std::mt19937_64& rng,
                                            bool unit_lengths = true) {
  relhyp::MetricGraph g(n);
  for (int v = 1; v < n; ++v) {
    std::uniform_int_distribution<int> parent(0, v - 1);
    double len = 1.0;
    if (!unit_lengths) {
      std::uniform_real_distribution<double> u(0.5, 2.5);
      len = u(rng);
    }
    g.add_edge(parent(rng), v, len);
  }
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int i = 0; i < extra_edges; ++i) {
    int u = pick(rng), v = pick(rng);
    if (u == v || g.adjacent(u, v)) continue;
    double len = 1.0;
    if (!unit_lengths) {
      std::uniform_real_distribution<double> d(0.5, 2.5);
      len = d(rng);
    }
    g.add_edge(u, v, len);
  }
  return g;
}
