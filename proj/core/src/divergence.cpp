#include "relhyp/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace relhyp {

namespace {

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

void require_params(const DivergenceParams& params) {
  if (params.delta <= 0.0 || params.delta >= 1.0)
    throw ConfigError("divergence delta must lie in (0, 1)");
  if (params.gamma < 0.0)
    throw ConfigError("divergence gamma must be nonnegative");
}

void require_vertex(const MetricGraph& g, Vertex v) {
  if (v < 0 || v >= g.vertex_count())
    throw ConfigError("divergence vertex " + std::to_string(v) +
                      " out of range");
}

VertexSet forbidden_ball(const std::vector<double>& from_center, double rho,
                         bool closed) {
  VertexSet out;
  if (rho <= (closed ? -kTol : kTol)) return out;
  for (Vertex v = 0; v < static_cast<Vertex>(from_center.size()); ++v) {
    bool inside = closed ? from_center[v] <= rho + kTol
                         : from_center[v] < rho - kTol;
    if (inside) out.push_back(v);
  }
  return out;
}

}  // namespace

double div_point(const MetricGraph& g, Vertex a, Vertex b, Vertex c,
                 const DivergenceParams& params) {
  require_params(params);
  require_vertex(g, a);
  require_vertex(g, b);
  require_vertex(g, c);
  auto from_c = single_source_distances(g, c);
  double r = std::min(from_c[a], from_c[b]);
  if (r <= 0.0) throw ConfigError("divergence center touches an endpoint");
  double rho = params.delta * r - params.gamma;
  VertexSet forbidden = forbidden_ball(from_c, rho, params.closed_ball);
  if (std::binary_search(forbidden.begin(), forbidden.end(), a) ||
      std::binary_search(forbidden.begin(), forbidden.end(), b))
    throw ConfigError("divergence endpoint falls inside the forbidden ball");
  if (forbidden.empty()) return single_source_distances(g, a)[b];
  return distances_avoiding(g, a, forbidden)[b];
}

namespace {

struct Bucket {
  double sup = -1.0;  // finite sup only; < 0 means none seen
  Witness top;
  Witness first_infinite;
  long infinite_count = 0;
  long samples = 0;
};

void feed(std::vector<Bucket>& buckets, int n_max, double separation,
          Vertex a, Vertex b, Vertex c, double value) {
  int n = std::max(2, static_cast<int>(std::ceil(separation - kTol)));
  if (n > n_max) return;
  Bucket& bucket = buckets[n - 2];
  ++bucket.samples;
  Witness w;
  w.points = {a, b, c};
  w.value = value;
  if (value >= kInf) {
    if (bucket.infinite_count == 0) {
      w.detail = "removing the ball around " + std::to_string(c) +
                 " disconnects " + std::to_string(a) + " from " +
                 std::to_string(b);
      bucket.first_infinite = w;
    }
    ++bucket.infinite_count;
    return;
  }
  if (value > bucket.sup) {
    w.detail = "detour of length " + num(value) + " at separation " +
               num(separation);
    bucket.sup = value;
    bucket.top = w;
  }
}

}  // namespace

DivergenceReport div_function(const MetricGraph& g, Vertex base, int n_max,
                              const DivergenceParams& params,
                              const DivSampling& sampling) {
  require_params(params);
  require_vertex(g, base);
  if (n_max < 2) throw ConfigError("divergence horizon must be at least 2");

  DivergenceReport report;
  report.params = params;
  report.n_max = n_max;
  report.mode = sampling.kind == DivSampling::Exhaustive ? "exhaustive"
                                                         : "sampled";
  report.seed = sampling.kind == DivSampling::Sampled ? sampling.seed : 0;

  auto from_base = single_source_distances(g, base);
  double radius = 0.0;
  for (double d : from_base)
    if (d < kInf) radius = std::max(radius, d);
  report.margin = (n_max + 2) / 3;
  VertexSet pool;
  for (Vertex v = 0; v < g.vertex_count(); ++v)
    if (from_base[v] <= radius - report.margin + kTol) pool.push_back(v);
  report.pool_size = static_cast<long>(pool.size());

  std::vector<Bucket> buckets(n_max - 1);
  DistanceOracle oracle(g);

  if (sampling.kind == DivSampling::Exhaustive) {
    for (Vertex c : pool) {
      auto from_c = single_source_distances(g, c);
      for (Vertex a : pool) {
        if (a == c) continue;
        double r = from_c[a];
        if (r <= 0.0) continue;
        double rho = params.delta * r - params.gamma;
        VertexSet forbidden = forbidden_ball(from_c, rho, params.closed_ball);
        auto from_a = forbidden.empty()
                          ? single_source_distances(g, a)
                          : distances_avoiding(g, a, forbidden);
        // this sweep settles every pair whose min-side is a; ties go to the
        // smaller endpoint so each triple lands exactly once
        for (Vertex b : pool) {
          if (b == c || b == a) continue;
          double rb = from_c[b];
          if (rb < r - kTol || (std::abs(rb - r) <= kTol && b < a)) continue;
          double separation = oracle.dist(a, b);
          if (separation > n_max + kTol) continue;
          feed(buckets, n_max, separation, a, b, c, from_a[b]);
        }
      }
    }
  } else {
    std::mt19937_64 rng(mix_seed(sampling.seed, 0xd19e57aaULL));
    if (pool.size() >= 3) {
      std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
      long drawn = 0;
      long attempts = sampling.samples * 20;
      while (drawn < sampling.samples && attempts-- > 0) {
        Vertex a = pool[pick(rng)];
        Vertex b = pool[pick(rng)];
        Vertex c = pool[pick(rng)];
        if (a == b || a == c || b == c) continue;
        if (b < a) std::swap(a, b);
        double separation = oracle.dist(a, b);
        if (separation > n_max + kTol) continue;
        feed(buckets, n_max, separation, a, b, c,
             div_point(g, a, b, c, params));
        ++drawn;
      }
    }
  }

  // roll the buckets up so records[i] really is a sup over d(a,b) <= n
  double sup = -1.0;
  Witness top;
  Witness first_infinite;
  long infinite = 0;
  long samples = 0;
  for (int n = 2; n <= n_max; ++n) {
    Bucket& bucket = buckets[n - 2];
    if (bucket.sup > sup) {
      sup = bucket.sup;
      top = bucket.top;
    }
    if (infinite == 0 && bucket.infinite_count > 0)
      first_infinite = bucket.first_infinite;
    infinite += bucket.infinite_count;
    samples += bucket.samples;
    DivRecord record;
    record.n = n;
    record.infinite_count = infinite;
    record.samples = samples;
    if (sup >= 0.0) {
      record.sup = sup;
      record.top = top;
    } else if (infinite > 0) {
      record.sup = kInf;
      record.top = first_infinite;
    }
    report.records.push_back(std::move(record));
  }
  report.notes.push_back("pool " + std::to_string(report.pool_size) +
                         " of " + std::to_string(g.vertex_count()) +
                         " vertices, margin " + std::to_string(report.margin));
  return report;
}

GrowthFit classify_growth(DivergenceReport& report) {
  std::vector<std::pair<double, double>> pts;
  for (const DivRecord& r : report.records)
    if (r.sup > 0.0 && r.sup < kInf) pts.push_back({double(r.n), r.sup});
  if (pts.size() < 4)
    throw ConfigError("growth fit needs at least 4 finite points");

  auto affine = [&pts](bool log_y, double& slope, double& offset) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : pts) {
      double yy = log_y ? std::log(y) : y;
      sx += x;
      sy += yy;
      sxx += x * x;
      sxy += x * yy;
    }
    double n = double(pts.size());
    double det = n * sxx - sx * sx;
    slope = (n * sxy - sx * sy) / det;
    offset = (sy * sxx - sx * sxy) / det;
  };
  GrowthFit fit;
  affine(false, fit.linear_slope, fit.linear_offset);
  double p, q;
  affine(true, p, q);
  fit.exp_base = std::exp(p);
  fit.exp_scale = std::exp(q);
  double lin2 = 0, exp2 = 0, mean = 0;
  for (auto [x, y] : pts) {
    double lv = fit.linear_slope * x + fit.linear_offset;
    double ev = fit.exp_scale * std::pow(fit.exp_base, x);
    lin2 += (y - lv) * (y - lv);
    exp2 += (y - ev) * (y - ev);
    mean += y;
  }
  mean = std::max(mean / double(pts.size()), 1.0);
  fit.linear_rms = std::sqrt(lin2 / double(pts.size())) / mean;
  fit.exp_rms = std::sqrt(exp2 / double(pts.size())) / mean;
  fit.note = "linear rms " + num(fit.linear_rms) + " vs exponential rms " +
             num(fit.exp_rms);

  // consecutive slopes; genuinely accelerating data is convex
  std::vector<double> slopes;
  for (size_t i = 1; i < pts.size(); ++i)
    slopes.push_back((pts[i].second - pts[i - 1].second) /
                     (pts[i].first - pts[i - 1].first));
  bool convex = slopes.back() >= 1.25 * std::max(slopes.front(), 0.01);
  for (size_t i = 1; convex && i < slopes.size(); ++i)
    if (slopes[i] < slopes[i - 1] - kTol) convex = false;

  if (fit.exp_rms <= fit.linear_rms / 2.0 && fit.exp_base > 1.05)
    fit.tag = "exponential-compatible";
  else if (convex)
    fit.tag = "superlinear-subexponential";
  else if (fit.linear_rms <= fit.exp_rms / 2.0)
    fit.tag = "linear";
  else
    fit.tag = "inconclusive";
  report.growth = fit.tag;
  return fit;
}

ConstantsReport check_log_detour(const MetricGraph& g, const PathInSpace& axis,
                                 const LogDetourParams& params) {
  if (axis.size() < 3)
    throw ConfigError("log-detour axis needs at least 3 vertices");
  for (Vertex v : axis.vertices) require_vertex(g, v);
  int stride = std::max(1, params.center_stride);

  ConstantsReport report;
  Vertex a = axis.front(), b = axis.back();
  double best = 0.0;
  Witness binding;
  long detours = 0, disconnected = 0;
  for (size_t i = 1; i + 1 < axis.vertices.size(); i += stride) {
    Vertex c = axis.vertices[i];
    auto from_c = single_source_distances(g, c);
    double cap = std::min(from_c[a], from_c[b]);
    int top = params.max_radius > 0
                  ? params.max_radius
                  : static_cast<int>(std::ceil(cap)) - 1;
    for (int rho = 1; rho <= top; ++rho) {
      VertexSet forbidden = forbidden_ball(from_c, double(rho), false);
      if (std::binary_search(forbidden.begin(), forbidden.end(), a) ||
          std::binary_search(forbidden.begin(), forbidden.end(), b))
        break;
      auto detour = shortest_path(g, a, b, forbidden);
      if (!detour) {
        ++disconnected;
        break;  // a larger ball cannot reconnect them
      }
      ++detours;
      double clearance = kInf;
      for (Vertex v : detour->vertices)
        clearance = std::min(clearance, from_c[v]);
      double len = std::max(detour->length(), 1.0);
      double c_here = clearance / (std::log2(len) + 1.0);
      if (c_here > best) {
        best = c_here;
        binding.points = {a, b, c};
        binding.value = best;
        binding.detail = "detour of length " + num(detour->length()) +
                         " keeps clearance " + num(clearance) +
                         " around vertex " + std::to_string(c);
      }
    }
  }
  report.record("C_log", best, binding);
  report.samples = detours;
  report.notes.push_back(std::to_string(detours) + " detours, " +
                         std::to_string(disconnected) +
                         " disconnecting centers");
  return report;
}

void save_divergence_csv(std::ostream& out, const DivergenceReport& report) {
  out << "n,div_sup,infinite_count,samples\n";
  for (const DivRecord& r : report.records) {
    out << r.n << ',';
    if (r.sup >= kInf)
      out << "inf";
    else
      out << num(r.sup);
    out << ',' << r.infinite_count << ',' << r.samples << '\n';
  }
}

void save_divergence_csv_file(const std::string& path,
                              const DivergenceReport& report) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open divergence csv file: " + path);
  save_divergence_csv(out, report);
  if (!out.good())
    throw ConfigError("failed writing divergence csv file: " + path);
}

}  // namespace relhyp
