#include "relhyp/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace relhyp {

bool LineReader::next() {
  std::string raw;
  while (std::getline(in_, raw)) {
    ++line_;
    if (auto hash = raw.find('#'); hash != std::string::npos)
      raw.erase(hash);
    std::istringstream ss(raw);
    std::vector<std::string> toks;
    for (std::string t; ss >> t;) toks.push_back(std::move(t));
    if (toks.empty()) continue;
    tag_ = std::move(toks.front());
    args_.assign(std::make_move_iterator(toks.begin() + 1),
                 std::make_move_iterator(toks.end()));
    return true;
  }
  return false;
}

long LineReader::integer(size_t i) const {
  if (i >= args_.size()) fail("missing field");
  size_t used = 0;
  long v = 0;
  try {
    v = std::stol(args_[i], &used);
  } catch (const std::exception&) {
    fail("bad integer '" + args_[i] + "'");
  }
  if (used != args_[i].size()) fail("bad integer '" + args_[i] + "'");
  return v;
}

double LineReader::real(size_t i) const {
  if (i >= args_.size()) fail("missing field");
  size_t used = 0;
  double v = 0;
  try {
    v = std::stod(args_[i], &used);
  } catch (const std::exception&) {
    fail("bad number '" + args_[i] + "'");
  }
  if (used != args_[i].size()) fail("bad number '" + args_[i] + "'");
  return v;
}

void LineReader::fail(const std::string& what) const {
  throw FormatError("line " + std::to_string(line_) + ": " + what);
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

MetricGraph load_graph(std::istream& in) {
  LineReader r(in);
  MetricGraph g;
  bool have_header = false;
  while (r.next()) {
    if (r.tag() == "V") {
      if (have_header) r.fail("duplicate V header");
      if (r.args().size() != 1) r.fail("V wants exactly one count");
      long n = r.integer(0);
      if (n <= 0) r.fail("vertex count must be positive");
      g = MetricGraph(static_cast<int>(n));
      have_header = true;
    } else if (r.tag() == "E") {
      if (!have_header) r.fail("graph wants a V header first");
      if (r.args().size() != 3) r.fail("E wants <u> <v> <length>");
      long u = r.integer(0), v = r.integer(1);
      double len = r.real(2);
      for (long w : {u, v})
        if (w < 0 || w >= g.vertex_count())
          r.fail("vertex " + std::to_string(w) + " out of range");
      if (u == v) r.fail("loop edge at vertex " + std::to_string(u));
      if (len <= 0) r.fail("edge length must be positive");
      if (g.adjacent(static_cast<Vertex>(u), static_cast<Vertex>(v)))
        r.fail("duplicate edge (" + std::to_string(u) + ", " +
               std::to_string(v) + ")");
      g.add_edge(static_cast<Vertex>(u), static_cast<Vertex>(v), len);
    } else if (r.tag() == "L") {
      if (!have_header) r.fail("graph wants a V header first");
      if (r.args().size() != 2) r.fail("L wants <vertex> <label>");
      long v = r.integer(0);
      if (v < 0 || v >= g.vertex_count())
        r.fail("vertex " + std::to_string(v) + " out of range");
      g.set_label(static_cast<Vertex>(v), r.args()[1]);
    } else {
      r.fail("unknown tag '" + r.tag() + "'");
    }
  }
  if (!have_header) throw FormatError("empty graph input");
  g.require_connected();
  return g;
}

MetricGraph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open graph file: " + path);
  return load_graph(in);
}

void save_graph(std::ostream& out, const MetricGraph& g) {
  out << "V " << g.vertex_count() << "\n";
  for (const Edge& e : g.edges())
    out << "E " << e.u << " " << e.v << " " << format_real(e.length) << "\n";
  if (g.has_labels())
    for (Vertex v = 0; v < g.vertex_count(); ++v)
      if (!g.label(v).empty()) out << "L " << v << " " << g.label(v) << "\n";
}

void save_graph_file(const std::string& path, const MetricGraph& g) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open graph file: " + path);
  save_graph(out, g);
  out.flush();
  if (!out) throw ConfigError("failed writing graph file: " + path);
}

}  // namespace relhyp
