#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "relhyp/metric_graph.hpp"

namespace relhyp {

// Line-oriented tagged records: '#' starts a comment, blank lines are
// skipped, the first token of a record is its tag. Failures carry the
// 1-based line number of the offending record.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next();  // advance to the next record; false at end of input
  int line() const { return line_; }
  const std::string& tag() const { return tag_; }
  const std::vector<std::string>& args() const { return args_; }

  long integer(size_t i) const;  // full-token parse of args()[i]
  double real(size_t i) const;
  [[noreturn]] void fail(const std::string& what) const;

 private:
  std::istream& in_;
  int line_ = 0;
  std::string tag_;
  std::vector<std::string> args_;
};

// Text graph format, one record per line: header `V <count>`, one
// `E <u> <v> <length>` per edge, optional `L <v> <label>` lines.
// Loaded graphs must be connected.
MetricGraph load_graph(std::istream& in);
MetricGraph load_graph_file(const std::string& path);
void save_graph(std::ostream& out, const MetricGraph& g);
void save_graph_file(const std::string& path, const MetricGraph& g);

// 17 significant digits: every double survives a save/load round trip.
std::string format_real(double v);

}  // namespace relhyp
