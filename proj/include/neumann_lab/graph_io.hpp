#pragma once

// Line-oriented graph text format:
//
//   # comment
//   V <id> <m> <c>
//   E <id1> <id2> <b>
//
// All V lines precede all E lines.

#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "graph.hpp"

namespace nlab {

inline WeightedGraph parse_graph(std::istream& in, const std::string& name = "file") {
  FiniteGraph::Builder builder(name);
  std::string line;
  int line_no = 0;
  bool seen_edge = false;
  auto fail = [&](const std::string& msg) {
    throw ParseError("line " + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    std::string extra;
    if (tag == "V") {
      if (seen_edge) fail("vertex declared after edges");
      VertexId id;
      double m, c;
      if (!(ls >> id >> m >> c)) fail("expected 'V <id> <m> <c>'");
      if (ls >> extra) fail("trailing tokens");
      if (!(m > 0.0)) fail("nonpositive measure");
      if (c < 0.0) fail("negative killing term");
      try {
        builder.add_vertex(id, m, c);
      } catch (const ConstructionError& e) {
        fail(e.what());
      }
    } else if (tag == "E") {
      seen_edge = true;
      VertexId a, b;
      double w;
      if (!(ls >> a >> b >> w)) fail("expected 'E <id1> <id2> <b>'");
      if (ls >> extra) fail("trailing tokens");
      if (w < 0.0) fail("negative edge weight");
      try {
        builder.add_edge(a, b, w);
      } catch (const ConstructionError& e) {
        fail(e.what());
      }
    } else {
      fail("unknown record '" + tag + "'");
    }
  }
  return builder.build();
}

inline WeightedGraph read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open graph file " + path);
  return parse_graph(in, "file:" + path);
}

inline void write_graph(std::ostream& out, const FiniteGraph& g) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (VertexId x : g.vertices()) out << "V " << x << ' ' << g.measure(x) << ' ' << g.killing(x) << '\n';
  for (const auto& e : g.edges()) out << "E " << e.a << ' ' << e.b << ' ' << e.weight << '\n';
}

}  // namespace nlab
