#pragma once

#include <sstream>
#include <string>

#include "evea/graph.hpp"

namespace evea {

// Ten-user promotion scenario (nodes A..J mapped to ids 0..9). Directed so
// cheap seeds cover most of the network quickly while two nodes (B, G)
// stay out of their reach. Designed degrees: A=2, B=3, D=2, E=2, so with
// degree costs {A,B} costs 5 and covers everything in 4 steps along
// B->C->H->I->J, while {D,E} costs 4 and covers all but B and G in 2 steps.
inline const char* figure1_edge_list() {
  return "# ten-node promotion fixture (directed)\n"
         "# node labels: A=0 B=1 C=2 D=3 E=4 F=5 G=6 H=7 I=8 J=9\n"
         "# designed properties (constant p=1, unit delays, degree costs):\n"
         "#   seeds {A,B}: cost 5, covers all 10 nodes, finish time 4\n"
         "#   seeds {D,E}: cost 4, covers 8 nodes (not B, G), finish time 2\n"
         "1 2\n"
         "2 7\n"
         "7 8\n"
         "8 9\n"
         "1 6\n"
         "6 1\n"
         "0 3\n"
         "3 2\n"
         "2 0\n"
         "2 5\n"
         "5 4\n"
         "4 8\n";
}

inline Graph figure1_graph(const ProbabilityModel& prob = ProbabilityModel::constant(1.0),
                           const CostModel& cost = CostModel::degree()) {
  std::istringstream in(figure1_edge_list());
  return load_edge_list_stream(in, "figure1", /*directed=*/true, prob, cost);
}

// Dense id of the node labelled 'A'..'J' in a loaded figure-1 graph.
inline NodeId figure1_node(const Graph& g, char label) {
  const std::int64_t original = label - 'A';
  for (NodeId v = 0; v < g.node_count(); ++v)
    if (g.original_id(v) == original) return v;
  throw std::out_of_range("figure1 label out of range");
}

}  // namespace evea
