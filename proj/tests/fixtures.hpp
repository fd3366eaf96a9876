#pragma once
#include <string>
#include <utility>
#include <vector>

#include <latcoh/plumbing.hpp>

namespace fixtures {

using latcoh::make_graph;
using latcoh::PlumbingGraph;
using latcoh::Vertex;

// Chain v1 - v2 - ... - vn with the given Euler numbers.
inline PlumbingGraph chain(const std::vector<long long>& es) {
  std::vector<Vertex> vs;
  std::vector<std::pair<std::string, std::string>> edges;
  for (size_t i = 0; i < es.size(); ++i)
    vs.push_back({"v" + std::to_string(i + 1), es[i], 0});
  for (size_t i = 1; i < es.size(); ++i)
    edges.push_back({"v" + std::to_string(i), "v" + std::to_string(i + 1)});
  return make_graph(vs, edges);
}

inline PlumbingGraph a_n(size_t n) {
  return chain(std::vector<long long>(n, -2));
}

// Star: center plus one single-vertex leg per entry of leg_es.
inline PlumbingGraph star(long long center_e,
                          const std::vector<long long>& leg_es) {
  std::vector<Vertex> vs{{"c", center_e, 0}};
  std::vector<std::pair<std::string, std::string>> edges;
  for (size_t i = 0; i < leg_es.size(); ++i) {
    std::string id = "l" + std::to_string(i + 1);
    vs.push_back({id, leg_es[i], 0});
    edges.push_back({"c", id});
  }
  return make_graph(vs, edges);
}

inline PlumbingGraph d4() { return star(-2, {-2, -2, -2}); }

// E_n: chain a1..a_{n-1} of -2 vertices with a -2 vertex b attached to the
// branch point.
inline PlumbingGraph e_n(size_t n, size_t branch_at) {
  std::vector<Vertex> vs;
  std::vector<std::pair<std::string, std::string>> edges;
  for (size_t i = 1; i < n; ++i)
    vs.push_back({"a" + std::to_string(i), -2, 0});
  for (size_t i = 1; i + 1 < n; ++i)
    edges.push_back({"a" + std::to_string(i), "a" + std::to_string(i + 1)});
  vs.push_back({"b", -2, 0});
  edges.push_back({"a" + std::to_string(branch_at), "b"});
  return make_graph(vs, edges);
}

inline PlumbingGraph e6() { return e_n(6, 3); }
inline PlumbingGraph e7() { return e_n(7, 3); }
inline PlumbingGraph e8() { return e_n(8, 5); }

// Seifert sphere Sigma(2,3,7): center -1 with legs -2, -3, -7.
inline PlumbingGraph sigma_2_3_7() {
  return make_graph({{"c", -1, 0}, {"l2", -2, 0}, {"l3", -3, 0}, {"l7", -7, 0}},
                    {{"c", "l2"}, {"c", "l3"}, {"c", "l7"}});
}

inline latcoh::IntegerCycle ic(const std::vector<long long>& cs) {
  latcoh::IntegerCycle out;
  for (auto c : cs) out.push_back(latcoh::Int(c));
  return out;
}

inline latcoh::RationalCycle rc(const std::vector<std::string>& cs) {
  latcoh::RationalCycle out;
  for (auto& c : cs) out.push_back(latcoh::parse_rat(c));
  return out;
}

}  // namespace fixtures
