#pragma once
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "complex.hpp"
#include "numeric.hpp"
#include "plumbing.hpp"
#include "weights.hpp"

namespace latcoh {

using json = nlohmann::json;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write file: " + path);
  out << text;
}

// Parses JSON, converting nlohmann's byte-offset errors to line/column.
inline json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    size_t line = 1, col = 1;
    size_t upto = e.byte > 0 ? e.byte - 1 : 0;
    for (size_t i = 0; i < upto && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw input_error(what + ": JSON parse error at line " +
                      std::to_string(line) + ", column " + std::to_string(col));
  }
}

namespace detail {
inline long long json_int(const json& j, const std::string& where) {
  if (!j.is_number_integer())
    throw input_error(where + " must be an integer");
  return j.get<long long>();
}

inline std::string json_str(const json& j, const std::string& where) {
  if (!j.is_string()) throw input_error(where + " must be a string");
  return j.get<std::string>();
}
}  // namespace detail

// Graph file format:
//   {"vertices":[{"id":str,"e":int,"g":int}...], "edges":[["id","id"]...]}
// The genus may be omitted and defaults to 0.
inline PlumbingGraph graph_from_json(const json& j) {
  if (!j.is_object() || !j.contains("vertices"))
    throw input_error("graph JSON must be an object with a 'vertices' array");
  const json& jv = j["vertices"];
  if (!jv.is_array() || jv.empty())
    throw input_error("'vertices' must be a non-empty array");
  std::vector<Vertex> vertices;
  for (size_t i = 0; i < jv.size(); ++i) {
    const json& e = jv[i];
    std::string where = "vertex " + std::to_string(i);
    if (!e.is_object() || !e.contains("id") || !e.contains("e"))
      throw input_error(where + " must be an object with 'id' and 'e'");
    Vertex v;
    v.id = detail::json_str(e["id"], where + " id");
    v.e = detail::json_int(e["e"], where + " euler number");
    v.g = e.contains("g") ? detail::json_int(e["g"], where + " genus") : 0;
    vertices.push_back(std::move(v));
  }
  std::vector<std::pair<std::string, std::string>> edges;
  if (j.contains("edges")) {
    const json& je = j["edges"];
    if (!je.is_array()) throw input_error("'edges' must be an array");
    for (size_t i = 0; i < je.size(); ++i) {
      const json& e = je[i];
      std::string where = "edge " + std::to_string(i);
      if (!e.is_array() || e.size() != 2)
        throw input_error(where + " must be a pair of vertex ids");
      edges.emplace_back(detail::json_str(e[0], where),
                         detail::json_str(e[1], where));
    }
  }
  return make_graph(std::move(vertices), edges);
}

inline json graph_to_json(const PlumbingGraph& g) {
  json jv = json::array();
  for (auto& v : g.vertices)
    jv.push_back({{"id", v.id}, {"e", v.e}, {"g", v.g}});
  json je = json::array();
  for (auto& [a, b] : g.edges)
    je.push_back({g.vertices[a].id, g.vertices[b].id});
  return json{{"vertices", jv}, {"edges", je}};
}

inline PlumbingGraph load_graph(const std::string& path) {
  return graph_from_json(parse_json_text(read_file(path), path));
}

// ---------------------------------------------------------------------------
// Hilbert data files

namespace detail {

inline std::string point_key(const IntegerCycle& l) {
  std::string key;
  for (size_t i = 0; i < l.size(); ++i) {
    if (i) key += ",";
    key += l[i].str();
  }
  return key;
}

inline IntegerCycle parse_point_key(const std::string& key, size_t dim) {
  IntegerCycle out;
  size_t start = 0;
  while (start <= key.size()) {
    size_t comma = key.find(',', start);
    std::string part = key.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    if (part.empty())
      throw input_error("bad lattice point key '" + key + "'");
    try {
      out.push_back(Int(part));
    } catch (const std::exception&) {
      throw input_error("bad lattice point key '" + key + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.size() != dim)
    throw input_error("lattice point key '" + key + "' has " +
                      std::to_string(out.size()) + " coordinates, expected " +
                      std::to_string(dim));
  return out;
}

// Reads a full table over R(0,c): every point present exactly once, none
// outside.
inline IntTable table_from_json(const json& j, const IntegerCycle& c,
                                const std::string& name) {
  if (!j.is_object())
    throw input_error("'" + name + "' must be an object of point -> value");
  Rect r = make_rect(IntegerCycle(c.size(), Int(0)), c);
  IntTable t(r);
  std::vector<char> seen(t.idx.total(), 0);
  for (auto it = j.begin(); it != j.end(); ++it) {
    IntegerCycle p = parse_point_key(it.key(), c.size());
    if (!r.contains(p))
      throw input_error("'" + name + "' entry " + cyc_str(p) +
                        " lies outside the declared rectangle");
    long long v = json_int(it.value(), "'" + name + "' value at " + it.key());
    if (v < 0)
      throw input_error("'" + name + "' value at " + it.key() +
                        " must be nonnegative");
    size_t i = t.idx.index(p);
    seen[i] = 1;
    t.val[i] = v;
  }
  for (size_t i = 0; i < seen.size(); ++i)
    if (!seen[i])
      throw input_error("'" + name + "' is missing the point " +
                        cyc_str(t.idx.point(i)));
  return t;
}

}  // namespace detail

// Hilbert data file format:
//   {"class":["p/q",...], "rect":[c1,...], "p_gh":int,
//    "h":{"l1,l2,...":int,...}, "h1":{...}}
// Both tables must cover R(0,c) completely.
inline HilbertData hilbert_from_json(const json& j) {
  if (!j.is_object() || !j.contains("class") || !j.contains("rect") ||
      !j.contains("p_gh") || !j.contains("h") || !j.contains("h1"))
    throw input_error(
        "Hilbert data needs 'class', 'rect', 'p_gh', 'h' and 'h1' fields");
  const json& jc = j["class"];
  if (!jc.is_array() || jc.empty())
    throw input_error("'class' must be a non-empty array of rationals");
  RationalCycle cls;
  for (size_t i = 0; i < jc.size(); ++i) {
    Rat r = parse_rat(detail::json_str(jc[i], "class coordinate"));
    if (r < 0 || r >= 1)
      throw input_error("class coordinate " + rat_str(r) +
                        " is not in [0,1)");
    cls.push_back(r);
  }
  const json& jr = j["rect"];
  if (!jr.is_array() || jr.size() != cls.size())
    throw input_error("'rect' must list one extent per class coordinate");
  IntegerCycle c;
  for (size_t i = 0; i < jr.size(); ++i) {
    long long v = detail::json_int(jr[i], "rect coordinate");
    if (v < 0) throw input_error("rect coordinates must be nonnegative");
    c.push_back(v);
  }
  long long pg = detail::json_int(j["p_gh"], "p_gh");
  if (pg < 0) throw input_error("p_gh must be nonnegative");
  HilbertData d{std::move(cls), detail::table_from_json(j["h"], c, "h"),
                detail::table_from_json(j["h1"], c, "h1"), Int(pg)};
  return d;
}

inline json hilbert_to_json(const HilbertData& d) {
  json cls = json::array();
  for (auto& r : d.class_rep) cls.push_back(rat_str(r));
  json rect = json::array();
  for (auto& v : d.rect().hi) rect.push_back(to_ll(v, "rect coordinate"));
  json h = json::object(), h1 = json::object();
  for (size_t i = 0; i < d.h.idx.total(); ++i) {
    std::string key = detail::point_key(d.h.idx.point(i));
    h[key] = to_ll(d.h.val[i], "h value");
    h1[key] = to_ll(d.h1.val[i], "h1 value");
  }
  return json{{"class", cls},
              {"rect", rect},
              {"p_gh", to_ll(d.p_gh, "p_gh")},
              {"h", h},
              {"h1", h1}};
}

inline HilbertData load_hilbert(const std::string& path) {
  return hilbert_from_json(parse_json_text(read_file(path), path));
}

inline json series_to_json(const SeriesSlice& s) {
  json out;
  json support = json::array();
  for (auto& v : s.support.hi) support.push_back(to_ll(v, "support"));
  out["support"] = support;
  if (s.window) {
    json w = json::array();
    for (auto& v : s.window->hi) w.push_back(to_ll(v, "window"));
    out["window"] = w;
  } else {
    out["window"] = nullptr;
  }
  json coeff = json::object();
  for (auto& [p, v] : s.coeff) coeff[detail::point_key(p)] = v.str();
  out["coeff"] = coeff;
  return out;
}

// The cohomological degree of the row at level n is 2n; serialized output
// carries both so consumers need not know the convention.
inline json module_to_json(const LatticeModule& m) {
  json out;
  out["min_weight"] = to_ll(m.min_weight, "min_weight");
  out["mode"] = m.h0_only ? "h0" : "full";
  json levels = json::array();
  for (auto& row : m.levels) {
    json r;
    r["n"] = to_ll(row.n, "level");
    r["degree"] = 2 * to_ll(row.n, "level");
    r["betti"] = row.betti;
    json tors = json::array();
    for (auto& tq : row.torsion) {
      json t = json::array();
      for (auto& d : tq) t.push_back(to_ll(d, "torsion factor"));
      tors.push_back(t);
    }
    r["torsion"] = tors;
    r["u_rank"] = row.u_rank;
    levels.push_back(r);
  }
  out["levels"] = levels;
  out["eu"] = to_ll(m.eu, "eu");
  out["reduced_ranks"] = m.reduced_ranks;
  return out;
}

inline json root_to_json(const GradedRoot& r) {
  json out;
  json verts = json::array();
  for (size_t i = 0; i < r.vertices.size(); ++i) {
    json v;
    v["id"] = i;
    v["n"] = to_ll(r.vertices[i].n, "level");
    json rep = json::array();
    for (auto& x : r.vertices[i].rep) rep.push_back(to_ll(x, "rep"));
    v["rep"] = rep;
    verts.push_back(v);
  }
  out["vertices"] = verts;
  json edges = json::array();
  for (auto& [a, b] : r.edges) edges.push_back(json::array({a, b}));
  out["edges"] = edges;
  return out;
}

inline std::string root_to_dot(const GradedRoot& r) {
  std::ostringstream out;
  out << "graph gradedroot {\n  rankdir=BT;\n  node [shape=circle];\n";
  std::map<Int, std::vector<size_t>> by_level;
  for (size_t i = 0; i < r.vertices.size(); ++i)
    by_level[r.vertices[i].n].push_back(i);
  for (auto& [n, ids] : by_level) {
    out << "  { rank=same;";
    for (size_t i : ids)
      out << " v" << i << " [label=\"" << int_str(n) << " "
          << cyc_str(r.vertices[i].rep) << "\"];";
    out << " }\n";
  }
  for (auto& [a, b] : r.edges) out << "  v" << a << " -- v" << b << ";\n";
  out << "}\n";
  return out.str();
}

}  // namespace latcoh
