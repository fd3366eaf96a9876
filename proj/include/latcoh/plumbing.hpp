#pragma once
#include <algorithm>
#include <cstddef>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "linalg.hpp"
#include "numeric.hpp"

namespace latcoh {

struct Vertex {
  std::string id;
  long long e = 0;  // self-intersection of E_v
  long long g = 0;  // genus of E_v
};

struct LauferTrace {
  RationalCycle cycle;
  unsigned long long steps = 0;  // number of E_v additions
};

// Immutable model of a negative definite plumbing graph together with the
// exact lattice data every other module consumes.  Vertices are kept in
// lexicographic id order; all coordinate vectors use that order.
struct PlumbingGraph {
  std::vector<Vertex> vertices;                  // sorted by id
  std::vector<std::pair<size_t, size_t>> edges;  // canonical (i < j), sorted
  IMatrix form;                                  // intersection matrix I
  Int determinant;                               // det I; |H| = |det I|
  std::vector<Int> invariant_factors;            // Smith form of I, d1 | d2 | ...
  std::vector<RationalCycle> dual;               // dual[v] = E*_v
  RationalCycle z_k;                             // canonical cycle Z_K
  IntegerCycle z_min;                            // Laufer's fundamental cycle
  unsigned long long z_min_steps = 0;
  bool tree = false;
  bool genus_zero = false;

  // sparse_rows[v] = nonzero entries (w, I_vw) of row v, for cheap pairing
  // updates inside Laufer loops
  std::vector<std::vector<std::pair<size_t, long long>>> sparse_rows;

  size_t size() const { return vertices.size(); }

  bool qhs3() const { return tree && genus_zero; }

  void require_qhs3(const char* op) const {
    if (!qhs3())
      throw input_error(std::string(op) +
                        " requires a rational homology sphere plumbing "
                        "(tree with all genera zero)");
  }

  size_t index_of(const std::string& id) const {
    for (size_t i = 0; i < vertices.size(); ++i)
      if (vertices[i].id == id) return i;
    throw input_error("unknown vertex id '" + id + "'");
  }

  size_t valency(size_t v) const {
    size_t n = 0;
    for (auto& [w, c] : sparse_rows[v])
      if (w != v) n += static_cast<size_t>(c);
    return n;
  }

  IntegerCycle unit(size_t v) const {
    IntegerCycle e(size(), Int(0));
    e[v] = 1;
    return e;
  }

  IntegerCycle ones() const { return IntegerCycle(size(), Int(1)); }

  // ---- bilinear form -------------------------------------------------------

  Int pair(const IntegerCycle& x, const IntegerCycle& y) const {
    check_len(x);
    check_len(y);
    Int s = 0;
    for (size_t v = 0; v < size(); ++v) {
      if (x[v] == 0) continue;
      for (auto& [w, c] : sparse_rows[v]) s += x[v] * c * y[w];
    }
    return s;
  }

  Rat pair(const RationalCycle& x, const RationalCycle& y) const {
    check_len(x);
    check_len(y);
    Rat s = 0;
    for (size_t v = 0; v < size(); ++v) {
      if (x[v] == 0) continue;
      for (auto& [w, c] : sparse_rows[v]) s += x[v] * c * y[w];
    }
    return s;
  }

  Rat pair(const RationalCycle& x, const IntegerCycle& y) const {
    return pair(x, to_rational(y));
  }

  Rat pair(const IntegerCycle& x, const RationalCycle& y) const {
    return pair(to_rational(x), y);
  }

  // (l, l') for l in L and l' in L' is an integer; checked.
  Int ipair(const IntegerCycle& l, const RationalCycle& lp) const {
    Rat s = pair(to_rational(l), lp);
    if (!is_integer(s))
      throw input_error("pairing with a cycle outside the dual lattice");
    return numer(s);
  }

  // (I x)_v for all v, the pairing vector ((x, E_v))_v.
  std::vector<Rat> pairing_vector(const RationalCycle& x) const {
    check_len(x);
    std::vector<Rat> p(size(), Rat(0));
    for (size_t v = 0; v < size(); ++v)
      for (auto& [w, c] : sparse_rows[v]) p[v] += Rat(c) * x[w];
    return p;
  }

  bool in_dual_lattice(const RationalCycle& x) const {
    for (auto& p : pairing_vector(x))
      if (!is_integer(p)) return false;
    return true;
  }

  // Lipman cone membership: (x, E_v) <= 0 for all v.
  bool in_lipman_cone(const RationalCycle& x) const {
    for (auto& p : pairing_vector(x))
      if (p > 0) return false;
    return true;
  }

  // ---- Riemann-Roch --------------------------------------------------------

  Rat chi(const RationalCycle& lp) const {
    return -pair(lp, cyc_sub(lp, z_k)) / 2;
  }

  Int chi(const IntegerCycle& l) const {
    Rat v = chi(to_rational(l));
    if (!is_integer(v))
      throw property_error("chi of an integral cycle came out non-integral");
    return numer(v);
  }

  // chi_k(l) = -(l, l+k)/2; integral exactly when k is characteristic.
  Int chi_k(const RationalCycle& k, const IntegerCycle& l) const {
    Rat v = -(Rat(pair(l, l)) + pair(to_rational(l), k)) / 2;
    if (!is_integer(v))
      throw input_error("chi_k is non-integral: " + cyc_str(k) +
                        " is not a characteristic element");
    return numer(v);
  }

  // (E_v, E_v + k) even for every v forces k characteristic (bilinearity).
  bool is_characteristic(const RationalCycle& k) const {
    check_len(k);
    auto p = pairing_vector(k);
    for (size_t v = 0; v < size(); ++v) {
      Rat s = Rat(vertices[v].e) + p[v];
      if (!is_integer(s) || numer(s) % 2 != 0) return false;
    }
    return true;
  }

  // ---- discriminant group --------------------------------------------------

  // Class representative r_h: the unique element of l' + L with all
  // coordinates in [0,1).
  RationalCycle class_of(const RationalCycle& lp) const {
    if (!in_dual_lattice(lp))
      throw input_error("cycle " + cyc_str(lp) + " is not in the dual lattice");
    RationalCycle r(lp.size());
    for (size_t i = 0; i < lp.size(); ++i) r[i] = frac_rat(lp[i]);
    return r;
  }

  // All of H = L'/L as sorted class representatives; first entry is 0.
  std::vector<RationalCycle> all_classes() const {
    Int order = abs(determinant);
    std::set<RationalCycle> seen;
    std::queue<RationalCycle> todo;
    RationalCycle zero(size(), Rat(0));
    seen.insert(zero);
    todo.push(zero);
    while (!todo.empty()) {
      RationalCycle r = todo.front();
      todo.pop();
      for (size_t v = 0; v < size(); ++v) {
        RationalCycle nxt = cyc_add(r, dual[v]);
        for (auto& c : nxt) c = frac_rat(c);
        if (seen.insert(nxt).second) todo.push(nxt);
      }
    }
    if (Int(seen.size()) != order)
      throw property_error("class enumeration found " +
                           std::to_string(seen.size()) +
                           " classes, expected |det I| = " + order.str());
    return std::vector<RationalCycle>(seen.begin(), seen.end());
  }

  // ---- Laufer iterations ---------------------------------------------------

  // Generalized Laufer iteration: from x0 in L', repeatedly add E_v for the
  // smallest v with (x, E_v) > 0.  Negative definiteness guarantees
  // termination at the unique minimal element of (x0 + L_{>=0}) in the Lipman
  // cone; no step cap is imposed, only the step count is reported.
  LauferTrace laufer_close(const RationalCycle& x0) const {
    RationalCycle x = x0;
    std::vector<Rat> pr = pairing_vector(x);
    std::vector<Int> p(size());
    for (size_t v = 0; v < size(); ++v) {
      if (!is_integer(pr[v]))
        throw input_error("Laufer iteration needs a cycle in the dual lattice");
      p[v] = numer(pr[v]);
    }
    LauferTrace out;
    for (;;) {
      size_t v = size();
      for (size_t i = 0; i < size(); ++i)
        if (p[i] > 0) {
          v = i;
          break;
        }
      if (v == size()) break;
      x[v] += 1;
      for (auto& [w, c] : sparse_rows[v]) p[w] += c;
      ++out.steps;
    }
    out.cycle = std::move(x);
    return out;
  }

  RationalCycle s_of(const RationalCycle& lp) const {
    return laufer_close(lp).cycle;
  }

  // Delta_h = s_h - r_h, an effective integral cycle.
  IntegerCycle delta_of(const RationalCycle& r) const {
    return to_integer(cyc_sub(s_of(r), r), "s_h - r_h");
  }

  // Characteristic representatives of the class with representative r:
  // k = -Z_K + 2 s_h (the canonical choice) and the -Z_K + 2 r_h variant.
  RationalCycle char_from_s(const RationalCycle& r) const {
    require_qhs3("characteristic representative");
    return char_shift(s_of(r));
  }

  RationalCycle char_from_r(const RationalCycle& r) const {
    require_qhs3("characteristic representative");
    return char_shift(r);
  }

  // Laufer's criterion: the singularity is rational iff chi(Z_min) = 1.
  bool rational_singularity() const { return chi(z_min) == 1; }

 private:
  RationalCycle char_shift(const RationalCycle& a) const {
    RationalCycle k(size());
    for (size_t v = 0; v < size(); ++v) k[v] = 2 * a[v] - z_k[v];
    return k;
  }

  template <class C>
  void check_len(const C& x) const {
    if (x.size() != size())
      throw input_error("cycle has " + std::to_string(x.size()) +
                        " coordinates, graph has " + std::to_string(size()));
  }
};

// Validates and completes a plumbing graph.  Vertices may arrive in any
// order; they are sorted by id and all reported data uses the sorted order.
inline PlumbingGraph make_graph(
    std::vector<Vertex> vertices,
    const std::vector<std::pair<std::string, std::string>>& edge_ids) {
  if (vertices.empty()) throw input_error("plumbing graph has no vertices");
  std::sort(vertices.begin(), vertices.end(),
            [](const Vertex& a, const Vertex& b) { return a.id < b.id; });
  std::map<std::string, size_t> index;
  for (size_t i = 0; i < vertices.size(); ++i) {
    if (!index.emplace(vertices[i].id, i).second)
      throw input_error("duplicate vertex id '" + vertices[i].id + "'");
    if (vertices[i].g < 0)
      throw input_error("vertex '" + vertices[i].id + "' has negative genus");
  }
  size_t n = vertices.size();

  PlumbingGraph g;
  g.vertices = std::move(vertices);
  for (auto& [a, b] : edge_ids) {
    auto ia = index.find(a), ib = index.find(b);
    if (ia == index.end())
      throw input_error("edge endpoint '" + a + "' is not a vertex");
    if (ib == index.end())
      throw input_error("edge endpoint '" + b + "' is not a vertex");
    if (ia->second == ib->second)
      throw input_error("self-loop at vertex '" + a + "'");
    g.edges.emplace_back(std::min(ia->second, ib->second),
                         std::max(ia->second, ib->second));
  }
  std::sort(g.edges.begin(), g.edges.end());

  // connectivity
  std::vector<std::vector<size_t>> adj(n);
  for (auto& [a, b] : g.edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<char> vis(n, 0);
  std::queue<size_t> bfs;
  bfs.push(0);
  vis[0] = 1;
  size_t reached = 1;
  while (!bfs.empty()) {
    size_t v = bfs.front();
    bfs.pop();
    for (size_t w : adj[v])
      if (!vis[w]) {
        vis[w] = 1;
        ++reached;
        bfs.push(w);
      }
  }
  if (reached != n) throw input_error("plumbing graph is not connected");

  // intersection matrix
  g.form = IMatrix(n, n);
  for (size_t v = 0; v < n; ++v) g.form.at(v, v) = g.vertices[v].e;
  for (auto& [a, b] : g.edges) {
    g.form.at(a, b) += 1;
    g.form.at(b, a) += 1;
  }

  // negative definiteness: leading principal minors of I must alternate in
  // sign, (-1)^k m_k > 0
  auto minors = leading_principal_minors(g.form);
  for (size_t k = 1; k <= n; ++k) {
    const Int& m = minors[k - 1];
    bool ok = (k % 2 == 1) ? (m < 0) : (m > 0);
    if (!ok)
      throw input_error(
          "intersection form is not negative definite: leading principal "
          "minor " +
          std::to_string(k) + " (through vertex '" + g.vertices[k - 1].id +
          "') is " + m.str() + ", expected sign " +
          (k % 2 == 1 ? "negative" : "positive"));
  }
  g.determinant = minors[n - 1];
  g.invariant_factors = smith_normal_form(g.form).factors;

  // sparse rows for the pairing loops
  g.sparse_rows.assign(n, {});
  for (size_t v = 0; v < n; ++v)
    for (size_t w = 0; w < n; ++w)
      if (g.form.at(v, w) != 0)
        g.sparse_rows[v].emplace_back(w, to_ll(g.form.at(v, w), "form entry"));

  // dual basis: E*_v = column v of -I^{-1}
  auto inv = inverse_exact(g.form);
  g.dual.assign(n, RationalCycle(n));
  for (size_t v = 0; v < n; ++v)
    for (size_t w = 0; w < n; ++w) g.dual[v][w] = -inv[v][w];

  // canonical cycle: (Z_K, E_v) = e_v + 2 - 2 g_v
  std::vector<Rat> rhs(n);
  for (size_t v = 0; v < n; ++v)
    rhs[v] = Rat(g.vertices[v].e + 2 - 2 * g.vertices[v].g);
  g.z_k = solve_exact(g.form, rhs);

  g.tree = g.edges.size() == n - 1;  // connected, so n-1 edges <=> tree
  g.genus_zero = true;
  for (auto& v : g.vertices)
    if (v.g != 0) g.genus_zero = false;

  // fundamental cycle by Laufer's algorithm, seeded with E = sum of all E_v
  auto tr = g.laufer_close(to_rational(g.ones()));
  g.z_min = to_integer(tr.cycle, "fundamental cycle");
  g.z_min_steps = tr.steps;
  return g;
}

}  // namespace latcoh
