#pragma once
#include <algorithm>
#include <future>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "complex.hpp"
#include "numeric.hpp"
#include "plumbing.hpp"
#include "rect.hpp"
#include "reduction.hpp"
#include "weights.hpp"

namespace latcoh {

// ---------------------------------------------------------------------------
// Blow-up moves
//
// Two moves modify a resolution without changing the manifold it resolves: a
// point blow-up on a single curve (a new (-1)-vertex hanging off v0, whose
// Euler number drops by one) and a blow-up of an intersection point (the new
// (-1)-vertex splits the edge between v0 and v1, both Euler numbers drop).
// The pullback sends a cycle to the blown-up lattice so that the intersection
// form is preserved and the new vertex pairs to zero.

struct BlowupMove {
  enum class Kind { point, edge };
  Kind kind = Kind::point;
  size_t v0 = 0;
  size_t v1 = 0;        // edge kind only
  std::string new_id;   // id of the new vertex; empty picks a free one
};

struct Blowup {
  PlumbingGraph graph;            // the blown-up graph
  BlowupMove move;                // with new_id resolved
  std::vector<size_t> transform;  // old index -> index of its strict transform
  size_t new_vertex = 0;          // index of the new (-1)-vertex
};

// pi^*: coordinates carry over to the strict transforms; the new coordinate
// is x[v0] (point kind) or x[v0] + x[v1] (edge kind).
template <class C>
inline C pullback(const Blowup& bu, const C& x) {
  if (x.size() != bu.transform.size())
    throw input_error("pullback of a cycle with " + std::to_string(x.size()) +
                      " coordinates, source graph has " +
                      std::to_string(bu.transform.size()));
  C y(bu.graph.size());
  for (size_t v = 0; v < x.size(); ++v) y[bu.transform[v]] = x[v];
  y[bu.new_vertex] = bu.move.kind == BlowupMove::Kind::edge
                         ? x[bu.move.v0] + x[bu.move.v1]
                         : x[bu.move.v0];
  return y;
}

// pi_*: forget the new coordinate.
template <class C>
inline C pushforward(const Blowup& bu, const C& y) {
  if (y.size() != bu.graph.size())
    throw input_error("pushforward of a cycle with " +
                      std::to_string(y.size()) +
                      " coordinates, blown-up graph has " +
                      std::to_string(bu.graph.size()));
  C x(bu.transform.size());
  for (size_t v = 0; v < x.size(); ++v) x[v] = y[bu.transform[v]];
  return x;
}

inline Blowup blowup(const PlumbingGraph& g, BlowupMove move) {
  size_t n = g.size();
  if (move.v0 >= n)
    throw input_error("blow-up vertex index " + std::to_string(move.v0) +
                      " out of range");
  if (move.kind == BlowupMove::Kind::edge) {
    if (move.v1 >= n)
      throw input_error("blow-up vertex index " + std::to_string(move.v1) +
                        " out of range");
    std::pair<size_t, size_t> e{std::min(move.v0, move.v1),
                                std::max(move.v0, move.v1)};
    if (move.v0 == move.v1 ||
        !std::binary_search(g.edges.begin(), g.edges.end(), e))
      throw input_error("edge blow-up needs an existing edge, ('" +
                        g.vertices[move.v0].id + "', '" +
                        g.vertices[move.v1].id + "') is not one");
  }

  if (move.new_id.empty()) {
    for (int k = 1;; ++k) {
      std::string cand = "bu" + std::to_string(k);
      bool taken = false;
      for (auto& v : g.vertices) taken = taken || v.id == cand;
      if (!taken) {
        move.new_id = cand;
        break;
      }
    }
  } else {
    for (auto& v : g.vertices)
      if (v.id == move.new_id)
        throw input_error("new vertex id '" + move.new_id +
                          "' already names a vertex");
  }

  std::vector<Vertex> vs = g.vertices;
  vs[move.v0].e -= 1;
  if (move.kind == BlowupMove::Kind::edge) vs[move.v1].e -= 1;
  vs.push_back(Vertex{move.new_id, -1, 0});

  std::vector<std::pair<std::string, std::string>> es;
  bool removed = false;  // parallel edges lose exactly one copy
  for (auto& [a, b] : g.edges) {
    bool drop = !removed && move.kind == BlowupMove::Kind::edge &&
                a == std::min(move.v0, move.v1) &&
                b == std::max(move.v0, move.v1);
    if (drop)
      removed = true;
    else
      es.emplace_back(g.vertices[a].id, g.vertices[b].id);
  }
  es.emplace_back(g.vertices[move.v0].id, move.new_id);
  if (move.kind == BlowupMove::Kind::edge)
    es.emplace_back(g.vertices[move.v1].id, move.new_id);

  Blowup bu;
  bu.graph = make_graph(std::move(vs), es);
  bu.move = move;
  bu.transform.resize(n);
  for (size_t v = 0; v < n; ++v)
    bu.transform[v] = bu.graph.index_of(g.vertices[v].id);
  bu.new_vertex = bu.graph.index_of(move.new_id);

  if (Int(abs(bu.graph.determinant)) != Int(abs(g.determinant)))
    throw property_error("blow-up changed |det| from " +
                         Int(abs(g.determinant)).str() + " to " +
                         Int(abs(bu.graph.determinant)).str());
  // form preservation on the basis settles it for all cycles by bilinearity
  for (size_t v = 0; v < n; ++v) {
    IntegerCycle pv = pullback(bu, g.unit(v));
    if (bu.graph.pair(pv, bu.graph.unit(bu.new_vertex)) != 0)
      throw property_error("pullback of E_" + g.vertices[v].id +
                           " pairs nontrivially with the new vertex");
    for (size_t w = v; w < n; ++w)
      if (bu.graph.pair(pv, pullback(bu, g.unit(w))) !=
          g.pair(g.unit(v), g.unit(w)))
        throw property_error("blow-up does not preserve the pairing of E_" +
                             g.vertices[v].id + " and E_" + g.vertices[w].id);
  }
  return bu;
}

// ---------------------------------------------------------------------------
// Class representatives across a blow-up
//
// The strict-transform identification matches discriminant classes of the two
// graphs, and the class representative transforms by r_h' = pi^* r_h except
// in one situation: blowing up an edge whose endpoint coordinates of r_h sum
// to at least 1 costs one copy of the new vertex.

struct RhPullback {
  RationalCycle r_before;  // r_h on the source graph
  RationalCycle r_after;   // r_h on the blown-up graph, same class
  bool shifted = false;    // true when r_after = pi^* r_before - E_new
};

inline RhPullback check_rh_pullback(const PlumbingGraph& g, const Blowup& bu,
                                    const RationalCycle& h) {
  g.require_qhs3("r_h pullback");
  RationalCycle r = g.class_of(h);
  RationalCycle pb = pullback(bu, r);
  RationalCycle after = bu.graph.class_of(pb);

  bool shifted = false;
  RationalCycle predicted = pb;
  if (bu.move.kind == BlowupMove::Kind::edge) {
    Rat sum = r[bu.move.v0] + r[bu.move.v1];
    shifted = !(sum < 1);
    if (shifted) predicted[bu.new_vertex] -= 1;
  }
  if (!(after == predicted))
    throw property_error(
        "r_h pullback branch criterion failed: representative " +
        cyc_str(after) + ", predicted " + cyc_str(predicted));
  return {std::move(r), std::move(after), shifted};
}

inline RhPullback check_rh_pullback(const PlumbingGraph& g,
                                    const BlowupMove& move,
                                    const RationalCycle& h) {
  return check_rh_pullback(g, blowup(g, move), h);
}

// ---------------------------------------------------------------------------
// Stabilized topological modules
//
// The truncation stopping rule only settles rows up to the requested level,
// so the threshold rises until the last kept row sits strictly below it; the
// rows above are then trivial and the module is final.  Whenever the
// valency-violating vertices certify as a B-set, the run happens on the
// reduced lattice instead -- the same module at a fraction of the cube
// budget -- and the s_h-graded result is shifted back into the caller's
// normalization.

struct StableRun {
  LatticeModule module;  // in the normalization of the model handed in
  GradedRoot root;       // likewise
  Rect rect;             // the settled rectangle (reduced axes when reduced)
  Int n_max;             // final threshold, caller's grading
  bool reduced = false;
  bool heuristic = true;
};

// Grading-shifted copy; eu is recomputed from the shifted minimum.
inline LatticeModule shift_levels(LatticeModule m, const Int& c) {
  m.min_weight += c;
  for (auto& row : m.levels) row.n += c;
  m.eu = eu(m);
  return m;
}

namespace detail {

// The vertices breaking -e_v >= valency(v).  Decrementing exactly them far
// enough makes the whole graph valency-dominated, hence rational, so the
// certificate search always has a witness within the computed cap; the only
// uncertifiable outcome is an empty candidate set on a non-rational graph,
// which cannot occur.
inline std::optional<BadSet> auto_bad_set(const PlumbingGraph& g) {
  std::vector<size_t> val(g.size(), 0);
  for (auto& [a, b] : g.edges) {
    ++val[a];
    ++val[b];
  }
  std::vector<size_t> bar;
  long long cap = 0;
  for (size_t v = 0; v < g.size(); ++v) {
    long long excess = (long long)val[v] + g.vertices[v].e;
    if (excess > 0) {
      bar.push_back(v);
      cap = std::max(cap, excess);
    }
  }
  BadSetProbe probe = test_bad_set(g, bar, cap);
  if (!probe.certified) return std::nullopt;
  return BadSet{std::move(bar), false, probe.decrement};
}

}  // namespace detail

inline StableRun stable_module(const WeightModel& model, unsigned workers = 1,
                               Int n_max = 2) {
  if (model.kind != WeightModel::Kind::topological) {
    // finite exact domain: the module is final on it as computed
    TruncateResult tr = truncate(model, n_max, 12, CohMode::full, workers);
    LatticeModule mod =
        lattice_cohomology(model, tr.rect, CohMode::full, workers);
    GradedRoot root = graded_root(model, tr.rect);
    return {std::move(mod), std::move(root), tr.rect, n_max, false, false};
  }

  const PlumbingGraph& g = *model.graph;
  RationalCycle a(g.size());
  for (size_t v = 0; v < g.size(); ++v) a[v] = (model.k[v] + g.z_k[v]) / 2;
  RationalCycle r = g.class_of(a);

  // the reduced model is graded by s_h; only the r_h and s_h normalizations
  // are known to come back from it by a pure grading shift
  std::optional<BadSet> bad = detail::auto_bad_set(g);
  if (bad && bad->bar.size() < g.size() && (a == r || a == g.s_of(r))) {
    ReducedWeightModel rm = reduce_topological(g, *bad, r);
    Int shift = g.chi_k(model.k, to_integer(cyc_sub(rm.s_h, a), "s_h - a"));
    Int ns = n_max - shift;
    for (int round = 0; round < 8; ++round) {
      TruncateResult tr =
          reduced_truncate(rm, ns, 12, CohMode::full, workers);
      WeightModel tab = reduced_table_model(rm, tr.rect);
      LatticeModule mod =
          lattice_cohomology(tab, tr.rect, CohMode::full, workers);
      if (mod.levels.back().n < ns) {
        GradedRoot root = graded_root(tab, tr.rect);
        root.m_w += shift;
        root.top += shift;
        for (auto& rv : root.vertices) rv.n += shift;
        return {shift_levels(std::move(mod), shift), std::move(root), tr.rect,
                ns + shift, true, tr.heuristic};
      }
      ns = mod.levels.back().n + 2;
    }
    throw resource_error(
        "module did not settle below a rising level threshold");
  }

  for (int round = 0; round < 8; ++round) {
    TruncateResult tr = truncate(model, n_max, 12, CohMode::full, workers);
    LatticeModule mod =
        lattice_cohomology(model, tr.rect, CohMode::full, workers);
    if (mod.levels.back().n < n_max)
      return {std::move(mod), graded_root(model, tr.rect), tr.rect, n_max,
              false, tr.heuristic};
    n_max = mod.levels.back().n + 2;
  }
  throw resource_error(
      "module did not settle below a rising level threshold");
}

// Canonical encoding of a graded root as a rooted tree with vertex levels;
// two roots are isomorphic exactly when the encodings agree.  Component
// representatives are deliberately left out: they live in the lattice of one
// particular resolution.
inline std::string root_canonical(const GradedRoot& r, const Int& shift = 0) {
  std::vector<std::vector<size_t>> kids(r.vertices.size());
  std::vector<char> has_up(r.vertices.size(), 0);
  for (auto& [a, b] : r.edges) {
    kids[b].push_back(a);
    has_up[a] = 1;
  }
  size_t top = r.vertices.size();
  for (size_t i = 0; i < r.vertices.size(); ++i)
    if (!has_up[i]) top = i;
  if (top == r.vertices.size())
    throw property_error("graded root has no top vertex");
  auto encode = [&](auto&& self, size_t v) -> std::string {
    std::vector<std::string> parts;
    for (size_t k : kids[v]) parts.push_back(self(self, k));
    std::sort(parts.begin(), parts.end());
    std::string out = "(" + int_str(Int(r.vertices[v].n + shift)) + ":";
    for (auto& p : parts) out += p;
    return out + ")";
  };
  return encode(encode, top);
}

// ---------------------------------------------------------------------------
// Seiberg-Witten invariants
//
// sw = eu + (k_r^2 + |V|)/8 for the characteristic element k_r = -Z_K + 2r_h,
// with eu taken from the module in the r_h normalization.  Both summands
// change under blow-up (k^2 drops by one, |V| grows by one) but the sum is an
// invariant of the link with its spin-c structure.

struct SwInvariant {
  RationalCycle k_r;
  Rat k_sq;
  Int eu_value;  // eu of the topological module, r_h normalization
  Rat sw;
  bool heuristic = true;
};

inline SwInvariant sw_invariant(const PlumbingGraph& g, const RationalCycle& h,
                                unsigned workers = 1) {
  g.require_qhs3("Seiberg-Witten invariant");
  RationalCycle r = g.class_of(h);
  RationalCycle k = g.char_from_r(r);
  StableRun run = stable_module(topo_weight(g, k), workers);
  SwInvariant out;
  out.k_sq = g.pair(k, k);
  out.eu_value = run.module.eu;
  out.sw = Rat(out.eu_value) + (out.k_sq + Rat((long long)g.size())) / 8;
  out.k_r = std::move(k);
  out.heuristic = run.heuristic;
  return out;
}

// ---------------------------------------------------------------------------
// Blow-up invariance
//
// The topological module, the graded root and sw of (graph, h) must match
// those of the blown-up graph with the matched class.  Modules on the two
// graphs carry rows of different widths (one extra degree column), so both
// are degree-normalized before comparison.

struct BlowupCheck {
  BlowupMove move;
  bool shifted = false;  // which r_h branch the move took
  bool modules_equal = false;
  bool roots_equal = false;
  bool sw_equal = false;
  std::vector<Int> failing_levels;

  bool pass() const { return modules_equal && roots_equal && sw_equal; }
};

namespace detail {

// Levels whose rows differ between two degree-normalized modules.
inline std::vector<Int> module_diff_levels(const LatticeModule& a,
                                           const LatticeModule& b) {
  std::vector<Int> bad;
  std::set<Int> ns;
  for (auto& row : a.levels) ns.insert(row.n);
  for (auto& row : b.levels) ns.insert(row.n);
  auto row_of = [](const LatticeModule& m, const Int& n) {
    const LevelRow* hit = nullptr;
    for (auto& row : m.levels)
      if (row.n == n) hit = &row;
    return hit;
  };
  for (auto& n : ns) {
    const LevelRow* ra = row_of(a, n);
    const LevelRow* rb = row_of(b, n);
    // a missing row above the kept range is a stabilized trivial row
    bool ta = ra ? ra->trivial() : true;
    bool tb = rb ? rb->trivial() : true;
    if (ra && rb ? !(*ra == *rb) : ta != tb) bad.push_back(n);
  }
  return bad;
}

}  // namespace detail

inline BlowupCheck check_blowup_invariance(const PlumbingGraph& g,
                                           const BlowupMove& move,
                                           const RationalCycle& h,
                                           Int n_max = 2,
                                           unsigned workers = 1) {
  g.require_qhs3("blow-up invariance");
  Blowup bu = blowup(g, move);
  RhPullback rh = check_rh_pullback(g, bu, h);

  WeightModel before = topo_weight(g, g.char_from_r(rh.r_before));
  WeightModel after =
      topo_weight(bu.graph, bu.graph.char_from_r(rh.r_after));

  StableRun run_b, run_a;
  if (workers > 1) {
    auto fb = std::async(std::launch::async,
                         [&] { return stable_module(before, 1, n_max); });
    run_a = stable_module(after, 1, n_max);
    run_b = fb.get();
  } else {
    run_b = stable_module(before, workers, n_max);
    run_a = stable_module(after, workers, n_max);
  }

  BlowupCheck out;
  out.move = bu.move;
  out.shifted = rh.shifted;

  LatticeModule mb = normalize_degrees(run_b.module);
  LatticeModule ma = normalize_degrees(run_a.module);
  out.failing_levels = detail::module_diff_levels(mb, ma);
  out.modules_equal = mb == ma;

  out.roots_equal = root_canonical(run_b.root) == root_canonical(run_a.root);

  Rat sw_b = Rat(mb.eu) + (g.pair(before.k, before.k) +
                           Rat((long long)g.size())) / 8;
  Rat sw_a = Rat(ma.eu) + (bu.graph.pair(after.k, after.k) +
                           Rat((long long)bu.graph.size())) / 8;
  out.sw_equal = sw_b == sw_a;
  return out;
}

struct InvarianceReport {
  bool pass = true;
  std::vector<BlowupCheck> checks;
  std::vector<std::string> errors;
};

// One representative move of each kind: a point blow-up on the first vertex
// and, when the graph has an edge, an edge blow-up on the first edge.
inline InvarianceReport blowup_invariance(const PlumbingGraph& g,
                                          const RationalCycle& h,
                                          Int n_max = 2,
                                          unsigned workers = 1) {
  std::vector<BlowupMove> moves;
  moves.push_back({BlowupMove::Kind::point, 0, 0, ""});
  if (!g.edges.empty())
    moves.push_back(
        {BlowupMove::Kind::edge, g.edges[0].first, g.edges[0].second, ""});

  InvarianceReport out;
  for (auto& mv : moves) {
    BlowupCheck c = check_blowup_invariance(g, mv, h, n_max, workers);
    if (!c.pass()) {
      out.pass = false;
      std::string kind =
          mv.kind == BlowupMove::Kind::point ? "point" : "edge";
      std::string msg = kind + " blow-up: ";
      if (!c.modules_equal) {
        msg += "modules differ at levels";
        for (auto& n : c.failing_levels) msg += " " + int_str(n);
      } else if (!c.roots_equal) {
        msg += "graded roots differ";
      } else {
        msg += "sw differs";
      }
      out.errors.push_back(msg);
    }
    out.checks.push_back(std::move(c));
  }
  return out;
}

// The r_h and s_h normalizations of the same class give modules and roots
// that agree after shifting every s_h grading up by chi_{k_r}(Delta_h).
struct NormalizationBridge {
  Int shift;
  bool modules_agree = false;
  bool roots_agree = false;
};

inline NormalizationBridge normalization_shift_check(const PlumbingGraph& g,
                                                     const RationalCycle& h,
                                                     unsigned workers = 1) {
  g.require_qhs3("normalization shift");
  RationalCycle r = g.class_of(h);
  WeightModel mr = topo_weight(g, g.char_from_r(r));
  WeightModel ms = topo_weight(g, g.char_from_s(r));
  NormalizationBridge out;
  out.shift = g.chi_k(mr.k, g.delta_of(r));
  StableRun rr = stable_module(mr, workers);
  StableRun rs = stable_module(ms, workers);
  out.modules_agree = rr.module == shift_levels(rs.module, out.shift);
  out.roots_agree =
      root_canonical(rr.root) == root_canonical(rs.root, out.shift);
  return out;
}

// ---------------------------------------------------------------------------
// The analytic-to-topological comparison
//
// With k_r = -Z_K + 2r_h the topological weight dominates the analytic one
// pointwise, the gap being the corank of a restriction map of sections.  The
// sublevel spaces therefore include S_top,n into S_an,n, which induces the
// comparison morphism of modules and of graded roots; the report captures
// the pointwise defect and the level-wise component mapping.

struct LevelMap {
  Int n;
  long long top_components = 0;
  long long an_components = 0;
  std::vector<size_t> to;  // top component j -> index of its an component
  bool strict = false;     // S_top,n is a proper subset of S_an,n
};

struct ComparisonReport {
  Rect rect;
  IntTable defect;  // w_top - w_an, pointwise >= 0
  bool isomorphic = false;
  std::vector<LevelMap> levels;
  LatticeModule top_module, an_module;
};

inline ComparisonReport compare(const PlumbingGraph& g, const RationalCycle& h,
                                const HilbertData& data,
                                unsigned workers = 1) {
  g.require_qhs3("comparison");
  if (data.dim() != g.size())
    throw input_error("rectangle mismatch: Hilbert data has " +
                      std::to_string(data.dim()) +
                      " coordinates, the graph has " +
                      std::to_string(g.size()));
  const Rect& rect = data.rect();
  if (!cyc_is_zero(rect.lo))
    throw input_error(
        "rectangle mismatch: the comparison runs on R(0, c), the data "
        "rectangle starts at " +
        cyc_str(rect.lo));

  RationalCycle r = g.class_of(h);
  WeightModel top = topo_weight(g, g.char_from_r(r));
  WeightModel an = analytic_weight(data);

  auto tg = detail::build_grid(top, rect);
  auto ag = detail::build_grid(an, rect);

  ComparisonReport out{rect, IntTable(rect), false, {}, {}, {}};
  bool all_zero = true;
  for (size_t i = 0; i < tg.w0.size(); ++i) {
    out.defect.val[i] = tg.w0[i] - ag.w0[i];
    if (out.defect.val[i] < 0)
      throw property_error("defect is negative at " +
                           cyc_str(tg.shape.idx.point(i)) + ": w_top = " +
                           tg.w0[i].str() + ", w_an = " + ag.w0[i].str());
    if (out.defect.val[i] != 0) all_zero = false;
  }
  for (size_t c = 0; c < tg.shape.cube_count; ++c)
    if (ag.cw[c] > tg.cw[c])
      throw property_error(
          "sublevel inclusion fails on a cube: analytic weight above the "
          "topological one");

  // level-wise component map: advance both union-finds in lockstep over the
  // integer levels; the analytic side always merges no later than the
  // topological side, so every topological component sits inside a unique
  // analytic one
  Int lo_n = ag.m_w, hi_n = tg.max_w;
  detail::DSU tdsu(tg.shape.idx.total()), adsu(ag.shape.idx.total());
  std::set<size_t> tlive, alive;
  size_t ti = 0, ai = 0;
  size_t tcubes = 0, acubes = 0;
  auto feed = [](const detail::CubeGrid& grid, const Int& n, size_t& i,
                 size_t& cubes, detail::DSU& dsu, std::set<size_t>& live) {
    const detail::GridShape& sh = grid.shape;
    while (i < grid.sorted.size() && grid.sorted[i].w <= n) {
      const detail::CubeRec& rec = grid.sorted[i];
      ++i;
      ++cubes;
      if (rec.dim == 0) {
        live.insert(sh.point_of(rec.id));
      } else if (rec.dim == 1) {
        size_t p = sh.point_of(rec.id);
        size_t v = size_t(std::countr_zero(sh.mask_of(rec.id)));
        size_t ra = dsu.find(p), rb = dsu.find(sh.idx.step(p, v));
        if (ra != rb) {
          dsu.p[std::max(ra, rb)] = std::min(ra, rb);
          live.erase(std::max(ra, rb));
        }
      }
    }
  };
  for (Int n = lo_n; n <= hi_n; n += 1) {
    feed(tg, n, ti, tcubes, tdsu, tlive);
    feed(ag, n, ai, acubes, adsu, alive);
    LevelMap lm;
    lm.n = n;
    lm.top_components = (long long)tlive.size();
    lm.an_components = (long long)alive.size();
    lm.strict = acubes > tcubes;
    std::vector<size_t> aroots(alive.begin(), alive.end());
    for (size_t root : tlive) {
      size_t ar = adsu.find(root);
      size_t j = size_t(std::lower_bound(aroots.begin(), aroots.end(), ar) -
                        aroots.begin());
      if (j == aroots.size() || aroots[j] != ar)
        throw property_error("topological component at level " + int_str(n) +
                             " does not land in an analytic component");
      lm.to.push_back(j);
    }
    out.levels.push_back(std::move(lm));
  }

  out.top_module = lattice_cohomology(top, rect, CohMode::full, workers);
  out.an_module = lattice_cohomology(an, rect, CohMode::full, workers);
  out.isomorphic = all_zero;
  if (out.isomorphic && !(out.top_module == out.an_module))
    throw property_error(
        "defect vanishes everywhere but the computed modules differ");
  return out;
}

}  // namespace latcoh
