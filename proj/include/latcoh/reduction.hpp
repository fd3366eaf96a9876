#pragma once
#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "complex.hpp"
#include "numeric.hpp"
#include "plumbing.hpp"
#include "rect.hpp"
#include "weights.hpp"

namespace latcoh {

// ---------------------------------------------------------------------------
// B-sets
//
// A vertex subset V-bar is a B-set when some uniform decrease of the Euler
// numbers on V-bar turns the graph into a rational one.  The reduction
// theorem then computes lattice cohomology from weights indexed by the
// rank-|V-bar| sublattice alone.

struct BadSet {
  std::vector<size_t> bar;  // V-bar, sorted indices into the sorted vertices
  bool user_asserted = false;
  long long decrement = 0;  // e_v -> e_v - decrement certifies rationality
};

// Outcome of the capped search for a rationalizing decrement.  `certified`
// false only ever means "undecided up to cap": a larger decrement might still
// work, so a failed search is heuristic information, never a refutation.
struct BadSetProbe {
  bool certified = false;
  long long decrement = 0;
  long long cap = 0;
  bool heuristic = false;  // set on the undecided outcome
};

struct RationalityReport {
  bool rational = false;
  IntegerCycle z_min;
  Int chi_min;
};

// Laufer/Artin criterion with its certificate spelled out.
inline RationalityReport is_rational(const PlumbingGraph& g) {
  RationalityReport out;
  out.z_min = g.z_min;
  out.chi_min = g.chi(g.z_min);
  out.rational = out.chi_min == 1;
  return out;
}

// Sufficient-only shortcut: -e_v >= valency(v) everywhere makes the ones
// vector the fundamental cycle with chi = 1, hence the graph rational.  The
// converse fails (D4 is rational with a valency-3 center at -2).
inline bool valency_dominated(const PlumbingGraph& g) {
  if (!g.qhs3()) return false;
  for (size_t v = 0; v < g.size(); ++v)
    if (-g.vertices[v].e < static_cast<long long>(g.valency(v))) return false;
  return true;
}

namespace detail {

inline std::vector<char> bar_mask(size_t n, const std::vector<size_t>& bar) {
  std::vector<char> in(n, 0);
  for (size_t v : bar) {
    if (v >= n)
      throw input_error("B-set vertex index " + std::to_string(v) +
                        " is out of range for " + std::to_string(n) +
                        " vertices");
    if (in[v])
      throw input_error("B-set lists vertex " + std::to_string(v) + " twice");
    in[v] = 1;
  }
  return in;
}

inline PlumbingGraph decremented(const PlumbingGraph& g,
                                 const std::vector<size_t>& bar, long long k) {
  std::vector<Vertex> vs = g.vertices;
  for (size_t v : bar) vs[v].e -= k;
  std::vector<std::pair<std::string, std::string>> es;
  for (auto& [a, b] : g.edges)
    es.emplace_back(g.vertices[a].id, g.vertices[b].id);
  return make_graph(std::move(vs), es);
}

}  // namespace detail

// Searches k = 0, 1, ..., cap for a decrement certifying V-bar as a B-set
// (k = 0 covers graphs that are already rational; only k = 0 can ever
// certify the empty set).
inline BadSetProbe test_bad_set(const PlumbingGraph& g,
                                const std::vector<size_t>& bar,
                                long long cap = 16) {
  detail::bar_mask(g.size(), bar);
  if (cap < 0) throw input_error("B-set search cap must be nonnegative");
  BadSetProbe out;
  out.cap = cap;
  if (g.rational_singularity()) {
    out.certified = true;
    return out;
  }
  if (!bar.empty())
    for (long long k = 1; k <= cap; ++k)
      if (detail::decremented(g, bar, k).rational_singularity()) {
        out.certified = true;
        out.decrement = k;
        return out;
      }
  out.heuristic = true;
  return out;
}

inline BadSet certify_bad_set(const PlumbingGraph& g, std::vector<size_t> bar,
                              long long cap = 16) {
  auto probe = test_bad_set(g, bar, cap);
  if (!probe.certified)
    throw input_error(
        "vertex set was not certified as a B-set within decrement cap " +
        std::to_string(cap) +
        "; raise the cap or assert the set explicitly to proceed");
  std::sort(bar.begin(), bar.end());
  return {std::move(bar), false, probe.decrement};
}

inline BadSet assert_bad_set(const PlumbingGraph& g, std::vector<size_t> bar) {
  detail::bar_mask(g.size(), bar);
  std::sort(bar.begin(), bar.end());
  return {std::move(bar), true, 0};
}

// ---------------------------------------------------------------------------
// The cycle extension x(l-bar)

namespace detail {

// Minimal closure over the complement of the B-set: add E_v for vertices v
// outside it while (x + s_h, E_v) > 0.  Coordinates on the B-set never move;
// negative definiteness guarantees termination.
inline IntegerCycle close_outside(const PlumbingGraph& g,
                                  const std::vector<char>& in_bar,
                                  const RationalCycle& s_h, IntegerCycle x) {
  auto pr = g.pairing_vector(cyc_add(to_rational(x), s_h));
  for (;;) {
    size_t v = g.size();
    for (size_t i = 0; i < g.size(); ++i)
      if (!in_bar[i] && pr[i] > 0) {
        v = i;
        break;
      }
    if (v == g.size()) break;
    x[v] += 1;
    for (auto& [w, c] : g.sparse_rows[v]) pr[w] += c;
  }
  return x;
}

inline IntegerCycle restrict_cycle(const IntegerCycle& full,
                                   const std::vector<size_t>& bar) {
  IntegerCycle out(bar.size());
  for (size_t i = 0; i < bar.size(); ++i) out[i] = full[bar[i]];
  return out;
}

// Full-lattice cycle with l-bar on the B-set and `fill` elsewhere.
inline IntegerCycle extend_cycle(const IntegerCycle& lbar,
                                 const std::vector<char>& in_bar,
                                 const std::vector<size_t>& bar,
                                 const IntegerCycle& fill) {
  IntegerCycle out = fill;
  for (size_t v = 0; v < out.size(); ++v)
    if (in_bar[v]) out[v] = 0;
  for (size_t i = 0; i < bar.size(); ++i) out[bar[i]] = lbar[i];
  return out;
}

}  // namespace detail

// x(l-bar): the smallest cycle agreeing with l-bar on the B-set whose s_h
// translate pairs nonpositively with every E_v outside it.
inline IntegerCycle x_of(const PlumbingGraph& g, const std::vector<size_t>& bar,
                         const RationalCycle& class_rep,
                         const IntegerCycle& lbar) {
  auto in_bar = detail::bar_mask(g.size(), bar);
  if (lbar.size() != bar.size())
    throw input_error("reduced cycle has " + std::to_string(lbar.size()) +
                      " coordinates, B-set has " + std::to_string(bar.size()));
  RationalCycle s_h = g.s_of(g.class_of(class_rep));
  IntegerCycle x(g.size(), Int(0));
  for (size_t i = 0; i < bar.size(); ++i) x[bar[i]] = lbar[i];
  return detail::close_outside(g, in_bar, s_h, std::move(x));
}

// ---------------------------------------------------------------------------
// Reduced weight models

// Weights of the reduction theorem, indexed by the B-set coordinates only.
// Topological source: w-bar(l-bar) = chi_k(x(l-bar)) with k = -Z_K + 2 s_h;
// unbounded, so rectangles are grown like the unreduced truncation.  Analytic
// source: a finite table derived from the Hilbert data.
struct ReducedWeightModel {
  enum class Source { topological, analytic };

  Source source = Source::topological;
  const PlumbingGraph* graph = nullptr;  // topological only
  BadSet bad;
  std::vector<char> in_bar;
  RationalCycle class_rep;        // r_h
  RationalCycle s_h;              // topological only
  RationalCycle k;                // k_r = -Z_K + 2 s_h (topological only)
  std::optional<IntTable> table;  // analytic only: w-bar on R(0, c-bar)

  // every x(l-bar) ever computed; later queries seed their Laufer run from a
  // cached neighbour one step below, whose closure sits below theirs
  mutable std::map<IntegerCycle, IntegerCycle> x_cache;

  size_t rank() const { return bad.bar.size(); }
  bool bounded() const { return table.has_value(); }

  const IntegerCycle& x(const IntegerCycle& lbar) const {
    auto it = x_cache.find(lbar);
    if (it != x_cache.end()) return it->second;
    IntegerCycle seed(graph->size(), Int(0));
    for (size_t i = 0; i < rank(); ++i) seed[bad.bar[i]] = lbar[i];
    for (size_t i = 0; i < rank(); ++i) {
      IntegerCycle prev = lbar;
      prev[i] -= 1;
      auto pit = x_cache.find(prev);
      if (pit == x_cache.end()) continue;
      seed = pit->second;
      seed[bad.bar[i]] += 1;
      break;
    }
    auto closed =
        detail::close_outside(*graph, in_bar, s_h, std::move(seed));
    return x_cache.emplace(lbar, std::move(closed)).first->second;
  }

  Int w0(const IntegerCycle& lbar) const {
    if (lbar.size() != rank())
      throw input_error("reduced cycle has " + std::to_string(lbar.size()) +
                        " coordinates, B-set has " + std::to_string(rank()));
    if (table) {
      if (!table->in(lbar))
        throw input_error(
            "reduced weight requested outside the model rectangle at " +
            cyc_str(lbar));
      return table->at(lbar);
    }
    return graph->chi_k(k, x(lbar));
  }
};

inline ReducedWeightModel reduce_topological(const PlumbingGraph& g,
                                             const BadSet& bad,
                                             const RationalCycle& class_rep) {
  g.require_qhs3("reduction");
  if (bad.bar.empty() && !g.rational_singularity())
    throw input_error("the empty B-set is only valid for rational graphs");
  ReducedWeightModel rm;
  rm.source = ReducedWeightModel::Source::topological;
  rm.graph = &g;
  rm.bad = bad;
  rm.in_bar = detail::bar_mask(g.size(), bad.bar);
  rm.class_rep = g.class_of(class_rep);
  rm.s_h = g.s_of(rm.class_rep);
  rm.k.resize(g.size());
  for (size_t v = 0; v < g.size(); ++v) rm.k[v] = 2 * rm.s_h[v] - g.z_k[v];
  return rm;
}

// ---------------------------------------------------------------------------
// Analytic reduction

// B_an certificate: h1 must vanish on every cycle E_{V-bar} + l* with l*
// effective and supported outside the set, as far as the tabulated rectangle
// reaches.  Monotonicity of h1 extends the certificate to the whole table.
inline CheckResult check_Ban(const HilbertData& d,
                             const std::vector<size_t>& bar) {
  detail::bar_mask(d.dim(), bar);
  CheckResult out{"h1 vanishes on E_Vbar + l*"};
  IntegerCycle lo(d.dim(), Int(0)), hi = d.rect().hi;
  for (size_t v : bar) {
    if (d.rect().hi[v] < 1)
      throw input_error(
          "h1 table too small to verify the B_an condition: E_Vbar leaves "
          "the rectangle at vertex " +
          std::to_string(v));
    lo[v] = 1;
    hi[v] = 1;
  }
  RectIdx idx(make_rect(lo, hi), kTableBudget);
  for (size_t i = 0; i < idx.total(); ++i) {
    IntegerCycle z = idx.point(i);
    if (d.h1.at(z) != 0) {
      out.pass = false;
      out.witness = "h1" + cyc_str(z) + " = " + d.h1.at(z).str();
      return out;
    }
  }
  return out;
}

inline ReducedWeightModel reduce_analytic(const HilbertData& d,
                                          const BadSet& bad) {
  require_hilbert_valid(d);
  if (!cyc_is_zero(d.rect().lo))
    throw input_error("analytic reduction needs Hilbert data on R(0, c)");
  IntegerCycle z_coh = cohomological_cycle(d);
  if (!cyc_le(z_coh, d.rect().hi))
    throw input_error("Hilbert rectangle is below the cohomological cycle " +
                      cyc_str(z_coh));
  auto chk = check_Ban(d, bad.bar);
  if (!chk.pass)
    throw input_error("vertex set fails the B_an condition: " + chk.witness);

  ReducedWeightModel rm;
  rm.source = ReducedWeightModel::Source::analytic;
  rm.bad = bad;
  rm.in_bar = detail::bar_mask(d.dim(), bad.bar);
  rm.class_rep = d.class_rep;

  // w-bar(l-bar) = h(l-bar extended by zeros) - h1(l-bar extended by c)
  IntegerCycle zero(d.dim(), Int(0));
  IntTable t(make_rect(detail::restrict_cycle(zero, bad.bar),
                       detail::restrict_cycle(d.rect().hi, bad.bar)));
  for (size_t i = 0; i < t.idx.total(); ++i) {
    IntegerCycle lbar = t.idx.point(i);
    IntegerCycle at_zero =
        detail::extend_cycle(lbar, rm.in_bar, bad.bar, zero);
    IntegerCycle at_c =
        detail::extend_cycle(lbar, rm.in_bar, bad.bar, d.rect().hi);
    t.val[i] = d.h.at(at_zero) - d.h1.at(at_c);
  }
  rm.table = std::move(t);
  return rm;
}

// ---------------------------------------------------------------------------
// Reduced lattice cohomology

// Dense w-bar table over `rect`, wrapped for the cube machinery.  Topological
// tables are filled in index order, so every point's Laufer run starts from a
// cached predecessor.
inline WeightModel reduced_table_model(const ReducedWeightModel& rm,
                                       const Rect& rect) {
  if (rect.dim() != rm.rank())
    throw input_error("rectangle has " + std::to_string(rect.dim()) +
                      " axes, the reduced lattice has " +
                      std::to_string(rm.rank()));
  IntTable t(rect);
  for (size_t i = 0; i < t.idx.total(); ++i)
    t.val[i] = rm.w0(t.idx.point(i));
  WeightModel m;
  m.kind = WeightModel::Kind::combinatorial;
  m.table = std::move(t);
  return m;
}

inline LatticeModule reduced_lattice_cohomology(const ReducedWeightModel& rm,
                                                const Rect& rect,
                                                CohMode mode = CohMode::full,
                                                unsigned workers = 1) {
  return lattice_cohomology(reduced_table_model(rm, rect), rect, mode,
                            workers);
}

// Reduced analogue of `truncate`: analytic tables fix their rectangle; the
// topological source grows one by face-wise doubling until every boundary
// face has cleared n_max and the requested rows stopped changing.
inline TruncateResult reduced_truncate(const ReducedWeightModel& rm,
                                       const Int& n_max,
                                       int max_doublings = 12,
                                       CohMode mode = CohMode::full,
                                       unsigned workers = 1) {
  if (rm.table) return {rm.table->rect, false, 0};
  size_t r = rm.rank();
  // rank 0 exhausts the reduced lattice with a single point: exact, not a
  // truncation heuristic
  if (r == 0) {
    IntegerCycle pt;
    return {make_rect(pt, pt), false, 0};
  }
  auto ceil_rat = [](const Rat& x) { return Int(-floor_rat(-x)); };
  IntegerCycle c(r);
  for (size_t i = 0; i < r; ++i)
    c[i] = 1 + std::max(Int(0), ceil_rat(rm.s_h[rm.bad.bar[i]]));
  IntegerCycle zero(r, Int(0));
  auto slice = [&](const LatticeModule& m) {
    std::vector<LevelRow> rows;
    for (auto& row : m.levels)
      if (row.n <= n_max) rows.push_back(row);
    return std::make_pair(m.min_weight, rows);
  };
  std::optional<LatticeModule> prev;
  for (int d = 0;; ++d) {
    if (d > max_doublings)
      throw resource_error("reduced truncation did not stabilize after " +
                           std::to_string(max_doublings) + " doublings");
    Rect rect = make_rect(zero, c);
    WeightModel model = reduced_table_model(rm, rect);
    LatticeModule mod = lattice_cohomology(model, rect, mode, workers);
    const IntTable& t = *model.table;
    std::vector<char> face_bad(r, 0);
    for (size_t i = 0; i < t.idx.total(); ++i) {
      if (t.val[i] > n_max) continue;
      auto rel = t.idx.rel(i);
      for (size_t v = 0; v < r; ++v)
        if (rel[v] + 1 == t.idx.extent(v)) face_bad[v] = 1;
    }
    bool boundary_ok = std::none_of(face_bad.begin(), face_bad.end(),
                                    [](char x) { return x; });
    if (boundary_ok && prev && slice(*prev) == slice(mod))
      return {rect, true, d};
    prev = std::move(mod);
    for (size_t v = 0; v < r; ++v)
      if (face_bad[v] || boundary_ok) c[v] *= 2;
  }
}

// ---------------------------------------------------------------------------
// Full-vs-reduced comparison

// The reduced complex spans |V-bar| axes, the full one |V|, so matching rows
// means matching after dropping trailing all-zero degrees.
inline LatticeModule normalize_degrees(LatticeModule m) {
  size_t nq = 1;
  auto bump = [&](size_t q) { nq = std::max(nq, q + 1); };
  for (size_t q = 0; q < m.reduced_ranks.size(); ++q)
    if (m.reduced_ranks[q] != 0) bump(q);
  for (auto& row : m.levels) {
    for (size_t q = 0; q < row.betti.size(); ++q)
      if (row.betti[q] != 0) bump(q);
    for (size_t q = 0; q < row.u_rank.size(); ++q)
      if (row.u_rank[q] != 0) bump(q);
    for (size_t q = 0; q < row.torsion.size(); ++q)
      if (!row.torsion[q].empty()) bump(q);
  }
  m.reduced_ranks.resize(nq, 0);
  for (auto& row : m.levels) {
    row.betti.resize(nq, 0);
    row.u_rank.resize(nq, 0);
    row.torsion.resize(nq);
  }
  return m;
}

struct ReductionComparison {
  LatticeModule full, reduced;
  bool equal = false;
  Int n_max;  // both modules settled strictly below this level
};

// Verify-mode cross-check of the reduction theorem for one class.  The level
// threshold rises until both computed modules end in a stabilized row below
// it, so the equality statement covers every nontrivial level.
inline ReductionComparison compare_reduction(const PlumbingGraph& g,
                                             const BadSet& bad,
                                             const RationalCycle& class_rep,
                                             unsigned workers = 1) {
  RationalCycle r = g.class_of(class_rep);
  ReducedWeightModel rm = reduce_topological(g, bad, r);
  WeightModel full = topo_weight(g, rm.k);
  Int n_max = 1;
  for (int round = 0; round < 8; ++round) {
    auto tf = truncate(full, n_max, 12, CohMode::full, workers);
    auto mf = lattice_cohomology(full, tf.rect, CohMode::full, workers);
    auto tr = reduced_truncate(rm, n_max, 12, CohMode::full, workers);
    auto mr = reduced_lattice_cohomology(rm, tr.rect, CohMode::full, workers);
    Int top = std::max(mf.levels.back().n, mr.levels.back().n);
    if (top < n_max) {
      ReductionComparison out{normalize_degrees(std::move(mf)),
                              normalize_degrees(std::move(mr)), false, n_max};
      out.equal = out.full == out.reduced;
      return out;
    }
    n_max = top + 2;
  }
  throw resource_error(
      "full vs reduced comparison did not settle below a rising level "
      "threshold");
}

}  // namespace latcoh
