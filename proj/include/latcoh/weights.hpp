#pragma once
#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "numeric.hpp"
#include "plumbing.hpp"
#include "rect.hpp"

namespace latcoh {

inline constexpr size_t kTableBudget = size_t(1) << 25;

// Dense integer-valued table over the lattice points of a Rect.
struct IntTable {
  Rect rect;
  RectIdx idx;
  std::vector<Int> val;

  explicit IntTable(Rect r)
      : rect(std::move(r)), idx(rect, kTableBudget), val(idx.total()) {}

  Int& at(const IntegerCycle& l) { return val[idx.index(l)]; }
  const Int& at(const IntegerCycle& l) const { return val[idx.index(l)]; }
  bool in(const IntegerCycle& l) const { return rect.contains(l); }
};

// Outcome of one validator run.  `witness` pins the offending lattice
// point(s) when the check fails; `sampled` marks a randomized (heuristic)
// pass.
struct CheckResult {
  std::string check;
  bool pass = true;
  std::string witness;
  bool sampled = false;
  unsigned long long pairs_checked = 0;

  CheckResult() = default;
  explicit CheckResult(std::string name) : check(std::move(name)) {}
};

namespace detail {

inline IntegerCycle cyc_min(const IntegerCycle& a, const IntegerCycle& b) {
  IntegerCycle out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = std::min(a[i], b[i]);
  return out;
}

inline IntegerCycle cyc_max(const IntegerCycle& a, const IntegerCycle& b) {
  IntegerCycle out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = std::max(a[i], b[i]);
  return out;
}

}  // namespace detail

// Monotonicity along every lattice edge of the rectangle.
inline CheckResult check_monotone(const IntTable& t, bool nondecreasing,
                                  const std::string& name) {
  CheckResult out{name + (nondecreasing ? " nondecreasing" : " nonincreasing")};
  for (size_t i = 0; i < t.idx.total(); ++i) {
    auto c = t.idx.rel(i);
    for (size_t v = 0; v < t.idx.dim(); ++v) {
      if (c[v] + 1 >= t.idx.extent(v)) continue;
      Int diff = t.val[t.idx.step(i, v)] - t.val[i];
      bool bad = nondecreasing ? diff < 0 : diff > 0;
      if (bad) {
        out.pass = false;
        out.witness = "at " + cyc_str(t.idx.point(i)) + " step in coordinate " +
                      std::to_string(v);
        return out;
      }
    }
  }
  return out;
}

// Matroid rank inequality h(l1) + h(l2) >= h(min) + h(max); the `opposite`
// flag flips it (for h^1 tables).  Exhaustive when the pair count stays under
// max_pairs, otherwise a seeded random sample (reported as sampled).
inline CheckResult check_matroid(const IntTable& t, bool opposite = false,
                                 unsigned long long max_pairs = 1000000,
                                 unsigned seed = 0) {
  CheckResult out{opposite ? "opposite matroid inequality"
                           : "matroid inequality"};
  size_t n = t.idx.total();
  auto test_pair = [&](size_t i, size_t j) -> bool {
    auto a = t.idx.point(i), b = t.idx.point(j);
    Int lhs = t.val[i] + t.val[j];
    Int rhs = t.at(detail::cyc_min(a, b)) + t.at(detail::cyc_max(a, b));
    bool bad = opposite ? lhs > rhs : lhs < rhs;
    if (bad) {
      out.pass = false;
      out.witness = "pair " + cyc_str(a) + ", " + cyc_str(b);
    }
    return !bad;
  };
  unsigned long long total =
      static_cast<unsigned long long>(n) * static_cast<unsigned long long>(n);
  if (total <= max_pairs) {
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j) {
        ++out.pairs_checked;
        if (!test_pair(i, j)) return out;
      }
  } else {
    out.sampled = true;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<size_t> pick(0, n - 1);
    for (unsigned long long s = 0; s < max_pairs; ++s) {
      ++out.pairs_checked;
      if (!test_pair(pick(rng), pick(rng))) return out;
    }
  }
  return out;
}

// Stability: h(l) = h(l+E_v) implies h(l+lbar) = h(l+lbar+E_v) whenever lbar
// avoids coordinate v.  Checking single steps lbar = E_w suffices: zeros of
// the v-difference propagate upward one coordinate at a time.
inline CheckResult check_stability(const IntTable& t) {
  CheckResult out{"stability"};
  for (size_t i = 0; i < t.idx.total(); ++i) {
    auto c = t.idx.rel(i);
    for (size_t v = 0; v < t.idx.dim(); ++v) {
      if (c[v] + 1 >= t.idx.extent(v)) continue;
      if (t.val[t.idx.step(i, v)] != t.val[i]) continue;
      for (size_t w = 0; w < t.idx.dim(); ++w) {
        if (w == v || c[w] + 1 >= t.idx.extent(w)) continue;
        size_t j = t.idx.step(i, w);
        if (t.val[t.idx.step(j, v)] != t.val[j]) {
          out.pass = false;
          out.witness = "h levels off at " + cyc_str(t.idx.point(i)) +
                        " in coordinate " + std::to_string(v) +
                        " but not after adding E_" + std::to_string(w);
          return out;
        }
      }
    }
  }
  return out;
}

// Combinatorial Duality Property: for no lattice edge (l, l+E_v) are the
// increment of h and the decrement of h-circ both nonzero.
inline CheckResult check_cdp(const IntTable& h, const IntTable& hc) {
  CheckResult out{"combinatorial duality property"};
  if (h.idx.total() != hc.idx.total() || !(h.rect.lo == hc.rect.lo) ||
      !(h.rect.hi == hc.rect.hi))
    throw input_error("CDP check needs h and h-circ on the same rectangle");
  for (size_t i = 0; i < h.idx.total(); ++i) {
    auto c = h.idx.rel(i);
    for (size_t v = 0; v < h.idx.dim(); ++v) {
      if (c[v] + 1 >= h.idx.extent(v)) continue;
      size_t j = h.idx.step(i, v);
      if (h.val[j] != h.val[i] && hc.val[i] != hc.val[j]) {
        out.pass = false;
        out.witness = "both jump at " + cyc_str(h.idx.point(i)) +
                      " in coordinate " + std::to_string(v);
        return out;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hilbert data

// Tabulated analytic input for one class h: the Hilbert function values
// hh(l) and the twisted h^1(O_l(-r_h)) on R(0,c), plus p_g,h.
struct HilbertData {
  RationalCycle class_rep;  // r_h, coordinates in [0,1)
  IntTable h;
  IntTable h1;
  Int p_gh = 0;

  size_t dim() const { return class_rep.size(); }
  const Rect& rect() const { return h.rect; }
};

inline std::vector<CheckResult> validate_hilbert(
    const HilbertData& d, unsigned long long max_pairs = 1000000,
    unsigned seed = 0) {
  std::vector<CheckResult> out;
  IntegerCycle zero(d.dim(), Int(0));

  CheckResult base{"h(0) = 0"};
  if (d.h.at(zero) != 0) {
    base.pass = false;
    base.witness = "h(0) = " + d.h.at(zero).str();
  }
  out.push_back(base);

  CheckResult h1zero{"h1(0) = 0"};
  if (d.h1.at(zero) != 0) {
    h1zero.pass = false;
    h1zero.witness = "h1(0) = " + d.h1.at(zero).str();
  }
  out.push_back(h1zero);

  out.push_back(check_monotone(d.h, true, "h"));
  out.push_back(check_matroid(d.h, false, max_pairs, seed));
  out.push_back(check_monotone(d.h1, true, "h1"));
  out.push_back(check_matroid(d.h1, true, max_pairs, seed));

  CheckResult bounds{"0 <= h1 <= p_gh"};
  for (size_t i = 0; i < d.h1.idx.total() && bounds.pass; ++i) {
    if (d.h1.val[i] < 0 || d.h1.val[i] > d.p_gh) {
      bounds.pass = false;
      bounds.witness = "h1" + cyc_str(d.h1.idx.point(i)) + " = " +
                       d.h1.val[i].str() + ", p_gh = " + d.p_gh.str();
    }
  }
  out.push_back(bounds);

  CheckResult attain{"h1 attains p_gh at c"};
  if (d.h1.at(d.rect().hi) != d.p_gh) {
    attain.pass = false;
    attain.witness = "h1(c) = " + d.h1.at(d.rect().hi).str() + ", p_gh = " +
                     d.p_gh.str();
  }
  out.push_back(attain);

  CheckResult pg{"p_gh matches max of h1"};
  Int mx = 0;
  for (auto& v : d.h1.val) mx = std::max(mx, v);
  if (mx != d.p_gh) {
    pg.pass = false;
    pg.witness = "max h1 = " + mx.str() + ", declared p_gh = " + d.p_gh.str();
  }
  out.push_back(pg);
  return out;
}

inline void require_hilbert_valid(const HilbertData& d,
                                  unsigned long long max_pairs = 1000000,
                                  unsigned seed = 0) {
  for (auto& r : validate_hilbert(d, max_pairs, seed))
    if (!r.pass)
      throw property_error("Hilbert data fails check '" + r.check + "' (" +
                           r.witness + ")");
}

// Z_coh: componentwise minimum of the set where h^1 attains p_gh, which that
// set must itself contain; zero cycle when p_gh = 0.
inline IntegerCycle cohomological_cycle(const HilbertData& d) {
  IntegerCycle zero(d.dim(), Int(0));
  if (d.p_gh == 0) return zero;
  std::optional<IntegerCycle> mn;
  for (size_t i = 0; i < d.h1.idx.total(); ++i) {
    if (d.h1.val[i] != d.p_gh) continue;
    auto p = d.h1.idx.point(i);
    mn = mn ? detail::cyc_min(*mn, p) : p;
  }
  if (!mn)
    throw property_error(
        "h1 never attains p_gh inside the rectangle; Z_coh undefined");
  if (d.h1.at(*mn) != d.p_gh)
    throw property_error(
        "attainment set of p_gh has no minimum: its componentwise lower "
        "bound " +
        cyc_str(*mn) + " does not attain p_gh");
  return *mn;
}

// ---------------------------------------------------------------------------
// Weight models

// A weight model assigns w0 to lattice points; cubes get the maximum over
// their vertices.  Topological models evaluate chi_k anywhere; table-backed
// models (combinatorial and analytic) live on R(0,c).
struct WeightModel {
  enum class Kind { topological, combinatorial, analytic };

  Kind kind = Kind::topological;
  const PlumbingGraph* graph = nullptr;  // topological only
  RationalCycle k;                       // topological only
  std::optional<IntTable> table;         // dense w0 for table-backed models
  std::optional<IntegerCycle> z_coh;     // analytic only: cohomological cycle

  bool bounded() const { return table.has_value(); }
  const Rect& domain() const { return table->rect; }

  Int w0(const IntegerCycle& l) const {
    if (table) {
      if (!table->in(l))
        throw input_error("weight requested outside the model rectangle at " +
                          cyc_str(l));
      return table->at(l);
    }
    return graph->chi_k(k, l);
  }

  // Weight of the cube spanned at l along the axes listed in `axes`.
  Int w_cube(const IntegerCycle& l, const std::vector<size_t>& axes) const {
    Int best = w0(l);
    size_t m = axes.size();
    for (size_t mask = 1; mask < (size_t(1) << m); ++mask) {
      IntegerCycle p = l;
      for (size_t b = 0; b < m; ++b)
        if (mask & (size_t(1) << b)) p[axes[b]] += 1;
      best = std::max(best, w0(p));
    }
    return best;
  }
};

inline WeightModel topo_weight(const PlumbingGraph& g, RationalCycle k) {
  if (!g.is_characteristic(k))
    throw input_error("topological weights need a characteristic element; " +
                      cyc_str(k) + " is not one");
  WeightModel m;
  m.kind = WeightModel::Kind::topological;
  m.graph = &g;
  m.k = std::move(k);
  return m;
}

inline WeightModel combinatorial_weight(const IntTable& h,
                                        const IntTable& hc) {
  if (h.idx.total() != hc.idx.total() || !(h.rect.lo == hc.rect.lo) ||
      !(h.rect.hi == hc.rect.hi))
    throw input_error(
        "combinatorial weights need h and h-circ on the same rectangle");
  IntegerCycle zero(h.rect.dim(), Int(0));
  if (h.at(zero) != 0)
    throw property_error("combinatorial h must vanish at 0, got " +
                         h.at(zero).str());
  auto mono = check_monotone(h, true, "h");
  if (!mono.pass) throw property_error("combinatorial h not monotone: " +
                                       mono.witness);
  auto mono2 = check_monotone(hc, false, "h-circ");
  if (!mono2.pass)
    throw property_error("combinatorial h-circ not monotone: " + mono2.witness);

  WeightModel m;
  m.kind = WeightModel::Kind::combinatorial;
  IntTable w(h.rect);
  Int base = hc.at(zero);
  for (size_t i = 0; i < h.idx.total(); ++i)
    w.val[i] = h.val[i] + hc.val[i] - base;
  m.table = std::move(w);
  return m;
}

inline WeightModel analytic_weight(const HilbertData& d,
                                   unsigned long long max_pairs = 1000000,
                                   unsigned seed = 0) {
  require_hilbert_valid(d, max_pairs, seed);
  WeightModel m;
  m.kind = WeightModel::Kind::analytic;
  IntTable w(d.rect());
  for (size_t i = 0; i < d.h.idx.total(); ++i)
    w.val[i] = d.h.val[i] - d.h1.val[i];
  m.table = std::move(w);
  m.z_coh = cohomological_cycle(d);
  return m;
}

// h^sym(l) = h(c - l), a valid h-circ for any admissible h.
inline IntTable symmetric_dual(const IntTable& h) {
  IntTable out(h.rect);
  for (size_t i = 0; i < h.idx.total(); ++i) {
    auto p = h.idx.point(i);
    IntegerCycle q(p.size());
    for (size_t v = 0; v < p.size(); ++v)
      q[v] = h.rect.lo[v] + h.rect.hi[v] - p[v];
    out.val[i] = h.at(q);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Series slices

// Finitely supported coefficient map on `support`, with coefficients
// guaranteed valid only on `window` (stencil operations shrink it; an absent
// window means it is empty).
struct SeriesSlice {
  Rect support;
  std::optional<Rect> window;
  std::map<IntegerCycle, Int> coeff;  // zero coefficients omitted

  Int at(const IntegerCycle& l) const {
    auto it = coeff.find(l);
    return it == coeff.end() ? Int(0) : it->second;
  }
};

namespace detail {
// window {l : l + E inside r}; empty when some extent is 1
inline std::optional<Rect> shrink_window(const Rect& r) {
  IntegerCycle hi = r.hi;
  for (size_t v = 0; v < hi.size(); ++v) {
    hi[v] -= 1;
    if (hi[v] < r.lo[v]) return std::nullopt;
  }
  return make_rect(r.lo, hi);
}
}  // namespace detail

// Finite-difference stencil of the inclusion-exclusion relation between the
// Hilbert and Poincare series: p(l) = sum_I (-1)^{|I|+1} h(l + E_I), valid
// where the full stencil fits inside the table.
inline SeriesSlice poincare_from_hilbert(const IntTable& h) {
  SeriesSlice out;
  out.support = h.rect;
  out.window = detail::shrink_window(h.rect);
  if (!out.window) return out;
  RectIdx widx(*out.window, kTableBudget);
  size_t n = h.rect.dim();
  for (size_t i = 0; i < widx.total(); ++i) {
    IntegerCycle l = widx.point(i);
    Int acc = 0;
    for (size_t mask = 0; mask < (size_t(1) << n); ++mask) {
      IntegerCycle p = l;
      int bits = 0;
      for (size_t v = 0; v < n; ++v)
        if (mask & (size_t(1) << v)) {
          p[v] += 1;
          ++bits;
        }
      Int term = h.at(p);
      acc += (bits % 2 == 1) ? term : -term;
    }
    if (acc != 0) out.coeff[l] = acc;
  }
  return out;
}

// Per-point alternating sum of cube weights,
//   sum_I (-1)^{|I|+1} w((l, I)),
// over the window where every cube at l fits in the model's rectangle.
inline SeriesSlice weighted_cube_series(const WeightModel& m,
                                        const Rect& rect) {
  if (m.bounded() &&
      (!cyc_le(m.domain().lo, rect.lo) || !cyc_le(rect.hi, m.domain().hi)))
    throw input_error("series rectangle exceeds the weight model's domain");
  SeriesSlice out;
  out.support = rect;
  out.window = detail::shrink_window(rect);
  if (!out.window) return out;
  RectIdx widx(*out.window, kTableBudget);
  size_t n = rect.dim();
  std::vector<size_t> all_axes(n);
  for (size_t v = 0; v < n; ++v) all_axes[v] = v;
  for (size_t i = 0; i < widx.total(); ++i) {
    IntegerCycle l = widx.point(i);
    Int acc = 0;
    for (size_t mask = 0; mask < (size_t(1) << n); ++mask) {
      std::vector<size_t> axes;
      int bits = 0;
      for (size_t v = 0; v < n; ++v)
        if (mask & (size_t(1) << v)) {
          axes.push_back(v);
          ++bits;
        }
      Int w = m.w_cube(l, axes);
      acc += (bits % 2 == 1) ? w : -w;
    }
    if (acc != 0) out.coeff[l] = acc;
  }
  return out;
}

}  // namespace latcoh
