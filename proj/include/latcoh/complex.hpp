#pragma once
#include <algorithm>
#include <bit>
#include <cstdint>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "linalg.hpp"
#include "numeric.hpp"
#include "rect.hpp"
#include "weights.hpp"

namespace latcoh {

inline constexpr size_t kCubeBudget = size_t(1) << 21;
inline constexpr size_t kCoreBudget = 1024;
inline constexpr long long kLevelSpanBudget = 200000;
inline constexpr unsigned long long kCollapseWorkBudget = 3000000000ULL;

// ---------------------------------------------------------------------------
// Cubes of a rectangle.  A q-cube is a base point l plus a set I of q spanned
// directions, encoded as id = (point_index << s) | direction_mask.

namespace detail {

struct GridShape {
  Rect rect;
  RectIdx idx;
  size_t s;
  std::vector<uint32_t> up;    // directions with room above the point
  std::vector<uint32_t> down;  // directions with room below
  std::vector<size_t> offset;  // packed cube slots, one block per point
  size_t cube_count = 0;

  explicit GridShape(const Rect& r)
      : rect(r), idx(rect, kTableBudget), s(r.dim()) {
    if (s >= 20) throw resource_error("rectangles beyond 20 axes unsupported");
    size_t n = idx.total();
    up.assign(n, 0);
    down.assign(n, 0);
    offset.assign(n + 1, 0);
    for (size_t p = 0; p < n; ++p) {
      auto c = idx.rel(p);
      uint32_t u = 0, d = 0;
      for (size_t v = 0; v < s; ++v) {
        if (c[v] + 1 < idx.extent(v)) u |= uint32_t(1) << v;
        if (c[v] > 0) d |= uint32_t(1) << v;
      }
      up[p] = u;
      down[p] = d;
      offset[p + 1] = offset[p] + (size_t(1) << std::popcount(u));
    }
    cube_count = offset[n];
    if (cube_count > kCubeBudget)
      throw resource_error("cube complex too large: " +
                           std::to_string(cube_count) + " cubes");
  }

  uint64_t cube_id(size_t p, uint32_t mask) const {
    return (uint64_t(p) << s) | mask;
  }
  size_t point_of(uint64_t id) const { return size_t(id >> s); }
  uint32_t mask_of(uint64_t id) const {
    return uint32_t(id & ((uint64_t(1) << s) - 1));
  }
  bool valid(uint64_t id) const {
    size_t p = point_of(id);
    return p < idx.total() && (mask_of(id) & ~up[p]) == 0;
  }

  // packed slot: rank of the mask among subsets of up[p]
  size_t slot(size_t p, uint32_t mask) const {
    uint32_t a = up[p];
    size_t r = 0, bit = 0;
    while (a) {
      uint32_t low = a & (~a + 1);
      if (mask & low) r |= size_t(1) << bit;
      ++bit;
      a ^= low;
    }
    return offset[p] + r;
  }
  size_t slot_id(uint64_t id) const { return slot(point_of(id), mask_of(id)); }

  // codimension-1 faces with boundary signs:
  //   d(l, I) = sum_j (-1)^{j-1} [ (l+E_{v_j}, I\v_j) - (l, I\v_j) ]
  void facets(uint64_t id, std::vector<std::pair<uint64_t, int>>& out) const {
    out.clear();
    size_t p = point_of(id);
    uint32_t mask = mask_of(id);
    int j = 0;
    for (size_t v = 0; v < s; ++v) {
      uint32_t bit = uint32_t(1) << v;
      if (!(mask & bit)) continue;
      ++j;
      int sign = (j % 2 == 1) ? 1 : -1;
      uint32_t rest = mask ^ bit;
      out.emplace_back(cube_id(idx.step(p, v), rest), sign);
      out.emplace_back(cube_id(p, rest), -sign);
    }
  }

  void cofaces(uint64_t id, std::vector<uint64_t>& out) const {
    out.clear();
    size_t p = point_of(id);
    uint32_t mask = mask_of(id);
    for (size_t v = 0; v < s; ++v) {
      uint32_t bit = uint32_t(1) << v;
      if (mask & bit) continue;
      if (up[p] & bit) out.push_back(cube_id(p, mask | bit));
      if (down[p] & bit) out.push_back(cube_id(p - idx.stride(v), mask | bit));
    }
  }
};

struct CubeRec {
  Int w;
  uint64_t id;
  int dim;
};

inline bool cube_order(const CubeRec& a, const CubeRec& b) {
  if (a.w != b.w) return a.w < b.w;
  if (a.dim != b.dim) return a.dim < b.dim;
  return a.id < b.id;
}

// Vertex weights over the rectangle.  Table models are read off directly;
// topological chi_k is filled by an incremental odometer using
//   chi_k(l + t E_a) = chi_k(l) - t (l, E_a) - (t^2 e_a + t (E_a, k)) / 2.
inline std::vector<Int> fill_w0(const WeightModel& m, const Rect& rect,
                                const RectIdx& idx) {
  size_t total = idx.total();
  std::vector<Int> w(total);
  if (m.table) {
    const Rect& dom = m.domain();
    if (!cyc_le(dom.lo, rect.lo) || !cyc_le(rect.hi, dom.hi))
      throw input_error("rectangle exceeds the weight model's domain");
    for (size_t i = 0; i < total; ++i) w[i] = m.table->at(idx.point(i));
    return w;
  }
  const PlumbingGraph& g = *m.graph;
  size_t s = rect.dim();
  if (s != g.size())
    throw input_error("rectangle dimension must match the plumbing graph");
  std::vector<long long> e(s);
  std::vector<Int> kE(s);
  for (size_t v = 0; v < s; ++v) {
    e[v] = g.vertices[v].e;
    Rat acc = 0;
    for (auto& [u, c] : g.sparse_rows[v]) acc += Rat(c) * m.k[u];
    kE[v] = numer(acc);  // integral: k lies in the dual lattice
  }
  std::vector<Int> P(s, Int(0));  // P[v] = (l, E_v)
  for (size_t v = 0; v < s; ++v)
    for (auto& [u, c] : g.sparse_rows[v]) P[v] += c * rect.lo[u];
  Int chi = g.chi_k(m.k, rect.lo);
  auto advance = [&](size_t a, long long t) {
    Int tt = t;
    chi -= tt * P[a] + (tt * (tt * e[a] + kE[a])) / 2;
    for (auto& [u, c] : g.sparse_rows[a]) P[u] += tt * c;
  };
  std::vector<long long> rel(s, 0);
  w[0] = chi;
  for (size_t i = 1; i < total; ++i) {
    size_t ax = s - 1;
    while (rel[ax] + 1 == idx.extent(ax)) {
      advance(ax, -rel[ax]);
      rel[ax] = 0;
      --ax;
    }
    advance(ax, 1);
    ++rel[ax];
    w[i] = chi;
  }
  return w;
}

struct CubeGrid {
  GridShape shape;
  std::vector<Int> w0;           // per point
  std::vector<Int> cw;           // per packed cube slot
  std::vector<CubeRec> sorted;   // all cubes by (w, dim, id)
  Int eu_sum = 0;                // sum over cubes of (-1)^{q+1} w
  Int m_w = 0, max_w = 0;
};

inline CubeGrid build_grid(const WeightModel& model, const Rect& rect) {
  CubeGrid g{GridShape(rect), {}, {}, {}, Int(0), Int(0), Int(0)};
  const GridShape& sh = g.shape;
  g.w0 = fill_w0(model, rect, sh.idx);
  size_t n = sh.idx.total();
  g.cw.assign(sh.cube_count, Int(0));
  // cube weight = max of vertex weights, by sharing faces: points descending
  // so the +E_v neighbour is already done, masks ascending within a point
  for (size_t p = n; p-- > 0;) {
    uint32_t av = sh.up[p];
    uint32_t sub = 0;
    while (true) {
      if (sub == 0) {
        g.cw[sh.slot(p, 0)] = g.w0[p];
      } else {
        uint32_t low = sub & (~sub + 1);
        size_t v = size_t(std::countr_zero(low));
        uint32_t rest = sub ^ low;
        const Int& a = g.cw[sh.slot(p, rest)];
        const Int& b = g.cw[sh.slot(sh.idx.step(p, v), rest)];
        g.cw[sh.slot(p, sub)] = std::max(a, b);
      }
      if (sub == av) break;
      sub = (sub - av) & av;
    }
  }
  g.sorted.reserve(sh.cube_count);
  for (size_t p = 0; p < n; ++p) {
    uint32_t av = sh.up[p];
    uint32_t sub = 0;
    while (true) {
      const Int& w = g.cw[sh.slot(p, sub)];
      int dim = std::popcount(sub);
      g.sorted.push_back({w, sh.cube_id(p, sub), dim});
      if (dim % 2 == 1)
        g.eu_sum += w;
      else
        g.eu_sum -= w;
      if (sub == av) break;
      sub = (sub - av) & av;
    }
  }
  std::sort(g.sorted.begin(), g.sorted.end(), cube_order);
  g.m_w = g.sorted.front().w;
  g.max_w = g.sorted.back().w;
  return g;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Sublevel complexes and their integral cohomology

struct SublevelComplex {
  Rect rect;
  Int level;
  std::vector<uint64_t> cubes;  // sorted ids, face-closed
};

inline SublevelComplex build_sublevel(const WeightModel& model,
                                      const Rect& rect, const Int& n) {
  auto grid = detail::build_grid(model, rect);
  SublevelComplex out{rect, n, {}};
  for (auto& rec : grid.sorted)
    if (rec.w <= n) out.cubes.push_back(rec.id);
  std::sort(out.cubes.begin(), out.cubes.end());
  return out;
}

namespace detail {

inline bool face_closed(const GridShape& sh,
                        const std::vector<uint64_t>& cubes) {
  std::vector<char> present(sh.cube_count, 0);
  for (auto id : cubes) present[sh.slot_id(id)] = 1;
  std::vector<std::pair<uint64_t, int>> f;
  for (auto id : cubes) {
    sh.facets(id, f);
    for (auto& [fid, sgn] : f)
      if (!present[sh.slot_id(fid)]) return false;
  }
  return true;
}

// Elementary collapses: a cell with exactly one codimension-1 coface has no
// higher coface either, so the pair can be removed without changing the
// homotopy type and the remainder is again a subcomplex.  Cells are processed
// in ascending id order for deterministic output.
inline std::vector<uint64_t> collapse_core(const GridShape& sh,
                                           const std::vector<uint64_t>& cubes) {
  std::vector<char> present(sh.cube_count, 0);
  for (auto id : cubes) present[sh.slot_id(id)] = 1;
  std::vector<int> cnt(sh.cube_count, 0);
  std::vector<uint64_t> cof;
  for (auto id : cubes) {
    sh.cofaces(id, cof);
    int c = 0;
    for (auto cid : cof)
      if (present[sh.slot_id(cid)]) ++c;
    cnt[sh.slot_id(id)] = c;
  }
  std::set<uint64_t> work;
  for (auto id : cubes)
    if (cnt[sh.slot_id(id)] == 1) work.insert(id);
  std::vector<std::pair<uint64_t, int>> f;
  auto drop_faces = [&](uint64_t cell, uint64_t skip) {
    sh.facets(cell, f);
    for (auto& [fid, sgn] : f) {
      if (fid == skip) continue;
      size_t fs = sh.slot_id(fid);
      if (!present[fs]) continue;
      if (--cnt[fs] == 1) work.insert(fid);
    }
  };
  while (!work.empty()) {
    uint64_t sigma = *work.begin();
    work.erase(work.begin());
    size_t ss = sh.slot_id(sigma);
    if (!present[ss] || cnt[ss] != 1) continue;
    uint64_t tau = 0;
    sh.cofaces(sigma, cof);
    for (auto cid : cof)
      if (present[sh.slot_id(cid)]) {
        tau = cid;
        break;
      }
    present[ss] = 0;
    present[sh.slot_id(tau)] = 0;
    drop_faces(tau, sigma);
    drop_faces(sigma, ~uint64_t(0));
  }
  std::vector<uint64_t> out;
  for (auto id : cubes)
    if (present[sh.slot_id(id)]) out.push_back(id);
  return out;
}

}  // namespace detail

struct CohRow {
  std::vector<long long> betti;             // per degree q
  std::vector<std::vector<Int>> torsion;    // per degree q, factors > 1
  bool operator==(const CohRow&) const = default;
};

namespace detail {

// Integral cohomology of a (collapsed) subcomplex via Smith normal form of
// its boundary matrices.  By universal coefficients the cohomological Betti
// numbers equal the homological ones and torsion of H^q equals that of
// H_{q-1}, which the invariant factors of the q-th boundary matrix report.
inline CohRow core_cohomology(const GridShape& sh,
                              const std::vector<uint64_t>& cells) {
  size_t s = sh.s;
  CohRow out;
  out.betti.assign(s + 1, 0);
  out.torsion.assign(s + 1, {});
  std::vector<std::vector<uint64_t>> byd(s + 1);
  for (auto id : cells) byd[std::popcount(sh.mask_of(id))].push_back(id);
  std::vector<std::unordered_map<uint64_t, size_t>> local(s + 1);
  for (size_t q = 0; q <= s; ++q) {
    if (byd[q].size() > kCoreBudget)
      throw resource_error("sublevel complex still has " +
                           std::to_string(byd[q].size()) +
                           " cells of dimension " + std::to_string(q) +
                           " after collapsing");
    for (size_t i = 0; i < byd[q].size(); ++i) local[q][byd[q][i]] = i;
  }
  std::vector<size_t> rank(s + 2, 0);
  std::vector<std::pair<uint64_t, int>> f;
  for (size_t q = 1; q <= s; ++q) {
    size_t nr = byd[q - 1].size(), nc = byd[q].size();
    if (nr == 0 || nc == 0) continue;
    IMatrix M;
    M.rows = nr;
    M.cols = nc;
    M.a.assign(nr * nc, Int(0));
    for (size_t j = 0; j < nc; ++j) {
      sh.facets(byd[q][j], f);
      for (auto& [fid, sgn] : f) M.at(local[q - 1].at(fid), j) += sgn;
    }
    auto snf = smith_normal_form(M);
    rank[q] = snf.rank;
    for (auto& d : snf.factors)
      if (d > 1) out.torsion[q].push_back(d);
  }
  for (size_t q = 0; q <= s; ++q)
    out.betti[q] = static_cast<long long>(byd[q].size()) -
                   static_cast<long long>(rank[q]) -
                   static_cast<long long>(rank[q + 1]);
  return out;
}

}  // namespace detail

inline CohRow cohomology(const SublevelComplex& S, bool use_collapse = true) {
  detail::GridShape sh(S.rect);
  for (auto id : S.cubes)
    if (!sh.valid(id))
      throw input_error("cube id does not belong to the rectangle");
  if (!detail::face_closed(sh, S.cubes))
    throw input_error("sublevel complex must be closed under taking faces");
  auto core = use_collapse ? detail::collapse_core(sh, S.cubes) : S.cubes;
  return detail::core_cohomology(sh, core);
}

// ---------------------------------------------------------------------------
// Persistence of the weight filtration (rational ranks and restriction maps)

namespace detail {

struct Interval {
  Int birth;
  std::optional<Int> death;  // absent: survives to the top
};

inline void add_scaled(std::vector<std::pair<size_t, Rat>>& a,
                       const std::vector<std::pair<size_t, Rat>>& b,
                       const Rat& f) {
  std::vector<std::pair<size_t, Rat>> out;
  out.reserve(a.size() + b.size());
  size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      Rat v = f * b[j].second;
      if (v != 0) out.emplace_back(b[j].first, std::move(v));
      ++j;
    } else {
      Rat v = a[i].second + f * b[j].second;
      if (v != 0) out.emplace_back(a[i].first, std::move(v));
      ++i;
      ++j;
    }
  }
  a = std::move(out);
}

// Standard column reduction of the filtered boundary matrix, one dimension at
// a time from the top so that paired birth columns can be cleared.  Works
// over Q; ranks agree with the integral ones.
inline std::vector<std::vector<Interval>> persistence_intervals(
    const CubeGrid& g) {
  const GridShape& sh = g.shape;
  std::vector<size_t> pos(sh.cube_count, 0);
  for (size_t i = 0; i < g.sorted.size(); ++i)
    pos[sh.slot_id(g.sorted[i].id)] = i;
  std::vector<char> positive(sh.cube_count, 0), cleared(sh.cube_count, 0),
      has_death(sh.cube_count, 0);
  std::vector<Int> death(sh.cube_count);
  for (auto& rec : g.sorted)
    if (rec.dim == 0) positive[sh.slot_id(rec.id)] = 1;
  using Col = std::vector<std::pair<size_t, Rat>>;
  std::vector<std::pair<uint64_t, int>> f;
  for (int q = int(sh.s); q >= 1; --q) {
    std::vector<Col> stored;
    std::unordered_map<size_t, size_t> pivot;
    for (auto& rec : g.sorted) {
      if (rec.dim != q) continue;
      size_t sl = sh.slot_id(rec.id);
      if (cleared[sl]) {
        positive[sl] = 1;
        continue;
      }
      Col col;
      sh.facets(rec.id, f);
      for (auto& [fid, sgn] : f)
        col.emplace_back(pos[sh.slot_id(fid)], Rat(sgn));
      std::sort(col.begin(), col.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      while (!col.empty()) {
        auto it = pivot.find(col.back().first);
        if (it == pivot.end()) break;
        const Col& owner = stored[it->second];
        add_scaled(col, owner, -col.back().second / owner.back().second);
      }
      if (col.empty()) {
        positive[sl] = 1;
        continue;
      }
      size_t low = col.back().first;
      pivot.emplace(low, stored.size());
      stored.push_back(std::move(col));
      size_t rsl = sh.slot_id(g.sorted[low].id);
      death[rsl] = rec.w;
      has_death[rsl] = 1;
      cleared[rsl] = 1;
      positive[rsl] = 1;
    }
  }
  std::vector<std::vector<Interval>> out(sh.s + 1);
  size_t essential0 = 0, essential_up = 0;
  for (auto& rec : g.sorted) {
    size_t sl = sh.slot_id(rec.id);
    if (!positive[sl]) continue;
    if (has_death[sl]) {
      if (death[sl] != rec.w)
        out[rec.dim].push_back({rec.w, death[sl]});
    } else {
      out[rec.dim].push_back({rec.w, std::nullopt});
      if (rec.dim == 0)
        ++essential0;
      else
        ++essential_up;
    }
  }
  if (essential0 != 1 || essential_up != 0)
    throw property_error(
        "persistence reached a non-contractible top sublevel set");
  return out;
}

// Connected-component tracking along integer levels via union-find with the
// lexicographically smallest base point as representative.
struct LevelScan {
  Int m_w, max_w;
  long long span = 0;                       // number of integer levels
  std::vector<long long> b0, u0;            // indexed by n - m_w
  std::vector<std::vector<size_t>> roots;   // live component reps per level
  std::vector<std::vector<size_t>> parent;  // parent[i][j]: root index at i+1
};

struct DSU {
  std::vector<size_t> p;
  explicit DSU(size_t n) : p(n) {
    for (size_t i = 0; i < n; ++i) p[i] = i;
  }
  size_t find(size_t a) {
    while (p[a] != a) {
      p[a] = p[p[a]];
      a = p[a];
    }
    return a;
  }
};

inline LevelScan scan_levels(const CubeGrid& g) {
  const GridShape& sh = g.shape;
  LevelScan out;
  out.m_w = g.m_w;
  out.max_w = g.max_w;
  out.span = to_ll(Int(g.max_w - g.m_w), "level span") + 1;
  if (out.span > kLevelSpanBudget)
    throw resource_error("weight range spans " + std::to_string(out.span) +
                         " levels");
  size_t span = size_t(out.span);
  out.b0.assign(span, 0);
  out.u0.assign(span, 0);
  out.roots.assign(span, {});
  out.parent.assign(span, {});
  DSU dsu(sh.idx.total());
  std::vector<Int> birth(sh.idx.total(), Int(0));
  std::set<size_t> live;
  size_t ei = 0;
  for (size_t i = 0; i < span; ++i) {
    Int n = g.m_w + (long long)i;
    while (ei < g.sorted.size() && g.sorted[ei].w <= n) {
      const CubeRec& r = g.sorted[ei];
      ++ei;
      if (r.dim == 0) {
        size_t p = sh.point_of(r.id);
        live.insert(p);
        birth[p] = r.w;
      } else if (r.dim == 1) {
        size_t p = sh.point_of(r.id);
        size_t v = size_t(std::countr_zero(sh.mask_of(r.id)));
        size_t ra = dsu.find(p), rb = dsu.find(sh.idx.step(p, v));
        if (ra != rb) {
          size_t win = std::min(ra, rb), lose = std::max(ra, rb);
          dsu.p[lose] = win;
          birth[win] = std::min(birth[ra], birth[rb]);
          live.erase(lose);
        }
      }
    }
    out.b0[i] = static_cast<long long>(live.size());
    out.roots[i].assign(live.begin(), live.end());
    if (i > 0) {
      // rank of the restriction from level n into n-1: components of S_n
      // containing a point of weight <= n-1
      long long r = 0;
      for (size_t root : live)
        if (birth[root] <= n - 1) ++r;
      out.u0[i - 1] = r;
      auto& cur = out.roots[i];
      auto& par = out.parent[i - 1];
      par.resize(out.roots[i - 1].size());
      for (size_t j = 0; j < out.roots[i - 1].size(); ++j) {
        size_t pr = dsu.find(out.roots[i - 1][j]);
        par[j] = size_t(std::lower_bound(cur.begin(), cur.end(), pr) -
                        cur.begin());
      }
    }
  }
  out.u0[span - 1] = out.b0[span - 1];
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// The graded module

enum class CohMode { full, h0_only };

struct LevelRow {
  Int n;
  std::vector<long long> betti;
  std::vector<std::vector<Int>> torsion;
  std::vector<long long> u_rank;  // rank of the restriction from level n+1
  bool operator==(const LevelRow&) const = default;

  bool trivial() const {
    for (size_t q = 0; q < betti.size(); ++q)
      if (betti[q] != (q == 0 ? 1 : 0)) return false;
    for (auto& t : torsion)
      if (!t.empty()) return false;
    for (size_t q = 0; q < u_rank.size(); ++q)
      if (u_rank[q] != (q == 0 ? 1 : 0)) return false;
    return true;
  }
};

struct LatticeModule {
  Int min_weight;
  bool h0_only = false;
  std::vector<LevelRow> levels;          // n = min_weight .. stabilization
  std::vector<long long> reduced_ranks;  // per degree q
  Int eu;
  bool operator==(const LatticeModule&) const = default;
};

inline Int eu(const LatticeModule& m) {
  Int acc = -m.min_weight;
  for (size_t q = 0; q < m.reduced_ranks.size(); ++q)
    acc += (q % 2 == 0 ? 1 : -1) * Int(m.reduced_ranks[q]);
  return acc;
}

inline bool modules_equal(const LatticeModule& a, const LatticeModule& b) {
  return a == b;
}

inline LatticeModule lattice_cohomology(const WeightModel& model,
                                        const Rect& rect,
                                        CohMode mode = CohMode::full,
                                        unsigned workers = 1) {
  if (model.z_coh) {
    if (!cyc_is_zero(rect.lo))
      throw input_error("analytic lattice cohomology lives on R(0, c)");
    if (!cyc_le(*model.z_coh, rect.hi))
      throw input_error(
          "analytic lattice cohomology needs c at least the cohomological "
          "cycle " +
          cyc_str(*model.z_coh));
  }
  auto grid = detail::build_grid(model, rect);
  auto scan = detail::scan_levels(grid);
  size_t s = grid.shape.s;
  size_t nq = (mode == CohMode::full) ? s + 1 : 1;
  size_t span = size_t(scan.span);
  std::vector<std::vector<long long>> b(nq, std::vector<long long>(span, 0));
  std::vector<std::vector<long long>> u(nq, std::vector<long long>(span, 0));
  std::vector<long long> red(nq, 0);
  if (mode == CohMode::full) {
    auto intervals = detail::persistence_intervals(grid);
    for (size_t q = 0; q <= s; ++q) {
      std::vector<long long> bd(span + 1, 0), ud(span + 1, 0);
      for (auto& iv : intervals[q]) {
        size_t bi = size_t(to_ll(Int(iv.birth - grid.m_w), "interval"));
        size_t di =
            iv.death ? size_t(to_ll(Int(*iv.death - grid.m_w), "interval"))
                     : span;
        ++bd[bi];
        --bd[std::min(di, span)];
        // alive for the restriction into level n when n and n+1 both live
        size_t ue = iv.death ? (di >= 1 ? di - 1 : 0) : span;
        if (ue > bi) {
          ++ud[bi];
          --ud[ue];
        }
        if (iv.death) red[q] += to_ll(Int(*iv.death - iv.birth), "interval");
      }
      long long accb = 0, accu = 0;
      for (size_t i = 0; i < span; ++i) {
        accb += bd[i];
        accu += ud[i];
        b[q][i] = accb;
        u[q][i] = accu;
      }
      u[q][span - 1] = b[q][span - 1];  // identical complexes above the top
    }
    if (b[0] != scan.b0 || u[0] != scan.u0)
      throw property_error(
          "component counts from persistence and union-find disagree");
  } else {
    b[0] = scan.b0;
    u[0] = scan.u0;
    for (auto c : scan.b0) red[0] += c - 1;
  }

  // torsion per distinct weight level (full mode); trivial-by-rank rows can
  // still hide torsion only in 4 or more variables, so the scan range is cut
  // accordingly
  std::vector<std::vector<std::vector<Int>>> tors(span);
  for (auto& t : tors) t.assign(nq, {});
  std::vector<size_t> snap_of(span, size_t(-1));
  if (mode == CohMode::full) {
    long long stab0 = -1;
    for (size_t i = 0; i < span; ++i)
      for (size_t q = 0; q < nq; ++q)
        if (b[q][i] != (q == 0 ? 1 : 0) || u[q][i] != (q == 0 ? 1 : 0))
          stab0 = std::max(stab0, (long long)i);
    std::vector<std::pair<Int, size_t>> distinct;  // weight, cube prefix end
    for (size_t i = 0; i < grid.sorted.size(); ++i)
      if (i + 1 == grid.sorted.size() ||
          grid.sorted[i].w != grid.sorted[i + 1].w)
        distinct.emplace_back(grid.sorted[i].w, i + 1);
    size_t last_snap = distinct.size();
    if (s < 4) {
      last_snap = 0;
      while (last_snap < distinct.size() &&
             distinct[last_snap].first <= grid.m_w + (stab0 < 0 ? 0 : stab0))
        ++last_snap;
    }
    unsigned long long work = (unsigned long long)last_snap *
                              grid.shape.cube_count * (s + 1);
    if (work > kCollapseWorkBudget)
      throw resource_error("per-level cohomology would need " +
                           std::to_string(work) + " collapse steps");
    std::vector<CohRow> rows(last_snap);
    auto job = [&](size_t j) {
      std::vector<uint64_t> cells;
      cells.reserve(distinct[j].second);
      for (size_t i = 0; i < distinct[j].second; ++i)
        cells.push_back(grid.sorted[i].id);
      std::sort(cells.begin(), cells.end());
      auto core = detail::collapse_core(grid.shape, cells);
      return detail::core_cohomology(grid.shape, core);
    };
    if (workers <= 1) {
      for (size_t j = 0; j < last_snap; ++j) rows[j] = job(j);
    } else {
      for (size_t j0 = 0; j0 < last_snap; j0 += workers) {
        std::vector<std::future<CohRow>> fut;
        for (size_t j = j0; j < std::min(last_snap, j0 + workers); ++j)
          fut.push_back(std::async(std::launch::async, job, j));
        for (size_t j = j0; j < std::min(last_snap, j0 + workers); ++j)
          rows[j] = fut[j - j0].get();
      }
    }
    size_t cur = 0;
    for (size_t i = 0; i < span; ++i) {
      while (cur < last_snap && distinct[cur].first <= grid.m_w + (long long)i)
        ++cur;
      if (cur > 0) snap_of[i] = cur - 1;
    }
    for (size_t j = 0; j < last_snap; ++j) {
      size_t i = size_t(to_ll(Int(distinct[j].first - grid.m_w), "level"));
      for (size_t q = 0; q < nq; ++q)
        if (rows[j].betti[q] != b[q][i])
          throw property_error(
              "Betti numbers from Smith reduction and persistence disagree "
              "at level " + int_str(distinct[j].first));
    }
    for (size_t i = 0; i < span; ++i)
      if (snap_of[i] != size_t(-1)) tors[i] = rows[snap_of[i]].torsion;
  }

  LatticeModule out;
  out.min_weight = grid.m_w;
  out.h0_only = (mode == CohMode::h0_only);
  out.reduced_ranks = red;
  long long last_nontrivial = -1;
  std::vector<LevelRow> rows(span);
  for (size_t i = 0; i < span; ++i) {
    LevelRow row;
    row.n = grid.m_w + (long long)i;
    row.betti.resize(nq);
    row.u_rank.resize(nq);
    for (size_t q = 0; q < nq; ++q) {
      row.betti[q] = b[q][i];
      row.u_rank[q] = u[q][i];
    }
    row.torsion = tors[i];
    if (row.torsion.empty()) row.torsion.assign(nq, {});
    if (!row.trivial()) last_nontrivial = (long long)i;
    rows[i] = std::move(row);
  }
  size_t keep = size_t(std::min<long long>(last_nontrivial + 1,
                                           (long long)span - 1));
  out.levels.assign(rows.begin(), rows.begin() + (keep + 1));
  out.eu = eu(out);
  return out;
}

inline Int eu_cube_formula(const WeightModel& model, const Rect& rect) {
  return detail::build_grid(model, rect).eu_sum;
}

// ---------------------------------------------------------------------------
// Graded roots

struct RootVertex {
  Int n;
  IntegerCycle rep;  // lexicographically smallest point of the component
};

struct GradedRoot {
  std::vector<RootVertex> vertices;              // grouped by ascending level
  std::vector<std::pair<size_t, size_t>> edges;  // (vertex at n, vertex n+1)
  Int m_w, top;
};

inline std::map<Int, long long> root_profile(const GradedRoot& r) {
  std::map<Int, long long> out;
  for (auto& v : r.vertices) ++out[v.n];
  return out;
}

inline void validate_graded_root(const GradedRoot& r) {
  std::map<Int, long long> prof = root_profile(r);
  if (prof.empty() || prof.rbegin()->first != r.top ||
      prof.rbegin()->second != 1)
    throw property_error("graded root must end in a single vertex");
  std::vector<size_t> up_edges(r.vertices.size(), 0);
  for (auto& [a, b] : r.edges) {
    if (r.vertices[b].n - r.vertices[a].n != 1)
      throw property_error("graded root edge must connect adjacent levels");
    ++up_edges[a];
  }
  for (size_t i = 0; i < r.vertices.size(); ++i) {
    bool is_top = (r.vertices[i].n == r.top);
    if (up_edges[i] != (is_top ? 0u : 1u))
      throw property_error(
          "graded root vertex must have exactly one upward edge below the "
          "top");
  }
  if (r.edges.size() + 1 != r.vertices.size())
    throw property_error("graded root must be a tree");
}

inline GradedRoot graded_root(const WeightModel& model, const Rect& rect) {
  auto grid = detail::build_grid(model, rect);
  auto scan = detail::scan_levels(grid);
  size_t span = size_t(scan.span);
  long long last_branched = -1;
  for (size_t i = 0; i < span; ++i)
    if (scan.b0[i] > 1) last_branched = (long long)i;
  size_t top = size_t(std::min<long long>(last_branched + 1,
                                          (long long)span - 1));
  GradedRoot out;
  out.m_w = grid.m_w;
  out.top = grid.m_w + (long long)top;
  std::vector<size_t> start(top + 2, 0);
  for (size_t i = 0; i <= top; ++i) {
    start[i] = out.vertices.size();
    for (size_t root : scan.roots[i])
      out.vertices.push_back(
          {grid.m_w + (long long)i, grid.shape.idx.point(root)});
  }
  start[top + 1] = out.vertices.size();
  for (size_t i = 0; i < top; ++i)
    for (size_t j = 0; j < scan.roots[i].size(); ++j)
      out.edges.emplace_back(start[i] + j, start[i + 1] + scan.parent[i][j]);
  validate_graded_root(out);
  return out;
}

// ---------------------------------------------------------------------------
// Path lattice cohomology

struct PathSpec {
  std::vector<IntegerCycle> points;
  bool increasing = false;  // only +E_v steps
};

inline PathSpec make_path(std::vector<IntegerCycle> pts) {
  if (pts.empty()) throw input_error("a path needs at least one point");
  if (!cyc_is_zero(pts.front()))
    throw input_error("paths must start at the zero cycle");
  bool inc = true;
  std::set<IntegerCycle> seen{pts.front()};
  for (size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].size() != pts.front().size())
      throw input_error("path points must share one dimension");
    int nonzero = 0;
    bool plus = false;
    for (size_t v = 0; v < pts[i].size(); ++v) {
      Int d = pts[i][v] - pts[i - 1][v];
      if (d == 0) continue;
      ++nonzero;
      if (d == 1)
        plus = true;
      else if (d != -1)
        nonzero = 2;  // oversized jump along one axis
    }
    if (nonzero != 1)
      throw input_error("consecutive path points must differ by one E_v");
    if (!plus) inc = false;
    if (!seen.insert(pts[i]).second)
      throw input_error("path points must be pairwise distinct");
  }
  return PathSpec{std::move(pts), inc};
}

inline bool path_spans(const PathSpec& p, const Rect& rect) {
  return p.increasing && p.points.front() == rect.lo &&
         p.points.back() == rect.hi;
}

inline Int path_eu_formula(const WeightModel& model, const PathSpec& path) {
  Int acc = -model.w0(path.points.front());
  for (size_t i = 0; i + 1 < path.points.size(); ++i) {
    Int d = model.w0(path.points[i]) - model.w0(path.points[i + 1]);
    if (d > 0) acc += d;
  }
  return acc;
}

struct PathCohomology {
  LatticeModule module;  // degree 0 only
  Int eu;
};

inline PathCohomology path_cohomology(const WeightModel& model,
                                      const PathSpec& path) {
  size_t len = path.points.size();
  std::vector<Int> w(len);
  for (size_t i = 0; i < len; ++i) w[i] = model.w0(path.points[i]);
  std::vector<Int> e(len > 0 ? len - 1 : 0);
  for (size_t i = 0; i + 1 < len; ++i) e[i] = std::max(w[i], w[i + 1]);
  Int m = *std::min_element(w.begin(), w.end());
  Int M = *std::max_element(w.begin(), w.end());
  long long span = to_ll(Int(M - m), "path level span") + 1;
  if (span > kLevelSpanBudget)
    throw resource_error("path weight range too large");
  std::vector<long long> b0(span, 0), u0(span, 0);
  for (long long i = 0; i < span; ++i) {
    Int n = m + i;
    long long verts = 0, edges = 0, runs = 0, reach = 0;
    bool in_run = false, run_old = false;
    for (size_t j = 0; j < len; ++j) {
      bool vp = (w[j] <= n);
      bool ep = (j > 0) && (e[j - 1] <= n);
      if (!vp) {
        if (in_run && run_old) ++reach;
        in_run = false;
        continue;
      }
      ++verts;
      if (ep && in_run) {
        ++edges;
      } else {
        if (in_run && run_old) ++reach;
        ++runs;
        run_old = false;
      }
      in_run = true;
      if (w[j] <= n - 1) run_old = true;
    }
    if (in_run && run_old) ++reach;
    b0[i] = runs;
    if (i > 0) u0[i - 1] = reach;
    if (edges - verts + runs != 0)
      throw property_error("path sublevel sets must be disjoint arcs");
  }
  u0[span - 1] = b0[span - 1];
  PathCohomology out;
  out.module.min_weight = m;
  out.module.h0_only = true;
  long long red = 0, last_nontrivial = -1;
  std::vector<LevelRow> rows(static_cast<size_t>(span));
  for (long long i = 0; i < span; ++i) {
    red += b0[i] - 1;
    LevelRow row{m + i, {b0[i]}, {{}}, {u0[i]}};
    if (!row.trivial()) last_nontrivial = i;
    rows[size_t(i)] = std::move(row);
  }
  size_t keep = size_t(std::min(last_nontrivial + 1, span - 1));
  out.module.levels.assign(rows.begin(), rows.begin() + (keep + 1));
  out.module.reduced_ranks = {red};
  out.module.eu = eu(out.module);
  out.eu = out.module.eu;
  return out;
}

// ---------------------------------------------------------------------------
// Minimal path Euler characteristic over increasing paths lo -> hi

enum class PathStrategy { exhaustive, greedy };

struct MinPathResult {
  Int eu;
  PathSpec path;
  bool heuristic = false;
};

inline MinPathResult min_path_eu(const WeightModel& model, const Rect& rect,
                                 PathStrategy strategy = PathStrategy::exhaustive,
                                 size_t beam_width = 16) {
  if (!cyc_is_zero(rect.lo))
    throw input_error("increasing paths are measured from the zero cycle");
  RectIdx idx(rect, kTableBudget);
  auto w0 = detail::fill_w0(model, rect, idx);
  size_t total = idx.total(), s = rect.dim();
  auto edge_cost = [&](size_t from, size_t to) {
    Int d = w0[from] - w0[to];
    return d > 0 ? d : Int(0);
  };
  std::vector<size_t> chosen;  // point sequence of the winning path
  Int best_cost;
  bool heuristic = false;
  if (strategy == PathStrategy::exhaustive) {
    std::vector<Int> dist(total, Int(0));
    std::vector<int> parent(total, -1);
    for (size_t i = 1; i < total; ++i) {
      auto c = idx.rel(i);
      bool first = true;
      for (size_t v = 0; v < s; ++v) {
        if (c[v] == 0) continue;
        size_t prev = i - idx.stride(v);
        Int cand = dist[prev] + edge_cost(prev, i);
        if (first || cand < dist[i]) {
          dist[i] = cand;
          parent[i] = int(v);
          first = false;
        }
      }
    }
    best_cost = dist[total - 1];
    size_t cur = total - 1;
    chosen.push_back(cur);
    while (cur != 0) {
      cur -= idx.stride(size_t(parent[cur]));
      chosen.push_back(cur);
    }
    std::reverse(chosen.begin(), chosen.end());
  } else {
    heuristic = true;
    struct State {
      Int cost;
      std::vector<size_t> pts;
    };
    std::vector<State> beam{{Int(0), {size_t(0)}}};
    long long height = 0;
    for (size_t v = 0; v < s; ++v)
      height += to_ll(Int(rect.hi[v] - rect.lo[v]), "path length");
    for (long long step = 0; step < height; ++step) {
      std::map<size_t, State> next;
      for (auto& st : beam) {
        size_t p = st.pts.back();
        auto c = idx.rel(p);
        for (size_t v = 0; v < s; ++v) {
          if (c[v] + 1 >= idx.extent(v)) continue;
          size_t q = idx.step(p, v);
          State cand{st.cost + edge_cost(p, q), st.pts};
          cand.pts.push_back(q);
          auto it = next.find(q);
          if (it == next.end() || cand.cost < it->second.cost ||
              (cand.cost == it->second.cost && cand.pts < it->second.pts))
            next[q] = std::move(cand);
        }
      }
      beam.clear();
      for (auto& [p, st] : next) beam.push_back(std::move(st));
      std::sort(beam.begin(), beam.end(), [](const State& a, const State& b) {
        if (a.cost != b.cost) return a.cost < b.cost;
        return a.pts < b.pts;
      });
      if (beam.size() > beam_width) beam.resize(beam_width);
    }
    best_cost = beam.front().cost;
    chosen = beam.front().pts;
  }
  std::vector<IntegerCycle> pts;
  pts.reserve(chosen.size());
  for (size_t p : chosen) pts.push_back(idx.point(p));
  MinPathResult out{-w0[0] + best_cost, make_path(std::move(pts)), heuristic};
  return out;
}

// ---------------------------------------------------------------------------
// Rectangle selection

struct TruncateResult {
  Rect rect;
  bool heuristic = false;
  int doublings = 0;
};

// For table-backed models the data fixes the rectangle (the analytic module
// does not depend on c once c >= Z_coh).  Topological models grow the
// rectangle by coordinate-wise doubling until every boundary-face point has
// weight above n_max and the module output has stopped changing; that
// stopping rule has no proven completeness bound, hence the heuristic flag.
inline TruncateResult truncate(const WeightModel& model, const Int& n_max,
                               int max_doublings = 12,
                               CohMode mode = CohMode::full,
                               unsigned workers = 1) {
  if (model.kind == WeightModel::Kind::analytic) {
    IntegerCycle zero(model.z_coh->size(), Int(0));
    return {make_rect(zero, *model.z_coh), false, 0};
  }
  if (model.kind == WeightModel::Kind::combinatorial)
    return {model.domain(), false, 0};
  const PlumbingGraph& g = *model.graph;
  size_t s = g.size();
  RationalCycle r(s);
  for (size_t v = 0; v < s; ++v) r[v] = (model.k[v] + g.z_k[v]) / 2;
  RationalCycle sh = g.s_of(g.class_of(r));
  auto ceil_rat = [](const Rat& x) { return Int(-floor_rat(-x)); };
  IntegerCycle c(s);
  for (size_t v = 0; v < s; ++v)
    c[v] = 1 + std::max(Int(0), std::max(ceil_rat(r[v]), ceil_rat(sh[v])));
  IntegerCycle zero(s, Int(0));
  // compare only the rows the caller asked for; rows above n_max keep
  // changing with the rectangle long after the requested range has settled
  auto slice = [&](const LatticeModule& m) {
    std::vector<LevelRow> rows;
    for (auto& row : m.levels)
      if (row.n <= n_max) rows.push_back(row);
    return std::make_pair(m.min_weight, rows);
  };
  std::optional<LatticeModule> prev;
  for (int d = 0;; ++d) {
    if (d > max_doublings)
      throw resource_error("truncation did not stabilize after " +
                           std::to_string(max_doublings) + " doublings");
    Rect rect = make_rect(zero, c);
    LatticeModule mod = lattice_cohomology(model, rect, mode, workers);
    RectIdx idx(rect, kTableBudget);
    auto w0 = detail::fill_w0(model, rect, idx);
    // a face that still carries weights <= n_max gets its coordinate
    // doubled; directions whose faces have cleared n_max stop growing
    std::vector<char> face_bad(s, 0);
    for (size_t i = 0; i < idx.total(); ++i) {
      if (w0[i] > n_max) continue;
      auto rel = idx.rel(i);
      for (size_t v = 0; v < s; ++v)
        if (rel[v] + 1 == idx.extent(v)) face_bad[v] = 1;
    }
    bool boundary_ok =
        std::none_of(face_bad.begin(), face_bad.end(), [](char x) { return x; });
    if (boundary_ok && prev && slice(*prev) == slice(mod))
      return {rect, true, d};
    prev = std::move(mod);
    for (size_t v = 0; v < s; ++v)
      if (face_bad[v] || boundary_ok) c[v] *= 2;
  }
}

}  // namespace latcoh
