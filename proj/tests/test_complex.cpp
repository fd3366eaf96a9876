#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <functional>
#include <random>
#include <vector>

#include <latcoh/complex.hpp>
#include <latcoh/io.hpp>

#include "fixtures.hpp"

using namespace latcoh;
using fixtures::a_n;
using fixtures::chain;
using fixtures::d4;
using fixtures::ic;
using fixtures::rc;
using fixtures::sigma_2_3_7;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::MessageMatches;

namespace {

std::string fixture(const std::string& rel) {
  return std::string(LATCOH_SOURCE_DIR) + "/" + rel;
}

IntTable table1(const std::vector<long long>& vals) {
  IntTable t(make_rect(ic({0}), ic({(long long)vals.size() - 1})));
  for (size_t i = 0; i < vals.size(); ++i) t.val[i] = vals[i];
  return t;
}

IntTable table2(const IntegerCycle& c,
                const std::function<long long(long long, long long)>& f) {
  IntTable t(make_rect(IntegerCycle(2, Int(0)), c));
  for (size_t i = 0; i < t.idx.total(); ++i) {
    auto p = t.idx.rel(i);
    t.val[i] = f(p[0], p[1]);
  }
  return t;
}

WeightModel table_model(IntTable t) {
  WeightModel m;
  m.kind = WeightModel::Kind::combinatorial;
  m.table = std::move(t);
  return m;
}

WeightModel load_analytic(const std::string& name) {
  return analytic_weight(load_hilbert(fixture("data/hilbert/" + name)));
}

// all increasing lattice paths from rect.lo to rect.hi
void grow_paths(const Rect& rect, std::vector<IntegerCycle>& cur,
                std::vector<PathSpec>& out) {
  const IntegerCycle last = cur.back();  // copy: push_back reallocates cur
  if (last == rect.hi) {
    out.push_back(make_path(cur));
    return;
  }
  for (size_t v = 0; v < rect.dim(); ++v) {
    if (last[v] >= rect.hi[v]) continue;
    IntegerCycle next = last;
    next[v] += 1;
    cur.push_back(next);
    grow_paths(rect, cur, out);
    cur.pop_back();
  }
}

std::vector<PathSpec> all_increasing_paths(const Rect& rect) {
  std::vector<IntegerCycle> cur{rect.lo};
  std::vector<PathSpec> out;
  grow_paths(rect, cur, out);
  return out;
}

}  // namespace

TEST_CASE("sublevel complexes of a single -2 vertex") {
  auto g = chain({-2});
  auto m = topo_weight(g, rc({"0"}));
  Rect rect = make_rect(ic({0}), ic({2}));

  auto empty = build_sublevel(m, rect, Int(-1));
  CHECK(empty.cubes.empty());
  auto row = cohomology(empty);
  CHECK(row.betti == std::vector<long long>{0, 0});

  auto base = build_sublevel(m, rect, Int(0));
  REQUIRE(base.cubes.size() == 1);  // just the origin: weights are 0, 1, 4
  CHECK(base.cubes[0] == 0);
  auto brow = cohomology(base);
  CHECK(brow.betti == std::vector<long long>{1, 0});

  auto full = build_sublevel(m, rect, Int(4));
  CHECK(full.cubes.size() == 5);  // 3 points + 2 edges
  auto frow = cohomology(full);
  CHECK(frow.betti == std::vector<long long>{1, 0});
}

TEST_CASE("cohomology of hand-built complexes") {
  Rect rect = make_rect(ic({0, 0}), ic({1, 1}));

  SECTION("two isolated points") {
    auto m = table_model(table2(ic({2, 0}), [](long long a, long long) {
      return a == 1 ? 1 : 0;
    }));
    auto S = build_sublevel(m, m.domain(), Int(0));
    CHECK(S.cubes.size() == 2);
    CHECK(cohomology(S).betti == std::vector<long long>{2, 0, 0});
  }

  SECTION("boundary of a square has a circle's cohomology") {
    // four points of R(0,(1,1)) and the four edges, no 2-cell
    SublevelComplex S{rect, Int(0), {0, 1, 2, 4, 5, 8, 10, 12}};
    auto direct = cohomology(S, false);
    CHECK(direct.betti == std::vector<long long>{1, 1, 0});
    CHECK(cohomology(S, true) == direct);
  }

  SECTION("faces must be present") {
    SublevelComplex S{rect, Int(0), {1}};  // an edge without its endpoints
    CHECK_THROWS_MATCHES(cohomology(S), input_error,
                         MessageMatches(ContainsSubstring("faces")));
  }

  SECTION("ids must belong to the rectangle") {
    SublevelComplex S{rect, Int(0), {uint64_t(4) << 2}};
    CHECK_THROWS_AS(cohomology(S), input_error);
  }
}

TEST_CASE("collapsing preserves integral cohomology") {
  std::mt19937_64 rng(907);
  std::uniform_int_distribution<long long> val(-3, 5);
  for (int trial = 0; trial < 25; ++trial) {
    Rect rect = trial % 2 == 0 ? make_rect(ic({0, 0}), ic({3, 2}))
                               : make_rect(ic({0, 0, 0}), ic({2, 1, 2}));
    IntTable t(rect);
    for (size_t i = 0; i < t.idx.total(); ++i) t.val[i] = val(rng);
    auto m = table_model(std::move(t));
    std::uniform_int_distribution<long long> lev(-2, 4);
    auto S = build_sublevel(m, rect, Int(lev(rng)));
    auto fast = cohomology(S, true);
    auto slow = cohomology(S, false);
    INFO("trial " << trial << ", " << S.cubes.size() << " cubes");
    CHECK(fast == slow);
  }
}

TEST_CASE("lattice cohomology of rational singularities is trivial") {
  for (const auto* name : {"a_2", "d4"}) {
    PlumbingGraph g = std::string(name) == "a_2" ? a_n(2) : d4();
    REQUIRE(g.rational_singularity());
    auto m = topo_weight(g, g.char_from_r(RationalCycle(g.size(), Rat(0))));
    auto tr = truncate(m, Int(0));
    CHECK(tr.heuristic);
    auto mod = lattice_cohomology(m, tr.rect);
    INFO(name);
    CHECK(mod.min_weight == 0);
    CHECK(mod.eu == 0);
    for (auto r : mod.reduced_ranks) CHECK(r == 0);
    REQUIRE(mod.levels.size() == 1);
    CHECK(mod.levels[0].trivial());
  }
}

TEST_CASE("lattice cohomology of a one-variable combinatorial model") {
  auto m = combinatorial_weight(table1({0, 0, 1}), table1({1, 0, 0}));
  auto mod = lattice_cohomology(m, m.domain());
  CHECK(mod.min_weight == -1);
  CHECK(mod.eu == 1);
  CHECK(mod.reduced_ranks == std::vector<long long>{0, 0});
  REQUIRE(mod.levels.size() == 1);  // stabilizes immediately at the minimum
  CHECK(mod.levels[0].n == -1);
  CHECK(mod.levels[0].betti == std::vector<long long>{1, 0});
  CHECK(mod.levels[0].u_rank == std::vector<long long>{1, 0});
}

TEST_CASE("analytic lattice cohomology of the shipped Hilbert fixtures") {
  SECTION("p_g = 1") {
    auto m = load_analytic("p1.json");
    auto mod = lattice_cohomology(m, m.domain());
    CHECK(mod.min_weight == 0);
    CHECK(mod.eu == 1);
    CHECK(mod.reduced_ranks == std::vector<long long>{1, 0, 0});
    REQUIRE(mod.levels.size() == 2);
    CHECK(mod.levels[0].betti == std::vector<long long>{2, 0, 0});
    CHECK(mod.levels[0].u_rank == std::vector<long long>{1, 0, 0});
    CHECK(mod.levels[1].trivial());
    for (auto& row : mod.levels)
      for (auto& t : row.torsion) CHECK(t.empty());
  }

  SECTION("p_g = 2 sees two levels of splitting") {
    auto m = load_analytic("p2.json");
    auto mod = lattice_cohomology(m, m.domain());
    CHECK(mod.min_weight == 0);
    CHECK(mod.eu == 2);
    CHECK(mod.reduced_ranks == std::vector<long long>{2, 0, 0});
    REQUIRE(mod.levels.size() == 3);
    CHECK(mod.levels[0].betti == std::vector<long long>{2, 0, 0});
    CHECK(mod.levels[1].betti == std::vector<long long>{2, 0, 0});
    CHECK(mod.levels[0].u_rank == std::vector<long long>{2, 0, 0});
    CHECK(mod.levels[1].u_rank == std::vector<long long>{1, 0, 0});
    CHECK(mod.levels[2].trivial());
  }

  SECTION("vanishing h1 gives the trivial module") {
    auto m = load_analytic("h1zero.json");
    auto mod = lattice_cohomology(m, m.domain());
    CHECK(mod.eu == 0);
    CHECK(mod.min_weight == 0);
    REQUIRE(mod.levels.size() == 1);
    CHECK(mod.levels[0].trivial());
  }

  SECTION("the rectangle must contain the cohomological cycle") {
    auto m = load_analytic("p1.json");  // Z_coh = (2,0)
    CHECK_THROWS_MATCHES(
        lattice_cohomology(m, make_rect(ic({0, 0}), ic({1, 1}))), input_error,
        MessageMatches(ContainsSubstring("cohomological")));
  }

  SECTION("output does not depend on c above the cohomological cycle") {
    auto m = load_analytic("p1.json");
    auto on_zcoh = lattice_cohomology(m, make_rect(ic({0, 0}), ic({2, 0})));
    auto on_full = lattice_cohomology(m, m.domain());
    CHECK(modules_equal(on_zcoh, on_full));

    auto big = load_analytic("p2_big.json");
    auto small = load_analytic("p2.json");
    auto big_zcoh = lattice_cohomology(big, make_rect(ic({0, 0}), ic({2, 2})));
    auto big_full = lattice_cohomology(big, big.domain());
    auto small_full = lattice_cohomology(small, small.domain());
    CHECK(modules_equal(big_zcoh, big_full));
    CHECK(modules_equal(big_zcoh, small_full));
  }
}

TEST_CASE("canonical lattice cohomology of Sigma(2,3,7)") {
  auto g = sigma_2_3_7();
  REQUIRE_FALSE(g.rational_singularity());
  auto m = topo_weight(g, g.char_from_r(RationalCycle(g.size(), Rat(0))));
  auto tr = truncate(m, Int(1));
  auto mod = lattice_cohomology(m, tr.rect);
  CHECK(mod.eu == 1);
  CHECK(mod.min_weight == 0);
  // one extra component, alive for one level, and nothing in higher degree
  CHECK(mod.reduced_ranks[0] == 1);
  for (size_t q = 1; q < mod.reduced_ranks.size(); ++q)
    CHECK(mod.reduced_ranks[q] == 0);
}

TEST_CASE("euler characteristic via the cube formula") {
  SECTION("one-variable example") {
    auto m = table_model(table1({0, -1, 0}));
    Rect rect = m.domain();
    CHECK(eu_cube_formula(m, rect) == 1);
    CHECK(eu(lattice_cohomology(m, rect)) == 1);
  }

  SECTION("merge of two early components") {
    auto m = table_model(table1({0, 1, 0}));
    CHECK(eu_cube_formula(m, m.domain()) == 1);
    CHECK(lattice_cohomology(m, m.domain()).eu == 1);
  }

  SECTION("random tables in two and three variables") {
    std::mt19937_64 rng(5511);
    std::uniform_int_distribution<long long> val(-4, 6);
    for (int trial = 0; trial < 40; ++trial) {
      Rect rect = trial % 2 == 0 ? make_rect(ic({0, 0}), ic({3, 3}))
                                 : make_rect(ic({0, 0, 0}), ic({2, 2, 1}));
      IntTable t(rect);
      for (size_t i = 0; i < t.idx.total(); ++i) t.val[i] = val(rng);
      auto m = table_model(std::move(t));
      auto mod = lattice_cohomology(m, rect);
      INFO("trial " << trial);
      CHECK(eu_cube_formula(m, rect) == mod.eu);
      CHECK(eu(mod) == mod.eu);
    }
  }
}

TEST_CASE("module rows are sane along the filtration") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<long long> val(-3, 4);
  for (int trial = 0; trial < 10; ++trial) {
    Rect rect = make_rect(ic({0, 0}), ic({3, 2}));
    IntTable t(rect);
    for (size_t i = 0; i < t.idx.total(); ++i) t.val[i] = val(rng);
    auto m = table_model(std::move(t));
    auto mod = lattice_cohomology(m, rect);
    for (size_t i = 0; i < mod.levels.size(); ++i) {
      auto& row = mod.levels[i];
      CHECK(row.betti[0] >= 1);  // sublevel sets above m_w are nonempty
      for (size_t q = 0; q < row.betti.size(); ++q) {
        CHECK(row.u_rank[q] <= row.betti[q]);
        CHECK(row.betti[q] >= 0);
        // u maps out of the next level up; rows past the end are trivial
        long long above = (i + 1 < mod.levels.size())
                              ? mod.levels[i + 1].betti[q]
                              : (q == 0 ? 1 : 0);
        CHECK(row.u_rank[q] <= above);
      }
    }
    // nested sublevel complexes
    auto lo = build_sublevel(m, rect, mod.min_weight);
    auto hi = build_sublevel(m, rect, mod.min_weight + 2);
    CHECK(std::includes(hi.cubes.begin(), hi.cubes.end(), lo.cubes.begin(),
                        lo.cubes.end()));
  }
}

TEST_CASE("graded roots") {
  SECTION("rational graph gives a single vertex at level zero") {
    auto g = a_n(3);
    auto m = topo_weight(g, g.char_from_r(RationalCycle(g.size(), Rat(0))));
    auto tr = truncate(m, Int(0));
    auto root = graded_root(m, tr.rect);
    CHECK(root.vertices.size() == 1);
    CHECK(root.edges.empty());
    CHECK(root.vertices[0].n == 0);
  }

  SECTION("combinatorial example is a single ray at -1") {
    auto m = combinatorial_weight(table1({0, 0, 1}), table1({1, 0, 0}));
    auto root = graded_root(m, m.domain());
    CHECK(root.vertices.size() == 1);
    CHECK(root.vertices[0].n == -1);
    CHECK(root.vertices[0].rep == ic({1}));
  }

  SECTION("p_g = 1 branches once") {
    auto m = load_analytic("p1.json");
    auto root = graded_root(m, m.domain());
    auto prof = root_profile(root);
    REQUIRE(prof.size() == 2);
    CHECK(prof[Int(0)] == 2);
    CHECK(prof[Int(1)] == 1);
    REQUIRE(root.vertices.size() == 3);
    CHECK(root.vertices[0].rep == ic({0, 0}));
    CHECK(root.vertices[1].rep == ic({2, 0}));
    CHECK(root.edges.size() == 2);
    // vertex counts match the rank of H^0 level by level
    auto mod = lattice_cohomology(m, m.domain());
    for (auto& row : mod.levels) {
      auto it = prof.find(row.n);
      long long vcount = (it == prof.end()) ? 1 : it->second;
      CHECK(vcount == row.betti[0]);
    }
  }

  SECTION("malformed roots are rejected") {
    GradedRoot bad;
    bad.m_w = 0;
    bad.top = 1;
    bad.vertices = {{Int(0), ic({0})}, {Int(1), ic({0})}, {Int(1), ic({1})}};
    bad.edges = {{0, 1}};
    CHECK_THROWS_AS(validate_graded_root(bad), property_error);
  }
}

TEST_CASE("path validation") {
  CHECK_THROWS_AS(make_path({}), input_error);
  CHECK_THROWS_MATCHES(make_path({ic({1})}), input_error,
                       MessageMatches(ContainsSubstring("zero")));
  CHECK_THROWS_MATCHES(make_path({ic({0}), ic({2})}), input_error,
                       MessageMatches(ContainsSubstring("E_v")));
  CHECK_THROWS_MATCHES(make_path({ic({0, 0}), ic({1, 1})}), input_error,
                       MessageMatches(ContainsSubstring("E_v")));
  CHECK_THROWS_MATCHES(make_path({ic({0}), ic({1}), ic({0}), ic({1})}),
                       input_error,
                       MessageMatches(ContainsSubstring("distinct")));
  auto up = make_path({ic({0, 0}), ic({1, 0}), ic({1, 1})});
  CHECK(up.increasing);
  auto wiggle = make_path({ic({0, 0}), ic({1, 0}), ic({1, 1}), ic({0, 1})});
  CHECK_FALSE(wiggle.increasing);
}

TEST_CASE("path cohomology examples") {
  SECTION("weights 0,1,0,2 along a segment") {
    auto m = table_model(table1({0, 1, 0, 2}));
    auto p = make_path({ic({0}), ic({1}), ic({2}), ic({3})});
    auto pc = path_cohomology(m, p);
    CHECK(pc.module.min_weight == 0);
    CHECK(pc.module.reduced_ranks == std::vector<long long>{1});
    CHECK(pc.eu == 1);
    CHECK(path_eu_formula(m, p) == 1);
    REQUIRE(pc.module.levels.size() == 2);
    CHECK(pc.module.levels[0].betti == std::vector<long long>{2});
    CHECK(pc.module.levels[0].u_rank == std::vector<long long>{1});
  }

  SECTION("weights 0,2,1,3") {
    auto m = table_model(table1({0, 2, 1, 3}));
    auto p = make_path({ic({0}), ic({1}), ic({2}), ic({3})});
    CHECK(path_eu_formula(m, p) == 1);
    CHECK(path_cohomology(m, p).eu == 1);
  }

  SECTION("constant and monotone paths carry nothing") {
    auto flat = table_model(table1({0, 0, 0}));
    auto p = make_path({ic({0}), ic({1}), ic({2})});
    CHECK(path_cohomology(flat, p).eu == 0);
    CHECK(path_eu_formula(flat, p) == 0);

    auto mono = table_model(table1({0, 1, 3}));
    CHECK(path_cohomology(mono, p).eu == 0);
    CHECK(path_eu_formula(mono, p) == 0);
  }

  SECTION("formula matches cohomology on random increasing paths") {
    std::mt19937_64 rng(2026);
    std::uniform_int_distribution<long long> val(-3, 5);
    Rect rect = make_rect(ic({0, 0}), ic({3, 3}));
    for (int trial = 0; trial < 30; ++trial) {
      IntTable t(rect);
      for (size_t i = 0; i < t.idx.total(); ++i) t.val[i] = val(rng);
      auto m = table_model(std::move(t));
      std::vector<IntegerCycle> pts{ic({0, 0})};
      while (pts.back() != rect.hi) {
        IntegerCycle next = pts.back();
        std::vector<size_t> room;
        for (size_t v = 0; v < 2; ++v)
          if (next[v] < rect.hi[v]) room.push_back(v);
        next[room[rng() % room.size()]] += 1;
        pts.push_back(next);
      }
      auto p = make_path(pts);
      REQUIRE(p.increasing);
      auto pc = path_cohomology(m, p);
      INFO("trial " << trial);
      CHECK(pc.eu == path_eu_formula(m, p));
      CHECK(eu(pc.module) == pc.eu);
    }
  }
}

TEST_CASE("increasing paths of combinatorial models stay within bounds") {
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<long long> slope(0, 2);
  Rect rect = make_rect(ic({0, 0}), ic({2, 2}));
  int trials = 0;
  for (int attempt = 0; attempt < 40; ++attempt) {
    // random monotone h (nondecreasing) and hc (nonincreasing)
    IntTable h(rect), hc(rect);
    for (size_t i = 0; i < h.idx.total(); ++i) {
      auto p = h.idx.rel(i);
      h.val[i] = slope(rng) * p[0] + slope(rng) % 2 * p[1];
      hc.val[i] = slope(rng) % 2 * (2 - p[0]) + slope(rng) % 2 * (2 - p[1]);
    }
    // repair monotonicity by running maxima/minima over predecessors
    for (size_t i = 0; i < h.idx.total(); ++i) {
      auto p = h.idx.rel(i);
      for (size_t v = 0; v < 2; ++v)
        if (p[v] > 0) {
          size_t prev = i - h.idx.stride(v);
          h.val[i] = std::max(h.val[i], h.val[prev]);
          hc.val[i] = std::min(hc.val[i], hc.val[prev]);
        }
    }
    if (!check_monotone(h, true, "h").pass) continue;
    if (!check_monotone(hc, false, "hc").pass) continue;
    auto m = combinatorial_weight(h, hc);
    Int cap = hc.at(ic({0, 0})) - hc.at(ic({2, 2}));
    for (auto& p : all_increasing_paths(rect)) {
      Int e = path_eu_formula(m, p);
      CHECK(e >= 0);
      CHECK(e <= cap);
      CHECK(path_cohomology(m, p).eu == e);
    }
    ++trials;
  }
  CHECK(trials >= 30);
}

TEST_CASE("stability plus CDP force path independence") {
  std::mt19937_64 rng(4097);
  std::uniform_int_distribution<long long> slope(0, 3), cap(0, 6);
  Rect rect = make_rect(ic({0, 0}), ic({2, 2}));
  int accepted = 0;
  for (int attempt = 0; attempt < 60 && accepted < 12; ++attempt) {
    IntTable h(rect);
    for (size_t i = 0; i < h.idx.total(); ++i) h.val[i] = 0;
    for (int j = 0; j < 3; ++j) {
      long long w0 = slope(rng), w1 = slope(rng), c = cap(rng);
      for (size_t i = 0; i < h.idx.total(); ++i) {
        auto p = h.idx.rel(i);
        h.val[i] += std::min(w0 * p[0] + w1 * p[1], c);
      }
    }
    auto hsym = symmetric_dual(h);
    if (!check_stability(h).pass) continue;
    if (!check_cdp(h, hsym).pass) continue;
    ++accepted;
    auto m = combinatorial_weight(h, hsym);
    auto mod = lattice_cohomology(m, rect);
    Int expect = hsym.at(ic({0, 0})) - hsym.at(ic({2, 2}));
    INFO("attempt " << attempt);
    CHECK(mod.eu == expect);
    for (auto& p : all_increasing_paths(rect))
      CHECK(path_eu_formula(m, p) == expect);
    auto best = min_path_eu(m, rect);
    CHECK(best.eu == expect);
    CHECK_FALSE(best.heuristic);
  }
  REQUIRE(accepted >= 12);
}

TEST_CASE("minimal path Euler characteristic") {
  SECTION("single increasing path in one variable") {
    auto m = table_model(table1({0, -1, 0}));
    auto r = min_path_eu(m, m.domain());
    CHECK(r.eu == 1);
    CHECK_FALSE(r.heuristic);
    REQUIRE(r.path.points.size() == 3);
    CHECK(r.path.increasing);
  }

  SECTION("flat weights cost nothing") {
    auto m = table_model(table2(ic({2, 2}), [](long long, long long) {
      return 0;
    }));
    CHECK(min_path_eu(m, m.domain()).eu == 0);
  }

  SECTION("exhaustive search is a true minimum over sampled paths") {
    std::mt19937_64 rng(8080);
    std::uniform_int_distribution<long long> val(-3, 5);
    Rect rect = make_rect(ic({0, 0}), ic({2, 2}));
    for (int trial = 0; trial < 20; ++trial) {
      IntTable t(rect);
      for (size_t i = 0; i < t.idx.total(); ++i) t.val[i] = val(rng);
      auto m = table_model(std::move(t));
      auto best = min_path_eu(m, rect, PathStrategy::exhaustive);
      Int seen = best.eu;
      for (auto& p : all_increasing_paths(rect)) {
        Int e = path_eu_formula(m, p);
        CHECK(e >= best.eu);
        seen = std::min(seen, e);
      }
      CHECK(seen == best.eu);
      CHECK(path_eu_formula(m, best.path) == best.eu);
      auto greedy = min_path_eu(m, rect, PathStrategy::greedy, 4);
      CHECK(greedy.heuristic);
      CHECK(greedy.eu >= best.eu);
      CHECK(path_eu_formula(m, greedy.path) == greedy.eu);
    }
  }

  SECTION("paths are measured from the origin") {
    auto m = table_model(IntTable(make_rect(ic({1}), ic({3}))));
    CHECK_THROWS_AS(min_path_eu(m, m.domain()), input_error);
  }
}

TEST_CASE("rectangle truncation") {
  SECTION("a single -2 vertex stabilizes on [0, 2E]") {
    auto g = chain({-2});
    auto m = topo_weight(g, rc({"0"}));
    auto tr = truncate(m, Int(0));
    CHECK(tr.rect.lo == ic({0}));
    CHECK(tr.rect.hi == ic({2}));
    CHECK(tr.heuristic);
  }

  SECTION("analytic models use the cohomological cycle, exactly") {
    auto m = load_analytic("p1.json");
    auto tr = truncate(m, Int(5));
    CHECK(tr.rect.lo == ic({0, 0}));
    CHECK(tr.rect.hi == ic({2, 0}));
    CHECK_FALSE(tr.heuristic);
  }

  SECTION("combinatorial models keep their full domain") {
    auto m = combinatorial_weight(table1({0, 0, 1}), table1({1, 0, 0}));
    auto tr = truncate(m, Int(3));
    CHECK(tr.rect.lo == m.domain().lo);
    CHECK(tr.rect.hi == m.domain().hi);
    CHECK_FALSE(tr.heuristic);
  }

  SECTION("the growth cap is enforced") {
    auto g = chain({-2});
    auto m = topo_weight(g, rc({"0"}));
    CHECK_THROWS_AS(truncate(m, Int(0), 0), resource_error);
  }
}

TEST_CASE("module and root serialization") {
  auto m = load_analytic("p1.json");
  auto mod = lattice_cohomology(m, m.domain());
  auto j = module_to_json(mod);
  CHECK(j["min_weight"] == 0);
  CHECK(j["mode"] == "full");
  CHECK(j["eu"] == 1);
  CHECK(j["reduced_ranks"] == json::array({1, 0, 0}));
  REQUIRE(j["levels"].size() == 2);
  CHECK(j["levels"][0]["n"] == 0);
  CHECK(j["levels"][0]["degree"] == 0);
  CHECK(j["levels"][0]["betti"] == json::array({2, 0, 0}));
  CHECK(j["levels"][0]["u_rank"] == json::array({1, 0, 0}));
  CHECK(j["levels"][1]["n"] == 1);
  CHECK(j["levels"][1]["degree"] == 2);

  auto neg = combinatorial_weight(table1({0, 0, 1}), table1({1, 0, 0}));
  auto jm = module_to_json(lattice_cohomology(neg, neg.domain()));
  CHECK(jm["levels"][0]["n"] == -1);
  CHECK(jm["levels"][0]["degree"] == -2);

  auto root = graded_root(m, m.domain());
  auto jr = root_to_json(root);
  REQUIRE(jr["vertices"].size() == 3);
  CHECK(jr["vertices"][0]["n"] == 0);
  CHECK(jr["vertices"][0]["rep"] == json::array({0, 0}));
  CHECK(jr["vertices"][1]["rep"] == json::array({2, 0}));
  CHECK(jr["edges"].size() == 2);

  auto dot = root_to_dot(root);
  CHECK_THAT(dot, ContainsSubstring("graph gradedroot"));
  CHECK_THAT(dot, ContainsSubstring("rankdir=BT"));
  CHECK_THAT(dot, ContainsSubstring("rank=same"));
  CHECK_THAT(dot, ContainsSubstring("v0 -- v2;"));
  CHECK_THAT(dot, ContainsSubstring("v1 -- v2;"));
  CHECK_THAT(dot, ContainsSubstring("(2,0)"));
}

TEST_CASE("H0-only mode matches the degree-zero part") {
  auto m = load_analytic("p2.json");
  auto full = lattice_cohomology(m, m.domain(), CohMode::full);
  auto h0 = lattice_cohomology(m, m.domain(), CohMode::h0_only);
  CHECK(h0.h0_only);
  CHECK_FALSE(full.h0_only);
  CHECK(h0.min_weight == full.min_weight);
  CHECK(h0.reduced_ranks ==
        std::vector<long long>{full.reduced_ranks[0]});
  REQUIRE(h0.levels.size() == full.levels.size());
  for (size_t i = 0; i < h0.levels.size(); ++i) {
    CHECK(h0.levels[i].betti ==
          std::vector<long long>{full.levels[i].betti[0]});
    CHECK(h0.levels[i].u_rank ==
          std::vector<long long>{full.levels[i].u_rank[0]});
  }
  CHECK_FALSE(modules_equal(h0, full));
  // workers only change scheduling, never output
  auto par = lattice_cohomology(m, m.domain(), CohMode::full, 4);
  CHECK(modules_equal(par, full));
}

TEST_CASE("rectangles are validated against the model") {
  auto g = a_n(2);
  auto m = topo_weight(g, g.char_from_r(RationalCycle(2, Rat(0))));
  CHECK_THROWS_AS(lattice_cohomology(m, make_rect(ic({0}), ic({2}))),
                  input_error);
  auto t = table_model(table1({0, 1, 0}));
  CHECK_THROWS_AS(lattice_cohomology(t, make_rect(ic({0}), ic({5}))),
                  input_error);
}
