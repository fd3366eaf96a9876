#include <cstdlib>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <latcoh/compare.hpp>
#include <latcoh/io.hpp>

namespace {

using namespace latcoh;

// LATCOH_WORKERS overrides the --workers flag when set to a positive integer.
unsigned worker_count(unsigned flag_value) {
  if (const char* env = std::getenv("LATCOH_WORKERS")) {
    char* end = nullptr;
    unsigned long v = std::strtoul(env, &end, 10);
    if (end && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return flag_value > 0 ? flag_value : 1;
}

// ---------------------------------------------------------------------------
// Flag parsing helpers

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

RationalCycle parse_class_flag(const std::string& s) {
  RationalCycle out;
  for (auto& part : split(s, ',')) out.push_back(parse_rat(part));
  return out;
}

IntegerCycle parse_corner_flag(const std::string& s) {
  IntegerCycle out;
  for (auto& part : split(s, ',')) {
    try {
      out.push_back(Int(part));
    } catch (const std::exception&) {
      throw input_error("'" + part + "' is not an integer coordinate");
    }
    if (out.back() < 0) throw input_error("rectangle corners are nonnegative");
  }
  return out;
}

std::vector<IntegerCycle> parse_points_flag(const std::string& s) {
  std::vector<IntegerCycle> out;
  for (auto& part : split(s, ';')) out.push_back(parse_corner_flag(part));
  return out;
}

// The class a command works on: --class coordinates folded into [0,1)^s,
// defaulting to the trivial class.
RationalCycle resolve_class(const PlumbingGraph& g, const std::string& flag) {
  if (flag.empty()) return RationalCycle(g.size(), Rat(0));
  RationalCycle r = parse_class_flag(flag);
  if (r.size() != g.size())
    throw input_error("--class has " + std::to_string(r.size()) +
                      " coordinates, the graph has " +
                      std::to_string(g.size()) + " vertices");
  return g.class_of(r);
}

std::vector<size_t> resolve_vertex_ids(const PlumbingGraph& g,
                                       const std::string& flag) {
  std::vector<size_t> out;
  for (auto& id : split(flag, ',')) {
    size_t v = g.size();
    for (size_t i = 0; i < g.size(); ++i)
      if (g.vertices[i].id == id) v = i;
    if (v == g.size())
      throw input_error("no vertex with id '" + id + "' in the graph");
    out.push_back(v);
  }
  return out;
}

json class_to_json(const RationalCycle& r) {
  json out = json::array();
  for (auto& c : r) out.push_back(rat_str(c));
  return out;
}

json rect_to_json(const Rect& r) {
  json out = json::array();
  for (auto& c : r.hi) out.push_back(to_ll(c, "rect corner"));
  return out;
}

Rect rect_from_corner(IntegerCycle hi) {
  IntegerCycle lo(hi.size(), Int(0));
  return make_rect(std::move(lo), std::move(hi));
}

json path_to_json(const PathSpec& p) {
  json pts = json::array();
  for (auto& pt : p.points) {
    json q = json::array();
    for (auto& c : pt) q.push_back(to_ll(c, "path point"));
    pts.push_back(q);
  }
  return pts;
}

// ---------------------------------------------------------------------------
// Weight-model resolution shared by latcoh / root / path

struct ResolvedModel {
  WeightModel model;
  RationalCycle class_rep;       // r_h of the class being computed
  std::optional<HilbertData> data;  // keeps analytic tables alive
  bool analytic = false;
};

ResolvedModel resolve_model(const PlumbingGraph& g,
                            const std::string& class_flag,
                            const std::string& analytic_path) {
  ResolvedModel out;
  if (!analytic_path.empty()) {
    out.data = load_hilbert(analytic_path);
    if (out.data->dim() != g.size())
      throw input_error("Hilbert data has " +
                        std::to_string(out.data->dim()) +
                        " coordinates, the graph has " +
                        std::to_string(g.size()) + " vertices");
    if (!class_flag.empty())
      throw input_error("--class conflicts with --analytic: the data file "
                        "fixes the class");
    out.class_rep = g.class_of(out.data->class_rep);
    out.model = analytic_weight(*out.data);
    out.analytic = true;
    return out;
  }
  out.class_rep = resolve_class(g, class_flag);
  out.model = topo_weight(g, g.char_from_r(out.class_rep));
  return out;
}

// One computed module with its provenance; `rect_flag`/`n_max_flag` override
// the adaptive stabilization run.
struct ModuleRun {
  LatticeModule module;
  std::optional<GradedRoot> root;
  Rect rect;  // reduced-lattice axes when `reduced`
  bool heuristic = false;
  bool reduced = false;
};

ModuleRun run_module(const ResolvedModel& rm, const std::string& rect_flag,
                     std::optional<long long> n_max_flag, bool want_root,
                     unsigned workers) {
  ModuleRun out{{}, std::nullopt, rect_from_corner(IntegerCycle{}), false,
                false};
  if (!rect_flag.empty()) {
    Rect rect = rect_from_corner(parse_corner_flag(rect_flag));
    if (rect.dim() != (rm.model.bounded() ? rm.model.domain().dim()
                                          : rm.model.graph->size()))
      throw input_error("--rect dimension does not match the weight model");
    if (rm.model.bounded() && !cyc_le(rect.hi, rm.model.domain().hi))
      throw input_error("--rect exceeds the tabulated rectangle");
    out.module = lattice_cohomology(rm.model, rect, CohMode::full, workers);
    if (want_root) out.root = graded_root(rm.model, rect);
    out.rect = rect;
    // a user-fixed window certifies nothing beyond itself
    out.heuristic = !rm.model.bounded() ||
                    (rm.analytic && !cyc_le(*rm.model.z_coh, rect.hi));
    return out;
  }
  if (n_max_flag) {
    TruncateResult tr =
        truncate(rm.model, Int(*n_max_flag), 12, CohMode::full, workers);
    out.module = lattice_cohomology(rm.model, tr.rect, CohMode::full, workers);
    if (want_root) out.root = graded_root(rm.model, tr.rect);
    out.rect = tr.rect;
    out.heuristic = tr.heuristic;
    return out;
  }
  StableRun run = stable_module(rm.model, workers);
  out.module = std::move(run.module);
  if (want_root) out.root = std::move(run.root);
  out.rect = std::move(run.rect);
  out.heuristic = run.heuristic;
  out.reduced = run.reduced;
  return out;
}

// ---------------------------------------------------------------------------
// latcoh: lattice cohomology modules

int cmd_latcoh(const std::string& graph_path, const std::string& class_flag,
               bool all_classes, const std::vector<std::string>& analytic,
               const std::string& rect_flag,
               std::optional<long long> n_max_flag, bool want_root,
               unsigned workers) {
  PlumbingGraph g = load_graph(graph_path);
  json out;
  out["command"] = "latcoh";
  out["weights"] = analytic.empty() ? "topological" : "analytic";

  auto entry = [&](const ResolvedModel& rm) {
    ModuleRun run = run_module(rm, rect_flag, n_max_flag, want_root, workers);
    json e;
    e["class"] = class_to_json(rm.class_rep);
    e["rect"] = rect_to_json(run.rect);
    e["reduced"] = run.reduced;
    e["module"] = module_to_json(run.module);
    e["heuristic"] = run.heuristic;
    if (run.root) e["root"] = root_to_json(*run.root);
    return e;
  };

  if (all_classes || analytic.size() > 1) {
    if (!class_flag.empty())
      throw input_error("--class conflicts with --all-classes");
    json bundle = json::array();
    Int eu_total = 0;
    bool any_heuristic = false;
    if (analytic.empty()) {
      g.require_qhs3("class enumeration");
      for (auto& h : g.all_classes()) {
        ResolvedModel rm;
        rm.class_rep = h;
        rm.model = topo_weight(g, g.char_from_r(h));
        json e = entry(rm);
        eu_total += Int(e["module"]["eu"].get<long long>());
        any_heuristic = any_heuristic || e["heuristic"].get<bool>();
        bundle.push_back(std::move(e));
      }
    } else {
      for (auto& path : analytic) {
        json e = entry(resolve_model(g, "", path));
        eu_total += Int(e["module"]["eu"].get<long long>());
        any_heuristic = any_heuristic || e["heuristic"].get<bool>();
        bundle.push_back(std::move(e));
      }
    }
    out["classes"] = std::move(bundle);
    out["eu_total"] = to_ll(eu_total, "eu_total");
    out["heuristic"] = any_heuristic;
  } else {
    ResolvedModel rm =
        resolve_model(g, class_flag, analytic.empty() ? "" : analytic[0]);
    json e = entry(rm);
    for (auto& [k, v] : e.items()) out[k] = v;
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// root: graded roots, DOT by default

int cmd_root(const std::string& graph_path, const std::string& class_flag,
             const std::string& analytic_path, const std::string& rect_flag,
             std::optional<long long> n_max_flag, const std::string& format,
             unsigned workers) {
  PlumbingGraph g = load_graph(graph_path);
  ResolvedModel rm = resolve_model(g, class_flag, analytic_path);
  ModuleRun run = run_module(rm, rect_flag, n_max_flag, true, workers);
  if (format == "dot") {
    std::cout << root_to_dot(*run.root);
    return 0;
  }
  json out;
  out["command"] = "root";
  out["class"] = class_to_json(rm.class_rep);
  out["rect"] = rect_to_json(run.rect);
  out["reduced"] = run.reduced;
  out["root"] = root_to_json(*run.root);
  out["m_w"] = to_ll(run.root->m_w, "m_w");
  out["heuristic"] = run.heuristic;
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// path: path lattice cohomology and minimal-path search

int cmd_path(const std::string& graph_path, const std::string& class_flag,
             const std::string& analytic_path, const std::string& points_flag,
             bool min_mode, const std::string& rect_flag, bool greedy,
             unsigned long long beam, unsigned workers) {
  (void)workers;  // path computations are single lattice walks
  PlumbingGraph g = load_graph(graph_path);
  ResolvedModel rm = resolve_model(g, class_flag, analytic_path);
  json out;
  out["command"] = "path";
  out["class"] = class_to_json(rm.class_rep);
  if (min_mode) {
    Rect rect =
        rect_flag.empty()
            ? (rm.model.bounded()
                   ? rm.model.domain()
                   : throw input_error(
                         "--min needs --rect for topological weights"))
            : rect_from_corner(parse_corner_flag(rect_flag));
    MinPathResult mr = min_path_eu(
        rm.model, rect,
        greedy ? PathStrategy::greedy : PathStrategy::exhaustive,
        static_cast<size_t>(beam));
    out["rect"] = rect_to_json(rect);
    out["eu"] = to_ll(mr.eu, "path eu");
    out["path"] = path_to_json(mr.path);
    out["heuristic"] = mr.heuristic;
    std::cout << out.dump(2) << "\n";
    return 0;
  }
  if (points_flag.empty())
    throw input_error("path needs --points or --min");
  PathSpec path = make_path(parse_points_flag(points_flag));
  PathCohomology pc = path_cohomology(rm.model, path);
  out["path"] = path_to_json(path);
  out["increasing"] = path.increasing;
  out["module"] = module_to_json(pc.module);
  out["eu"] = to_ll(pc.eu, "path eu");
  out["eu_formula"] = to_ll(path_eu_formula(rm.model, path), "path eu");
  out["heuristic"] = false;
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// sw: normalized Euler characteristic / Seiberg-Witten invariant

json sw_to_json(const SwInvariant& sw) {
  json out;
  out["k_r"] = class_to_json(sw.k_r);
  out["k_sq"] = rat_str(sw.k_sq);
  out["eu"] = to_ll(sw.eu_value, "eu");
  out["sw"] = rat_str(sw.sw);
  out["heuristic"] = sw.heuristic;
  return out;
}

int cmd_sw(const std::string& graph_path, const std::string& class_flag,
           bool all_classes, unsigned workers) {
  PlumbingGraph g = load_graph(graph_path);
  json out;
  out["command"] = "sw";
  if (all_classes) {
    if (!class_flag.empty())
      throw input_error("--class conflicts with --all-classes");
    json bundle = json::array();
    for (auto& h : g.all_classes()) {
      json e = sw_to_json(sw_invariant(g, h, workers));
      e["class"] = class_to_json(h);
      bundle.push_back(std::move(e));
    }
    out["classes"] = std::move(bundle);
  } else {
    RationalCycle h = resolve_class(g, class_flag);
    json e = sw_to_json(sw_invariant(g, h, workers));
    e["class"] = class_to_json(h);
    for (auto& [k, v] : e.items()) out[k] = v;
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// reduce: B-set reduction with its certificate

json certificate_to_json(const PlumbingGraph& g, const BadSet& bad) {
  json bar = json::array();
  for (size_t v : bad.bar) bar.push_back(g.vertices[v].id);
  json out;
  out["bar"] = std::move(bar);
  out["decrement"] = bad.decrement;
  out["user_asserted"] = bad.user_asserted;
  return out;
}

int cmd_reduce(const std::string& graph_path, const std::string& bar_flag,
               long long cap, bool user_assert, const std::string& class_flag,
               const std::string& analytic_path, long long n_max,
               bool verify_full, unsigned workers) {
  PlumbingGraph g = load_graph(graph_path);
  std::vector<size_t> bar = bar_flag.empty()
                                ? std::vector<size_t>{}
                                : resolve_vertex_ids(g, bar_flag);
  BadSet bad =
      user_assert ? assert_bad_set(g, bar) : certify_bad_set(g, bar, cap);

  json out;
  out["command"] = "reduce";
  out["certificate"] = certificate_to_json(g, bad);
  // an asserted set was never searched; everything downstream leans on it
  bool heuristic = bad.user_asserted;

  if (!analytic_path.empty()) {
    if (!class_flag.empty())
      throw input_error("--class conflicts with --analytic: the data file "
                        "fixes the class");
    HilbertData d = load_hilbert(analytic_path);
    if (d.dim() != g.size())
      throw input_error("Hilbert data has " + std::to_string(d.dim()) +
                        " coordinates, the graph has " +
                        std::to_string(g.size()) + " vertices");
    ReducedWeightModel rm = reduce_analytic(d, bad);
    Rect rect = rm.table->rect;
    LatticeModule mod =
        reduced_lattice_cohomology(rm, rect, CohMode::full, workers);
    out["weights"] = "analytic";
    out["class"] = class_to_json(g.class_of(d.class_rep));
    out["rect"] = rect_to_json(rect);
    out["module"] = module_to_json(mod);
    out["heuristic"] = heuristic;
    if (verify_full) {
      LatticeModule full = lattice_cohomology(
          analytic_weight(d), truncate(analytic_weight(d), Int(n_max)).rect,
          CohMode::full, workers);
      bool agree = normalize_degrees(full) == normalize_degrees(mod);
      out["full_agrees"] = agree;
      std::cout << out.dump(2) << "\n";
      if (!agree) {
        std::cerr << "property failure: reduced module differs from the "
                     "full analytic module\n";
        return 1;
      }
      return 0;
    }
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  RationalCycle r = resolve_class(g, class_flag);
  ReducedWeightModel rm = reduce_topological(g, bad, r);
  Int ns = n_max;
  Rect rect = rect_from_corner(IntegerCycle{});
  LatticeModule mod;
  bool settled = false;
  for (int round = 0; round < 8 && !settled; ++round) {
    TruncateResult tr = reduced_truncate(rm, ns, 12, CohMode::full, workers);
    rect = tr.rect;
    mod = reduced_lattice_cohomology(rm, rect, CohMode::full, workers);
    if (mod.levels.empty() || mod.levels.back().n < ns)
      settled = true;
    else
      ns = mod.levels.back().n + 2;
  }
  if (!settled)
    throw resource_error("reduced module did not settle below a rising "
                         "level threshold");
  out["weights"] = "topological";
  out["class"] = class_to_json(rm.class_rep);
  out["normalization"] = "s_h";
  out["s_h"] = class_to_json(rm.s_h);
  out["shift_to_r"] =
      to_ll(g.chi_k(g.char_from_r(rm.class_rep), g.delta_of(rm.class_rep)),
            "normalization shift");
  out["rect"] = rect_to_json(rect);
  out["module"] = module_to_json(mod);
  out["heuristic"] = heuristic;

  if (verify_full) {
    WeightModel full_model = topo_weight(g, g.char_from_s(rm.class_rep));
    Int fn = n_max;
    LatticeModule full;
    bool full_settled = false;
    for (int round = 0; round < 8 && !full_settled; ++round) {
      TruncateResult tr = truncate(full_model, fn, 12, CohMode::full, workers);
      full = lattice_cohomology(full_model, tr.rect, CohMode::full, workers);
      if (full.levels.empty() || full.levels.back().n < fn)
        full_settled = true;
      else
        fn = full.levels.back().n + 2;
    }
    if (!full_settled)
      throw resource_error("full module did not settle below a rising "
                           "level threshold");
    bool agree = normalize_degrees(full) == normalize_degrees(mod);
    out["full_agrees"] = agree;
    std::cout << out.dump(2) << "\n";
    if (!agree) {
      std::cerr << "property failure: reduced module differs from the full "
                   "lattice module\n";
      return 1;
    }
    return 0;
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// compare: analytic vs topological modules of one class

int cmd_compare(const std::string& graph_path, const std::string& data_path,
                unsigned workers) {
  PlumbingGraph g = load_graph(graph_path);
  HilbertData d = load_hilbert(data_path);
  ComparisonReport rep = compare(g, d.class_rep, d, workers);
  json out;
  out["command"] = "compare";
  out["class"] = class_to_json(g.class_of(d.class_rep));
  out["rect"] = rect_to_json(rep.rect);
  out["isomorphic"] = rep.isomorphic;
  json defect = json::object();
  for (size_t i = 0; i < rep.defect.idx.total(); ++i)
    if (rep.defect.val[i] != 0)
      defect[detail::point_key(rep.defect.idx.point(i))] =
          to_ll(rep.defect.val[i], "defect");
  out["defect"] = std::move(defect);
  json levels = json::array();
  for (auto& lm : rep.levels) {
    json e;
    e["n"] = to_ll(lm.n, "level");
    e["top_components"] = lm.top_components;
    e["an_components"] = lm.an_components;
    e["map"] = lm.to;
    e["strict"] = lm.strict;
    levels.push_back(std::move(e));
  }
  out["levels"] = std::move(levels);
  out["top_module"] = module_to_json(rep.top_module);
  out["an_module"] = module_to_json(rep.an_module);
  out["heuristic"] = false;
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// blowup: the two moves, with an optional invariance check

int cmd_blowup(const std::string& graph_path, const std::string& at_flag,
               const std::string& edge_flag, const std::string& new_id,
               bool check, const std::string& class_flag, long long n_max,
               unsigned workers) {
  PlumbingGraph g = load_graph(graph_path);
  if (at_flag.empty() == edge_flag.empty())
    throw input_error("blowup needs exactly one of --at or --edge");
  BlowupMove move;
  move.new_id = new_id;
  if (!at_flag.empty()) {
    move.kind = BlowupMove::Kind::point;
    move.v0 = move.v1 = resolve_vertex_ids(g, at_flag).at(0);
  } else {
    auto ends = resolve_vertex_ids(g, edge_flag);
    if (ends.size() != 2)
      throw input_error("--edge takes two vertex ids separated by a comma");
    move.kind = BlowupMove::Kind::edge;
    move.v0 = ends[0];
    move.v1 = ends[1];
  }
  Blowup bu = blowup(g, move);
  json out;
  out["command"] = "blowup";
  out["kind"] = move.kind == BlowupMove::Kind::point ? "point" : "edge";
  out["graph"] = graph_to_json(bu.graph);
  out["new_vertex"] = bu.graph.vertices[bu.new_vertex].id;
  json transform = json::object();
  for (size_t v = 0; v < g.size(); ++v)
    transform[g.vertices[v].id] = bu.graph.vertices[bu.transform[v]].id;
  out["transform"] = std::move(transform);

  int rc = 0;
  if (check) {
    RationalCycle h = resolve_class(g, class_flag);
    BlowupCheck c =
        check_blowup_invariance(g, move, h, Int(n_max), workers);
    json jc;
    jc["class"] = class_to_json(h);
    jc["shifted"] = c.shifted;
    jc["modules_equal"] = c.modules_equal;
    jc["roots_equal"] = c.roots_equal;
    jc["sw_equal"] = c.sw_equal;
    jc["pass"] = c.pass();
    if (!c.failing_levels.empty()) {
      json lv = json::array();
      for (auto& n : c.failing_levels) lv.push_back(to_ll(n, "level"));
      jc["failing_levels"] = std::move(lv);
    }
    out["check"] = std::move(jc);
    if (!c.pass()) rc = 1;
  }
  std::cout << out.dump(2) << "\n";
  if (rc != 0)
    std::cerr << "property failure: blow-up invariance check failed\n";
  return rc;
}

// ---------------------------------------------------------------------------
// verify: the bundled property suite

struct VerifyCheck {
  std::string name;
  bool pass = true;
  bool skipped = false;
  std::string note;
};

// Random interleaving of +E_v steps from 0 to the far corner; always a valid
// increasing path.
PathSpec random_staircase(const Rect& rect, std::mt19937& rng) {
  std::vector<IntegerCycle> pts{rect.lo};
  IntegerCycle cur = rect.lo;
  std::vector<size_t> room;
  for (;;) {
    room.clear();
    for (size_t v = 0; v < cur.size(); ++v)
      if (cur[v] < rect.hi[v]) room.push_back(v);
    if (room.empty()) break;
    cur[room[rng() % room.size()]] += 1;
    pts.push_back(cur);
  }
  return make_path(std::move(pts));
}

int cmd_verify(const std::string& graph_path,
               const std::vector<std::string>& data_paths, unsigned seed,
               long long n_max, bool as_json, unsigned workers) {
  PlumbingGraph g = load_graph(graph_path);
  std::vector<VerifyCheck> checks;
  auto run = [&](const std::string& name, auto&& body) {
    VerifyCheck c{name, true, false, ""};
    try {
      body(c);
    } catch (const resource_error& e) {
      c.skipped = true;
      c.note = std::string("skipped: ") + e.what();
    } catch (const input_error& e) {
      c.pass = false;
      c.note = e.what();
    } catch (const property_error& e) {
      c.pass = false;
      c.note = e.what();
    }
    checks.push_back(std::move(c));
  };

  RationalCycle zero_class(g.size(), Rat(0));
  std::mt19937 rng(seed);

  // modest exact window around the truncation seed; every identity below
  // holds on any rectangle, so certified stabilization is not needed here
  auto ceil_rat = [](const Rat& x) { return Int(-floor_rat(-x)); };
  auto sample_rect = [&](const RationalCycle& r) {
    RationalCycle sh = g.s_of(r);
    IntegerCycle c(g.size());
    for (size_t v = 0; v < g.size(); ++v)
      c[v] = 2 + std::max(Int(0), std::max(ceil_rat(r[v]), ceil_rat(sh[v])));
    return rect_from_corner(std::move(c));
  };

  run("eu formula (topological)", [&](VerifyCheck& c) {
    WeightModel m = topo_weight(g, g.char_from_r(zero_class));
    Rect rect = sample_rect(zero_class);
    LatticeModule mod = lattice_cohomology(m, rect, CohMode::full, workers);
    Int direct = eu_cube_formula(m, rect);
    if (mod.eu != direct) {
      c.pass = false;
      c.note = "cube formula " + direct.str() + " vs module eu " +
               mod.eu.str() + " on " + cyc_str(rect.hi);
    }
  });

  run("path formula (topological)", [&](VerifyCheck& c) {
    WeightModel m = topo_weight(g, g.char_from_r(zero_class));
    Rect rect = sample_rect(zero_class);
    for (int i = 0; i < 25 && c.pass; ++i) {
      PathSpec p = random_staircase(rect, rng);
      Int a = path_eu_formula(m, p);
      Int b = path_cohomology(m, p).eu;
      if (a != b) {
        c.pass = false;
        c.note = "formula " + a.str() + " vs path module eu " + b.str();
      }
    }
  });

  run("reduction equality", [&](VerifyCheck& c) {
    std::optional<BadSet> bad = detail::auto_bad_set(g);
    if (!bad || bad->bar.size() >= g.size()) {
      c.skipped = true;
      c.note = bad ? "skipped: no proper B-set below the full vertex set"
                   : "skipped: no certified B-set";
      return;
    }
    ReducedWeightModel rm = reduce_topological(g, *bad, zero_class);
    Int ns = n_max;
    LatticeModule red;
    for (int round = 0;; ++round) {
      if (round >= 8)
        throw resource_error("reduced module did not settle");
      TruncateResult tr = reduced_truncate(rm, ns, 12, CohMode::full, workers);
      red = reduced_lattice_cohomology(rm, tr.rect, CohMode::full, workers);
      if (red.levels.empty() || red.levels.back().n < ns) break;
      ns = red.levels.back().n + 2;
    }
    WeightModel full_model = topo_weight(g, g.char_from_s(zero_class));
    Int fn = n_max;
    LatticeModule full;
    for (int round = 0;; ++round) {
      if (round >= 8)
        throw resource_error("full module did not settle");
      TruncateResult tr = truncate(full_model, fn, 12, CohMode::full, workers);
      full = lattice_cohomology(full_model, tr.rect, CohMode::full, workers);
      if (full.levels.empty() || full.levels.back().n < fn) break;
      fn = full.levels.back().n + 2;
    }
    if (!(normalize_degrees(full) == normalize_degrees(red))) {
      c.pass = false;
      c.note = "reduced module (bar size " +
               std::to_string(bad->bar.size()) +
               ") differs from the full module";
    } else {
      c.note = "bar size " + std::to_string(bad->bar.size()) +
               ", decrement " + std::to_string(bad->decrement);
    }
  });

  run("blow-up invariance", [&](VerifyCheck& c) {
    InvarianceReport rep = blowup_invariance(g, zero_class, Int(n_max),
                                             workers);
    if (!rep.pass) {
      c.pass = false;
      for (auto& e : rep.errors) {
        if (!c.note.empty()) c.note += "; ";
        c.note += e;
      }
    }
  });

  run("normalization shift", [&](VerifyCheck& c) {
    RationalCycle probe = zero_class;
    for (auto& h : g.all_classes())
      if (!cyc_is_zero(g.delta_of(h))) {
        probe = h;
        break;
      }
    NormalizationBridge br = normalization_shift_check(g, probe, workers);
    if (!br.modules_agree || !br.roots_agree) {
      c.pass = false;
      c.note = "r_h and s_h gradings disagree for class " + cyc_str(probe) +
               " under shift " + br.shift.str();
    }
  });

  for (auto& path : data_paths) {
    HilbertData d = load_hilbert(path);
    std::string tag = " (" + path + ")";
    bool valid = true;
    run("hilbert validation" + tag, [&](VerifyCheck& c) {
      for (auto& r : validate_hilbert(d, 1000000, seed)) {
        if (r.pass) continue;
        valid = false;
        c.pass = false;
        if (!c.note.empty()) c.note += "; ";
        c.note += r.check + ": " + r.witness;
      }
    });
    run("stability" + tag, [&](VerifyCheck& c) {
      CheckResult r = check_stability(d.h);
      c.pass = r.pass;
      c.note = r.witness;
    });
    run("combinatorial duality" + tag, [&](VerifyCheck& c) {
      IntTable hc(d.h1.rect);
      for (size_t i = 0; i < d.h1.idx.total(); ++i)
        hc.val[i] = d.p_gh - d.h1.val[i];
      CheckResult r = check_cdp(d.h, hc);
      c.pass = r.pass;
      c.note = r.witness;
    });
    if (!valid) continue;
    run("eu formula (analytic)" + tag, [&](VerifyCheck& c) {
      WeightModel m = analytic_weight(d, 1000000, seed);
      Rect rect = m.domain();
      LatticeModule mod = lattice_cohomology(m, rect, CohMode::full, workers);
      Int direct = eu_cube_formula(m, rect);
      if (mod.eu != direct) {
        c.pass = false;
        c.note = "cube formula " + direct.str() + " vs module eu " +
                 mod.eu.str();
      }
    });
    run("path formula (analytic)" + tag, [&](VerifyCheck& c) {
      WeightModel m = analytic_weight(d, 1000000, seed);
      Rect rect = m.domain();
      for (int i = 0; i < 25 && c.pass; ++i) {
        PathSpec p = random_staircase(rect, rng);
        Int a = path_eu_formula(m, p);
        Int b = path_cohomology(m, p).eu;
        if (a != b) {
          c.pass = false;
          c.note = "formula " + a.str() + " vs path module eu " + b.str();
        }
      }
    });
    run("comparison defect" + tag, [&](VerifyCheck& c) {
      if (d.dim() != g.size()) {
        c.skipped = true;
        c.note = "skipped: data has " + std::to_string(d.dim()) +
                 " coordinates, the graph has " + std::to_string(g.size());
        return;
      }
      ComparisonReport rep = compare(g, d.class_rep, d, workers);
      c.note = rep.isomorphic ? "isomorphic" : "defect present";
    });
  }

  bool all_pass = true;
  for (auto& c : checks) all_pass = all_pass && c.pass;

  if (as_json) {
    json out;
    out["command"] = "verify";
    json arr = json::array();
    for (auto& c : checks) {
      json e;
      e["name"] = c.name;
      e["pass"] = c.pass;
      e["skipped"] = c.skipped;
      if (!c.note.empty()) e["note"] = c.note;
      arr.push_back(std::move(e));
    }
    out["checks"] = std::move(arr);
    out["pass"] = all_pass;
    std::cout << out.dump(2) << "\n";
  } else {
    for (auto& c : checks) {
      std::cout << (c.pass ? (c.skipped ? "skip " : "ok   ") : "FAIL ")
                << c.name;
      if (!c.note.empty()) std::cout << "  [" << c.note << "]";
      std::cout << "\n";
    }
    std::cout << (all_pass ? "all checks passed" : "some checks FAILED")
              << "\n";
  }
  return all_pass ? 0 : 1;
}

void cmd_info(const std::string& graph_path, bool as_json) {
  PlumbingGraph g = load_graph(graph_path);
  if (as_json) {
    json out;
    out["vertices"] = g.size();
    out["det"] = g.determinant.str();
    out["order_of_H"] = Int(abs(g.determinant)).str();
    json f = json::array();
    for (auto& d : g.invariant_factors) f.push_back(d.str());
    out["invariant_factors"] = f;
    out["tree"] = g.tree;
    out["all_genus_zero"] = g.genus_zero;
    out["qhs3"] = g.qhs3();
    json zk = json::array();
    for (auto& c : g.z_k) zk.push_back(rat_str(c));
    out["z_k"] = zk;
    json zmin = json::array();
    for (auto& c : g.z_min) zmin.push_back(c.str());
    out["z_min"] = zmin;
    out["z_min_laufer_steps"] = g.z_min_steps;
    out["chi_z_min"] = g.chi(g.z_min).str();
    out["rational"] = g.rational_singularity();
    json duals = json::object();
    for (size_t v = 0; v < g.size(); ++v) {
      json col = json::array();
      for (auto& c : g.dual[v]) col.push_back(rat_str(c));
      duals[g.vertices[v].id] = col;
    }
    out["dual_basis"] = duals;
    std::cout << out.dump(2) << "\n";
    return;
  }
  std::cout << "vertices: " << g.size() << " (";
  for (size_t v = 0; v < g.size(); ++v)
    std::cout << (v ? ", " : "") << g.vertices[v].id << ":"
              << g.vertices[v].e;
  std::cout << ")\n";
  std::cout << "det I: " << g.determinant.str()
            << "   |H|: " << Int(abs(g.determinant)).str() << "\n";
  std::cout << "invariant factors:";
  for (auto& d : g.invariant_factors) std::cout << " " << d.str();
  std::cout << "\n";
  std::cout << "tree: " << (g.tree ? "yes" : "no")
            << "   all genus 0: " << (g.genus_zero ? "yes" : "no")
            << "   QHS3: " << (g.qhs3() ? "yes" : "no") << "\n";
  std::cout << "Z_K: " << cyc_str(g.z_k) << "\n";
  for (size_t v = 0; v < g.size(); ++v)
    std::cout << "E*_" << g.vertices[v].id << ": " << cyc_str(g.dual[v])
              << "\n";
  std::cout << "Z_min: " << cyc_str(g.z_min) << "  (Laufer steps: "
            << g.z_min_steps << ")\n";
  std::cout << "chi(Z_min): " << g.chi(g.z_min).str() << "\n";
  std::cout << "rational singularity: "
            << (g.rational_singularity() ? "yes" : "no") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "latcoh - equivariant lattice cohomology of negative definite "
      "plumbing graphs"};
  app.require_subcommand(1);
  unsigned workers_flag = 0;
  app.add_option("--workers", workers_flag,
                 "worker threads for class/level parallel work "
                 "(LATCOH_WORKERS overrides)");

  std::string graph_path;
  bool as_json = false;

  CLI::App* info = app.add_subcommand(
      "info", "print lattice invariants of a plumbing graph");
  info->add_option("graph", graph_path, "graph JSON file")->required();
  info->add_flag("--json", as_json, "emit JSON instead of text");

  std::string class_flag, rect_flag;
  bool all_classes = false, want_root = false;
  long long n_max_ll = 2;
  std::vector<std::string> analytic_paths;

  CLI::App* lat = app.add_subcommand(
      "latcoh", "compute the lattice cohomology module of a class");
  lat->add_option("graph", graph_path, "graph JSON file")->required();
  auto* lat_class = lat->add_option(
      "--class", class_flag, "class representative r_h, comma separated");
  lat->add_option("--analytic", analytic_paths,
                  "Hilbert data file(s); repeat for a bundle")
      ->excludes(lat_class);
  lat->add_flag("--all-classes", all_classes,
                "emit the direct-sum bundle over all of H");
  auto* lat_rect =
      lat->add_option("--rect", rect_flag, "far corner of R(0, c) override");
  auto* lat_nmax = lat->add_option(
      "--n-max", n_max_ll, "truncation threshold instead of stabilization");
  lat_nmax->excludes(lat_rect);
  lat->add_flag("--with-root", want_root, "include the graded root");

  CLI::App* root = app.add_subcommand("root", "emit the graded root");
  root->add_option("graph", graph_path, "graph JSON file")->required();
  root->add_option("--class", class_flag,
                   "class representative r_h, comma separated");
  std::string root_analytic, root_format = "dot";
  root->add_option("--analytic", root_analytic, "Hilbert data file");
  root->add_option("--rect", rect_flag, "far corner of R(0, c) override");
  root->add_option("--n-max", n_max_ll,
                   "truncation threshold instead of stabilization");
  root->add_option("--format", root_format, "dot or json")
      ->check(CLI::IsMember({"dot", "json"}));

  CLI::App* path = app.add_subcommand(
      "path", "path lattice cohomology along a lattice path");
  path->add_option("graph", graph_path, "graph JSON file")->required();
  path->add_option("--class", class_flag,
                   "class representative r_h, comma separated");
  std::string path_analytic, points_flag;
  bool min_mode = false, greedy = false;
  unsigned long long beam = 16;
  path->add_option("--analytic", path_analytic, "Hilbert data file");
  path->add_option("--points", points_flag,
                   "semicolon-separated lattice points, e.g. 0,0;1,0;1,1");
  path->add_flag("--min", min_mode,
                 "minimize eu over increasing paths instead");
  path->add_option("--rect", rect_flag, "far corner for --min");
  path->add_flag("--greedy", greedy, "beam search instead of exhaustive");
  path->add_option("--beam", beam, "beam width for --greedy");

  CLI::App* sw = app.add_subcommand(
      "sw", "normalized Euler characteristic / Seiberg-Witten invariant");
  sw->add_option("graph", graph_path, "graph JSON file")->required();
  sw->add_option("--class", class_flag,
                 "class representative r_h, comma separated");
  sw->add_flag("--all-classes", all_classes, "all spin-c structures");

  CLI::App* red = app.add_subcommand(
      "reduce", "B-set reduction of the lattice computation");
  red->add_option("graph", graph_path, "graph JSON file")->required();
  std::string bar_flag, red_analytic;
  long long cap = 16;
  bool user_assert = false, verify_full = false;
  red->add_option("--bar", bar_flag, "B-set as comma-separated vertex ids");
  red->add_option("--cap", cap, "decrement search cap for certification");
  red->add_flag("--assert", user_assert,
                "skip certification and trust the given set");
  red->add_option("--class", class_flag,
                  "class representative r_h, comma separated");
  red->add_option("--analytic", red_analytic, "Hilbert data file");
  red->add_option("--n-max", n_max_ll, "starting truncation threshold");
  red->add_flag("--verify-full", verify_full,
                "cross-check against the unreduced computation");

  CLI::App* cmp = app.add_subcommand(
      "compare", "compare analytic and topological modules of a class");
  cmp->add_option("graph", graph_path, "graph JSON file")->required();
  std::string data_path;
  cmp->add_option("data", data_path, "Hilbert data JSON file")->required();

  CLI::App* blow = app.add_subcommand("blowup", "blow up a vertex or edge");
  blow->add_option("graph", graph_path, "graph JSON file")->required();
  std::string at_flag, edge_flag, new_id;
  bool check = false;
  blow->add_option("--at", at_flag, "vertex id for a point blow-up");
  blow->add_option("--edge", edge_flag,
                   "two vertex ids, comma separated, for an edge blow-up");
  blow->add_option("--new-id", new_id, "id of the exceptional vertex");
  blow->add_flag("--check", check,
                 "verify module/root/sw invariance under the move");
  blow->add_option("--class", class_flag,
                   "class representative r_h for --check");
  blow->add_option("--n-max", n_max_ll, "truncation threshold for --check");

  CLI::App* ver = app.add_subcommand(
      "verify", "run the bundled property suite on one input");
  ver->add_option("graph", graph_path, "graph JSON file")->required();
  std::vector<std::string> verify_data;
  unsigned seed = 0;
  ver->add_option("--data", verify_data,
                  "Hilbert data file(s) to include in the suite");
  ver->add_option("--seed", seed, "seed for the sampled validators");
  ver->add_option("--n-max", n_max_ll, "truncation threshold");
  ver->add_flag("--json", as_json, "emit JSON instead of text lines");

  int rc = 0;
  try {
    app.parse(argc, argv);
    unsigned workers = worker_count(workers_flag);
    if (info->parsed()) cmd_info(graph_path, as_json);
    if (lat->parsed())
      rc = cmd_latcoh(graph_path, class_flag, all_classes, analytic_paths,
                      rect_flag,
                      lat_nmax->count() ? std::optional<long long>(n_max_ll)
                                        : std::nullopt,
                      want_root, workers);
    if (root->parsed())
      rc = cmd_root(graph_path, class_flag, root_analytic, rect_flag,
                    root->get_option("--n-max")->count()
                        ? std::optional<long long>(n_max_ll)
                        : std::nullopt,
                    root_format, workers);
    if (path->parsed())
      rc = cmd_path(graph_path, class_flag, path_analytic, points_flag,
                    min_mode, rect_flag, greedy, beam, workers);
    if (sw->parsed())
      rc = cmd_sw(graph_path, class_flag, all_classes, workers);
    if (red->parsed())
      rc = cmd_reduce(graph_path, bar_flag, cap, user_assert, class_flag,
                      red_analytic, n_max_ll, verify_full, workers);
    if (cmp->parsed()) rc = cmd_compare(graph_path, data_path, workers);
    if (blow->parsed())
      rc = cmd_blowup(graph_path, at_flag, edge_flag, new_id, check,
                      class_flag, n_max_ll, workers);
    if (ver->parsed())
      rc = cmd_verify(graph_path, verify_data, seed, n_max_ll, as_json,
                      workers);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const latcoh::input_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const latcoh::property_error& e) {
    std::cerr << "property failure: " << e.what() << "\n";
    return 1;
  } catch (const latcoh::resource_error& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return 3;
  }
  return rc;
}
