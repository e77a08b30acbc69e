#include <chrono>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "stabp2/ssc.hpp"
#include "stabp2/stab.hpp"

using namespace stabp2;
using nlohmann::json;

namespace {

struct Failure {
  std::string invariant;
};

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

json cj(cplx z) { return json::array({z.real(), z.imag()}); }

json mat_json(const Mat3& m) {
  json r = json::array();
  for (int i = 0; i < 3; ++i) {
    json row = json::array();
    for (int j = 0; j < 3; ++j) row.push_back(m(i, j).convert_to<long long>());
    r.push_back(row);
  }
  return r;
}

json mat_json(const Mat3c& m) {
  json r = json::array();
  for (int i = 0; i < 3; ++i) {
    json row = json::array();
    for (int j = 0; j < 3; ++j) row.push_back(cj(m(i, j)));
    r.push_back(row);
  }
  return r;
}

json kclass_json(const KClass& k) { return json::array({k[0].str(), k[1].str(), k[2].str()}); }

json triple_json(const SphericalTripleK& s) {
  json t = json::array();
  for (int i = 0; i < 3; ++i) t.push_back(kclass_json(s[i]));
  json m = json::array();
  for (auto& v : s.markov) m.push_back(v.str());
  return {{"classes", t}, {"markov", m}};
}

cplx parse_complex(const std::string& s) {
  std::stringstream ss(s);
  double re = 0, im = 0;
  char comma = 0;
  if (!(ss >> re)) throw UsageError("bad complex number '" + s + "'");
  if (ss >> comma) {
    if (comma != ',' || !(ss >> im)) throw UsageError("bad complex number '" + s + "', expected re,im");
  }
  return {re, im};
}

Charges parse_charges(const std::string& s) {
  Charges z{};
  std::stringstream ss(s);
  std::string part;
  int n = 0;
  while (std::getline(ss, part, ';')) {
    if (n >= 3) throw UsageError("expected three charges separated by ';'");
    z[n++] = parse_complex(part);
  }
  if (n != 3) throw UsageError("expected three charges separated by ';'");
  return z;
}

BraidWord parse_word_arg(const std::string& s) {
  try {
    return parse_word(s);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

void require(bool ok, const std::string& invariant, std::vector<std::string>& failed) {
  if (!ok) failed.push_back(invariant);
}

// ---------------------------------------------------------------- formatting

void pretty(const json& j, std::ostream& os, int indent) {
  std::string pad(indent, ' ');
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it->is_structured() && !(it->is_array() && !it->empty() && !(*it)[0].is_structured())) {
        os << pad << it.key() << ":\n";
        pretty(*it, os, indent + 2);
      } else {
        os << pad << it.key() << ": " << it->dump() << "\n";
      }
    }
  } else if (j.is_array()) {
    for (auto& v : j) {
      if (v.is_object()) {
        os << pad << "-\n";
        pretty(v, os, indent + 2);
      } else {
        os << pad << "- " << v.dump() << "\n";
      }
    }
  } else {
    os << pad << j.dump() << "\n";
  }
}

std::string csv_cell(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

// Tables are emitted as-is; other reports as key,value lines of their scalar entries.
void csv(const json& j, std::ostream& os) {
  if (j.contains("table")) {
    const json& t = j["table"];
    for (size_t i = 0; i < t["columns"].size(); ++i) os << (i ? "," : "") << csv_cell(t["columns"][i]);
    os << "\n";
    for (auto& row : t["rows"]) {
      for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i]);
      os << "\n";
    }
    return;
  }
  os << "key,value\n";
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!it->is_structured()) os << it.key() << "," << csv_cell(*it) << "\n";
}

// ---------------------------------------------------------------- subcommands

json cmd_regions(int depth, bool list) {
  RegionGraph g = region_bfs(depth);
  json r{{"depth", depth}, {"nodes", g.nodes.size()}, {"edges", g.edges.size()}};
  std::vector<std::string> failed;
  bool markov_ok = true;
  json nodes = json::array();
  for (auto& n : g.nodes) {
    auto m = n.triple.markov;
    BigInt a = m[0], b = m[1], c = m[2];
    bool ok = a > 0 && b > 0 && c > 0 && a % 3 == 0 && b % 3 == 0 && c % 3 == 0 && a * a + b * b + c * c == a * b * c;
    markov_ok = markov_ok && ok;
    if (list) nodes.push_back({{"word", format_word(n.word)}, {"depth", n.depth}, {"markov", triple_json(n.triple)["markov"]}});
  }
  require(markov_ok, "markov equation a^2+b^2+c^2=abc with 3 | a,b,c", failed);
  r["markov_ok"] = markov_ok;
  if (list) {
    r["node_list"] = nodes;
    json rows = json::array();
    for (auto& n : nodes) rows.push_back({n["word"], n["depth"], n["markov"][0], n["markov"][1], n["markov"][2]});
    r["table"] = {{"columns", {"word", "depth", "a", "b", "c"}}, {"rows", rows}};
  }
  r["failed"] = failed;
  return r;
}

json structural(const TwistMatrices& T, std::vector<std::string>& failed) {
  Mat3 J = euler_gram();
  KClass one{1, 1, 1};
  bool det = true, fix = true, nil = true, iso = true;
  for (int i = 0; i < 3; ++i) {
    const Mat3& P = T[i];
    det = det && P.det() == 1;
    fix = fix && P * one == one;
    Mat3 N = P - Mat3::identity();
    nil = nil && (N * N).is_zero();
    iso = iso && (P.transpose() * J * P - J).is_zero();
  }
  require(det, "det P_i = 1", failed);
  require(fix, "P_i fixes (1,1,1)", failed);
  require(nil, "(P_i - I)^2 = 0", failed);
  require(iso, "P_i^T J P_i = J", failed);
  return {{"det_one", det}, {"fixes_ox", fix}, {"unipotent", nil}, {"preserves_euler_form", iso}};
}

json cmd_matrices(const std::string& word) {
  BraidWord w = parse_word_arg(word);
  TwistMatrices T = braid_matrices(w);
  std::vector<std::string> failed;
  json r{{"word", format_word(w)}};
  json ps = json::array();
  for (int i = 0; i < 3; ++i) ps.push_back(mat_json(T[i]));
  r["P"] = ps;
  r["checks"] = structural(T, failed);
  r["failed"] = failed;
  return r;
}

json cmd_markov(const std::string& word) {
  BraidWord w = parse_word_arg(word);
  SphericalTripleK s = apply_word(w);
  json r{{"word", format_word(w)}};
  r.update(triple_json(s));
  json sorted = json::array();
  for (auto& v : s.markov_sorted()) sorted.push_back(v.str());
  r["markov_sorted"] = sorted;
  auto m = s.markov;
  bool ok = m[0] * m[0] + m[1] * m[1] + m[2] * m[2] == m[0] * m[1] * m[2];
  r["failed"] = ok ? json::array() : json::array({"markov equation"});
  return r;
}

json cmd_wallcross(const std::string& word, const std::string& zs, int index, const std::string& dir) {
  if (index < 0 || index > 2) throw UsageError("--index must be 0, 1 or 2");
  if (dir != "down" && dir != "up") throw UsageError("--direction must be down or up");
  Direction d = dir == "down" ? Direction::down : Direction::up;
  StabilityChart ch = StabilityChart::make(parse_word_arg(word), parse_charges(zs));
  StabilityChart out;
  try {
    out = cross_wall(ch, index, d);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  // crossing back must restore the chart
  int back_index = d == Direction::down ? (index + 2) % 3 : (index + 1) % 3;
  StabilityChart back = cross_wall(out, back_index, d == Direction::down ? Direction::up : Direction::down);
  double coord = 0;
  for (int i = 0; i < 3; ++i) coord = std::max(coord, std::abs(back.z[i] - ch.z[i]));
  Charges f0 = fixed_charges(ch), f1 = fixed_charges(out);
  double ox = std::abs((f0[0] + f0[1] + f0[2]) - (f1[0] + f1[1] + f1[2]));
  std::vector<std::string> failed;
  require(format_word(back.word) == format_word(ch.word), "roundtrip word", failed);
  require(coord < 1e-12, "roundtrip coordinates", failed);
  require(ox < 1e-12, "Z(O_x) preserved", failed);
  json r{{"from", to_json(ch)}, {"to", to_json(out)}, {"letter", format_word(BraidWord{{crossing_letter(index, d)}})},
         {"roundtrip_coordinate_error", coord}, {"z_ox_change", ox}, {"failed", failed}};
  return r;
}

json cmd_adjacency(int depth, unsigned seed, bool global) {
  AdjacencyReport a = adjacency_check(depth, seed, global);
  std::vector<std::string> failed;
  require(a.mismatches == 0, "adjacency equals Cayley graph", failed);
  json r{{"depth", a.depth}, {"regions", a.regions}, {"faces", a.faces}, {"adjacent_pairs", a.adjacent_pairs},
         {"cayley_edges", a.cayley_edges}, {"mismatches", a.mismatches}, {"self_adjacent", a.self_adjacent},
         {"ambiguous", a.ambiguous}, {"z_only_ambiguous", a.z_only_ambiguous}, {"details", a.details}, {"failed", failed}};
  return r;
}

json cmd_gw(int kmax) {
  GWTable t = gw_numbers_cached(kmax, default_cache_path());
  json r{{"kmax", kmax}};
  json n = json::array(), rows = json::array();
  for (int k = 1; k <= kmax; ++k) {
    n.push_back(t(k).str());
    rows.push_back({k, t(k).str()});
  }
  r["n"] = n;
  r["table"] = {{"columns", {"k", "n_k"}}, {"rows", rows}};
  std::vector<std::string> failed;
  require(t(1) == 1 && (kmax < 2 || t(2) == 1) && (kmax < 3 || t(3) == 12) && (kmax < 4 || t(4) == 620),
          "low degree values 1, 1, 12, 620", failed);
  r["failed"] = failed;
  return r;
}

json cmd_frobenius(int samples, unsigned seed, int kmax) {
  std::mt19937_64 rng(seed);
  double assoc = 0, comm = 0, unit = 0;
  for (int n = 0; n < samples; ++n) {
    FrobeniusPoint p = random_guarded_point(rng, kmax);
    ProductTensor P = product(p);
    assoc = std::max(assoc, associativity_residual(P));
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        comm = std::max(comm, (P.multiply(Vec3c::Unit(a), Vec3c::Unit(b)) - P.multiply(Vec3c::Unit(b), Vec3c::Unit(a))).norm());
      }
    for (int a = 0; a < 3; ++a) unit = std::max(unit, (P.multiply(Vec3c::Unit(0), Vec3c::Unit(a)) - Vec3c::Unit(a)).norm());
  }
  std::vector<std::string> failed;
  require(assoc < 1e-8, "WDVV associativity < 1e-8", failed);
  require(comm < 1e-12, "commutativity", failed);
  require(unit < 1e-12, "unit e_0", failed);
  return {{"samples", samples}, {"kmax", kmax}, {"seed", seed}, {"associativity_residual", assoc},
          {"commutativity_residual", comm}, {"unit_residual", unit}, {"failed", failed}};
}

json cmd_basepoint() {
  FrobeniusPoint p = solve_base_point();
  UOperator U = u_operator(p);
  double dev = 0;
  for (int k = 0; k < 3; ++k) {
    cplx root = std::polar(1.0, 2 * kPi * k / 3);
    double best = 1e300;
    for (auto& v : U.u) best = std::min(best, std::abs(v - root));
    dev = std::max(dev, best);
  }
  json u = json::array();
  for (auto& v : U.u) u.push_back(cj(v));
  std::vector<std::string> failed;
  require(dev < 1e-10, "eigenvalues are cube roots of unity", failed);
  return {{"t", {cj(p.t[0]), cj(p.t[1]), cj(p.t[2])}}, {"eigenvalues", u}, {"max_deviation", dev},
          {"U", mat_json(U.U)}, {"failed", failed}};
}

json cmd_monodromy(double s, bool with_q_loop) {
  ConnectionConfig cfg{s, kCharge};
  FrobeniusPoint p = solve_base_point();
  auto t0 = std::chrono::steady_clock::now();
  MonodromyResult m = loop_monodromy(p, cfg, standard_loops(u_operator(p)));
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json M = json::array();
  for (auto& x : m.M) M.push_back(mat_json(x));
  json sv = json::array();
  for (double v : m.singular_values) sv.push_back(v);
  std::vector<std::string> failed;
  require(m.unipotency < 1e-6, "unipotency |(M_i - I)^2| < 1e-6", failed);
  require(m.conjugation_residual.has_value(), "invertible conjugator (intertwiner has rank " + std::to_string(m.rank_C) + ")", failed);
  if (m.conjugation_residual) require(*m.conjugation_residual < 1e-5, "conjugation residual < 1e-5", failed);
  json r{{"s", s}, {"c", cfg.c()}, {"M", M}, {"C", mat_json(m.C)}, {"rank_C", m.rank_C},
         {"solution_dim", m.solution_dim}, {"intertwiner_singular_values", sv},
         {"intertwine_residual", m.intertwine_residual},
         {"residual", m.conjugation_residual ? json(*m.conjugation_residual) : json(nullptr)},
         {"unipotency", m.unipotency}, {"det_defect", m.det_defect}, {"fixed_vector_residual", m.fixed_vector_residual},
         {"steps", m.steps}, {"seconds", std::round(secs * 10) / 10}};
  if (with_q_loop) {
    PeriodGauge g = make_period_gauge(cfg);
    double q1 = q_loop_residual(g, -1), q2 = q_loop_residual(g, 1);
    r["q_loop_residual"] = std::max(q1, q2);
    require(std::max(q1, q2) < 1e-5, "q-loop realizes r with residual < 1e-5", failed);
  }
  r.erase("seconds");  // keep the report deterministic
  r["failed"] = failed;
  return r;
}

json cmd_pf(const std::vector<double>& zs, double h) {
  if (h <= 0 || h > 0.01) throw UsageError("--step must lie in (0, 0.01]");
  for (double z : zs)
    if (!(z > 0 && z * std::exp(4 * h) < 1)) throw UsageError("z must lie in (0, 1)");
  PeriodGauge g = make_period_gauge();
  json rows = json::array(), reps = json::array();
  std::vector<std::string> failed;
  for (double z : zs) {
    PFReport p = pf_check(g, z, h);
    reps.push_back({{"z", z}, {"h", h}, {"residual_h", p.residual_h}, {"residual_2h", p.residual_2h},
                    {"extrapolated", p.extrapolated}, {"ratio", p.ratio}});
    rows.push_back({z, p.residual_h, p.residual_2h, p.ratio});
    require(p.residual_h < 1e-4, "PF residual < 1e-4 at z=" + json(z).dump(), failed);
    require(p.ratio > 3 && p.ratio < 5, "h^2 scaling at z=" + json(z).dump(), failed);
  }
  return {{"reports", reps}, {"table", {{"columns", {"z", "residual_h", "residual_2h", "ratio"}}, {"rows", rows}}},
          {"failed", failed}};
}

json cmd_p1(const std::string& lambda, const std::string& loop) {
  json r;
  std::vector<std::string> failed;
  if (!lambda.empty()) {
    cplx l = parse_complex(lambda);
    if (l == 0.0 || l == 1.0) throw UsageError("lambda must avoid 0 and 1");
    cplx W = p1_period(l);
    double def = std::abs(std::cos(kPi * W) - p1_argument(l));
    r["lambda"] = cj(l);
    r["W"] = cj(W);
    r["cos_defect"] = def;
    require(def < 1e-12 * std::max(1.0, std::abs(p1_argument(l))), "cos(pi W) = (1+l)/(1-l)", failed);
  }
  if (!loop.empty()) {
    std::vector<cplx> path;
    if (loop == "0")
      path = circle_path(0.0, 0.3);
    else if (loop == "1")
      path = circle_path(1.0, 0.3);
    else if (loop == "both")
      path = circle_path(0.5, 2.0);
    else
      throw UsageError("--loop must be 0, 1 or both");
    P1Affine a = p1_monodromy(path);
    r["loop"] = loop;
    r["epsilon"] = a.epsilon;
    r["k"] = a.k;
    r["integrality_defect"] = a.integrality_defect;
    r["W_start"] = cj(a.W_start);
    r["W_end"] = cj(a.W_end);
    require(a.integrality_defect < 1e-8, "W -> eps W + 2k with integer k", failed);
  }
  if (lambda.empty() && loop.empty()) throw UsageError("p1 needs --lambda or --loop");
  r["failed"] = failed;
  return r;
}

json cmd_probe(int n) {
  if (n < 1 || n > 200) throw UsageError("--samples must be in [1, 200]");
  PeriodGauge g = make_period_gauge();
  ProbeReport p = conjecture_probe(g, n);
  json samples = json::array(), rows = json::array();
  for (auto& s : p.samples) {
    samples.push_back({{"z", s.z}, {"W", {cj(s.W[0]), cj(s.W[1]), cj(s.W[2])}}, {"sum_defect", std::abs(s.sum_defect)},
                       {"jacobian", cj(s.jacobian)}, {"in_identity_region", s.in_identity_region}});
    rows.push_back({s.z, s.W[0].real(), s.W[0].imag(), s.W[1].real(), s.W[1].imag(), s.W[2].real(), s.W[2].imag()});
  }
  std::vector<std::string> failed;
  require(p.max_sum_defect < 1e-10, "normalization sum W_i = i", failed);
  require(p.min_abs_jacobian > 1e-8, "local isomorphism (|det| > 1e-8)", failed);
  require(p.base_in_identity_region, "base point in the identity region", failed);
  return {{"conjecture_status", "unproven"},
          {"note", "the probe can only falsify necessary conditions of the conjecture"},
          {"samples", samples},
          {"max_sum_defect", p.max_sum_defect},
          {"min_abs_jacobian", p.min_abs_jacobian},
          {"samples_in_identity_region", p.in_identity_region},
          {"base_in_identity_region", p.base_in_identity_region},
          {"table", {{"columns", {"z", "ReW0", "ImW0", "ReW1", "ImW1", "ReW2", "ImW2"}}, {"rows", rows}}},
          {"failed", failed}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stabp2: stability conditions on local P^2 and quantum cohomology of P^2"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string format = "json";
  unsigned seed = 1;
  app.add_option("--format", format, "json, csv or pretty")->check(CLI::IsMember({"json", "csv", "pretty"}));
  app.add_option("--seed", seed, "random seed");

  int depth = 2, kmax = 12, samples = 20, index = 0, probe_n = 8;
  bool list = false, global = false, standard = false, q_loop = false;
  std::string word, zs, dir = "down", lambda, loop;
  double s_param = -0.5, h = 0.01;
  std::vector<double> pf_z{0.05, 0.1, 0.2};

  auto* regions = app.add_subcommand("regions", "breadth-first enumeration of regions");
  regions->add_option("--depth", depth)->check(CLI::Range(0, kDefaultDepthCap));
  regions->add_flag("--list", list, "list the nodes");
  auto* matrices = app.add_subcommand("matrices", "twist matrices P_0, P_1, P_2 of a region");
  matrices->add_option("--word", word)->required();
  auto* markov = app.add_subcommand("markov", "exceptional triple and Markov numbers of a region");
  markov->add_option("--word", word)->required();
  auto* wall = app.add_subcommand("wallcross", "cross a wall of a chart");
  wall->add_option("--word", word);
  wall->add_option("--z", zs, "charges 're,im;re,im;re,im'")->required();
  wall->add_option("--index", index)->required();
  wall->add_option("--direction", dir);
  auto* adj = app.add_subcommand("adjacency", "compare region adjacency with the Cayley graph");
  adj->add_option("--depth", depth)->check(CLI::Range(0, kDefaultDepthCap - 1));
  adj->add_flag("--global", global, "search the whole ball for the neighbour");
  auto* gw = app.add_subcommand("gw", "genus zero Gromov-Witten invariants of P^2");
  gw->add_option("--kmax", kmax)->check(CLI::Range(1, kMaxDegree));
  auto* frob = app.add_subcommand("frobenius-check", "unit, commutativity and WDVV at random points");
  frob->add_option("--samples", samples)->check(CLI::Range(1, 1000));
  frob->add_option("--kmax", kmax)->check(CLI::Range(1, kMaxDegree));
  auto* base = app.add_subcommand("basepoint", "the point where U has eigenvalues 1, w, w^2");
  auto* mono = app.add_subcommand("monodromy", "loop monodromy of the second structure connection");
  mono->add_flag("--standard", standard, "standard loops at the base point (default)");
  mono->add_option("--s", s_param, "connection parameter s");
  mono->add_flag("--q-loop", q_loop, "also transport around t1 -> t1 +- 2 pi i");
  auto* pf = app.add_subcommand("pf-check", "Picard-Fuchs residual of the computed periods");
  pf->add_option("--z", pf_z);
  pf->add_option("--step", h, "stencil spacing in log z");
  auto* p1 = app.add_subcommand("p1", "periods of the P^1 case");
  p1->add_option("--lambda", lambda, "'re,im'");
  p1->add_option("--loop", loop, "0, 1 or both");
  auto* probe = app.add_subcommand("conjecture-probe", "necessary conditions of the conjecture along the small locus");
  probe->add_option("--samples", probe_n);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  json report;
  std::string name = app.get_subcommands().front()->get_name();
  try {
    if (regions->parsed()) report = cmd_regions(depth, list);
    else if (matrices->parsed()) report = cmd_matrices(word);
    else if (markov->parsed()) report = cmd_markov(word);
    else if (wall->parsed()) report = cmd_wallcross(word, zs, index, dir);
    else if (adj->parsed()) report = cmd_adjacency(depth, seed, global);
    else if (gw->parsed()) report = cmd_gw(kmax);
    else if (frob->parsed()) report = cmd_frobenius(samples, seed, kmax);
    else if (base->parsed()) report = cmd_basepoint();
    else if (mono->parsed()) report = cmd_monodromy(s_param, q_loop);
    else if (pf->parsed()) report = cmd_pf(pf_z, h);
    else if (p1->parsed()) report = cmd_p1(lambda, loop);
    else if (probe->parsed()) report = cmd_probe(probe_n);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n" << app.get_subcommands().front()->help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << name << ": verification failed: " << e.what() << "\n";
    return 1;
  }
  report["command"] = name;
  report["ok"] = report["failed"].empty();

  if (format == "json")
    std::cout << report.dump(2) << "\n";
  else if (format == "csv")
    csv(report, std::cout);
  else
    pretty(report, std::cout, 0);

  if (!report["failed"].empty()) {
    for (auto& f : report["failed"]) std::cerr << name << ": invariant failed: " << f.get<std::string>() << "\n";
    return 1;
  }
  return 0;
}
