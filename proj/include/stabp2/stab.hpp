#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tilt.hpp"

namespace stabp2 {

using cplx = std::complex<double>;
using Charges = std::array<cplx, 3>;

inline double to_double(const BigInt& v) { return v.convert_to<double>(); }

// A point of Stab0 in the chart of region g: z_i = Z(S_i(g)).
struct StabilityChart {
  BraidWord word;
  SphericalTripleK triple;
  Charges z{};

  static StabilityChart make(const BraidWord& w, const Charges& z) {
    if (!w.is_group_word()) throw std::invalid_argument("chart words may not contain r");
    BraidWord r = free_reduce(w);
    return {r, apply_word(r), z};
  }
};

// Z on the fixed basis ([S0],[S1],[S2]) recovered from the chart
inline Charges fixed_charges(const StabilityChart& ch) {
  Charges out{};
  for (int j = 0; j < 3; ++j) {
    KClass c = ch.triple.coords(basis(j));
    for (int i = 0; i < 3; ++i) out[j] += to_double(c[i]) * ch.z[i];
  }
  return out;
}

inline Charges chart_charges(const SphericalTripleK& s, const Charges& fixed) {
  Charges z{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) z[i] += to_double(s[i][j]) * fixed[j];
  return z;
}

inline cplx charge_of(const StabilityChart& ch, const KClass& x) {
  KClass c = ch.triple.coords(x);
  cplx s = 0;
  for (int i = 0; i < 3; ++i) s += to_double(c[i]) * ch.z[i];
  return s;
}

// interior: all Im z > 0; boundary(i): z_i < 0 real, rest interior;
// coboundary(i): z_i > 0 real, rest interior. The last one is not a point of
// D(g) but of the closure, reached right after crossing into g.
enum class MemberKind { interior, boundary, coboundary, invalid };

struct Membership {
  MemberKind kind = MemberKind::invalid;
  int index = -1;
  friend bool operator==(const Membership&, const Membership&) = default;
};

inline Membership membership(const Charges& z, double tol = 0.0) {
  int real_idx = -1, nreal = 0;
  for (int i = 0; i < 3; ++i) {
    double im = z[i].imag();
    if (std::abs(im) <= tol * std::max(1.0, std::abs(z[i]))) {
      ++nreal;
      real_idx = i;
    } else if (im < 0) {
      return {MemberKind::invalid, -1};
    }
  }
  if (nreal == 0) return {MemberKind::interior, -1};
  if (nreal > 1) return {MemberKind::invalid, -1};
  double re = z[real_idx].real();
  if (re < 0) return {MemberKind::boundary, real_idx};
  if (re > 0) return {MemberKind::coboundary, real_idx};
  return {MemberKind::invalid, -1};
}

inline Membership membership(const StabilityChart& ch, double tol = 0.0) { return membership(ch.z, tol); }

enum class Direction { down, up };

inline std::string to_string(Direction d) { return d == Direction::down ? "down" : "up"; }

// The letter taking region g to its neighbour across a face: a negative real
// z_i crossed downward gives tau_i g, a positive real z_i crossed downward
// gives tau_{i+1}^{-1} g.
inline Letter crossing_letter(int index, Direction d) {
  return d == Direction::down ? Letter{index, false} : Letter{(index + 1) % 3, true};
}

inline StabilityChart cross_wall(const StabilityChart& ch, int index, Direction d, double tol = 0.0) {
  Membership m = membership(ch, tol);
  MemberKind need = d == Direction::down ? MemberKind::boundary : MemberKind::coboundary;
  if (m.kind != need || m.index != index)
    throw std::invalid_argument("cross_wall precondition: z_" + std::to_string(index) + " is not on the " +
                                (d == Direction::down ? "negative" : "positive") + " real axis");
  Letter l = crossing_letter(index, d);
  StabilityChart out;
  out.word = prepend(l, ch.word);
  out.triple = apply_generator(ch.triple, l);
  // the new classes have small coordinates in the old triple, so go through those
  for (int j = 0; j < 3; ++j) out.z[j] = charge_of(ch, out.triple[j]);
  // the wall coordinate of the new chart is exactly -z_index
  int slot = d == Direction::down ? (index + 2) % 3 : (index + 1) % 3;
  out.z[slot] = -ch.z[index];
  return out;
}

struct WallEvent {
  int index = 0;
  double time = 0;  // segment number + local parameter
  Direction direction = Direction::down;
  BraidWord new_word;
};

class DegenerateCrossing : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kCoincidence = 1e-9;
inline constexpr int kMaxWallsPerSegment = 64;

// Follows a piecewise linear path of fixed-basis charges, switching charts at walls.
inline std::pair<StabilityChart, std::vector<WallEvent>> continue_path(const StabilityChart& start,
                                                                        const std::vector<Charges>& path) {
  if (path.empty()) return {start, {}};
  Charges f0 = fixed_charges(start);
  for (int j = 0; j < 3; ++j)
    if (std::abs(f0[j] - path[0][j]) > 1e-9 * std::max(1.0, std::abs(f0[j])))
      throw std::invalid_argument("path does not start at the chart");
  StabilityChart cur = start;
  std::vector<WallEvent> events;
  for (size_t seg = 0; seg + 1 < path.size(); ++seg) {
    const Charges& A = path[seg];
    const Charges& Bv = path[seg + 1];
    double s = 0;
    for (int guard = 0;; ++guard) {
      // D(tau_i^n g) walls can pile up toward a limit point on a path
      if (guard == kMaxWallsPerSegment)
        throw DegenerateCrossing("walls accumulate on segment " + std::to_string(seg));
      Charges a = chart_charges(cur.triple, A), b = chart_charges(cur.triple, Bv);
      // z_i(s) = a_i + s (b_i - a_i)
      std::vector<std::pair<double, int>> hits;
      for (int i = 0; i < 3; ++i) {
        double ia = a[i].imag(), slope = b[i].imag() - ia;
        double im_now = cur.z[i].imag();
        if (slope >= 0) continue;
        double sh = -ia / slope;
        if (im_now <= 0) sh = s;  // sitting on the axis and moving down
        if (sh < s || sh > 1) continue;
        hits.emplace_back(sh, i);
      }
      if (hits.empty()) break;
      std::sort(hits.begin(), hits.end());
      if (hits.size() > 1 && hits[1].first - hits[0].first < kCoincidence)
        throw DegenerateCrossing("simultaneous walls for z_" + std::to_string(hits[0].second) + " and z_" +
                                 std::to_string(hits[1].second));
      auto [sh, i] = hits[0];
      Charges fixed;
      for (int j = 0; j < 3; ++j) fixed[j] = A[j] + sh * (Bv[j] - A[j]);
      StabilityChart at = cur;
      at.z = chart_charges(cur.triple, fixed);
      at.z[i] = at.z[i].real();
      if (at.z[i].real() == 0) throw std::invalid_argument("central charge of a simple reaches 0");
      Direction d = at.z[i].real() < 0 ? Direction::down : Direction::up;
      for (int j = 0; j < 3; ++j)
        if (j != i && at.z[j].imag() <= 0) throw DegenerateCrossing("two charges on the real axis");
      cur = cross_wall(at, i, d);
      events.push_back({i, static_cast<double>(seg) + sh, d, cur.word});
      s = sh;
    }
    cur.z = chart_charges(cur.triple, Bv);
  }
  return {cur, events};
}

// random point of the open upper half plane
template <class Rng>
cplx random_upper(Rng& rng) {
  std::uniform_real_distribution<double> re(-2.0, 2.0), im(0.1, 2.0);
  return {re(rng), im(rng)};
}

struct AdjacencyReport {
  int depth = 0;
  size_t regions = 0;
  size_t faces = 0;
  size_t adjacent_pairs = 0;
  size_t cayley_edges = 0;
  size_t mismatches = 0;
  size_t self_adjacent = 0;
  size_t ambiguous = 0;         // face with zero or several regions passing the test below
  size_t z_only_ambiguous = 0;  // faces where the pushed central charge alone lies in several regions
  std::vector<std::string> details;
};

// For every region of the ball and each of its six faces, a random point
// sigma on the face is pushed slightly past the wall. Central charges alone
// cannot tell where the push lands: D(tau_i g) and D(tau_{i+1}^{-1} g) have
// overlapping images next to the z_i axis and differ only in the phase lift of
// S_i. So a candidate region h must also contain sigma as a face point whose
// own crossing leads back to g. The unique such h among the candidates (the
// region's Cayley neighbours, or the whole ball when `global` is set) gives
// the adjacency pair; pairs are compared with the Cayley edges.
// Charges of the simples of `s` computed from the chart `ch`.
inline Charges charges_in(const StabilityChart& ch, const SphericalTripleK& s) {
  Charges z{};
  for (int j = 0; j < 3; ++j) z[j] = charge_of(ch, s[j]);
  return z;
}

inline double max_abs_chi(const SphericalTripleK& s) {
  double m = 1;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) m = std::max(m, std::abs(to_double(chi(s[a], s[b]))));
  return m;
}

inline AdjacencyReport adjacency_check(int depth, unsigned seed = 1, bool global = false, double eps = 1e-3) {
  RegionGraph G = region_bfs(depth + 1, kDefaultDepthCap + 1);
  std::mt19937_64 rng(seed);
  AdjacencyReport rep;
  rep.depth = depth;
  std::set<std::pair<int, int>> adj, cay;
  for (const RegionEdge& e : G.edges) {
    if (G.nodes[e.from].depth > depth && G.nodes[e.to].depth > depth) continue;
    cay.insert(std::minmax(e.from, e.to));
  }
  for (size_t u = 0; u < G.nodes.size(); ++u) {
    const RegionNode& node = G.nodes[u];
    if (node.depth > depth) continue;
    ++rep.regions;
    for (int i = 0; i < 3; ++i)
      for (Direction d : {Direction::down, Direction::up}) {
        ++rep.faces;
        Charges z;
        for (auto& v : z) v = random_upper(rng);
        z[i] = d == Direction::down ? cplx(-1.0, 0.0) : cplx(1.0, 0.0);
        StabilityChart ch{node.word, node.triple, z};
        // the tilt adds chi z_i to a neighbour, so keep the push below the other imaginary parts
        double im = 1e300;
        for (int j = 0; j < 3; ++j)
          if (j != i) im = std::min(im, z[j].imag());
        StabilityChart pushed = ch;
        pushed.z[i] -= cplx(0, eps * im / max_abs_chi(node.triple));
        std::vector<int> cands;
        if (global) {
          for (size_t v = 0; v < G.nodes.size(); ++v) cands.push_back(static_cast<int>(v));
        } else {
          cands.push_back(static_cast<int>(u));
          for (const Letter& l : group_letters()) {
            int v = G.find(apply_generator(node.triple, l));
            if (v >= 0) cands.push_back(v);
          }
        }
        Direction back = d == Direction::down ? Direction::up : Direction::down;
        MemberKind need = d == Direction::down ? MemberKind::coboundary : MemberKind::boundary;
        std::vector<int> inside;
        size_t z_inside = 0;
        for (int v : cands) {
          if (membership(charges_in(pushed, G.nodes[v].triple)).kind != MemberKind::interior) continue;
          ++z_inside;
          StabilityChart at{G.nodes[v].word, G.nodes[v].triple, charges_in(ch, G.nodes[v].triple)};
          Membership m = membership(at, 1e-12);
          if (m.kind != need) continue;
          at.z[m.index] = at.z[m.index].real();
          if (cross_wall(at, m.index, back).triple == node.triple) inside.push_back(v);
        }
        if (z_inside > 1) ++rep.z_only_ambiguous;
        if (inside.size() != 1) {
          ++rep.ambiguous;
          ++rep.mismatches;
          rep.details.push_back("face " + std::to_string(i) + to_string(d) + " of [" + format_word(node.word) +
                                "]: pushed point in " + std::to_string(inside.size()) + " regions");
          continue;
        }
        int h = inside[0];
        if (h == static_cast<int>(u)) {
          ++rep.self_adjacent;
          ++rep.mismatches;
          continue;
        }
        int via_cross = G.find(cross_wall(ch, i, d).triple);
        int expected = G.find(apply_generator(node.triple, crossing_letter(i, d)));
        if (h != via_cross || h != expected) {
          ++rep.mismatches;
          rep.details.push_back("face " + std::to_string(i) + to_string(d) + " of [" + format_word(node.word) +
                                "] lands in [" + format_word(G.nodes[h].word) + "]");
        }
        adj.insert(std::minmax(static_cast<int>(u), h));
      }
  }
  rep.adjacent_pairs = adj.size();
  rep.cayley_edges = cay.size();
  for (auto& p : adj)
    if (!cay.count(p)) ++rep.mismatches;
  for (auto& p : cay)
    if (!adj.count(p)) ++rep.mismatches;
  return rep;
}

inline nlohmann::json to_json(const StabilityChart& ch) {
  nlohmann::json z = nlohmann::json::array();
  for (auto& v : ch.z) z.push_back({v.real(), v.imag()});
  return {{"word", format_word(ch.word)}, {"z", z}};
}

inline StabilityChart chart_from_json(const nlohmann::json& j) {
  Charges z{};
  for (int i = 0; i < 3; ++i) z[i] = {j.at("z").at(i).at(0).get<double>(), j.at("z").at(i).at(1).get<double>()};
  return StabilityChart::make(parse_word(j.at("word").get<std::string>()), z);
}

inline nlohmann::json to_json(const WallEvent& e) {
  return {{"index", e.index}, {"time", e.time}, {"direction", to_string(e.direction)},
          {"new_word", format_word(e.new_word)}};
}

}  // namespace stabp2
