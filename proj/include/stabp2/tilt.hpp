#pragma once

#include <algorithm>
#include <cctype>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "kform.hpp"

namespace stabp2 {

// gen 0,1,2 are tau_i, gen 3 is the rotation r
struct Letter {
  int gen = 0;
  bool inv = false;

  friend bool operator==(const Letter&, const Letter&) = default;
  Letter inverse() const { return {gen, !inv}; }
  bool is_rotation() const { return gen == 3; }
};

inline constexpr int kRotation = 3;

// A word a1 a2 ... an acts as the composite a1 o a2 o ... o an, so the
// rightmost letter is applied first and prepending a letter applies it last.
struct BraidWord {
  std::vector<Letter> letters;

  friend bool operator==(const BraidWord&, const BraidWord&) = default;
  size_t size() const { return letters.size(); }
  bool empty() const { return letters.empty(); }
  bool is_group_word() const {
    return std::none_of(letters.begin(), letters.end(),
                        [](const Letter& l) { return l.is_rotation(); });
  }

  BraidWord inverse() const {
    BraidWord w;
    for (auto it = letters.rbegin(); it != letters.rend(); ++it) w.letters.push_back(it->inverse());
    return w;
  }
};

inline BraidWord free_reduce(const BraidWord& w) {
  BraidWord out;
  for (const Letter& l : w.letters) {
    if (!out.letters.empty() && out.letters.back() == l.inverse())
      out.letters.pop_back();
    else
      out.letters.push_back(l);
  }
  return out;
}

inline BraidWord prepend(const Letter& l, const BraidWord& w) {
  BraidWord r;
  r.letters.reserve(w.size() + 1);
  r.letters.push_back(l);
  r.letters.insert(r.letters.end(), w.letters.begin(), w.letters.end());
  return free_reduce(r);
}

inline BraidWord concat(const BraidWord& a, const BraidWord& b) {
  BraidWord r = a;
  r.letters.insert(r.letters.end(), b.letters.begin(), b.letters.end());
  return free_reduce(r);
}

// Accepts "0 1' 2" or the compact "01'2"; r stands for the rotation.
inline BraidWord parse_word(const std::string& s) {
  BraidWord w;
  for (size_t i = 0; i < s.size(); ++i) {
    char ch = s[i];
    if (std::isspace(static_cast<unsigned char>(ch)) || ch == ',') continue;
    Letter l;
    if (ch >= '0' && ch <= '2')
      l.gen = ch - '0';
    else if (ch == 'r' || ch == 'R')
      l.gen = kRotation;
    else
      throw std::invalid_argument("bad letter '" + std::string(1, ch) + "' in word \"" + s + "\"");
    while (i + 1 < s.size() && (s[i + 1] == '\'' || s[i + 1] == '-')) {
      l.inv = !l.inv;
      ++i;
    }
    w.letters.push_back(l);
  }
  return w;
}

inline std::string format_word(const BraidWord& w, bool compact = false) {
  std::string s;
  for (size_t i = 0; i < w.size(); ++i) {
    const Letter& l = w.letters[i];
    if (i && !compact) s += ' ';
    s += l.is_rotation() ? 'r' : static_cast<char>('0' + l.gen);
    if (l.inv) s += '\'';
  }
  return s;
}

// Ordered triple of classes together with the derived heart data.
struct SphericalTripleK {
  std::array<KClass, 3> t;
  std::array<BigInt, 3> markov;       // |chi(t0,t1)|, |chi(t1,t2)|, |chi(t2,t0)|
  std::array<int, 3> orientation{};   // signs of the same three pairings
  KClass ox;                          // (1,1,1) written in the basis t

  const KClass& operator[](int i) const { return t[i]; }

  Mat3 basis_matrix() const {
    Mat3 m;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = t[j][i];
    return m;
  }

  // coordinates of x in the basis (t0,t1,t2)
  KClass coords(const KClass& x) const { return basis_matrix().unimodular_inverse() * x; }

  std::array<BigInt, 3> markov_sorted() const {
    auto m = markov;
    std::sort(m.begin(), m.end());
    return m;
  }

  std::string key() const { return t[0].str() + t[1].str() + t[2].str(); }

  friend bool operator==(const SphericalTripleK& a, const SphericalTripleK& b) { return a.t == b.t; }
};

inline int sign_of(const BigInt& v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

// Fills the derived fields and checks the invariants. Throws on violation.
inline SphericalTripleK make_triple(const std::array<KClass, 3>& t) {
  SphericalTripleK s;
  s.t = t;
  BigInt c01 = chi(t[0], t[1]), c12 = chi(t[1], t[2]), c20 = chi(t[2], t[0]);
  s.markov = {abs(c01), abs(c12), abs(c20)};
  s.orientation = {sign_of(c01), sign_of(c12), sign_of(c20)};
  BigInt d = s.basis_matrix().det();
  if (d != 1 && d != -1) throw std::invalid_argument("triple is not a lattice basis");
  const auto& m = s.markov;
  if (m[0] == 0 || m[1] == 0 || m[2] == 0) throw std::invalid_argument("triple has a zero pairing");
  if (m[0] * m[0] + m[1] * m[1] + m[2] * m[2] != m[0] * m[1] * m[2])
    throw std::invalid_argument("triple violates the Markov equation");
  if (m[0] % 3 != 0 || m[1] % 3 != 0 || m[2] % 3 != 0)
    throw std::invalid_argument("Markov entries not divisible by 3");
  if (!(s.orientation[0] == s.orientation[1] && s.orientation[1] == s.orientation[2]))
    throw std::invalid_argument("orientation is not cyclic");
  s.ox = s.coords(ox_class());
  for (int i = 0; i < 3; ++i)
    if (s.ox[i] < 0) throw std::invalid_argument("class of O_x not effective in triple");
  return s;
}

inline SphericalTripleK identity_triple() { return make_triple({basis(0), basis(1), basis(2)}); }

namespace detail {

inline std::array<KClass, 3> rotate(const std::array<KClass, 3>& t, bool inv) {
  if (!inv) return {t[2], t[0], t[1]};
  return {t[1], t[2], t[0]};
}

// tau_i: slot i-1 gets the shifted simple, slot i the twisted one, slot i+1 is untouched
inline std::array<KClass, 3> tau(const std::array<KClass, 3>& t, int i, bool inv) {
  int p = (i + 2) % 3;
  std::array<KClass, 3> r = t;
  if (!inv) {
    r[p] = -t[i];
    r[i] = t[p] - chi(t[p], t[i]) * t[i];
  } else {
    r[p] = t[i] + chi(t[i], t[p]) * t[p];
    r[i] = -t[p];
  }
  return r;
}

}  // namespace detail

inline SphericalTripleK apply_generator(const SphericalTripleK& s, const Letter& l) {
  // defensive re-validation of the input
  make_triple(s.t);
  if (l.is_rotation()) return make_triple(detail::rotate(s.t, l.inv));
  return make_triple(detail::tau(s.t, l.gen, l.inv));
}

inline SphericalTripleK apply_word(const BraidWord& w, const SphericalTripleK& start) {
  std::array<KClass, 3> t = start.t;
  for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it)
    t = it->is_rotation() ? detail::rotate(t, it->inv) : detail::tau(t, it->gen, it->inv);
  return make_triple(t);
}

inline SphericalTripleK apply_word(const BraidWord& w) { return apply_word(w, identity_triple()); }

struct TwistMatrices {
  std::array<Mat3, 3> P;
  const Mat3& operator[](int i) const { return P[i]; }
};

inline TwistMatrices braid_matrices(const SphericalTripleK& s) {
  return {{twist_matrix(s[0]), twist_matrix(s[1]), twist_matrix(s[2])}};
}

inline TwistMatrices braid_matrices(const BraidWord& w) { return braid_matrices(apply_word(w)); }

// Transformation laws of the P-matrices under a generator, as predicted from
// the matrices of g alone. `literal` selects the conjugation order
// P_i(tau_i g) = P_i P_{i-1} P_i^{-1}; otherwise P_i^{-1} P_{i-1} P_i, which is
// what the Markov-consistent tilt rule produces.
inline TwistMatrices predicted_matrices(const TwistMatrices& m, const Letter& l, bool literal) {
  TwistMatrices r = m;
  if (l.is_rotation()) {
    if (!l.inv)
      r.P = {m[2], m[0], m[1]};
    else
      r.P = {m[1], m[2], m[0]};
    return r;
  }
  int i = l.gen, p = (i + 2) % 3;
  auto inv = [](const Mat3& a) { return a.unimodular_inverse(); };
  if (!l.inv) {
    r.P[p] = m[i];
    r.P[i] = literal ? m[i] * m[p] * inv(m[i]) : inv(m[i]) * m[p] * m[i];
  } else {
    // inverting the forward law with h = tau_i^{-1} g
    r.P[i] = m[p];
    r.P[p] = literal ? inv(m[p]) * m[i] * m[p] : m[p] * m[i] * inv(m[p]);
  }
  return r;
}

struct RegionNode {
  BraidWord word;
  SphericalTripleK triple;
  int depth = 0;
  int parent = -1;
  Letter parent_letter;
};

struct RegionEdge {
  int from = 0;
  int to = 0;
  Letter letter;  // triple(to) = letter applied to triple(from)
};

struct RegionGraph {
  std::vector<RegionNode> nodes;
  std::vector<RegionEdge> edges;
  std::map<std::string, int> index;
  int depth = 0;

  int find(const SphericalTripleK& s) const {
    auto it = index.find(s.key());
    return it == index.end() ? -1 : it->second;
  }
};

inline const std::array<Letter, 6>& group_letters() {
  static const std::array<Letter, 6> L = {Letter{0, false}, Letter{0, true}, Letter{1, false},
                                          Letter{1, true},  Letter{2, false}, Letter{2, true}};
  return L;
}

inline constexpr int kDefaultDepthCap = 8;

// Breadth-first enumeration of the Cayley ball of G acting on the identity triple.
// Edges join visited nodes only; the ones leaving the ball are dropped.
inline RegionGraph region_bfs(int depth, int cap = kDefaultDepthCap) {
  if (depth < 0) throw std::invalid_argument("negative depth");
  if (depth > cap) throw std::out_of_range("depth " + std::to_string(depth) + " exceeds cap " + std::to_string(cap));
  RegionGraph g;
  g.depth = depth;
  RegionNode root{BraidWord{}, identity_triple(), 0, -1, {}};
  g.index[root.triple.key()] = 0;
  g.nodes.push_back(root);
  std::deque<int> queue{0};
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    if (g.nodes[u].depth == depth) continue;
    for (const Letter& l : group_letters()) {
      SphericalTripleK s = make_triple(detail::tau(g.nodes[u].triple.t, l.gen, l.inv));
      std::string k = s.key();
      if (g.index.count(k)) continue;
      int v = static_cast<int>(g.nodes.size());
      g.index.emplace(k, v);
      g.nodes.push_back({prepend(l, g.nodes[u].word), s, g.nodes[u].depth + 1, u, l});
      queue.push_back(v);
    }
  }
  // each undirected Cayley edge {x, tau_i x} is recorded once, via its positive letter
  for (size_t u = 0; u < g.nodes.size(); ++u)
    for (const Letter& l : group_letters()) {
      if (l.inv) continue;
      int v = g.find(make_triple(detail::tau(g.nodes[u].triple.t, l.gen, false)));
      if (v >= 0) g.edges.push_back({static_cast<int>(u), v, l});
    }
  return g;
}

// Bounded rewriting search: tries to transform word a into word b using free
// cancellation and the braid relations t_i t_j t_i = t_j t_i t_j (also for
// inverse letters). Returns true when an identification is found within the budget.
inline bool braid_equivalent(const BraidWord& a, const BraidWord& b, size_t budget = 20000) {
  BraidWord target = free_reduce(b);
  auto key = [](const BraidWord& w) { return format_word(w, true); };
  std::set<std::string> seen{key(free_reduce(a))};
  std::deque<BraidWord> queue{free_reduce(a)};
  size_t max_len = std::max(a.size(), b.size()) + 2;
  while (!queue.empty() && seen.size() < budget) {
    BraidWord w = queue.front();
    queue.pop_front();
    if (w == target) return true;
    auto push = [&](BraidWord v) {
      v = free_reduce(v);
      if (v.size() > max_len) return;
      if (seen.insert(key(v)).second) queue.push_back(std::move(v));
    };
    for (size_t i = 0; i + 2 < w.size() + 0; ++i) {
      const Letter &x = w.letters[i], &y = w.letters[i + 1], &z = w.letters[i + 2];
      if (x == z && x.inv == y.inv && x.gen != y.gen) {
        BraidWord v = w;
        v.letters[i] = y;
        v.letters[i + 1] = x;
        v.letters[i + 2] = y;
        push(v);
      }
    }
    // insert a cancelling pair next to each position to let relations apply
    if (w.size() + 2 <= max_len) {
      for (size_t i = 0; i <= w.size(); ++i)
        for (const Letter& l : group_letters()) {
          BraidWord v = w;
          v.letters.insert(v.letters.begin() + static_cast<long>(i), {l, l.inverse()});
          std::string k = format_word(v, true);
          if (seen.insert(k).second) queue.push_back(v);
        }
    }
  }
  return false;
}

struct DedupeReport {
  size_t nodes = 0;
  size_t collisions = 0;       // distinct shortest words reaching the same triple
  size_t identified = 0;       // of those, identified by the rewriting search
  std::vector<std::pair<std::string, std::string>> unresolved;
};

// Every pair of shortest words that land on the same node is a collision; the
// probe tries to identify each by rewriting and reports the ones it cannot.
inline DedupeReport dedupe_probe(int depth, size_t budget = 4000, size_t max_checks = 200) {
  RegionGraph g = region_bfs(depth);
  DedupeReport rep;
  rep.nodes = g.nodes.size();
  for (const RegionEdge& e : g.edges) {
    const RegionNode& a = g.nodes[e.from];
    const RegionNode& b = g.nodes[e.to];
    if (b.depth != a.depth + 1 || b.parent == e.from) continue;
    // b is reached from a by a letter but stored with a different parent
    ++rep.collisions;
    if (rep.identified + rep.unresolved.size() >= max_checks) continue;
    BraidWord alt = prepend(e.letter, a.word);
    if (braid_equivalent(alt, b.word, budget))
      ++rep.identified;
    else
      rep.unresolved.emplace_back(format_word(alt), format_word(b.word));
  }
  return rep;
}

}  // namespace stabp2
