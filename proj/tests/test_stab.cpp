#include <random>

#include <gtest/gtest.h>

#include "stabp2/stab.hpp"

using namespace stabp2;

namespace {

void expect_near(cplx a, cplx b, double tol = 1e-12) { EXPECT_LT(std::abs(a - b), tol) << a << " vs " << b; }

}  // namespace

TEST(Charges, IdentityChart) {
  auto ch = StabilityChart::make({}, {cplx(-1, 0.1), cplx(0.5, 0.4), cplx(0.5, 0.5)});
  expect_near(charge_of(ch, ox_class()), cplx(0, 1));
  expect_near(charge_of(ch, basis(0)), ch.z[0]);
}

TEST(Charges, TauOneChart) {
  Charges w{cplx(0.3, 0.2), cplx(-0.7, 0.9), cplx(0.1, 0.4)};
  auto ch = StabilityChart::make(parse_word("1"), w);
  // [S0] = t1 + 3 t0 in the tau_1 basis
  expect_near(charge_of(ch, basis(0)), w[1] + 3.0 * w[0]);
}

TEST(Membership, Rules) {
  EXPECT_EQ(membership(Charges{cplx(0, 1), cplx(0, 1), cplx(0, -1)}).kind, MemberKind::invalid);
  EXPECT_EQ(membership(Charges{cplx(-1, 0), cplx(0.5, 0.4), cplx(0.5, 0.6)}), (Membership{MemberKind::boundary, 0}));
  EXPECT_EQ(membership(Charges{cplx(-1, 0.1), cplx(0.5, 0.4), cplx(0.5, 0.5)}).kind, MemberKind::interior);
  EXPECT_EQ(membership(Charges{cplx(-1, 0), cplx(-2, 0), cplx(0.5, 0.5)}).kind, MemberKind::invalid);
  EXPECT_EQ(membership(Charges{cplx(0, 0), cplx(0.5, 0.4), cplx(0.5, 0.5)}).kind, MemberKind::invalid);
  EXPECT_EQ(membership(Charges{cplx(2, 0), cplx(0.5, 0.4), cplx(0.5, 0.5)}), (Membership{MemberKind::coboundary, 0}));
}

TEST(CrossWall, Example) {
  auto ch = StabilityChart::make({}, {cplx(-1, 0), cplx(0.5, 0.4), cplx(0.5, 0.6)});
  auto n = cross_wall(ch, 0, Direction::down);
  EXPECT_EQ(format_word(n.word), "0");
  expect_near(n.z[0], cplx(-2.5, 0.6));
  expect_near(n.z[1], cplx(0.5, 0.4));
  expect_near(n.z[2], cplx(1, 0));
  EXPECT_EQ(membership(n), (Membership{MemberKind::coboundary, 2}));
  auto back = cross_wall(n, 2, Direction::up);
  EXPECT_TRUE(back.word.empty());
  for (int i = 0; i < 3; ++i) expect_near(back.z[i], ch.z[i]);
  EXPECT_THROW(cross_wall(ch, 1, Direction::down), std::invalid_argument);
}

TEST(CrossWall, RandomRoundtripsPreserveCharges) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> g(0, 2), b(0, 1);
  for (int n = 0; n < 200; ++n) {
    BraidWord w;
    for (int k = 0; k < 5; ++k) w.letters.push_back({g(rng), b(rng) == 1});
    Charges z{random_upper(rng), random_upper(rng), random_upper(rng)};
    int i = g(rng);
    Direction d = b(rng) ? Direction::down : Direction::up;
    z[i] = d == Direction::down ? cplx(-0.8, 0) : cplx(1.3, 0);
    auto ch = StabilityChart::make(w, z);
    z = ch.z;
    auto x = cross_wall(ch, i, d);
    // charges of random classes agree between the charts
    for (int k = 0; k < 20; ++k) {
      std::uniform_int_distribution<int> c(-5, 5);
      KClass cl{c(rng), c(rng), c(rng)};
      // rounding scales with the size of the coordinates in either chart
      double scale = 1;
      for (auto* c : {&ch, &x}) {
        KClass k = c->triple.coords(cl);
        for (int j = 0; j < 3; ++j) scale += std::abs(to_double(k[j]) * c->z[j]);
      }
      expect_near(charge_of(ch, cl), charge_of(x, cl), 1e-13 * scale);
    }
    // crossed coordinates lie in H apart from the wall coordinate
    auto m = membership(x);
    EXPECT_EQ(m.kind, d == Direction::down ? MemberKind::coboundary : MemberKind::boundary);
    int back_idx = m.index;
    auto y = cross_wall(x, back_idx, d == Direction::down ? Direction::up : Direction::down);
    EXPECT_EQ(y.word, ch.word);
    // z_p - chi z_i followed by + chi z_i loses about |chi| ulps
    double chimax = 1;
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c) chimax = std::max(chimax, std::abs(to_double(chi(ch.triple[a], ch.triple[c]))));
    double zmax = std::max({std::abs(z[0]), std::abs(z[1]), std::abs(z[2])});
    for (int k = 0; k < 3; ++k) expect_near(y.z[k], z[k], 1e-15 * chimax * zmax + 1e-15);
  }
}

TEST(ContinuePath, ConstantPathHasNoEvents) {
  auto ch = StabilityChart::make({}, {cplx(-1, 0.1), cplx(0.5, 0.4), cplx(0.5, 0.5)});
  auto f = fixed_charges(ch);
  auto [end, ev] = continue_path(ch, {f, f});
  EXPECT_TRUE(ev.empty());
  EXPECT_TRUE(end.word.empty());
}

TEST(ContinuePath, SingleWallAndReturn) {
  auto ch = StabilityChart::make({}, {cplx(-1, 0.2), cplx(0.5, 0.1), cplx(0.5, 0.7)});
  Charges a = fixed_charges(ch);
  Charges b = a;
  b[0] = cplx(-1, -0.2);
  b[1] = cplx(0.5, 0.5);
  auto [end, ev] = continue_path(ch, {a, b});
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].index, 0);
  EXPECT_EQ(ev[0].direction, Direction::down);
  EXPECT_EQ(format_word(ev[0].new_word), "0");
  EXPECT_NEAR(ev[0].time, 0.5, 1e-12);
  EXPECT_EQ(membership(end).kind, MemberKind::interior);
  expect_near(charge_of(end, ox_class()), cplx(0, 1), 1e-12);
  auto [back, ev2] = continue_path(end, {b, a});
  ASSERT_EQ(ev2.size(), 1u);
  EXPECT_EQ(ev2[0].direction, Direction::up);
  EXPECT_TRUE(back.word.empty());
  for (int i = 0; i < 3; ++i) expect_near(back.z[i], ch.z[i]);
}

TEST(ContinuePath, LongPathReversal) {
  std::mt19937_64 rng(8);
  for (int n = 0; n < 20; ++n) {
    Charges z{random_upper(rng), random_upper(rng), random_upper(rng)};
    z[2] = cplx(0, 1) - z[0] - z[1];
    if (membership(z).kind != MemberKind::interior) continue;
    auto ch = StabilityChart::make({}, z);
    std::vector<Charges> path{fixed_charges(ch)};
    std::normal_distribution<double> nd(0, 0.8);
    for (int k = 0; k < 6; ++k) {
      Charges p = path.back();
      cplx d0(nd(rng), nd(rng)), d1(nd(rng), nd(rng));
      p[0] += d0;
      p[1] += d1;
      p[2] -= d0 + d1;  // keeps Z(O_x) = i
      path.push_back(p);
    }
    StabilityChart end;
    std::vector<WallEvent> ev;
    try {
      std::tie(end, ev) = continue_path(ch, path);
    } catch (const DegenerateCrossing&) {
      continue;
    } catch (const std::invalid_argument&) {
      continue;
    }
    expect_near(charge_of(end, ox_class()), cplx(0, 1), 1e-12);
    std::vector<Charges> rev(path.rbegin(), path.rend());
    auto [back, ev2] = continue_path(end, rev);
    EXPECT_EQ(ev.size(), ev2.size());
    EXPECT_EQ(back.word, ch.word);
    for (int i = 0; i < 3; ++i) expect_near(back.z[i], ch.z[i], 1e-10);
  }
}

TEST(ContinuePath, AccumulatingWalls) {
  // with Im z_2 too small the tau_0 walls accumulate before the end of the path
  auto ch = StabilityChart::make({}, {cplx(-1, 0.2), cplx(0.5, 0.4), cplx(0.5, 0.4)});
  Charges a = fixed_charges(ch), b = a;
  b[0] = cplx(-1, -0.2);
  EXPECT_THROW(continue_path(ch, {a, b}), DegenerateCrossing);
}

TEST(ContinuePath, DegenerateCrossingIsReported) {
  auto ch = StabilityChart::make({}, {cplx(-1, 0.2), cplx(-1, 0.2), cplx(2, 1.6)});
  Charges a = fixed_charges(ch), b = a;
  b[0] = cplx(-1, -0.2);
  b[1] = cplx(-1, -0.2);
  b[2] = cplx(2, 1.4);
  EXPECT_THROW(continue_path(ch, {a, b}), DegenerateCrossing);
}

TEST(Adjacency, DepthOneAndTwo) {
  auto r1 = adjacency_check(1, 1, true);
  EXPECT_EQ(r1.mismatches, 0u);
  EXPECT_EQ(r1.self_adjacent, 0u);
  auto r0 = adjacency_check(0, 1, true);
  EXPECT_EQ(r0.adjacent_pairs, 6u);
  EXPECT_EQ(r0.mismatches, 0u);
  auto r2 = adjacency_check(2, 4, true);
  EXPECT_EQ(r2.mismatches, 0u);
  EXPECT_EQ(r2.adjacent_pairs, r2.cayley_edges);
  // the central charge alone never decides the neighbour
  EXPECT_EQ(r2.z_only_ambiguous, r2.faces);
  auto local = adjacency_check(3, 5, false);
  EXPECT_EQ(local.mismatches, 0u);
}

TEST(Json, ChartRoundtrip) {
  auto ch = StabilityChart::make(parse_word("0 1'"), {cplx(-1, 0.1), cplx(0.5, 0.4), cplx(0.5, 0.5)});
  auto j = to_json(ch);
  EXPECT_EQ(j["word"], "0 1'");
  auto back = chart_from_json(j);
  EXPECT_EQ(back.word, ch.word);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(back.z[i], ch.z[i]);
}
