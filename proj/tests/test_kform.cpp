#include <random>

#include <gtest/gtest.h>

#include "stabp2/kform.hpp"

using namespace stabp2;

namespace {

KClass random_class(std::mt19937_64& rng, int lim = 20) {
  std::uniform_int_distribution<int> d(-lim, lim);
  return {d(rng), d(rng), d(rng)};
}

}  // namespace

TEST(EulerForm, GramIsAntisymmetricWithSkyscraperKernel) {
  const Mat3& J = euler_gram();
  EXPECT_EQ(J.transpose(), Mat3::identity() * J * Mat3::from({{-1, 0, 0}, {0, -1, 0}, {0, 0, -1}}));
  EXPECT_EQ(J * ox_class(), KClass(0, 0, 0));
}

TEST(EulerForm, Values) {
  EXPECT_EQ(chi(basis(0), basis(1)), -3);
  EXPECT_EQ(chi(basis(1), basis(2)), -3);
  EXPECT_EQ(chi(basis(2), basis(0)), -3);
  EXPECT_EQ(chi(basis(0), ox_class()), 0);
  KClass x{7, -2, 5};
  EXPECT_EQ(chi(x, x), 0);
}

TEST(EulerForm, BilinearAntisymmetric) {
  std::mt19937_64 rng(11);
  for (int n = 0; n < 200; ++n) {
    KClass x = random_class(rng), y = random_class(rng), w = random_class(rng);
    BigInt a = std::uniform_int_distribution<int>(-9, 9)(rng);
    EXPECT_EQ(chi(x, y), -chi(y, x));
    EXPECT_EQ(chi(a * x + w, y), a * chi(x, y) + chi(w, y));
  }
}

TEST(Twist, ReproducesDisplayedMatrices) {
  EXPECT_EQ(twist_matrix(basis(0)), Mat3::from({{1, 3, -3}, {0, 1, 0}, {0, 0, 1}}));
  EXPECT_EQ(twist_matrix(basis(1)), Mat3::from({{1, 0, 0}, {-3, 1, 3}, {0, 0, 1}}));
  EXPECT_EQ(twist_matrix(basis(2)), Mat3::from({{1, 0, 0}, {0, 1, 0}, {3, -3, 1}}));
  EXPECT_EQ(twist_matrix(ox_class()), Mat3::identity());
}

TEST(Twist, StructuralProperties) {
  std::mt19937_64 rng(5);
  const Mat3& J = euler_gram();
  for (int n = 0; n < 300; ++n) {
    KClass x = random_class(rng);
    Mat3 P = twist_matrix(x);
    Mat3 N = P - Mat3::identity();
    EXPECT_EQ(P.det(), 1);
    EXPECT_EQ(P * ox_class(), ox_class());
    EXPECT_TRUE((N * N).is_zero());
    EXPECT_EQ(P.transpose() * J * P, J);
    EXPECT_EQ(twist_matrix(-x), P);
    EXPECT_EQ(P * twist_inverse(x), Mat3::identity());
    EXPECT_EQ(P.unimodular_inverse(), twist_inverse(x));
  }
}

TEST(Twist, ConjugationIdentity) {
  // twist(A x) = A twist(x) A^{-1} for A preserving the form
  std::mt19937_64 rng(9);
  for (int n = 0; n < 100; ++n) {
    KClass x = random_class(rng, 5), y = random_class(rng, 5);
    Mat3 A = twist_matrix(y);
    EXPECT_EQ(twist_matrix(A * x), A * twist_matrix(x) * A.unimodular_inverse());
  }
}

TEST(Twist, LargeEntriesDoNotOverflow) {
  KClass x{BigInt("123456789012345678901234567890"), 1, -1};
  Mat3 P = twist_matrix(x);
  EXPECT_EQ(P.det(), 1);
  EXPECT_EQ(P * ox_class(), ox_class());
}
