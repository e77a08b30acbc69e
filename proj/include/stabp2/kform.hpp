#pragma once

#include <array>
#include <ostream>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace stabp2 {

using BigInt = boost::multiprecision::cpp_int;

// Class in K(D), coordinates in the basis ([S0],[S1],[S2]).
struct KClass {
  std::array<BigInt, 3> c{0, 0, 0};

  KClass() = default;
  KClass(BigInt a, BigInt b, BigInt d) : c{std::move(a), std::move(b), std::move(d)} {}

  const BigInt& operator[](int i) const { return c[i]; }
  BigInt& operator[](int i) { return c[i]; }

  friend bool operator==(const KClass&, const KClass&) = default;
  friend KClass operator+(const KClass& x, const KClass& y) {
    return {x[0] + y[0], x[1] + y[1], x[2] + y[2]};
  }
  friend KClass operator-(const KClass& x, const KClass& y) {
    return {x[0] - y[0], x[1] - y[1], x[2] - y[2]};
  }
  friend KClass operator-(const KClass& x) { return {-x[0], -x[1], -x[2]}; }
  friend KClass operator*(const BigInt& k, const KClass& x) {
    return {k * x[0], k * x[1], k * x[2]};
  }

  std::string str() const {
    return "(" + c[0].str() + "," + c[1].str() + "," + c[2].str() + ")";
  }
};

inline KClass basis(int i) {
  KClass e;
  e[i] = 1;
  return e;
}

// class of a skyscraper sheaf
inline KClass ox_class() { return {1, 1, 1}; }

struct Mat3 {
  std::array<std::array<BigInt, 3>, 3> a{};

  static Mat3 identity() {
    Mat3 m;
    for (int i = 0; i < 3; ++i) m.a[i][i] = 1;
    return m;
  }
  static Mat3 from(std::initializer_list<std::initializer_list<long long>> rows) {
    Mat3 m;
    int i = 0;
    for (auto& r : rows) {
      int j = 0;
      for (long long v : r) m.a[i][j++] = v;
      ++i;
    }
    return m;
  }

  BigInt& operator()(int i, int j) { return a[i][j]; }
  const BigInt& operator()(int i, int j) const { return a[i][j]; }

  friend bool operator==(const Mat3&, const Mat3&) = default;

  friend Mat3 operator*(const Mat3& x, const Mat3& y) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        BigInt s = 0;
        for (int k = 0; k < 3; ++k) s += x(i, k) * y(k, j);
        r(i, j) = s;
      }
    return r;
  }
  friend KClass operator*(const Mat3& x, const KClass& v) {
    KClass r;
    for (int i = 0; i < 3; ++i) r[i] = x(i, 0) * v[0] + x(i, 1) * v[1] + x(i, 2) * v[2];
    return r;
  }
  friend Mat3 operator-(const Mat3& x, const Mat3& y) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r(i, j) = x(i, j) - y(i, j);
    return r;
  }

  Mat3 transpose() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r(i, j) = a[j][i];
    return r;
  }

  BigInt det() const {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  }

  // exact inverse, only for determinant +-1
  Mat3 unimodular_inverse() const {
    BigInt d = det();
    if (d != 1 && d != -1) throw std::domain_error("matrix is not unimodular");
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        int i1 = (j + 1) % 3, i2 = (j + 2) % 3, j1 = (i + 1) % 3, j2 = (i + 2) % 3;
        r(i, j) = (a[i1][j1] * a[i2][j2] - a[i1][j2] * a[i2][j1]) * d;
      }
    return r;
  }

  bool is_zero() const {
    for (auto& r : a)
      for (auto& v : r)
        if (v != 0) return false;
    return true;
  }

  std::string str() const {
    std::string s = "[";
    for (int i = 0; i < 3; ++i) {
      s += "[";
      for (int j = 0; j < 3; ++j) s += a[i][j].str() + (j < 2 ? "," : "");
      s += i < 2 ? "]," : "]";
    }
    return s + "]";
  }
};

inline std::ostream& operator<<(std::ostream& os, const Mat3& m) { return os << m.str(); }
inline std::ostream& operator<<(std::ostream& os, const KClass& x) { return os << x.str(); }

// Gram matrix of the Euler form, J_ij = chi(S_i, S_j)
inline const Mat3& euler_gram() {
  static const Mat3 J = Mat3::from({{0, -3, 3}, {3, 0, -3}, {-3, 3, 0}});
  return J;
}

inline BigInt chi(const KClass& x, const KClass& y) {
  const Mat3& J = euler_gram();
  BigInt s = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (J(i, j) != 0) s += x[i] * J(i, j) * y[j];
  return s;
}

// K-theory action of the spherical twist, E -> E - chi(t,E) t
inline Mat3 twist_matrix(const KClass& t) {
  Mat3 P = Mat3::identity();
  for (int j = 0; j < 3; ++j) {
    BigInt k = chi(t, basis(j));
    for (int i = 0; i < 3; ++i) P(i, j) -= k * t[i];
  }
  return P;
}

// the twist is unipotent of order two, so its inverse is 2I - P
inline Mat3 twist_inverse(const KClass& t) {
  Mat3 P = twist_matrix(t);
  Mat3 r = Mat3::identity();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = r(i, j) * 2 - P(i, j);
  return r;
}

}  // namespace stabp2
