#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>
#include "json.hpp"

namespace stabp2 {

using cplx = std::complex<double>;
using Mat3c = Eigen::Matrix3cd;
using Vec3c = Eigen::Vector3cd;
using Rational = boost::multiprecision::cpp_rational;
using boost::multiprecision::cpp_int;

inline constexpr int kMaxDegree = 30;

struct GWTable {
  std::vector<cpp_int> n;  // n[k-1] = number of degree k rational curves through 3k-1 points
  int kmax() const { return static_cast<int>(n.size()); }
  const cpp_int& operator()(int k) const { return n.at(k - 1); }
};

inline cpp_int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  cpp_int r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline cpp_int factorial(int n) {
  cpp_int r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// Kontsevich's recursion, carried out over the rationals; any non-integral
// value is reported rather than rounded.
inline GWTable gw_numbers(int kmax) {
  if (kmax < 1 || kmax > kMaxDegree) throw std::out_of_range("kmax must be in [1, 30]");
  std::vector<Rational> n(kmax + 1);
  n[1] = 1;
  for (int k = 2; k <= kmax; ++k) {
    Rational s = 0;
    for (int a = 1; a < k; ++a) {
      int b = k - a;
      Rational term = Rational(a * a * b * b) * Rational(binomial(3 * k - 4, 3 * a - 2)) -
                      Rational(a * a * a * b) * Rational(binomial(3 * k - 4, 3 * a - 1));
      s += n[a] * n[b] * term;
    }
    n[k] = s;
  }
  GWTable t;
  for (int k = 1; k <= kmax; ++k) {
    if (denominator(n[k]) != 1) throw std::logic_error("non-integral GW number at degree " + std::to_string(k));
    t.n.push_back(numerator(n[k]));
  }
  return t;
}

// JSON cache keyed by kmax, integers stored as decimal strings.
inline GWTable gw_numbers_cached(int kmax, const std::string& path) {
  if (path.empty()) return gw_numbers(kmax);
  nlohmann::json doc = nlohmann::json::object();
  {
    std::ifstream in(path);
    if (in) {
      try {
        in >> doc;
      } catch (...) {
        doc = nlohmann::json::object();
      }
    }
  }
  std::string key = std::to_string(kmax);
  if (doc.contains(key)) {
    GWTable t;
    for (auto& v : doc[key]) t.n.emplace_back(v.get<std::string>());
    if (t.kmax() == kmax) return t;
  }
  GWTable t = gw_numbers(kmax);
  nlohmann::json arr = nlohmann::json::array();
  for (auto& v : t.n) arr.push_back(v.str());
  doc[key] = arr;
  std::ofstream out(path);
  if (out) out << doc.dump(1) << "\n";
  return t;
}

inline std::string default_cache_path() {
  const char* p = std::getenv("STABP2_CACHE");
  return p ? std::string(p) : std::string();
}

// a_k = n_k / (3k-1)! as doubles, k = 1..30
inline const std::vector<double>& series_coefficients() {
  static const std::vector<double> a = [] {
    GWTable t = gw_numbers(kMaxDegree);
    std::vector<double> r;
    for (int k = 1; k <= kMaxDegree; ++k)
      r.push_back(static_cast<double>(Rational(t(k), factorial(3 * k - 1))));
    return r;
  }();
  return a;
}

class GuardViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr double kTailTolerance = 1e-12;

// Upper bound for the third-derivative tail sum_{k>kmax} of the series at t.
inline double tail_bound(const std::array<cplx, 3>& t, int kmax) {
  const auto& a = series_coefficients();
  double y = std::abs(t[2]);
  if (y == 0) return 0;
  double e = std::exp(t[1].real());
  auto term = [&](int k) {
    double m = 3 * k - 1;
    double pw = y < 1 ? std::pow(y, m - 3) : std::pow(y, m);
    return a[k - 1] * k * k * k * m * m * m * pw * std::pow(e, k);
  };
  double s = 0;
  for (int k = kmax + 1; k <= kMaxDegree; ++k) s += term(k);
  // beyond the table: a_{k+1}/a_k tends to about 0.138, 0.2 is a safe ceiling
  double x = 0.2 * y * y * y * e * std::pow(31.0 / 30.0, 6);
  if (x >= 1) return std::numeric_limits<double>::infinity();
  return s + term(kMaxDegree) * x / (1 - x);
}

struct FrobeniusPoint {
  std::array<cplx, 3> t{};
  int kmax = 12;
  double tail = 0;

  static FrobeniusPoint make(const std::array<cplx, 3>& t, int kmax = 12) {
    if (kmax < 1 || kmax > kMaxDegree) throw std::out_of_range("kmax must be in [1, 30]");
    FrobeniusPoint p{t, kmax, tail_bound(t, kmax)};
    if (!(p.tail < kTailTolerance))
      throw GuardViolation("series tail bound " + std::to_string(p.tail) + " exceeds guard");
    return p;
  }
};

// d0^p0 d1^p1 d2^p2 of the prepotential
inline cplx prepotential_partial(const FrobeniusPoint& pt, int p0, int p1, int p2) {
  const cplx t0 = pt.t[0], t1 = pt.t[1], t2 = pt.t[2];
  // classical part 1/2 (t0^2 t2 + t0 t1^2)
  auto mono = [](cplx x, int e, int d) -> cplx {
    if (d > e) return 0.0;
    double c = 1;
    for (int i = 0; i < d; ++i) c *= (e - i);
    return c * std::pow(x, e - d);
  };
  cplx cl = 0.5 * (mono(t0, 2, p0) * mono(t1, 0, p1) * mono(t2, 1, p2) +
                   mono(t0, 1, p0) * mono(t1, 2, p1) * mono(t2, 0, p2));
  if (p0 > 0) return cl;
  const auto& a = series_coefficients();
  cplx s = 0;
  for (int k = 1; k <= pt.kmax; ++k) {
    int m = 3 * k - 1;
    if (p2 > m) continue;
    double f = a[k - 1] * std::pow(static_cast<double>(k), p1);
    for (int i = 0; i < p2; ++i) f *= (m - i);
    s += f * std::pow(t2, m - p2) * std::exp(static_cast<double>(k) * t1);
  }
  return cl + s;
}

inline cplx prepotential(const FrobeniusPoint& pt) { return prepotential_partial(pt, 0, 0, 0); }

// the metric is the antidiagonal pairing eta_ab = delta_{a+b,2}
inline Mat3c eta_matrix() {
  Mat3c e = Mat3c::Zero();
  e(0, 2) = e(1, 1) = e(2, 0) = 1.0;
  return e;
}

struct ProductTensor {
  std::array<std::array<std::array<cplx, 3>, 3>, 3> c{};
  // C[a] is the matrix of X -> d_a o X in the flat frame
  std::array<Mat3c, 3> C;

  Vec3c multiply(const Vec3c& x, const Vec3c& y) const {
    Vec3c r = Vec3c::Zero();
    for (int a = 0; a < 3; ++a) r += x(a) * (C[a] * y);
    return r;
  }
};

inline ProductTensor product(const FrobeniusPoint& pt) {
  ProductTensor P;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int d = 0; d < 3; ++d) {
        int p[3] = {0, 0, 0};
        ++p[a];
        ++p[b];
        ++p[d];
        P.c[a][b][d] = prepotential_partial(pt, p[0], p[1], p[2]);
      }
  for (int a = 0; a < 3; ++a) {
    P.C[a] = Mat3c::Zero();
    for (int e = 0; e < 3; ++e)
      for (int b = 0; b < 3; ++b) P.C[a](e, b) = P.c[a][b][2 - e];
  }
  return P;
}

// max over basis triples of |(e_a o e_b) o e_c - e_a o (e_b o e_c)|
inline double associativity_residual(const ProductTensor& P) {
  double m = 0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) {
        Vec3c ea = Vec3c::Unit(a), eb = Vec3c::Unit(b), ec = Vec3c::Unit(c);
        Vec3c l = P.multiply(P.multiply(ea, eb), ec), r = P.multiply(ea, P.multiply(eb, ec));
        m = std::max(m, (l - r).norm());
      }
  return m;
}

// A random point well inside the convergence guard.
template <class Rng>
FrobeniusPoint random_guarded_point(Rng& rng, int kmax = 12) {
  std::uniform_real_distribution<double> u(-1, 1);
  cplx t0(u(rng), u(rng)), t1(-3 + u(rng), 3 * u(rng)), t2(0.6 * u(rng), 0.6 * u(rng));
  return FrobeniusPoint::make({t0, t1, t2}, kmax);
}

// Euler field E = t0 d0 + 3 d1 - t2 d2
inline Vec3c euler_vector(const FrobeniusPoint& pt) { return Vec3c(pt.t[0], 3.0, -pt.t[2]); }

// grad E in the flat frame, constant
inline Mat3c grad_euler() {
  Mat3c m = Mat3c::Zero();
  m(0, 0) = 1.0;
  m(2, 2) = -1.0;
  return m;
}

inline constexpr double kCharge = 2.0;

struct UOperator {
  Mat3c U;
  std::array<cplx, 3> u;  // lexicographic by (re, im)
  double min_gap = 0;
};

inline std::array<cplx, 3> sorted_eigenvalues(const Mat3c& U) {
  Eigen::ComplexEigenSolver<Mat3c> es(U, false);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigen-solver failure");
  std::array<cplx, 3> u{es.eigenvalues()(0), es.eigenvalues()(1), es.eigenvalues()(2)};
  std::sort(u.begin(), u.end(), [](cplx x, cplx y) {
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });
  return u;
}

inline UOperator u_operator(const FrobeniusPoint& pt, const ProductTensor& P) {
  UOperator r;
  Vec3c E = euler_vector(pt);
  r.U = E(0) * P.C[0] + E(1) * P.C[1] + E(2) * P.C[2];
  r.u = sorted_eigenvalues(r.U);
  r.min_gap = std::min({std::abs(r.u[0] - r.u[1]), std::abs(r.u[1] - r.u[2]), std::abs(r.u[0] - r.u[2])});
  return r;
}

inline UOperator u_operator(const FrobeniusPoint& pt) { return u_operator(pt, product(pt)); }

inline FrobeniusPoint solve_base_point() {
  FrobeniusPoint p = FrobeniusPoint::make({0.0, -3.0 * std::log(3.0), 0.0});
  UOperator U = u_operator(p);
  for (int k = 0; k < 3; ++k) {
    cplx root = std::polar(1.0, 2 * std::numbers::pi * k / 3);
    double best = 1e300;
    for (auto& v : U.u) best = std::min(best, std::abs(v - root));
    if (best > 1e-10) throw std::runtime_error("base point eigenvalues are not the cube roots of unity");
  }
  return p;
}

// Eigenvalues along a path, ordered by nearest-neighbour continuation from
// the sorted order at the first point.
inline std::vector<std::array<cplx, 3>> track_eigenvalues(const std::vector<std::array<cplx, 3>>& path,
                                                          int kmax = 12) {
  std::vector<std::array<cplx, 3>> out;
  for (auto& t : path) {
    auto u = u_operator(FrobeniusPoint::make(t, kmax)).u;
    if (out.empty()) {
      out.push_back(u);
      continue;
    }
    const auto& prev = out.back();
    std::array<int, 3> perm{0, 1, 2}, best_perm = perm;
    double best = 1e300;
    do {
      double d = 0;
      for (int i = 0; i < 3; ++i) d = std::max(d, std::abs(u[perm[i]] - prev[i]));
      if (d < best) {
        best = d;
        best_perm = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.push_back({u[best_perm[0]], u[best_perm[1]], u[best_perm[2]]});
  }
  return out;
}

}  // namespace stabp2
