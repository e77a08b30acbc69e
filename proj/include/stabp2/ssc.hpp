#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ode.hpp"
#include "qh.hpp"
#include "tilt.hpp"

namespace stabp2 {

inline constexpr double kPi = std::numbers::pi;
inline const cplx kI{0.0, 1.0};

// Second structure connection with parameter s; c = s + (d-1)/2 and
// V = grad E + c. The flat sections we work with are gradients (1-forms
// raised by the metric), which see the metric-dual operator B = -V^*, where
// V^* = eta^{-1} V^T eta. For P^2, B = grad E - c.
struct ConnectionConfig {
  double s = -0.5;
  double d = kCharge;

  double c() const { return s + (d - 1) / 2; }
  Mat3c V() const { return grad_euler() + c() * Mat3c::Identity(); }
  Mat3c B() const {
    Mat3c eta = eta_matrix();
    return -(eta * V().transpose() * eta);
  }
};

enum class Side { gradient, vector };

class NearPole : public std::domain_error {
 public:
  cplx pole;
  NearPole(const std::string& m, cplx p) : std::domain_error(m), pole(p) {}
};

// Coefficient A(z) of Y' = A(z) Y. The vector side is -V (U - z)^{-1}; the
// gradient side, used for periods and monodromy, is -(U - z)^{-1} B.
inline Mat3c ode_field(const UOperator& U, const ConnectionConfig& cfg, cplx z, Side side = Side::gradient) {
  for (auto& u : U.u)
    if (std::abs(z - u) < 1e-8) throw NearPole("z is within 1e-8 of an eigenvalue of U", u);
  Mat3c R = (U.U - z * Mat3c::Identity()).inverse();
  if (side == Side::vector) return -cfg.V() * R;
  return -R * cfg.B();
}

inline Mat3c ode_field(const FrobeniusPoint& pt, const ConnectionConfig& cfg, cplx z, Side side = Side::gradient) {
  return ode_field(u_operator(pt), cfg, z, side);
}

// Spectral projector of U onto the eigenvalue u.
inline Mat3c spectral_projector(const Mat3c& U, cplx u) {
  auto ev = sorted_eigenvalues(U);
  Mat3c P = Mat3c::Identity();
  for (auto& v : ev) {
    if (std::abs(v - u) < 1e-9 * std::max(1.0, std::abs(u))) continue;
    P = P * (U - v * Mat3c::Identity()) / (u - v);
  }
  return P;
}

// Piece of a path in the z-plane: a line or a circular arc.
struct ZSegment {
  bool arc = false;
  cplx a, b;                  // line endpoints
  cplx center;                // arc data
  double radius = 0, th0 = 0, th1 = 0;

  cplx at(double s) const {
    if (!arc) return a + s * (b - a);
    return center + std::polar(radius, th0 + s * (th1 - th0));
  }
  cplx d(double s) const {
    if (!arc) return b - a;
    return kI * (th1 - th0) * std::polar(radius, th0 + s * (th1 - th0));
  }
  static ZSegment line(cplx a, cplx b) { return {false, a, b, 0, 0, 0, 0}; }
  static ZSegment circle(cplx c, double r, double th0, double th1) { return {true, 0, 0, c, r, th0, th1}; }
};

struct Loop {
  std::vector<ZSegment> segments;
  int label = -1;   // index of the encircled eigenvalue, -1 for none
  int orientation = 1;

  Loop then(const Loop& other) const {
    Loop r = *this;
    r.segments.insert(r.segments.end(), other.segments.begin(), other.segments.end());
    r.label = -1;
    return r;
  }
};

inline constexpr double kLoopRadius = 0.3;

// goes once around u, reaching its circle along the ray from 0
inline Loop standard_loop(cplx u, int label, bool ccw = true, double radius = kLoopRadius) {
  cplx dir = u / std::abs(u);
  cplx near = dir * (std::abs(u) - radius);
  double th = std::arg(-dir);
  double sweep = ccw ? 2 * kPi : -2 * kPi;
  Loop l;
  l.label = label;
  l.orientation = ccw ? 1 : -1;
  l.segments = {ZSegment::line(0.0, near), ZSegment::circle(u, radius, th, th + sweep), ZSegment::line(near, 0.0)};
  return l;
}

// Labels at the base point: u_k = exp(-2 pi i k / 3), counterclockwise loops.
inline std::array<cplx, 3> base_labels() {
  return {cplx(1, 0), std::polar(1.0, -2 * kPi / 3), std::polar(1.0, 2 * kPi / 3)};
}

inline std::array<Loop, 3> standard_loops(const UOperator& U) {
  auto lab = base_labels();
  std::array<Loop, 3> out;
  for (int k = 0; k < 3; ++k) {
    cplx best = U.u[0];
    for (auto& u : U.u)
      if (std::abs(u - lab[k]) < std::abs(best - lab[k])) best = u;
    out[k] = standard_loop(best, k);
  }
  return out;
}

struct IntegratorConfig {
  OdeOptions ode{};
  double pole_fraction = 0.1;  // step in z at most this fraction of the distance to a pole
};

inline Mat3c transport_z(const UOperator& U, const ConnectionConfig& cfg, const std::vector<ZSegment>& segs,
                         Mat3c Y, const IntegratorConfig& ic = {}, Side side = Side::gradient,
                         long* steps = nullptr) {
  Mat3c B = cfg.B(), V = cfg.V();
  for (const ZSegment& sg : segs) {
    auto f = [&](double s, const Mat3c& y) -> Mat3c {
      cplx z = sg.at(s);
      Mat3c R = (U.U - z * Mat3c::Identity()).inverse();
      Mat3c A = side == Side::gradient ? Mat3c(-R * B) : Mat3c(-V * R);
      return (A * y) * sg.d(s);
    };
    auto hmax = [&](double s) {
      cplx z = sg.at(s);
      double dist = 1e300;
      for (auto& u : U.u) dist = std::min(dist, std::abs(z - u));
      if (dist < 1e-8) throw NearPole("path runs into a pole", z);
      double speed = std::abs(sg.d(s));
      return speed == 0 ? 1.0 : ic.pole_fraction * dist / speed;
    };
    OdeStats st;
    Y = dopri5(f, 0.0, 1.0, Y, ic.ode, hmax, &st);
    if (steps) *steps += st.accepted;
  }
  return Y;
}

struct MonodromyResult {
  std::array<Mat3c, 3> M;
  Mat3c C;                                  // intertwiner, M_i C = C P_i
  std::array<double, 9> singular_values{};  // of the stacked intertwining system
  int solution_dim = 0;                     // numerical dimension of the intertwiner space
  int rank_C = 0;
  double intertwine_residual = 0;           // max_i |M_i C - C P_i| / |C|
  std::optional<double> conjugation_residual;  // max_i |C^{-1} M_i C - P_i| when C is invertible
  double unipotency = 0;                    // max_i |(M_i - I)^2|
  double det_defect = 0;                    // max_i |det M_i - 1|
  double fixed_vector_residual = 0;         // max_i |M_i C (1,1,1)| / |C|
  long steps = 0;
};

inline Mat3c to_complex(const Mat3& m) {
  Mat3c r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = m(i, j).convert_to<double>();
  return r;
}

// Solves M_i X = X P_i for all i via the null space of the stacked Kronecker system.
inline void solve_intertwiner(MonodromyResult& r, const std::array<Mat3c, 3>& P) {
  using Mat27x9 = Eigen::Matrix<cplx, 27, 9>;
  Mat27x9 K = Mat27x9::Zero();
  using Mat9 = Eigen::Matrix<cplx, 9, 9>;
  for (int i = 0; i < 3; ++i) {
    Mat9 blk = Mat9::Zero();
    // vec(M X) = (I kron M) vec X, vec(X P) = (P^T kron I) vec X, column-major vec
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c) {
          blk(3 * a + b, 3 * a + c) += r.M[i](b, c);
          blk(3 * a + b, 3 * c + b) -= P[i](c, a);
        }
    K.block<9, 9>(9 * i, 0) = blk;
  }
  Eigen::JacobiSVD<Mat27x9> svd(K, Eigen::ComputeFullV);
  auto sv = svd.singularValues();
  for (int k = 0; k < 9; ++k) r.singular_values[k] = sv(k);
  double scale = std::max(1.0, sv(0));
  r.solution_dim = 0;
  for (int k = 0; k < 9; ++k)
    if (sv(k) < 1e-7 * scale) ++r.solution_dim;
  Eigen::Matrix<cplx, 9, 1> v = svd.matrixV().col(8);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) r.C(b, a) = v(3 * a + b);
  Eigen::JacobiSVD<Mat3c> cs(r.C);
  auto csv = cs.singularValues();
  r.rank_C = 0;
  for (int k = 0; k < 3; ++k)
    if (csv(k) > 1e-6 * csv(0)) ++r.rank_C;
  double nC = r.C.norm();
  r.intertwine_residual = 0;
  for (int i = 0; i < 3; ++i)
    r.intertwine_residual = std::max(r.intertwine_residual, (r.M[i] * r.C - r.C * P[i]).norm() / nC);
  if (r.rank_C == 3) {
    Mat3c Ci = r.C.inverse();
    double res = 0;
    for (int i = 0; i < 3; ++i) res = std::max(res, (Ci * r.M[i] * r.C - P[i]).cwiseAbs().maxCoeff());
    r.conjugation_residual = res;
  } else {
    r.conjugation_residual.reset();
  }
  Vec3c ones(1, 1, 1);
  r.fixed_vector_residual = 0;
  for (int i = 0; i < 3; ++i)
    r.fixed_vector_residual =
        std::max(r.fixed_vector_residual, (r.M[i] * r.C * ones - r.C * ones).norm() / nC);
}

inline std::array<Mat3c, 3> identity_twist_matrices() {
  auto T = braid_matrices(BraidWord{});
  return {to_complex(T[0]), to_complex(T[1]), to_complex(T[2])};
}

inline Mat3c loop_monodromy_single(const UOperator& U, const ConnectionConfig& cfg, const Loop& l,
                                   const IntegratorConfig& ic = {}, Side side = Side::gradient,
                                   long* steps = nullptr) {
  return transport_z(U, cfg, l.segments, Mat3c::Identity(), ic, side, steps);
}

inline MonodromyResult loop_monodromy(const FrobeniusPoint& pt, const ConnectionConfig& cfg,
                                      const std::array<Loop, 3>& loops, const IntegratorConfig& ic = {},
                                      const std::array<Mat3c, 3>& P = identity_twist_matrices()) {
  UOperator U = u_operator(pt);
  if (U.min_gap < 1e-6) throw std::domain_error("point is not tame");
  MonodromyResult r;
  for (int i = 0; i < 3; ++i) {
    r.M[i] = loop_monodromy_single(U, cfg, loops[i], ic, Side::gradient, &r.steps);
    Mat3c N = r.M[i] - Mat3c::Identity();
    r.unipotency = std::max(r.unipotency, (N * N).norm());
    r.det_defect = std::max(r.det_defect, std::abs(r.M[i].determinant() - 1.0));
  }
  solve_intertwiner(r, P);
  return r;
}

// ---------------------------------------------------------------- base transport

using TPoint = std::array<cplx, 3>;

// Smooth path in t-space over s in [0,1].
struct TSegment {
  std::function<TPoint(double)> at;
  std::function<TPoint(double)> d;

  static TSegment line(TPoint a, TPoint b) {
    return {[=](double s) { return TPoint{a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1]), a[2] + s * (b[2] - a[2])}; },
            [=](double) { return TPoint{b[0] - a[0], b[1] - a[1], b[2] - a[2]}; }};
  }
  // arc in the t0 coordinate, other coordinates frozen
  static TSegment t0_arc(TPoint base, cplx center, double radius, double th0, double th1) {
    return {[=](double s) {
              TPoint t = base;
              t[0] = center + std::polar(radius, th0 + s * (th1 - th0));
              return t;
            },
            [=](double s) { return TPoint{kI * (th1 - th0) * std::polar(radius, th0 + s * (th1 - th0)), 0.0, 0.0}; }};
  }
  // flow of the Euler field for complex time sigma
  static TSegment euler_flow(TPoint t, cplx sigma) {
    return {[=](double s) {
              cplx g = s * sigma;
              return TPoint{t[0] * std::exp(g), t[1] + 3.0 * g, t[2] * std::exp(-g)};
            },
            [=](double s) {
              cplx g = s * sigma;
              return TPoint{sigma * t[0] * std::exp(g), 3.0 * sigma, -sigma * t[2] * std::exp(-g)};
            }};
  }
};

// Rows 0..2 hold flat sections (columns), row 3 the running periods W.
using SectionState = Eigen::Matrix<cplx, 4, 3>;

class DiscriminantApproach : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct BaseTransportOptions {
  OdeOptions ode{1e-12, 1e-14, 1e-3, 1e-14, 2000000};
  double guard = 1e-6;   // minimum |u_i| and eigenvalue gap
  int kmax = 12;
};

// Parallel transport at z = 0: d xi = U^{-1} (dt o) B xi, dW_i = eta(xi_i, dt).
inline SectionState transport_base(const std::vector<TSegment>& path, const ConnectionConfig& cfg, SectionState Y,
                                   const BaseTransportOptions& o = {}) {
  Mat3c B = cfg.B();
  for (const TSegment& sg : path) {
    auto f = [&](double s, const SectionState& y) -> SectionState {
      TPoint t = sg.at(s), dt = sg.d(s);
      FrobeniusPoint pt = FrobeniusPoint::make(t, o.kmax);
      ProductTensor P = product(pt);
      Vec3c E = euler_vector(pt);
      Mat3c U = E(0) * P.C[0] + E(1) * P.C[1] + E(2) * P.C[2];
      Mat3c Cdt = dt[0] * P.C[0] + dt[1] * P.C[1] + dt[2] * P.C[2];
      SectionState out;
      out.topRows<3>() = U.partialPivLu().solve(Cdt * (B * y.topRows<3>()));
      for (int i = 0; i < 3; ++i) out(3, i) = dt[0] * y(2, i) + dt[1] * y(1, i) + dt[2] * y(0, i);
      return out;
    };
    auto hmax = [&](double s) {
      TPoint t = sg.at(s), dt = sg.d(s);
      UOperator U = u_operator(FrobeniusPoint::make(t, o.kmax));
      double m = 1e300;
      for (auto& u : U.u) m = std::min(m, std::abs(u));
      if (m < o.guard) throw DiscriminantApproach("path approaches the discriminant (u_i = 0)");
      if (U.min_gap < o.guard) throw DiscriminantApproach("path approaches an eigenvalue collision");
      double speed = std::abs(dt[0]) + std::abs(dt[1]) * std::max(1.0, std::abs(U.u[0])) + std::abs(dt[2]);
      return speed == 0 ? 1.0 : 0.1 * std::min(m, U.min_gap) / speed;
    };
    Y = dopri5(f, 0.0, 1.0, Y, o.ode, hmax);
  }
  return Y;
}

inline SectionState make_state(const Mat3c& sections, const std::array<cplx, 3>& W) {
  SectionState s;
  s.topRows<3>() = sections;
  for (int i = 0; i < 3; ++i) s(3, i) = W[i];
  return s;
}

inline std::array<cplx, 3> periods_of(const SectionState& s) { return {s(3, 0), s(3, 1), s(3, 2)}; }

// ---------------------------------------------------------------- periods

// The distinguished triple at the base point together with the normalization
// of the period map. Anchors W_i(t*) = i/3 (the Z/3-symmetric value) so that
// sum W_i = i follows from phi_0 + phi_1 + phi_2 = 0; the overall scalar is
// fixed by requiring W_0 to vanish at the conifold point t0 = -1 of the small
// quantum line through t*, where u_0 = 1 + t0 -> 0.
struct PeriodGauge {
  FrobeniusPoint base;
  ConnectionConfig cfg;
  MonodromyResult mono;
  Mat3c L;                     // normalized phi_i as columns at t*
  std::array<cplx, 3> W_base;  // i/3 each
  cplx scale;                  // normalization applied to mono.C
  SectionState at_detour_end;  // state at t0 = -1.5 after the upper half-plane detour
  BaseTransportOptions opts;
};

inline constexpr double kDetourRadius = 0.5;

inline PeriodGauge make_period_gauge(const ConnectionConfig& cfg = {}, const IntegratorConfig& ic = {},
                                     const BaseTransportOptions& o = {}) {
  PeriodGauge g;
  g.base = solve_base_point();
  g.cfg = cfg;
  g.opts = o;
  UOperator U = u_operator(g.base);
  g.mono = loop_monodromy(g.base, cfg, standard_loops(U), ic);
  TPoint t = g.base.t;
  std::array<cplx, 3> zero{0.0, 0.0, 0.0};
  // integral of eta(phi, d/dt0) from t0 = 0 to -1 + eps, Richardson in eps
  BaseTransportOptions near = o;
  near.guard = 0;
  auto to_conifold = [&](double eps) {
    TPoint e = t;
    e[0] = -1.0 + eps;
    return periods_of(transport_base({TSegment::line(t, e)}, cfg, make_state(g.mono.C, zero), near));
  };
  auto a = to_conifold(1e-9), b = to_conifold(2e-9);
  cplx w0 = 2.0 * a[0] - b[0];
  g.W_base = {kI / 3.0, kI / 3.0, kI / 3.0};
  g.scale = (-kI / 3.0) / w0;
  g.L = g.scale * g.mono.C;
  // detour to t0 = -1.5 through the upper half plane
  TPoint p1 = t, p2 = t;
  p1[0] = -1.0 + kDetourRadius;
  p2[0] = -1.0 - kDetourRadius;
  g.at_detour_end = transport_base(
      {TSegment::line(t, p1), TSegment::t0_arc(p1, -1.0, kDetourRadius, 0.0, kPi)}, cfg, make_state(g.L, g.W_base), o);
  return g;
}

struct PeriodSample {
  double z = 0;
  std::array<cplx, 3> W{};
  Mat3c phi;            // gradients at t(z)
  TPoint t{};
  double euler_drift = 0;  // change of W along the Euler flow leg
};

inline TPoint small_locus_point(double z) { return {-1.0, std::log(z / 27.0), 0.0}; }

// W on the small quantum locus t(z) = (-1, log(z/27), 0), 0 < z < 1, reached
// from t* along t0 (upper detour around the conifold) and then the Euler flow.
inline PeriodSample period_map_small_locus(const PeriodGauge& g, double z) {
  if (!(z > 0 && z < 1)) throw std::domain_error("period map needs 0 < z < 1");
  TPoint p2 = g.base.t;
  p2[0] = -1.0 - kDetourRadius;
  TPoint p3 = g.base.t;
  p3[0] = -std::pow(z, -1.0 / 3.0);
  SectionState s = transport_base({TSegment::line(p2, p3)}, g.cfg, g.at_detour_end, g.opts);
  auto before = periods_of(s);
  s = transport_base({TSegment::euler_flow(p3, std::log(z) / 3.0)}, g.cfg, s, g.opts);
  PeriodSample out;
  out.z = z;
  out.W = periods_of(s);
  out.phi = s.topRows<3>();
  out.t = small_locus_point(z);
  for (int i = 0; i < 3; ++i) out.euler_drift = std::max(out.euler_drift, std::abs(out.W[i] - before[i]));
  return out;
}

// dW_i(E) at the sample, should vanish identically
inline std::array<cplx, 3> euler_derivative(const PeriodSample& ps) {
  FrobeniusPoint pt = FrobeniusPoint::make(ps.t);
  Vec3c E = euler_vector(pt);
  std::array<cplx, 3> r{};
  for (int i = 0; i < 3; ++i) r[i] = E(0) * ps.phi(2, i) + E(1) * ps.phi(1, i) + E(2) * ps.phi(0, i);
  return r;
}

// [theta^3 - z (theta + 1/3)(theta + 2/3) theta] f with second order central
// differences in x = log z on the five points x0 + k h, k = -2..2.
inline cplx pf_apply(const std::array<cplx, 5>& f, double z0, double h) {
  cplx th1 = (f[3] - f[1]) / (2 * h);
  cplx th2 = (f[3] - 2.0 * f[2] + f[1]) / (h * h);
  cplx th3 = (f[4] - 2.0 * f[3] + 2.0 * f[1] - f[0]) / (2 * h * h * h);
  return th3 - z0 * (th3 + th2 + (2.0 / 9.0) * th1);
}

struct PFReport {
  double z0 = 0;
  double h = 0;
  double residual_h = 0;       // stencil h
  double residual_2h = 0;      // stencil 2h
  double extrapolated = 0;     // Richardson combination (4 R_h - R_2h) / 3
  double ratio = 0;            // R_2h / R_h, about 4 for second order truncation
};

class StencilTooCoarse : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// samples[k] = W at z0 exp((k - 4) h), k = 0..8 (nine points)
inline PFReport pf_residual(const std::vector<std::array<cplx, 3>>& samples, double z0, double h) {
  if (samples.size() < 9) throw StencilTooCoarse("need a nine point stencil");
  if (h > 0.01 + 1e-15) throw StencilTooCoarse("stencil spacing above 0.01");
  PFReport r;
  r.z0 = z0;
  r.h = h;
  for (int i = 0; i < 3; ++i) {
    std::array<cplx, 5> fh{samples[2][i], samples[3][i], samples[4][i], samples[5][i], samples[6][i]};
    std::array<cplx, 5> f2h{samples[0][i], samples[2][i], samples[4][i], samples[6][i], samples[8][i]};
    cplx a = pf_apply(fh, z0, h), b = pf_apply(f2h, z0, 2 * h);
    r.residual_h = std::max(r.residual_h, std::abs(a));
    r.residual_2h = std::max(r.residual_2h, std::abs(b));
    r.extrapolated = std::max(r.extrapolated, std::abs((4.0 * a - b) / 3.0));
  }
  r.ratio = r.residual_h > 0 ? r.residual_2h / r.residual_h : 0;
  return r;
}

inline std::vector<std::array<cplx, 3>> pf_stencil(const PeriodGauge& g, double z0, double h) {
  std::vector<std::array<cplx, 3>> out;
  for (int k = -4; k <= 4; ++k) out.push_back(period_map_small_locus(g, z0 * std::exp(k * h)).W);
  return out;
}

inline PFReport pf_check(const PeriodGauge& g, double z0, double h) { return pf_residual(pf_stencil(g, z0, h), z0, h); }

// Transport of the standard triple around t1 -> t1 + 2 pi i k (k = +-1) at the base point.
inline Mat3c q_loop_transport(const PeriodGauge& g, int k) {
  TPoint a = g.base.t, b = g.base.t;
  b[1] += 2.0 * kPi * kI * static_cast<double>(k);
  return transport_base({TSegment::line(a, b)}, g.cfg, make_state(g.L, g.W_base), g.opts).topRows<3>();
}

// Residual of M_j X = X P_j(rho g) where X is the transported triple and
// rho = r for the loop t1 -> t1 - 2 pi i, rho = r^{-1} for t1 + 2 pi i.
inline double q_loop_residual(const PeriodGauge& g, int k) {
  Mat3c X = q_loop_transport(g, k);
  Letter rho{kRotation, k > 0};
  auto T = braid_matrices(BraidWord{{rho}});
  double res = 0;
  for (int j = 0; j < 3; ++j) res = std::max(res, (g.mono.M[j] * X - X * to_complex(T[j])).norm() / X.norm());
  return res;
}

// ---------------------------------------------------------------- conjecture probe

struct ProbeSample {
  double z = 0;
  std::array<cplx, 3> W{};
  cplx sum_defect = 0;   // sum W_i - i
  cplx jacobian = 0;     // det d(W0,W1)/d(t0,t2)
  bool in_identity_region = false;  // all Im W_i > 0
};

struct ProbeReport {
  std::vector<ProbeSample> samples;
  double max_sum_defect = 0;
  double min_abs_jacobian = 1e300;
  size_t in_identity_region = 0;
  bool base_in_identity_region = false;
};

inline ProbeReport conjecture_probe(const PeriodGauge& g, int n, double zmin = 0.02, double zmax = 0.3) {
  ProbeReport r;
  r.base_in_identity_region = g.W_base[0].imag() > 0 && g.W_base[1].imag() > 0 && g.W_base[2].imag() > 0;
  for (int k = 0; k < n; ++k) {
    double z = n == 1 ? zmin : zmin * std::pow(zmax / zmin, static_cast<double>(k) / (n - 1));
    PeriodSample ps = period_map_small_locus(g, z);
    ProbeSample s;
    s.z = z;
    s.W = ps.W;
    s.sum_defect = ps.W[0] + ps.W[1] + ps.W[2] - kI;
    // dW_i/dt0 = phi_i^2, dW_i/dt2 = phi_i^0
    s.jacobian = ps.phi(2, 0) * ps.phi(0, 1) - ps.phi(0, 0) * ps.phi(2, 1);
    s.in_identity_region = ps.W[0].imag() > 0 && ps.W[1].imag() > 0 && ps.W[2].imag() > 0;
    r.max_sum_defect = std::max(r.max_sum_defect, std::abs(s.sum_defect));
    r.min_abs_jacobian = std::min(r.min_abs_jacobian, std::abs(s.jacobian));
    if (s.in_identity_region) ++r.in_identity_region;
    r.samples.push_back(s);
  }
  return r;
}

// ---------------------------------------------------------------- P^1

inline cplx p1_argument(cplx lambda) { return (1.0 + lambda) / (1.0 - lambda); }

// (1/pi) arccos((1+l)/(1-l)); on the real cut w > 1 the value +i arccosh(w)/pi is chosen.
inline cplx p1_period(cplx lambda) {
  if (lambda == 0.0 || lambda == 1.0) throw std::domain_error("lambda must avoid 0 and 1");
  cplx w = p1_argument(lambda);
  cplx v = std::acos(w);
  if (w.imag() == 0 && w.real() > 1) v = cplx(0, std::acosh(w.real()));
  if (w.imag() == 0 && w.real() < -1) v = cplx(kPi, -std::acosh(-w.real()));
  return v / kPi;
}

// closed form of dW/dlambda on the branch through W
inline cplx p1_derivative(cplx lambda, cplx W) {
  cplx dw = 2.0 / ((1.0 - lambda) * (1.0 - lambda));
  return -dw / (kPi * std::sin(kPi * W));
}

struct P1Continuation {
  cplx W_start, W_end;
  double min_integer_distance = 1e300;
  double max_cos_defect = 0;
};

class BranchTrackingFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double integer_distance(cplx W) {
  return std::abs(W - std::round(W.real()));
}

// Continues W along the polyline through `pts`, starting from W0, by small
// predictor steps and Newton corrections on cos(pi W) = w(lambda).
inline P1Continuation p1_continue(const std::vector<cplx>& pts, cplx W0) {
  P1Continuation r;
  r.W_start = W0;
  cplx W = W0;
  r.min_integer_distance = integer_distance(W);
  for (size_t k = 0; k + 1 < pts.size(); ++k) {
    cplx a = pts[k], b = pts[k + 1];
    double s = 0;
    while (s < 1) {
      cplx l = a + s * (b - a);
      double scale = std::min({std::abs(l), std::abs(l - 1.0), 1.0});
      double ds = std::min(1 - s, 0.02 * scale / std::max(std::abs(b - a), 1e-300));
      cplx ln = a + (s + ds) * (b - a);
      cplx Wn = W + p1_derivative(l, W) * (ln - l);
      cplx w = p1_argument(ln);
      for (int it = 0; it < 50; ++it) {
        cplx F = std::cos(kPi * Wn) - w;
        cplx dF = -kPi * std::sin(kPi * Wn);
        cplx step = F / dF;
        Wn -= step;
        if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(Wn))) break;
      }
      if (std::abs(Wn - W) > 0.25) throw BranchTrackingFailure("branch jump during continuation");
      W = Wn;
      s += ds;
      r.min_integer_distance = std::min(r.min_integer_distance, integer_distance(W));
      r.max_cos_defect = std::max(r.max_cos_defect, std::abs(std::cos(kPi * W) - w) / std::max(1.0, std::abs(w)));
    }
  }
  r.W_end = W;
  return r;
}

struct P1Affine {
  int epsilon = 1;
  long k = 0;
  double integrality_defect = 0;
  cplx W_start, W_end;
};

// For a closed path: W_end = epsilon W_start + 2k.
inline P1Affine p1_monodromy(const std::vector<cplx>& closed) {
  if (closed.size() < 2 || std::abs(closed.front() - closed.back()) > 1e-12)
    throw std::invalid_argument("path is not closed");
  cplx W0 = p1_period(closed.front());
  P1Continuation c = p1_continue(closed, W0);
  P1Affine best;
  best.integrality_defect = 1e300;
  for (int e : {1, -1}) {
    cplx kk = (c.W_end - static_cast<double>(e) * W0) / 2.0;
    double def = std::abs(kk - std::round(kk.real()));
    if (def < best.integrality_defect) {
      best.epsilon = e;
      best.k = std::lround(kk.real());
      best.integrality_defect = def;
    }
  }
  best.W_start = W0;
  best.W_end = c.W_end;
  return best;
}

// circle around c of radius rad starting and ending at c + rad
inline std::vector<cplx> circle_path(cplx c, double rad, int turns = 1, int n = 400) {
  std::vector<cplx> v;
  for (int k = 0; k <= n * std::abs(turns); ++k)
    v.push_back(c + std::polar(rad, (turns > 0 ? 2 : -2) * kPi * k / n));
  v.back() = v.front();
  return v;
}

}  // namespace stabp2
