#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace stabp2 {

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 1e-3;
  double h_min = 1e-14;
  long max_steps = 2000000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
};

class StepCollapse : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dormand-Prince 5(4) with PI-free standard step control. State is any Eigen
// dense type; `hmax(s)` bounds the step at parameter s (used to slow down
// near poles of the coefficient matrix).
template <class State, class F>
State dopri5(F&& f, double s0, double s1, State y, const OdeOptions& opt,
             const std::function<double(double)>& hmax = {}, OdeStats* stats = nullptr) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  if (s1 == s0) return y;
  const double dir = s1 > s0 ? 1.0 : -1.0;
  const double span = std::abs(s1 - s0);
  double h = std::min(opt.h_init, span);
  double s = s0;
  State k1 = f(s, y);
  OdeStats local;
  for (long n = 0; n < opt.max_steps; ++n) {
    if (hmax) h = std::min(h, hmax(s));
    double left = std::abs(s1 - s);
    bool last = false;
    if (h >= left) {
      h = left;
      last = true;
    }
    if (h < opt.h_min * std::max(1.0, span))
      throw StepCollapse("step size collapsed at s=" + std::to_string(s));
    double hs = dir * h;
    State k2 = f(s + c2 * hs, (y + hs * (a21 * k1)).eval());
    State k3 = f(s + c3 * hs, (y + hs * (a31 * k1 + a32 * k2)).eval());
    State k4 = f(s + c4 * hs, (y + hs * (a41 * k1 + a42 * k2 + a43 * k3)).eval());
    State k5 = f(s + c5 * hs, (y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)).eval());
    State k6 = f(s + hs, (y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)).eval());
    State ynew = (y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6)).eval();
    State k7 = f(s + hs, ynew);
    State err = (hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7)).eval();

    double en = 0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
      double sc = opt.atol + opt.rtol * std::max(std::abs(y(i)), std::abs(ynew(i)));
      en = std::max(en, std::abs(err(i)) / sc);
    }
    if (en <= 1.0) {
      s = last ? s1 : s + hs;
      y = ynew;
      k1 = k7;
      ++local.accepted;
      if (last) {
        if (stats) *stats = local;
        return y;
      }
    } else {
      ++local.rejected;
    }
    double fac = en == 0 ? 5.0 : 0.9 * std::pow(en, -0.2);
    h *= std::clamp(fac, 0.2, 5.0);
  }
  throw StepCollapse("too many steps");
}

}  // namespace stabp2
