#pragma once

#include "core.hpp"

#include <functional>

namespace isotau {

struct OdeConfig {
  double rtol = 1e-10, atol = 1e-12;
  int max_steps = 200000;
};

struct OdeStats {
  int steps = 0, rejected = 0;
};

// dY/ds = F(s) Y on [0, 1], Dormand-Prince 5(4)
inline Mat2 integrate_matrix(const std::function<Mat2(double)>& F, Mat2 Y, const OdeConfig& cfg = {},
                             OdeStats* stats = nullptr) {
  static constexpr double c2 = 1. / 5, c3 = 3. / 10, c4 = 4. / 5, c5 = 8. / 9;
  static constexpr double a21 = 1. / 5;
  static constexpr double a31 = 3. / 40, a32 = 9. / 40;
  static constexpr double a41 = 44. / 45, a42 = -56. / 15, a43 = 32. / 9;
  static constexpr double a51 = 19372. / 6561, a52 = -25360. / 2187, a53 = 64448. / 6561, a54 = -212. / 729;
  static constexpr double a61 = 9017. / 3168, a62 = -355. / 33, a63 = 46732. / 5247, a64 = 49. / 176,
                          a65 = -5103. / 18656;
  static constexpr double b1 = 35. / 384, b3 = 500. / 1113, b4 = 125. / 192, b5 = -2187. / 6784, b6 = 11. / 84;
  static constexpr double d1 = b1 - 5179. / 57600, d3 = b3 - 7571. / 16695, d4 = b4 - 393. / 640,
                          d5 = b5 + 92097. / 339200, d6 = b6 - 187. / 2100, d7 = -1. / 40;
  double s = 0, h = 1e-3;
  OdeStats st;
  Mat2 k1 = F(0) * Y;
  while (s < 1) {
    if (st.steps + st.rejected > cfg.max_steps) throw precision_error("ode: step budget exhausted");
    if (s + h > 1) h = 1 - s;
    Mat2 k2 = F(s + c2 * h) * (Y + h * a21 * k1);
    Mat2 k3 = F(s + c3 * h) * (Y + h * (a31 * k1 + a32 * k2));
    Mat2 k4 = F(s + c4 * h) * (Y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    Mat2 k5 = F(s + c5 * h) * (Y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    Mat2 k6 = F(s + h) * (Y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Mat2 Yn = Y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    Mat2 k7 = F(s + h) * Yn;
    Mat2 E = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
    double sc = cfg.atol + cfg.rtol * std::max(maxabs(Y), maxabs(Yn));
    double err = maxabs(E) / sc;
    if (!std::isfinite(err)) err = 1e10;
    double fac = err == 0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    if (err <= 1) {
      s += h;
      Y = Yn;
      k1 = k7;
      ++st.steps;
    } else {
      ++st.rejected;
    }
    h *= fac;
    if (h < 1e-14) throw geometry_error("ode: step size collapsed near a singular point; increase loop clearance");
  }
  if (stats) *stats = st;
  return Y;
}

// a path piece in the x-plane
struct PathPiece {
  std::function<cplx(double)> x, dx;
};

inline PathPiece segment(cplx a, cplx b) {
  return {[=](double s) { return a + s * (b - a); }, [=](double) { return b - a; }};
}

// arc around c from angle th0 to th1 (ccw when th1 > th0)
inline PathPiece arc(cplx c, double r, double th0, double th1) {
  return {[=](double s) { return c + r * std::exp(I * (th0 + s * (th1 - th0))); },
          [=](double s) { return I * (th1 - th0) * r * std::exp(I * (th0 + s * (th1 - th0))); }};
}

using Path = std::vector<PathPiece>;

// transport of dY/dx = A(x) Y along a path
inline Mat2 transport(const std::function<Mat2(cplx)>& A, const Path& path, Mat2 Y, const OdeConfig& cfg = {}) {
  for (const auto& p : path) Y = integrate_matrix([&](double s) { return A(p.x(s)) * p.dx(s); }, Y, cfg);
  return Y;
}

}  // namespace isotau
