#pragma once

#include "isomono.hpp"
#include "ode.hpp"

namespace isotau {

struct LoopGeometry {
  cplx x0;
  double r_small;       // keyhole radius around each branch point
  cplx big_center;
  double big_radius;
};

inline double min_gap_with_a(const DeformationParams& P) {
  const auto& e = P.branch.e;
  double g = 1e300;
  for (int i = 0; i < 3; ++i) {
    g = std::min(g, std::abs(e[i] - P.a));
    for (int j = i + 1; j < 3; ++j) g = std::min(g, std::abs(e[i] - e[j]));
  }
  return g;
}

inline LoopGeometry loop_geometry(const DeformationParams& P) {
  LoopGeometry g;
  g.x0 = P.branch.x0;
  g.r_small = 0.2 * min_gap_with_a(P);
  g.big_center = P.branch.centroid;
  g.big_radius = std::abs(g.x0 - g.big_center);
  return g;
}

// loop index: 0 = infinity (clockwise big circle), 1..3 = keyhole around e_1..e_3
inline Path loop_path(const DeformationParams& P, int loop) {
  auto g = loop_geometry(P);
  if (loop == 0) {
    double th = std::arg(g.x0 - g.big_center);
    return {arc(g.big_center, g.big_radius, th, th - 2 * pi)};
  }
  cplx e = P.branch.e[loop - 1];
  cplx dir = (g.x0 - e) / std::abs(g.x0 - e);
  cplx p = e + g.r_small * dir;
  double th = std::arg(dir);
  return {segment(g.x0, p), arc(e, g.r_small, th, th + 2 * pi), segment(p, g.x0)};
}

// closed-form Y at the base point, continued from a along a_path
inline std::pair<YState, Mat2> y_at_base(const DeformationParams& P) {
  const auto& path = P.a_path;
  cplx dir = (path[1] - P.a) / std::abs(path[1] - P.a);
  double r0 = std::min(1e-2 * min_gap_with_a(P), 0.05 * std::abs(P.wp1a * P.t) + 1e-3 * min_gap_with_a(P));
  YState st = y_start(P, P.a + r0 * dir);
  y_follow(P, st, {path.begin() + 1, path.end()});
  return {st, y_value(P, st)};
}

struct MonodromyResult {
  std::array<Mat2, 4> M;  // numerical, same indexing as MonodromyData
  Mat2 Y0;
};

inline MonodromyResult numerical_monodromy(const DeformationParams& P, const OdeConfig& cfg = {}) {
  auto sc = coefficients(P);
  auto [st, Y0] = y_at_base(P);
  MonodromyResult r;
  r.Y0 = Y0;
  Mat2 Y0i = inv2(Y0);
  for (int l = 0; l < 4; ++l) {
    Mat2 F = transport(sc, loop_path(P, l), Mat2::Identity(), cfg);
    r.M[l] = Y0i * F * Y0;
  }
  return r;
}

// one loop: Y(x0)^-1 Y_continued(x0)
inline Mat2 continue_monodromy(const DeformationParams& P, int loop, const OdeConfig& cfg = {}) {
  if (loop < 0 || loop > 3) throw config_error("loop index must be 0 (infinity) or 1..3");
  auto sc = coefficients(P);
  Mat2 Y0 = y_at_base(P).second;
  return inv2(Y0) * transport(sc, loop_path(P, loop), Y0, cfg);
}

// Y after the ODE along the loop vs the closed form continued along the same loop
inline double loop_consistency(const DeformationParams& P, int loop, const OdeConfig& cfg = {}) {
  auto sc = coefficients(P);
  auto [st, Y0] = y_at_base(P);
  Path path = loop_path(P, loop);
  double worst = 0;
  Mat2 Y = Y0;
  for (const auto& piece : path) {
    Y = transport(sc, {piece}, Y, cfg);
    std::vector<cplx> pts;
    for (int k = 1; k <= 64; ++k) pts.push_back(piece.x(k / 64.0));
    y_follow(P, st, pts);
    Mat2 Yc = y_value(P, st);
    worst = std::max(worst, maxabs(inv2(Yc) * Y - Mat2::Identity()));
  }
  return worst;
}

struct StokesCheck {
  double radius;
  std::array<Mat2, 2> S;  // connection between closed form and numerical continuation across each sector
  double residual;
};

// half-circle steps around a across the anti-Stokes rays Re(wp'(alpha) t / (x - a)) = 0
inline StokesCheck stokes_check(const DeformationParams& P, const OdeConfig& cfg = {}) {
  auto sc = coefficients(P);
  cplx c = P.wp1a * P.t;
  double d = 1e300;
  for (auto e : P.branch.e) d = std::min(d, std::abs(e - P.a));
  StokesCheck out;
  out.radius = std::min(0.5 * d, std::max(std::abs(c) / 8.0, 0.05 * d));
  double th1 = std::arg(c);
  YState st = y_start(P, P.a + 1e-3 * out.radius * std::exp(I * th1));
  y_advance(P, st, P.a + out.radius * std::exp(I * th1));
  Mat2 Y = y_value(P, st);
  out.residual = 0;
  for (int k = 0; k < 2; ++k) {
    double a0 = th1 + k * pi, a1 = a0 + pi;
    auto piece = arc(P.a, out.radius, a0, a1);
    Y = transport(sc, {piece}, Y, cfg);
    std::vector<cplx> pts;
    for (int j = 1; j <= 64; ++j) pts.push_back(piece.x(j / 64.0));
    y_follow(P, st, pts);
    Mat2 Yc = y_value(P, st);
    out.S[k] = inv2(Yc) * Y;
    out.residual = std::max(out.residual, maxabs(out.S[k] - Mat2::Identity()));
    Y = Yc;
  }
  return out;
}

// max change of the numerical monodromy under small moves of t and each e
inline double monodromy_drift(const DeformationParams& P, double h = 1e-3, const OdeConfig& cfg = {}) {
  auto base = numerical_monodromy(P, cfg);
  double worst = 0;
  for (int w = 0; w < 4; ++w) {
    auto Q = shifted(P, w, h);
    auto m = numerical_monodromy(Q, cfg);
    for (int l = 0; l < 4; ++l) worst = std::max(worst, maxabs(m.M[l] - base.M[l]));
  }
  return worst;
}

}  // namespace isotau
