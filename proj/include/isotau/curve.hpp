#pragma once

#include "quadrature.hpp"
#include "weierstrass.hpp"

#include <optional>
#include <vector>

namespace isotau {

// Geometry of y^2 = 4 prod (x - e_nu).
// Cut A runs from e1 to infinity along the ray pointing away from the base point x0,
// cut B is the segment [e2, e3].  The base point sits at distance `reach` from the centroid
// in direction `down` = -i exp(i frame_angle); for frame_angle = 0 it is straight below.
struct BranchConfig {
  std::array<cplx, 3> e;
  cplx centroid;
  double scale = 0;  // max pairwise |e_i - e_j|
  double gap = 0;    // min pairwise |e_i - e_j|
  double frame_angle = 0;
  double reach = 0;
  cplx down, x0, cutA_dir, sheet_c;

  cplx sum_e() const { return e[0] + e[1] + e[2]; }

  // y on sheet 1
  cplx y1(cplx x) const {
    cplx m = 0.5 * (e[1] + e[2]), d = 0.5 * (e[2] - e[1]);
    cplx w = x - m;
    cplx g = w * std::sqrt(1.0 - d * d / (w * w));
    cplx h = sheet_c * std::sqrt((x - e[0]) / (-cutA_dir));
    return 2.0 * g * h;
  }

  double cut_distance(cplx x) const {
    return std::min(dist_point_segment(x, e[1], e[2]), dist_point_ray(x, e[0], cutA_dir));
  }

  cplx ysq(cplx x) const { return 4.0 * (x - e[0]) * (x - e[1]) * (x - e[2]); }
};

// polyline from -> to in the plane cut along both cuts, keeping off the listed points
inline std::vector<cplx> cut_plane_path(const BranchConfig& b, cplx from, cplx to, const std::vector<cplx>& avoid = {}) {
  auto crosses = [&](cplx p, cplx q) {
    return segment_hits(p, q, b.e[1], b.e[2]) || segment_hits(p, q, b.e[0], b.e[0] + b.cutA_dir, true);
  };
  std::vector<cplx> pts(b.e.begin(), b.e.end());
  pts.insert(pts.end(), avoid.begin(), avoid.end());
  double clear = 0.1 * b.gap;
  for (auto x : avoid)
    for (auto e : b.e) clear = std::min(clear, 0.1 * std::abs(x - e));
  auto clean = [&](cplx p, cplx q) {
    if (crosses(p, q)) return false;
    for (auto z : pts)
      if (std::abs(z - p) > 1e-12 && std::abs(z - q) > 1e-12 &&
          dist_point_segment(z, p, q) < std::min(clear, 0.5 * std::min(std::abs(z - p), std::abs(z - q))))
        return false;
    return true;
  };
  if (clean(from, to)) return {from, to};
  std::vector<cplx> nodes{from, to};
  double R0 = 0.5 * b.scale;
  for (double f : {0.75, 1.25, 2.0, 3.5})
    for (int k = 0; k < 32; ++k) nodes.push_back(b.centroid + f * R0 * std::exp(2.0 * pi * I * (k + 0.5) / 32.0));
  for (auto e : b.e)
    for (int k = 0; k < 12; ++k) nodes.push_back(e + 0.4 * b.gap * std::exp(2.0 * pi * I * (k + 0.5) / 12.0));
  size_t n = nodes.size();
  std::vector<double> dist(n, 1e300);
  std::vector<int> prev(n, -1);
  std::vector<bool> done(n, false);
  dist[0] = 0;
  for (size_t it = 0; it < n; ++it) {
    int u = -1;
    for (size_t i = 0; i < n; ++i)
      if (!done[i] && (u < 0 || dist[i] < dist[u])) u = int(i);
    if (u < 0 || dist[u] >= 1e300) break;
    done[u] = true;
    if (u == 1) break;
    for (size_t v = 0; v < n; ++v) {
      if (done[v]) continue;
      double w = std::abs(nodes[v] - nodes[u]);
      if (dist[u] + w < dist[v] && clean(nodes[u], nodes[v])) {
        dist[v] = dist[u] + w;
        prev[v] = u;
      }
    }
  }
  if (prev[1] < 0) throw geometry_error("no cut-free path between the requested points");
  std::vector<cplx> path;
  for (int v = 1; v >= 0; v = prev[v]) path.push_back(nodes[v]);
  std::reverse(path.begin(), path.end());
  return path;
}

struct CurvePoint {
  cplx x;
  int sheet = 1;
  CurvePoint star() const { return {x, 3 - sheet}; }
};

inline void validate_branch_points(const std::array<cplx, 3>& e) {
  for (auto v : e)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw config_error("branch points must be finite");
  double mx = 0, mn = 1e300;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      mx = std::max(mx, std::abs(e[i] - e[j]));
      mn = std::min(mn, std::abs(e[i] - e[j]));
    }
  if (!(mn > 1e-8 * mx)) throw config_error("branch points must be pairwise distinct");
}

inline BranchConfig make_branch_with_frame(const std::array<cplx, 3>& e, double frame_angle, double reach) {
  validate_branch_points(e);
  BranchConfig b;
  b.e = e;
  b.centroid = (e[0] + e[1] + e[2]) / 3.0;
  b.scale = 0;
  b.gap = 1e300;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      b.scale = std::max(b.scale, std::abs(e[i] - e[j]));
      b.gap = std::min(b.gap, std::abs(e[i] - e[j]));
    }
  b.frame_angle = frame_angle;
  b.reach = reach;
  b.down = -I * std::polar(1.0, frame_angle);
  b.x0 = b.centroid + reach * b.down;
  b.cutA_dir = (e[0] - b.x0) / std::abs(e[0] - b.x0);
  cplx rho = b.cutA_dir / (-b.down);
  b.sheet_c = I * std::polar(1.0, pi / 4 + frame_angle / 2) * std::sqrt(rho);
  return b;
}

struct FrameScore {
  bool ordered = false;
  double clearance = 0;
};

// points seen from x0 must appear as e1, e2, e3 counterclockwise; legs and the path to a
// should keep away from the other singular points
inline FrameScore score_frame(const BranchConfig& b, std::optional<cplx> a) {
  FrameScore s;
  cplx up = -b.down;
  double th[3];
  for (int k = 0; k < 3; ++k) th[k] = std::arg((b.e[k] - b.x0) / up);
  s.ordered = th[0] < th[1] && th[1] < th[2];
  std::vector<cplx> pts(b.e.begin(), b.e.end());
  if (a) pts.push_back(*a);
  double g = 1e300;
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j) g = std::min(g, std::abs(pts[i] - pts[j]));
  double c = 1e300;
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = 0; j < pts.size(); ++j)
      if (i != j) c = std::min(c, dist_point_segment(pts[j], b.x0, pts[i]));
  s.clearance = c / g;
  return s;
}

inline double reach_for(const std::array<cplx, 3>& e, std::optional<cplx> a) {
  std::vector<cplx> pts(e.begin(), e.end());
  if (a) pts.push_back(*a);
  double s = 0;
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j) s = std::max(s, std::abs(pts[i] - pts[j]));
  return 2.0 * s;
}

inline BranchConfig make_branch(const std::array<cplx, 3>& e, std::optional<cplx> a = std::nullopt) {
  validate_branch_points(e);
  double reach = reach_for(e, a);
  std::optional<BranchConfig> best;
  double best_c = -1;
  // 5 degree steps first, then a fine scan for narrow ordering windows
  for (int steps : {36, 720}) {
    for (int k = 0; k <= steps; ++k) {
      for (int sgn : {1, -1}) {
        if ((k == 0 || k == steps) && sgn < 0) continue;
        double phi = sgn * k * pi / steps;
        BranchConfig b = make_branch_with_frame(e, phi, reach);
        FrameScore s = score_frame(b, a);
        if (!s.ordered) continue;
        if (s.clearance >= 0.3) return b;
        if (s.clearance > best_c) {
          best_c = s.clearance;
          best = b;
        }
      }
    }
    if (best) return *best;
  }
  throw geometry_error("no admissible base-point direction");
}

// ---------------------------------------------------------------- periods

struct Stadium {
  cplx P, Q;
  double r;
  // piece k in 0..3, s in [0,1]: returns point and derivative
  std::pair<cplx, cplx> at(int k, double s) const {
    cplx L = Q - P;
    cplx n = I * L / std::abs(L);
    switch (k) {
      case 0: return {P - r * n + s * L, L};
      case 1: {
        cplx e = std::exp(I * pi * s);
        return {Q - r * n * e, -r * n * I * pi * e};
      }
      case 2: return {Q + r * n - s * L, -L};
      default: {
        cplx e = std::exp(I * pi * s);
        return {P + r * n * e, r * n * I * pi * e};
      }
    }
  }
};

// closed-contour integral of dx/y, y continued from sheet 1 at the start point
inline cplx stadium_integral(const BranchConfig& b, const Stadium& st, const QuadConfig& q, int samples = 400) {
  struct Piece {
    int k;
    double s0, s1;
    double eps;
  };
  std::vector<Piece> pieces;
  auto same = [](cplx v, cplx ref) { return std::abs(v - ref) <= std::abs(v + ref); };
  double eps = 1;
  cplx prev = b.y1(st.at(0, 0).first);
  cplx start = prev;
  for (int k = 0; k < 4; ++k) {
    double s_start = 0;
    double slo = 0;
    cplx ylo = b.y1(st.at(k, 0).first);
    for (int i = 1; i <= samples; ++i) {
      double s = double(i) / samples;
      cplx y = b.y1(st.at(k, s).first);
      if (!same(y, ylo)) {
        double lo = slo, hi = s;
        for (int it = 0; it < 60; ++it) {
          double mid = 0.5 * (lo + hi);
          cplx ym = b.y1(st.at(k, mid).first);
          if (same(ym, ylo)) lo = mid; else hi = mid;
        }
        pieces.push_back({k, s_start, 0.5 * (lo + hi), eps});
        s_start = 0.5 * (lo + hi);
        eps = -eps;
      }
      slo = s;
      ylo = y;
      prev = eps * y;
    }
    pieces.push_back({k, s_start, 1.0, eps});
  }
  if (!same(prev, start)) throw geometry_error("period contour does not close on the curve");
  cplx total = 0;
  for (auto& p : pieces) {
    if (p.s1 <= p.s0) continue;
    auto f = [&](double s) {
      auto [x, dx] = st.at(p.k, s);
      return dx / (p.eps * b.y1(x));
    };
    total += integrate(f, p.s0, p.s1, q);
  }
  return total;
}

inline Stadium gamma_contour(const BranchConfig& b) {
  double d = std::min({dist_point_segment(b.e[0], b.e[1], b.e[2]), dist_point_ray(b.e[1], b.e[0], b.cutA_dir),
                       dist_point_ray(b.e[2], b.e[0], b.cutA_dir)});
  return {b.e[1], b.e[2], 0.5 * d};
}

inline Stadium delta_contour(const BranchConfig& b) {
  return {b.e[0], b.e[1], 0.5 * dist_point_segment(b.e[2], b.e[0], b.e[1])};
}

struct PeriodResult {
  Lattice lat;
  bool delta_flipped = false;
};

inline Lattice lattice_for_branch(const BranchConfig& b, cplx w1, cplx w2, const EvalConfig& cfg) {
  Lattice L = lattice_core(w1, w2, cfg);
  cplx s3 = b.sum_e() / 3.0;
  cplx t[3] = {b.e[0] - s3, b.e[1] - s3, b.e[2] - s3};
  L.g2 = -4.0 * (t[0] * t[1] + t[0] * t[2] + t[1] * t[2]);
  L.g3 = 4.0 * t[0] * t[1] * t[2];
  return L;
}

inline PeriodResult periods_ex(const BranchConfig& b, const QuadConfig& q = {}, const EvalConfig& cfg = {}) {
  cplx w1 = stadium_integral(b, gamma_contour(b), q);
  cplx w2 = stadium_integral(b, delta_contour(b), q);
  PeriodResult r;
  if (!((w2 / w1).imag() > 0)) {
    w2 = -w2;
    r.delta_flipped = true;
  }
  r.lat = lattice_for_branch(b, w1, w2, cfg);
  return r;
}

inline Lattice periods(const BranchConfig& b, const QuadConfig& q = {}, const EvalConfig& cfg = {}) {
  return periods_ex(b, q, cfg).lat;
}

// ---------------------------------------------------------------- half periods

struct HalfPeriodTable {
  std::array<cplx, 3> omega_tilde, eta_tilde;
  std::array<int, 3> perm;  // wp(omega_tilde[nu]) + sum/3 = e[perm[nu]]
  double residual = 0;
};

inline HalfPeriodTable half_periods(const BranchConfig& b, const Lattice& L) {
  HalfPeriodTable h;
  h.omega_tilde = {L.omega1 / 2.0, (L.omega1 + L.omega2) / 2.0, L.omega2 / 2.0};
  h.eta_tilde = {L.eta1, L.eta1 + L.eta2, L.eta2};
  cplx s3 = b.sum_e() / 3.0;
  std::array<bool, 3> used{};
  for (int nu = 0; nu < 3; ++nu) {
    cplx x = wp(L, h.omega_tilde[nu]) + s3;
    int best = 0;
    for (int k = 1; k < 3; ++k)
      if (std::abs(x - b.e[k]) < std::abs(x - b.e[best])) best = k;
    if (used[best]) throw geometry_error("half periods do not match branch points one to one");
    used[best] = true;
    h.perm[nu] = best;
    h.residual = std::max(h.residual, std::abs(x - b.e[best]) / b.scale);
  }
  if (h.residual > 1e-9) throw precision_error("half-period values do not reproduce the branch points");
  return h;
}

// ---------------------------------------------------------------- Abel map

struct WpPair {
  cplx wp, wp1;
};

inline WpPair wp_pair(const Lattice& L, cplx u) {
  auto d = dlog_sigma_char_jet(L, odd_char, u, 3);
  return {-d[2], -d[3]};
}

inline cplx newton_wp(const Lattice& L, cplx xt, cplx u, int iters = 60) {
  for (int i = 0; i < iters; ++i) {
    auto w = wp_pair(L, u);
    cplx du = (w.wp - xt) / w.wp1;
    u -= du;
    if (std::abs(du) < 1e-15 * std::max(1.0, std::abs(u))) return u;
  }
  auto w = wp_pair(L, u);
  if (std::abs(w.wp - xt) > 1e-10 * std::max(1.0, std::abs(xt))) throw precision_error("Newton for wp(u) = x failed");
  return u;
}

// follow u along a polyline in the x-plane, du = dx/wp'(u)
inline cplx lift_along(const BranchConfig& b, const Lattice& L, const std::vector<cplx>& path, cplx u) {
  cplx s3 = b.sum_e() / 3.0;
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    cplx x = path[i], end = path[i + 1];
    while (x != end) {
      double dmin = 1e300;
      for (auto ek : b.e) dmin = std::min(dmin, std::abs(x - ek));
      double h = std::max(0.15 * dmin, 1e-14 * std::max(1.0, std::abs(x)));
      cplx xn = std::abs(end - x) <= h ? end : x + h * (end - x) / std::abs(end - x);
      auto w = wp_pair(L, u);
      cplx um = u + 0.5 * (xn - x) / w.wp1;
      u = u + (xn - x) / wp_pair(L, um).wp1;
      u = newton_wp(L, xn - s3, u);
      x = xn;
    }
  }
  return u;
}

inline cplx y_at(const BranchConfig& b, const CurvePoint& P) { return P.sheet == 1 ? b.y1(P.x) : -b.y1(P.x); }

// u at the base point: straight in from the far anchor, which keeps every leg landing on its own half period
inline cplx abel_base(const BranchConfig& b, const Lattice& L) {
  cplx s3 = b.sum_e() / 3.0;
  cplx X = b.centroid + (b.x0 - b.centroid) * 500.0;
  cplx u = newton_wp(L, X - s3, -2.0 * (X - s3) / b.y1(X));
  return lift_along(b, L, {X, b.x0}, u);
}

inline cplx abel(const BranchConfig& b, const Lattice& L, const CurvePoint& P) {
  if (b.cut_distance(P.x) < 1e-12 * b.scale) throw geometry_error("abel: point lies on a branch cut");
  cplx s3 = b.sum_e() / 3.0;
  cplx X = b.centroid + (b.x0 - b.centroid) * 500.0;
  cplx u = -2.0 * (X - s3) / b.y1(X);
  u = newton_wp(L, X - s3, u);
  u = lift_along(b, L, cut_plane_path(b, X, P.x), u);
  cplx w1 = wp_prime(L, u), y = b.y1(P.x);
  if (std::abs(w1 - y) > 1e-6 * std::max(1.0, std::abs(y))) throw precision_error("abel: sheet mismatch after lifting");
  return P.sheet == 1 ? u : -u;
}

inline cplx x_from_u(const BranchConfig& b, const Lattice& L, cplx u) { return wp(L, u) + b.sum_e() / 3.0; }

struct InverseCoeffs {
  std::array<cplx, 3> c;  // u - alpha = c0 X + c1 X^2 + c2 X^3, X = x - a
  cplx alt_c1;             // -wp''/(2 wp'''), an alternate form of c1 kept for comparison
};

inline InverseCoeffs local_inverse_coeffs(const Lattice& L, cplx alpha) {
  auto j = wp_jet(L, alpha);
  if (std::abs(j.wp1) < 1e-12) throw degenerate_error("wp'(alpha) = 0: a is a branch point");
  InverseCoeffs r;
  cplx p1 = j.wp1, p2 = j.wp2, p3 = j.wp3;
  r.c[0] = 1.0 / p1;
  r.c[1] = -p2 / (2.0 * std::pow(p1, 3));
  r.c[2] = p2 * p2 / (2.0 * std::pow(p1, 5)) - p3 / (6.0 * std::pow(p1, 4));
  r.alt_c1 = -p2 / (2.0 * p3);
  return r;
}

struct AlphaRelations {
  cplx wp, wp1_sq, wp2;
};

inline AlphaRelations wp_alpha_relations(const BranchConfig& b, cplx a) {
  const auto& e = b.e;
  AlphaRelations r;
  r.wp = a - b.sum_e() / 3.0;
  r.wp1_sq = 4.0 * (a - e[0]) * (a - e[1]) * (a - e[2]);
  r.wp2 = 2.0 * ((a - e[0]) * (a - e[1]) + (a - e[0]) * (a - e[2]) + (a - e[1]) * (a - e[2]));
  return r;
}

// ---------------------------------------------------------------- branch-point derivatives

inline cplx prod_others(const BranchConfig& b, int nu) {
  cplx p = 1;
  for (int m = 0; m < 3; ++m)
    if (m != nu) p *= b.e[nu] - b.e[m];
  return p;
}

inline cplx sum_inv_others(const BranchConfig& b, int nu) {
  cplx s = 0;
  for (int m = 0; m < 3; ++m)
    if (m != nu) s += 1.0 / (b.e[nu] - b.e[m]);
  return s;
}

inline cplx dOmega_de(const BranchConfig& b, const Lattice& L, int nu) {
  return pi * I / (L.omega1 * L.omega1 * prod_others(b, nu));
}

inline cplx dlog_omega1_de(const BranchConfig& b, const Lattice& L, int nu) {
  auto j = theta_jet(odd_char, 0.0, L.Omega, 3, L.cfg);
  cplx dlog_t1p = j.dz[3] / (4.0 * pi * I * j.dz[1]) * dOmega_de(b, L, nu);
  return (2.0 * dlog_t1p - 0.5 * sum_inv_others(b, nu)) / 3.0;
}

struct LemmaU3U5 {
  double residual_u3, residual_u5;
};

inline LemmaU3U5 lemma_u3_u5_check(const BranchConfig& b, const Lattice& L) {
  auto j = theta_jet(odd_char, 0.0, L.Omega, 5, L.cfg);
  cplx r3 = j.dz[3] / j.dz[1], r5 = j.dz[5] / j.dz[1];
  cplx lhs3 = L.omega1 * L.eta1, rhs3 = -r3 / 3.0;
  const auto& e = b.e;
  cplx S = b.sum_e();
  cplx lhs5 = -S * S / 3.0 + (e[0] * e[1] + e[1] * e[2] + e[2] * e[0]);
  cplx rhs5 = (0.5 * r5 - 5.0 / 6.0 * r3 * r3) / std::pow(L.omega1, 4);
  return {relerr(lhs3, rhs3, 0.0), relerr(lhs5, rhs5, b.scale * b.scale)};
}

struct PerturbedLattice {
  BranchConfig b;
  Lattice L;
};

inline PerturbedLattice perturbed(const BranchConfig& b, int nu, cplx h, const QuadConfig& q = {}, const EvalConfig& cfg = {}) {
  auto e = b.e;
  e[nu] += h;
  PerturbedLattice r{make_branch_with_frame(e, b.frame_angle, b.reach), {}};
  r.L = periods(r.b, q, cfg);
  return r;
}

struct LemmaFrac {
  cplx lhs_fd, rhs;
  double residual;
};

// derivative of eta1 t^2 / (2 omega1) in e_nu: central difference vs closed form
inline LemmaFrac lemma_frac_check(const BranchConfig& b, const Lattice& L, int nu, cplx t, const QuadConfig& q = {}) {
  double h = 1e-5 * b.scale;
  auto P = perturbed(b, nu, h, q, L.cfg), M = perturbed(b, nu, -h, q, L.cfg);
  auto f = [&](const Lattice& X) { return X.eta1 * t * t / (2.0 * X.omega1); };
  LemmaFrac r;
  r.lhs_fd = (f(P.L) - f(M.L)) / (2.0 * h);
  cplx dl = dlog_omega1_de(b, L, nu);
  r.rhs = t * t * dl * dl * prod_others(b, nu) - t * t / 12.0;
  r.residual = relerr(r.lhs_fd, r.rhs, 0.0);
  return r;
}

}  // namespace isotau
