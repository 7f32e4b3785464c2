#pragma once

#include "curve.hpp"

#include <functional>

namespace isotau {

enum class B0Reading { commutator, zero };
enum class Y1Reading { corrected, uncorrected };

struct ModelOptions {
  cplx m_inf = -I;  // +I exposes the alternative sign
  B0Reading b0 = B0Reading::commutator;
  EvalConfig eval{};
  QuadConfig quad{};
};

struct DeformationParams {
  BranchConfig branch;
  Lattice lat;
  HalfPeriodTable hp;
  bool delta_flipped = false;
  cplx a, alpha, t;
  ThetaChar chr;
  cplx u_phi, u_psi;
  std::vector<cplx> a_path;  // a -> x0 in the cut plane; alpha and Y(x0) are both carried along it
  // data at alpha
  cplx wpa, wp1a, wp2a, wp3a;
  cplx K;  // t/2 (wp''/(2 wp') + zeta(2 alpha))
  ModelOptions opt;
};

inline void check_params(const DeformationParams& P) {
  const auto& b = P.branch;
  for (auto e : b.e)
    if (std::abs(P.a - e) < 1e-6 * b.scale) throw config_error("a coincides with a branch point");
  if (std::abs(P.wp1a) < 1e-10 * std::pow(b.scale, 1.5)) throw degenerate_error("wp'(alpha) = 0");
  cplx th = theta(P.chr, P.t / P.lat.omega1, P.lat.Omega, P.lat.cfg);
  cplx ref = theta(P.chr, 0.37 / P.lat.omega1, P.lat.Omega, P.lat.cfg);
  if (std::abs(th) < 1e-10 * std::max(1.0, std::abs(ref))) throw degenerate_error("theta[p,q](t/omega1) vanishes");
}

inline bool path_is_clean(const BranchConfig& b, const std::vector<cplx>& path) {
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    cplx p = path[i], q = path[i + 1];
    if (segment_hits(p, q, b.e[1], b.e[2]) || segment_hits(p, q, b.e[0], b.e[0] + b.cutA_dir, true)) return false;
    for (auto e : b.e)
      if (dist_point_segment(e, p, q) < 0.05 * b.gap) return false;
  }
  return true;
}

inline DeformationParams make_params_on(const BranchConfig& b, cplx a, cplx t, ThetaChar chr, const ModelOptions& opt = {},
                                        const std::vector<cplx>* waypoints = nullptr) {
  for (auto e : b.e)
    if (std::abs(a - e) < 1e-6 * b.scale) throw config_error("a coincides with a branch point");
  DeformationParams P;
  P.branch = b;
  P.opt = opt;
  auto pr = periods_ex(b, opt.quad, opt.eval);
  P.lat = pr.lat;
  P.delta_flipped = pr.delta_flipped;
  P.hp = half_periods(b, P.lat);
  P.a = a;
  P.t = t;
  P.chr = chr;
  if (b.cut_distance(a) < 1e-9 * b.scale) throw geometry_error("a lies on a branch cut");
  if (waypoints) {
    P.a_path = {a};
    P.a_path.insert(P.a_path.end(), waypoints->begin(), waypoints->end());
    P.a_path.push_back(b.x0);
    if (!path_is_clean(b, P.a_path)) P.a_path.clear();
  }
  if (P.a_path.empty()) P.a_path = cut_plane_path(b, a, b.x0);
  std::vector<cplx> back(P.a_path.rbegin(), P.a_path.rend());
  P.alpha = lift_along(b, P.lat, back, abel_base(b, P.lat));
  if (std::abs(wp_prime(P.lat, P.alpha) - b.y1(a)) > 1e-6 * std::max(1.0, std::abs(b.y1(a))))
    throw precision_error("alpha: continuation from the base point disagrees with sheet 1");
  P.u_phi = P.alpha;
  P.u_psi = -P.alpha;
  auto j = wp_jet(P.lat, P.alpha);
  P.wpa = j.wp;
  P.wp1a = j.wp1;
  P.wp2a = j.wp2;
  P.wp3a = j.wp3;
  P.K = t / 2.0 * (P.wp2a / (2.0 * P.wp1a) + zeta(P.lat, 2.0 * P.alpha));
  check_params(P);
  return P;
}

inline DeformationParams make_params(const std::array<cplx, 3>& e, cplx a, cplx t, double p, double q,
                                     const ModelOptions& opt = {}) {
  return make_params_on(make_branch(e, a), a, t, {p, q}, opt);
}

// same frame, shifted parameters; keeps every branch convention continuous
inline DeformationParams shifted(const DeformationParams& P, int which, cplx h) {
  std::vector<cplx> mid(P.a_path.begin() + 1, P.a_path.end() - 1);
  if (which == 0) return make_params_on(P.branch, P.a, P.t + h, P.chr, P.opt, &mid);
  auto e = P.branch.e;
  e[which - 1] += h;
  return make_params_on(make_branch_with_frame(e, P.branch.frame_angle, P.branch.reach), P.a, P.t, P.chr, P.opt, &mid);
}

// ---------------------------------------------------------------- Phi

// Phi = R diag(exp(Pi), exp(-Pi)); R and its u-derivative are free of the essential factor
struct PhiEval {
  Mat2 R, R_u;
  cplx Pi, dPi;
};

inline PhiEval phi_eval(const DeformationParams& P, cplx u) {
  const Lattice& L = P.lat;
  const ThetaChar& c = P.chr;
  auto ent = [&](cplx v, cplx w0) {  // sigma[p,q](v + w0 + t) sigma(v - w0), and its log-derivative
    cplx s1 = sigma_char(L, c, v + w0 + P.t), s2 = sigma(L, v - w0);
    cplx d = dlog_sigma_char(L, c, v + w0 + P.t) + zeta(L, v - w0);
    return std::pair{s1 * s2, d};
  };
  auto [f1, d1] = ent(u, P.u_phi);
  auto [f2, d2] = ent(-u, P.u_phi);
  auto [g1, e1] = ent(u, P.u_psi);
  auto [g2, e2] = ent(-u, P.u_psi);
  PhiEval r;
  r.R = mat2(f1, f2, g1, g2);
  r.R_u = mat2(f1 * d1, -f2 * d2, g1 * e1, -g2 * e2);
  auto za = wp_jet(L, u - P.alpha), zb = wp_jet(L, u + P.alpha);
  r.Pi = -P.t / 2.0 * (za.zeta + zb.zeta);
  r.dPi = P.t / 2.0 * (za.wp + zb.wp);
  return r;
}

inline Mat2 phi_full(const PhiEval& e) { return e.R * diag2(std::exp(e.Pi), std::exp(-e.Pi)); }

inline Mat2 phi_R(const DeformationParams& P, cplx u) {
  const Lattice& L = P.lat;
  auto ent = [&](cplx v, cplx w0) { return sigma_char(L, P.chr, v + w0 + P.t) * sigma(L, v - w0); };
  return mat2(ent(u, P.u_phi), ent(-u, P.u_phi), ent(u, P.u_psi), ent(-u, P.u_psi));
}

inline cplx det_phi(const DeformationParams& P, cplx u) { return det2(phi_R(P, u)); }

// G^(a): Phi's regular part at u = alpha
inline Mat2 G_a(const DeformationParams& P) {
  const Lattice& L = P.lat;
  cplx st = sigma_char(L, P.chr, P.t);
  return mat2(0.0, st * sigma(L, -2.0 * P.alpha) * std::exp(P.K), st * sigma(L, 2.0 * P.alpha) * std::exp(-P.K), 0.0);
}

inline Mat2 T_minus1(const DeformationParams& P) { return diag2(P.wp1a * P.t / 2.0, -P.wp1a * P.t / 2.0); }

// (d/dx Y) Y^{-1} from the closed form; independent of the branch of sqrt det and of the sheet of u
inline Mat2 A_from_phi(const DeformationParams& P, cplx u) {
  PhiEval e = phi_eval(P, u);
  Mat2 Ri = inv2(e.R);
  Mat2 M = (e.R_u + e.R * diag2(e.dPi, -e.dPi)) * Ri;
  Mat2 C = inv2(G_a(P));
  Mat2 out = C * M * inv2(C) - 0.5 * M.trace() * Mat2::Identity();
  return out / wp_prime(P.lat, u);
}

// ---------------------------------------------------------------- Y along paths

struct YState {
  cplx x, u, s;  // s = sqrt(det Phi(u) / det Phi(alpha)), continued
};

inline cplx det_alpha(const DeformationParams& P) { return det_phi(P, P.alpha); }

inline cplx u_near(const DeformationParams& P, cplx x, cplx guess) {
  return newton_wp(P.lat, x - P.branch.sum_e() / 3.0, guess);
}

// state at x close to a, reached without winding
inline YState y_start(const DeformationParams& P, cplx x) {
  auto ic = local_inverse_coeffs(P.lat, P.alpha);
  cplx X = x - P.a;
  cplx u = P.alpha + ic.c[0] * X + ic.c[1] * X * X + ic.c[2] * X * X * X;
  u = u_near(P, x, u);
  cplx s = std::sqrt(det_phi(P, u) / det_alpha(P));
  if (s.real() < 0) s = -s;
  if (std::abs(s - 1.0) > 0.5) throw geometry_error("y_start: point too far from a");
  return {x, u, s};
}

inline double singular_distance(const DeformationParams& P, cplx x) {
  double d = std::abs(x - P.a);
  for (auto e : P.branch.e) d = std::min(d, std::abs(x - e));
  return d;
}

inline void y_advance(const DeformationParams& P, YState& st, cplx target) {
  cplx Dal = det_alpha(P);
  while (st.x != target) {
    double h = std::max(0.1 * singular_distance(P, st.x), 1e-12);
    if (std::abs(target - st.x) < h) h = std::abs(target - st.x);
    for (int tries = 0;; ++tries) {
      if (tries > 40) throw precision_error("y_advance: step size collapsed");
      cplx xn = std::abs(target - st.x) <= h ? target : st.x + h * (target - st.x) / std::abs(target - st.x);
      cplx w1 = wp_prime(P.lat, st.u);
      cplx um = st.u + 0.5 * (xn - st.x) / w1;
      cplx up = st.u + (xn - st.x) / wp_prime(P.lat, um);
      cplx un = u_near(P, xn, up);
      cplx s = std::sqrt(det_phi(P, un) / Dal);
      if (std::abs(s - st.s) > std::abs(s + st.s)) s = -s;
      if (std::abs(s / st.s - 1.0) > 0.25 || std::abs(un - up) > 0.1 * std::abs(un - st.u)) {
        h *= 0.5;
        continue;
      }
      st = {xn, un, s};
      break;
    }
  }
}

inline void y_follow(const DeformationParams& P, YState& st, const std::vector<cplx>& pts) {
  for (auto p : pts) y_advance(P, st, p);
}

inline Mat2 y_value(const DeformationParams& P, const YState& st) {
  return inv2(G_a(P)) * phi_full(phi_eval(P, st.u)) / st.s;
}

// Y exp(-T^(a)), computed without forming the essential factors separately
inline Mat2 y_hat(const DeformationParams& P, const YState& st) {
  PhiEval e = phi_eval(P, st.u);
  cplx T11 = -(P.wp1a * P.t / 2.0) / (st.x - P.a);
  return inv2(G_a(P)) * e.R * diag2(std::exp(e.Pi - T11), std::exp(-e.Pi + T11)) / st.s;
}

// ---------------------------------------------------------------- local data at a

struct LocalCoeffs {
  Mat2 Y0, Y1;  // constant and linear Taylor coefficients of Y exp(-T^(a)) at x = a
  double radius;
};

// Cauchy means of Yhat and Yhat/(x - a) on a circle around a, Y continued along the circle
inline LocalCoeffs cauchy_local(const DeformationParams& P, double frac = 0.25, int n = 128) {
  double d = 1e300;
  for (auto e : P.branch.e) d = std::min(d, std::abs(e - P.a));
  double r = frac * d;
  YState st = y_start(P, P.a + 1e-3 * r);
  y_advance(P, st, P.a + r);
  LocalCoeffs c{Mat2::Zero(), Mat2::Zero(), r};
  for (int k = 0; k < n; ++k) {
    cplx z = r * std::exp(2.0 * pi * I * double(k) / double(n));
    if (k > 0) {
      std::vector<cplx> pts;
      for (int j = 1; j <= 4; ++j) pts.push_back(P.a + r * std::exp(2.0 * pi * I * (k - 1 + j / 4.0) / double(n)));
      y_follow(P, st, pts);
    }
    Mat2 Yh = y_hat(P, st);
    c.Y0 += Yh / double(n);
    c.Y1 += Yh / (z * double(n));
  }
  return c;
}

inline Mat2 Y1_closed(const DeformationParams& P, Y1Reading reading = Y1Reading::corrected) {
  const Lattice& L = P.lat;
  cplx st = sigma_char(L, P.chr, P.t);
  cplx r = P.wp2a / P.wp1a;
  cplx y11 = (dlog_sigma_char(L, P.chr, P.t) - P.t / 2.0 * (4.0 * P.wpa - 0.5 * r * r)) / P.wp1a;
  cplx s2a = reading == Y1Reading::corrected ? sigma(L, 2.0 * P.alpha) : sigma_char(L, P.chr, 2.0 * P.alpha);
  cplx y12 = -sigma_char(L, P.chr, P.t - 2.0 * P.alpha) / (st * s2a * P.wp1a) * std::exp(2.0 * P.K);
  cplx y21 = sigma_char(L, P.chr, P.t + 2.0 * P.alpha) / (st * s2a * P.wp1a) * std::exp(-2.0 * P.K);
  if (reading == Y1Reading::corrected) y21 = -y21;
  return mat2(y11, y12, y21, -y11);
}

// ---------------------------------------------------------------- monodromy data

struct MonodromyData {
  std::array<cplx, 4> m;  // index 0 = infinity, 1..3 = e1..e3
  std::array<Mat2, 4> M, C;
  Mat2 S1, S2, T0;
  Mat2 T0_a;
  Mat2 T_irr;
};

inline Mat2 mono_matrix(cplx m) { return mat2(0.0, m, -1.0 / m, 0.0); }

inline MonodromyData theoretical_monodromy(const DeformationParams& P) {
  cplx p = P.chr.p, q = P.chr.q;
  MonodromyData d;
  d.m = {P.opt.m_inf, I * std::exp(-2.0 * pi * I * p), -I * std::exp(2.0 * pi * I * (q - p)),
         I * std::exp(2.0 * pi * I * q)};
  for (int k = 0; k < 4; ++k) {
    d.M[k] = mono_matrix(d.m[k]);
    d.C[k] = mat2(I, -d.m[k], I, d.m[k]) / std::sqrt(2.0 * I * d.m[k]);
  }
  d.S1 = d.S2 = Mat2::Identity();
  d.T0 = diag2(-0.25, 0.25);
  d.T0_a = Mat2::Zero();
  d.T_irr = T_minus1(P);
  return d;
}

// ---------------------------------------------------------------- system coefficients

struct SystemCoefficients {
  Mat2 B_minus1, B0;
  std::array<Mat2, 3> A;      // A[k] is the residue at e_k
  std::array<Mat2, 3> G;      // G[k] frame at e_k
  std::array<cplx, 3> D;      // D^(nu) at the half period attached to e_k
  std::array<cplx, 3> pole;   // e_k
  Mat2 G_inf, G_inf_alt;
  cplx a;

  Mat2 operator()(cplx x) const {
    Mat2 r = B_minus1 / ((x - a) * (x - a)) + B0 / (x - a);
    for (int k = 0; k < 3; ++k) r += A[k] / (x - pole[k]);
    return r;
  }
};

inline SystemCoefficients coefficients(const DeformationParams& P) {
  const Lattice& L = P.lat;
  auto md = theoretical_monodromy(P);
  SystemCoefficients sc;
  sc.a = P.a;
  sc.B_minus1 = T_minus1(P);
  Mat2 Y1 = Y1_closed(P);
  sc.B0 = P.opt.b0 == B0Reading::commutator ? comm(Y1, sc.B_minus1) : Mat2::Zero();
  Mat2 Pm = mat2(0.0, std::exp(P.K), -std::exp(-P.K), 0.0);
  for (int nu = 0; nu < 3; ++nu) {
    int k = P.hp.perm[nu];
    cplx w = P.hp.omega_tilde[nu], et = P.hp.eta_tilde[nu];
    PhiEval e = phi_eval(P, w);
    cplx Ep = std::exp(e.Pi);
    cplx phi = e.R(0, 0) * Ep, psi = e.R(1, 0) * Ep;
    cplx dphi = (e.R_u(0, 0) + e.R(0, 0) * e.dPi) * Ep, dpsi = (e.R_u(1, 0) + e.R(1, 0) * e.dPi) * Ep;
    cplx m = md.m[k + 1];
    // phi psi (log phi - log psi)' written as a Wronskian, finite when phi or psi vanishes
    cplx D = 2.0 * m / P.opt.m_inf * Ep * Ep * (e.R_u(0, 0) * e.R(1, 0) - e.R(0, 0) * e.R_u(1, 0));
    if (std::abs(D) < 1e-300) throw degenerate_error("D^(nu) vanishes at the half period");
    Mat2 N = mat2(phi, dphi - et * phi, psi, dpsi - et * psi);
    cplx w2 = wp_jet(L, w).wp2;
    cplx qq = std::pow(w2 / 2.0, 0.25);
    Mat2 G = Pm * (std::sqrt(2.0 * m) / std::sqrt(D * I)) * N * diag2(qq, 1.0 / qq);
    sc.G[k] = G;
    sc.D[k] = D;
    sc.pole[k] = P.branch.e[k];
    sc.A[k] = G * diag2(-0.25, 0.25) * inv2(G);
  }
  PhiEval e0 = phi_eval(P, 0.0);
  cplx phi0 = e0.R(0, 0), psi0 = e0.R(1, 0);  // Pi(0) = 0
  cplx lphi0 = e0.R_u(0, 0) / phi0 + e0.dPi, lpsi0 = e0.R_u(1, 0) / psi0 + e0.dPi;
  Mat2 Ninf = mat2(-I * phi0, I * phi0 * lphi0, -I * psi0, I * psi0 * lpsi0) / std::sqrt(lphi0 - lpsi0);
  sc.G_inf = Pm * Ninf;
  sc.G_inf_alt = mat2(0.0, std::exp(P.K), std::exp(-P.K), 0.0) * Ninf;
  return sc;
}

// ---------------------------------------------------------------- deformation equation

enum class DeformReading { derived, direct };

struct DeformResidual {
  double derived, direct;  // max-entry residual of each reading
  double fd_scale;
};

inline Mat2 dT_minus1(const DeformationParams& P, int which) {
  if (which == 0) return diag2(P.wp1a / 2.0, -P.wp1a / 2.0);
  return T_minus1(P) * (-0.5 / (P.a - P.branch.e[which - 1]));
}

// right-hand side of dA_k for a unit step in the given parameter (0 = t, 1..3 = e_1..e_3)
inline std::array<Mat2, 3> deformation_rhs(const DeformationParams& P, const SystemCoefficients& sc, int which,
                                           DeformReading reading) {
  std::array<Mat2, 3> out;
  Mat2 Y1 = Y1_closed(P);
  Mat2 dT = dT_minus1(P, which);
  auto de = [&](int k) { return (which == k + 1) ? 1.0 : 0.0; };
  const auto& e = P.branch.e;
  for (int n = 0; n < 3; ++n) {
    Mat2 r = Mat2::Zero();
    for (int m = 0; m < 3; ++m) {
      if (m != n) {
        double w = reading == DeformReading::derived ? de(n) - de(m) : de(n);
        r += comm(sc.A[m], sc.A[n]) * (w / (e[n] - e[m]));
      }
      r += comm(sc.A[m], sc.A[n]) * (de(m) / (P.a - e[m]));
    }
    r -= comm(sc.A[n], sc.B_minus1) * (de(n) / ((P.a - e[n]) * (P.a - e[n])));
    if (reading == DeformReading::derived) r -= comm(sc.A[n], sc.B0) * (de(n) / (e[n] - P.a));
    r += comm(dT, sc.A[n]) / (P.a - e[n]);
    r += comm(comm(dT, Y1), sc.A[n]);
    out[n] = r;
  }
  return out;
}

inline DeformResidual deformation_residual(const DeformationParams& P, int which, double h) {
  DeformResidual res{0, 0, 0};
  if (h == 0) return res;
  auto sc = coefficients(P);
  auto Pp = shifted(P, which, h), Pm = shifted(P, which, -h);
  auto sp = coefficients(Pp), sm = coefficients(Pm);
  auto rd = deformation_rhs(P, sc, which, DeformReading::derived);
  auto rp = deformation_rhs(P, sc, which, DeformReading::direct);
  for (int k = 0; k < 3; ++k) {
    Mat2 fd = (sp.A[k] - sm.A[k]) / (2.0 * h);
    res.derived = std::max(res.derived, maxabs(fd - rd[k]));
    res.direct = std::max(res.direct, maxabs(fd - rp[k]));
    res.fd_scale = std::max(res.fd_scale, maxabs(fd));
  }
  return res;
}

struct DeformCheck {
  double coarse, fine, extrapolated;  // relative residuals at h, h/2 and of the Richardson value
  double direct;                      // extrapolated residual of the direct-index reading
  double fd_scale;
  bool order_ok;  // coarse/fine close to 4, or both already at roundoff
};

// central differences at h and h/2, Richardson-extrapolated, relative to max(1, |dA|)
inline DeformCheck deformation_check(const DeformationParams& P, int which, double h) {
  auto sc = coefficients(P);
  auto rd = deformation_rhs(P, sc, which, DeformReading::derived);
  auto rp = deformation_rhs(P, sc, which, DeformReading::direct);
  auto fd = [&](double s) {
    auto sp = coefficients(shifted(P, which, s)), sm = coefficients(shifted(P, which, -s));
    std::array<Mat2, 3> out;
    for (int k = 0; k < 3; ++k) out[k] = (sp.A[k] - sm.A[k]) / (2.0 * s);
    return out;
  };
  auto f1 = fd(h), f2 = fd(h / 2);
  DeformCheck c{0, 0, 0, 0, 0, true};
  double worst[4] = {0, 0, 0, 0};
  for (int k = 0; k < 3; ++k) {
    Mat2 fr = (4.0 * f2[k] - f1[k]) / 3.0;
    c.fd_scale = std::max(c.fd_scale, maxabs(fr));
    worst[0] = std::max(worst[0], maxabs(f1[k] - rd[k]));
    worst[1] = std::max(worst[1], maxabs(f2[k] - rd[k]));
    worst[2] = std::max(worst[2], maxabs(fr - rd[k]));
    worst[3] = std::max(worst[3], maxabs(fr - rp[k]));
  }
  double s = std::max(1.0, c.fd_scale);
  c.coarse = worst[0] / s;
  c.fine = worst[1] / s;
  c.extrapolated = worst[2] / s;
  c.direct = worst[3] / s;
  double ratio = c.fine > 0 ? c.coarse / c.fine : 4.0;
  c.order_ok = c.coarse < 1e-9 || (ratio > 2.5 && ratio < 6.0);
  return c;
}

}  // namespace isotau
