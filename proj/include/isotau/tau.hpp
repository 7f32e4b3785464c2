#pragma once

#include "monodromy.hpp"

namespace isotau {

inline cplx f_func(const std::array<cplx, 3>& e, cplx a) {
  cplx prod = (a - e[0]) * (a - e[1]) * (a - e[2]);
  cplx s = 0;
  for (auto ek : e) s += 1.0 / ((a - ek) * (a - ek));
  return -a + (e[0] + e[1] + e[2]) / 3.0 + 0.5 * prod * s;
}

// d f / d e_nu
inline cplx df_de(const std::array<cplx, 3>& e, cplx a, int nu) {
  cplx prod = (a - e[0]) * (a - e[1]) * (a - e[2]);
  cplx s = 0;
  for (auto ek : e) s += 1.0 / ((a - ek) * (a - ek));
  cplx d = a - e[nu];
  return 1.0 / 3.0 + 0.5 * (-prod / d * s + prod * 2.0 / (d * d * d));
}

inline cplx H_t(const DeformationParams& P) {
  return dlog_sigma_char(P.lat, P.chr, P.t) + P.t / 2.0 * f_func(P.branch.e, P.a);
}

// d/de_nu log theta[p,q](t/omega1; Omega)
inline cplx dlog_theta_de(const DeformationParams& P, int nu) {
  const Lattice& L = P.lat;
  cplx z = P.t / L.omega1;
  auto j = theta_jet(P.chr, z, L.Omega, 1, L.cfg, true);
  cplx dl = dlog_omega1_de(P.branch, L, nu);
  return (j.dz[1] * (-z * dl) + j.dOmega * dOmega_de(P.branch, L, nu)) / j.dz[0];
}

// Res_{e_nu} (1/2) tr (dY/dx Y^-1)^2, the seven-term closed form
inline cplx residue_formula(const DeformationParams& P, int nu) {
  const auto& b = P.branch;
  cplx t = P.t, d = P.a - b.e[nu];
  cplx dl = dlog_omega1_de(b, P.lat, nu);
  cplx pr = prod_others(b, nu);
  cplx sd = 0;
  for (int m = 0; m < 3; ++m)
    if (m != nu) sd += b.e[nu] - b.e[m];
  return -sum_inv_others(b, nu) / 8.0 - 0.5 * dl + t * t * dl * dl * pr + dlog_theta_de(P, nu) +
         t / (2.0 * d) * dlog_sigma_char(P.lat, P.chr, t) + t * t / 4.0 * pr / (d * d) + t * t / (6.0 * d) * sd;
}

// e_nu-component of omega_a: tr(Y1 dT_{-1}) for the direction e_nu
inline cplx omega_a_e(const DeformationParams& P, int nu) {
  return -P.t / (2.0 * (P.a - P.branch.e[nu])) * H_t(P);
}

inline cplx H_nu(const DeformationParams& P, int nu) {
  const auto& b = P.branch;
  cplx t = P.t;
  cplx dl = dlog_omega1_de(b, P.lat, nu);
  cplx lemma_frac = t * t * dl * dl * prod_others(b, nu) - t * t / 12.0;
  return dlog_theta_de(P, nu) - 0.5 * dl - sum_inv_others(b, nu) / 8.0 + lemma_frac +
         t * t / 4.0 * df_de(b.e, P.a, nu);
}

struct Hamiltonians {
  cplx Ht;
  std::array<cplx, 3> He;
};

inline Hamiltonians hamiltonians(const DeformationParams& P) {
  return {H_t(P), {H_nu(P, 0), H_nu(P, 1), H_nu(P, 2)}};
}

// log tau split into factors so that differences can be taken without branch jumps
struct LogTauParts {
  cplx theta, omega1;
  std::array<cplx, 3> diffs;  // e1-e2, e1-e3, e2-e3
  cplx gauss;                  // eta1 t^2/(2 omega1) + t^2 f / 4
};

inline LogTauParts tau_parts(const DeformationParams& P) {
  const auto& e = P.branch.e;
  LogTauParts r;
  r.theta = theta(P.chr, P.t / P.lat.omega1, P.lat.Omega, P.lat.cfg);
  r.omega1 = P.lat.omega1;
  r.diffs = {e[0] - e[1], e[0] - e[2], e[1] - e[2]};
  r.gauss = P.lat.eta1 * P.t * P.t / (2.0 * P.lat.omega1) + P.t * P.t / 4.0 * f_func(e, P.a);
  return r;
}

// principal-branch value of log tau
inline cplx log_tau(const DeformationParams& P) {
  auto r = tau_parts(P);
  cplx s = std::log(r.theta) - 0.5 * std::log(r.omega1) + r.gauss;
  for (auto d : r.diffs) s -= std::log(d) / 8.0;
  return s;
}

inline cplx tau_closed_form(const DeformationParams& P) { return std::exp(log_tau(P)); }

// log tau(Q) - log tau(P), continued along a short parameter step
inline cplx log_tau_diff(const DeformationParams& Q, const DeformationParams& P) {
  auto a = tau_parts(Q), b = tau_parts(P);
  cplx s = log_ratio(a.theta, b.theta) - 0.5 * log_ratio(a.omega1, b.omega1) + (a.gauss - b.gauss);
  for (int k = 0; k < 3; ++k) s -= log_ratio(a.diffs[k], b.diffs[k]) / 8.0;
  return s;
}

struct FdResult {
  cplx fd, fd_half, richardson;
  double richardson_gap;  // |fd - richardson| relative
};

// central difference of log tau in parameter `which` (0 = t, 1..3 = e)
inline FdResult dlog_tau_fd(const DeformationParams& P, int which, double h) {
  auto one = [&](double s) {
    auto Qp = shifted(P, which, s), Qm = shifted(P, which, -s);
    return log_tau_diff(Qp, Qm) / (2.0 * s);
  };
  FdResult r;
  r.fd = one(h);
  r.fd_half = one(h / 2);
  r.richardson = (4.0 * r.fd_half - r.fd) / 3.0;
  r.richardson_gap = std::abs(r.fd - r.richardson) / std::max(1.0, std::abs(r.richardson));
  return r;
}

inline cplx hamiltonian(const DeformationParams& P, int which) {
  return which == 0 ? H_t(P) : H_nu(P, which - 1);
}

// max over the six pairs of |d_i H_j - d_j H_i|
inline double closedness_residual(const DeformationParams& P, double h = 1e-4) {
  std::array<std::array<cplx, 4>, 4> d{};
  for (int i = 0; i < 4; ++i) {
    auto Qp = shifted(P, i, h), Qm = shifted(P, i, -h);
    for (int j = 0; j < 4; ++j) d[i][j] = (hamiltonian(Qp, j) - hamiltonian(Qm, j)) / (2.0 * h);
  }
  double w = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) w = std::max(w, std::abs(d[i][j] - d[j][i]));
  return w;
}

// ---------------------------------------------------------------- contour residues

// (1/2 pi i) closed integral of g around c, trapezoid rule
inline cplx circle_residue(const std::function<cplx(cplx)>& g, cplx c, double r, int n = 128) {
  cplx s = 0;
  for (int k = 0; k < n; ++k) {
    cplx z = r * std::exp(2.0 * pi * I * double(k) / double(n));
    s += g(c + z) * z;
  }
  return s / double(n);
}

inline cplx half_tr_sq(const SystemCoefficients& sc, cplx x) {
  Mat2 A = sc(x);
  return 0.5 * (A * A).trace();
}

inline double residue_radius(const DeformationParams& P, cplx c) {
  double d = 1e300;
  for (auto e : P.branch.e)
    if (std::abs(e - c) > 0) d = std::min(d, std::abs(e - c));
  if (std::abs(P.a - c) > 0) d = std::min(d, std::abs(P.a - c));
  return 0.05 * d;
}

inline cplx residue_contour(const DeformationParams& P, int nu, int n = 256) {
  auto sc = coefficients(P);
  cplx e = P.branch.e[nu];
  return circle_residue([&](cplx x) { return half_tr_sq(sc, x); }, e, residue_radius(P, e), n);
}

struct SumRule {
  std::array<cplx, 3> at_e;
  cplx at_a, at_inf;
  double residual;
};

// residue theorem on the sphere for (1/2) tr A^2 with the analytic residues at the e's
inline SumRule residue_sum_rule(const DeformationParams& P, int n = 512) {
  auto sc = coefficients(P);
  auto g = [&](cplx x) { return half_tr_sq(sc, x); };
  SumRule r;
  double scale = 0;
  cplx total = 0;
  for (int k = 0; k < 3; ++k) {
    r.at_e[k] = residue_formula(P, k);
    total += r.at_e[k];
    scale = std::max(scale, std::abs(r.at_e[k]));
  }
  r.at_a = circle_residue(g, P.a, 0.5 * residue_radius(P, P.a) / 0.05, n);
  double R = 4.0 * (P.branch.reach + std::abs(P.a - P.branch.centroid));
  r.at_inf = -circle_residue(g, P.branch.centroid, R, n);
  total += r.at_a + r.at_inf;
  scale = std::max({scale, std::abs(r.at_a), 1.0});
  r.residual = std::abs(total) / scale;
  return r;
}

// omega_a's dt-part, Res_{x=a} tr(Yhat^-1 Yhat_x dT_{-1}/dt)/(x - a), from the constructed Y
inline cplx H_t_contour(const DeformationParams& P, int n = 128) {
  auto sc = coefficients(P);
  double d = 1e300;
  for (auto e : P.branch.e) d = std::min(d, std::abs(e - P.a));
  double r = 0.25 * d;
  Mat2 Tm = T_minus1(P), dT = dT_minus1(P, 0);
  YState st = y_start(P, P.a + 1e-3 * r);
  y_advance(P, st, P.a + r);
  cplx s = 0;
  for (int k = 0; k < n; ++k) {
    cplx z = r * std::exp(2.0 * pi * I * double(k) / double(n));
    if (k > 0) {
      std::vector<cplx> pts;
      for (int j = 1; j <= 4; ++j) pts.push_back(P.a + r * std::exp(2.0 * pi * I * (k - 1 + j / 4.0) / double(n)));
      y_follow(P, st, pts);
    }
    cplx x = P.a + z;
    Mat2 Yh = y_hat(P, st);
    Mat2 L = inv2(Yh) * sc(x) * Yh - Tm / (z * z);
    s += (L * dT).trace() / z * z;
  }
  return s / double(n);
}

// ---------------------------------------------------------------- appendix (sum of e = 0)

struct AppendixParams {
  Lattice lat;  // wp built from the centred branch points
  cplx alpha, t;
  int l = 0;
};

inline AppendixParams appendix_params(const DeformationParams& P, int l) { return {P.lat, P.alpha, P.t, l}; }

struct AppendixLocal {
  cplx wp, wp1, wp2, wp3;
};

inline AppendixLocal appendix_local(const AppendixParams& ap) {
  auto j = wp_jet(ap.lat, ap.alpha);
  return {j.wp, j.wp1, j.wp2, j.wp3};
}

inline cplx appendix_y_l(const AppendixParams& ap, int l, cplx t, cplx z) {
  const Lattice& L = ap.lat;
  cplx al = ap.alpha;
  return std::pow(sigma(L, z - al), double(l - 1)) * std::pow(sigma(L, z + al), double(-l)) *
         sigma(L, z + t + double(2 * l - 1) * al) * std::exp(-t / 2.0 * (zeta(L, z - al) + zeta(L, z + al)));
}

inline cplx appendix_c0(const AppendixParams& ap, int l, cplx t) {
  const Lattice& L = ap.lat;
  auto w = appendix_local(ap);
  return std::pow(sigma(L, 2.0 * ap.alpha), double(-l)) * sigma(L, t + 2.0 * double(l) * ap.alpha) *
         std::exp(-t / 2.0 * zeta(L, 2.0 * ap.alpha) - t / 4.0 * w.wp2 / w.wp1);
}

inline cplx appendix_c1(const AppendixParams& ap, int l, cplx t) {
  const Lattice& L = ap.lat;
  return zeta(L, t + 2.0 * double(l) * ap.alpha) - double(l) * zeta(L, 2.0 * ap.alpha) + t / 2.0 * wp(L, 2.0 * ap.alpha);
}

inline cplx appendix_h_l(const AppendixParams& ap, cplx t) {
  auto w = appendix_local(ap);
  const Lattice& L = ap.lat;
  cplx s2 = wp(L, 2.0 * ap.alpha) + w.wp2 * w.wp2 / (4.0 * w.wp1 * w.wp1) - w.wp3 / (6.0 * w.wp1);
  return t * t / 4.0 * s2 - t * double(ap.l) * (zeta(L, 2.0 * ap.alpha) + w.wp2 / (2.0 * w.wp1));
}

inline cplx appendix_tau_l(const AppendixParams& ap, cplx t) {
  return sigma(ap.lat, t + 2.0 * double(ap.l) * ap.alpha) * std::exp(appendix_h_l(ap, t));
}

inline cplx appendix_dlog_tau(const AppendixParams& ap, cplx t) {
  auto w = appendix_local(ap);
  const Lattice& L = ap.lat;
  cplx s2 = wp(L, 2.0 * ap.alpha) + w.wp2 * w.wp2 / (4.0 * w.wp1 * w.wp1) - w.wp3 / (6.0 * w.wp1);
  return zeta(L, t + 2.0 * double(ap.l) * ap.alpha) + t / 2.0 * s2 -
         double(ap.l) * (zeta(L, 2.0 * ap.alpha) + w.wp2 / (2.0 * w.wp1));
}

// Y1 at alpha from c0, c1; corrected has wp''/(2 wp'^2) in the diagonal term, uncorrected wp''/wp'^2
inline Mat2 appendix_Y1(const AppendixParams& ap, Y1Reading reading = Y1Reading::corrected) {
  auto w = appendix_local(ap);
  int l = ap.l;
  cplx t = ap.t;
  Mat2 M = mat2(appendix_c1(ap, l, t), appendix_c0(ap, 1 - l, -t) / appendix_c0(ap, l, t),
                appendix_c0(ap, l + 1, t) / appendix_c0(ap, -l, -t), appendix_c1(ap, -l, -t)) /
           w.wp1;
  cplx dd = t / 2.0 * (w.wp2 * w.wp2 / (4.0 * std::pow(w.wp1, 3)) - w.wp3 / (6.0 * w.wp1 * w.wp1));
  cplx k = reading == Y1Reading::corrected ? w.wp2 / (2.0 * w.wp1 * w.wp1) : w.wp2 / (w.wp1 * w.wp1);
  return M + dd * diag2(1, -1) - k * diag2(double(l - 1), double(-l - 1));
}

// appendix Y evaluated through z with wp(z) = x - sum/3; returns Y exp(-T) exp(-K)
inline Mat2 appendix_Y_hat(const AppendixParams& ap, cplx z) {
  auto w = appendix_local(ap);
  int l = ap.l;
  cplx t = ap.t;
  cplx xi = wp(ap.lat, z) - w.wp;
  Mat2 M = mat2(appendix_y_l(ap, l, t, z), appendix_y_l(ap, l, t, -z), appendix_y_l(ap, l + 1, t, z),
                appendix_y_l(ap, l + 1, t, -z));
  Mat2 Y = diag2(1.0 / appendix_c0(ap, l, t), 1.0 / appendix_c0(ap, -l, -t)) * M;
  cplx tb = w.wp1 * t;
  cplx T0 = -tb / 2.0 / xi + double(l - 1) * std::log(xi), T1 = tb / 2.0 / xi + double(-l - 1) * std::log(xi);
  cplx K0 = double(1 - l) * std::log(w.wp1), K1 = double(l + 1) * std::log(w.wp1);
  return Y * diag2(std::exp(-T0 - K0), std::exp(-T1 - K1));
}

}  // namespace isotau
